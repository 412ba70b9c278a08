#include "cellsim/lambda_solver.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"

#include <cmath>

namespace cellsim {

int TransitionSpec::excited_m() const
{
    const auto [mc, mp] = mF_pair;
    if (std::abs(mc - mp) == 2) return (mc + mp) / 2;
    return std::abs(mc) > std::abs(mp) ? mc : mp;
}

double TransitionSpec::control_strength() const
{
    return 3.0 * d1_line_strength(constants().species(species), ground_F, mF_pair.first, excited_F, excited_m());
}

double TransitionSpec::probe_strength() const
{
    return 3.0 * d1_line_strength(constants().species(species), ground_F, mF_pair.second, excited_F, excited_m());
}

std::vector<std::string> TransitionSpec::problems() const
{
    std::vector<std::string> p;
    if (delta_m != 1 && delta_m != 2) p.push_back("transition.delta_m must be 1 or 2");
    if (std::abs(mF_pair.second - mF_pair.first) != delta_m)
        p.push_back("transition.delta_m must equal |m2 - m1| of the mF pair");
    if (std::abs(mF_pair.first) > ground_F || std::abs(mF_pair.second) > ground_F)
        p.push_back("transition mF pair exceeds the ground F");
    bool has_level = false;
    for (const auto& l : constants().species(species).ground_hyperfine) has_level |= l.F == ground_F;
    if (!has_level) p.push_back("transition.ground_F is not a ground level of " + to_string(species));
    if (p.empty() && (control_strength() <= 0.0 || probe_strength() <= 0.0))
        p.push_back("transition legs are dipole-forbidden");
    return p;
}

double LambdaParams::wavenumber() const { return phys::two_pi / wavelength; }

double LambdaParams::coupling() const
{
    const double d = constants().effective_dipole;
    return transition.probe_strength() * d * d / (phys::eps0 * phys::hbar);
}

std::vector<std::string> LambdaParams::problems() const
{
    std::vector<std::string> p = transition.problems();
    if (!(omega_c >= 0.0)) p.push_back("omega_c must be >= 0");
    if (!(omega_p >= 0.0)) p.push_back("omega_p must be >= 0");
    if (!(gamma_excited >= 0.0)) p.push_back("gamma_excited must be >= 0");
    if (!(gamma_ground >= 0.0)) p.push_back("gamma_ground must be >= 0");
    if (!(doppler_width >= 0.0)) p.push_back("doppler_width must be >= 0");
    if (!(density > 0.0)) p.push_back("density must be > 0");
    if (!(length > 0.0)) p.push_back("length must be > 0");
    if (!(wavelength > 0.0)) p.push_back("wavelength must be > 0");
    if (omega_p > omega_c && omega_c > 0.0) p.push_back("omega_p exceeds omega_c (weak-probe regime)");
    return p;
}

LambdaParams make_lambda_params(const TransitionSpec& t, double temperature_C, double control_mW_cm2,
                                double probe_mW_cm2, double gamma_ground, double density_cm3, double length_m)
{
    const auto& sp = constants().species(t.species);
    LambdaParams p;
    p.transition = t;
    p.omega_c = rabi_from_intensity(control_mW_cm2, sp) * std::sqrt(t.control_strength());
    p.omega_p = rabi_from_intensity(probe_mW_cm2, sp) * std::sqrt(t.probe_strength());
    p.gamma_excited = sp.excited_decay_rate;
    p.gamma_ground = gamma_ground;
    p.doppler_width = doppler_sigma(temperature_C, sp);
    p.density = density_cm3;
    p.length = length_m;
    p.wavelength = sp.d1_wavelength;
    return p;
}

namespace {

void require_solvable(const LambdaParams& p)
{
    if (!(p.omega_c > 0.0) && !(p.gamma_ground > 0.0))
        throw DomainError("susceptibility needs omega_c > 0 or gamma_ground > 0");
    if (!(p.gamma_excited > 0.0) && !(p.gamma_ground > 0.0))
        throw DomainError("susceptibility needs a non-zero decay rate");
}

std::complex<double> response(const LambdaParams& p, double delta)
{
    return lambda_response(delta, p.one_photon_detuning, p.gamma_excited, p.gamma_ground, p.omega_c * p.omega_c,
                           p.doppler_width);
}

double transmission_of(const LambdaParams& p, std::complex<double> chi)
{
    return std::exp(-p.wavenumber() * p.length * chi.imag());
}

}  // namespace

std::complex<double> steady_state_susceptibility(const LambdaParams& p)
{
    require_solvable(p);
    return p.coupling() * p.density * 1e6 * response(p, p.two_photon_detuning);
}

Eigen::ArrayXcd susceptibility(const LambdaParams& p, const Eigen::ArrayXd& two_photon_detunings)
{
    require_solvable(p);
    const double kn = p.coupling() * p.density * 1e6;
    Eigen::ArrayXcd out(two_photon_detunings.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = kn * response(p, two_photon_detunings[i]);
    return out;
}

Spectrum susceptibility_spectrum(const LambdaParams& p, const Eigen::ArrayXd& grid_hz)
{
    Spectrum s;
    s.kind = SpectrumKind::susceptibility;
    s.detuning_hz = grid_hz;
    s.values = susceptibility(p, phys::two_pi * grid_hz);
    s.validate();
    return s;
}

Spectrum eit_spectrum(const LambdaParams& p, const Eigen::ArrayXd& grid_hz)
{
    Spectrum s = susceptibility_spectrum(p, grid_hz);
    s.kind = SpectrumKind::transmission;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) s.values[i] = transmission_of(p, s.values[i]);
    return s;
}

double background_transmission(const LambdaParams& p)
{
    LambdaParams off = p;
    off.omega_c = 0.0;
    off.gamma_ground = 1.0;
    return transmission_of(p, steady_state_susceptibility(off));
}

double eit_fwhm_estimate(const LambdaParams& p)
{
    const double w = 2.0 * p.gamma_ground + p.omega_c * p.omega_c / p.gamma_excited;
    return w / phys::two_pi;
}

double eit_fwhm(const LambdaParams& p, double max_span_hz)
{
    require_solvable(p);
    auto T = [&](double delta) {
        LambdaParams q = p;
        q.two_photon_detuning = delta;
        return transmission_of(p, steady_state_susceptibility(q));
    };
    const double t0 = T(0.0);
    const double tb = background_transmission(p);
    if (!(t0 - tb > 1e-14 * t0)) throw RangeError("eit_fwhm: no transparency feature above background");
    const double half = 0.5 * (t0 + tb);
    const double seed = phys::two_pi * std::max(eit_fwhm_estimate(p), 1e-6) / 4.0;
    const double limit = max_span_hz > 0.0 ? phys::two_pi * max_span_hz
                                           : std::max(p.doppler_width, p.gamma_excited);

    auto crossing = [&](double sign) {
        double lo = 0.0;
        double hi = std::min(seed, limit);
        while (T(sign * hi) >= half) {
            lo = hi;
            if (hi >= limit)
                throw RangeError("eit_fwhm: no half-max crossing within the search span; widen the grid");
            hi = std::min(2.0 * hi, limit);
        }
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (T(sign * mid) >= half ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    return (crossing(1.0) + crossing(-1.0)) / phys::two_pi;
}

Medium Medium::single(const LambdaParams& p)
{
    require_solvable(p);
    Medium m;
    m.coupling_density = p.coupling() * p.density * 1e6;
    m.gamma_excited = p.gamma_excited;
    m.one_photon_detuning = p.one_photon_detuning;
    m.doppler_width = p.doppler_width;
    m.wavenumber = p.wavenumber();
    m.length = p.length;
    m.ensembles = {{1.0, p.gamma_ground, p.omega_c}};
    return m;
}

std::complex<double> Medium::chi(double delta) const
{
    std::complex<double> r = 0.0;
    for (const auto& e : ensembles)
        if (e.weight != 0.0)
            r += e.weight * lambda_response(delta, one_photon_detuning, gamma_excited, e.gamma_ground,
                                            e.omega_c * e.omega_c, doppler_width);
    return coupling_density * r;
}

std::complex<double> Medium::chi_slope(double delta) const
{
    std::complex<double> r = 0.0;
    for (const auto& e : ensembles)
        if (e.weight != 0.0)
            r += e.weight * lambda_response_slope(delta, one_photon_detuning, gamma_excited, e.gamma_ground,
                                                  e.omega_c * e.omega_c, doppler_width);
    return coupling_density * r;
}

std::complex<double> Medium::transfer(double delta) const
{
    const std::complex<double> i(0.0, 1.0);
    return std::exp(i * (0.5 * wavenumber * length) * chi(delta));
}

double Medium::transmission(double delta) const { return std::exp(-wavenumber * length * chi(delta).imag()); }

double Medium::group_delay() const { return 0.5 * wavenumber * length * chi_slope(0.0).real(); }

double gradient_broadening(int delta_m, double gradient_width_hz)
{
    if (delta_m != 1 && delta_m != 2) throw DomainError("gradient_broadening: delta_m must be 1 or 2");
    return delta_m * gradient_width_hz;
}

double combine_widths(double a, double b, WidthSum mode)
{
    return mode == WidthSum::linear ? a + b : std::hypot(a, b);
}

}  // namespace cellsim
