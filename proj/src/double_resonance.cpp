#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"
#include "cellsim/lambda_solver.hpp"

#include <cmath>

namespace cellsim {

// Optical pumping builds a ground-state orientation P0 = R/(R + gamma); the rf
// field saturates the Zeeman resonance like a spin in a Bloch picture with
// T1 = T2 = 1/(gamma + R). The probe sees optical depth OD (1 - P).

std::vector<std::string> DRParams::problems() const
{
    std::vector<std::string> p;
    if (!(omega_rf >= 0.0)) p.push_back("dr.omega_rf must be >= 0");
    if (!(pump_intensity >= 0.0)) p.push_back("dr.pump_intensity must be >= 0");
    if (!(gamma_ground > 0.0)) p.push_back("dr.gamma_ground must be > 0");
    if (!(doppler_width >= 0.0)) p.push_back("dr.doppler_width must be >= 0");
    if (!(optical_depth >= 0.0)) p.push_back("dr.optical_depth must be >= 0");
    return p;
}

double optical_pumping_rate(double intensity_mW_cm2, const AtomSpecies& species, double doppler_width)
{
    const double om = rabi_from_intensity(intensity_mW_cm2, species);
    const double G = species.excited_decay_rate;
    const auto r = lambda_response(0.0, 0.0, G, 1.0, 0.0, doppler_width);
    // r = i <1/(G/2 - i D')>, so Re<...> = Im r
    return 0.5 * om * om * r.imag();
}

namespace {

struct DRState {
    double rate;
    double relax;
    double p0;
};

DRState dr_state(const DRParams& d)
{
    auto bad = d.problems();
    if (!bad.empty()) throw ValidationError(bad);
    DRState s;
    s.rate = optical_pumping_rate(d.pump_intensity, constants().species(d.species), d.doppler_width);
    s.relax = d.gamma_ground + s.rate;
    s.p0 = s.rate / (s.rate + d.gamma_ground);
    return s;
}

double transmission_at(const DRParams& d, const DRState& s, double rf_detuning)
{
    const double w2 = d.omega_rf * d.omega_rf;
    const double depol = w2 / (s.relax * s.relax + rf_detuning * rf_detuning + w2);
    return std::exp(-d.optical_depth * (1.0 - s.p0 * (1.0 - depol)));
}

}  // namespace

double double_resonance_center(const DRParams& d)
{
    return std::abs(zeeman_splitting(d.static_field, d.gF, 1));
}

double double_resonance_fwhm(const DRParams& d)
{
    const DRState s = dr_state(d);
    return 2.0 * std::hypot(s.relax, d.omega_rf) / phys::two_pi;
}

double double_resonance_point(const DRParams& d)
{
    return transmission_at(d, dr_state(d), d.rf_detuning);
}

Spectrum double_resonance_spectrum(const DRParams& d, const Eigen::ArrayXd& rf_grid_hz)
{
    const DRState s = dr_state(d);
    const double center = double_resonance_center(d);
    Spectrum out;
    out.axis = "rf_Hz";
    out.kind = SpectrumKind::transmission;
    out.detuning_hz = rf_grid_hz;
    out.values.resize(rf_grid_hz.size());
    for (Eigen::Index i = 0; i < rf_grid_hz.size(); ++i)
        out.values[i] = transmission_at(d, s, phys::two_pi * (rf_grid_hz[i] - center));
    out.validate();
    return out;
}

}  // namespace cellsim
