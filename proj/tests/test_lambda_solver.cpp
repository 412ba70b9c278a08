#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"
#include "cellsim/fitlab.hpp"
#include "cellsim/lambda_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cellsim;

namespace {

LambdaParams base_params()
{
    LambdaParams p;
    p.gamma_excited = rb87().excited_decay_rate;
    p.wavelength = rb87().d1_wavelength;
    p.density = 1e10;
    p.length = 0.01;
    p.gamma_ground = phys::two_pi * 50.0;
    p.omega_c = 2e5;
    return p;
}

// vapour-cell parameters close to the 50 Hz EIT calibration
LambdaParams eit_params(double control_mW_cm2, double gamma_hz)
{
    TransitionSpec t;
    return make_lambda_params(t, 36.0, control_mW_cm2, 0.1 * control_mW_cm2, phys::two_pi * gamma_hz,
                              0.625 * vapor_density(36.0, rb87()), 0.01);
}

// FWHM of the transparency peak on a sampled grid, half way between the peak
// and the control-off background, by linear interpolation.
double grid_half_max(const LambdaParams& p, double span_hz, Eigen::Index n)
{
    const Spectrum s = eit_spectrum(p, uniform_grid(-span_hz, span_hz, n));
    const Eigen::ArrayXd t = s.real();
    Eigen::Index ipk = 0;
    t.maxCoeff(&ipk);
    const double level = 0.5 * (t[ipk] + background_transmission(p));
    auto cross = [&](int dir) {
        Eigen::Index i = ipk;
        while (i + dir >= 0 && i + dir < n && t[i + dir] > level) i += dir;
        const Eigen::Index j = i + dir;
        const double f = (t[i] - level) / (t[i] - t[j]);
        return s.detuning_hz[i] + f * (s.detuning_hz[j] - s.detuning_hz[i]);
    };
    return cross(1) - cross(-1);
}

}  // namespace

TEST_CASE("ideal dark state is transparent")
{
    LambdaParams p = base_params();
    p.gamma_ground = 0.0;
    p.two_photon_detuning = 0.0;
    CHECK(steady_state_susceptibility(p).imag() == 0.0);
    p.doppler_width = 2e9;
    CHECK(std::abs(steady_state_susceptibility(p).imag()) < 1e-20);
}

TEST_CASE("line-centre symmetry of the susceptibility")
{
    LambdaParams p = base_params();
    for (double doppler : {0.0, 3e9}) {
        p.doppler_width = doppler;
        const double w = 2.0 * p.gamma_ground + p.omega_c * p.omega_c / p.gamma_excited;
        for (double f : {0.1, 1.0, 10.0}) {
            LambdaParams a = p, b = p;
            a.two_photon_detuning = f * w;
            b.two_photon_detuning = -f * w;
            const auto ca = steady_state_susceptibility(a), cb = steady_state_susceptibility(b);
            CHECK(ca.imag() == doctest::Approx(cb.imag()).epsilon(1e-12));
            CHECK(ca.real() == doctest::Approx(-cb.real()).epsilon(1e-12));
        }
    }
}

TEST_CASE("degenerate parameters are rejected")
{
    LambdaParams p = base_params();
    p.omega_c = 0.0;
    p.gamma_ground = 0.0;
    CHECK_THROWS_AS(steady_state_susceptibility(p), DomainError);
}

TEST_CASE("steady state matches long-time Bloch integration on random parameter sets")
{
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double G = rb87().excited_decay_rate;
    Eigen::Matrix3cd rho0 = Eigen::Matrix3cd::Zero();
    rho0(0, 0) = 1.0;
    for (int k = 0; k < 10; ++k) {
        LambdaParams p = base_params();
        p.gamma_ground = G * (0.05 + 0.45 * u(rng));
        p.omega_c = G * (0.2 + 1.8 * u(rng));
        p.one_photon_detuning = G * (2.0 * u(rng) - 1.0);
        p.two_photon_detuning = G * (u(rng) - 0.5);
        p.omega_p = 1e-5 * G;
        const auto tr = integrate_bloch(p, 600.0 / p.gamma_ground, rho0, 0.0, 4);
        const auto chi_b = susceptibility_from_state(p, tr.states.back());
        const auto chi_s = steady_state_susceptibility(p);
        CAPTURE(k);
        CHECK(std::abs(chi_b - chi_s) / std::abs(chi_s) <= 1e-6);
    }
}

TEST_CASE("Bloch integration without fields is static and conserves trace")
{
    LambdaParams p = base_params();
    p.omega_c = 0.0;
    p.omega_p = 0.0;
    Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();
    rho(0, 0) = 0.3;
    rho(1, 1) = 0.7;
    const auto tr = integrate_bloch(p, 1e-5, rho, 0.0, 10);
    for (const auto& s : tr.states) CHECK((s - rho).cwiseAbs().maxCoeff() < 1e-15);

    LambdaParams q = base_params();
    q.omega_c = 3e7;
    q.omega_p = 1e7;
    q.one_photon_detuning = 1e7;
    Eigen::Matrix3cd r0 = Eigen::Matrix3cd::Zero();
    r0(0, 0) = 0.5;
    r0(1, 1) = 0.5;
    r0(0, 1) = r0(1, 0) = 0.5;
    const auto t2 = integrate_bloch(q, 4e-6, r0, 0.0, 50);
    const double G = q.gamma_excited;
    for (std::size_t i = 0; i < t2.states.size(); ++i)
        CHECK(std::abs(t2.states[i].trace() - 1.0) <= 1e-9 * std::max(1.0, G * t2.times[i]));
}

TEST_CASE("non-physical initial states are rejected")
{
    const LambdaParams p = base_params();
    Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();
    rho(0, 0) = 0.5;
    CHECK_THROWS_AS(integrate_bloch(p, 1e-6, rho), DomainError);
    rho(1, 1) = 0.5;
    rho(0, 1) = 0.9;
    rho(1, 0) = 0.9;
    CHECK_THROWS_AS(integrate_bloch(p, 1e-6, rho), DomainError);
    rho(1, 0) = 0.2;
    CHECK_THROWS_AS(integrate_bloch(p, 1e-6, rho), DomainError);
}

TEST_CASE("negligible-power EIT width is 2 gamma")
{
    const LambdaParams p = eit_params(1e-3, 25.0);
    const Spectrum s = eit_spectrum(p, uniform_grid(-250.0, 250.0, 501));
    const FitResult f = fit_lorentzian(s);
    CHECK(f["fwhm"] == doctest::Approx(50.0).epsilon(0.05));
    CHECK(eit_fwhm(p) == doctest::Approx(50.0).epsilon(0.05));

    const LambdaParams weak = eit_params(1e-5, 25.0);
    CHECK(eit_fwhm(weak) == doctest::Approx(50.0).epsilon(1e-3));
    const LambdaParams doubled = eit_params(1e-5, 50.0);
    CHECK(eit_fwhm(doubled) / eit_fwhm(weak) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("no control field gives flat two-level absorption")
{
    LambdaParams p = eit_params(0.0, 25.0);
    p.omega_p = 1e-3;
    const Spectrum s = eit_spectrum(p, uniform_grid(-5e3, 5e3, 101));
    const Eigen::ArrayXd t = s.real();
    CHECK(t.maxCoeff() - t.minCoeff() <= 1e-15);
    CHECK(t[0] < 1.0);
}

TEST_CASE("power broadening is monotone and matches a dense-grid half maximum")
{
    double prev = 0.0;
    for (double i : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const LambdaParams p = eit_params(i, 25.0);
        const double w = eit_fwhm(p);
        CHECK(w > prev);
        const double dense = grid_half_max(p, 4.0 * w, 8001);
        CHECK(w == doctest::Approx(dense).epsilon(0.02));
        prev = w;
    }
    const LambdaParams p = eit_params(3.5, 25.0);
    CHECK(eit_fwhm(p) == doctest::Approx(grid_half_max(p, 4.0 * eit_fwhm(p), 16001)).epsilon(0.01));
}

TEST_CASE("half-max width is insensitive to grid resolution")
{
    const LambdaParams p = eit_params(0.5, 25.0);
    const double span = 4.0 * eit_fwhm(p);
    CHECK(grid_half_max(p, span, 2001) == doctest::Approx(grid_half_max(p, span, 4001)).epsilon(0.005));
}

TEST_CASE("eit_fwhm reports a range error when the span holds no half-max crossing")
{
    const LambdaParams p = eit_params(1.0, 25.0);
    CHECK_THROWS_AS(eit_fwhm(p, 0.2 * eit_fwhm(p) / 2.0), RangeError);
    CHECK_NOTHROW(eit_fwhm(p, 2.0 * eit_fwhm(p)));
}

TEST_CASE("passive medium: Im chi >= 0 and 0 < T <= 1 for random parameters")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        LambdaParams p = base_params();
        p.gamma_ground = std::pow(10.0, 1.0 + 4.0 * u(rng));
        p.omega_c = u(rng) * 5e7;
        p.one_photon_detuning = (u(rng) - 0.5) * 1e8;
        p.doppler_width = u(rng) < 0.5 ? 0.0 : u(rng) * 3e9;
        p.density = std::pow(10.0, 8.0 + 4.0 * u(rng));
        const Eigen::ArrayXd grid = uniform_grid(-2e5, 2e5, 41);
        const Eigen::ArrayXcd chi = susceptibility(p, grid * phys::two_pi);
        REQUIRE((chi.imag() >= 0.0).all());
        const Eigen::ArrayXd t = eit_spectrum(p, grid).real();
        // exp(-OD) only underflows to 0 for absurd depths
        const Eigen::ArrayXd od = p.wavenumber() * p.length * chi.imag();
        REQUIRE((t > 0.0 || od > 700.0).all());
        REQUIRE((t <= 1.0).all());
        if (p.one_photon_detuning == 0.0) CHECK(t[20] >= t.maxCoeff());
    }
    LambdaParams p = base_params();
    p.doppler_width = 2e9;
    const Eigen::ArrayXd t = eit_spectrum(p, uniform_grid(-1e3, 1e3, 41)).real();
    CHECK(t[20] == t.maxCoeff());
}

TEST_CASE("double resonance calibration")
{
    DRParams d;
    d.species = Isotope::Rb85;
    d.static_field = 0.038;
    d.gF = 1.0 / 3.0;
    d.gamma_ground = phys::two_pi * 11.0;
    d.omega_rf = phys::two_pi * 1.0;
    d.pump_intensity = 1e-5;
    d.doppler_width = doppler_sigma(36.0, rb85());
    CHECK(double_resonance_center(d) == doctest::Approx(zeeman_splitting(0.038, 1.0 / 3.0, 1)).epsilon(1e-12));
    CHECK(double_resonance_center(d) == doctest::Approx(17.7e3).epsilon(0.01));
    const double c = double_resonance_center(d);
    const Spectrum s = double_resonance_spectrum(d, uniform_grid(c - 100.0, c + 100.0, 401));
    const FitResult f = fit_lorentzian(s);
    CHECK(f["fwhm"] == doctest::Approx(22.0).epsilon(0.05));
    CHECK(f["center"] == doctest::Approx(c).epsilon(1e-9));
    CHECK(f["amplitude"] < 0.0);

    d.omega_rf = 0.0;
    const Eigen::ArrayXd flat = double_resonance_spectrum(d, uniform_grid(c - 100.0, c + 100.0, 41)).real();
    CHECK(flat.maxCoeff() - flat.minCoeff() == 0.0);
}

TEST_CASE("gradient broadening")
{
    CHECK(gradient_broadening(1, 11.0) == 11.0);
    CHECK(gradient_broadening(2, 11.0) == 22.0);
    CHECK(gradient_broadening(2, 0.0) == 0.0);
    for (double g : {0.3, 7.0, 120.0}) CHECK(gradient_broadening(2, g) / gradient_broadening(1, g) == 2.0);
    CHECK_THROWS_AS(gradient_broadening(3, 1.0), DomainError);
    CHECK(combine_widths(3.0, 4.0) == 7.0);
    CHECK(combine_widths(3.0, 4.0, WidthSum::quadrature) == doctest::Approx(5.0));
}

TEST_CASE("transition spec invariants")
{
    TransitionSpec t;
    CHECK(t.problems().empty());
    CHECK(t.control_strength() == doctest::Approx(3.0 / 12.0));
    CHECK(t.probe_strength() == doctest::Approx(3.0 / 2.0));
    t.delta_m = 3;
    CHECK_FALSE(t.problems().empty());
    t.delta_m = 1;
    CHECK_FALSE(t.problems().empty());  // disagrees with the mF pair
}

TEST_CASE("templated kernels agree across precisions")
{
    for (double x : {-3.0, -0.2, 0.0, 0.7, 5.0, 20.0})
        for (double y : {-1.0, 1e-3, 0.5, 2.0, 15.0}) {
            const auto wd = faddeeva(std::complex<double>(x, y));
            const auto wl = faddeeva(std::complex<long double>(x, y));
            CHECK(std::abs(wd - std::complex<double>(wl)) <= 1e-12 * std::abs(wd) + 1e-300);
        }
    // w(iy) = exp(y^2) erfc(y) on the imaginary axis
    for (double y : {0.1, 1.0, 3.0, 10.0})
        CHECK(faddeeva(std::complex<double>(0.0, y)).real() ==
              doctest::Approx(std::exp(y * y) * std::erfc(y)).epsilon(1e-12));
    const auto rd = lambda_response(50.0, 1e6, 3.6e7, 300.0, 1e12, 3e9);
    const auto rl = lambda_response<long double>(50.0L, 1e6L, 3.6e7L, 300.0L, 1e12L, 3e9L);
    CHECK(std::abs(rd - std::complex<double>(rl)) <= 1e-10 * std::abs(rd));
}

TEST_CASE("analytic slope of the response matches a finite difference")
{
    const double d = 37.0, D = 2e6, G = 3.6e7, g = 200.0, w2 = 4e11, s = 2.5e9;
    const double h = 1e-3;
    const auto fd = (lambda_response(d + h, D, G, g, w2, s) - lambda_response(d - h, D, G, g, w2, s)) / (2.0 * h);
    const auto an = lambda_response_slope(d, D, G, g, w2, s);
    CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
}
