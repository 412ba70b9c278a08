#pragma once

#include "cellsim/atomkit.hpp"
#include "cellsim/faddeeva.hpp"
#include "cellsim/series.hpp"

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

namespace cellsim {

// mF_pair = (m of the control-coupled ground state, m of the probe-coupled
// ground state); both legs share the excited sublevel.
struct TransitionSpec {
    Isotope species = Isotope::Rb87;
    int ground_F = 2;
    int excited_F = 1;
    std::pair<int, int> mF_pair{0, 2};
    int delta_m = 2;

    int excited_m() const;
    double control_strength() const;  // 3 x relative line strength
    double probe_strength() const;
    std::vector<std::string> problems() const;
};

struct LambdaParams {
    double omega_c = 0.0;              // rad/s, control Rabi frequency on its leg
    double omega_p = 0.0;              // rad/s, probe Rabi frequency on its leg
    double gamma_excited = 0.0;        // rad/s, full excited-state decay rate
    double gamma_ground = 0.0;         // rad/s, ground coherence half-width
    double one_photon_detuning = 0.0;  // rad/s
    double two_photon_detuning = 0.0;  // rad/s
    double doppler_width = 0.0;        // rad/s, standard deviation of k.v
    double density = 0.0;              // cm^-3, atoms taking part in the Lambda system
    double length = 0.0;               // m
    double wavelength = 0.0;           // m
    TransitionSpec transition;

    double wavenumber() const;
    double coupling() const;  // m^3; chi = coupling * N[m^-3] * response
    std::vector<std::string> problems() const;
};

// Parameters for a Lambda system on the given species with Doppler width
// from the temperature; Rabi frequencies from control and probe intensities.
LambdaParams make_lambda_params(const TransitionSpec& t, double temperature_C, double control_mW_cm2,
                                double probe_mW_cm2, double gamma_ground, double density_cm3, double length_m);

// Doppler-averaged i(g - i d) / ((G/2 - i D')(g - i d) + W2/4), with D' the
// velocity-shifted one-photon detuning and W2 the control Rabi frequency squared.
template <typename Scalar>
std::complex<Scalar> lambda_response(Scalar delta, Scalar Delta, Scalar Gamma, Scalar gamma, Scalar omc2,
                                     Scalar sigma)
{
    using C = std::complex<Scalar>;
    const C i(0, 1);
    const C g(gamma, -delta);
    if (g == C(0) && omc2 > 0) return C(0);
    const C A = Gamma / Scalar(2) + (omc2 / Scalar(4)) / g;
    if (sigma == Scalar(0)) return i / (A - i * Delta);
    const Scalar s2 = std::sqrt(Scalar(2)) * sigma;
    const C z = (Delta + i * A) / s2;
    return i * std::sqrt(std::numbers::pi_v<Scalar> / Scalar(2)) / sigma * faddeeva(z);
}

// d/d(delta) of lambda_response.
template <typename Scalar>
std::complex<Scalar> lambda_response_slope(Scalar delta, Scalar Delta, Scalar Gamma, Scalar gamma, Scalar omc2,
                                           Scalar sigma)
{
    using C = std::complex<Scalar>;
    const C i(0, 1);
    const C g(gamma, -delta);
    if (g == C(0) && omc2 > 0) return C(0);
    const C A = Gamma / Scalar(2) + (omc2 / Scalar(4)) / g;
    const C dA = i * (omc2 / Scalar(4)) / (g * g);
    if (sigma == Scalar(0)) {
        const C den = A - i * Delta;
        return -i * dA / (den * den);
    }
    const Scalar s2 = std::sqrt(Scalar(2)) * sigma;
    const C z = (Delta + i * A) / s2;
    const Scalar sqpi = std::sqrt(std::numbers::pi_v<Scalar>);
    const C dw = Scalar(-2) * z * faddeeva(z) + Scalar(2) * i / sqpi;
    return i * std::sqrt(std::numbers::pi_v<Scalar> / Scalar(2)) / sigma * dw * (i * dA / s2);
}

// A weighted sum of Lambda ensembles sharing the optical transition, density,
// Doppler width and one-photon detuning; each has its own ground coherence
// rate and control Rabi frequency.
struct Ensemble {
    double weight;
    double gamma_ground;
    double omega_c;
};

struct Medium {
    double coupling_density = 0.0;  // coupling() * N[m^-3]
    double gamma_excited = 0.0;
    double one_photon_detuning = 0.0;
    double doppler_width = 0.0;
    double wavenumber = 0.0;
    double length = 0.0;
    std::vector<Ensemble> ensembles;

    static Medium single(const LambdaParams& p);

    std::complex<double> chi(double delta) const;
    std::complex<double> chi_slope(double delta) const;
    // exp(i k L chi / 2), applied to a field written as sum E(w) exp(-i w t)
    std::complex<double> transfer(double delta) const;
    double transmission(double delta) const;
    // Phase slope of transfer() at delta = 0 in s; positive means delay.
    double group_delay() const;
};

std::complex<double> steady_state_susceptibility(const LambdaParams& p);
Eigen::ArrayXcd susceptibility(const LambdaParams& p, const Eigen::ArrayXd& two_photon_detunings);
Spectrum susceptibility_spectrum(const LambdaParams& p, const Eigen::ArrayXd& grid_hz);
Spectrum eit_spectrum(const LambdaParams& p, const Eigen::ArrayXd& grid_hz);

// Transmission far outside the transparency window (control field off).
double background_transmission(const LambdaParams& p);

// Root-bracketed half maximum of the transparency peak of T(delta) above the
// control-off background. The bracket grows from the homogeneous estimate
// 2 gamma + Omega_c^2 / Gamma up to max_span_hz on each side.
double eit_fwhm(const LambdaParams& p, double max_span_hz = 0.0);
double eit_fwhm_estimate(const LambdaParams& p);

// Three-level master equation. Basis order: probe ground |1>, control ground
// |2>, excited |3>. Excited state decays at gamma_excited, half to each
// ground state; the |1>-|2> coherence decays at gamma_ground. Single
// velocity class: doppler_width is ignored.
struct BlochTrajectory {
    std::vector<double> times;
    std::vector<Eigen::Matrix3cd> states;
};

Eigen::Matrix3cd bloch_derivative(const LambdaParams& p, const Eigen::Matrix3cd& rho);
BlochTrajectory integrate_bloch(const LambdaParams& p, double duration, const Eigen::Matrix3cd& initial,
                                double step = 0.0, int samples = 200);
std::complex<double> susceptibility_from_state(const LambdaParams& p, const Eigen::Matrix3cd& rho);

struct DRParams {
    double omega_rf = 0.0;          // rad/s
    double static_field = 0.038;    // G
    double rf_detuning = 0.0;       // rad/s, used by double_resonance_point
    double pump_intensity = 0.0;    // mW/cm^2
    double gamma_ground = 0.0;      // rad/s
    double gF = 1.0 / 3.0;
    Isotope species = Isotope::Rb85;
    double doppler_width = 0.0;     // rad/s
    double optical_depth = 0.5;     // unpumped probe optical depth

    std::vector<std::string> problems() const;
};

double optical_pumping_rate(double intensity_mW_cm2, const AtomSpecies& species, double doppler_width);
double double_resonance_center(const DRParams& d);   // Hz
double double_resonance_fwhm(const DRParams& d);     // Hz
double double_resonance_point(const DRParams& d);    // transmission at rf_detuning
Spectrum double_resonance_spectrum(const DRParams& d, const Eigen::ArrayXd& rf_grid_hz);

enum class WidthSum { linear, quadrature };

double gradient_broadening(int delta_m, double gradient_width_hz);
double combine_widths(double a, double b, WidthSum mode = WidthSum::linear);

}  // namespace cellsim
