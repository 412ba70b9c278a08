#pragma once

#include "cellsim/coated_cell.hpp"
#include "cellsim/lambda_solver.hpp"
#include "cellsim/series.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace cellsim {

// H(omega) for a field written as sum E(omega) exp(-i omega t); omega is the
// offset from the carrier (the two-photon detuning of the probe), in rad/s.
using TransferFunction = std::function<std::complex<double>(double)>;

// H = exp(i k L chi / 2) with chi linearly interpolated from a susceptibility
// spectrum; k is the carrier wavenumber. Evaluating outside the spectrum's
// detuning range throws RangeError.
TransferFunction transfer_function(const Spectrum& chi, double length, double wavenumber);
TransferFunction transfer_function(const Spectrum& chi, double length);  // Rb87 D1 carrier
Eigen::ArrayXcd transfer_function(const Spectrum& chi, double length, const Eigen::ArrayXd& grid);
TransferFunction transfer_function(const Medium& m);

// d arg H / d omega of the medium, analytic; positive means delay.
double phase_slope(const Medium& m, double omega);

struct PropagationOptions {
    double min_window = 0.0;          // s, lower bound on the FFT window
    double padding_factor = 5.0;      // window >= padding_factor x input span
    double leakage_tolerance = 1e-6;  // spectral energy allowed in the outer 10% of bins
    double significance = 1e-12;      // H is evaluated only where |E(omega)| exceeds this x max
};

struct PropagationResult {
    Pulse output;  // the whole FFT window
    double group_velocity = 0.0;      // m/s, length / group_delay
    double group_delay = 0.0;         // s, output peak time - input peak time
    double fractional_delay = 0.0;
    double fractional_reshaping = 0.0;
    double energy_transmission = 0.0;
    double input_fwhm = 0.0;
    double output_fwhm = 0.0;
};

// Intensity pulses are turned into fields by a square root with flat phase.
// The input is zero-padded to a power-of-two window; a quarter of the padding
// goes before the pulse. Throws NumericalError when the input spectrum leaks
// into the edges of the frequency grid.
PropagationResult propagate(const Pulse& input, const TransferFunction& H, double length,
                            const PropagationOptions& opts = {});

// Gaussian intensity pulse peaking at t = 0 and sampled over +-half_span_fwhm widths.
Pulse make_gaussian_pulse(double fwhm, double dt, double half_span_fwhm = 4.0, const std::string& label = "input");

// (peak_out - peak_in) / FWHM_in
double fractional_delay(const Pulse& input, const Pulse& output);
// (FWHM_out - FWHM_in) / FWHM_in; negative when the output is narrower.
double fractional_reshaping(const Pulse& input, const Pulse& output);

// Gaussian of the given FWHM sampled at FWHM/32 through the medium.
PropagationResult propagate_gaussian(const Medium& m, double fwhm, double min_window = 0.0);

// One row per (temperature, intensity), sorted by temperature then intensity;
// intensities are control-beam intensities in mW/cm^2. Columns:
// temperature_C, intensity_mW_cm2, v_g_m_s, group_delay_s, energy_transmission,
// gamma_rt_rad_s, error. Failed cells keep NaN metrics and the reason.
Table group_velocity_curve(const CellConfig& cell, std::vector<double> intensities, std::vector<double> temperatures,
                           const RepumpConfig& repump = {}, int workers = 1);

}  // namespace cellsim
