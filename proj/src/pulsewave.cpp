#include "cellsim/pulsewave.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"
#include "cellsim/fitlab.hpp"
#include "cellsim/parallel.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cellsim {

namespace {

std::complex<double> interpolate(const Eigen::ArrayXd& x, const Eigen::ArrayXcd& y, double xq)
{
    const Eigen::Index n = x.size();
    if (!(xq >= x[0] && xq <= x[n - 1]))
        throw RangeError("transfer_function: detuning " + format_double(xq) + " Hz outside the spectrum range [" +
                         format_double(x[0]) + ", " + format_double(x[n - 1]) + "] Hz");
    const auto it = std::upper_bound(x.data(), x.data() + n, xq);
    Eigen::Index j = std::min<Eigen::Index>(it - x.data(), n - 1);
    if (j == 0) j = 1;
    const double f = (xq - x[j - 1]) / (x[j] - x[j - 1]);
    return y[j - 1] + f * (y[j] - y[j - 1]);
}

std::size_t next_pow2(double n)
{
    std::size_t p = 16;
    while (static_cast<double>(p) < n) p <<= 1;
    return p;
}

}  // namespace

TransferFunction transfer_function(const Spectrum& chi, double length, double wavenumber)
{
    if (chi.kind != SpectrumKind::susceptibility)
        throw DomainError("transfer_function needs a susceptibility spectrum");
    chi.validate();
    if (!(length >= 0.0)) throw DomainError("transfer_function: length must be >= 0");
    const double a = 0.5 * wavenumber * length;
    return [x = chi.detuning_hz, y = chi.values, a](double omega) {
        const std::complex<double> i(0.0, 1.0);
        return std::exp(i * a * interpolate(x, y, omega / phys::two_pi));
    };
}

TransferFunction transfer_function(const Spectrum& chi, double length)
{
    return transfer_function(chi, length, rb87().wavenumber());
}

Eigen::ArrayXcd transfer_function(const Spectrum& chi, double length, const Eigen::ArrayXd& grid)
{
    const auto H = transfer_function(chi, length);
    Eigen::ArrayXcd out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) out[i] = H(grid[i]);
    return out;
}

TransferFunction transfer_function(const Medium& m)
{
    return [m](double omega) { return m.transfer(omega); };
}

double phase_slope(const Medium& m, double omega) { return 0.5 * m.wavenumber * m.length * m.chi_slope(omega).real(); }

Pulse make_gaussian_pulse(double fwhm, double dt, double half_span_fwhm, const std::string& label)
{
    if (!(fwhm > 0.0) || !(dt > 0.0) || !(half_span_fwhm > 0.0))
        throw DomainError("make_gaussian_pulse: fwhm, dt and span must be > 0");
    const auto half = static_cast<Eigen::Index>(std::ceil(half_span_fwhm * fwhm / dt));
    Pulse p;
    p.label = label;
    p.dt = dt;
    p.t0 = -static_cast<double>(half) * dt;
    p.samples.resize(2 * half + 1);
    for (Eigen::Index i = 0; i < p.samples.size(); ++i) {
        const double t = p.time(i) / fwhm;
        p.samples[i] = std::exp(-4.0 * std::log(2.0) * t * t);
    }
    p.validate();
    return p;
}

double fractional_delay(const Pulse& input, const Pulse& output)
{
    return (peak_time(output) - peak_time(input)) / pulse_fwhm(input);
}

double fractional_reshaping(const Pulse& input, const Pulse& output)
{
    const double w = pulse_fwhm(input);
    return (pulse_fwhm(output) - w) / w;
}

PropagationResult propagate(const Pulse& input, const TransferFunction& H, double length,
                            const PropagationOptions& opts)
{
    input.validate();
    const auto n_in = static_cast<std::size_t>(input.samples.size());
    const std::size_t N = next_pow2(std::max(opts.padding_factor * static_cast<double>(n_in),
                                             opts.min_window / input.dt));
    const std::size_t offset = (N - n_in) / 4;

    std::vector<std::complex<double>> field(N, 0.0), spec;
    for (std::size_t i = 0; i < n_in; ++i) field[offset + i] = std::sqrt(input.samples[static_cast<Eigen::Index>(i)]);

    Eigen::FFT<double> fft;
    // field = sum_k E_k exp(-i w_k t): the inverse transform gives E_k
    fft.inv(spec, field);

    double total = 0.0, edge = 0.0, peak = 0.0;
    const std::size_t edge_bins = std::max<std::size_t>(1, N / 20);  // 10% of the bins, at +-Nyquist
    for (std::size_t k = 0; k < N; ++k) {
        const double e = std::norm(spec[k]);
        total += e;
        peak = std::max(peak, std::abs(spec[k]));
        const std::size_t d = k <= N / 2 ? N / 2 - k : k - N / 2;
        if (d < edge_bins) edge += e;
    }
    if (edge > opts.leakage_tolerance * total)
        throw NumericalError("propagate: " + format_double(edge / total) +
                                 " of the spectral energy lies at the grid edges; use a finer time step or a longer pulse",
                             edge / total);

    const double dw = phys::two_pi / (static_cast<double>(N) * input.dt);
    const double cut = opts.significance * peak;
    for (std::size_t k = 0; k < N; ++k) {
        if (std::abs(spec[k]) <= cut) {
            spec[k] = 0.0;
            continue;
        }
        const double w = dw * (k <= N / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(N));
        spec[k] *= H(w);
    }
    fft.fwd(field, spec);

    PropagationResult r;
    r.output.label = "output";
    r.output.dt = input.dt;
    r.output.t0 = input.t0 - static_cast<double>(offset) * input.dt;
    r.output.samples.resize(static_cast<Eigen::Index>(N));
    for (std::size_t i = 0; i < N; ++i) r.output.samples[static_cast<Eigen::Index>(i)] = std::norm(field[i]);

    const auto in_m = pulse_metrics(input);
    const auto out_m = pulse_metrics(r.output);
    r.input_fwhm = in_m.fwhm;
    r.output_fwhm = out_m.fwhm;
    r.group_delay = out_m.peak_time - in_m.peak_time;
    r.group_velocity = r.group_delay != 0.0 ? length / r.group_delay : std::numeric_limits<double>::infinity();
    r.fractional_delay = r.group_delay / in_m.fwhm;
    r.fractional_reshaping = (out_m.fwhm - in_m.fwhm) / in_m.fwhm;
    r.energy_transmission = out_m.energy / in_m.energy;
    return r;
}

PropagationResult propagate_gaussian(const Medium& m, double fwhm, double min_window)
{
    const Pulse in = make_gaussian_pulse(fwhm, fwhm / 32.0);
    PropagationOptions opts;
    opts.min_window = min_window;
    return propagate(in, transfer_function(m), m.length, opts);
}

Table group_velocity_curve(const CellConfig& cell, std::vector<double> intensities, std::vector<double> temperatures,
                           const RepumpConfig& repump, int workers)
{
    if (intensities.empty() || temperatures.empty())
        throw ValidationError({"group_velocity_curve needs non-empty intensity and temperature grids"});
    std::sort(intensities.begin(), intensities.end());
    std::sort(temperatures.begin(), temperatures.end());

    Table t;
    t.columns = {"temperature_C", "intensity_mW_cm2", "v_g_m_s", "group_delay_s", "energy_transmission",
                 "gamma_rt_rad_s", "error"};
    const std::size_t ni = intensities.size();
    t.rows.resize(ni * temperatures.size());
    parallel_for(t.rows.size(), workers, [&](std::size_t k) {
        const double T = temperatures[k / ni];
        const double I = intensities[k % ni];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        std::vector<TableCell> row{T, I, nan, nan, nan, nan, std::string()};
        try {
            CellConfig c = cell;
            c.temperature = T;
            c.beam = BeamConfig::from_control(cell.beam.diameter, I, cell.beam.probe_to_control_ratio);
            const CoatedMedium cm = coated_medium(c, repump);
            const double tau = cm.medium.group_delay();
            row[2] = cell.cell_length / tau;
            row[3] = tau;
            row[4] = cm.medium.transmission(0.0);
            row[5] = cm.gamma_rt;
        } catch (const std::exception& e) {
            row[6] = std::string(e.what());
        }
        t.rows[k] = std::move(row);
    });
    return t;
}

}  // namespace cellsim
