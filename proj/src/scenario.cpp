#include "cellsim/scenario.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"
#include "cellsim/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#ifndef CELLSIM_VERSION
#define CELLSIM_VERSION "unknown"
#endif

namespace cellsim {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

bool same_transition(const TransitionSpec& a, const TransitionSpec& b)
{
    return a.species == b.species && a.ground_F == b.ground_F && a.excited_F == b.excited_F &&
           a.mF_pair == b.mF_pair && a.delta_m == b.delta_m;
}

std::string spectrum_text(const Spectrum& s)
{
    std::ostringstream os;
    write_spectrum_csv(os, s);
    return os.str();
}

std::string pulse_text(const Pulse& p)
{
    std::ostringstream os;
    write_pulse_csv(os, p);
    return os.str();
}

std::string table_text(const Table& t)
{
    std::ostringstream os;
    write_table_csv(os, t);
    return os.str();
}

Table curve_table(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, const FitResult& f)
{
    Table t;
    t.columns = {"x", "y_data", "y_fit"};
    const Eigen::ArrayXd yf = f.evaluate(x);
    for (Eigen::Index i = 0; i < x.size(); ++i) t.rows.push_back({x[i], y[i], yf[i]});
    return t;
}

double cell_number(const TableCell& c)
{
    if (const double* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    return nan_value;
}

}  // namespace

std::string version() { return CELLSIM_VERSION; }

LambdaParams scenario_lambda_params(const ScenarioConfig& c)
{
    LambdaParams p = cell_lambda_params(c.cell, c.repump);
    if (!same_transition(c.transition, TransitionSpec{})) {
        const auto& sp = constants().species(c.transition.species);
        double density = p.density;
        if (c.transition.species != Isotope::Rb87 || c.transition.ground_F != 2) {
            const double fraction = c.transition.species == Isotope::Rb85 ? c.cell.rb85_fraction : c.cell.rb87_fraction;
            density = fraction * total_vapor_density(c.cell.temperature) *
                      sp.level(c.transition.ground_F).degeneracy / sp.total_ground_states();
        }
        p = make_lambda_params(c.transition, c.cell.temperature, c.cell.beam.control_intensity(),
                               c.cell.beam.probe_intensity(), p.gamma_ground, density, c.cell.cell_length);
    }
    if (c.lambda.gamma_ground_hz) p.gamma_ground = phys::two_pi * *c.lambda.gamma_ground_hz;
    if (c.lambda.density_cm3) p.density = *c.lambda.density_cm3;
    p.one_photon_detuning = phys::two_pi * 1e6 * c.lambda.one_photon_detuning_mhz;
    return p;
}

ScenarioMedium scenario_medium(const ScenarioConfig& c)
{
    const LambdaParams p = scenario_lambda_params(c);
    if (c.medium == MediumKind::lambda) return {Medium::single(p), p.gamma_ground, 0.0};
    const CoatedMedium cm = coated_medium(c.cell, p);
    return {cm.medium, cm.gamma_narrow, cm.gamma_rt};
}

Spectrum scenario_spectrum(const ScenarioConfig& c)
{
    const auto& s = c.spectrum;
    const Eigen::ArrayXd grid = uniform_grid(s.center_hz - 0.5 * s.span_hz, s.center_hz + 0.5 * s.span_hz, s.points);
    if (s.source == "double_resonance") {
        return double_resonance_spectrum(dr_params(c), grid);
    }
    const LambdaParams p = scenario_lambda_params(c);
    if (c.medium == MediumKind::lambda)
        return s.quantity == "transmission" ? eit_spectrum(p, grid) : susceptibility_spectrum(p, grid);
    if (s.quantity == "transmission") return dual_structure_spectrum(c.cell, p, grid);
    const CoatedMedium cm = coated_medium(c.cell, p);
    Spectrum out;
    out.kind = SpectrumKind::susceptibility;
    out.detuning_hz = grid;
    out.values.resize(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) out.values[i] = cm.medium.chi(phys::two_pi * grid[i]);
    out.validate();
    return out;
}

const std::vector<std::string>& point_metric_names()
{
    static const std::vector<std::string> names = {
        "narrowband_delay_s", "v_g_m_s",          "center_transmission",  "coherence_rate_rad_s",
        "gamma_rt_rad_s",     "input_fwhm_s",     "fractional_delay",     "fractional_reshaping",
        "energy_transmission", "pulse_delay_s",   "error"};
    return names;
}

std::vector<TableCell> point_metrics(const ScenarioConfig& c)
{
    std::vector<TableCell> row(point_metric_names().size(), nan_value);
    row.back() = std::string();
    try {
        require_valid(c);
        const ScenarioMedium sm = scenario_medium(c);
        const double tau = sm.medium.group_delay();
        row[0] = tau;
        row[1] = sm.medium.length / tau;
        row[2] = sm.medium.transmission(0.0);
        row[3] = sm.coherence_rate;
        row[4] = sm.gamma_rt;
        if (c.pulse.fwhm_s > 0.0) {
            const Pulse in = make_gaussian_pulse(c.pulse.fwhm_s, c.pulse.fwhm_s / c.pulse.samples_per_fwhm,
                                                 c.pulse.half_span_fwhm);
            PropagationOptions opts;
            if (sm.coherence_rate > 0.0) opts.min_window = 10.0 / sm.coherence_rate;
            const auto r = propagate(in, transfer_function(sm.medium), sm.medium.length, opts);
            row[5] = r.input_fwhm;
            row[6] = r.fractional_delay;
            row[7] = r.fractional_reshaping;
            row[8] = r.energy_transmission;
            row[9] = r.group_delay;
        }
    } catch (const std::exception& e) {
        row.back() = std::string(e.what());
    }
    return row;
}

std::int64_t sweep_size(const ScenarioConfig& c)
{
    std::int64_t n = 1;
    for (const auto& a : c.sweep.axes) {
        n *= static_cast<std::int64_t>(a.values.size());
        if (n > (std::int64_t{1} << 40)) break;
    }
    return n;
}

Table run_sweep(const ScenarioConfig& c)
{
    require_valid(c);
    const std::int64_t n = sweep_size(c);
    if (n > c.sweep.max_cells)
        throw ValidationError({"sweep: grid has " + std::to_string(n) + " cells, above the cap of " +
                               std::to_string(c.sweep.max_cells)});

    if (c.sweep.mode == "group_velocity") {
        std::vector<double> temps{c.cell.temperature};
        std::vector<double> intens{c.cell.beam.control_intensity()};
        for (const auto& a : c.sweep.axes) (a.name == "temperature_C" ? temps : intens) = a.values;
        return group_velocity_curve(c.cell, intens, temps, c.repump, c.workers);
    }

    Table t;
    for (const auto& a : c.sweep.axes) t.columns.push_back(a.name);
    for (const auto& m : point_metric_names()) t.columns.push_back(m);
    t.rows.resize(static_cast<std::size_t>(n));
    parallel_for(t.rows.size(), c.workers, [&](std::size_t k) {
        ScenarioConfig cell = c;
        std::vector<TableCell> row(c.sweep.axes.size());
        std::size_t rest = k;
        for (std::size_t a = c.sweep.axes.size(); a-- > 0;) {
            const auto& axis = c.sweep.axes[a];
            const double v = axis.values[rest % axis.values.size()];
            rest /= axis.values.size();
            row[a] = v;
            apply_axis(cell, axis.name, v);
        }
        const auto m = point_metrics(cell);
        row.insert(row.end(), m.begin(), m.end());
        t.rows[k] = std::move(row);
    });
    return t;
}

FitFileResult fit_file(const std::string& path, LineModel model)
{
    const std::string content = read_text_file(path);
    std::size_t first = content.find_first_not_of(" \t\r\n");
    const bool is_pulse = first != std::string::npos &&
                          (content[first] == '#' || content.compare(first, 6, "time_s") == 0);
    FitFileResult r;
    Eigen::ArrayXd x, y;
    std::istringstream is(content);
    std::string extra;
    if (is_pulse) {
        const Pulse p = read_pulse_csv(is);
        x = p.times();
        y = p.samples;
        const auto m = pulse_metrics(p);
        extra = "peak_time_s=" + format_double(m.peak_time) + "\npulse_fwhm_s=" + format_double(m.fwhm) +
                "\npulse_energy=" + format_double(m.energy) + "\n";
    } else {
        const Spectrum s = read_spectrum_csv(is);
        x = s.detuning_hz;
        y = s.kind == SpectrumKind::transmission ? s.values.real().eval() : s.values.imag().eval();
    }
    r.fit = fit_model(model, x, y);
    r.curve = curve_table(x, y, r.fit);
    r.text = "source=" + std::filesystem::path(path).filename().string() + "\n" + r.fit.to_text() + extra;
    return r;
}

Table preset_summary(const ScenarioConfig& c, const Table& sweep)
{
    Table out;
    auto has = [&](const std::string& name) {
        return std::find(sweep.columns.begin(), sweep.columns.end(), name) != sweep.columns.end();
    };
    auto num = [&](std::size_t row, const std::string& name) { return cell_number(sweep.rows[row][sweep.column(name)]); };

    if (c.scenario == "fig4-delay" && has("control_intensity_mW_cm2") && has("pulse_fwhm_s")) {
        out.columns = {"control_intensity_mW_cm2", "pulse_fwhm_s", "fractional_delay", "kind"};
        std::vector<double> intens;
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            const double I = num(i, "control_intensity_mW_cm2");
            if (std::find(intens.begin(), intens.end(), I) == intens.end()) intens.push_back(I);
        }
        for (double I : intens) {
            std::vector<std::pair<double, double>> curve;
            for (std::size_t i = 0; i < sweep.rows.size(); ++i)
                if (num(i, "control_intensity_mW_cm2") == I)
                    curve.emplace_back(num(i, "pulse_fwhm_s"), num(i, "fractional_delay"));
            std::sort(curve.begin(), curve.end());
            std::size_t best = 0;
            for (std::size_t k = 0; k < curve.size(); ++k) {
                if (curve[k].second > curve[best].second || std::isnan(curve[best].second)) best = k;
                if (k > 0 && k + 1 < curve.size() && curve[k].second > curve[k - 1].second &&
                    curve[k].second > curve[k + 1].second)
                    out.rows.push_back({I, curve[k].first, curve[k].second, std::string("local_max")});
            }
            if (!curve.empty())
                out.rows.push_back({I, curve[best].first, curve[best].second, std::string("global_max")});
        }
    } else if (c.scenario == "fig5-repump" && has("temperature_C") && has("repump_intensity_mW_cm2")) {
        out.columns = {"temperature_C", "max_delay_no_repump", "max_delay_repump", "best_repump_intensity_mW_cm2",
                       "best_pulse_fwhm_s", "boost"};
        std::vector<double> temps;
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            const double T = num(i, "temperature_C");
            if (std::find(temps.begin(), temps.end(), T) == temps.end()) temps.push_back(T);
        }
        for (double T : temps) {
            double base = nan_value, best = nan_value, best_I = nan_value, best_w = nan_value;
            for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
                if (num(i, "temperature_C") != T) continue;
                const double d = num(i, "fractional_delay");
                if (std::isnan(d)) continue;
                const double Ir = num(i, "repump_intensity_mW_cm2");
                if (Ir == 0.0) {
                    if (!(base >= d)) base = d;
                } else if (!(best >= d)) {
                    best = d;
                    best_I = Ir;
                    best_w = has("pulse_fwhm_s") ? num(i, "pulse_fwhm_s") : c.pulse.fwhm_s;
                }
            }
            out.rows.push_back({T, base, best, best_I, best_w, best / base});
        }
    } else if (c.scenario == "fig6-vg" && has("v_g_m_s") && has("temperature_C")) {
        out.columns = {"temperature_C", "slope_m_s_per_mW_cm2", "intercept_m_s", "r_squared",
                       "min_v_g_intensity_mW_cm2", "upturn", "max_transmission_in_upturn"};
        std::vector<double> temps;
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            const double T = num(i, "temperature_C");
            if (std::find(temps.begin(), temps.end(), T) == temps.end()) temps.push_back(T);
        }
        for (double T : temps) {
            std::vector<std::array<double, 3>> pts;  // intensity, v_g, transmission
            for (std::size_t i = 0; i < sweep.rows.size(); ++i)
                if (num(i, "temperature_C") == T && std::isfinite(num(i, "v_g_m_s")))
                    pts.push_back({num(i, "intensity_mW_cm2"), num(i, "v_g_m_s"), num(i, "energy_transmission")});
            std::sort(pts.begin(), pts.end());
            const double n = static_cast<double>(pts.size());
            double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
            for (const auto& p : pts) {
                sx += p[0];
                sy += p[1];
                sxx += p[0] * p[0];
                sxy += p[0] * p[1];
                syy += p[1] * p[1];
            }
            const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
            const double slope = cxy / vx;
            const double r2 = cxy * cxy / (vx * vy);
            std::size_t imin = 0;
            for (std::size_t k = 0; k < pts.size(); ++k)
                if (pts[k][1] < pts[imin][1]) imin = k;
            double tmax = nan_value;
            for (std::size_t k = 0; k < imin; ++k) tmax = std::isnan(tmax) ? pts[k][2] : std::max(tmax, pts[k][2]);
            out.rows.push_back({T, slope, (sy - slope * sx) / n, r2, pts.empty() ? nan_value : pts[imin][0],
                                std::int64_t{imin > 0 ? 1 : 0}, tmax});
        }
    }
    return out;
}

Json make_manifest(const ScenarioConfig& c, const std::vector<std::string>& artifacts)
{
    Json m;
    m["manifest_version"] = 1;
    m["cellsim_version"] = version();
    m["scenario"] = c.scenario;
    m["pipeline"] = to_string(c.pipeline);
    if (c.seed) m["seed"] = *c.seed;
    else m["seed"] = nullptr;
    m["config"] = to_json(c);
    m["artifacts"] = artifacts;
    return m;
}

RunResult run_scenario(const ScenarioConfig& c, const std::string& out_dir)
{
    require_valid(c);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

    RunResult res;
    std::ostringstream report;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_text_file((std::filesystem::path(out_dir) / name).string(), content);
        res.artifacts.push_back(name);
    };

    ScenarioConfig r = c;
    if (c.monte_carlo.calibrate_weights) {
        const double tau = 1.0 / scenario_medium(c).coherence_rate;
        const auto cal = calibrate_bounce_fraction(c.cell, tau, c.monte_carlo.n_atoms, *c.seed, c.workers);
        r.cell.return_fraction = cal.return_fraction;
        r.cell.mean_dark_bounces = cal.mean_dark_bounces;
        Table t;
        t.columns = {"coherence_time_s", "return_fraction", "mean_dark_bounces", "bounce_fraction"};
        t.rows.push_back({cal.coherence_time, cal.return_fraction, cal.mean_dark_bounces, cal.bounce_fraction});
        emit("bounce_calibration.csv", table_text(t));
        report << "bounce_fraction=" << format_double(bounce_fraction(r.cell)) << "\n";
    }
    if (c.monte_carlo.enabled) {
        TrajectoryOptions opts;
        opts.bounces_per_atom = c.monte_carlo.bounces_per_atom;
        opts.workers = c.workers;
        const auto s = simulate_trajectories(r.cell, c.monte_carlo.n_atoms, *c.seed, opts);
        std::ostringstream os;
        write_transit_csv(os, s);
        emit("transit.csv", os.str());
        report << "in_beam_fraction=" << format_double(s.in_beam_fraction) << "\n";
    }

    try {
        switch (c.pipeline) {
        case Pipeline::spectrum: {
            const Spectrum s = scenario_spectrum(r);
            emit("spectrum.csv", spectrum_text(s));
            if (c.spectrum.fit != "none") {
                const FitResult f = fit_model(parse_line_model(c.spectrum.fit), s.detuning_hz, s.real());
                emit("fit.txt", f.to_text());
                emit("fit_curve.csv", table_text(curve_table(s.detuning_hz, s.real(), f)));
                if (f.model == LineModel::lorentzian) report << "fwhm_Hz=" << format_double(f["fwhm"]) << "\n";
                else
                    report << "fwhm_narrow_Hz=" << format_double(f["fwhm_narrow"])
                           << "\nfwhm_broad_Hz=" << format_double(f["fwhm_broad"]) << "\n";
            }
            break;
        }
        case Pipeline::pulse: {
            const Pulse in = make_gaussian_pulse(r.pulse.fwhm_s, r.pulse.fwhm_s / r.pulse.samples_per_fwhm,
                                                 r.pulse.half_span_fwhm);
            const ScenarioMedium sm = scenario_medium(r);
            PropagationOptions opts;
            if (sm.coherence_rate > 0.0) opts.min_window = 10.0 / sm.coherence_rate;
            const auto out = propagate(in, transfer_function(sm.medium), sm.medium.length, opts);
            emit("input_pulse.csv", pulse_text(in));
            emit("output_pulse.csv", pulse_text(out.output));
            Table t;
            t.columns = point_metric_names();
            t.rows.push_back(point_metrics(r));
            emit("metrics.csv", table_text(t));
            report << "fractional_delay=" << format_double(out.fractional_delay) << "\n";
            break;
        }
        case Pipeline::sweep: {
            const Table t = run_sweep(r);
            emit("sweep.csv", table_text(t));
            const Table s = preset_summary(r, t);
            if (!s.columns.empty()) emit("summary.csv", table_text(s));
            std::size_t failed = 0;
            const std::size_t ecol = t.column("error");
            for (const auto& row : t.rows)
                if (!std::get<std::string>(row[ecol]).empty()) ++failed;
            report << "cells=" << t.rows.size() << "\nfailed=" << failed << "\n";
            break;
        }
        case Pipeline::fit: {
            const auto f = fit_file(r.fit.input, r.fit.model);
            emit("fit.txt", f.text);
            emit("fit_curve.csv", table_text(f.curve));
            report << f.text;
            break;
        }
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const RangeError& e) {
        throw RangeError("scenario " + c.scenario + ": " + e.what(), e.last_iterate);
    } catch (const MetricError& e) {
        throw MetricError("scenario " + c.scenario + ": " + e.what(), e.last_iterate);
    } catch (const FitError& e) {
        throw FitError("scenario " + c.scenario + ": " + e.what(), e.last_iterate);
    } catch (const NumericalError& e) {
        throw NumericalError("scenario " + c.scenario + ": " + e.what(), e.last_iterate);
    }

    std::vector<std::string> listed = res.artifacts;
    listed.push_back("manifest.json");
    write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(), make_manifest(c, listed).dump(2) + "\n");
    res.artifacts = listed;
    res.report = report.str();
    return res;
}

}  // namespace cellsim
