#include "cellsim/config.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace cellsim {

std::string to_string(Pipeline p)
{
    switch (p) {
    case Pipeline::spectrum: return "spectrum";
    case Pipeline::pulse: return "pulse";
    case Pipeline::sweep: return "sweep";
    case Pipeline::fit: return "fit";
    }
    return "spectrum";
}

Pipeline parse_pipeline(const std::string& s)
{
    if (s == "spectrum") return Pipeline::spectrum;
    if (s == "pulse") return Pipeline::pulse;
    if (s == "sweep") return Pipeline::sweep;
    if (s == "fit") return Pipeline::fit;
    throw DomainError("unknown pipeline '" + s + "' (spectrum, pulse, sweep, fit)");
}

const std::vector<std::string>& sweep_axis_names()
{
    static const std::vector<std::string> names = {
        "temperature_C",          "control_intensity_mW_cm2", "pulse_fwhm_s",
        "repump_intensity_mW_cm2", "beam_diameter_m",          "wall_coherence_survival",
        "gradient_width_Hz",      "radiation_trapping",       "gamma_ground_Hz"};
    return names;
}

void apply_axis(ScenarioConfig& c, const std::string& name, double v)
{
    if (name == "temperature_C") c.cell.temperature = v;
    else if (name == "control_intensity_mW_cm2")
        c.cell.beam = BeamConfig::from_control(c.cell.beam.diameter, v, c.cell.beam.probe_to_control_ratio);
    else if (name == "pulse_fwhm_s") c.pulse.fwhm_s = v;
    else if (name == "repump_intensity_mW_cm2") c.repump.repump_intensity = v;
    else if (name == "beam_diameter_m") c.cell.beam.diameter = v;
    else if (name == "wall_coherence_survival") c.cell.wall_coherence_survival = v;
    else if (name == "gradient_width_Hz") c.cell.field_gradient_width = v;
    else if (name == "radiation_trapping") c.cell.radiation_trapping = v != 0.0;
    else if (name == "gamma_ground_Hz") c.lambda.gamma_ground_hz = v;
    else throw DomainError("unknown sweep axis '" + name + "'");
}

namespace {

// Reads one JSON object, recording problems instead of throwing so that a
// single pass reports every bad field.
class Reader {
public:
    Reader(const Json* j, std::string path, std::vector<std::string>& problems)
        : j_(j), path_(std::move(path)), problems_(problems)
    {
        if (j_ && !j_->is_object()) {
            problems_.push_back(where("") + "must be an object");
            j_ = nullptr;
        }
    }

    ~Reader()
    {
        if (!j_) return;
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!seen_.count(it.key())) problems_.push_back(where(it.key()) + "unknown key");
    }

    const Json* find(const std::string& key)
    {
        seen_.insert(key);
        if (!j_) return nullptr;
        auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }

    Reader child(const std::string& key)
    {
        return Reader(find(key), path_.empty() ? key : path_ + "." + key, problems_);
    }

    bool number(const std::string& key, double& out)
    {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_number()) return bad(key, "must be a number");
        out = v->get<double>();
        return true;
    }

    bool number(const std::string& key, std::optional<double>& out)
    {
        double x = 0.0;
        if (!number(key, x)) return false;
        out = x;
        return true;
    }

    template <typename Int>
    bool integer(const std::string& key, Int& out)
    {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_number_integer()) return bad(key, "must be an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            if (v->is_number_unsigned()) {
                out = v->get<Int>();
                return true;
            }
            if (v->get<std::int64_t>() < 0) return bad(key, "must be >= 0");
        }
        out = v->get<Int>();
        return true;
    }

    bool boolean(const std::string& key, bool& out)
    {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_boolean()) return bad(key, "must be true or false");
        out = v->get<bool>();
        return true;
    }

    bool text(const std::string& key, std::string& out)
    {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_string()) return bad(key, "must be a string");
        out = v->get<std::string>();
        return true;
    }

    bool numbers(const std::string& key, std::vector<double>& out)
    {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_array()) return bad(key, "must be an array of numbers");
        out.clear();
        for (const auto& x : *v) {
            if (!x.is_number()) return bad(key, "must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return true;
    }

    bool bad(const std::string& key, const std::string& msg)
    {
        problems_.push_back(where(key) + msg);
        return false;
    }

    std::string where(const std::string& key) const
    {
        std::string p = path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
        return p.empty() ? "" : p + ": ";
    }

    const Json* raw() const { return j_; }
    const std::string& path() const { return path_; }

private:
    const Json* j_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

void read_cell(Reader r, CellConfig& c, std::vector<std::string>& problems)
{
    r.number("radius_m", c.cell_radius);
    r.number("length_m", c.cell_length);
    r.number("temperature_C", c.temperature);
    r.number("beam_diameter_m", c.beam.diameter);
    r.number("probe_to_control_ratio", c.beam.probe_to_control_ratio);
    double control = 0.0, total = 0.0;
    const bool has_control = r.number("control_intensity_mW_cm2", control);
    const bool has_total = r.number("total_intensity_mW_cm2", total);
    if (has_control && has_total)
        problems.push_back(r.where("") + "give either control_intensity_mW_cm2 or total_intensity_mW_cm2, not both");
    else if (has_control)
        c.beam = BeamConfig::from_control(c.beam.diameter, control, c.beam.probe_to_control_ratio);
    else if (has_total)
        c.beam.total_intensity = total;
    r.number("wall_coherence_survival", c.wall_coherence_survival);
    if (r.number("wall_decoherence_rate_per_s", c.wall_decoherence_rate) && c.wall_decoherence_rate < 0.0)
        r.bad("wall_decoherence_rate_per_s", "must be >= 0 (omit it to derive the rate from p_w)");
    r.number("gradient_width_Hz", c.field_gradient_width);
    r.number("rb85_fraction", c.rb85_fraction);
    r.number("rb87_fraction", c.rb87_fraction);
    r.boolean("radiation_trapping", c.radiation_trapping);
    r.number("return_fraction", c.return_fraction);
    r.number("mean_dark_bounces", c.mean_dark_bounces);
    r.number("trapping_A", c.trapping_A);
    r.number("trapping_beta", c.trapping_beta);
    r.number("spin_exchange_cross_section_cm2", c.spin_exchange_cross_section);
    r.integer("trapping_max_iterations", c.trapping_max_iterations);
}

void read_transition(Reader r, TransitionSpec& t)
{
    r.integer("ground_F", t.ground_F);
    r.integer("excited_F", t.excited_F);
    r.integer("delta_m", t.delta_m);
    if (const Json* v = r.find("mF_pair")) {
        if (v->is_array() && v->size() == 2 && (*v)[0].is_number_integer() && (*v)[1].is_number_integer())
            t.mF_pair = {(*v)[0].get<int>(), (*v)[1].get<int>()};
        else
            r.bad("mF_pair", "must be two integers [control m, probe m]");
    }
}

}  // namespace

ScenarioConfig parse_config(const Json& doc)
{
    const Json* root = &doc;
    if (doc.is_object() && doc.contains("manifest_version")) {
        if (!doc.contains("config")) throw ValidationError({"manifest has no config member"});
        root = &doc.at("config");
    }
    ScenarioConfig c;
    std::vector<std::string> problems;
    {
        Reader r(root, "", problems);
        r.text("scenario", c.scenario);
        std::string s;
        if (r.text("pipeline", s)) {
            try {
                c.pipeline = parse_pipeline(s);
            } catch (const std::exception& e) {
                r.bad("pipeline", e.what());
            }
        }
        if (r.text("medium", s)) {
            if (s == "coated") c.medium = MediumKind::coated;
            else if (s == "lambda") c.medium = MediumKind::lambda;
            else r.bad("medium", "must be 'coated' or 'lambda'");
        }
        if (r.text("species", s)) {
            try {
                c.transition.species = parse_isotope(s);
            } catch (const std::exception& e) {
                r.bad("species", e.what());
            }
        }
        std::uint64_t seed = 0;
        if (r.integer("seed", seed)) c.seed = seed;

        read_cell(r.child("cell"), c.cell, problems);
        read_transition(r.child("transition"), c.transition);
        {
            Reader l = r.child("lambda");
            l.number("gamma_ground_Hz", c.lambda.gamma_ground_hz);
            l.number("one_photon_detuning_MHz", c.lambda.one_photon_detuning_mhz);
            l.number("density_cm3", c.lambda.density_cm3);
        }
        {
            Reader p = r.child("repump");
            p.number("intensity_mW_cm2", c.repump.repump_intensity);
            p.number("rabi_frequency_rad_s", c.repump.omega_r);
            p.text("target", c.repump.target);
            p.number("branching", c.repump.branching);
        }
        {
            Reader d = r.child("double_resonance");
            d.number("static_field_G", c.dr.static_field_G);
            d.number("rf_rabi_Hz", c.dr.rf_rabi_hz);
            d.number("pump_intensity_mW_cm2", c.dr.pump_intensity);
            d.number("gamma_ground_Hz", c.dr.gamma_ground_hz);
            d.number("gF", c.dr.gF);
            d.number("optical_depth", c.dr.optical_depth);
            if (d.text("species", s)) {
                try {
                    c.dr.species = parse_isotope(s);
                } catch (const std::exception& e) {
                    d.bad("species", e.what());
                }
            }
        }
        {
            Reader sp = r.child("spectrum");
            sp.text("source", c.spectrum.source);
            sp.text("quantity", c.spectrum.quantity);
            sp.number("center_Hz", c.spectrum.center_hz);
            sp.number("span_Hz", c.spectrum.span_hz);
            sp.integer("points", c.spectrum.points);
            sp.text("fit", c.spectrum.fit);
        }
        {
            Reader pu = r.child("pulse");
            pu.number("fwhm_s", c.pulse.fwhm_s);
            pu.number("samples_per_fwhm", c.pulse.samples_per_fwhm);
            pu.number("half_span_fwhm", c.pulse.half_span_fwhm);
        }
        {
            Reader sw = r.child("sweep");
            sw.text("mode", c.sweep.mode);
            sw.integer("max_cells", c.sweep.max_cells);
            if (const Json* axes = sw.find("axes")) {
                if (!axes->is_array()) {
                    sw.bad("axes", "must be an array of {name, values}");
                } else {
                    for (std::size_t i = 0; i < axes->size(); ++i) {
                        Reader a(&(*axes)[i], "sweep.axes[" + std::to_string(i) + "]", problems);
                        SweepAxis axis;
                        if (!a.text("name", axis.name)) a.bad("name", "is required");
                        if (!a.numbers("values", axis.values)) a.bad("values", "is required");
                        c.sweep.axes.push_back(std::move(axis));
                    }
                }
            }
        }
        {
            Reader f = r.child("fit");
            f.text("input", c.fit.input);
            if (f.text("model", s)) {
                try {
                    c.fit.model = parse_line_model(s);
                } catch (const std::exception& e) {
                    f.bad("model", e.what());
                }
            }
        }
        {
            Reader m = r.child("monte_carlo");
            m.boolean("enabled", c.monte_carlo.enabled);
            m.integer("n_atoms", c.monte_carlo.n_atoms);
            m.integer("bounces_per_atom", c.monte_carlo.bounces_per_atom);
            m.boolean("calibrate_weights", c.monte_carlo.calibrate_weights);
        }
    }
    for (auto& p : validate(c)) problems.push_back(std::move(p));
    if (!problems.empty()) throw ValidationError(problems);
    return c;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError({path + ": not valid JSON (" + std::string(e.what()) + ")"});
    }
    return parse_config(j);
}

Json to_json(const ScenarioConfig& c)
{
    Json j;
    j["scenario"] = c.scenario;
    j["pipeline"] = to_string(c.pipeline);
    j["medium"] = c.medium == MediumKind::coated ? "coated" : "lambda";
    j["species"] = to_string(c.transition.species);
    if (c.seed) j["seed"] = *c.seed;

    const auto& cell = c.cell;
    Json jc;
    jc["radius_m"] = cell.cell_radius;
    jc["length_m"] = cell.cell_length;
    jc["temperature_C"] = cell.temperature;
    jc["beam_diameter_m"] = cell.beam.diameter;
    jc["total_intensity_mW_cm2"] = cell.beam.total_intensity;
    jc["probe_to_control_ratio"] = cell.beam.probe_to_control_ratio;
    jc["wall_coherence_survival"] = cell.wall_coherence_survival;
    if (cell.wall_decoherence_rate >= 0.0) jc["wall_decoherence_rate_per_s"] = cell.wall_decoherence_rate;
    jc["gradient_width_Hz"] = cell.field_gradient_width;
    jc["rb85_fraction"] = cell.rb85_fraction;
    jc["rb87_fraction"] = cell.rb87_fraction;
    jc["radiation_trapping"] = cell.radiation_trapping;
    jc["return_fraction"] = cell.return_fraction;
    jc["mean_dark_bounces"] = cell.mean_dark_bounces;
    jc["trapping_A"] = cell.trapping_A;
    jc["trapping_beta"] = cell.trapping_beta;
    jc["spin_exchange_cross_section_cm2"] = cell.spin_exchange_cross_section;
    jc["trapping_max_iterations"] = cell.trapping_max_iterations;
    j["cell"] = jc;

    j["transition"] = {{"ground_F", c.transition.ground_F},
                       {"excited_F", c.transition.excited_F},
                       {"mF_pair", {c.transition.mF_pair.first, c.transition.mF_pair.second}},
                       {"delta_m", c.transition.delta_m}};
    Json jl;
    if (c.lambda.gamma_ground_hz) jl["gamma_ground_Hz"] = *c.lambda.gamma_ground_hz;
    jl["one_photon_detuning_MHz"] = c.lambda.one_photon_detuning_mhz;
    if (c.lambda.density_cm3) jl["density_cm3"] = *c.lambda.density_cm3;
    j["lambda"] = jl;
    j["repump"] = {{"intensity_mW_cm2", c.repump.repump_intensity},
                   {"rabi_frequency_rad_s", c.repump.omega_r},
                   {"target", c.repump.target},
                   {"branching", c.repump.branching}};
    j["double_resonance"] = {{"static_field_G", c.dr.static_field_G},
                             {"rf_rabi_Hz", c.dr.rf_rabi_hz},
                             {"pump_intensity_mW_cm2", c.dr.pump_intensity},
                             {"gamma_ground_Hz", c.dr.gamma_ground_hz},
                             {"gF", c.dr.gF},
                             {"optical_depth", c.dr.optical_depth},
                             {"species", to_string(c.dr.species)}};
    j["spectrum"] = {{"source", c.spectrum.source},     {"quantity", c.spectrum.quantity},
                     {"center_Hz", c.spectrum.center_hz}, {"span_Hz", c.spectrum.span_hz},
                     {"points", c.spectrum.points},       {"fit", c.spectrum.fit}};
    j["pulse"] = {{"fwhm_s", c.pulse.fwhm_s},
                  {"samples_per_fwhm", c.pulse.samples_per_fwhm},
                  {"half_span_fwhm", c.pulse.half_span_fwhm}};
    Json axes = Json::array();
    for (const auto& a : c.sweep.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    j["sweep"] = {{"mode", c.sweep.mode}, {"axes", axes}, {"max_cells", c.sweep.max_cells}};
    j["fit"] = {{"input", c.fit.input}, {"model", to_string(c.fit.model)}};
    j["monte_carlo"] = {{"enabled", c.monte_carlo.enabled},
                        {"n_atoms", c.monte_carlo.n_atoms},
                        {"bounces_per_atom", c.monte_carlo.bounces_per_atom},
                        {"calibrate_weights", c.monte_carlo.calibrate_weights}};
    return j;
}

std::vector<std::string> validate(const ScenarioConfig& c)
{
    std::vector<std::string> p;
    auto add = [&](const std::string& prefix, const std::vector<std::string>& v) {
        for (const auto& x : v) p.push_back(prefix + x);
    };
    add("cell: ", c.cell.problems());
    add("transition: ", c.transition.problems());
    if (c.cell.beam.probe_to_control_ratio > 0.1)
        p.push_back("cell.probe_to_control_ratio: probe must not exceed control / 10");
    if (c.lambda.gamma_ground_hz && !(*c.lambda.gamma_ground_hz >= 0.0))
        p.push_back("lambda.gamma_ground_Hz: must be >= 0");
    if (c.lambda.density_cm3 && !(*c.lambda.density_cm3 > 0.0)) p.push_back("lambda.density_cm3: must be > 0");
    if (!(c.repump.repump_intensity >= 0.0)) p.push_back("repump.intensity_mW_cm2: must be >= 0");
    if (!(c.repump.omega_r >= 0.0)) p.push_back("repump.rabi_frequency_rad_s: must be >= 0");
    if (!(c.repump.branching > 0.0 && c.repump.branching <= 1.0)) p.push_back("repump.branching: must lie in (0, 1]");
    if (c.repump.target != "F=1->F'=2") p.push_back("repump.target: only F=1->F'=2 is modelled");

    if (c.spectrum.source != "medium" && c.spectrum.source != "double_resonance")
        p.push_back("spectrum.source: must be 'medium' or 'double_resonance'");
    if (c.spectrum.quantity != "transmission" && c.spectrum.quantity != "susceptibility")
        p.push_back("spectrum.quantity: must be 'transmission' or 'susceptibility'");
    if (c.spectrum.source == "double_resonance" && c.spectrum.quantity != "transmission")
        p.push_back("spectrum.quantity: double resonance gives transmission only");
    if (!(c.spectrum.span_hz > 0.0)) p.push_back("spectrum.span_Hz: must be > 0");
    if (c.spectrum.points < 8) p.push_back("spectrum.points: must be >= 8");
    if (c.spectrum.fit != "none" && c.spectrum.fit != "lorentzian" && c.spectrum.fit != "dual_lorentzian")
        p.push_back("spectrum.fit: must be none, lorentzian or dual_lorentzian");
    if (c.spectrum.fit != "none" && c.spectrum.quantity != "transmission")
        p.push_back("spectrum.fit: fitting needs a transmission spectrum");
    add("double_resonance: ", dr_params(c).problems());

    if (!(c.pulse.fwhm_s >= 0.0)) p.push_back("pulse.fwhm_s: must be >= 0");
    if (!(c.pulse.samples_per_fwhm >= 4.0)) p.push_back("pulse.samples_per_fwhm: must be >= 4");
    if (!(c.pulse.half_span_fwhm >= 1.0)) p.push_back("pulse.half_span_fwhm: must be >= 1");
    if (c.pipeline == Pipeline::pulse && !(c.pulse.fwhm_s > 0.0))
        p.push_back("pulse.fwhm_s: the pulse pipeline needs a pulse width > 0");

    if (c.sweep.mode != "pulse" && c.sweep.mode != "group_velocity")
        p.push_back("sweep.mode: must be 'pulse' or 'group_velocity'");
    if (!(c.sweep.max_cells >= 1)) p.push_back("sweep.max_cells: must be >= 1");
    const auto& names = sweep_axis_names();
    std::set<std::string> seen;
    for (const auto& a : c.sweep.axes) {
        if (std::find(names.begin(), names.end(), a.name) == names.end())
            p.push_back("sweep.axes: '" + a.name + "' is not a sweepable parameter");
        if (!seen.insert(a.name).second) p.push_back("sweep.axes: '" + a.name + "' appears twice");
        if (a.values.empty()) p.push_back("sweep.axes: '" + a.name + "' has no values");
    }
    if (c.pipeline == Pipeline::sweep) {
        if (c.sweep.axes.empty()) p.push_back("sweep.axes: the sweep pipeline needs at least one axis");
        if (c.sweep.mode == "group_velocity" && c.medium != MediumKind::coated)
            p.push_back("sweep.mode: group_velocity needs the coated medium");
        if (c.sweep.mode == "group_velocity")
            for (const auto& a : c.sweep.axes)
                if (a.name != "temperature_C" && a.name != "control_intensity_mW_cm2")
                    p.push_back("sweep.axes: group_velocity mode sweeps temperature_C and control_intensity_mW_cm2 only");
    }
    if (c.pipeline == Pipeline::fit && c.fit.input.empty()) p.push_back("fit.input: the fit pipeline needs an input file");

    if (c.monte_carlo.enabled || c.monte_carlo.calibrate_weights) {
        if (!c.seed) p.push_back("seed: required when the Monte Carlo is enabled");
        if (c.monte_carlo.n_atoms < 1) p.push_back("monte_carlo.n_atoms: must be >= 1");
        if (c.monte_carlo.bounces_per_atom < 1) p.push_back("monte_carlo.bounces_per_atom: must be >= 1");
    }
    return p;
}

DRParams dr_params(const ScenarioConfig& c)
{
    DRParams d;
    d.species = c.dr.species;
    d.static_field = c.dr.static_field_G;
    d.omega_rf = phys::two_pi * c.dr.rf_rabi_hz;
    d.pump_intensity = c.dr.pump_intensity;
    d.gamma_ground = phys::two_pi * c.dr.gamma_ground_hz;
    d.gF = c.dr.gF;
    d.optical_depth = c.dr.optical_depth;
    if (c.cell.temperature >= vapor_min_temperature && c.cell.temperature <= vapor_max_temperature)
        d.doppler_width = doppler_sigma(c.cell.temperature, constants().species(d.species));
    return d;
}

void require_valid(const ScenarioConfig& c)
{
    auto p = validate(c);
    if (!p.empty()) throw ValidationError(p);
}

}  // namespace cellsim
