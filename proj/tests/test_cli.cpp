#include "cellsim/errors.hpp"
#include "cellsim/scenario.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace cellsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "cellsim_test_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<std::string> problems_of(const std::string& text)
{
    try {
        require_valid(parse_config(Json::parse(text)));
    } catch (const ValidationError& e) {
        return e.fields;
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what)
{
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(CELLSIM_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("negative corpus: every inconsistent config is rejected")
{
    const std::vector<std::pair<std::string, std::string>> corpus = {
        {R"({"cell": {"beam_diameter_m": 0.02}})", "beam"},
        {R"({"cell": {"wall_decoherence_rate_per_s": -1}})", "wall_decoherence_rate_per_s"},
        {R"({"cell": {"gradient_width_Hz": -3}})", "gradient"},
        {R"({"cell": {"control_intensity_mW_cm2": -2}})", "intensity"},
        {R"({"lambda": {"gamma_ground_Hz": -25}})", "gamma_ground"},
        {R"({"repump": {"intensity_mW_cm2": -0.1}})", "repump"},
        {R"({"double_resonance": {"rf_rabi_Hz": -1}})", "rf"},
        {R"({"transition": {"delta_m": 3}})", "delta_m"},
        {R"({"transition": {"mF_pair": [0, 3], "delta_m": 3}})", "delta_m"},
        {R"({"cell": {"wall_coherence_survival": 1.2}})", "wall_coherence_survival"},
        {R"({"cell": {"temperature_C": 400}})", "temperature"},
        {R"({"cell": {"probe_to_control_ratio": 0.5}})", "probe"},
        {R"({"cell": {"radius_m": 0.0009}})", "beam"},
        {R"({"cell": {"rb85_fraction": 0.5}})", "fraction"},
        {R"({"cell": {"radius": 9}})", "unknown key"},
        {R"({"monte_carlo": {"enabled": true}})", "seed"},
        {R"({"pipeline": "sweep"})", "axes"},
        {R"({"pipeline": "sweep", "sweep": {"axes": [{"name": "colour", "values": [1]}]}})", "colour"},
        {R"({"pipeline": "pulse"})", "fwhm"},
        {R"({"spectrum": {"points": 2}})", "points"},
        {R"({"cell": {"temperature_C": "hot"}})", "temperature_C"},
    };
    for (const auto& [text, what] : corpus) {
        CAPTURE(text);
        const auto p = problems_of(text);
        CHECK_FALSE(p.empty());
        CHECK(mentions(p, what));
    }
}

TEST_CASE("every offending field is listed")
{
    const auto p = problems_of(
        R"({"cell": {"beam_diameter_m": 0.05, "gradient_width_Hz": -1, "bogus": 1}, "transition": {"delta_m": 3}})");
    CHECK(p.size() >= 4);
    CHECK(mentions(p, "bogus"));
    CHECK(mentions(p, "gradient"));
    CHECK(mentions(p, "delta_m"));
}

TEST_CASE("defaults and presets are valid and round-trip through JSON")
{
    CHECK(problems_of("{}").empty());
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const ScenarioConfig c = preset(name);
        CHECK(validate(c).empty());
        const Json j = to_json(c);
        CHECK(to_json(parse_config(j)).dump() == j.dump());
        CHECK(to_json(parse_config(make_manifest(c, {}))).dump() == j.dump());
    }
    CHECK_THROWS_AS(preset("fig7"), ValidationError);
}

TEST_CASE("sweep cap is enforced with the computed size")
{
    ScenarioConfig c = preset("fig5-repump");
    c.sweep.max_cells = 100;
    CHECK(sweep_size(c) == 2 * 7 * 23);
    try {
        run_sweep(c);
        FAIL("expected refusal");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("322") != std::string::npos);
    }
}

TEST_CASE("single-point sweep equals the pulse pipeline")
{
    ScenarioConfig p = preset("fig4-delay");
    p.pipeline = Pipeline::pulse;
    p.sweep.axes.clear();
    p.pulse.fwhm_s = 8e-6;
    const fs::path a = scratch("pulse");
    run_scenario(p, a.string());
    const Table m = load_table((a / "metrics.csv").string());

    ScenarioConfig s = preset("fig4-delay");
    s.sweep.axes = {{"control_intensity_mW_cm2", {60.0}}, {"pulse_fwhm_s", {8e-6}}};
    const Table t = run_sweep(s);
    REQUIRE(t.rows.size() == 1);
    REQUIRE(m.rows.size() == 1);
    for (const auto& col : m.columns) {
        CAPTURE(col);
        if (col == "error")
            CHECK(m.text(0, col) == t.text(0, col));
        else
            CHECK(m.number(0, col) == t.number(0, col));
    }
    CHECK(fs::exists(a / "input_pulse.csv"));
    CHECK(fs::exists(a / "output_pulse.csv"));
}

TEST_CASE("failed sweep cells keep their row and reason")
{
    ScenarioConfig s = preset("fig4-delay");
    s.sweep.axes = {{"temperature_C", {70.0, 140.0}}, {"pulse_fwhm_s", {1e-9, 1e-4}}};
    const Table t = run_sweep(s);
    REQUIRE(t.rows.size() == 4);
    int failed = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (!t.text(i, "error").empty()) {
            ++failed;
            CHECK(std::isnan(t.number(i, "fractional_delay")));
        }
    CHECK(failed >= 1);
}

TEST_CASE("fit_file")
{
    const fs::path d = scratch("fit");
    write(d / "empty.csv", "");
    try {
        fit_file((d / "empty.csv").string(), LineModel::lorentzian);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    CHECK_THROWS_AS(fit_file((d / "missing.csv").string(), LineModel::lorentzian), IoError);

    Spectrum s;
    s.detuning_hz = uniform_grid(-110.0, 110.0, 221);
    s.values = (0.9 - 0.4 * lorentzian(s.detuning_hz, 0.0, 22.0)).cast<std::complex<double>>();
    save_spectrum((d / "dip.csv").string(), s);
    const FitFileResult r = fit_file((d / "dip.csv").string(), LineModel::lorentzian);
    CHECK(r.fit["fwhm"] == doctest::Approx(22.0).epsilon(0.01));
    CHECK(r.curve.columns == std::vector<std::string>{"x", "y_data", "y_fit"});
    CHECK(r.curve.rows.size() == 221);
    CHECK(r.text.find("source=dip.csv") == 0);

    const Pulse p = make_gaussian_pulse(1e-5, 1e-5 / 32.0);
    save_pulse((d / "pulse.csv").string(), p);
    const FitFileResult q = fit_file((d / "pulse.csv").string(), LineModel::lorentzian);
    CHECK(q.text.find("fwhm_s=") != std::string::npos);
}

TEST_CASE("fit_file on an emitted spectrum matches the in-process fit exactly")
{
    const fs::path d = scratch("fig2b");
    const ScenarioConfig c = preset("fig2b-eit");
    run_scenario(c, d.string());
    const FitFileResult r = fit_file((d / "spectrum.csv").string(), LineModel::lorentzian);
    const FitResult direct = fit_lorentzian(scenario_spectrum(c));
    CHECK(r.fit.params == direct.params);
    CHECK(r.fit.to_text() == direct.to_text());
    CHECK(direct["fwhm"] == doctest::Approx(50.0).epsilon(0.05));
}

TEST_CASE("fig6 preset: linear v_g at the lowest temperature")
{
    const ScenarioConfig c = preset("fig6-vg");
    const Table t = run_sweep(c);
    const Table s = preset_summary(c, t);
    REQUIRE_FALSE(s.rows.empty());
    CHECK(s.number(0, "temperature_C") == 50.0);
    CHECK(s.number(0, "r_squared") >= 0.99);
}

TEST_CASE("manifest replay is byte identical")
{
    for (const std::string name : {"fig2a-dr", "fig3-dual"}) {
        CAPTURE(name);
        const fs::path a = scratch(name + "_a"), b = scratch(name + "_b");
        ScenarioConfig c = preset(name);
        const RunResult ra = run_scenario(c, a.string());
        ScenarioConfig replay = load_config((a / "manifest.json").string());
        replay.workers = 2;
        const RunResult rb = run_scenario(replay, b.string());
        CHECK(ra.artifacts == rb.artifacts);
        for (const auto& f : ra.artifacts) {
            CAPTURE(f);
            CHECK(read_text_file((a / f).string()) == read_text_file((b / f).string()));
        }
        const Json m = Json::parse(read_text_file((a / "manifest.json").string()));
        CHECK(m["seed"] == 1);
        CHECK(m["cellsim_version"] == version());
        CHECK(m["scenario"] == name);
    }
}

TEST_CASE("CLI exit codes")
{
    const fs::path d = scratch("exit");
    write(d / "bad.json", R"({"transition": {"delta_m": 3}})");
    write(d / "narrow.json", R"({"seed": 1, "spectrum": {"span_Hz": 100, "points": 11}})");
    write(d / "broken.json", "{ not json");
    CHECK(run_cli("validate --config " + (d / "bad.json").string()) == 2);
    CHECK(run_cli("validate --config " + (d / "narrow.json").string()) == 0);
    CHECK(run_cli("spectrum --config " + (d / "narrow.json").string() + " --out " + (d / "o1").string()) == 3);
    CHECK(run_cli("spectrum --config " + (d / "missing.json").string()) == 4);
    CHECK(run_cli("spectrum --config " + (d / "broken.json").string()) == 2);
    CHECK(run_cli("preset nope") == 2);
    CHECK(run_cli("preset fig2a-dr --out " + (d / "o2").string() + " --seed 5 --workers 2") == 0);
    CHECK(Json::parse(read_text_file((d / "o2" / "manifest.json").string()))["seed"] == 5);
    write(d / "empty.csv", "");
    CHECK(run_cli("fit " + (d / "empty.csv").string() + " --out " + (d / "o3").string()) == 4);
    CHECK(run_cli("frobnicate") == 2);
}
