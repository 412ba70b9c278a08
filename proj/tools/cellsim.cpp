#include "cellsim/errors.hpp"
#include "cellsim/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int workers = 1;
};

void add_common(CLI::App* cmd, Options& o, bool needs_config)
{
    auto* c = cmd->add_option("--config", o.config, "scenario config (JSON) or run manifest");
    if (needs_config) c->required();
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "master seed, overrides the config");
    cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
}

cellsim::ScenarioConfig finish(cellsim::ScenarioConfig c, const Options& o)
{
    if (o.seed) c.seed = o.seed;
    c.workers = o.workers;
    cellsim::require_valid(c);
    return c;
}

int run(const cellsim::ScenarioConfig& c, const std::string& out)
{
    const auto r = cellsim::run_scenario(c, out);
    std::cout << r.report;
    for (const auto& a : r.artifacts) std::cout << "wrote " << out << "/" << a << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cellsim: EIT and slow light in paraffin-coated Rb vapour cells"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cellsim::version());

    Options o;
    std::string preset_name, fit_path, fit_model = "lorentzian";

    auto* spectrum = app.add_subcommand("spectrum", "transmission or susceptibility spectrum");
    add_common(spectrum, o, true);
    auto* pulse = app.add_subcommand("pulse", "propagate one Gaussian pulse");
    add_common(pulse, o, true);
    auto* sweep = app.add_subcommand("sweep", "parameter sweep to a long-format table");
    add_common(sweep, o, true);
    auto* fit = app.add_subcommand("fit", "fit a spectrum or pulse CSV file");
    add_common(fit, o, false);
    fit->add_option("file", fit_path, "Spectrum or Pulse CSV (instead of --config)");
    fit->add_option("--model", fit_model, "lorentzian or dual_lorentzian")->capture_default_str();
    auto* pre = app.add_subcommand("preset", "run a named scenario preset");
    pre->add_option("name", preset_name, "preset name")->required();
    add_common(pre, o, false);
    pre->remove_option(pre->get_option("--config"));
    auto* val = app.add_subcommand("validate", "check a config and list every problem");
    add_common(val, o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cellsim::use_constants(cellsim::load_constants(cellsim::default_constants_path()));
    } catch (const std::exception& e) {
        std::cerr << "note: using built-in constants (" << e.what() << ")\n";
    }

    try {
        using cellsim::Pipeline;
        if (val->parsed()) {
            finish(cellsim::load_config(o.config), o);
            std::cout << "config OK\n";
            return 0;
        }
        if (pre->parsed()) {
            auto c = cellsim::preset(preset_name);
            if (o.seed) c.seed = o.seed;
            c.workers = o.workers;
            return run(c, o.out);
        }
        if (fit->parsed() && o.config.empty()) {
            if (fit_path.empty()) throw cellsim::ValidationError({"fit: give a CSV file or --config"});
            cellsim::ScenarioConfig c;
            c.scenario = "fit";
            c.pipeline = Pipeline::fit;
            c.fit.input = fit_path;
            c.fit.model = cellsim::parse_line_model(fit_model);
            return run(finish(c, o), o.out);
        }
        auto c = cellsim::load_config(o.config);
        if (spectrum->parsed()) c.pipeline = Pipeline::spectrum;
        if (pulse->parsed()) c.pipeline = Pipeline::pulse;
        if (sweep->parsed()) c.pipeline = Pipeline::sweep;
        if (fit->parsed()) {
            c.pipeline = Pipeline::fit;
            if (!fit_path.empty()) c.fit.input = fit_path;
        }
        return run(finish(c, o), o.out);
    } catch (const cellsim::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const cellsim::DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const cellsim::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const cellsim::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
