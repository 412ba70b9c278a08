#pragma once

#include "cellsim/config.hpp"
#include "cellsim/pulsewave.hpp"

#include <string>
#include <vector>

namespace cellsim {

std::string version();

// Lambda parameters of the configured medium (narrow ensemble for the coated
// cell, the whole vapour for the lambda medium).
LambdaParams scenario_lambda_params(const ScenarioConfig& c);

struct ScenarioMedium {
    Medium medium;
    double coherence_rate;  // rad/s, slowest ground rate; sets the propagation window
    double gamma_rt;        // rad/s
};

ScenarioMedium scenario_medium(const ScenarioConfig& c);
Spectrum scenario_spectrum(const ScenarioConfig& c);

// Metric columns shared by the pulse pipeline and every sweep row.
const std::vector<std::string>& point_metric_names();
std::vector<TableCell> point_metrics(const ScenarioConfig& c);

// Cartesian product of the axes, last axis fastest; failed cells keep NaN
// metrics and the reason in the error column.
std::int64_t sweep_size(const ScenarioConfig& c);
Table run_sweep(const ScenarioConfig& c);

struct FitFileResult {
    FitResult fit;
    Table curve;       // x, y_data, y_fit
    std::string text;  // key=value block
};

// Fits a Spectrum or Pulse CSV file. Pulses are fitted on intensity vs time and
// also get their pulse metrics in the text block.
FitFileResult fit_file(const std::string& path, LineModel model);

// Preset-specific summary tables, keyed by scenario id; empty for others.
Table preset_summary(const ScenarioConfig& c, const Table& sweep);

Json make_manifest(const ScenarioConfig& c, const std::vector<std::string>& artifacts);

struct RunResult {
    std::vector<std::string> artifacts;  // file names inside the output directory
    std::string report;                  // short human-readable summary
};

// Runs the configured pipeline and writes its CSVs and manifest.json into out_dir.
RunResult run_scenario(const ScenarioConfig& c, const std::string& out_dir);

const std::vector<std::string>& preset_names();
ScenarioConfig preset(const std::string& name);

}  // namespace cellsim
