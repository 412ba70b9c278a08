#pragma once

#include "cellsim/coated_cell.hpp"
#include "cellsim/fitlab.hpp"
#include "cellsim/lambda_solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cellsim {

using Json = nlohmann::ordered_json;

enum class Pipeline { spectrum, pulse, sweep, fit };
enum class MediumKind { coated, lambda };

std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& s);

struct SpectrumSpec {
    std::string source = "medium";          // medium | double_resonance
    std::string quantity = "transmission";  // transmission | susceptibility
    double center_hz = 0.0;
    double span_hz = 100e3;
    int points = 2001;
    std::string fit = "none";               // none | lorentzian | dual_lorentzian
};

struct PulseSpec {
    double fwhm_s = 0.0;
    double samples_per_fwhm = 32.0;
    double half_span_fwhm = 4.0;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    std::string mode = "pulse";  // pulse | group_velocity
    std::vector<SweepAxis> axes;
    std::int64_t max_cells = 10000;
};

struct FitSpec {
    std::string input;
    LineModel model = LineModel::lorentzian;
};

struct MonteCarloSpec {
    bool enabled = false;
    std::int64_t n_atoms = 20000;
    int bounces_per_atom = 64;
    bool calibrate_weights = false;  // replace the frozen f_b constants by a fresh calibration
};

// Double-resonance settings; rates kept in Hz so the resolved config round-trips exactly.
struct DRSpec {
    Isotope species = Isotope::Rb85;
    double static_field_G = 0.038;
    double rf_rabi_hz = 1.0;
    double pump_intensity = 1e-5;  // mW/cm^2
    double gamma_ground_hz = 11.0;
    double gF = 1.0 / 3.0;
    double optical_depth = 0.5;
};

struct LambdaOverrides {
    std::optional<double> gamma_ground_hz;  // gamma / 2 pi
    double one_photon_detuning_mhz = 0.0;
    std::optional<double> density_cm3;
};

struct ScenarioConfig {
    std::string scenario = "custom";
    Pipeline pipeline = Pipeline::spectrum;
    MediumKind medium = MediumKind::coated;
    std::optional<std::uint64_t> seed;
    CellConfig cell;
    TransitionSpec transition;
    LambdaOverrides lambda;
    RepumpConfig repump;
    DRSpec dr;
    SpectrumSpec spectrum;
    PulseSpec pulse;
    SweepSpec sweep;
    FitSpec fit;
    MonteCarloSpec monte_carlo;
    int workers = 1;  // not part of the resolved config: results do not depend on it
};

// Names accepted as sweep axes.
const std::vector<std::string>& sweep_axis_names();

// Parses a config document; a run manifest is accepted too (its "config"
// member is used). Every unknown key, wrong type and physically inconsistent
// value is collected into one ValidationError.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path);
Json to_json(const ScenarioConfig& c);

std::vector<std::string> validate(const ScenarioConfig& c);
void require_valid(const ScenarioConfig& c);

DRParams dr_params(const ScenarioConfig& c);

// Applies a sweep-axis value by name.
void apply_axis(ScenarioConfig& c, const std::string& name, double value);

}  // namespace cellsim
