#include "cellsim/scenario.hpp"

#include "cellsim/errors.hpp"

#include <cmath>

namespace cellsim {

namespace {

std::vector<double> log_values(double lo, double hi, int n)
{
    const Eigen::ArrayXd g = log_grid(lo, hi, n);
    return {g.data(), g.data() + g.size()};
}

ScenarioConfig base(const std::string& name, Pipeline p)
{
    ScenarioConfig c;
    c.scenario = name;
    c.pipeline = p;
    c.seed = 1;
    return c;
}

}  // namespace

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names = {"fig2a-dr",   "fig2b-eit",   "fig3-dual",
                                                   "fig4-delay", "fig5-repump", "fig6-vg"};
    return names;
}

ScenarioConfig preset(const std::string& name)
{
    if (name == "fig2a-dr") {
        // rf double resonance on Rb85 in a 38 mG field; pump and rf kept weak
        ScenarioConfig c = base(name, Pipeline::spectrum);
        c.cell.temperature = 36.0;
        c.spectrum.source = "double_resonance";
        c.dr.species = Isotope::Rb85;
        c.dr.static_field_G = 0.038;
        c.dr.gF = 1.0 / 3.0;
        c.dr.gamma_ground_hz = 11.0;
        c.dr.rf_rabi_hz = 1.0;
        c.dr.pump_intensity = 1e-5;
        c.dr.optical_depth = 0.5;
        c.spectrum.center_hz = std::round(double_resonance_center(dr_params(c)));
        c.spectrum.span_hz = 200.0;
        c.spectrum.points = 401;
        c.spectrum.fit = "lorentzian";
        return c;
    }
    if (name == "fig2b-eit") {
        ScenarioConfig c = base(name, Pipeline::spectrum);
        c.medium = MediumKind::lambda;
        c.cell.temperature = 36.0;
        c.cell.beam = BeamConfig::from_control(2e-3, 1e-3, 0.1);
        c.lambda.gamma_ground_hz = 25.0;
        c.spectrum.span_hz = 500.0;
        c.spectrum.points = 501;
        c.spectrum.fit = "lorentzian";
        return c;
    }
    if (name == "fig3-dual") {
        ScenarioConfig c = base(name, Pipeline::spectrum);
        c.cell.temperature = 48.0;
        c.cell.beam = BeamConfig::from_control(4.5e-3, 3.5, 0.1);
        c.spectrum.span_hz = 120e3;
        c.spectrum.points = 2401;
        c.spectrum.fit = "dual_lorentzian";
        c.monte_carlo.enabled = true;
        c.monte_carlo.n_atoms = 20000;
        return c;
    }
    if (name == "fig4-delay") {
        ScenarioConfig c = base(name, Pipeline::sweep);
        c.cell.temperature = 70.0;
        c.cell.beam = BeamConfig::from_control(2e-3, 60.0, 0.1);
        c.sweep.axes = {{"control_intensity_mW_cm2", {2.0, 60.0}}, {"pulse_fwhm_s", log_values(1e-6, 20e-3, 12)}};
        return c;
    }
    if (name == "fig5-repump") {
        ScenarioConfig c = base(name, Pipeline::sweep);
        c.cell.beam = BeamConfig::from_control(2e-3, 5.0, 0.1);
        c.sweep.axes = {{"temperature_C", {50.0, 75.0}},
                        {"repump_intensity_mW_cm2", {0.0, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0}},
                        {"pulse_fwhm_s", log_values(1e-6, 20e-3, 23)}};
        return c;
    }
    if (name == "fig6-vg") {
        ScenarioConfig c = base(name, Pipeline::sweep);
        c.cell.beam = BeamConfig::from_control(2e-3, 5.0, 0.1);
        c.sweep.mode = "group_velocity";
        c.sweep.axes = {{"temperature_C", {50.0, 60.0, 70.0, 75.0}},
                        {"control_intensity_mW_cm2", {5.0, 7.0, 10.0, 14.0, 20.0, 28.0, 40.0, 60.0}}};
        return c;
    }
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError({"unknown preset '" + name + "' (known: " + known + ")"});
}

}  // namespace cellsim
