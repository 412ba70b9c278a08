#pragma once

#include "cellsim/series.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace cellsim {

enum class LineModel { lorentzian, dual_lorentzian };

std::string to_string(LineModel m);
LineModel parse_line_model(const std::string& s);

// Parameter order:
//   lorentzian       center, fwhm, amplitude, offset
//   dual_lorentzian  center, fwhm_narrow, amplitude_narrow, fwhm_broad, amplitude_broad, offset
struct FitResult {
    LineModel model = LineModel::lorentzian;
    std::vector<std::string> names;
    Eigen::VectorXd params;
    Eigen::VectorXd uncertainties;
    double residual_rms = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> rms_history;  // after every accepted step, starting from the initial guess

    double operator[](const std::string& name) const;
    double uncertainty(const std::string& name) const;
    Eigen::ArrayXd evaluate(const Eigen::ArrayXd& x) const;

    std::string to_text() const;
    static std::string csv_header(LineModel m);
    std::string csv_row() const;
};

std::vector<std::string> parameter_names(LineModel m);
Eigen::ArrayXd lorentzian(const Eigen::ArrayXd& x, double center, double fwhm);
Eigen::ArrayXd evaluate_model(LineModel m, const Eigen::VectorXd& params, const Eigen::ArrayXd& x);

// Levenberg-Marquardt with Marquardt diagonal scaling. Damping starts at 1e-3,
// is divided by 10 after an accepted step (floor 1e-15) and multiplied by 10
// after a rejected one; a step is accepted only if it lowers the residual sum
// of squares. Stops when the largest relative parameter step is below 1e-8,
// when no step can lower the residual (damping above 1e16), or after 500
// iterations. Data are shifted and scaled to unit range before fitting.
inline constexpr int fit_max_iterations = 500;
inline constexpr double fit_step_tolerance = 1e-8;

FitResult fit_lorentzian(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                         const std::optional<Eigen::VectorXd>& guess = std::nullopt);
FitResult fit_lorentzian(const Spectrum& s, const std::optional<Eigen::VectorXd>& guess = std::nullopt);
FitResult fit_dual_lorentzian(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                              const std::optional<Eigen::VectorXd>& guess = std::nullopt);
FitResult fit_dual_lorentzian(const Spectrum& s, const std::optional<Eigen::VectorXd>& guess = std::nullopt);
FitResult fit_model(LineModel m, const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

Eigen::VectorXd initial_guess_lorentzian(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);
Eigen::VectorXd initial_guess_dual(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

struct PulseMetrics {
    double peak_time;
    double fwhm;
    double energy;
};

// Peak by 3-point parabolic interpolation around the largest sample.
double peak_time(const Pulse& p);
// Full width at half of the peak sample, by linear interpolation.
double pulse_fwhm(const Pulse& p);
double pulse_energy(const Pulse& p);
// As above, and rejects traces with a second lobe reaching 90% of the maximum.
PulseMetrics pulse_metrics(const Pulse& p);

}  // namespace cellsim
