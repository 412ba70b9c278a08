#include "cellsim/coated_cell.hpp"
#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"
#include "cellsim/fitlab.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cellsim;

namespace {

Eigen::ArrayXd lorentz(const Eigen::ArrayXd& x, double c, double w, double a, double off)
{
    return off + a * lorentzian(x, c, w);
}

Pulse gaussian_trace(double sigma, double dt, double center, int n)
{
    Pulse p;
    p.dt = dt;
    p.t0 = -0.5 * dt * (n - 1);
    p.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = p.time(i) - center;
        p.samples[i] = std::exp(-0.5 * t * t / (sigma * sigma));
    }
    return p;
}

}  // namespace

TEST_CASE("noiseless 22 Hz Lorentzian is recovered")
{
    const Eigen::ArrayXd x = uniform_grid(-150.0, 150.0, 301);
    const FitResult f = fit_lorentzian(x, lorentz(x, 0.0, 22.0, -0.3, 0.9));
    CHECK(f.converged);
    CHECK(f["fwhm"] == doctest::Approx(22.0).epsilon(1e-6));
    CHECK(std::abs(f["center"]) < 1e-6);
    CHECK(f["amplitude"] == doctest::Approx(-0.3).epsilon(1e-6));
    CHECK(f.residual_rms >= 0.0);
    CHECK((f.uncertainties.array() >= 0.0).all());
}

TEST_CASE("constant data is a fit error")
{
    const Eigen::ArrayXd x = uniform_grid(-10.0, 10.0, 50);
    CHECK_THROWS_AS(fit_lorentzian(x, Eigen::ArrayXd::Constant(50, 0.4)), FitError);
    CHECK_THROWS_AS(fit_dual_lorentzian(x, Eigen::ArrayXd::Constant(50, 0.4)), FitError);
}

TEST_CASE("too few points or unsorted x are rejected")
{
    const Eigen::ArrayXd x = uniform_grid(-10.0, 10.0, 6);
    CHECK_THROWS(fit_lorentzian(x, lorentz(x, 0.0, 3.0, 1.0, 0.0)));
    Eigen::ArrayXd y = uniform_grid(-10.0, 10.0, 20);
    std::swap(y[3], y[4]);
    CHECK_THROWS(fit_lorentzian(y, lorentz(y, 0.0, 3.0, 1.0, 0.0)));
}

TEST_CASE("2% noise: width within 2% in at least 48 of 50 seeds")
{
    const Eigen::ArrayXd x = uniform_grid(-110.0, 110.0, 401);
    const Eigen::ArrayXd clean = lorentz(x, 3.0, 22.0, 1.0, 0.0);
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, 0.02);
        Eigen::ArrayXd y = clean;
        for (auto& v : y) v += n(rng);
        const FitResult f = fit_lorentzian(x, y);
        if (std::abs(f["fwhm"] / 22.0 - 1.0) <= 0.02) ++good;
    }
    CHECK(good >= 48);
}

TEST_CASE("noiseless dual Lorentzian is recovered, narrow first")
{
    const Eigen::ArrayXd x = uniform_grid(-60e3, 60e3, 2401);
    const Eigen::ArrayXd y = 0.1 + 0.5 * lorentzian(x, 0.0, 350.0) + 0.5 * lorentzian(x, 0.0, 13e3);
    const FitResult f = fit_dual_lorentzian(x, y);
    CHECK(f.names[1] == "fwhm_narrow");
    CHECK(f["fwhm_narrow"] == doctest::Approx(350.0).epsilon(1e-3));
    CHECK(f["fwhm_broad"] == doctest::Approx(13e3).epsilon(1e-3));
}

TEST_CASE("single Lorentzian given to the dual model")
{
    const Eigen::ArrayXd x = uniform_grid(-60e3, 60e3, 1201);
    const Eigen::ArrayXd y = 0.2 + 0.7 * lorentzian(x, 0.0, 13e3);
    bool degenerate = false;
    try {
        const FitResult f = fit_dual_lorentzian(x, y);
        degenerate = std::abs(f["amplitude_narrow"]) < 0.01 * std::abs(f["amplitude_broad"]);
        if (degenerate) {
            // reduces to the single fit
            const FitResult s = fit_lorentzian(x, y);
            CHECK(f["fwhm_broad"] == doctest::Approx(s["fwhm"]).epsilon(1e-6));
            CHECK(f["center"] == doctest::Approx(s["center"]).scale(13e3).epsilon(1e-6));
            CHECK(f["offset"] + f["amplitude_narrow"] * 0.0 == doctest::Approx(s["offset"]).epsilon(1e-6));
        }
    } catch (const FitError&) {
        degenerate = true;
    }
    CHECK(degenerate);
}

TEST_CASE("dual fit of the coated-cell spectrum matches the generating ensembles")
{
    CellConfig cell;
    cell.temperature = 48.0;
    cell.beam = BeamConfig::from_control(4.5e-3, 3.5, 0.1);
    const CoatedMedium cm = coated_medium(cell);
    const Eigen::ArrayXd grid = uniform_grid(-60e3, 60e3, 2401);

    // each ensemble on its own, at its share of the density
    auto alone = [&](const Ensemble& e) {
        LambdaParams p = cell_lambda_params(cell);
        p.gamma_ground = e.gamma_ground;
        p.omega_c = e.omega_c;
        p.density *= e.weight;
        return eit_fwhm(p);
    };
    const double narrow = alone(cm.medium.ensembles[1]);
    const double broad = alone(cm.medium.ensembles[0]);

    // Im chi is the plain sum of the two ensembles
    Eigen::ArrayXd im(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) im[i] = cm.medium.chi(phys::two_pi * grid[i]).imag();
    const FitResult fc = fit_dual_lorentzian(grid, im);
    CHECK(fc["fwhm_narrow"] == doctest::Approx(narrow).epsilon(0.05));
    CHECK(fc["fwhm_broad"] == doctest::Approx(broad).epsilon(0.05));

    // exp(-OD) squeezes the narrow feature a little
    const FitResult ft = fit_dual_lorentzian(dual_structure_spectrum(cell, cell_lambda_params(cell), grid));
    CHECK(ft["fwhm_narrow"] == doctest::Approx(narrow).epsilon(0.10));
    CHECK(ft["fwhm_broad"] == doctest::Approx(broad).epsilon(0.05));
}

TEST_CASE("accepted steps never raise the residual")
{
    const Eigen::ArrayXd x = uniform_grid(-60e3, 60e3, 1201);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 0.01);
    Eigen::ArrayXd y = 0.3 * lorentzian(x, 100.0, 500.0) + 0.6 * lorentzian(x, 100.0, 9e3);
    for (auto& v : y) v += n(rng);
    for (const FitResult& f : {fit_dual_lorentzian(x, y), fit_lorentzian(x, y)}) {
        REQUIRE(f.rms_history.size() >= 2);
        for (std::size_t i = 1; i < f.rms_history.size(); ++i) CHECK(f.rms_history[i] <= f.rms_history[i - 1]);
    }
}

TEST_CASE("fits are invariant under x shifts and affine y maps")
{
    const Eigen::ArrayXd x = uniform_grid(-200.0, 200.0, 401);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 0.01);
    Eigen::ArrayXd y = lorentz(x, 12.0, 40.0, 0.8, 0.1);
    for (auto& v : y) v += n(rng);
    const FitResult f = fit_lorentzian(x, y);

    const double shift = 1234.5;
    const FitResult g = fit_lorentzian(x + shift, y);
    CHECK(g["center"] - shift == doctest::Approx(f["center"]).scale(40.0).epsilon(1e-6));
    CHECK(g["fwhm"] == doctest::Approx(f["fwhm"]).epsilon(1e-6));

    const double a = -3.0, b = 7.0;
    const FitResult h = fit_lorentzian(x, a * y + b);
    CHECK(h["fwhm"] == doctest::Approx(f["fwhm"]).epsilon(1e-6));
    CHECK(h["center"] == doctest::Approx(f["center"]).scale(40.0).epsilon(1e-6));
    CHECK(h["amplitude"] == doctest::Approx(a * f["amplitude"]).epsilon(1e-6));
    CHECK(h["offset"] == doctest::Approx(a * f["offset"] + b).epsilon(1e-6));
}

TEST_CASE("fit results are deterministic and serialise")
{
    const Eigen::ArrayXd x = uniform_grid(-100.0, 100.0, 201);
    const Eigen::ArrayXd y = lorentz(x, 0.0, 22.0, 1.0, 0.0);
    const FitResult a = fit_lorentzian(x, y), b = fit_lorentzian(x, y);
    CHECK(a.to_text() == b.to_text());
    CHECK(a.to_text().find("fwhm=") != std::string::npos);
    CHECK(FitResult::csv_header(LineModel::lorentzian).find("fwhm") != std::string::npos);
    CHECK(parse_line_model("dual_lorentzian") == LineModel::dual_lorentzian);
    CHECK_THROWS(parse_line_model("gauss"));
}

TEST_CASE("pulse metrics of a Gaussian")
{
    const double sigma = 3e-6, dt = 1e-7;
    const Pulse p = gaussian_trace(sigma, dt, 2e-6, 801);
    const PulseMetrics m = pulse_metrics(p);
    CHECK(std::abs(m.fwhm - 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma) <= dt);
    CHECK(m.peak_time == doctest::Approx(2e-6).scale(1e-6).epsilon(1e-3));
    CHECK(m.energy == doctest::Approx(sigma * std::sqrt(2.0 * M_PI)).epsilon(1e-9));
}

TEST_CASE("time reversal mirrors the peak and keeps width and energy")
{
    Pulse p = gaussian_trace(2e-6, 1e-7, 0.0, 401);
    for (Eigen::Index i = 0; i < p.samples.size(); ++i) p.samples[i] *= 1.0 + 0.3 * std::tanh(p.time(i) / 2e-6);
    Pulse r = p;
    r.samples = p.samples.reverse();
    const PulseMetrics a = pulse_metrics(p), b = pulse_metrics(r);
    CHECK(b.fwhm == doctest::Approx(a.fwhm).epsilon(1e-12));
    CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-12));
    CHECK(b.peak_time == doctest::Approx(-a.peak_time).scale(1e-6).epsilon(1e-9));
}

TEST_CASE("pulse energy matches analytic quadrature for random smooth pulses")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        // a main lobe plus a weaker, broader shoulder
        const double s1 = 1e-6 * (1.0 + u(rng)), s2 = s1 * (1.5 + u(rng));
        const double a2 = 0.3 * u(rng), c2 = s1 * (u(rng) - 0.5);
        const double dt = s1 / 14.0;
        Pulse p;
        p.dt = dt;
        p.t0 = -12.0 * s2;
        const auto n = static_cast<Eigen::Index>(24.0 * s2 / dt);
        p.samples.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = p.time(i);
            p.samples[i] = std::exp(-0.5 * t * t / (s1 * s1)) + a2 * std::exp(-0.5 * (t - c2) * (t - c2) / (s2 * s2));
        }
        const double exact = std::sqrt(2.0 * M_PI) * (s1 + a2 * s2);
        CHECK(pulse_metrics(p).energy == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("two comparable peaks are ambiguous")
{
    Pulse p = gaussian_trace(1e-6, 1e-7, -4e-6, 201);
    const Pulse q = gaussian_trace(1e-6, 1e-7, 4e-6, 201);
    p.samples += 0.95 * q.samples;
    CHECK_THROWS_AS(pulse_metrics(p), MetricError);
    Pulse flat = p;
    flat.samples.setConstant(1.0);
    CHECK_THROWS_AS(pulse_metrics(flat), MetricError);
}
