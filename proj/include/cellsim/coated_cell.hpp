#pragma once

#include "cellsim/atomkit.hpp"
#include "cellsim/lambda_solver.hpp"
#include "cellsim/series.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cellsim {

struct CellConfig {
    double cell_radius = 9e-3;              // m
    double cell_length = 10e-3;             // m
    double temperature = 70.0;              // degC
    BeamConfig beam;
    double wall_coherence_survival = 0.9998;
    double wall_decoherence_rate = -1.0;    // 1/s; negative means derive from p_w
    double field_gradient_width = 12.0;     // Hz, half-width in the delta_m = 1 basis
    double rb85_fraction = 0.72;
    double rb87_fraction = 0.28;

    // Frozen model constants. f_b = return_fraction * p_w^mean_dark_bounces,
    // both from simulate_trajectories at the calibration point.
    double return_fraction = 0.8192;
    double mean_dark_bounces = 10.75;
    double trapping_A = 0.3;
    double trapping_beta = 0.1;
    bool radiation_trapping = true;
    double spin_exchange_cross_section = 1.9e-14;  // cm^2
    int trapping_max_iterations = 5000;

    std::vector<std::string> problems() const;
};

// Mean chord 4V/S of the closed cylinder.
double mean_chord(const CellConfig& cell);
double wall_collision_rate(const CellConfig& cell);                     // 1/s
double wall_decoherence_rate(const CellConfig& cell);                   // 1/s
double spin_exchange_rate(const CellConfig& cell);                      // 1/s
double beam_fill_factor(const CellConfig& cell);                        // beam area / cell cross-section
double bounce_fraction(const CellConfig& cell);                         // f_b
double transit_rate(const CellConfig& cell);                            // rad/s, half-width
double transit_linewidth(const CellConfig& cell);                       // Hz, FWHM
double intrinsic_ground_decoherence(const CellConfig& cell);            // rad/s, narrow ensemble before trapping
double rb87_density(const CellConfig& cell);                            // cm^-3

struct RepumpConfig {
    double omega_r = 0.0;             // rad/s; derived from repump_intensity when zero
    double repump_intensity = 0.0;    // mW/cm^2
    std::string target = "F=1->F'=2";
    double duty = 1.0;                // fraction of time an atom spends in the repump beam
    double branching = 0.5;           // share of F'=2 decays landing in F=2
};

// Two-level rate equations between F=1 (3 states) and F=2 (5 states) of Rb87.
// p.density is read as the total Rb87 density, p.gamma_ground as the
// hyperfine population relaxation rate, p.doppler_width for the pumping rate.
double repump_rate(const LambdaParams& p, const RepumpConfig& r);
double f2_population(const LambdaParams& p, const RepumpConfig& r);
double repumper_effective_density(const LambdaParams& p, const RepumpConfig& r);

// Lambda parameters of the cell's narrow ensemble before radiation trapping:
// density is the F=2 (Lambda-participating) density, gamma_ground the
// intrinsic rate, omega_c the full control Rabi frequency.
LambdaParams cell_lambda_params(const CellConfig& cell, const RepumpConfig& repump = {});

// Radiation trapping. R_scatter(g) is the beam photon flux averaged over the
// cell times the residual line-centre absorption cross-section of a narrow
// ensemble atom at ground rate g; P = 1 - exp(-beta OD) with OD the
// control-off line-centre depth across one cell radius.
double trapping_scatter_rate(const LambdaParams& p, const CellConfig& cell, double gamma);
double trapping_reabsorption(const LambdaParams& p, const CellConfig& cell);
double trapping_map(const LambdaParams& p, const CellConfig& cell, double gamma_rt);
double radiation_trapping_decoherence(const LambdaParams& p, const CellConfig& cell);

struct CoatedMedium {
    Medium medium;
    double gamma_transit;  // rad/s, pedestal ensemble
    double gamma_narrow;   // rad/s, narrow ensemble including trapping
    double gamma_rt;       // rad/s
    double f_t;
    double f_b;
};

CoatedMedium coated_medium(const CellConfig& cell, const LambdaParams& p);
CoatedMedium coated_medium(const CellConfig& cell, const RepumpConfig& repump = {});

Spectrum dual_structure_spectrum(const CellConfig& cell, const LambdaParams& p, const Eigen::ArrayXd& grid_hz);

struct TransitStatistics {
    double mean_in_beam_time = 0.0;
    double mean_dark_time = 0.0;
    std::vector<double> bounce_count_histogram;  // probability of n wall bounces per dark interval
    double in_beam_fraction = 0.0;
    double in_beam_fraction_error = 0.0;         // one standard error
    std::uint64_t seed = 0;
    std::int64_t n_atoms = 0;
    std::int64_t in_beam_intervals = 0;
    std::int64_t dark_intervals = 0;
    // raw dark intervals, kept only on request
    std::vector<double> dark_times;
    std::vector<int> dark_bounces;
};

struct TrajectoryOptions {
    int bounces_per_atom = 64;
    int histogram_bins = 200;
    bool keep_dark_intervals = false;
    int workers = 1;
};

TransitStatistics simulate_trajectories(const CellConfig& cell, std::int64_t n_atoms, std::uint64_t seed,
                                        const TrajectoryOptions& opts = {});

void write_transit_csv(std::ostream& os, const TransitStatistics& s);

struct BounceCalibration {
    double coherence_time;       // s
    double return_fraction;      // P(dark interval < coherence_time)
    double mean_dark_bounces;    // n with return_fraction * p_w^n = bounce_fraction
    double bounce_fraction;      // mean of 1[dark < tau] p_w^n
};

BounceCalibration calibrate_bounce_fraction(const CellConfig& cell, double coherence_time, std::int64_t n_atoms,
                                            std::uint64_t seed, int workers = 1);

}  // namespace cellsim
