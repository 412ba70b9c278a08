#include "cellsim/coated_cell.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

namespace cellsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct AtomRecord {
    double total_time = 0.0;
    double beam_time = 0.0;
    std::vector<double> in_beam;
    std::vector<double> dark;
    std::vector<int> dark_bounces;
};

class Walker {
public:
    Walker(const CellConfig& cell, std::uint64_t seed)
        : R_(cell.cell_radius), L_(cell.cell_length), rb_(0.5 * cell.beam.diameter),
          sigma_(std::sqrt(phys::kB * phys::kelvin(cell.temperature) / rb87().atomic_mass)),
          rng_(splitmix64(seed))
    {
    }

    AtomRecord run(int wall_hits)
    {
        AtomRecord rec;
        const double r = R_ * std::sqrt(uniform());
        const double phi = phys::two_pi * uniform();
        Eigen::Vector3d pos(r * std::cos(phi), r * std::sin(phi), L_ * uniform());
        std::normal_distribution<double> normal(0.0, sigma_);
        Eigen::Vector3d v(normal(rng_), normal(rng_), normal(rng_));

        double t = 0.0;
        double beam_time = 0.0;
        double last = 0.0;
        bool started = false;  // the interval running from t = 0 is censored
        int bounces = 0;
        // Intervals that start within the first wall_hits bounces are followed
        // to their end; cutting them at a fixed bounce count would bias the
        // dark-time distribution toward short intervals.
        const long max_hits = 1000L * wall_hits;
        for (long hit = 0; hit < max_hits; ++hit) {
            if (hit == wall_hits) {
                rec.total_time = t;
                rec.beam_time = beam_time;
                if (!started) return rec;
            }
            const double a = v.x() * v.x() + v.y() * v.y();
            const double b = 2.0 * (pos.x() * v.x() + pos.y() * v.y());
            const double c = pos.x() * pos.x() + pos.y() * pos.y() - R_ * R_;
            const double inf = std::numeric_limits<double>::infinity();
            const double ts = a > 0.0 ? (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a) : inf;
            const double tz = v.z() > 0.0 ? (L_ - pos.z()) / v.z() : (v.z() < 0.0 ? -pos.z() / v.z() : inf);
            const double tw = std::min(ts, tz);
            if (!std::isfinite(tw)) throw NumericalError("trajectory stalled", t);

            const double c2 = pos.x() * pos.x() + pos.y() * pos.y() - rb_ * rb_;
            bool inside = c2 < 0.0;
            double events[2];
            int ne = 0;
            const double disc = b * b - 4.0 * a * c2;
            if (a > 0.0 && disc > 0.0) {
                const double sq = std::sqrt(disc);
                for (double e : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)})
                    if (e > 0.0 && e < tw) events[ne++] = e;
            }
            double seg_start = 0.0;
            for (int k = 0; k < ne; ++k) {
                const double te = t + events[k];
                if (inside) {
                    beam_time += events[k] - seg_start;
                    if (started) rec.in_beam.push_back(te - last);
                    bounces = 0;
                } else if (started) {
                    rec.dark.push_back(te - last);
                    rec.dark_bounces.push_back(bounces);
                }
                if (hit >= wall_hits && started) return rec;
                started = true;
                last = te;
                seg_start = events[k];
                inside = !inside;
            }
            if (inside) beam_time += tw - seg_start;

            t += tw;
            pos += v * tw;
            Eigen::Vector3d n;
            if (ts < tz) {
                const double rho = std::hypot(pos.x(), pos.y());
                n = Eigen::Vector3d(-pos.x() / rho, -pos.y() / rho, 0.0);
                pos.head<2>() *= (R_ * (1.0 - 1e-12)) / rho;
            } else {
                n = Eigen::Vector3d(0.0, 0.0, v.z() > 0.0 ? -1.0 : 1.0);
                pos.z() = v.z() > 0.0 ? L_ : 0.0;
            }
            v = flux_speed() * cosine_direction(n);
            ++bounces;
        }
        return rec;
    }

private:
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

    double flux_speed()
    {
        const double u = (1.0 - uniform()) * (1.0 - uniform());
        return sigma_ * std::sqrt(-2.0 * std::log(u));
    }

    Eigen::Vector3d cosine_direction(const Eigen::Vector3d& n)
    {
        const double u1 = uniform();
        const double phi = phys::two_pi * uniform();
        const double ct = std::sqrt(u1);
        const double st = std::sqrt(1.0 - u1);
        const Eigen::Vector3d a = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
        const Eigen::Vector3d t1 = n.cross(a).normalized();
        const Eigen::Vector3d t2 = n.cross(t1);
        return ct * n + st * (std::cos(phi) * t1 + std::sin(phi) * t2);
    }

    double R_, L_, rb_, sigma_;
    std::mt19937_64 rng_;
};

std::vector<AtomRecord> run_atoms(const CellConfig& cell, std::int64_t n_atoms, std::uint64_t seed,
                                  const TrajectoryOptions& opts)
{
    std::vector<AtomRecord> out(static_cast<std::size_t>(n_atoms));
    const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(std::max<std::int64_t>(1, n_atoms))));
    auto work = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            Walker w(cell, seed ^ splitmix64(static_cast<std::uint64_t>(i)));
            out[static_cast<std::size_t>(i)] = w.run(opts.bounces_per_atom);
        }
    };
    if (workers == 1) {
        work(0, n_atoms);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::int64_t chunk = (n_atoms + workers - 1) / workers;
    for (int k = 0; k < workers; ++k) {
        const std::int64_t b = k * chunk;
        const std::int64_t e = std::min(n_atoms, b + chunk);
        pool.emplace_back([&, b, e, k] {
            try {
                work(b, e);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace

TransitStatistics simulate_trajectories(const CellConfig& cell, std::int64_t n_atoms, std::uint64_t seed,
                                        const TrajectoryOptions& opts)
{
    auto problems = cell.problems();
    if (n_atoms < 1) problems.push_back("n_atoms must be >= 1");
    if (opts.bounces_per_atom < 1) problems.push_back("bounces_per_atom must be >= 1");
    if (opts.histogram_bins < 1) problems.push_back("histogram_bins must be >= 1");
    if (!(cell.beam.diameter > 0.0)) problems.push_back("beam.diameter must be > 0 for trajectories");
    if (!problems.empty()) throw ValidationError(problems);

    const auto atoms = run_atoms(cell, n_atoms, seed, opts);

    TransitStatistics s;
    s.seed = seed;
    s.n_atoms = n_atoms;
    s.bounce_count_histogram.assign(static_cast<std::size_t>(opts.histogram_bins), 0.0);
    double sum_in = 0.0, sum_dark = 0.0, sum_b = 0.0, sum_T = 0.0;
    for (const auto& a : atoms) {
        sum_b += a.beam_time;
        sum_T += a.total_time;
        for (double x : a.in_beam) sum_in += x;
        for (double x : a.dark) sum_dark += x;
        s.in_beam_intervals += static_cast<std::int64_t>(a.in_beam.size());
        s.dark_intervals += static_cast<std::int64_t>(a.dark.size());
        for (int n : a.dark_bounces)
            s.bounce_count_histogram[std::min<std::size_t>(n, s.bounce_count_histogram.size() - 1)] += 1.0;
        if (opts.keep_dark_intervals) {
            s.dark_times.insert(s.dark_times.end(), a.dark.begin(), a.dark.end());
            s.dark_bounces.insert(s.dark_bounces.end(), a.dark_bounces.begin(), a.dark_bounces.end());
        }
    }
    if (s.in_beam_intervals > 0) s.mean_in_beam_time = sum_in / static_cast<double>(s.in_beam_intervals);
    if (s.dark_intervals > 0) {
        s.mean_dark_time = sum_dark / static_cast<double>(s.dark_intervals);
        for (double& h : s.bounce_count_histogram) h /= static_cast<double>(s.dark_intervals);
    }
    s.in_beam_fraction = sum_b / sum_T;
    if (n_atoms > 1) {
        const double f = s.in_beam_fraction;
        const double mean_T = sum_T / static_cast<double>(n_atoms);
        double ss = 0.0;
        for (const auto& a : atoms) ss += (a.beam_time - f * a.total_time) * (a.beam_time - f * a.total_time);
        const double n = static_cast<double>(n_atoms);
        s.in_beam_fraction_error = std::sqrt(ss / (n * (n - 1.0))) / mean_T;
    }
    return s;
}

void write_transit_csv(std::ostream& os, const TransitStatistics& s)
{
    os << "# seed=" << s.seed << '\n'
       << "# n_atoms=" << s.n_atoms << '\n'
       << "# mean_in_beam_time_s=" << format_double(s.mean_in_beam_time) << '\n'
       << "# mean_dark_time_s=" << format_double(s.mean_dark_time) << '\n'
       << "# in_beam_fraction=" << format_double(s.in_beam_fraction) << '\n'
       << "# in_beam_fraction_error=" << format_double(s.in_beam_fraction_error) << '\n'
       << "# in_beam_intervals=" << s.in_beam_intervals << '\n'
       << "# dark_intervals=" << s.dark_intervals << '\n'
       << "bounces,probability\n";
    for (std::size_t i = 0; i < s.bounce_count_histogram.size(); ++i)
        os << i << ',' << format_double(s.bounce_count_histogram[i]) << '\n';
}

BounceCalibration calibrate_bounce_fraction(const CellConfig& cell, double coherence_time, std::int64_t n_atoms,
                                            std::uint64_t seed, int workers)
{
    if (!(coherence_time > 0.0)) throw DomainError("calibrate_bounce_fraction: coherence time must be > 0");
    TrajectoryOptions opts;
    opts.keep_dark_intervals = true;
    opts.bounces_per_atom = 400;
    opts.workers = workers;
    const auto s = simulate_trajectories(cell, n_atoms, seed, opts);
    if (s.dark_times.empty()) throw NumericalError("calibrate_bounce_fraction: no completed dark intervals", 0.0);

    BounceCalibration c{coherence_time, 0.0, 0.0, 0.0};
    double returns = 0.0, nsum = 0.0;
    for (std::size_t i = 0; i < s.dark_times.size(); ++i) {
        if (s.dark_times[i] >= coherence_time) continue;
        returns += 1.0;
        nsum += s.dark_bounces[i];
        c.bounce_fraction += std::pow(cell.wall_coherence_survival, s.dark_bounces[i]);
    }
    const double total = static_cast<double>(s.dark_times.size());
    c.return_fraction = returns / total;
    c.bounce_fraction /= total;
    const double pw = cell.wall_coherence_survival;
    // effective exponent, so that return_fraction * p_w^n reproduces bounce_fraction
    if (returns > 0.0 && pw > 0.0 && pw < 1.0)
        c.mean_dark_bounces = std::log(c.bounce_fraction / c.return_fraction) / std::log(pw);
    else if (returns > 0.0)
        c.mean_dark_bounces = nsum / returns;
    return c;
}

}  // namespace cellsim
