#include "cellsim/fitlab.hpp"

#include "cellsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cellsim {

std::string to_string(LineModel m) { return m == LineModel::lorentzian ? "lorentzian" : "dual_lorentzian"; }

LineModel parse_line_model(const std::string& s)
{
    if (s == "lorentzian" || s == "single") return LineModel::lorentzian;
    if (s == "dual_lorentzian" || s == "dual") return LineModel::dual_lorentzian;
    throw DomainError("unknown fit model '" + s + "' (expected lorentzian or dual_lorentzian)");
}

std::vector<std::string> parameter_names(LineModel m)
{
    if (m == LineModel::lorentzian) return {"center", "fwhm", "amplitude", "offset"};
    return {"center", "fwhm_narrow", "amplitude_narrow", "fwhm_broad", "amplitude_broad", "offset"};
}

double FitResult::operator[](const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params[static_cast<Eigen::Index>(i)];
    throw DomainError("fit result has no parameter " + name);
}

double FitResult::uncertainty(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return uncertainties[static_cast<Eigen::Index>(i)];
    throw DomainError("fit result has no parameter " + name);
}

Eigen::ArrayXd FitResult::evaluate(const Eigen::ArrayXd& x) const { return evaluate_model(model, params, x); }

std::string FitResult::to_text() const
{
    std::ostringstream os;
    os << "model=" << to_string(model) << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        os << names[i] << '=' << format_double(params[k]) << '\n';
        os << names[i] << "_uncertainty=" << format_double(uncertainties[k]) << '\n';
    }
    os << "residual_rms=" << format_double(residual_rms) << '\n';
    os << "converged=" << (converged ? "true" : "false") << '\n';
    os << "iterations=" << iterations << '\n';
    return os.str();
}

std::string FitResult::csv_header(LineModel m)
{
    std::string h = "model";
    for (const auto& n : parameter_names(m)) h += "," + n + "," + n + "_uncertainty";
    return h + ",residual_rms,converged,iterations";
}

std::string FitResult::csv_row() const
{
    std::string r = to_string(model);
    for (Eigen::Index k = 0; k < params.size(); ++k)
        r += "," + format_double(params[k]) + "," + format_double(uncertainties[k]);
    r += "," + format_double(residual_rms) + "," + (converged ? "true" : "false") + "," + std::to_string(iterations);
    return r;
}

Eigen::ArrayXd lorentzian(const Eigen::ArrayXd& x, double center, double fwhm)
{
    const double h2 = 0.25 * fwhm * fwhm;
    return h2 / ((x - center).square() + h2);
}

Eigen::ArrayXd evaluate_model(LineModel m, const Eigen::VectorXd& p, const Eigen::ArrayXd& x)
{
    if (m == LineModel::lorentzian) return p[3] + p[2] * lorentzian(x, p[0], p[1]);
    return p[5] + p[2] * lorentzian(x, p[0], p[1]) + p[4] * lorentzian(x, p[0], p[3]);
}

namespace {

struct Scaling {
    double x0, xs, y0, ys;
};

Scaling scaling_of(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y)
{
    Scaling s;
    s.x0 = 0.5 * (x[0] + x[x.size() - 1]);
    s.xs = 0.5 * (x[x.size() - 1] - x[0]);
    s.y0 = y.mean();
    s.ys = std::sqrt((y - s.y0).square().mean());
    return s;
}

// Normalised <-> physical parameters. Widths and centers follow x; amplitudes
// and offset follow y.
Eigen::VectorXd to_physical(LineModel m, const Eigen::VectorXd& q, const Scaling& s)
{
    Eigen::VectorXd p = q;
    p[0] = s.x0 + s.xs * q[0];
    p[1] = s.xs * std::abs(q[1]);
    p[2] = s.ys * q[2];
    if (m == LineModel::lorentzian) {
        p[3] = s.y0 + s.ys * q[3];
    } else {
        p[3] = s.xs * std::abs(q[3]);
        p[4] = s.ys * q[4];
        p[5] = s.y0 + s.ys * q[5];
    }
    return p;
}

Eigen::VectorXd to_normalised(LineModel m, const Eigen::VectorXd& p, const Scaling& s)
{
    Eigen::VectorXd q = p;
    q[0] = (p[0] - s.x0) / s.xs;
    q[1] = p[1] / s.xs;
    q[2] = p[2] / s.ys;
    if (m == LineModel::lorentzian) {
        q[3] = (p[3] - s.y0) / s.ys;
    } else {
        q[3] = p[3] / s.xs;
        q[4] = p[4] / s.ys;
        q[5] = (p[5] - s.y0) / s.ys;
    }
    return q;
}

Eigen::VectorXd uncertainty_to_physical(LineModel m, const Eigen::VectorXd& e, const Scaling& s)
{
    Eigen::VectorXd u = e;
    u[0] = s.xs * e[0];
    u[1] = s.xs * e[1];
    u[2] = s.ys * e[2];
    if (m == LineModel::lorentzian) {
        u[3] = s.ys * e[3];
    } else {
        u[3] = s.xs * e[3];
        u[4] = s.ys * e[4];
        u[5] = s.ys * e[5];
    }
    return u;
}

// Adds one Lorentzian component's value and derivatives (center, fwhm, amplitude).
void add_component(const Eigen::ArrayXd& x, double c, double w, double a, Eigen::ArrayXd& f, Eigen::MatrixXd& J,
                   int col_c, int col_w, int col_a)
{
    const double h = 0.5 * w;
    const Eigen::ArrayXd u = x - c;
    const Eigen::ArrayXd D = u.square() + h * h;
    const Eigen::ArrayXd L = h * h / D;
    f += a * L;
    J.col(col_c).array() += a * 2.0 * u * h * h / D.square();
    J.col(col_w).array() = a * h * u.square() / D.square();
    J.col(col_a).array() = L;
}

void model_and_jacobian(LineModel m, const Eigen::VectorXd& q, const Eigen::ArrayXd& x, Eigen::ArrayXd& f,
                        Eigen::MatrixXd& J)
{
    const auto n = x.size();
    const int np = m == LineModel::lorentzian ? 4 : 6;
    J.setZero(n, np);
    const int off = np - 1;
    f = Eigen::ArrayXd::Constant(n, q[off]);
    J.col(off).setOnes();
    add_component(x, q[0], q[1], q[2], f, J, 0, 1, 2);
    if (m == LineModel::dual_lorentzian) add_component(x, q[0], q[3], q[4], f, J, 0, 3, 4);
}

void check_data(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, Eigen::Index min_points)
{
    if (x.size() != y.size()) throw DomainError("fit: x and y differ in length");
    if (x.size() < min_points)
        throw DomainError("fit: need at least " + std::to_string(min_points) + " points");
    for (Eigen::Index i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw DomainError("fit: x must be strictly increasing");
    if (!y.allFinite()) throw DomainError("fit: y contains non-finite values");
    const double spread = (y - y.mean()).abs().maxCoeff();
    if (!(spread > 1e-14 * (std::abs(y.mean()) + 1e-300)))
        throw FitError("fit: degenerate data (constant y, zero amplitude)");
}

double edge_offset(const Eigen::ArrayXd& y)
{
    const Eigen::Index k = std::max<Eigen::Index>(1, y.size() / 20);
    return 0.5 * (y.head(k).mean() + y.tail(k).mean());
}

// Half width of |y - offset| at level `level` around index i, searching
// outward within [lo, hi]; negative when not bracketed.
double half_width_at(const Eigen::ArrayXd& x, const Eigen::ArrayXd& dev, Eigen::Index i, double level,
                     Eigen::Index lo, Eigen::Index hi, int dir)
{
    Eigen::Index j = i;
    while (j + dir >= lo && j + dir <= hi) {
        const Eigen::Index k = j + dir;
        if (dev[k] < level) {
            const double t = (dev[j] - level) / (dev[j] - dev[k]);
            return std::abs(x[j] + t * (x[k] - x[j]) - x[i]);
        }
        j = k;
    }
    return -1.0;
}

double width_from_scan(const Eigen::ArrayXd& x, const Eigen::ArrayXd& dev, Eigen::Index i, double level,
                       Eigen::Index lo, Eigen::Index hi, double fallback)
{
    const double l = half_width_at(x, dev, i, level, lo, hi, -1);
    const double r = half_width_at(x, dev, i, level, lo, hi, +1);
    if (l > 0 && r > 0) return l + r;
    if (l > 0) return 2 * l;
    if (r > 0) return 2 * r;
    return fallback;
}

FitResult levenberg_marquardt(LineModel m, const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                              const Eigen::VectorXd& guess)
{
    const Scaling s = scaling_of(x, y);
    const Eigen::ArrayXd xn = (x - s.x0) / s.xs;
    const Eigen::ArrayXd yn = (y - s.y0) / s.ys;
    Eigen::VectorXd q = to_normalised(m, guess, s);
    if (!q.allFinite()) throw FitError("fit: non-finite initial guess");

    Eigen::ArrayXd f;
    Eigen::MatrixXd J;
    model_and_jacobian(m, q, xn, f, J);
    double cost = (yn - f).square().sum();
    const double n = static_cast<double>(x.size());

    FitResult r;
    r.model = m;
    r.names = parameter_names(m);
    r.rms_history.push_back(s.ys * std::sqrt(cost / n));

    double lambda = 1e-3;
    bool stalled = false;
    int it = 0;
    for (; it < fit_max_iterations; ++it) {
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * (yn - f).matrix();
        const double dfloor = 1e-12 * std::max(A.diagonal().maxCoeff(), 1e-300);
        bool accepted = false;
        Eigen::VectorXd step;
        while (lambda <= 1e16) {
            Eigen::MatrixXd M = A;
            for (Eigen::Index k = 0; k < M.rows(); ++k) M(k, k) += lambda * std::max(A(k, k), dfloor);
            step = M.ldlt().solve(g);
            const Eigen::VectorXd qn = q + step;
            Eigen::ArrayXd fn;
            Eigen::MatrixXd Jn;
            model_and_jacobian(m, qn, xn, fn, Jn);
            const double cn = (yn - fn).square().sum();
            if (std::isfinite(cn) && cn < cost) {
                q = qn;
                f = fn;
                J = Jn;
                cost = cn;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                r.rms_history.push_back(s.ys * std::sqrt(cost / n));
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            stalled = true;
            break;
        }
        double rel = 0.0;
        for (Eigen::Index k = 0; k < q.size(); ++k)
            rel = std::max(rel, std::abs(step[k]) / std::max(std::abs(q[k]), 1e-12));
        if (rel < fit_step_tolerance) {
            ++it;
            r.converged = true;
            break;
        }
    }
    if (stalled) r.converged = true;
    r.iterations = it;

    Eigen::VectorXd phys = to_physical(m, q, s);
    r.params = phys;
    const double dof = std::max(1.0, n - static_cast<double>(q.size()));
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::MatrixXd cov = A.completeOrthogonalDecomposition().pseudoInverse() * (cost / dof);
    Eigen::VectorXd e = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    r.uncertainties = uncertainty_to_physical(m, e, s);
    r.residual_rms = s.ys * std::sqrt(cost / n);
    return r;
}

}  // namespace

Eigen::VectorXd initial_guess_lorentzian(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y)
{
    const double off = edge_offset(y);
    const Eigen::ArrayXd dev = (y - off).abs();
    Eigen::Index i = 0;
    dev.maxCoeff(&i);
    const double amp = y[i] - off;
    const Eigen::Index last = x.size() - 1;
    const double w = width_from_scan(x, dev, i, 0.5 * std::abs(amp), 0, last, 0.25 * (x[last] - x[0]));
    Eigen::VectorXd g(4);
    g << x[i], w, amp, off;
    return g;
}

Eigen::VectorXd initial_guess_dual(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y)
{
    const Eigen::Index last = x.size() - 1;
    const double span = x[last] - x[0];
    const double off = edge_offset(y);
    const Eigen::ArrayXd dev = (y - off).abs();
    Eigen::Index ic = 0;
    dev.maxCoeff(&ic);
    const double sign = y[ic] >= off ? 1.0 : -1.0;
    const double c = x[ic];

    // central 5% window around the extremum
    const double half_window = 0.025 * span;
    Eigen::Index lo = ic, hi = ic;
    while (lo > 0 && x[lo - 1] >= c - half_window) --lo;
    while (hi < last && x[hi + 1] <= c + half_window) ++hi;

    double broad_peak = 0.0;
    for (Eigen::Index k = 0; k <= last; ++k)
        if (k < lo || k > hi) broad_peak = std::max(broad_peak, dev[k]);
    double w_broad = 0.0;
    {
        // scan outward from the window edges at half the broad amplitude
        const double level = 0.5 * broad_peak;
        const double l = half_width_at(x, dev, lo, level, 0, last, -1);
        const double r = half_width_at(x, dev, hi, level, 0, last, +1);
        const double lw = l > 0 ? c - (x[lo] - l) : -1.0;
        const double rw = r > 0 ? (x[hi] + r) - c : -1.0;
        if (lw > 0 && rw > 0)
            w_broad = lw + rw;
        else if (lw > 0 || rw > 0)
            w_broad = 2 * std::max(lw, rw);
        else
            w_broad = 0.25 * span;
    }
    const double a_broad = sign * broad_peak;
    const double a_narrow = (y[ic] - off) - a_broad;
    const Eigen::ArrayXd dev_n = ((y - off) - a_broad * lorentzian(x, c, w_broad)).abs();
    double w_narrow = width_from_scan(x, dev_n, ic, 0.5 * std::abs(a_narrow), lo, hi, 0.2 * (x[hi] - x[lo]));
    if (!(w_narrow > 0.0) || w_narrow * 3.0 > w_broad) w_narrow = w_broad / 10.0;

    Eigen::VectorXd g(6);
    g << c, w_narrow, a_narrow, w_broad, a_broad, off;
    return g;
}

FitResult fit_lorentzian(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, const std::optional<Eigen::VectorXd>& guess)
{
    check_data(x, y, 8);
    const Eigen::VectorXd g = guess ? *guess : initial_guess_lorentzian(x, y);
    if (g.size() != 4) throw DomainError("fit_lorentzian: guess needs 4 parameters");
    return levenberg_marquardt(LineModel::lorentzian, x, y, g);
}

FitResult fit_lorentzian(const Spectrum& s, const std::optional<Eigen::VectorXd>& guess)
{
    return fit_lorentzian(s.detuning_hz, s.real(), guess);
}

FitResult fit_dual_lorentzian(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                              const std::optional<Eigen::VectorXd>& guess)
{
    check_data(x, y, 24);
    const Eigen::VectorXd g = guess ? *guess : initial_guess_dual(x, y);
    if (g.size() != 6) throw DomainError("fit_dual_lorentzian: guess needs 6 parameters");
    FitResult r = levenberg_marquardt(LineModel::dual_lorentzian, x, y, g);
    if (r.params[1] > r.params[3]) {
        std::swap(r.params[1], r.params[3]);
        std::swap(r.params[2], r.params[4]);
        std::swap(r.uncertainties[1], r.uncertainties[3]);
        std::swap(r.uncertainties[2], r.uncertainties[4]);
    }
    const bool negligible = std::abs(r.params[2]) < 0.01 * std::abs(r.params[4]);
    if (!negligible && r.params[3] < 2.0 * r.params[1])
        throw FitError("fit_dual_lorentzian: component widths within 2x of each other, model not identifiable");
    return r;
}

FitResult fit_dual_lorentzian(const Spectrum& s, const std::optional<Eigen::VectorXd>& guess)
{
    return fit_dual_lorentzian(s.detuning_hz, s.real(), guess);
}

FitResult fit_model(LineModel m, const Eigen::ArrayXd& x, const Eigen::ArrayXd& y)
{
    return m == LineModel::lorentzian ? fit_lorentzian(x, y) : fit_dual_lorentzian(x, y);
}

double peak_time(const Pulse& p)
{
    p.validate();
    const Eigen::ArrayXd& y = p.samples;
    Eigen::Index i = 0;
    const double ymax = y.maxCoeff(&i);
    if (!(ymax - y.minCoeff() > 1e-12 * ymax)) throw MetricError("peak_time: flat pulse, no unique peak");
    if (i == 0 || i == y.size() - 1) return p.time(i);
    const double a = y[i - 1], b = y[i], c = y[i + 1];
    const double den = a - 2.0 * b + c;
    const double shift = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
    return p.time(i) + shift * p.dt;
}

double pulse_fwhm(const Pulse& p)
{
    p.validate();
    const Eigen::ArrayXd& y = p.samples;
    Eigen::Index i = 0;
    const double half = 0.5 * y.maxCoeff(&i);
    Eigen::Index l = i, r = i;
    while (l > 0 && y[l - 1] >= half) --l;
    while (r < y.size() - 1 && y[r + 1] >= half) ++r;
    if (l == 0 || r == y.size() - 1) throw MetricError("pulse_fwhm: half maximum not bracketed by the grid");
    const double tl = p.time(l - 1) + (half - y[l - 1]) / (y[l] - y[l - 1]) * p.dt;
    const double tr = p.time(r) + (y[r] - half) / (y[r] - y[r + 1]) * p.dt;
    return tr - tl;
}

double pulse_energy(const Pulse& p)
{
    p.validate();
    const Eigen::ArrayXd& y = p.samples;
    return p.dt * (y.sum() - 0.5 * (y[0] + y[y.size() - 1]));
}

PulseMetrics pulse_metrics(const Pulse& p)
{
    p.validate();
    const Eigen::ArrayXd& y = p.samples;
    const double level = 0.9 * y.maxCoeff();
    int runs = 0;
    bool inside = false;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const bool above = y[k] >= level;
        if (above && !inside) ++runs;
        inside = above;
    }
    if (runs > 1) throw MetricError("pulse_metrics: several peaks within 90% of the maximum, peak is ambiguous");
    return {peak_time(p), pulse_fwhm(p), pulse_energy(p)};
}

}  // namespace cellsim
