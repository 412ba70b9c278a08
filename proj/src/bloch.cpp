#include "cellsim/errors.hpp"
#include "cellsim/lambda_solver.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace cellsim {

namespace {

Eigen::Matrix3cd hamiltonian(const LambdaParams& p)
{
    Eigen::Matrix3cd H = Eigen::Matrix3cd::Zero();
    H(1, 1) = -p.two_photon_detuning;
    H(2, 2) = -p.one_photon_detuning;
    H(2, 0) = H(0, 2) = -0.5 * p.omega_p;
    H(2, 1) = H(1, 2) = -0.5 * p.omega_c;
    return H;
}

void check_state(const Eigen::Matrix3cd& rho)
{
    if (std::abs(rho.trace() - 1.0) > 1e-9) throw DomainError("initial state must have unit trace");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("initial state must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) throw DomainError("initial state must be positive semidefinite");
}

}  // namespace

Eigen::Matrix3cd bloch_derivative(const LambdaParams& p, const Eigen::Matrix3cd& rho)
{
    const std::complex<double> i(0.0, 1.0);
    const Eigen::Matrix3cd H = hamiltonian(p);
    Eigen::Matrix3cd d = -i * (H * rho - rho * H);

    const double G = p.gamma_excited;
    const std::complex<double> ree = rho(2, 2);
    d(0, 0) += 0.5 * G * ree;
    d(1, 1) += 0.5 * G * ree;
    d(2, 2) -= G * ree;
    for (int g = 0; g < 2; ++g) {
        d(2, g) -= 0.5 * G * rho(2, g);
        d(g, 2) -= 0.5 * G * rho(g, 2);
    }

    // sqrt(2 gamma)|2><2| dephasing: the |1>-|2> and |2>-|3> coherences decay at gamma
    const double g12 = p.gamma_ground;
    d(0, 1) -= g12 * rho(0, 1);
    d(1, 0) -= g12 * rho(1, 0);
    d(1, 2) -= g12 * rho(1, 2);
    d(2, 1) -= g12 * rho(2, 1);
    return d;
}

BlochTrajectory integrate_bloch(const LambdaParams& p, double duration, const Eigen::Matrix3cd& initial,
                                double step, int samples)
{
    if (!(duration > 0.0)) throw DomainError("integrate_bloch: duration must be > 0");
    if (samples < 1) throw DomainError("integrate_bloch: need at least one sample");
    check_state(initial);

    if (step <= 0.0) {
        const double fastest = std::max({p.gamma_excited, p.gamma_ground, p.omega_c, p.omega_p,
                                         std::abs(p.one_photon_detuning), std::abs(p.two_photon_detuning)});
        step = fastest > 0.0 ? 0.02 / fastest : duration / samples;
    }
    const auto n_steps = static_cast<long long>(std::ceil(duration / step));
    const double h = duration / static_cast<double>(n_steps);
    const long long stride = std::max<long long>(1, n_steps / samples);

    BlochTrajectory tr;
    tr.times.push_back(0.0);
    tr.states.push_back(initial);
    Eigen::Matrix3cd rho = initial;
    for (long long s = 1; s <= n_steps; ++s) {
        const Eigen::Matrix3cd k1 = bloch_derivative(p, rho);
        const Eigen::Matrix3cd k2 = bloch_derivative(p, rho + 0.5 * h * k1);
        const Eigen::Matrix3cd k3 = bloch_derivative(p, rho + 0.5 * h * k2);
        const Eigen::Matrix3cd k4 = bloch_derivative(p, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (s % stride == 0 || s == n_steps) {
            tr.times.push_back(static_cast<double>(s) * h);
            tr.states.push_back(rho);
        }
    }
    return tr;
}

std::complex<double> susceptibility_from_state(const LambdaParams& p, const Eigen::Matrix3cd& rho)
{
    if (!(p.omega_p > 0.0)) throw DomainError("susceptibility_from_state needs omega_p > 0");
    return 2.0 * p.coupling() * p.density * 1e6 * rho(2, 0) / p.omega_p;
}

}  // namespace cellsim
