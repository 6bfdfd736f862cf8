// Test-only oracles, kept independent of the implementation paths they check:
// dense matrix exponentials, an RK4 integrator, the Gaussian covariance
// evolution of the quadratic spin-wave Hamiltonian, brute-force lattice sums,
// and a symmetric-logarithmic-derivative QFI solver.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ghzsim/common.hpp"
#include "ghzsim/lattice.hpp"

namespace oracle {

using ghzsim::cplx;

inline Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline double operator_norm(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

// Plain fixed-step RK4 for vector-valued ODEs.
template <typename State>
inline void rk4(const std::function<State(const State&)>& f, State& y, double t_end, int steps) {
    const double h = t_end / steps;
    for (int i = 0; i < steps; ++i) {
        State k1 = f(y);
        State k2 = f(y + 0.5 * h * k1);
        State k3 = f(y + 0.5 * h * k2);
        State k4 = f(y + h * k3);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

// Gaussian covariance evolution for one (q, -q) pair of the spin-wave
// Hamiltonian written directly in terms of the b bosons:
//   H_pair = A (b_q^dag b_q + b_-q^dag b_-q) - i tau B (b_q b_-q - b_q^dag b_-q^dag).
// Returns <b_q^dag b_q>(t) starting from the b vacuum. Works mechanically from
// the Heisenberg equations; no Bogoliubov algebra involved.
inline double covariance_excitation(double a, double b_coeff, double tau, double t, int steps) {
    // w = (b_q, b_q^dag, b_-q, b_-q^dag); dw/dt = M w from dw/dt = -i[w, H]:
    //   d b_q/dt      = -i A b_q    + tb b_-q^dag
    //   d b_q^dag/dt  = +i A b_q^dag + tb b_-q
    //   d b_-q/dt     = -i A b_-q   + tb b_q^dag
    //   d b_-q^dag/dt = +i A b_-q^dag + tb b_q
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    const cplx I(0, 1);
    const double tb = tau * b_coeff;
    m(0, 0) = -I * a;  m(0, 3) = tb;
    m(1, 1) = I * a;   m(1, 2) = tb;
    m(2, 2) = -I * a;  m(2, 1) = tb;
    m(3, 3) = I * a;   m(3, 0) = tb;

    // second moments S_{ij} = <w_i w_j> on the vacuum: <b b^dag> = 1
    Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
    s(0, 1) = 1.0;  // <b_q b_q^dag>
    s(2, 3) = 1.0;  // <b_-q b_-q^dag>
    auto f = [&](const Eigen::Matrix4cd& x) -> Eigen::Matrix4cd {
        return m * x + x * m.transpose();
    };
    const double h = t / steps;
    Eigen::Matrix4cd y = s;
    for (int i = 0; i < steps; ++i) {
        Eigen::Matrix4cd k1 = f(y);
        Eigen::Matrix4cd k2 = f(y + 0.5 * h * k1);
        Eigen::Matrix4cd k3 = f(y + 0.5 * h * k2);
        Eigen::Matrix4cd k4 = f(y + h * k3);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y(1, 0).real();  // <b_q^dag b_q>
}

// O(N^3) brute-force triple sum for lambda.
inline double lambda_brute_force(const ghzsim::CouplingMatrix& c) {
    const int n = c.sites();
    double tot = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                if (j == k || j == l || k == l) continue;
                tot += (c.k(j, l) / c.params.K) * (c.k(k, l) / c.params.K);
            }
    return tot / (static_cast<double>(n) * (n - 1) * (n - 2));
}

// Direct displacement-sum structure factor (independent of the library's).
inline cplx structure_factor_brute(const ghzsim::LatticeSpec& spec,
                                   const ghzsim::ModelParams& params,
                                   const std::array<double, 2>& q) {
    const int n = spec.sites();
    // average over reference sites of sum_k e^{-i q.(r_j - r_k)} K_jk / K --
    // translation invariance makes every row identical, which the test checks
    cplx acc(0, 0);
    for (int k = 0; k < n; ++k) {
        if (k == 0) continue;
        auto d = spec.displacement(0, k);
        const double r = std::sqrt(d[0] * d[0] + d[1] * d[1]);
        const double phase = q[0] * d[0] + q[1] * d[1];
        acc += params.K / std::pow(r, params.alpha) * std::exp(cplx(0, -phase));
    }
    return acc;
}

// Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

// QFI via the symmetric logarithmic derivative: solve {rho, L}/2 = d_rho with
// d_rho = -i [S_n, rho] as a dense linear system, then F = Tr[rho L^2].
inline double qfi_sld(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& s_n) {
    const Eigen::Index d = rho.rows();
    const cplx I(0, 1);
    Eigen::MatrixXcd drho = -I * (s_n * rho - rho * s_n);
    // vectorized: (rho^T kron Id + Id kron rho) vec(L) = 2 vec(drho)
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k) {
                // (rho L)_{ij} = sum_k rho_{ik} L_{kj}; vec index col-major: L_{kj} -> k + d j
                a(i + d * j, k + d * j) += rho(i, k);
                // (L rho)_{ij} = sum_k L_{ik} rho_{kj}
                a(i + d * j, i + d * k) += rho(k, j);
            }
    Eigen::VectorXcd rhs(d * d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) rhs(i + d * j) = 2.0 * drho(i, j);
    Eigen::VectorXcd lvec = a.completeOrthogonalDecomposition().solve(rhs);
    Eigen::MatrixXcd l(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) l(i, j) = lvec(i + d * j);
    l = 0.5 * (l + l.adjoint()).eval();
    return (rho * l * l).trace().real();
}

} // namespace oracle
