// Lattice geometry, power-law couplings and the static model-derived scalars
// (K_q, T_0^2, lambda, chi_coll, tau_crit).
//
// Conventions used throughout:
//   * sites are enumerated row-major and the lattice constant is 1;
//   * all pair sums run over ordered pairs j != k, so the Ising Hamiltonian is
//     H = sum_{j!=k} K_jk s_j^z s_k^z with K_jk = K / r_jk^alpha;
//   * periodic distances are minimum-image, each ordered displacement counted
//     once (even-L ties resolved by the unique distance value).
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghzsim/common.hpp"
#include "ghzsim/csv.hpp"

namespace ghzsim {

enum class Boundary { Periodic, Open };

inline const char* boundary_name(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "open";
}

struct LatticeSpec {
    int dimension = 1;                 // 1 or 2
    std::array<int, 2> extents{2, 1};  // (L1) or (L1, L2)
    Boundary boundary = Boundary::Periodic;

    static LatticeSpec chain(int length, Boundary b = Boundary::Periodic) {
        LatticeSpec s;
        s.dimension = 1;
        s.extents = {length, 1};
        s.boundary = b;
        s.validate();
        return s;
    }

    static LatticeSpec square(int l1, int l2, Boundary b = Boundary::Periodic) {
        LatticeSpec s;
        s.dimension = 2;
        s.extents = {l1, l2};
        s.boundary = b;
        s.validate();
        return s;
    }

    int sites() const {
        return dimension == 1 ? extents[0] : extents[0] * extents[1];
    }

    void validate() const {
        if (dimension != 1 && dimension != 2)
            throw ConfigError("lattice dimension must be 1 or 2");
        if (dimension == 1 && extents[0] < 2)
            throw ConfigError("chain needs at least 2 sites");
        if (dimension == 2 && (extents[0] < 2 || extents[1] < 2))
            throw ConfigError("2d lattice needs both extents >= 2");
    }

    // Row-major site coordinates: index = x1 * L2 + x2.
    std::array<int, 2> coords(int site) const {
        if (dimension == 1) return {site, 0};
        return {site / extents[1], site % extents[1]};
    }

    // Minimum-image (periodic) or plain (open) displacement components.
    std::array<double, 2> displacement(int site_j, int site_k) const {
        auto a = coords(site_j);
        auto b = coords(site_k);
        std::array<double, 2> d{0.0, 0.0};
        for (int m = 0; m < dimension; ++m) {
            int delta = a[m] - b[m];
            if (boundary == Boundary::Periodic) {
                const int L = extents[m];
                delta %= L;
                if (delta < 0) delta += L;
                if (delta > L / 2) delta -= L;
            }
            d[m] = delta;
        }
        return d;
    }

    double distance(int site_j, int site_k) const {
        auto d = displacement(site_j, site_k);
        return std::sqrt(d[0] * d[0] + d[1] * d[1]);
    }
};

struct ModelParams {
    double K = 1.0;     // nearest-neighbour coupling (energy scale)
    double alpha = 0.0; // power-law decay exponent

    void validate() const {
        if (!(K > 0.0)) throw ConfigError("K must be positive");
        if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    }
};

struct CouplingMatrix {
    LatticeSpec spec;
    ModelParams params;
    Eigen::MatrixXd k;  // N x N, symmetric, zero diagonal

    int sites() const { return static_cast<int>(k.rows()); }
};

inline CouplingMatrix build_coupling_matrix(const LatticeSpec& spec, const ModelParams& params) {
    spec.validate();
    params.validate();
    const int n = spec.sites();
    CouplingMatrix c{spec, params, Eigen::MatrixXd::Zero(n, n)};
    for (int j = 0; j < n; ++j) {
        for (int kk = j + 1; kk < n; ++kk) {
            const double r = spec.distance(j, kk);
            const double v = params.K / std::pow(r, params.alpha);
            c.k(j, kk) = v;
            c.k(kk, j) = v;
        }
    }
    return c;
}

inline void export_coupling_csv(const CouplingMatrix& c, const std::string& path) {
    CsvWriter w(path);
    std::ostringstream hdr;
    hdr << "N=" << c.sites() << " alpha=" << c.params.alpha << " K=" << c.params.K
        << " boundary=" << boundary_name(c.spec.boundary);
    w.comment(hdr.str());
    std::ostringstream line;
    line.precision(17);
    for (int j = 0; j < c.sites(); ++j) {
        line.str("");
        for (int kk = 0; kk < c.sites(); ++kk)
            line << (kk ? "," : "") << c.k(j, kk);
        line << "\n";
        w.raw(line.str());
    }
}

// Momentum grid q = 2 pi (q1, ..., qd) / L_m, q_m in {0, ..., L_m - 1}.
struct MomentumGrid {
    struct Point {
        std::array<int, 2> index{0, 0};
        std::array<double, 2> q{0.0, 0.0};
        bool is_zero = false;
    };
    std::vector<Point> points;
};

inline MomentumGrid momentum_grid(const LatticeSpec& spec) {
    if (spec.boundary != Boundary::Periodic)
        throw GeometryError("momentum grid requires periodic boundary");
    MomentumGrid g;
    const int l1 = spec.extents[0];
    const int l2 = spec.dimension == 2 ? spec.extents[1] : 1;
    g.points.reserve(static_cast<std::size_t>(l1) * l2);
    for (int a = 0; a < l1; ++a) {
        for (int b = 0; b < l2; ++b) {
            MomentumGrid::Point p;
            p.index = {a, b};
            p.q[0] = 2.0 * M_PI * a / l1;
            p.q[1] = spec.dimension == 2 ? 2.0 * M_PI * b / l2 : 0.0;
            p.is_zero = (a == 0 && b == 0);
            g.points.push_back(p);
        }
    }
    return g;
}

namespace detail {

// Nonzero minimum-image displacements seen from any one site of a periodic
// lattice (translation invariance makes the reference site irrelevant).
struct Displacement {
    std::array<double, 2> r;
    double norm;
};

inline std::vector<Displacement> periodic_displacements(const LatticeSpec& spec) {
    if (spec.boundary != Boundary::Periodic)
        throw GeometryError("requires periodic boundary");
    std::vector<Displacement> out;
    const int l1 = spec.extents[0];
    const int l2 = spec.dimension == 2 ? spec.extents[1] : 1;
    out.reserve(static_cast<std::size_t>(l1) * l2 - 1);
    for (int a = 0; a < l1; ++a) {
        for (int b = 0; b < l2; ++b) {
            if (a == 0 && b == 0) continue;
            double da = a > l1 / 2 ? a - l1 : a;
            double db = b > l2 / 2 ? b - l2 : b;
            if (spec.dimension == 1) db = 0.0;
            out.push_back({{da, db}, std::sqrt(da * da + db * db)});
        }
    }
    return out;
}

} // namespace detail

// K_q = K sum_{r != 0} e^{-i q.r} / r^alpha over minimum-image displacements.
// The imaginary part vanishes by inversion symmetry; it is returned raw so
// callers can log it as a diagnostic.
inline std::complex<double> structure_factor(const LatticeSpec& spec, const ModelParams& params,
                                             const std::array<double, 2>& q) {
    if (spec.boundary != Boundary::Periodic)
        throw GeometryError("structure_factor requires periodic boundary");
    params.validate();
    double re = 0.0, im = 0.0;
    for (const auto& d : detail::periodic_displacements(spec)) {
        const double phase = q[0] * d.r[0] + q[1] * d.r[1];
        const double w = params.K / std::pow(d.norm, params.alpha);
        re += w * std::cos(phase);
        im -= w * std::sin(phase);
    }
    return {re, im};
}

// T_0^2 = K^2 sum_{r != 0} r^{-2 alpha}.
inline double t0_squared(const LatticeSpec& spec, const ModelParams& params) {
    if (spec.boundary != Boundary::Periodic)
        throw GeometryError("t0_squared requires periodic boundary");
    params.validate();
    double s = 0.0;
    for (const auto& d : detail::periodic_displacements(spec))
        s += std::pow(d.norm, -2.0 * params.alpha);
    return params.K * params.K * s;
}

// lambda = sum_{[j,k,l]} r_jl^-a r_kl^-a / (N (N-1) (N-2)), evaluated through
// the O(N^2) per-site rearrangement sum_l [ (sum_{j!=l} w_jl)^2 - sum_{j!=l} w_jl^2 ].
// Dimensionless: computed from K_jk / K.
inline double lambda_coefficient(const CouplingMatrix& c) {
    const int n = c.sites();
    if (n < 3) throw ConfigError("lambda_coefficient needs N >= 3");
    double total = 0.0;
    for (int l = 0; l < n; ++l) {
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = c.k(j, l) / c.params.K;
            s1 += w;
            s2 += w * w;
        }
        total += s1 * s1 - s2;
    }
    return total / (static_cast<double>(n) * (n - 1) * (n - 2));
}

inline double lambda_coefficient(const LatticeSpec& spec, const ModelParams& params) {
    return lambda_coefficient(build_coupling_matrix(spec, params));
}

// chi_coll = sum_{j != k} K_jk / (N (N-1)): mean off-diagonal coupling.
inline double chi_collective(const CouplingMatrix& c) {
    const int n = c.sites();
    if (n < 2) throw ConfigError("chi_collective needs N >= 2");
    return c.k.sum() / (static_cast<double>(n) * (n - 1));
}

inline double chi_collective(const LatticeSpec& spec, const ModelParams& params) {
    return chi_collective(build_coupling_matrix(spec, params));
}

// Pulse-separation ceiling saturating chi_coll * tau * N / 2 = 1 (units 1/K).
// Callers treat it as an order-of-magnitude bound, not a sharp threshold.
inline double tau_crit_estimate(const LatticeSpec& spec, const ModelParams& params) {
    const double chi = chi_collective(spec, params);
    return 2.0 / (chi * spec.sites());
}

inline double tau_crit_estimate(const CouplingMatrix& c) {
    return 2.0 / (chi_collective(c) * c.sites());
}

} // namespace ghzsim
