// Collective-spin dynamics restricted to the Dicke manifold: the (N+1)-dim
// cubic XYZ Hamiltonian H_ZM = (lambda K^2 tau / 3)(Jx Jy Jz + Jz Jy Jx) and
// its exact spectral-decomposition propagator. Basis |M>, M = -N/2 ... +N/2
// in ascending order.
#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ghzsim/common.hpp"
#include "ghzsim/exact.hpp"

namespace ghzsim {

struct DickeState {
    Eigen::VectorXcd amp;  // N+1 components over |M>, ascending M
    int n_spins = 0;
};

// CSS polarized along +z is the top Dicke state |M = +N/2>.
inline DickeState dicke_css(int n) {
    if (n < 1) throw ConfigError("need at least one spin");
    DickeState s;
    s.n_spins = n;
    s.amp = Eigen::VectorXcd::Zero(n + 1);
    s.amp(n) = 1.0;
    return s;
}

struct CollectiveOps {
    Eigen::MatrixXcd jx, jy, jz;
};

inline CollectiveOps collective_ops(int n) {
    const int dim = n + 1;
    const double j = 0.5 * n;
    Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd jz = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double m = -j + i;
        jz(i, i) = m;
        if (i + 1 < dim) jp(i + 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    Eigen::MatrixXcd jm = jp.adjoint();
    CollectiveOps ops;
    ops.jx = 0.5 * (jp + jm);
    ops.jy = cplx(0, -0.5) * (jp - jm);
    ops.jz = jz;
    return ops;
}

// H_ZM = (lambda K^2 tau / 3)(Jx Jy Jz + Jz Jy Jx).
inline Eigen::MatrixXcd zm_hamiltonian(int n, double lambda, double k, double tau) {
    if (n < 2) throw ConfigError("zm_hamiltonian needs N >= 2");
    auto ops = collective_ops(n);
    const double pref = lambda * k * k * tau / 3.0;
    Eigen::MatrixXcd h = pref * (ops.jx * ops.jy * ops.jz + ops.jz * ops.jy * ops.jx);
    return 0.5 * (h + h.adjoint()).eval();  // scrub rounding asymmetry
}

// Cached spectral decomposition; supports long time series and N >= 1000.
class ZmPropagator {
  public:
    explicit ZmPropagator(const Eigen::MatrixXcd& h) : es_(h) {
        if (es_.info() != Eigen::Success) throw ConfigError("zm eigendecomposition failed");
    }

    DickeState evolve(const DickeState& s, double t) const {
        DickeState out = s;
        Eigen::VectorXcd c = es_.eigenvectors().adjoint() * s.amp;
        for (Eigen::Index i = 0; i < c.size(); ++i)
            c(i) *= std::polar(1.0, -es_.eigenvalues()(i) * t);
        out.amp = es_.eigenvectors() * c;
        return out;
    }

  private:
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_;
};

inline DickeState zm_evolve(const DickeState& s, const Eigen::MatrixXcd& h_zm, double t) {
    if (h_zm.rows() != s.amp.size()) throw ConfigError("zm_evolve: dimension mismatch");
    return ZmPropagator(h_zm).evolve(s, t);
}

inline double dicke_qfi_jx(const DickeState& s, const CollectiveOps& ops) {
    Eigen::VectorXcd phi = ops.jx * s.amp;
    const double e1 = std::real(s.amp.dot(phi));
    return 4.0 * (phi.squaredNorm() - e1 * e1);
}

struct ZmSeries {
    std::vector<double> t;
    std::vector<double> fq_jx;

    std::pair<double, double> refined_peak_fq() const { return refined_peak(t, fq_jx); }
};

// F_Q^{Jx}(t) from the z-polarized CSS on the stroboscopic grid t_n = 3 tau n.
inline ZmSeries zm_series(int n, double lambda, double k, double tau, int n_periods) {
    auto h = zm_hamiltonian(n, lambda, k, tau);
    ZmPropagator prop(h);
    auto ops = collective_ops(n);
    DickeState s0 = dicke_css(n);
    ZmSeries out;
    out.t.reserve(n_periods + 1);
    out.fq_jx.reserve(n_periods + 1);
    for (int i = 0; i <= n_periods; ++i) {
        const double t = 3.0 * tau * i;
        DickeState s = prop.evolve(s0, t);
        out.t.push_back(t);
        out.fq_jx.push_back(dicke_qfi_jx(s, ops));
    }
    return out;
}

// Reference peak of the collective model, located on a fine time grid past
// the analytic estimate t_c = 6 ln N / (lambda K^2 tau N^2). A fine grid (not
// the stroboscopic one) is needed because at alpha ~ 0 and large N the peak
// can sit inside a single Floquet period.
struct ZmReference {
    double fq_max = 0.0;
    double t_at_max = 0.0;
};

inline ZmReference zm_reference_peak(int n, double lambda, double k, double tau,
                                     double scan_factor = 2.5, int points = 600) {
    const double tc = 6.0 * std::log(static_cast<double>(n)) / (lambda * k * k * tau * n * n);
    auto h = zm_hamiltonian(n, lambda, k, tau);
    ZmPropagator prop(h);
    auto ops = collective_ops(n);
    DickeState s0 = dicke_css(n);
    std::vector<double> t, v;
    t.reserve(points + 1);
    v.reserve(points + 1);
    for (int i = 0; i <= points; ++i) {
        const double ti = scan_factor * tc * i / points;
        DickeState s = prop.evolve(s0, ti);
        t.push_back(ti);
        v.push_back(dicke_qfi_jx(s, ops));
    }
    auto [tp, vp] = refined_peak(t, v);
    return {vp, tp};
}

} // namespace ghzsim
