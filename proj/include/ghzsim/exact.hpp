// Exact state-vector engine: Floquet evolution U(3 tau) of up to ~20 spins,
// dense effective Hamiltonian for verification, and pure-state observables.
//
// Basis convention: qubit j is bit j of the amplitude index, bit value 0 is
// |up> (s^z = +1/2). The z-segment is a diagonal phase with energies
// E(b) = (1/4) sigma^T K sigma (ordered-pair Ising sum); x/y segments are the
// same phases conjugated by exact global single-qubit rotations.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ghzsim/common.hpp"
#include "ghzsim/csv.hpp"
#include "ghzsim/lattice.hpp"

namespace ghzsim {

inline constexpr int kEdDefaultCap = 20;        // state-vector size cap (2^N amplitudes)
inline constexpr int kPhaseTableDefaultCap = 16; // above this, z-phases are streamed

struct PureState {
    Eigen::VectorXcd amp;
    int n_qubits = 0;

    double norm() const { return amp.norm(); }

    std::size_t dim() const { return static_cast<std::size_t>(amp.size()); }
};

inline PureState initial_css(int n, int cap = kEdDefaultCap) {
    if (n < 1) throw ConfigError("need at least one spin");
    if (n > cap) throw CapacityError("state-vector engine capped at N=" + std::to_string(cap));
    PureState s;
    s.n_qubits = n;
    s.amp = Eigen::VectorXcd::Zero(std::int64_t(1) << n);
    s.amp(0) = 1.0;
    return s;
}

// (|->...->> + |<-...<-->)/sqrt(2): the x-basis GHZ reference state. Amplitudes
// are 2^{(1-N)/2} on even-parity basis states, zero on odd ones.
inline PureState ghz_x(int n, int cap = kEdDefaultCap) {
    if (n > cap) throw CapacityError("state-vector engine capped at N=" + std::to_string(cap));
    PureState s;
    s.n_qubits = n;
    const std::int64_t dim = std::int64_t(1) << n;
    s.amp = Eigen::VectorXcd::Zero(dim);
    const double a = std::pow(2.0, 0.5 * (1 - n));
    for (std::int64_t b = 0; b < dim; ++b)
        if ((popcount64(b) & 1) == 0) s.amp(b) = a;
    return s;
}

// Global rotation exp(-i theta S_mu) applied as N single-qubit gates.
inline void apply_global_rotation(PureState& s, Axis mu, double theta) {
    const double c = std::cos(theta / 2), sn = std::sin(theta / 2);
    cplx u00, u01, u10, u11;
    switch (mu) {
        case Axis::X: u00 = c; u01 = cplx(0, -sn); u10 = cplx(0, -sn); u11 = c; break;
        case Axis::Y: u00 = c; u01 = -sn; u10 = sn; u11 = c; break;
        case Axis::Z: u00 = cplx(c, -sn); u01 = 0; u10 = 0; u11 = cplx(c, sn); break;
    }
    auto* a = s.amp.data();
    const std::int64_t dim = s.amp.size();
    for (int j = 0; j < s.n_qubits; ++j) {
        const std::int64_t bit = std::int64_t(1) << j;
        for (std::int64_t base = 0; base < dim; base += 2 * bit) {
            for (std::int64_t off = 0; off < bit; ++off) {
                const std::int64_t i0 = base + off;
                const std::int64_t i1 = i0 + bit;
                const cplx a0 = a[i0], a1 = a[i1];
                a[i0] = u00 * a0 + u01 * a1;
                a[i1] = u10 * a0 + u11 * a1;
            }
        }
    }
}

namespace detail {

// Ising diagonal energies E(b) = (1/4) sigma^T K sigma visited in binary
// reflected Gray order, so successive states differ by one flipped bit and the
// update is O(N). f(b, E) is called exactly once for every basis state.
template <typename F>
inline void foreach_z_energy(const Eigen::MatrixXd& k, int n, F&& f) {
    const std::int64_t dim = std::int64_t(1) << n;
    std::vector<double> sigma(n, 1.0);          // all-up start (bits zero)
    std::vector<double> field(n);               // field_j = sum_k K_jk sigma_k
    for (int j = 0; j < n; ++j) field[j] = k.row(j).sum();
    double e = 0.25 * k.sum();
    std::int64_t gray = 0;
    f(0, e);
    for (std::int64_t i = 1; i < dim; ++i) {
        const int j = std::countr_zero(static_cast<std::uint64_t>(i)); // flipped bit
        const std::int64_t next = gray ^ (std::int64_t(1) << j);
        e -= sigma[j] * field[j];
        const double delta = -2.0 * sigma[j];
        sigma[j] = -sigma[j];
        for (int m = 0; m < n; ++m) field[m] += delta * k(m, j);
        gray = next;
        f(gray, e);
    }
}

} // namespace detail

// Precomputed z-segment energies (one 2^N real vector per coupling matrix)
// when N is small enough; streamed Gray-code evaluation otherwise.
class EdEngine {
  public:
    EdEngine(const CouplingMatrix& c, int phase_table_cap = kPhaseTableDefaultCap,
             int cap = kEdDefaultCap)
        : coupling_(c), n_(c.sites()) {
        if (n_ > cap) throw CapacityError("state-vector engine capped at N=" + std::to_string(cap));
        if (n_ <= phase_table_cap) {
            energies_.resize(std::size_t(1) << n_);
            detail::foreach_z_energy(coupling_.k, n_,
                                     [&](std::int64_t b, double e) { energies_[b] = e; });
        }
    }

    int sites() const { return n_; }
    const CouplingMatrix& coupling() const { return coupling_; }

    // exp(-i H_zz tau) as diagonal phases.
    void z_segment(PureState& s, double tau) const {
        auto* a = s.amp.data();
        if (!energies_.empty()) {
            const std::int64_t dim = s.amp.size();
            for (std::int64_t b = 0; b < dim; ++b)
                a[b] *= std::polar(1.0, -tau * energies_[b]);
        } else {
            detail::foreach_z_energy(coupling_.k, n_, [&](std::int64_t b, double e) {
                a[b] *= std::polar(1.0, -tau * e);
            });
        }
    }

    // exp(-i H_mumu tau): x/y segments conjugate the z-diagonal by the exact
    // global pi/2 rotation that exchanges the segment axis with z. Either
    // rotation sense works since H is quadratic in the site spins.
    void segment(PureState& s, Axis mu, double tau) const {
        if (s.n_qubits != n_) throw ConfigError("state size does not match coupling matrix");
        switch (mu) {
            case Axis::Z:
                z_segment(s, tau);
                break;
            case Axis::X:
                apply_global_rotation(s, Axis::Y, +M_PI / 2);
                z_segment(s, tau);
                apply_global_rotation(s, Axis::Y, -M_PI / 2);
                break;
            case Axis::Y:
                apply_global_rotation(s, Axis::X, -M_PI / 2);
                z_segment(s, tau);
                apply_global_rotation(s, Axis::X, +M_PI / 2);
                break;
        }
    }

    // One Floquet period U(3 tau) = e^{-iHzz tau} e^{-iHxx tau} e^{-iHyy tau}.
    void period_segment_form(PureState& s, double tau) const {
        segment(s, Axis::Y, tau);
        segment(s, Axis::X, tau);
        segment(s, Axis::Z, tau);
    }

    // Same period written as the lab-frame pulse train,
    //   U = e^{-iHt} e^{-i(pi/2)Sy} e^{-iHt} e^{+i(pi/2)Sy} e^{-i(pi/2)Sx} e^{-iHt} e^{+i(pi/2)Sx},
    // applied right to left with instantaneous pulses.
    void period_pulsed_form(PureState& s, double tau) const {
        apply_global_rotation(s, Axis::X, -M_PI / 2);  // e^{+i(pi/2)Sx}
        z_segment(s, tau);
        apply_global_rotation(s, Axis::X, +M_PI / 2);  // e^{-i(pi/2)Sx}
        apply_global_rotation(s, Axis::Y, -M_PI / 2);  // e^{+i(pi/2)Sy}
        z_segment(s, tau);
        apply_global_rotation(s, Axis::Y, +M_PI / 2);  // e^{-i(pi/2)Sy}
        z_segment(s, tau);
    }

  private:
    CouplingMatrix coupling_;
    int n_;
    std::vector<double> energies_;
};

enum class FloquetForm { Segment, Pulsed };

struct FloquetSchedule {
    double tau = 0.1;       // segment duration, units 1/K
    int n_periods = 1;
    FloquetForm form = FloquetForm::Segment;

    void validate() const {
        if (!(tau > 0.0)) throw ConfigError("tau must be positive");
        if (n_periods < 0) throw ConfigError("n_periods must be >= 0");
    }
};

inline void floquet_period(const EdEngine& eng, PureState& s, const FloquetSchedule& sched) {
    if (sched.form == FloquetForm::Segment)
        eng.period_segment_form(s, sched.tau);
    else
        eng.period_pulsed_form(s, sched.tau);
}

// ---------------------------------------------------------------------------
// Collective-spin applications and observables
// ---------------------------------------------------------------------------

// phi = S_mu psi (S_mu = sum_j s_j^mu).
inline Eigen::VectorXcd apply_collective(const PureState& s, Axis mu) {
    const std::int64_t dim = s.amp.size();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    const auto* a = s.amp.data();
    auto* o = out.data();
    for (int j = 0; j < s.n_qubits; ++j) {
        const std::int64_t bit = std::int64_t(1) << j;
        for (std::int64_t base = 0; base < dim; base += 2 * bit) {
            for (std::int64_t off = 0; off < bit; ++off) {
                const std::int64_t i0 = base + off;   // bit j = 0 (up)
                const std::int64_t i1 = i0 + bit;     // bit j = 1 (down)
                switch (mu) {
                    case Axis::X:
                        o[i0] += 0.5 * a[i1];
                        o[i1] += 0.5 * a[i0];
                        break;
                    case Axis::Y:
                        o[i0] += cplx(0, -0.5) * a[i1];
                        o[i1] += cplx(0, +0.5) * a[i0];
                        break;
                    case Axis::Z:
                        o[i0] += 0.5 * a[i0];
                        o[i1] -= 0.5 * a[i1];
                        break;
                }
            }
        }
    }
    return out;
}

inline double collective_expectation(const PureState& s, Axis mu) {
    return std::real(s.amp.dot(apply_collective(s, mu)));
}

// <S^2> = sum_mu |S_mu psi|^2.
inline double s2_expectation(const PureState& s) {
    double tot = 0.0;
    for (Axis mu : {Axis::X, Axis::Y, Axis::Z})
        tot += apply_collective(s, mu).squaredNorm();
    return tot;
}

// F_Q = 4 Var(S_n) for a unit direction n.
inline double qfi_pure(const PureState& s, const std::array<double, 3>& n_dir) {
    const double nn = std::sqrt(n_dir[0] * n_dir[0] + n_dir[1] * n_dir[1] + n_dir[2] * n_dir[2]);
    if (!(nn > 0.0)) throw ConfigError("qfi_pure: zero-length direction");
    Eigen::VectorXcd phi = (n_dir[0] / nn) * apply_collective(s, Axis::X) +
                           (n_dir[1] / nn) * apply_collective(s, Axis::Y) +
                           (n_dir[2] / nn) * apply_collective(s, Axis::Z);
    const double e1 = std::real(s.amp.dot(phi));
    const double e2 = phi.squaredNorm();
    return 4.0 * (e2 - e1 * e1);
}

struct OptimalQfi {
    double value = 0.0;
    std::array<double, 3> direction{1.0, 0.0, 0.0};
};

// QFI matrix F_ij = 2 <{S_i, S_j}> - 4 <S_i><S_j>; the optimum over generator
// directions is its largest eigenpair. Degenerate top eigenvalues are resolved
// toward x (largest |n_x|, sign fixed to n_x >= 0).
inline OptimalQfi qfi_matrix_optimal(const PureState& s) {
    std::array<Eigen::VectorXcd, 3> phi{apply_collective(s, Axis::X),
                                        apply_collective(s, Axis::Y),
                                        apply_collective(s, Axis::Z)};
    std::array<double, 3> e1{};
    for (int i = 0; i < 3; ++i) e1[i] = std::real(s.amp.dot(phi[i]));
    Eigen::Matrix3d f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            f(i, j) = 4.0 * std::real(phi[i].dot(phi[j])) - 4.0 * e1[i] * e1[j];
    f = 0.5 * (f + f.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(f);
    const double top = es.eigenvalues()(2);
    // collect near-degenerate top eigenvectors, pick the x-dominant combination
    int first = 2;
    while (first > 0 && es.eigenvalues()(first - 1) > top - 1e-9 * std::max(1.0, std::abs(top)))
        --first;
    Eigen::Vector3d best = es.eigenvectors().col(2);
    double best_x = std::abs(best(0));
    for (int i = first; i < 3; ++i) {
        Eigen::Vector3d v = es.eigenvectors().col(i);
        if (std::abs(v(0)) > best_x + 1e-12) {
            best = v;
            best_x = std::abs(v(0));
        }
    }
    if (best(0) < 0) best = -best;
    OptimalQfi out;
    out.value = top;
    out.direction = {best(0), best(1), best(2)};
    return out;
}

// <e^{-i S_x theta} (prod_j sigma_j^z) e^{+i S_x theta}>.
inline double parity_expectation(const PureState& s, double theta) {
    PureState rot = s;
    apply_global_rotation(rot, Axis::X, -theta);  // e^{+i theta S_x} psi
    double val = 0.0;
    const std::int64_t dim = rot.amp.size();
    for (std::int64_t b = 0; b < dim; ++b) {
        const double sign = (popcount64(b) & 1) ? -1.0 : 1.0;
        val += sign * std::norm(rot.amp(b));
    }
    return val;
}

// P(S_x = m), m = +N/2 ... -N/2 mapped to index k = N/2 - m (popcount after
// rotating the x basis onto the z basis with V^dag = e^{+i (pi/2) S_y}).
inline std::vector<double> sx_distribution(const PureState& s) {
    PureState rot = s;
    apply_global_rotation(rot, Axis::Y, -M_PI / 2);
    std::vector<double> p(s.n_qubits + 1, 0.0);
    const std::int64_t dim = rot.amp.size();
    for (std::int64_t b = 0; b < dim; ++b)
        p[static_cast<std::size_t>(popcount64(b))] += std::norm(rot.amp(b));
    return p;
}

// Total-spin deficit mapped to finite-momentum excitation number:
// [(N/2)(N/2+1) - <S^2>] / (N + 1).
inline double nfm_estimate(const PureState& s) {
    const double j = 0.5 * s.n_qubits;
    return (j * (j + 1.0) - s2_expectation(s)) / (s.n_qubits + 1.0);
}

// Population outside the maximal-spin (Dicke) manifold: 1 - sum_M |<M|psi>|^2.
inline double dicke_projection_deficit(const PureState& s) {
    const int n = s.n_qubits;
    std::vector<cplx> acc(n + 1, cplx(0, 0));
    const std::int64_t dim = s.amp.size();
    for (std::int64_t b = 0; b < dim; ++b)
        acc[static_cast<std::size_t>(popcount64(b))] += s.amp(b);
    double inside = 0.0;
    double binom = 1.0;  // C(n, k), updated iteratively
    for (int k = 0; k <= n; ++k) {
        inside += std::norm(acc[k]) / binom;
        binom = binom * (n - k) / (k + 1.0);
    }
    return 1.0 - inside;
}

// ---------------------------------------------------------------------------
// Dense small-N operators (verification path)
// ---------------------------------------------------------------------------

inline constexpr int kDenseCap = 10;

// Dense H_mumu = sum_{j != k} K_jk s_j^mu s_k^mu.
inline Eigen::MatrixXcd dense_hmumu(const CouplingMatrix& c, Axis mu, int cap = kDenseCap) {
    const int n = c.sites();
    if (n > cap) throw CapacityError("dense operators capped at N=" + std::to_string(cap));
    const std::int64_t dim = std::int64_t(1) << n;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    // single-site action: s^mu |b> = coeff |b'>
    auto site_apply = [&](Axis ax, int j, std::int64_t b) -> std::pair<std::int64_t, cplx> {
        const std::int64_t flipped = b ^ (std::int64_t(1) << j);
        const bool down = (b >> j) & 1;
        switch (ax) {
            case Axis::X: return {flipped, 0.5};
            case Axis::Y: return {flipped, down ? cplx(0, -0.5) : cplx(0, 0.5)};
            default: return {b, down ? -0.5 : 0.5};
        }
    };
    for (std::int64_t b = 0; b < dim; ++b) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                if (j == k) continue;
                auto [b1, c1] = site_apply(mu, k, b);
                auto [b2, c2] = site_apply(mu, j, b1);
                h(b2, b) += c.k(j, k) * c1 * c2;
            }
        }
    }
    return h;
}

// Dense effective Hamiltonian
//   H_eff = (1/3) sum_{j!=k} K_jk s_j.s_k
//         + (tau/3) sum_{[j,k,l]} K_[jkl] (s_j^x s_k^y s_l^z + s_l^z s_k^y s_j^x),
//   K_[jkl] = K_jl K_kl + K_jk K_lk - K_kj K_lj.
// Operators on distinct sites commute, so each triple term is 2 s^x s^y s^z.
inline Eigen::MatrixXcd effective_hamiltonian_dense(const CouplingMatrix& c, double tau,
                                                    int cap = kDenseCap) {
    const int n = c.sites();
    if (n > cap) throw CapacityError("dense operators capped at N=" + std::to_string(cap));
    const std::int64_t dim = std::int64_t(1) << n;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (Axis mu : {Axis::X, Axis::Y, Axis::Z}) {
        h += dense_hmumu(c, mu, cap) / 3.0;
    }
    auto site_apply = [&](Axis ax, int j, std::int64_t b) -> std::pair<std::int64_t, cplx> {
        const std::int64_t flipped = b ^ (std::int64_t(1) << j);
        const bool down = (b >> j) & 1;
        switch (ax) {
            case Axis::X: return {flipped, 0.5};
            case Axis::Y: return {flipped, down ? cplx(0, -0.5) : cplx(0, 0.5)};
            default: return {b, down ? -0.5 : 0.5};
        }
    };
    for (std::int64_t b = 0; b < dim; ++b) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                if (k == j) continue;
                for (int l = 0; l < n; ++l) {
                    if (l == j || l == k) continue;
                    const double kjkl = c.k(j, l) * c.k(k, l) + c.k(j, k) * c.k(l, k) -
                                        c.k(k, j) * c.k(l, j);
                    auto [b1, c1] = site_apply(Axis::Z, l, b);
                    auto [b2, c2] = site_apply(Axis::Y, k, b1);
                    auto [b3, c3] = site_apply(Axis::X, j, b2);
                    h(b3, b) += (2.0 * tau / 3.0) * kjkl * c1 * c2 * c3;
                }
            }
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Stroboscopic observable series
// ---------------------------------------------------------------------------

struct ObservablePoint {
    double t = 0.0;
    double fq_sx = 0.0;
    double fq_opt = 0.0;
    double sx = 0.0;
    double sz = 0.0;
    double s2 = 0.0;
    double nfm = 0.0;
};

struct ObservableSeries {
    std::vector<ObservablePoint> points;

    const ObservablePoint& peak_fq_sx() const {
        if (points.empty()) throw ConfigError("empty series");
        std::size_t best = 0;
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i].fq_sx > points[best].fq_sx) best = i;
        return points[best];
    }
};

// Peak location refined by a parabola through the three stroboscopic samples
// around the maximum. Returns {t_peak, value_peak}.
inline std::pair<double, double> refined_peak(const std::vector<double>& t,
                                              const std::vector<double>& v) {
    if (t.size() != v.size() || t.empty()) throw ConfigError("refined_peak: bad input");
    std::size_t k = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[k]) k = i;
    if (k == 0 || k + 1 == v.size()) return {t[k], v[k]};
    const double y0 = v[k - 1], y1 = v[k], y2 = v[k + 1];
    const double denom = y0 - 2 * y1 + y2;
    if (std::abs(denom) < 1e-300) return {t[k], v[k]};
    const double delta = 0.5 * (y0 - y2) / denom;
    const double h = 0.5 * (t[k + 1] - t[k - 1]);
    return {t[k] + delta * h, y1 - 0.25 * (y0 - y2) * delta};
}

inline ObservablePoint measure_state(const PureState& s, double t, bool with_opt = true) {
    ObservablePoint p;
    p.t = t;
    std::array<Eigen::VectorXcd, 3> phi{apply_collective(s, Axis::X),
                                        apply_collective(s, Axis::Y),
                                        apply_collective(s, Axis::Z)};
    std::array<double, 3> e1{};
    for (int i = 0; i < 3; ++i) e1[i] = std::real(s.amp.dot(phi[i]));
    p.sx = e1[0];
    p.sz = e1[2];
    p.fq_sx = 4.0 * (phi[0].squaredNorm() - e1[0] * e1[0]);
    p.s2 = phi[0].squaredNorm() + phi[1].squaredNorm() + phi[2].squaredNorm();
    const double j = 0.5 * s.n_qubits;
    p.nfm = (j * (j + 1.0) - p.s2) / (s.n_qubits + 1.0);
    if (with_opt) {
        Eigen::Matrix3d f;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                f(a, b) = 4.0 * std::real(phi[a].dot(phi[b])) - 4.0 * e1[a] * e1[b];
        f = 0.5 * (f + f.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(f);
        p.fq_opt = es.eigenvalues()(2);
    }
    return p;
}

// Evolve the z-polarized CSS and record observables at t_n = 3 tau n.
inline ObservableSeries run_floquet_series(const EdEngine& eng, const FloquetSchedule& sched,
                                           bool with_opt = true) {
    sched.validate();
    PureState s = initial_css(eng.sites());
    ObservableSeries out;
    out.points.reserve(sched.n_periods + 1);
    out.points.push_back(measure_state(s, 0.0, with_opt));
    for (int n = 1; n <= sched.n_periods; ++n) {
        floquet_period(eng, s, sched);
        out.points.push_back(measure_state(s, 3.0 * sched.tau * n, with_opt));
    }
    return out;
}

inline void export_series_csv(const ObservableSeries& series, const std::string& path,
                              const std::vector<std::string>& provenance = {}) {
    CsvWriter w(path);
    for (const auto& line : provenance) w.comment(line);
    w.header({"t", "FQ_Sx", "FQ_opt", "Sx", "Sz", "S2", "NFM"});
    for (const auto& p : series.points)
        w.row(p.t, p.fq_sx, p.fq_opt, p.sx, p.sz, p.s2, p.nfm);
}

inline void export_pm_csv(const std::vector<double>& pm, int n, const std::string& path,
                          const std::vector<std::string>& provenance = {}) {
    CsvWriter w(path);
    for (const auto& line : provenance) w.comment(line);
    w.header({"m", "P"});
    for (std::size_t k = 0; k < pm.size(); ++k)
        w.row(0.5 * n - static_cast<double>(k), pm[k]);
}

} // namespace ghzsim
