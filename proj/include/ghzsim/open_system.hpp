// Lindblad dynamics of the pulsed sequence under local or global dephasing,
// and the mixed-state QFI.
//
// During every free segment the generator is diagonal in the computational
// basis (Ising H_zz plus z-dephasing), so the element-wise rates
//   R(b,b') = -i(E_b - E_b') - (gamma/2) d_H(b,b') - (Gamma/2)(m_b - m_b')^2
// give the exact segment propagator rho <- exp(R tau) o rho. A general
// adaptive RK45 integrator is kept alongside for dense Hamiltonians and as a
// cross-check of the exact path. Everything here runs in dimensionless units
// (energies in K, times in 1/K); PhysicalUnits converts at the boundary.
#pragma once

#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghzsim/common.hpp"
#include "ghzsim/csv.hpp"
#include "ghzsim/exact.hpp"
#include "ghzsim/lattice.hpp"

namespace ghzsim {

inline constexpr int kOpenSystemDefaultCap = 12;

using DensityMatrix = Eigen::MatrixXcd;

enum class NoiseKind { LocalDephasing, GlobalDephasing };

inline const char* noise_kind_name(NoiseKind k) {
    return k == NoiseKind::LocalDephasing ? "local" : "global";
}

struct NoiseSpec {
    NoiseKind kind = NoiseKind::LocalDephasing;
    double rate = 0.0;  // dimensionless (units of K)

    void validate() const {
        if (!(rate >= 0.0)) throw ConfigError("noise rate must be >= 0");
    }
};

struct PhysicalUnits {
    double k_hz = 1.0;   // nearest-neighbour coupling in Hz
    double tau_s = 0.0;  // pulse separation in seconds

    void validate() const {
        if (!(k_hz > 0.0) || !(tau_s > 0.0)) throw ConfigError("K and tau must be positive");
    }
    double k_tau() const { return k_hz * tau_s; }
    double dimensionless_rate(double rate_hz) const { return rate_hz / k_hz; }
    double time_seconds(double t_dimless) const { return t_dimless / k_hz; }
};

inline DensityMatrix pure_density(const PureState& s) {
    return s.amp * s.amp.adjoint();
}

inline void hermitize(DensityMatrix& rho) {
    rho = 0.5 * (rho + rho.adjoint()).eval();
}

inline void validate_density(const DensityMatrix& rho, double herm_tol = 1e-10,
                             double trace_tol = 1e-8) {
    if (rho.rows() != rho.cols()) throw ConfigError("density matrix must be square");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) throw ConfigError("density matrix not Hermitian within tolerance");
    if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol)
        throw ConfigError("density matrix trace differs from 1");
}

namespace detail {

inline Eigen::VectorXd ising_diagonal_energies(const CouplingMatrix& c, int cap) {
    const int n = c.sites();
    if (n > cap) throw CapacityError("open-system engine capped at N=" + std::to_string(cap));
    Eigen::VectorXd e(std::int64_t(1) << n);
    foreach_z_energy(c.k, n, [&](std::int64_t b, double v) { e(b) = v; });
    return e;
}

inline Eigen::VectorXd sz_eigenvalues(int n) {
    Eigen::VectorXd m(std::int64_t(1) << n);
    for (std::int64_t b = 0; b < m.size(); ++b)
        m(b) = 0.5 * n - popcount64(b);
    return m;
}

} // namespace detail

// Diagonal-generator segment workspace for one (coupling, noise) combination.
class DiagonalLindbladSegment {
  public:
    DiagonalLindbladSegment(const CouplingMatrix& c, const NoiseSpec& noise,
                            int cap = kOpenSystemDefaultCap)
        : n_(c.sites()),
          energies_(detail::ising_diagonal_energies(c, cap)),
          m_(detail::sz_eigenvalues(n_)),
          noise_(noise) {
        noise.validate();
    }

    // With H = 0 (pure dephasing test configurations).
    DiagonalLindbladSegment(int n, const NoiseSpec& noise, int cap = kOpenSystemDefaultCap)
        : n_(n), energies_(Eigen::VectorXd::Zero(std::int64_t(1) << n)),
          m_(detail::sz_eigenvalues(n)), noise_(noise) {
        if (n > cap) throw CapacityError("open-system engine capped at N=" + std::to_string(cap));
        noise.validate();
    }

    int sites() const { return n_; }
    const NoiseSpec& noise() const { return noise_; }

    cplx rate(std::int64_t b, std::int64_t bp) const {
        double decay = 0.0;
        if (noise_.kind == NoiseKind::LocalDephasing) {
            decay = -0.5 * noise_.rate * popcount64(static_cast<std::uint64_t>(b ^ bp));
        } else {
            const double dm = m_(b) - m_(bp);
            decay = -0.5 * noise_.rate * dm * dm;
        }
        return {decay, -(energies_(b) - energies_(bp))};
    }

    // Exact element-wise propagation over duration tau.
    void evolve_exact(DensityMatrix& rho, double tau) const {
        const std::int64_t dim = rho.rows();
        for (std::int64_t bp = 0; bp < dim; ++bp)
            for (std::int64_t b = 0; b < dim; ++b)
                rho(b, bp) *= std::exp(rate(b, bp) * tau);
    }

    // Liouvillian application (for the adaptive integrator).
    void apply(const DensityMatrix& rho, DensityMatrix& out) const {
        const std::int64_t dim = rho.rows();
        out.resize(dim, dim);
        for (std::int64_t bp = 0; bp < dim; ++bp)
            for (std::int64_t b = 0; b < dim; ++b)
                out(b, bp) = rate(b, bp) * rho(b, bp);
    }

  private:
    int n_;
    Eigen::VectorXd energies_;
    Eigen::VectorXd m_;
    NoiseSpec noise_;
};

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 1e-3;
    double min_step = 1e-12;
    double trace_drift_cap = 1e-8;  // per segment
};

// Adaptive embedded RK45 (Cash-Karp) over an arbitrary Liouvillian. The state
// is re-Hermitized after every accepted step; trace drift beyond the cap
// aborts, which signals a tolerance problem rather than silently degrading.
inline void integrate_lindblad(const std::function<void(const DensityMatrix&, DensityMatrix&)>& liouville,
                               DensityMatrix& rho, double duration,
                               const IntegratorOptions& opt = {}) {
    static const double b21 = 0.2;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static const double b51 = -11.0 / 54, b52 = 2.5, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                        b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
    static const double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                        d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = c6 - 0.25;

    const double trace0 = rho.trace().real();
    double t = 0.0;
    double h = std::min(opt.initial_step, duration);
    DensityMatrix k1, k2, k3, k4, k5, k6, tmp, err;
    while (t < duration) {
        if (t + h > duration) h = duration - t;
        liouville(rho, k1);
        tmp = rho + h * b21 * k1;
        liouville(tmp, k2);
        tmp = rho + h * (b31 * k1 + b32 * k2);
        liouville(tmp, k3);
        tmp = rho + h * (b41 * k1 + b42 * k2 + b43 * k3);
        liouville(tmp, k4);
        tmp = rho + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4);
        liouville(tmp, k5);
        tmp = rho + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5);
        liouville(tmp, k6);
        tmp = rho + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
        err = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
        const double scale = opt.abs_tol + opt.rel_tol * tmp.cwiseAbs().maxCoeff();
        const double e = err.cwiseAbs().maxCoeff() / scale;
        if (e <= 1.0) {
            rho.swap(tmp);
            hermitize(rho);
            t += h;
        }
        const double grow = (e > 1e-30) ? 0.9 * std::pow(e, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (h < opt.min_step) throw ConfigError("lindblad integrator step underflow");
    }
    if (std::abs(rho.trace().real() - trace0) > opt.trace_drift_cap)
        throw ConfigError("lindblad integrator trace drift exceeded cap");
}

// One dissipative segment under a dense Hermitian Hamiltonian. Used for
// verification and for non-diagonal frames; production segments go through
// DiagonalLindbladSegment.
inline DensityMatrix lindblad_segment(const DensityMatrix& rho_in, const Eigen::MatrixXcd& h,
                                      const NoiseSpec& noise, double tau,
                                      const IntegratorOptions& opt = {},
                                      int cap = kOpenSystemDefaultCap) {
    noise.validate();
    const std::int64_t dim = rho_in.rows();
    int n = 0;
    while ((std::int64_t(1) << n) < dim) ++n;
    if ((std::int64_t(1) << n) != dim) throw ConfigError("density matrix dimension must be 2^N");
    if (n > cap) throw CapacityError("open-system engine capped at N=" + std::to_string(cap));
    validate_density(rho_in);
    const Eigen::VectorXd m = detail::sz_eigenvalues(n);
    DensityMatrix rho = rho_in;
    auto liouville = [&](const DensityMatrix& r, DensityMatrix& out) {
        out.noalias() = cplx(0, -1) * (h * r - r * h);
        if (noise.kind == NoiseKind::LocalDephasing) {
            for (std::int64_t bp = 0; bp < dim; ++bp)
                for (std::int64_t b = 0; b < dim; ++b)
                    out(b, bp) -= 0.5 * noise.rate *
                                  popcount64(static_cast<std::uint64_t>(b ^ bp)) * r(b, bp);
        } else {
            for (std::int64_t bp = 0; bp < dim; ++bp)
                for (std::int64_t b = 0; b < dim; ++b) {
                    const double dm = m(b) - m(bp);
                    out(b, bp) -= 0.5 * noise.rate * dm * dm * r(b, bp);
                }
        }
    };
    integrate_lindblad(liouville, rho, tau, opt);
    return rho;
}

// Diagonal-H overload: exact element-wise propagation.
inline DensityMatrix lindblad_segment(const DensityMatrix& rho_in,
                                      const DiagonalLindbladSegment& seg, double tau) {
    validate_density(rho_in);
    DensityMatrix rho = rho_in;
    seg.evolve_exact(rho, tau);
    return rho;
}

// ---------------------------------------------------------------------------
// Pulsed Floquet period with dissipation
// ---------------------------------------------------------------------------

// Dissipator frames. Lab: instantaneous noise-free pulses around z-Ising
// segments with dephasing along lab z throughout -- unitarily identical to
// the segment picture with dissipators that follow the toggled axis (the
// pulses conjugate Hamiltonian and dissipators alike). SegmentFixedZ is the
// genuinely different alternative where the dephasing axis stays z while the
// interaction axis toggles through yy, xx, zz; its segments mix a non-diagonal
// Hamiltonian with a diagonal dissipator and run through the integrator.
enum class NoiseFrame { Lab, SegmentFixedZ };

inline void conjugate_global_rotation(DensityMatrix& rho, int n, Axis mu, double theta) {
    // rho <- U rho U^dag with U = exp(-i theta S_mu); one-qubit gates applied
    // to rows, then (conjugated) to columns
    const double c = std::cos(theta / 2), sn = std::sin(theta / 2);
    cplx u00, u01, u10, u11;
    switch (mu) {
        case Axis::X: u00 = c; u01 = cplx(0, -sn); u10 = cplx(0, -sn); u11 = c; break;
        case Axis::Y: u00 = c; u01 = -sn; u10 = sn; u11 = c; break;
        case Axis::Z: u00 = cplx(c, -sn); u01 = 0; u10 = 0; u11 = cplx(c, sn); break;
    }
    const std::int64_t dim = rho.rows();
    for (int j = 0; j < n; ++j) {
        const std::int64_t bit = std::int64_t(1) << j;
        // rows: rho <- (U_j applied on left)
        for (std::int64_t col = 0; col < dim; ++col) {
            auto* cdat = rho.col(col).data();
            for (std::int64_t base = 0; base < dim; base += 2 * bit)
                for (std::int64_t off = 0; off < bit; ++off) {
                    const std::int64_t i0 = base + off, i1 = i0 + bit;
                    const cplx a0 = cdat[i0], a1 = cdat[i1];
                    cdat[i0] = u00 * a0 + u01 * a1;
                    cdat[i1] = u10 * a0 + u11 * a1;
                }
        }
    }
    // columns: rho <- rho U^dag  (U^dag = conj-transpose of the one-qubit gate)
    const cplx v00 = std::conj(u00), v01 = std::conj(u10), v10 = std::conj(u01),
               v11 = std::conj(u11);
    for (int j = 0; j < n; ++j) {
        const std::int64_t bit = std::int64_t(1) << j;
        for (std::int64_t base = 0; base < dim; base += 2 * bit)
            for (std::int64_t off = 0; off < bit; ++off) {
                const std::int64_t c0 = base + off, c1 = c0 + bit;
                for (std::int64_t row = 0; row < dim; ++row) {
                    const cplx a0 = rho(row, c0), a1 = rho(row, c1);
                    rho(row, c0) = a0 * v00 + a1 * v10;
                    rho(row, c1) = a0 * v01 + a1 * v11;
                }
            }
    }
}

// One dissipative Floquet period in the lab frame: the pulse train of the
// closed engine with dephasing active during every free segment.
inline void pulsed_period_open(DensityMatrix& rho, const DiagonalLindbladSegment& seg,
                               double tau) {
    const int n = seg.sites();
    conjugate_global_rotation(rho, n, Axis::X, -M_PI / 2);  // e^{+i(pi/2)Sx}
    seg.evolve_exact(rho, tau);
    conjugate_global_rotation(rho, n, Axis::X, +M_PI / 2);
    conjugate_global_rotation(rho, n, Axis::Y, -M_PI / 2);
    seg.evolve_exact(rho, tau);
    conjugate_global_rotation(rho, n, Axis::Y, +M_PI / 2);
    seg.evolve_exact(rho, tau);
    hermitize(rho);
}

// Sensitivity-check variant (NoiseFrame::SegmentFixedZ): yy, xx, zz segments
// with the dephasing axis pinned to z. Small N only -- each segment carries a
// dense Hamiltonian through the adaptive integrator.
inline void period_open_segment_fixed_z(DensityMatrix& rho, const CouplingMatrix& c,
                                        const NoiseSpec& noise, double tau,
                                        const IntegratorOptions& opt = {}) {
    for (Axis mu : {Axis::Y, Axis::X, Axis::Z})
        rho = lindblad_segment(rho, dense_hmumu(c, mu), noise, tau, opt);
    hermitize(rho);
}

// ---------------------------------------------------------------------------
// Mixed-state QFI and parity
// ---------------------------------------------------------------------------

// S_n applied to every column of a matrix block.
inline Eigen::MatrixXcd apply_collective_matrix(const Eigen::MatrixXcd& v, int n,
                                                const std::array<double, 3>& dir) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(v.rows(), v.cols());
    for (int axis = 0; axis < 3; ++axis) {
        const double w = dir[axis];
        if (w == 0.0) continue;
        for (int j = 0; j < n; ++j) {
            const std::int64_t bit = std::int64_t(1) << j;
            for (std::int64_t base = 0; base < v.rows(); base += 2 * bit)
                for (std::int64_t off = 0; off < bit; ++off) {
                    const std::int64_t i0 = base + off, i1 = i0 + bit;
                    switch (static_cast<Axis>(axis)) {
                        case Axis::X:
                            out.row(i0) += (0.5 * w) * v.row(i1);
                            out.row(i1) += (0.5 * w) * v.row(i0);
                            break;
                        case Axis::Y:
                            out.row(i0) += cplx(0, -0.5 * w) * v.row(i1);
                            out.row(i1) += cplx(0, +0.5 * w) * v.row(i0);
                            break;
                        case Axis::Z:
                            out.row(i0) += (0.5 * w) * v.row(i0);
                            out.row(i1) -= (0.5 * w) * v.row(i1);
                            break;
                    }
                }
        }
    }
    return out;
}

// F_Q(rho, S_n) = 2 sum_{q_k + q_k' > cutoff} (q_k - q_k')^2/(q_k + q_k') |<k'|S_n|k>|^2.
// Eigenvalues below -1e-8 abort (nonphysical state); small negatives are
// clamped to zero. The pair sum keeps every eigenvector whose weight exceeds
// cutoff/2, which covers exactly the pairs passing the cutoff.
inline double qfi_mixed(const DensityMatrix& rho, const std::array<double, 3>& n_dir,
                        double cutoff = 1e-12) {
    const double nn =
        std::sqrt(n_dir[0] * n_dir[0] + n_dir[1] * n_dir[1] + n_dir[2] * n_dir[2]);
    if (!(nn > 0.0)) throw ConfigError("qfi_mixed: zero-length direction");
    const std::array<double, 3> dir{n_dir[0] / nn, n_dir[1] / nn, n_dir[2] / nn};
    int n = 0;
    while ((std::int64_t(1) << n) < rho.rows()) ++n;

    DensityMatrix h = rho;
    hermitize(h);
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(h);
    if (es.info() != Eigen::Success) throw ConfigError("qfi_mixed: eigendecomposition failed");
    Eigen::VectorXd q = es.eigenvalues();
    const double qmin = q.minCoeff();
    if (qmin < -1e-8)
        throw ConfigError("qfi_mixed: density matrix has eigenvalue " + std::to_string(qmin));
    for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = std::max(q(i), 0.0);

    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < q.size(); ++i)
        if (q(i) > 0.5 * cutoff) kept.push_back(i);
    if (kept.empty()) return 0.0;

    Eigen::MatrixXcd vk(rho.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) vk.col(i) = es.eigenvectors().col(kept[i]);
    Eigen::MatrixXcd b = es.eigenvectors().adjoint() * apply_collective_matrix(vk, n, dir);

    // Every admissible pair has at least one kept member, so the ordered-pair
    // sum decomposes as 2 T1 - T_KK with T1 over kept x all and T_KK over
    // kept x kept (which T1 would otherwise double count).
    double t1 = 0.0, tkk = 0.0;
    for (std::size_t col = 0; col < kept.size(); ++col) {
        const double qk = q(kept[col]);
        for (Eigen::Index row = 0; row < b.rows(); ++row) {
            const double s = qk + q(row);
            if (s <= cutoff) continue;
            const double d = qk - q(row);
            t1 += d * d / s * std::norm(b(row, col));
        }
    }
    for (std::size_t c1 = 0; c1 < kept.size(); ++c1)
        for (std::size_t c2 = 0; c2 < kept.size(); ++c2) {
            const double s = q(kept[c1]) + q(kept[c2]);
            if (s <= cutoff) continue;
            const double d = q(kept[c1]) - q(kept[c2]);
            tkk += d * d / s * std::norm(b(kept[c2], c1));
        }
    return 2.0 * (2.0 * t1 - tkk);
}

// Tr[rho e^{-i S_x theta} Pi e^{+i S_x theta}] over a theta grid.
inline std::vector<double> parity_scan(const DensityMatrix& rho, int n,
                                       const std::vector<double>& thetas) {
    std::vector<double> out;
    out.reserve(thetas.size());
    const std::int64_t dim = rho.rows();
    for (double theta : thetas) {
        DensityMatrix r = rho;
        conjugate_global_rotation(r, n, Axis::X, -theta);  // e^{+i theta Sx} rho e^{-i theta Sx}
        double val = 0.0;
        for (std::int64_t b = 0; b < dim; ++b)
            val += ((popcount64(b) & 1) ? -1.0 : 1.0) * r(b, b).real();
        out.push_back(val);
    }
    return out;
}

inline double parity_contrast(const std::vector<double>& scan) {
    double lo = scan[0], hi = scan[0];
    for (double v : scan) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return 0.5 * (hi - lo);
}

// ---------------------------------------------------------------------------
// Series driver
// ---------------------------------------------------------------------------

struct OpenSeriesPoint {
    double t = 0.0;       // dimensionless
    double fq_sx = 0.0;
    double trace = 1.0;
};

// Evolves the z-polarized CSS under the dissipative pulse train, evaluating
// the mixed-state QFI at the requested period indices (eigendecompositions
// dominate the cost, so callers choose where to pay).
inline std::vector<OpenSeriesPoint> run_open_series(const CouplingMatrix& c,
                                                    const NoiseSpec& noise, double tau,
                                                    int n_periods,
                                                    const std::set<int>& eval_periods,
                                                    NoiseFrame frame = NoiseFrame::Lab,
                                                    int cap = kOpenSystemDefaultCap) {
    DiagonalLindbladSegment seg(c, noise, cap);
    DensityMatrix rho = pure_density(initial_css(c.sites(), cap));
    std::vector<OpenSeriesPoint> out;
    if (eval_periods.count(0))
        out.push_back({0.0, qfi_mixed(rho, {1, 0, 0}), rho.trace().real()});
    for (int p = 1; p <= n_periods; ++p) {
        if (frame == NoiseFrame::Lab)
            pulsed_period_open(rho, seg, tau);
        else
            period_open_segment_fixed_z(rho, c, noise, tau);
        if (eval_periods.count(p))
            out.push_back({3.0 * tau * p, qfi_mixed(rho, {1, 0, 0}), rho.trace().real()});
    }
    return out;
}

struct RateScanRow {
    double rate_hz = 0.0;
    NoiseKind kind = NoiseKind::LocalDephasing;
    double max_fq = 0.0;
    double t_at_max_s = 0.0;
};

inline void export_rate_scan_csv(const std::vector<RateScanRow>& rows, const std::string& path,
                                 const std::vector<std::string>& provenance = {}) {
    CsvWriter w(path);
    for (const auto& line : provenance) w.comment(line);
    w.header({"rate_hz", "kind", "max_FQ", "t_at_max_s"});
    for (const auto& r : rows)
        w.row(r.rate_hz, noise_kind_name(r.kind), r.max_fq, r.t_at_max_s);
}

inline void export_parity_csv(const std::vector<double>& thetas, const std::vector<double>& parity,
                              const std::string& path,
                              const std::vector<std::string>& provenance = {}) {
    CsvWriter w(path);
    for (const auto& line : provenance) w.comment(line);
    w.header({"theta", "parity"});
    for (std::size_t i = 0; i < thetas.size(); ++i)
        w.row(thetas[i], parity[i]);
}

} // namespace ghzsim
