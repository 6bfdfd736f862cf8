// Discrete truncated Wigner dynamics. Each trajectory carries N classical
// spins of length sqrt(3)/2 (components initialized +-1/2); every Ising
// segment is integrable: the mu-components are frozen, so each spin rotates
// about the segment axis by its frozen local field times tau.
//
// Determinism contract: trajectory i is a pure function of (master seed, i),
// and all ensemble reductions run in fixed index order with pairwise
// summation over long-double accumulators, so results do not depend on
// execution order.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghzsim/common.hpp"
#include "ghzsim/csv.hpp"
#include "ghzsim/lattice.hpp"
#include "ghzsim/rng.hpp"

namespace ghzsim {

struct TrajectoryEnsemble {
    // component matrices are N x n_traj, one column per trajectory
    Eigen::MatrixXd sx, sy, sz;
    std::uint64_t seed = 0;
    std::int64_t period_index = 0;

    int sites() const { return static_cast<int>(sx.rows()); }
    int n_traj() const { return static_cast<int>(sx.cols()); }
};

// s_j^z = +1/2 deterministic; s_j^x, s_j^y independent fair +-1/2 draws.
inline TrajectoryEnsemble sample_initial(int n, int n_traj, std::uint64_t seed) {
    if (n < 1) throw ConfigError("need at least one site");
    if (n_traj < 1) throw ConfigError("need at least one trajectory");
    TrajectoryEnsemble e;
    e.seed = seed;
    e.sx.resize(n, n_traj);
    e.sy.resize(n, n_traj);
    e.sz = Eigen::MatrixXd::Constant(n, n_traj, 0.5);
    for (int t = 0; t < n_traj; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        for (int j = 0; j < n; ++j) {
            e.sx(j, t) = rng.half_spin(2 * static_cast<std::uint64_t>(j));
            e.sy(j, t) = rng.half_spin(2 * static_cast<std::uint64_t>(j) + 1);
        }
    }
    return e;
}

// One Ising segment: frozen local fields Omega_j = 2 sum_k K_jk s_k^mu
// (ordered-pair Hamiltonian), then rotate each spin about the mu axis by
// Omega_j tau. Exact solution of the classical segment dynamics.
inline void segment_step_inplace(TrajectoryEnsemble& e, Axis mu, double tau,
                                 const CouplingMatrix& c) {
    if (e.sites() != c.sites()) throw ConfigError("ensemble/coupling dimension mismatch");
    const Eigen::MatrixXd& frozen = (mu == Axis::X) ? e.sx : (mu == Axis::Y) ? e.sy : e.sz;
    Eigen::MatrixXd omega = 2.0 * tau * (c.k * frozen);
    Eigen::ArrayXXd ca = omega.array().cos();
    Eigen::ArrayXXd sa = omega.array().sin();
    switch (mu) {
        case Axis::Z: {
            Eigen::ArrayXXd x = e.sx.array();
            e.sx.array() = ca * x - sa * e.sy.array();
            e.sy.array() = sa * x + ca * e.sy.array();
            break;
        }
        case Axis::X: {
            Eigen::ArrayXXd y = e.sy.array();
            e.sy.array() = ca * y - sa * e.sz.array();
            e.sz.array() = sa * y + ca * e.sz.array();
            break;
        }
        case Axis::Y: {
            Eigen::ArrayXXd z = e.sz.array();
            e.sz.array() = ca * z - sa * e.sx.array();
            e.sx.array() = sa * z + ca * e.sx.array();
            break;
        }
    }
}

inline TrajectoryEnsemble segment_step(const TrajectoryEnsemble& e, Axis mu, double tau,
                                       const CouplingMatrix& c) {
    TrajectoryEnsemble out = e;
    segment_step_inplace(out, mu, tau, c);
    return out;
}

// One Floquet period: yy, xx, zz segments in that order.
inline void period_step_inplace(TrajectoryEnsemble& e, double tau, const CouplingMatrix& c) {
    segment_step_inplace(e, Axis::Y, tau, c);
    segment_step_inplace(e, Axis::X, tau, c);
    segment_step_inplace(e, Axis::Z, tau, c);
    ++e.period_index;
}

inline TrajectoryEnsemble period_step(const TrajectoryEnsemble& e, double tau,
                                      const CouplingMatrix& c) {
    TrajectoryEnsemble out = e;
    period_step_inplace(out, tau, c);
    return out;
}

struct DtwaMoments {
    double fq_sx = 0.0;
    double fq_sx_err = 0.0;   // jackknife standard error
    double fq_opt = 0.0;
    double nfm = 0.0;
    double sx = 0.0;
    double sz = 0.0;
    double s2 = 0.0;
    int n_traj = 0;
};

namespace detail {

// Pairwise sum of per-trajectory values in fixed index order.
inline double fixed_order_mean(const std::vector<double>& per_traj) {
    return pairwise_sum(per_traj) / static_cast<double>(per_traj.size());
}

} // namespace detail

// Ensemble estimators: F_Q^{Sx} = 4 Var(S_x); F_Q^opt from the largest
// eigenvalue of the symmetrized covariance construction 2<{S_i,S_j}> -
// 4<S_i><S_j> (classical products commute); N_FM from the total-spin deficit.
// Jackknife over trajectories supplies the F_Q^{Sx} standard error.
inline DtwaMoments estimate_observables(const TrajectoryEnsemble& e) {
    const int nt = e.n_traj();
    if (nt < 2) throw ConfigError("estimate_observables needs n_traj >= 2");
    const int n = e.sites();

    Eigen::VectorXd tx = e.sx.colwise().sum();
    Eigen::VectorXd ty = e.sy.colwise().sum();
    Eigen::VectorXd tz = e.sz.colwise().sum();

    auto mean_of = [&](auto&& f) {
        std::vector<double> vals(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t) vals[static_cast<std::size_t>(t)] = f(t);
        return detail::fixed_order_mean(vals);
    };

    const double mx = mean_of([&](int t) { return tx(t); });
    const double my = mean_of([&](int t) { return ty(t); });
    const double mz = mean_of([&](int t) { return tz(t); });
    const double mxx = mean_of([&](int t) { return tx(t) * tx(t); });
    const double myy = mean_of([&](int t) { return ty(t) * ty(t); });
    const double mzz = mean_of([&](int t) { return tz(t) * tz(t); });
    const double mxy = mean_of([&](int t) { return tx(t) * ty(t); });
    const double mxz = mean_of([&](int t) { return tx(t) * tz(t); });
    const double myz = mean_of([&](int t) { return ty(t) * tz(t); });

    DtwaMoments m;
    m.n_traj = nt;
    m.sx = mx;
    m.sz = mz;
    m.fq_sx = 4.0 * (mxx - mx * mx);
    m.s2 = mxx + myy + mzz;
    const double j = 0.5 * n;
    m.nfm = (j * (j + 1.0) - m.s2) / (n + 1.0);

    Eigen::Matrix3d cov;
    cov << mxx - mx * mx, mxy - mx * my, mxz - mx * mz,
           mxy - mx * my, myy - my * my, myz - my * mz,
           mxz - mx * mz, myz - my * mz, mzz - mz * mz;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    m.fq_opt = 4.0 * es.eigenvalues()(2);

    // jackknife on F_Q^{Sx}
    const double sum1 = mx * nt;
    const double sum2 = mxx * nt;
    double acc = 0.0;
    const double full = m.fq_sx;
    for (int t = 0; t < nt; ++t) {
        const double l1 = (sum1 - tx(t)) / (nt - 1);
        const double l2 = (sum2 - tx(t) * tx(t)) / (nt - 1);
        const double fq_loo = 4.0 * (l2 - l1 * l1);
        const double d = fq_loo - full;
        acc += d * d;
    }
    m.fq_sx_err = std::sqrt(acc * (nt - 1.0) / nt);
    return m;
}

struct DtwaSeriesPoint {
    double t = 0.0;
    DtwaMoments m;
};

struct DtwaSeries {
    std::vector<DtwaSeriesPoint> points;

    std::pair<double, double> refined_peak_fq() const {
        std::vector<double> t, v;
        t.reserve(points.size());
        v.reserve(points.size());
        for (const auto& p : points) {
            t.push_back(p.t);
            v.push_back(p.m.fq_sx);
        }
        return refined_peak_tv(t, v);
    }

  private:
    static std::pair<double, double> refined_peak_tv(const std::vector<double>& t,
                                                     const std::vector<double>& v) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[k]) k = i;
        if (k == 0 || k + 1 == v.size()) return {t[k], v[k]};
        const double y0 = v[k - 1], y1 = v[k], y2 = v[k + 1];
        const double denom = y0 - 2 * y1 + y2;
        if (std::abs(denom) < 1e-300) return {t[k], v[k]};
        const double delta = 0.5 * (y0 - y2) / denom;
        return {t[k] + delta * 0.5 * (t[k + 1] - t[k - 1]), y1 - 0.25 * (y0 - y2) * delta};
    }
};

inline DtwaSeries run_dtwa_series(const CouplingMatrix& c, double tau, int n_periods, int n_traj,
                                  std::uint64_t seed, int record_stride = 1) {
    if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
    TrajectoryEnsemble e = sample_initial(c.sites(), n_traj, seed);
    DtwaSeries out;
    out.points.push_back({0.0, estimate_observables(e)});
    for (int p = 1; p <= n_periods; ++p) {
        period_step_inplace(e, tau, c);
        if (p % record_stride == 0 || p == n_periods)
            out.points.push_back({3.0 * tau * p, estimate_observables(e)});
    }
    return out;
}

inline void export_dtwa_csv(const DtwaSeries& series, const std::string& path,
                            const std::vector<std::string>& provenance = {}) {
    CsvWriter w(path);
    for (const auto& line : provenance) w.comment(line);
    w.header({"t", "FQ_Sx", "FQ_Sx_err", "FQ_opt", "NFM", "Sx", "Sz"});
    for (const auto& p : series.points)
        w.row(p.t, p.m.fq_sx, p.m.fq_sx_err, p.m.fq_opt, p.m.nfm, p.m.sx, p.m.sz);
}

// ---------------------------------------------------------------------------
// Binary checkpoints (native endianness, versioned header)
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointMagic = 0x47485a44;  // "GHZD"
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const TrajectoryEnsemble& e, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open checkpoint file for writing: " + path);
    auto put64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    std::uint32_t magic = kCheckpointMagic, version = kCheckpointVersion;
    out.write(reinterpret_cast<const char*>(&magic), 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    put64(static_cast<std::uint64_t>(e.sites()));
    put64(static_cast<std::uint64_t>(e.n_traj()));
    put64(e.seed);
    put64(static_cast<std::uint64_t>(e.period_index));
    for (const Eigen::MatrixXd* m : {&e.sx, &e.sy, &e.sz})
        out.write(reinterpret_cast<const char*>(m->data()),
                  static_cast<std::streamsize>(sizeof(double)) * m->size());
    if (!out) throw ConfigError("checkpoint write failed: " + path);
}

inline TrajectoryEnsemble load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint file: " + path);
    std::uint32_t magic = 0, version = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    if (magic != kCheckpointMagic) throw ConfigError("not a trajectory checkpoint: " + path);
    if (version != kCheckpointVersion) throw ConfigError("unsupported checkpoint version");
    auto get64 = [&]() {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const auto n = static_cast<int>(get64());
    const auto nt = static_cast<int>(get64());
    TrajectoryEnsemble e;
    e.seed = get64();
    e.period_index = static_cast<std::int64_t>(get64());
    e.sx.resize(n, nt);
    e.sy.resize(n, nt);
    e.sz.resize(n, nt);
    for (Eigen::MatrixXd* m : {&e.sx, &e.sy, &e.sz})
        in.read(reinterpret_cast<char*>(m->data()),
                static_cast<std::streamsize>(sizeof(double)) * m->size());
    if (!in) throw ConfigError("checkpoint truncated: " + path);
    return e;
}

} // namespace ghzsim
