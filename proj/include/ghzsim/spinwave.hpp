// Bogoliubov analysis of the quadratic spin-wave Hamiltonian: per-mode data
// (A_q, B_q, eps_q, u_q, v_q), excitation time series, the stability bound
// min_q A_q/|B_q|, and the mu/nu scaling exponents with finite-size-aware
// slope estimation.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ghzsim/common.hpp"
#include "ghzsim/csv.hpp"
#include "ghzsim/lattice.hpp"

namespace ghzsim {

struct SpinWaveMode {
    std::array<int, 2> q_index{0, 0};
    std::array<double, 2> q{0.0, 0.0};
    double k_q = 0.0;   // structure factor K_q (real part; imag is diagnostic)
    double a_q = 0.0;   // (K_0 - K_q)/3
    double b_q = 0.0;   // (K_q^2 - T_0^2)/6
    double eps = 0.0;   // sqrt(A^2 - tau^2 B^2) if stable, |.| of the imaginary energy otherwise
    bool unstable = false;
    double u = 1.0, v = 0.0;  // Bogoliubov amplitudes (stable modes only)
};

struct SpinWaveSpectrum {
    LatticeSpec spec;
    ModelParams params;
    double tau = 0.0;
    double k0 = 0.0;
    double t0sq = 0.0;
    std::vector<SpinWaveMode> modes;  // the N-1 finite-momentum modes
};

inline SpinWaveSpectrum build_spectrum(const LatticeSpec& spec, const ModelParams& params,
                                       double tau) {
    if (spec.boundary != Boundary::Periodic)
        throw GeometryError("spin-wave spectrum requires periodic boundary");
    if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
    params.validate();

    SpinWaveSpectrum sp;
    sp.spec = spec;
    sp.params = params;
    sp.tau = tau;
    sp.t0sq = t0_squared(spec, params);

    const auto disps = detail::periodic_displacements(spec);
    std::vector<double> w(disps.size());
    for (std::size_t i = 0; i < disps.size(); ++i)
        w[i] = params.K / std::pow(disps[i].norm, params.alpha);

    const auto grid = momentum_grid(spec);
    sp.modes.reserve(grid.points.size() - 1);
    double k0 = 0.0;
    for (double x : w) k0 += x;
    sp.k0 = k0;

    for (const auto& p : grid.points) {
        if (p.is_zero) continue;
        double re = 0.0;
        for (std::size_t i = 0; i < disps.size(); ++i) {
            const double phase = p.q[0] * disps[i].r[0] + p.q[1] * disps[i].r[1];
            re += w[i] * std::cos(phase);
        }
        SpinWaveMode m;
        m.q_index = p.index;
        m.q = p.q;
        m.k_q = re;
        m.a_q = (k0 - re) / 3.0;
        m.b_q = (re * re - sp.t0sq) / 6.0;
        if (m.a_q < -1e-9 * std::max(1.0, std::abs(k0)))
            throw ConfigError("spin-wave model error: A_q < 0 (K_0 must maximize K_q)");
        if (m.a_q < 0.0) m.a_q = 0.0;
        const double disc = m.a_q * m.a_q - tau * tau * m.b_q * m.b_q;
        if (disc >= 0.0) {
            m.eps = std::sqrt(disc);
            if (m.eps > 0.0) {
                m.u = std::sqrt(0.5 * (m.a_q / m.eps + 1.0));
                const double vsq = 0.5 * (m.a_q / m.eps - 1.0);
                m.v = (m.b_q >= 0.0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, vsq));
            }
        } else {
            m.unstable = true;
            m.eps = std::sqrt(-disc);
            m.u = m.v = std::numeric_limits<double>::quiet_NaN();
        }
        sp.modes.push_back(m);
    }
    return sp;
}

// <b_q^dag b_q>(t). Stable modes oscillate as [1 - cos(2 eps t)]; unstable
// modes (tau |B| > A) continue analytically to cosh growth and are flagged.
inline double excitation_series(const SpinWaveMode& m, double tau, double t) {
    if (!(t >= 0.0)) throw ConfigError("excitation_series: t must be >= 0");
    const double tb = tau * m.b_q;
    if (!m.unstable) {
        const double denom = m.a_q * m.a_q - tb * tb;
        if (denom <= 0.0) return 0.0;  // marginal mode with B = 0
        return (0.5 * tb * tb / denom) * (1.0 - std::cos(2.0 * m.eps * t));
    }
    const double denom = tb * tb - m.a_q * m.a_q;
    return (0.5 * tb * tb / denom) * (std::cosh(2.0 * m.eps * t) - 1.0);
}

// N_FM(t) = sum_{q != 0} <b_q^dag b_q>(t).
inline double total_nfm(const SpinWaveSpectrum& sp, double t) {
    double tot = 0.0;
    for (const auto& m : sp.modes) tot += excitation_series(m, sp.tau, t);
    return tot;
}

struct TauBound {
    double value = 0.0;            // min_q A_q / |B_q|, units 1/K
    std::array<int, 2> q_index{0, 0};
};

// Stability bound on the pulse separation. |B_q| is used because the
// excitation amplitude depends on B_q^2, so the sign of B_q is irrelevant.
inline TauBound tau_bound(const LatticeSpec& spec, const ModelParams& params) {
    SpinWaveSpectrum sp = build_spectrum(spec, params, 0.0);
    TauBound best;
    bool first = true;
    for (const auto& m : sp.modes) {
        const double babs = std::abs(m.b_q);
        if (babs < 1e-300) continue;
        const double v = m.a_q / babs;
        if (first || v < best.value) {
            best.value = v;
            best.q_index = m.q_index;
            first = false;
        }
    }
    if (first) throw ConfigError("tau_bound: no finite-momentum mode with B != 0");
    return best;
}

// Scaling exponent of the suitable pulse separation, tau_s ~ L^-mu:
//   mu = d - alpha (alpha < d), alpha - d (d < alpha < d+2), 2 (alpha >= d+2);
// exactly at alpha = d the power law collapses to tau_s ~ (ln L)^-2.
struct ScalingExponent {
    double value = 0.0;
    bool logarithmic = false;  // alpha == d: (ln L)^-2 scaling, value unused
};

inline ScalingExponent mu_exponent(double alpha, int d) {
    if (d != 1 && d != 2) throw ConfigError("mu_exponent: d must be 1 or 2");
    if (!(alpha >= 0.0)) throw ConfigError("mu_exponent: alpha must be >= 0");
    if (alpha == static_cast<double>(d)) return {0.0, true};
    if (alpha < d) return {d - alpha, false};
    if (alpha < d + 2) return {alpha - d, false};
    return {2.0, false};
}

// Exponent of the total evolution time, t_tot ~ L^-nu ln L:
//   nu = d - alpha (alpha < d+2), -2 (alpha >= d+2).
inline double nu_exponent(double alpha, int d) {
    if (d != 1 && d != 2) throw ConfigError("nu_exponent: d must be 1 or 2");
    if (!(alpha >= 0.0)) throw ConfigError("nu_exponent: alpha must be >= 0");
    if (alpha < d + 2) return d - alpha;
    return -2.0;
}

// GHZ-formation time of the collective cubic model: t_c = 6 ln N / (lambda K^2 tau N^2),
// in units 1/K. The K^2 makes the units close with lambda dimensionless and
// tau a time.
inline double tc_estimate(int n, double lambda, double k, double tau) {
    if (n < 3) throw ConfigError("tc_estimate needs N >= 3");
    if (!(lambda > 0.0) || !(tau > 0.0)) throw ConfigError("tc_estimate: lambda, tau must be > 0");
    return 6.0 * std::log(static_cast<double>(n)) /
           (lambda * k * k * tau * static_cast<double>(n) * n);
}

// Time-axis rescaling factor chi_eff = lambda N K^2 tau / 6.
inline double chi_eff(int n, double lambda, double k, double tau) {
    return lambda * n * k * k * tau / 6.0;
}

// ---------------------------------------------------------------------------
// Scaling study: slope of log tau_bound vs log L
// ---------------------------------------------------------------------------

// The lattice sums approach their asymptotic power law slowly (corrections
// from the subleading terms of the continuum expansion of K_0, K_q1, T_0^2).
// Local two-point slopes converge roughly geometrically on a geometric L
// grid, so an Aitken delta-squared step over the last three local slopes
// removes the dominant correction without knowing its exponent.
struct SlopeEstimate {
    std::vector<int> lengths;
    std::vector<double> bounds;
    std::vector<double> local_slopes;   // between consecutive L
    double raw_global = 0.0;            // plain OLS over all points
    double extrapolated = 0.0;          // Aitken on the last three local slopes
};

inline std::vector<int> default_slope_lengths(int d) {
    if (d == 1) return {64, 91, 128, 181, 256, 362, 512};
    return {16, 24, 32, 48, 64};
}

inline SlopeEstimate tau_bound_slope_study(int d, double alpha, const std::vector<int>& lengths) {
    if (lengths.size() < 4) throw ConfigError("slope study needs >= 4 lattice sizes");
    SlopeEstimate est;
    est.lengths = lengths;
    for (int l : lengths) {
        LatticeSpec spec = d == 1 ? LatticeSpec::chain(l) : LatticeSpec::square(l, l);
        ModelParams p{1.0, alpha};
        est.bounds.push_back(tau_bound(spec, p).value);
    }
    const std::size_t n = lengths.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        est.local_slopes.push_back(std::log(est.bounds[i + 1] / est.bounds[i]) /
                                   std::log(static_cast<double>(lengths[i + 1]) / lengths[i]));
    // plain least squares on log-log
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(static_cast<double>(lengths[i]));
        const double y = std::log(est.bounds[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    est.raw_global = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    // Aitken step: s_inf ~ s3 + d2 rho / (1 - rho), rho = d2/d1
    const std::size_t m = est.local_slopes.size();
    const double s1 = est.local_slopes[m - 3];
    const double s2 = est.local_slopes[m - 2];
    const double s3 = est.local_slopes[m - 1];
    const double d1 = s2 - s1, d2 = s3 - s2;
    est.extrapolated = s3;
    if (std::abs(d1) > 1e-12 && std::abs(d2) > 1e-12) {
        const double rho = d2 / d1;
        if (rho > 0.0 && rho < 1.0) est.extrapolated = s3 + d2 * rho / (1.0 - rho);
    }
    return est;
}

inline void export_spectrum_csv(const SpinWaveSpectrum& sp, const std::string& path,
                                const std::vector<std::string>& provenance = {}) {
    CsvWriter w(path);
    for (const auto& line : provenance) w.comment(line);
    w.header({"qx", "qy", "Kq", "Aq", "Bq", "eps_q", "unstable"});
    for (const auto& m : sp.modes)
        w.row(m.q[0], m.q[1], m.k_q, m.a_q, m.b_q, m.eps, m.unstable ? 1 : 0);
}

inline void export_scaling_csv(const std::vector<std::pair<double, SlopeEstimate>>& rows,
                               const std::string& path,
                               const std::vector<std::string>& provenance = {}) {
    CsvWriter w(path);
    for (const auto& line : provenance) w.comment(line);
    w.header({"L", "alpha", "bound", "fitted_slope"});
    for (const auto& [alpha, est] : rows)
        for (std::size_t i = 0; i < est.lengths.size(); ++i)
            w.row(est.lengths[i], alpha, est.bounds[i], est.extrapolated);
}

} // namespace ghzsim
