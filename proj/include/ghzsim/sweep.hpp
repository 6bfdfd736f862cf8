// Sweep orchestration: tau_s threshold search against the collective-model
// reference, persisted (L, alpha, tau) records with resume, and power-law
// fits over the collected data.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghzsim/common.hpp"
#include "ghzsim/dicke.hpp"
#include "ghzsim/dtwa.hpp"
#include "ghzsim/exact.hpp"
#include "ghzsim/fit.hpp"
#include "ghzsim/lattice.hpp"
#include "ghzsim/spinwave.hpp"
#include "ghzsim/version.hpp"

namespace ghzsim {

using json = nlohmann::json;

enum class SweepEngine { Ed, Dtwa, Zm };

inline const char* engine_name(SweepEngine e) {
    switch (e) {
        case SweepEngine::Ed: return "ed";
        case SweepEngine::Dtwa: return "dtwa";
        default: return "zm";
    }
}

inline SweepEngine engine_from_name(const std::string& s) {
    if (s == "ed") return SweepEngine::Ed;
    if (s == "dtwa") return SweepEngine::Dtwa;
    if (s == "zm") return SweepEngine::Zm;
    throw ConfigError("unknown engine: " + s);
}

struct SweepConfig {
    int dimension = 1;
    std::vector<int> lengths;
    std::vector<double> alphas;
    std::vector<double> tau_grid;       // strictly decreasing
    std::string engine = "auto";        // ed | dtwa | zm | auto
    double threshold = 0.8;             // F_Q / F_Q^eff target ratio
    int n_traj = 1000;
    std::uint64_t seed = 20240901;
    Boundary boundary = Boundary::Periodic;
    std::string output;
    int max_workers = 1;

    void validate() const {
        if (dimension != 1 && dimension != 2) throw ConfigError("dimension must be 1 or 2");
        if (lengths.empty() || alphas.empty() || tau_grid.empty())
            throw ConfigError("sweep needs lengths, alphas and a tau grid");
        for (std::size_t i = 1; i < tau_grid.size(); ++i)
            if (!(tau_grid[i] < tau_grid[i - 1]))
                throw ConfigError("tau grid must be strictly decreasing");
        if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0,1)");
        if (n_traj < 2) throw ConfigError("n_traj must be >= 2");
    }

    static SweepConfig from_json(const json& j) {
        SweepConfig c;
        c.dimension = j.value("dimension", 1);
        c.lengths = j.value("lengths", std::vector<int>{});
        c.alphas = j.value("alphas", std::vector<double>{});
        if (j.contains("tau_grid")) {
            c.tau_grid = j.at("tau_grid").get<std::vector<double>>();
        } else if (j.contains("tau_max") && j.contains("tau_min")) {
            const double hi = j.at("tau_max").get<double>();
            const double lo = j.at("tau_min").get<double>();
            const int per_decade = j.value("tau_points_per_decade", 8);
            if (!(hi > lo && lo > 0)) throw ConfigError("bad tau range");
            const int npts = std::max(2, static_cast<int>(std::ceil(
                                             std::log10(hi / lo) * per_decade)) + 1);
            for (int i = 0; i < npts; ++i)
                c.tau_grid.push_back(hi * std::pow(lo / hi, i / double(npts - 1)));
        }
        c.engine = j.value("engine", std::string("auto"));
        c.threshold = j.value("threshold", 0.8);
        c.n_traj = j.value("n_traj", 1000);
        c.seed = j.value("seed", std::uint64_t{20240901});
        c.boundary = j.value("boundary", std::string("periodic")) == "open" ? Boundary::Open
                                                                            : Boundary::Periodic;
        c.output = j.value("output", std::string("sweep_records.jsonl"));
        c.max_workers = j.value("max_workers", 1);
        c.validate();
        return c;
    }
};

struct SweepRecord {
    int dimension = 1;
    int length = 0;
    double alpha = 0.0;
    double tau = 0.0;
    std::string engine;
    std::uint64_t seed = 0;
    int n_traj = 0;
    std::string boundary;
    double fq_max = 0.0;
    double fq_err = 0.0;
    double t_at_max = 0.0;
    double fq_eff_max = 0.0;   // collective-model reference
    double ratio = 0.0;
    double nfm_at_peak = 0.0;
    std::string version;

    std::string key() const {
        std::ostringstream os;
        os.precision(17);
        os << dimension << "|" << length << "|" << alpha << "|" << tau << "|" << engine << "|"
           << seed;
        return os.str();
    }

    json to_json() const {
        return json{{"dimension", dimension}, {"length", length},   {"alpha", alpha},
                    {"tau", tau},             {"engine", engine},   {"seed", seed},
                    {"n_traj", n_traj},       {"boundary", boundary}, {"fq_max", fq_max},
                    {"fq_err", fq_err},       {"t_at_max", t_at_max}, {"fq_eff_max", fq_eff_max},
                    {"ratio", ratio},         {"nfm_at_peak", nfm_at_peak}, {"version", version}};
    }

    static SweepRecord from_json(const json& j) {
        SweepRecord r;
        r.dimension = j.at("dimension");
        r.length = j.at("length");
        r.alpha = j.at("alpha");
        r.tau = j.at("tau");
        r.engine = j.at("engine");
        r.seed = j.at("seed");
        r.n_traj = j.at("n_traj");
        r.boundary = j.value("boundary", "periodic");
        r.fq_max = j.at("fq_max");
        r.fq_err = j.value("fq_err", 0.0);
        r.t_at_max = j.at("t_at_max");
        r.fq_eff_max = j.at("fq_eff_max");
        r.ratio = j.at("ratio");
        r.nfm_at_peak = j.value("nfm_at_peak", 0.0);
        r.version = j.value("version", "");
        return r;
    }
};

// Append-only JSONL store keyed on (dimension, L, alpha, tau, engine, seed).
class RecordStore {
  public:
    explicit RecordStore(std::string path) : path_(std::move(path)) { load(); }

    bool contains(const std::string& key) const {
        std::lock_guard<std::mutex> lk(mu_);
        return records_.count(key) > 0;
    }

    std::optional<SweepRecord> find(const std::string& key) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = records_.find(key);
        if (it == records_.end()) return std::nullopt;
        return it->second;
    }

    void append(const SweepRecord& r) {
        std::lock_guard<std::mutex> lk(mu_);
        if (records_.count(r.key())) return;  // idempotent
        records_.emplace(r.key(), r);
        std::ofstream out(path_, std::ios::app);
        if (!out) throw ConfigError("cannot append to record store: " + path_);
        out << r.to_json().dump() << "\n";
    }

    std::vector<SweepRecord> all() const {
        std::lock_guard<std::mutex> lk(mu_);
        std::vector<SweepRecord> v;
        v.reserve(records_.size());
        for (const auto& [k, r] : records_) v.push_back(r);
        return v;
    }

  private:
    void load() {
        std::ifstream in(path_);
        if (!in) return;  // fresh store
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            SweepRecord r = SweepRecord::from_json(json::parse(line));
            records_.emplace(r.key(), r);
        }
    }

    std::string path_;
    std::map<std::string, SweepRecord> records_;
    mutable std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Single-point evaluation: max_t F_Q for one (lattice, tau) under one engine
// ---------------------------------------------------------------------------

struct PointResult {
    double fq_max = 0.0;
    double fq_err = 0.0;
    double t_at_max = 0.0;
    double nfm_at_peak = 0.0;
};

// Scan horizon: past the collective-model peak with margin; FM leakage only
// moves the Floquet peak earlier, never later.
inline int scan_periods(double t_ref_peak, double tau, double margin = 1.7) {
    return std::max(8, static_cast<int>(std::ceil(margin * t_ref_peak / (3.0 * tau))));
}

inline PointResult evaluate_point_ed(const CouplingMatrix& c, double tau, double t_ref_peak,
                                     int ed_cap = kEdDefaultCap) {
    EdEngine eng(c, kPhaseTableDefaultCap, ed_cap);
    FloquetSchedule sched{tau, scan_periods(t_ref_peak, tau), FloquetForm::Segment};
    ObservableSeries series = run_floquet_series(eng, sched, /*with_opt=*/false);
    std::vector<double> t, v;
    for (const auto& p : series.points) {
        t.push_back(p.t);
        v.push_back(p.fq_sx);
    }
    auto [tp, vp] = refined_peak(t, v);
    PointResult r;
    r.fq_max = vp;
    r.t_at_max = tp;
    std::size_t k = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[k]) k = i;
    r.nfm_at_peak = series.points[k].nfm;
    return r;
}

inline PointResult evaluate_point_dtwa(const CouplingMatrix& c, double tau, double t_ref_peak,
                                       int n_traj, std::uint64_t seed) {
    DtwaSeries series = run_dtwa_series(c, tau, scan_periods(t_ref_peak, tau), n_traj, seed);
    auto [tp, vp] = series.refined_peak_fq();
    PointResult r;
    r.fq_max = vp;
    r.t_at_max = tp;
    std::size_t k = 0;
    for (std::size_t i = 1; i < series.points.size(); ++i)
        if (series.points[i].m.fq_sx > series.points[k].m.fq_sx) k = i;
    r.fq_err = series.points[k].m.fq_sx_err;
    r.nfm_at_peak = series.points[k].m.nfm;
    return r;
}

// ---------------------------------------------------------------------------
// tau_s search
// ---------------------------------------------------------------------------

struct TauSearchResult {
    bool found = false;
    double tau_s = 0.0;
    double t_tot = 0.0;                       // evolution time at the F_Q peak at tau_s
    bool pinned_at_grid_top = false;
    bool non_monotone = false;                // ratio curve not monotone in tau
    std::vector<std::pair<double, double>> ratio_curve;  // (tau, ratio), grid order
    double fq_eff_max = 0.0;
};

struct TauSearchTask {
    int dimension = 1;
    int length = 0;
    double alpha = 0.0;
    double threshold = 0.8;
    std::vector<double> tau_grid;
    SweepEngine engine = SweepEngine::Dtwa;
    int n_traj = 1000;
    std::uint64_t seed = 20240901;
    Boundary boundary = Boundary::Periodic;
    int ed_cap = kEdDefaultCap;
    double bisect_rel = 0.05;  // relative tau resolution of the refinement

    SweepRecord record_stub(double tau) const {
        SweepRecord rec;
        rec.dimension = dimension;
        rec.length = length;
        rec.alpha = alpha;
        rec.tau = tau;
        rec.engine = engine_name(engine);
        rec.seed = seed;
        rec.n_traj = engine == SweepEngine::Dtwa ? n_traj : 1;
        rec.boundary = boundary_name(boundary);
        rec.version = kVersionTag;
        return rec;
    }
};

// Largest tau on the grid whose ratio F_Q/F_Q^eff reaches the threshold,
// refined by bisection in log tau. Monotonicity of the ratio curve is checked,
// not assumed; a non-monotone curve is flagged and the largest crossing wins.
// `lookup` lets persisted records short-circuit recomputation (resume);
// `on_record` receives every freshly computed point.
inline TauSearchResult find_tau_s(
    const TauSearchTask& task, const std::function<void(const SweepRecord&)>& on_record = {},
    const std::function<std::optional<SweepRecord>(const std::string&)>& lookup = {}) {
    LatticeSpec spec = task.dimension == 1 ? LatticeSpec::chain(task.length, task.boundary)
                                           : LatticeSpec::square(task.length, task.length,
                                                                 task.boundary);
    ModelParams params{1.0, task.alpha};
    CouplingMatrix c = build_coupling_matrix(spec, params);
    // lambda from the periodic analytics even when dynamics run open: the
    // reference model is the same collective Hamiltonian either way
    const double lambda = lambda_coefficient(c);
    const int n = spec.sites();

    TauSearchResult res;
    std::map<double, std::pair<double, double>> cache;  // tau -> (ratio, t_at_max)
    auto ratio_at = [&](double tau) {
        if (auto it = cache.find(tau); it != cache.end()) return it->second;
        if (lookup) {
            if (auto hit = lookup(task.record_stub(tau).key())) {
                auto out = std::make_pair(hit->ratio, hit->t_at_max);
                cache[tau] = out;
                return out;
            }
        }
        ZmReference ref = zm_reference_peak(n, lambda, params.K, tau);
        PointResult pr = task.engine == SweepEngine::Ed
                             ? evaluate_point_ed(c, tau, ref.t_at_max, task.ed_cap)
                             : evaluate_point_dtwa(c, tau, ref.t_at_max, task.n_traj, task.seed);
        if (on_record) {
            SweepRecord rec = task.record_stub(tau);
            rec.fq_max = pr.fq_max;
            rec.fq_err = pr.fq_err;
            rec.t_at_max = pr.t_at_max;
            rec.fq_eff_max = ref.fq_max;
            rec.ratio = pr.fq_max / ref.fq_max;
            rec.nfm_at_peak = pr.nfm_at_peak;
            on_record(rec);
        }
        auto out = std::make_pair(pr.fq_max / ref.fq_max, pr.t_at_max);
        cache[tau] = out;
        return out;
    };

    std::vector<double> ratios;
    for (double tau : task.tau_grid) {
        auto [r, tp] = ratio_at(tau);
        res.ratio_curve.emplace_back(tau, r);
        ratios.push_back(r);
    }
    // ratio should grow as tau shrinks; flag violations
    for (std::size_t i = 1; i < ratios.size(); ++i)
        if (ratios[i] < ratios[i - 1] - 1e-9) res.non_monotone = true;

    // largest tau (first grid entry, grid is decreasing) with ratio >= threshold
    std::size_t hit = task.tau_grid.size();
    for (std::size_t i = 0; i < ratios.size(); ++i)
        if (ratios[i] >= task.threshold) {
            hit = i;
            break;
        }
    if (hit == task.tau_grid.size()) {
        res.found = false;
        return res;
    }
    if (hit == 0) {
        res.found = true;
        res.pinned_at_grid_top = true;
        res.tau_s = task.tau_grid.front();
        res.t_tot = ratio_at(res.tau_s).second;
        res.fq_eff_max = zm_reference_peak(n, lambda, params.K, res.tau_s).fq_max;
        return res;
    }

    // bisection in log tau between the last miss and the first hit
    double lo = task.tau_grid[hit];      // ratio >= threshold
    double hi = task.tau_grid[hit - 1];  // ratio < threshold
    double t_tot_lo = 0.0;
    {
        auto [r, tp] = ratio_at(lo);
        (void)r;
        t_tot_lo = tp;
    }
    while (hi / lo > 1.0 + task.bisect_rel) {
        const double mid = std::sqrt(lo * hi);
        auto [r, tp] = ratio_at(mid);
        if (r >= task.threshold) {
            lo = mid;
            t_tot_lo = tp;
        } else {
            hi = mid;
        }
    }
    res.found = true;
    res.tau_s = lo;
    res.t_tot = t_tot_lo;
    ZmReference ref = zm_reference_peak(n, lambda, params.K, lo);
    res.fq_eff_max = ref.fq_max;
    return res;
}

// Engine selection rule for sweeps: exact diagonalization up to N = 14,
// trajectories beyond.
inline SweepEngine auto_engine(int n_sites) {
    return n_sites > 14 ? SweepEngine::Dtwa : SweepEngine::Ed;
}

} // namespace ghzsim
