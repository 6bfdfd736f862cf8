// Command-line workbench around the ghzsim library.
//
// Exit codes: 0 success, 2 configuration error, 3 capacity error,
// 4 threshold not found.

#include <atomic>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ghzsim/dicke.hpp"
#include "ghzsim/dtwa.hpp"
#include "ghzsim/exact.hpp"
#include "ghzsim/figures.hpp"
#include "ghzsim/fit.hpp"
#include "ghzsim/lattice.hpp"
#include "ghzsim/open_system.hpp"
#include "ghzsim/spinwave.hpp"
#include "ghzsim/sweep.hpp"
#include "ghzsim/version.hpp"

namespace {

using namespace ghzsim;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNotFound = 4;

struct LatticeArgs {
    int dimension = 1;
    int length = 8;
    int length2 = 0;  // 0: square (L x L) when d=2
    double alpha = 1.0;
    double k = 1.0;
    std::string boundary = "periodic";

    void attach(CLI::App* cmd) {
        cmd->add_option("-d,--dimension", dimension, "lattice dimension (1 or 2)");
        cmd->add_option("-L,--length", length, "lattice length L1")->required();
        cmd->add_option("--length2", length2, "second extent (defaults to L1 for d=2)");
        cmd->add_option("-a,--alpha", alpha, "power-law decay exponent")->required();
        cmd->add_option("-K", k, "nearest-neighbour coupling");
        cmd->add_option("--boundary", boundary, "periodic | open")
            ->check(CLI::IsMember({"periodic", "open"}));
    }

    LatticeSpec spec() const {
        if (dimension != 1 && dimension != 2)
            throw ConfigError("dimension must be 1 or 2");
        Boundary b = boundary == "open" ? Boundary::Open : Boundary::Periodic;
        if (dimension == 1) return LatticeSpec::chain(length, b);
        return LatticeSpec::square(length, length2 > 0 ? length2 : length, b);
    }
    ModelParams params() const { return ModelParams{k, alpha}; }
};

std::vector<std::string> provenance_lines(const std::string& what) {
    return {what, std::string("version=") + kVersionTag};
}

int cmd_model(const LatticeArgs& lat, const std::string& couplings_out,
              const std::string& json_out) {
    LatticeSpec spec = lat.spec();
    ModelParams p = lat.params();
    CouplingMatrix c = build_coupling_matrix(spec, p);
    json out;
    out["N"] = spec.sites();
    out["dimension"] = spec.dimension;
    out["alpha"] = p.alpha;
    out["K"] = p.K;
    out["boundary"] = boundary_name(spec.boundary);
    out["chi_coll"] = chi_collective(c);
    out["tau_crit"] = tau_crit_estimate(c);
    if (spec.sites() >= 3) out["lambda"] = lambda_coefficient(c);
    if (spec.boundary == Boundary::Periodic) {
        out["K0"] = structure_factor(spec, p, {0.0, 0.0}).real();
        out["T0_squared"] = t0_squared(spec, p);
        TauBound tb = tau_bound(spec, p);
        out["tau_bound"] = tb.value;
        out["tau_bound_q_index"] = {tb.q_index[0], tb.q_index[1]};
    }
    out["version"] = kVersionTag;
    if (!couplings_out.empty()) export_coupling_csv(c, couplings_out);
    if (json_out.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(json_out);
        if (!f) throw ConfigError("cannot open " + json_out);
        f << out.dump(2) << "\n";
    }
    return 0;
}

int cmd_ed(const LatticeArgs& lat, double tau, int periods, const std::string& form,
           const std::string& out, const std::string& pm_out, int cap, int table_cap) {
    CouplingMatrix c = build_coupling_matrix(lat.spec(), lat.params());
    EdEngine eng(c, table_cap, cap);
    FloquetSchedule sched{tau, periods,
                          form == "pulsed" ? FloquetForm::Pulsed : FloquetForm::Segment};
    ObservableSeries series = run_floquet_series(eng, sched);
    std::ostringstream what;
    what << "engine=ed N=" << c.sites() << " alpha=" << lat.alpha << " K=" << lat.k
         << " tau=" << tau << " periods=" << periods << " form=" << form
         << " boundary=" << lat.boundary;
    export_series_csv(series, out, provenance_lines(what.str()));
    if (!pm_out.empty()) {
        // P(m) snapshot at the F_Q^{Sx} peak
        std::size_t kpk = 0;
        for (std::size_t i = 1; i < series.points.size(); ++i)
            if (series.points[i].fq_sx > series.points[kpk].fq_sx) kpk = i;
        PureState s = initial_css(c.sites(), cap);
        for (std::size_t i = 0; i < kpk; ++i) floquet_period(eng, s, sched);
        export_pm_csv(sx_distribution(s), c.sites(), pm_out, provenance_lines(what.str()));
    }
    return 0;
}

int cmd_zm(const LatticeArgs& lat, double tau, int periods, const std::string& out) {
    LatticeSpec spec = lat.spec();
    ModelParams p = lat.params();
    const double lambda = lambda_coefficient(spec, p);
    const int n = spec.sites();
    ZmSeries zs = zm_series(n, lambda, p.K, tau, periods);
    CsvWriter w(out);
    std::ostringstream what;
    what << "engine=zm N=" << n << " lambda=" << lambda << " K=" << p.K << " tau=" << tau;
    for (const auto& line : provenance_lines(what.str())) w.comment(line);
    w.comment("chi_eff=" + format_g17(chi_eff(n, lambda, p.K, tau)));
    w.header({"t", "FQ_Jx"});
    for (std::size_t i = 0; i < zs.t.size(); ++i) w.row(zs.t[i], zs.fq_jx[i]);
    return 0;
}

int cmd_dtwa(const LatticeArgs& lat, double tau, int periods, int n_traj, std::uint64_t seed,
             int stride, const std::string& out, const std::string& checkpoint_out,
             const std::string& resume_in) {
    CouplingMatrix c = build_coupling_matrix(lat.spec(), lat.params());
    TrajectoryEnsemble e = resume_in.empty() ? sample_initial(c.sites(), n_traj, seed)
                                             : load_checkpoint(resume_in);
    if (e.sites() != c.sites()) throw ConfigError("checkpoint does not match lattice");
    DtwaSeries series;
    series.points.push_back({3.0 * tau * e.period_index, estimate_observables(e)});
    const std::int64_t first = e.period_index + 1;
    for (std::int64_t p = first; p <= first + periods - 1; ++p) {
        period_step_inplace(e, tau, c);
        if ((p - first + 1) % stride == 0 || p == first + periods - 1)
            series.points.push_back({3.0 * tau * p, estimate_observables(e)});
    }
    std::ostringstream what;
    what << "engine=dtwa N=" << c.sites() << " alpha=" << lat.alpha << " tau=" << tau
         << " n_traj=" << e.n_traj() << " seed=" << e.seed << " boundary=" << lat.boundary;
    export_dtwa_csv(series, out, provenance_lines(what.str()));
    if (!checkpoint_out.empty()) save_checkpoint(e, checkpoint_out);
    return 0;
}

int cmd_spinwave(const LatticeArgs& lat, double tau, const std::string& spectrum_out,
                 const std::string& nfm_out, double t_max, int t_points,
                 const std::string& scaling_out, const std::vector<double>& scaling_alphas,
                 const std::vector<int>& scaling_lengths) {
    LatticeSpec spec = lat.spec();
    ModelParams p = lat.params();
    if (!spectrum_out.empty() || !nfm_out.empty()) {
        SpinWaveSpectrum sp = build_spectrum(spec, p, tau);
        std::ostringstream what;
        what << "spinwave N=" << spec.sites() << " alpha=" << p.alpha << " tau=" << tau;
        if (!spectrum_out.empty())
            export_spectrum_csv(sp, spectrum_out, provenance_lines(what.str()));
        if (!nfm_out.empty()) {
            CsvWriter w(nfm_out);
            for (const auto& line : provenance_lines(what.str())) w.comment(line);
            w.header({"t", "NFM"});
            for (int i = 0; i < t_points; ++i) {
                const double t = t_max * i / (t_points - 1);
                w.row(t, total_nfm(sp, t));
            }
        }
    }
    if (!scaling_out.empty()) {
        std::vector<std::pair<double, SlopeEstimate>> rows;
        for (double a : scaling_alphas)
            rows.emplace_back(a, tau_bound_slope_study(spec.dimension, a, scaling_lengths));
        export_scaling_csv(rows, scaling_out,
                           provenance_lines("tau_bound scaling study d=" +
                                            std::to_string(spec.dimension)));
    }
    return 0;
}

int cmd_lindblad(int n, double alpha, double k_hz, double tau_ms, std::vector<double> rates_hz,
                 const std::string& out, const std::string& parity_out, double parity_rate_hz,
                 const std::string& parity_kind, int periods, int stride, int cap) {
    PhysicalUnits units{k_hz, tau_ms * 1e-3};
    units.validate();
    const double tau = units.k_tau();
    LatticeSpec spec = LatticeSpec::chain(n);
    ModelParams p{1.0, alpha};
    CouplingMatrix c = build_coupling_matrix(spec, p);
    const double lambda = lambda_coefficient(c);
    int scan = periods;
    if (scan <= 0) {
        ZmReference ref = zm_reference_peak(n, lambda, 1.0, tau);
        scan = scan_periods(ref.t_at_max, tau, 1.4);
    }
    std::set<int> evals;
    for (int q = 0; q <= scan; q += stride) evals.insert(q);
    evals.insert(scan);

    std::vector<RateScanRow> rows;
    for (NoiseKind kind : {NoiseKind::LocalDephasing, NoiseKind::GlobalDephasing}) {
        for (double rate : rates_hz) {
            NoiseSpec noise{kind, units.dimensionless_rate(rate)};
            auto series = run_open_series(c, noise, tau, scan, evals, NoiseFrame::Lab, cap);
            std::size_t best = 0;
            for (std::size_t i = 1; i < series.size(); ++i)
                if (series[i].fq_sx > series[best].fq_sx) best = i;
            rows.push_back({rate, kind, series[best].fq_sx, units.time_seconds(series[best].t)});
        }
    }
    std::ostringstream what;
    what << "lindblad N=" << n << " alpha=" << alpha << " K=" << k_hz << "Hz tau=" << tau_ms
         << "ms periods=" << scan;
    export_rate_scan_csv(rows, out, provenance_lines(what.str()));

    if (!parity_out.empty()) {
        NoiseKind kind = parity_kind == "global" ? NoiseKind::GlobalDephasing
                                                 : NoiseKind::LocalDephasing;
        NoiseSpec noise{kind, units.dimensionless_rate(parity_rate_hz)};
        auto series = run_open_series(c, noise, tau, scan, evals, NoiseFrame::Lab, cap);
        std::size_t best = 0;
        for (std::size_t i = 1; i < series.size(); ++i)
            if (series[i].fq_sx > series[best].fq_sx) best = i;
        const int peak_period = static_cast<int>(std::lround(series[best].t / (3.0 * tau)));
        DiagonalLindbladSegment seg(c, noise, cap);
        DensityMatrix rho = pure_density(initial_css(n, cap));
        for (int q = 0; q < peak_period; ++q) pulsed_period_open(rho, seg, tau);
        std::vector<double> thetas;
        const int npts = 181;
        for (int i = 0; i < npts; ++i) thetas.push_back(4.0 * M_PI * i / ((npts - 1) * n));
        auto scanv = parity_scan(rho, n, thetas);
        export_parity_csv(thetas, scanv, parity_out, provenance_lines(what.str()));
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& summary_out) {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("cannot open config: " + config_path);
    json j;
    f >> j;
    SweepConfig cfg = SweepConfig::from_json(j);
    RecordStore store(cfg.output);

    struct SummaryRow {
        double alpha;
        int length;
        bool found;
        double tau_s, t_tot, fq_eff;
        bool non_monotone, pinned;
    };

    // independent sweep points through a bounded worker pool; results land in
    // task order so outputs are deterministic regardless of scheduling
    std::vector<TauSearchTask> tasks;
    for (double alpha : cfg.alphas) {
        for (int l : cfg.lengths) {
            TauSearchTask task;
            task.dimension = cfg.dimension;
            task.length = l;
            task.alpha = alpha;
            task.threshold = cfg.threshold;
            task.tau_grid = cfg.tau_grid;
            const int n = cfg.dimension == 1 ? l : l * l;
            task.engine = cfg.engine == "auto" ? auto_engine(n) : engine_from_name(cfg.engine);
            task.n_traj = cfg.n_traj;
            task.seed = cfg.seed;
            task.boundary = cfg.boundary;
            tasks.push_back(task);
        }
    }
    std::vector<TauSearchResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            results[i] = find_tau_s(
                tasks[i], [&](const SweepRecord& rec) { store.append(rec); },
                [&](const std::string& key) { return store.find(key); });
        }
    };
    const int n_workers = std::max(1, std::min<int>(cfg.max_workers,
                                                    static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<SummaryRow> summary;
    bool any_not_found = false;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& task = tasks[i];
        const auto& r = results[i];
        if (!r.found) any_not_found = true;
        summary.push_back({task.alpha, task.length, r.found, r.tau_s, r.t_tot, r.fq_eff_max,
                           r.non_monotone, r.pinned_at_grid_top});
        std::cerr << "alpha=" << task.alpha << " L=" << task.length
                  << (r.found ? " tau_s=" + format_g17(r.tau_s) : " threshold-not-found")
                  << (r.non_monotone ? " [non-monotone ratio curve]" : "") << "\n";
    }
    if (!summary_out.empty()) {
        CsvWriter w(summary_out);
        for (const auto& line : provenance_lines("sweep summary threshold=" +
                                                 format_g17(cfg.threshold)))
            w.comment(line);
        w.comment("seed=" + std::to_string(cfg.seed) + " n_traj=" + std::to_string(cfg.n_traj) +
                  " engine=" + cfg.engine + " boundary=" + std::string(boundary_name(cfg.boundary)));
        w.header({"alpha", "L", "found", "tau_s", "t_tot", "FQ_eff_max", "non_monotone",
                  "pinned_at_grid_top"});
        for (const auto& s : summary)
            w.row(s.alpha, s.length, s.found ? 1 : 0, s.tau_s, s.t_tot, s.fq_eff,
                  s.non_monotone ? 1 : 0, s.pinned ? 1 : 0);
    }
    return any_not_found ? kExitNotFound : 0;
}

int cmd_fit(const std::string& summary_csv, const std::string& mode, const std::string& model_name,
            bool exclude_smallest, const std::string& out) {
    std::ifstream f(summary_csv);
    if (!f) throw ConfigError("cannot open summary: " + summary_csv);
    std::string line;
    std::vector<std::string> cols;
    struct Row {
        double alpha, tau_s, t_tot;
        int length, found;
    };
    std::vector<Row> rows;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<std::string> fields;
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        if (cols.empty()) {
            cols = fields;
            continue;
        }
        Row r{};
        r.alpha = std::stod(fields[0]);
        r.length = std::stoi(fields[1]);
        r.found = std::stoi(fields[2]);
        r.tau_s = std::stod(fields[3]);
        r.t_tot = std::stod(fields[4]);
        rows.push_back(r);
    }
    // group by alpha
    std::map<double, std::vector<Row>> groups;
    for (const auto& r : rows)
        if (r.found) groups[r.alpha].push_back(r);
    json out_json = json::array();
    FitModel model = model_name == "power-law-x-log" ? FitModel::PowerLawTimesLog
                                                     : FitModel::PowerLaw;
    for (auto& [alpha, g] : groups) {
        std::sort(g.begin(), g.end(), [](const Row& a, const Row& b) { return a.length < b.length; });
        std::vector<FitPoint> pts;
        for (const auto& r : g)
            pts.push_back({static_cast<double>(r.length), mode == "t_tot" ? r.t_tot : r.tau_s, 0.0});
        if (exclude_smallest && pts.size() > 3) pts.erase(pts.begin());
        if (pts.size() < 3) continue;
        FitResult fit = fit_power_law(pts, model);
        json jf;
        jf["alpha"] = alpha;
        jf["mode"] = mode;
        jf["model"] = fit_model_name(fit.model);
        jf["slope"] = fit.slope;
        jf["slope_err"] = std::sqrt(fit.cov_ss);
        jf["intercept"] = fit.intercept;
        jf["residual_norm"] = fit.residual_norm;
        jf["window"] = {fit.x_min, fit.x_max};
        out_json.push_back(jf);
    }
    if (out.empty()) {
        std::cout << out_json.dump(2) << "\n";
    } else {
        std::ofstream of(out);
        if (!of) throw ConfigError("cannot open " + out);
        of << out_json.dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Floquet-engineered GHZ-like state workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ghzsim::kVersionTag));

    // --- model ---
    LatticeArgs model_lat;
    std::string model_couplings, model_json;
    auto* model = app.add_subcommand("model", "dump couplings and model scalars");
    model_lat.attach(model);
    model->add_option("--couplings-out", model_couplings, "coupling matrix CSV path");
    model->add_option("--json-out", model_json, "scalar dump JSON path (default: stdout)");

    // --- ed ---
    LatticeArgs ed_lat;
    double ed_tau = 0.1;
    int ed_periods = 50, ed_cap = kEdDefaultCap, ed_table_cap = kPhaseTableDefaultCap;
    std::string ed_form = "segment", ed_out = "ed_series.csv", ed_pm;
    auto* ed = app.add_subcommand("ed", "exact Floquet evolution (observable series)");
    ed_lat.attach(ed);
    ed->add_option("--tau", ed_tau, "pulse separation (units 1/K)")->required();
    ed->add_option("--periods", ed_periods, "number of Floquet periods")->required();
    ed->add_option("--form", ed_form, "segment | pulsed")
        ->check(CLI::IsMember({"segment", "pulsed"}));
    ed->add_option("-o,--out", ed_out, "series CSV path");
    ed->add_option("--pm-out", ed_pm, "P(m) snapshot CSV at the QFI peak");
    ed->add_option("--cap", ed_cap, "state-vector size cap");
    ed->add_option("--phase-table-cap", ed_table_cap, "max N with precomputed phase table");

    // --- zm ---
    LatticeArgs zm_lat;
    double zm_tau = 0.1;
    int zm_periods = 100;
    std::string zm_out = "zm_series.csv";
    auto* zm = app.add_subcommand("zm", "collective-model evolution in the Dicke basis");
    zm_lat.attach(zm);
    zm->add_option("--tau", zm_tau, "pulse separation (units 1/K)")->required();
    zm->add_option("--periods", zm_periods, "number of stroboscopic points")->required();
    zm->add_option("-o,--out", zm_out, "series CSV path");

    // --- dtwa ---
    LatticeArgs dtwa_lat;
    double dtwa_tau = 0.1;
    int dtwa_periods = 50, dtwa_traj = 1000, dtwa_stride = 1;
    std::uint64_t dtwa_seed = 20240901;
    std::string dtwa_out = "dtwa_series.csv", dtwa_ckpt_out, dtwa_resume;
    auto* dtwa = app.add_subcommand("dtwa", "discrete truncated Wigner evolution");
    dtwa_lat.attach(dtwa);
    dtwa->add_option("--tau", dtwa_tau, "pulse separation (units 1/K)")->required();
    dtwa->add_option("--periods", dtwa_periods, "number of Floquet periods")->required();
    dtwa->add_option("--ntraj", dtwa_traj, "trajectory count");
    dtwa->add_option("--seed", dtwa_seed, "master seed");
    dtwa->add_option("--stride", dtwa_stride, "record every k-th period");
    dtwa->add_option("-o,--out", dtwa_out, "series CSV path");
    dtwa->add_option("--checkpoint-out", dtwa_ckpt_out, "write ensemble checkpoint");
    dtwa->add_option("--resume", dtwa_resume, "resume from ensemble checkpoint");

    // --- spinwave ---
    LatticeArgs sw_lat;
    double sw_tau = 0.05, sw_tmax = 10.0;
    int sw_tpoints = 200;
    std::string sw_spectrum, sw_nfm, sw_scaling;
    std::vector<double> sw_scaling_alphas;
    std::vector<int> sw_scaling_lengths;
    auto* sw = app.add_subcommand("spinwave", "Bogoliubov spectrum, N_FM series, scaling study");
    sw_lat.attach(sw);
    sw->add_option("--tau", sw_tau, "pulse separation (units 1/K)");
    sw->add_option("--spectrum-out", sw_spectrum, "per-mode spectrum CSV");
    sw->add_option("--nfm-out", sw_nfm, "N_FM(t) series CSV");
    sw->add_option("--tmax", sw_tmax, "N_FM series horizon (units 1/K)");
    sw->add_option("--tpoints", sw_tpoints, "N_FM series points");
    sw->add_option("--scaling-out", sw_scaling, "tau_bound scaling study CSV");
    sw->add_option("--scaling-alphas", sw_scaling_alphas, "alpha list for the scaling study");
    sw->add_option("--scaling-lengths", sw_scaling_lengths, "L list for the scaling study");

    // --- lindblad ---
    int lb_n = 10, lb_periods = 0, lb_stride = 2, lb_cap = kOpenSystemDefaultCap;
    double lb_alpha = 1.0, lb_khz = 560.0, lb_tau_ms = 0.18, lb_parity_rate = 10.0;
    std::vector<double> lb_rates{1.0, 3.0, 10.0, 30.0};
    std::string lb_out = "lindblad_rates.csv", lb_parity_out, lb_parity_kind = "local";
    auto* lb = app.add_subcommand("lindblad", "dissipative pulsed evolution (rate scan)");
    lb->add_option("-N,--sites", lb_n, "chain length");
    lb->add_option("-a,--alpha", lb_alpha, "power-law exponent");
    lb->add_option("--K-hz", lb_khz, "coupling in Hz");
    lb->add_option("--tau-ms", lb_tau_ms, "pulse separation in ms");
    lb->add_option("--rates-hz", lb_rates, "decoherence rates in Hz");
    lb->add_option("--periods", lb_periods, "periods to scan (0 = auto)");
    lb->add_option("--stride", lb_stride, "QFI evaluation stride in periods");
    lb->add_option("--cap", lb_cap, "density-matrix size cap");
    lb->add_option("-o,--out", lb_out, "rate scan CSV");
    lb->add_option("--parity-out", lb_parity_out, "parity scan CSV at the QFI peak");
    lb->add_option("--parity-rate-hz", lb_parity_rate, "rate for the parity scan");
    lb->add_option("--parity-kind", lb_parity_kind, "local | global")
        ->check(CLI::IsMember({"local", "global"}));

    // --- sweep ---
    std::string sweep_config, sweep_summary = "sweep_summary.csv";
    auto* sweep = app.add_subcommand("sweep", "tau_s threshold search over (L, alpha)");
    sweep->add_option("-c,--config", sweep_config, "sweep config JSON")->required();
    sweep->add_option("--summary-out", sweep_summary, "tau_s summary CSV");

    // --- fit ---
    std::string fit_summary, fit_mode = "tau_s", fit_model = "power-law", fit_out;
    bool fit_excl = true;
    auto* fit = app.add_subcommand("fit", "power-law fits over a sweep summary");
    fit->add_option("-s,--summary", fit_summary, "sweep summary CSV")->required();
    fit->add_option("--mode", fit_mode, "tau_s | t_tot")
        ->check(CLI::IsMember({"tau_s", "t_tot"}));
    fit->add_option("--model", fit_model, "power-law | power-law-x-log")
        ->check(CLI::IsMember({"power-law", "power-law-x-log"}));
    fit->add_flag("--exclude-smallest,!--no-exclude-smallest", fit_excl,
                  "drop the smallest L before fitting");
    fit->add_option("-o,--out", fit_out, "fit result JSON (default: stdout)");

    // --- figure ---
    std::string fig_name;
    FigureConfig fig_cfg;
    auto* fig = app.add_subcommand("figure", "reproduce a reference-figure data bundle");
    fig->add_option("-n,--name", fig_name, "fig2a|fig2b|fig3a|fig3b|fig4|fig5")->required();
    fig->add_option("-o,--out-dir", fig_cfg.out_dir, "output directory");
    fig->add_option("--seed", fig_cfg.seed, "master seed");
    fig->add_option("--ntraj", fig_cfg.n_traj, "trajectory count");
    fig->add_option("--fig5-sites", fig_cfg.fig5_sites, "system size for fig5");

    try {
        app.parse(argc, argv);
        if (model->parsed()) return cmd_model(model_lat, model_couplings, model_json);
        if (ed->parsed())
            return cmd_ed(ed_lat, ed_tau, ed_periods, ed_form, ed_out, ed_pm, ed_cap, ed_table_cap);
        if (zm->parsed()) return cmd_zm(zm_lat, zm_tau, zm_periods, zm_out);
        if (dtwa->parsed())
            return cmd_dtwa(dtwa_lat, dtwa_tau, dtwa_periods, dtwa_traj, dtwa_seed, dtwa_stride,
                            dtwa_out, dtwa_ckpt_out, dtwa_resume);
        if (sw->parsed())
            return cmd_spinwave(sw_lat, sw_tau, sw_spectrum, sw_nfm, sw_tmax, sw_tpoints,
                                sw_scaling, sw_scaling_alphas, sw_scaling_lengths);
        if (lb->parsed())
            return cmd_lindblad(lb_n, lb_alpha, lb_khz, lb_tau_ms, lb_rates, lb_out, lb_parity_out,
                                lb_parity_rate, lb_parity_kind, lb_periods, lb_stride, lb_cap);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_summary);
        if (fit->parsed()) return cmd_fit(fit_summary, fit_mode, fit_model, fit_excl, fit_out);
        if (fig->parsed()) {
            ghzsim::reproduce_figure(fig_name, fig_cfg);
            return 0;
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ghzsim::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const ghzsim::GeometryError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ghzsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
