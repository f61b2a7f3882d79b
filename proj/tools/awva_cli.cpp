// awva: command-line driver for single runs, sweeps, and trace utilities.
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "awva/awva.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_numerical = 2;
constexpr int exit_io = 3;

awva::RunConfig config_or_default(const std::string& path) {
    return path.empty() ? awva::RunConfig{} : awva::load_run_config(path);
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw awva::IoError("cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

void write_json(const fs::path& path, const json& j) { awva::write_text_file(path.string(), j.dump(2) + "\n"); }

json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json record_json(const awva::RunRecord& r) {
    return {{"tau_s", r.tau},
            {"snr_db_target", opt_num(r.snr_db_target)},
            {"snr_db_realized", opt_num(r.snr_db_realized)},
            {"snr_star_db", opt_num(r.snr_star_db)},
            {"sigma2", opt_num(r.sigma2)},
            {"wva",
             {{"delta_t0_s", r.fit0.delta_t},
              {"delta_t_tau_s", r.fit_tau.delta_t},
              {"se_t_tau_s", r.fit_tau.se_delta_t},
              {"k1", r.wva.k1},
              {"e1", r.wva.e1},
              {"valid", r.wva.valid}}},
            {"awva",
             {{"theta0", r.theta0},
              {"theta_tau", r.theta_tau},
              {"delta_theta", r.delta_theta},
              {"k2_at_report", r.awva.k2_at_report},
              {"k2_max", r.awva.k2_max},
              {"t_at_max_s", r.awva.t_at_max}}}};
}

/// Sensitivity-vs-SNR plots: one series per tau.
void write_sensitivity_plots(const std::vector<awva::GroupAggregate>& groups, const fs::path& dir) {
    std::map<double, awva::Series> k1, k2;
    for (const auto& g : groups) {
        char name[48];
        std::snprintf(name, sizeof name, "tau = %.3g s", g.tau);
        auto& s2 = k2[g.tau];
        s2.name = name;
        s2.x.push_back(g.snr_db_target);
        s2.y.push_back(g.ensemble.mean_k2);
        s2.yerr.push_back(g.ensemble.e2);
        if (g.cross) {
            auto& s1 = k1[g.tau];
            s1.name = name;
            s1.x.push_back(g.snr_db_target);
            s1.y.push_back(g.cross->k1_bar);
            s1.yerr.push_back(g.cross->e1_bar);
        }
    }
    auto values = [](const std::map<double, awva::Series>& m) {
        std::vector<awva::Series> v;
        for (const auto& [tau, s] : m) v.push_back(s);
        return v;
    };
    if (!k2.empty()) {
        awva::render_svg(values(k2), awva::PlotKind::ErrorBar, (dir / "k2_vs_snr.svg").string(),
                         {"AWVA sensitivity (mean, max deviation)", "SNR (dB)", "K2", true});
    }
    if (!k1.empty()) {
        awva::render_svg(values(k1), awva::PlotKind::ErrorBar, (dir / "k1_vs_snr.svg").string(),
                         {"WVA sensitivity across seeds", "SNR (dB)", "K1", true});
    }
}

int cmd_simulate(const std::string& config, std::optional<double> tau, std::optional<double> snr, std::uint64_t seed,
                 const std::string& out_dir, bool plots) {
    awva::RunConfig cfg = config_or_default(config);
    cfg.plan.validate();
    const double t = tau.value_or(cfg.plan.taus.front());
    awva::validate_weak_regime(awva::CouplingConfig{t}, cfg.plan.selection, cfg.plan.pointer);
    const fs::path dir = prepare_dir(out_dir);

    const awva::RunArtifacts run = awva::simulate_run(cfg.plan, t, snr, seed);
    awva::write_runs_csv({run.record}, (dir / "run.csv").string());
    awva::write_trace_csv(run.wva_tau, (dir / "i1_tau.csv").string());
    awva::write_trace_csv(run.wva_baseline, (dir / "i1_0.csv").string());
    awva::write_trace_csv(run.apd1, (dir / "i21.csv").string());
    awva::write_trace_csv(run.apd2, (dir / "i22.csv").string());
    awva::write_trace_csv(run.theta0.as_trace(), (dir / "theta0.csv").string());
    awva::write_trace_csv(run.theta_tau.as_trace(), (dir / "theta_tau.csv").string());
    std::optional<awva::Trace> k2;
    if (t != 0.0) {
        k2.emplace(cfg.plan.grid, awva::k2_curve(run.theta0, run.theta_tau, t), awva::Unit::Dimensionless);
        awva::write_trace_csv(*k2, (dir / "k2.csv").string());
    }

    json meta = awva::run_metadata(cfg, "simulate");
    meta["run"] = {{"tau_s", t}, {"snr_db", opt_num(snr)}, {"seed", seed}};
    write_json(dir / "metadata.json", meta);

    if (plots || cfg.plots) {
        const std::vector<awva::Series> traces{awva::trace_series(run.wva_baseline, "I1 (tau = 0)"),
                                               awva::trace_series(run.wva_tau, "I1 (tau)")};
        awva::render_svg(traces, awva::PlotKind::Line, (dir / "wva_traces.svg").string(),
                         {"Post-selected pointer", "t (s)", "intensity (I0)"});
        const std::vector<awva::Series> arms{awva::trace_series(run.apd1, "I21"), awva::trace_series(run.apd2, "I22")};
        awva::render_svg(arms, awva::PlotKind::Line, (dir / "awva_arms.svg").string(),
                         {"Detector arms", "t (s)", "intensity (I0)"});
        const std::vector<awva::Series> th{awva::trace_series(run.theta0.as_trace(), "Theta0"),
                                           awva::trace_series(run.theta_tau.as_trace(), "Theta_tau")};
        awva::render_svg(th, awva::PlotKind::Line, (dir / "theta.svg").string(),
                         {"Auto-correlative intensity", "t (s)", "Theta (I0^2 s)"});
        if (k2) {
            const std::vector<awva::Series> ks{awva::trace_series(*k2, "K2(t)")};
            awva::render_svg(ks, awva::PlotKind::Line, (dir / "k2.svg").string(),
                             {"AWVA sensitivity vs integration time", "t (s)", "K2", true});
        }
    }

    std::cout << record_json(run.record).dump(2) << "\n";
    const bool fits_ok = run.record.fit0.converged && run.record.fit_tau.converged;
    return fits_ok ? exit_ok : exit_numerical;
}

int cmd_sweep(const std::string& config, const std::string& out_dir, std::optional<unsigned> threads, bool plots) {
    awva::RunConfig cfg = config_or_default(config);
    if (threads) cfg.plan.threads = *threads;
    cfg.plan.validate();
    const fs::path dir = prepare_dir(out_dir);

    const awva::SweepResult res = awva::sweep(cfg.plan);
    awva::write_runs_csv(res.records, (dir / "runs.csv").string());
    awva::write_aggregates_csv(res.groups, (dir / "aggregates.csv").string());
    awva::write_text_file((dir / "config.resolved").string(), awva::format_config(cfg));
    json meta = awva::run_metadata(cfg, "sweep");
    meta["records"] = res.records.size();
    meta["groups"] = res.groups.size();
    write_json(dir / "metadata.json", meta);
    if (plots || cfg.plots) write_sensitivity_plots(res.groups, dir);

    std::size_t invalid = 0;
    for (const auto& r : res.records) invalid += r.wva.valid ? 0 : 1;
    std::cout << "sweep: " << res.records.size() << " runs, " << res.groups.size() << " groups, " << invalid
              << " invalid WVA runs -> " << dir.string() << "\n";
    if (res.all_non_converged()) {
        std::cerr << "awva: every fit failed to converge\n";
        return exit_numerical;
    }
    return exit_ok;
}

int cmd_fit(const std::string& input, const std::string& config, std::optional<double> t0, bool offset) {
    awva::RunConfig cfg = config_or_default(config);
    if (t0) cfg.plan.pointer.t0 = *t0;
    if (offset) cfg.plan.lm.fit_offset = true;
    const awva::Trace trace = awva::read_trace_csv(input);
    const awva::FitResult f = awva::fit_gaussian(trace, cfg.plan.pointer, cfg.plan.lm);
    json out = {{"input", input},
                {"t0_s", cfg.plan.pointer.t0},
                {"delta_t_s", f.delta_t},
                {"se_delta_t_s", f.se_delta_t},
                {"amplitude", f.amplitude},
                {"width_s", f.width},
                {"offset", f.offset},
                {"converged", f.converged},
                {"iterations", f.iterations},
                {"residual_norm", f.residual_norm}};
    cfg.plan.grid = trace.grid();
    out["metadata"] = awva::run_metadata(cfg, "fit");
    std::cout << out.dump(2) << "\n";
    return f.converged ? exit_ok : exit_numerical;
}

int cmd_theta(const std::string& a, const std::string& b, const std::string& out, std::optional<double> report_time) {
    const awva::Trace ta = awva::read_trace_csv(a);
    const awva::Trace tb = awva::read_trace_csv(b);
    const awva::ThetaCurve th = awva::theta_curve(ta, tb);
    if (!out.empty()) awva::write_trace_csv(th.as_trace(), out);
    json j = {{"input_a", a}, {"input_b", b}, {"theta_final", th.final_value()}};
    if (report_time) j["theta_at_report"] = th.at(*report_time);
    j["metadata"] = {{"version", awva::version}, {"command", "theta"}, {"dt_s", ta.grid().dt()},
                     {"samples", ta.size()}, {"generated_at", awva::utc_timestamp()}};
    std::cout << j.dump(2) << "\n";
    return exit_ok;
}

int cmd_spectrum(const std::string& input, const std::string& out) {
    const awva::Trace t = awva::read_trace_csv(input);
    const awva::Spectrum s = awva::spectrum(t);
    const std::string csv = awva::format_spectrum_csv(s);
    if (out.empty()) {
        std::cout << csv;
        return exit_ok;
    }
    awva::write_text_file(out, csv);
    const json meta = {{"version", awva::version}, {"command", "spectrum"}, {"input", input},
                       {"dt_s", t.grid().dt()},    {"samples", s.samples},  {"fft_length", s.fft_length},
                       {"zero_padded", s.zero_padded}, {"generated_at", awva::utc_timestamp()}};
    awva::write_text_file(out + ".json", meta.dump(2) + "\n");
    return exit_ok;
}

int cmd_report(const std::string& runs, const std::string& config, std::string out_dir, bool plots) {
    awva::RunConfig cfg = config_or_default(config);
    const std::vector<awva::RunRecord> records = awva::read_runs_csv(runs);
    if (records.empty()) throw awva::ConfigError("report: runs file has no records");
    // group axes in order of first appearance
    awva::ExperimentPlan plan = cfg.plan;
    plan.taus.clear();
    plan.snr_targets_db.clear();
    for (const auto& r : records) {
        if (std::find(plan.taus.begin(), plan.taus.end(), r.tau) == plan.taus.end()) plan.taus.push_back(r.tau);
        if (r.snr_db_target && std::find(plan.snr_targets_db.begin(), plan.snr_targets_db.end(), *r.snr_db_target) ==
                                   plan.snr_targets_db.end()) {
            plan.snr_targets_db.push_back(*r.snr_db_target);
        }
    }
    const std::vector<awva::GroupAggregate> groups = awva::aggregate(records, plan);
    if (out_dir.empty()) out_dir = fs::path(runs).parent_path().string();
    if (out_dir.empty()) out_dir = ".";
    const fs::path dir = prepare_dir(out_dir);
    awva::write_aggregates_csv(groups, (dir / "aggregates.csv").string());
    if (plots) write_sensitivity_plots(groups, dir);
    json meta = awva::run_metadata(cfg, "report");
    meta["runs"] = runs;
    write_json(dir / "report_metadata.json", meta);
    std::cout << awva::format_aggregates_csv(groups);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation of weak value amplification and auto-correlative weak value amplification"};
    app.set_version_flag("--version", std::string(awva::version));
    app.require_subcommand(1);

    std::string config, out_dir, input, input_b, out, runs;
    std::optional<double> tau, snr, t0, report_time;
    std::optional<unsigned> threads;
    std::uint64_t seed = 0;
    bool plots = false, offset = false;

    auto* sim = app.add_subcommand("simulate", "One realization: traces, fits, Theta curves");
    sim->add_option("--config", config, "configuration file");
    sim->add_option("--tau", tau, "coupling tau in seconds (default: first configured tau)");
    sim->add_option("--snr-db", snr, "target SNR in dB (omit for a noiseless run)");
    sim->add_option("--seed", seed, "noise seed");
    sim->add_option("--out-dir", out_dir, "output directory")->required();
    sim->add_flag("--plots", plots, "also write SVG plots");

    auto* sw = app.add_subcommand("sweep", "All (tau, SNR, seed) combinations of a plan");
    sw->add_option("--config", config, "configuration file");
    sw->add_option("--out-dir", out_dir, "output directory")->required();
    sw->add_option("--threads", threads, "worker threads (0 = all cores)");
    sw->add_flag("--plots", plots, "also write SVG plots");

    auto* fit = app.add_subcommand("fit", "Gaussian fit of a trace CSV");
    fit->add_option("--input", input, "trace CSV (t_s,value)")->required();
    fit->add_option("--config", config, "configuration file (pointer and fit settings)");
    fit->add_option("--t0", t0, "reference pulse center in seconds");
    fit->add_flag("--offset", offset, "fit a constant baseline");

    auto* th = app.add_subcommand("theta", "Running integral of the product of two traces");
    th->add_option("--input-a", input, "first trace CSV")->required();
    th->add_option("--input-b", input_b, "second trace CSV")->required();
    th->add_option("--out", out, "write the curve as a trace CSV");
    th->add_option("--report-time", report_time, "also report Theta at this time (s)");

    auto* sp = app.add_subcommand("spectrum", "Periodogram of a trace CSV");
    sp->add_option("--input", input, "trace CSV")->required();
    sp->add_option("--out", out, "output CSV (default: stdout)");

    auto* rep = app.add_subcommand("report", "Aggregate tables and plots from a runs CSV");
    rep->add_option("--runs", runs, "runs CSV written by sweep")->required();
    rep->add_option("--config", config, "configuration file (k2_statistic)");
    rep->add_option("--out-dir", out_dir, "output directory (default: next to the runs file)");
    rep->add_flag("--plots", plots, "also write SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*sim) return cmd_simulate(config, tau, snr, seed, out_dir, plots);
        if (*sw) return cmd_sweep(config, out_dir, threads, plots);
        if (*fit) return cmd_fit(input, config, t0, offset);
        if (*th) return cmd_theta(input, input_b, out, report_time);
        if (*sp) return cmd_spectrum(input, out);
        if (*rep) return cmd_report(runs, config, out_dir, plots);
    } catch (const awva::IoError& e) {
        std::cerr << "awva: I/O error: " << e.what() << "\n";
        return exit_io;
    } catch (const awva::DegenerateInputError& e) {
        std::cerr << "awva: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const awva::NumericalError& e) {
        std::cerr << "awva: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const awva::Error& e) {
        std::cerr << "awva: configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "awva: I/O error: " << e.what() << "\n";
        return exit_io;
    }
    return exit_config;
}
