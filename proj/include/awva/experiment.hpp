#pragma once

// Monte Carlo orchestration: single runs, seed ensembles, cross-seed statistics
// and full parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "awva/core.hpp"
#include "awva/fit.hpp"
#include "awva/noise.hpp"
#include "awva/signal_model.hpp"
#include "awva/theta.hpp"

namespace awva {

class GroupingError : public Error {
public:
    using Error::Error;
};

enum class NoisePairing { SharedTrace, IndependentTraces };

/// Which per-seed K2 value feeds the ensemble statistics.
enum class K2Statistic { AtReport, Max };

struct ExperimentPlan {
    TimeGrid grid{0.0, 3.0e-3, 1.0e-7};
    PointerConfig pointer{};
    SelectionConfig selection{};
    std::vector<double> taus{3e-9, 6e-9, 9e-9, 12e-9, 15e-9};
    std::vector<double> snr_targets_db{6.6, 1.4, -3.3, -6.3};
    std::vector<std::uint64_t> seeds{0, 100, 200, 300, 400, 500, 600};
    Injection injection = Injection::AfterBS;
    NoisePairing pairing = NoisePairing::SharedTrace;
    double report_time = 1.5e-3;
    bool include_noiseless = true;
    K2Statistic k2_statistic = K2Statistic::AtReport;
    LmSettings lm{};
    unsigned threads = 0;  // 0 = hardware concurrency

    void validate() const {
        validate_pointer_and_grid();
        awva::validate(selection);
        if (taus.empty()) throw ConfigError("coupling.taus must not be empty");
        if (seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
        for (double tau : taus) {
            if (!std::isfinite(tau)) throw ConfigError("coupling.taus entries must be finite");
            validate_weak_regime(CouplingConfig{tau}, selection, pointer);
        }
        for (double snr : snr_targets_db) {
            if (std::isnan(snr) || snr == -std::numeric_limits<double>::infinity()) {
                throw ConfigError("noise.snr_targets_db entries must be finite (or +inf for no noise)");
            }
        }
        if (!grid.contains(report_time)) throw ConfigError("experiment.report_time must lie within the time grid");
        (void)grid.index_of(report_time);
        if (lm.max_iterations <= 0) throw ConfigError("experiment.max_iterations must be positive");
    }

private:
    void validate_pointer_and_grid() const { awva::validate(pointer, grid); }
};

struct RunRecord {
    static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    double tau = 0.0;
    std::optional<double> snr_db_target;  // empty for the noiseless baseline
    std::optional<double> snr_db_realized;
    std::optional<double> snr_star_db;
    std::optional<std::uint64_t> seed;
    std::optional<double> sigma2;

    FitResult fit0;
    FitResult fit_tau;
    SensitivityRecord wva;

    double theta0 = nan;
    double theta_tau = nan;
    double delta_theta = nan;
    SensitivityRecord awva;

    [[nodiscard]] bool noiseless() const { return !snr_db_target.has_value(); }
};

namespace detail {

inline bool is_noiseless(std::optional<double> snr) { return !snr || *snr == std::numeric_limits<double>::infinity(); }

struct DetectorNoise {
    Trace wva_tau;
    Trace wva_baseline;
    Trace apd1;
    Trace apd2;
};

/// Tau-run WVA and APD1 draw stream 0 (the seed itself); the WVA baseline and APD2
/// draw stream 1 when traces are independent.
inline DetectorNoise make_noise(const ExperimentPlan& plan, double sigma2, std::uint64_t seed) {
    Trace primary = gen_noise(plan.grid, NoiseSpec{sigma2, std::nullopt, seed, plan.injection});
    Trace secondary = plan.pairing == NoisePairing::SharedTrace
                          ? primary
                          : gen_noise(plan.grid, NoiseSpec{sigma2, std::nullopt, derive_seed(seed, 1), plan.injection});
    // noise entering before the splitter is halved along with the signal
    const double arm = plan.injection == Injection::BeforeBS ? 0.5 : 1.0;
    return {primary, secondary, scaled(primary, arm), scaled(secondary, arm)};
}

inline FitResult safe_fit(const Trace& y, const PointerConfig& p, const LmSettings& lm) {
    try {
        return fit_gaussian(y, p, lm);
    } catch (const Error&) {
        return FitResult::failed();
    }
}

}  // namespace detail

/// Detector traces of one realization (after noise injection) with their Theta curves.
struct RunArtifacts {
    RunRecord record;
    Trace wva_tau;       // post-selected intensity, coupling tau
    Trace wva_baseline;  // post-selected intensity, tau = 0
    Trace apd1;          // I21 arm (shifted)
    Trace apd2;          // I22 arm (reference)
    ThetaCurve theta0;
    ThetaCurve theta_tau;
};

/// One realization: synthesize, calibrate and inject noise, run both estimators.
/// A missing or +inf SNR means no noise is injected.
inline RunArtifacts simulate_run(const ExperimentPlan& plan, double tau, std::optional<double> snr_db_target,
                                 std::uint64_t seed) {
    const SchemeOutputs out = synth_outputs(plan.grid, plan.pointer, plan.selection, CouplingConfig{tau});
    const SchemeOutputs base = synth_outputs(plan.grid, plan.pointer, plan.selection, CouplingConfig{0.0});

    RunRecord rec;
    rec.tau = tau;

    Trace i1_tau = out.i1, i1_0 = base.i1, a1 = out.i21, a2 = out.i22;
    if (!detail::is_noiseless(snr_db_target)) {
        const double sigma2 = calibrate_sigma(*snr_db_target, out.i1, plan.grid, seed);
        const detail::DetectorNoise n = detail::make_noise(plan, sigma2, seed);
        rec.snr_db_target = snr_db_target;
        rec.seed = seed;
        rec.sigma2 = sigma2;
        rec.snr_db_realized = snr_db(out.i1, n.wva_tau);
        rec.snr_star_db = snr_db(out.i21, n.apd1);
        i1_tau = inject(i1_tau, n.wva_tau);
        i1_0 = inject(i1_0, n.wva_baseline);
        a1 = inject(a1, n.apd1);
        a2 = inject(a2, n.apd2);
    }

    rec.fit0 = detail::safe_fit(i1_0, plan.pointer, plan.lm);
    rec.fit_tau = detail::safe_fit(i1_tau, plan.pointer, plan.lm);
    try {
        rec.wva = k1_sensitivity(rec.fit0, rec.fit_tau, tau);
    } catch (const Error&) {
        rec.wva = SensitivityRecord{};
    }

    ThetaCurve th0 = theta_curve(a2, a2);
    ThetaCurve th_tau = theta_curve(a1, a2);
    const std::size_t at = plan.grid.index_of(plan.report_time);
    rec.theta0 = th0[at];
    rec.theta_tau = th_tau[at];
    rec.delta_theta = rec.theta0 - rec.theta_tau;
    try {
        rec.awva = k2_sensitivity(th0, th_tau, tau, plan.report_time);
    } catch (const Error&) {
        rec.awva = SensitivityRecord{};
    }
    return {rec, std::move(i1_tau), std::move(i1_0), std::move(a1), std::move(a2), std::move(th0), std::move(th_tau)};
}

inline RunRecord run_single(const ExperimentPlan& plan, double tau, std::optional<double> snr_db_target,
                            std::uint64_t seed) {
    return simulate_run(plan, tau, snr_db_target, seed).record;
}

inline RunRecord run_noiseless(const ExperimentPlan& plan, double tau) { return run_single(plan, tau, std::nullopt, 0); }

struct EnsembleStats {
    double mean_k2 = 0.0;
    double e2 = 0.0;  // max |mean - K2(i)|
    std::vector<double> per_seed;
};

/// Mean and maximum absolute deviation of per-seed sensitivities.
inline EnsembleStats ensemble_stats(std::vector<double> per_seed) {
    if (per_seed.empty()) throw ConfigError("ensemble: at least one seed is required");
    EnsembleStats s;
    s.mean_k2 = std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / static_cast<double>(per_seed.size());
    for (double k : per_seed) s.e2 = std::max(s.e2, std::abs(s.mean_k2 - k));
    s.per_seed = std::move(per_seed);
    return s;
}

inline double k2_value(const RunRecord& r, K2Statistic stat) {
    return stat == K2Statistic::AtReport ? r.awva.k2_at_report : r.awva.k2_max;
}

inline EnsembleStats run_ensemble(const ExperimentPlan& plan, double tau, double snr_db) {
    if (plan.seeds.empty()) throw ConfigError("ensemble: experiment.seeds must not be empty");
    std::vector<double> k2;
    k2.reserve(plan.seeds.size());
    for (std::uint64_t seed : plan.seeds) k2.push_back(k2_value(run_single(plan, tau, snr_db, seed), plan.k2_statistic));
    return ensemble_stats(std::move(k2));
}

struct CrossSeedStats {
    double mean_dt0 = 0.0, e_t0_bar = 0.0;
    double mean_dt_tau = 0.0, e_t_tau_bar = 0.0;
    double delta_dt_bar = 0.0;
    double k1_bar = 0.0, e1_bar = 0.0;
    double mean_theta0 = 0.0, e_c0_bar = 0.0;
    double mean_theta_tau = 0.0, e_c_tau_bar = 0.0;
    double delta_theta_bar = 0.0;
    double k2_bar_bar = 0.0, e2_bar = 0.0;
};

/// Optional display rounding applied to every mean before it is used further
/// (deviations, differences). Leave empty for exact arithmetic.
struct CrossSeedOptions {
    std::optional<int> time_sig_digits;
    std::optional<int> theta_sig_digits;
};

inline double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    const double e = std::floor(std::log10(std::abs(x)));
    const double scale = std::pow(10.0, static_cast<double>(digits - 1) - e);
    return std::round(x * scale) / scale;
}

namespace detail {

struct MeanDev {
    double mean;
    double max_dev;
};

template <class Get>
MeanDev mean_and_max_dev(std::span<const RunRecord> rs, Get get, std::optional<int> digits) {
    // offsets from the first value keep the mean of identical values exact
    const double ref = get(rs.front());
    double sum = 0.0;
    for (const auto& r : rs) sum += get(r) - ref;
    double mean = ref + sum / static_cast<double>(rs.size());
    if (digits) mean = round_sig(mean, *digits);
    double dev = 0.0;
    for (const auto& r : rs) dev = std::max(dev, std::abs(mean - get(r)));
    return {mean, dev};
}

}  // namespace detail

/// Multi-measurement averages across seeds: means, max-deviation errors, and the
/// sensitivities formed from differences of the means.
inline CrossSeedStats cross_seed_stats(std::span<const RunRecord> records, const CrossSeedOptions& opt = {}) {
    if (records.size() < 2) throw ConfigError("cross_seed_stats: need at least 2 records");
    const RunRecord& first = records.front();
    for (const auto& r : records) {
        if (r.tau != first.tau || r.snr_db_target != first.snr_db_target) {
            throw GroupingError("cross_seed_stats: records do not share (tau, snr)");
        }
    }
    if (first.tau == 0.0) throw NumericalError("cross_seed_stats: tau must be nonzero");
    const double tau = first.tau;

    CrossSeedStats s;
    const auto t0 = detail::mean_and_max_dev(records, [](const RunRecord& r) { return r.fit0.delta_t; }, opt.time_sig_digits);
    const auto tt = detail::mean_and_max_dev(records, [](const RunRecord& r) { return r.fit_tau.delta_t; }, opt.time_sig_digits);
    s.mean_dt0 = t0.mean;
    s.e_t0_bar = t0.max_dev;
    s.mean_dt_tau = tt.mean;
    s.e_t_tau_bar = tt.max_dev;
    s.delta_dt_bar = s.mean_dt_tau - s.mean_dt0;
    s.k1_bar = s.delta_dt_bar / tau;
    s.e1_bar = (s.e_t0_bar + s.e_t_tau_bar) / std::abs(tau);

    const auto c0 = detail::mean_and_max_dev(records, [](const RunRecord& r) { return r.theta0; }, opt.theta_sig_digits);
    const auto ct = detail::mean_and_max_dev(records, [](const RunRecord& r) { return r.theta_tau; }, opt.theta_sig_digits);
    s.mean_theta0 = c0.mean;
    s.e_c0_bar = c0.max_dev;
    s.mean_theta_tau = ct.mean;
    s.e_c_tau_bar = ct.max_dev;
    s.delta_theta_bar = s.mean_theta0 - s.mean_theta_tau;
    s.k2_bar_bar = s.delta_theta_bar / tau;
    s.e2_bar = (s.e_c0_bar + s.e_c_tau_bar) / std::abs(tau);
    return s;
}

struct GroupAggregate {
    double tau = 0.0;
    double snr_db_target = 0.0;
    std::size_t n_runs = 0;
    std::size_t n_invalid_wva = 0;
    EnsembleStats ensemble;
    std::optional<CrossSeedStats> cross;  // needs >= 2 seeds
};

struct SweepResult {
    std::vector<RunRecord> records;  // per tau: noiseless baseline, then (snr, seed) in plan order
    std::vector<GroupAggregate> groups;

    [[nodiscard]] bool all_non_converged() const {
        return std::none_of(records.begin(), records.end(),
                            [](const RunRecord& r) { return r.fit0.converged && r.fit_tau.converged; });
    }
};

struct SweepTask {
    double tau;
    std::optional<double> snr;
    std::uint64_t seed;
};

inline std::vector<SweepTask> sweep_tasks(const ExperimentPlan& plan) {
    std::vector<SweepTask> tasks;
    for (double tau : plan.taus) {
        if (plan.include_noiseless) tasks.push_back({tau, std::nullopt, 0});
        for (double snr : plan.snr_targets_db) {
            if (detail::is_noiseless(snr)) {
                if (!plan.include_noiseless) tasks.push_back({tau, std::nullopt, 0});
                continue;
            }
            for (std::uint64_t seed : plan.seeds) tasks.push_back({tau, snr, seed});
        }
    }
    return tasks;
}

inline std::vector<GroupAggregate> aggregate(const std::vector<RunRecord>& records, const ExperimentPlan& plan) {
    std::vector<GroupAggregate> groups;
    for (double tau : plan.taus) {
        for (double snr : plan.snr_targets_db) {
            if (detail::is_noiseless(snr)) continue;
            std::vector<RunRecord> members;
            for (const auto& r : records) {
                if (r.tau == tau && r.snr_db_target == snr) members.push_back(r);
            }
            if (members.empty()) continue;
            GroupAggregate g;
            g.tau = tau;
            g.snr_db_target = snr;
            g.n_runs = members.size();
            std::vector<double> k2;
            for (const auto& r : members) {
                k2.push_back(k2_value(r, plan.k2_statistic));
                if (!r.wva.valid) ++g.n_invalid_wva;
            }
            g.ensemble = ensemble_stats(std::move(k2));
            if (members.size() >= 2) g.cross = cross_seed_stats(members);
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

/// Runs every (tau, snr, seed) combination. Results are placed by task index, so
/// the output order does not depend on the thread count or on execution_order.
inline SweepResult sweep(const ExperimentPlan& plan, std::span<const std::size_t> execution_order = {}) {
    plan.validate();
    const std::vector<SweepTask> tasks = sweep_tasks(plan);
    std::vector<std::size_t> order(tasks.size());
    if (execution_order.empty()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
    } else {
        if (execution_order.size() != tasks.size()) throw ConfigError("sweep: execution order has the wrong length");
        order.assign(execution_order.begin(), execution_order.end());
    }

    std::vector<RunRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < order.size();) {
            const SweepTask& t = tasks[order[i]];
            records[order[i]] = run_single(plan, t.tau, t.snr, t.seed);
        }
    };
    unsigned n_threads = plan.threads != 0 ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(1, tasks.size())));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    }

    SweepResult result;
    result.groups = aggregate(records, plan);
    result.records = std::move(records);
    return result;
}

}  // namespace awva
