#include <catch_amalgamated.hpp>

#include <algorithm>
#include <limits>
#include <random>

#include "awva/csv.hpp"
#include "awva/experiment.hpp"

using namespace awva;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string row(const RunRecord& r) { return format_runs_csv({r}); }

ExperimentPlan small_plan() {
    ExperimentPlan p;
    p.taus = {3e-9, 9e-9};
    p.snr_targets_db = {6.6, -3.3};
    p.seeds = {0, 100, 200};
    p.threads = 2;
    return p;
}

/// Records carrying only the cross-seed inputs.
std::vector<RunRecord> table_records(const std::vector<double>& dt0, const std::vector<double>& dt_tau,
                                     const std::vector<double>& th0, const std::vector<double>& th_tau) {
    std::vector<RunRecord> rs;
    for (std::size_t i = 0; i < dt0.size(); ++i) {
        RunRecord r;
        r.tau = 3e-9;
        r.snr_db_target = 6.6;
        r.seed = 100 * i;
        r.fit0.delta_t = dt0[i];
        r.fit_tau.delta_t = dt_tau[i];
        r.theta0 = th0[i];
        r.theta_tau = th_tau[i];
        rs.push_back(r);
    }
    return rs;
}

// Tables I and II, SNR 6.6 dB block, seeds 0..600
const std::vector<double> dt0_66{9.20e-7, 1.25e-6, 2.33e-6, -1.30e-7, -2.90e-7, 2.99e-6, -7.90e-7};
const std::vector<double> dt_tau_66{3.07e-5, 3.11e-5, 3.23e-5, 2.97e-5, 2.98e-5, 3.32e-5, 2.92e-5};
const std::vector<double> th0_66{1.3979e-9, 1.4028e-9, 1.3603e-9, 1.4412e-9, 1.4050e-9, 1.3552e-9, 1.4176e-9};
const std::vector<double> th_tau_66{1.3211e-9, 1.3255e-9, 1.2841e-9, 1.3623e-9, 1.3264e-9, 1.2784e-9, 1.3393e-9};

}  // namespace

TEST_CASE("noiseless run", "[run]") {
    const ExperimentPlan plan;
    const RunRecord r = run_noiseless(plan, 3e-9);
    CHECK(r.noiseless());
    CHECK_FALSE(r.seed.has_value());
    CHECK_FALSE(r.sigma2.has_value());
    CHECK_THAT(r.fit_tau.delta_t, WithinAbs(3.00e-5, 1e-9));
    CHECK_THAT(r.wva.k1, WithinRel(1.0e4, 1e-4));
    CHECK(r.wva.valid);
    CHECK_THAT(r.theta0, WithinRel(1.2442e-9, 0.01));
    CHECK_THAT(r.awva.k2_at_report, WithinRel(0.0258, 0.015));
    CHECK(row(run_single(plan, 3e-9, inf, 500)) == row(r));
}

TEST_CASE("runs are deterministic", "[run]") {
    const ExperimentPlan plan;
    CHECK(row(run_single(plan, 6e-9, 1.4, 300)) == row(run_single(plan, 6e-9, 1.4, 300)));
    CHECK(row(run_single(plan, 6e-9, 1.4, 300)) != row(run_single(plan, 6e-9, 1.4, 400)));
}

TEST_CASE("realized SNR and the splitter offset", "[run]") {
    ExperimentPlan plan;
    const RunRecord after = run_single(plan, 3e-9, -3.3, 200);
    CHECK_THAT(*after.snr_db_realized, WithinAbs(-3.3, 1e-12));
    CHECK_THAT(*after.snr_star_db - *after.snr_db_realized, WithinAbs(-3.0103, 5e-5));
    plan.injection = Injection::BeforeBS;
    const RunRecord before = run_single(plan, 3e-9, -3.3, 200);
    CHECK_THAT(*before.snr_star_db, WithinAbs(*before.snr_db_realized, 1e-12));
}

TEST_CASE("noise pairing", "[run]") {
    ExperimentPlan plan;
    const SchemeOutputs clean_tau = synth_outputs(plan.grid, plan.pointer, plan.selection, {3e-9});
    const SchemeOutputs clean_0 = synth_outputs(plan.grid, plan.pointer, plan.selection, {0.0});
    auto noise_of = [](const Trace& noisy, const Trace& clean, std::size_t k) { return noisy[k] - clean[k]; };

    const RunArtifacts shared = simulate_run(plan, 3e-9, 1.4, 100);
    for (std::size_t k = 0; k < plan.grid.size(); k += 997) {
        const double n = noise_of(shared.wva_tau, clean_tau.i1, k);
        CHECK_THAT(noise_of(shared.wva_baseline, clean_0.i1, k), WithinAbs(n, 1e-15));
        CHECK_THAT(noise_of(shared.apd1, clean_tau.i21, k), WithinAbs(n, 1e-15));
        CHECK_THAT(noise_of(shared.apd2, clean_tau.i22, k), WithinAbs(n, 1e-15));
    }

    plan.pairing = NoisePairing::IndependentTraces;
    const RunArtifacts indep = simulate_run(plan, 3e-9, 1.4, 100);
    int differ = 0;
    for (std::size_t k = 0; k < plan.grid.size(); k += 997) {
        differ += std::abs(noise_of(indep.apd1, clean_tau.i21, k) - noise_of(indep.apd2, clean_tau.i22, k)) > 1e-12;
    }
    CHECK(differ > 20);
    // stream 0 is shared with the shared-trace mode
    CHECK(indep.record.sigma2 == shared.record.sigma2);
}

TEST_CASE("shared noise inflates theta0", "[run]") {
    const ExperimentPlan plan;
    const double clean = run_noiseless(plan, 3e-9).theta0;
    for (std::uint64_t seed : plan.seeds) CHECK(run_single(plan, 3e-9, -3.3, seed).theta0 > clean);
}

TEST_CASE("ensemble statistics", "[ensemble]") {
    const EnsembleStats t = ensemble_stats({0.0256, 0.0257, 0.0254, 0.0263, 0.0262, 0.0256, 0.0261});
    CHECK_THAT(t.mean_k2, WithinAbs(0.02584, 5e-6));
    const EnsembleStats a = ensemble_stats({1.0, 2.0, 3.0});
    CHECK(a.mean_k2 == 2.0);
    CHECK(a.e2 == 1.0);
    const EnsembleStats one = ensemble_stats({0.7});
    CHECK(one.mean_k2 == 0.7);
    CHECK(one.e2 == 0.0);
    CHECK_THROWS_AS(ensemble_stats({}), ConfigError);

    ExperimentPlan empty;
    empty.seeds.clear();
    CHECK_THROWS_AS(run_ensemble(empty, 3e-9, 6.6), ConfigError);
}

TEST_CASE("ensemble invariants on simulated runs", "[ensemble][property]") {
    const ExperimentPlan plan;
    const EnsembleStats s = run_ensemble(plan, 3e-9, 1.4);
    REQUIRE(s.per_seed.size() == plan.seeds.size());
    const auto [lo, hi] = std::minmax_element(s.per_seed.begin(), s.per_seed.end());
    CHECK(*lo <= s.mean_k2);
    CHECK(s.mean_k2 <= *hi);
    CHECK(s.e2 >= 0.0);
    double dev = 0.0;
    for (double k : s.per_seed) dev = std::max(dev, std::abs(s.mean_k2 - k));
    CHECK(s.e2 == dev);
    CHECK_THAT(s.mean_k2, WithinRel(run_noiseless(plan, 3e-9).awva.k2_at_report, 0.03));
}

TEST_CASE("cross-seed statistics reproduce the published averages", "[cross]") {
    const auto rs = table_records(dt0_66, dt_tau_66, th0_66, th_tau_66);
    const CrossSeedStats exact = cross_seed_stats(rs);
    CHECK_THAT(exact.mean_dt0, WithinAbs(8.97e-7, 5e-10));
    CHECK_THAT(exact.e_t0_bar, WithinAbs(2.09e-6, 5e-9));
    CHECK_THAT(exact.mean_theta0, WithinAbs(1.3971e-9, 5e-14));
    CHECK_THAT(exact.e_c0_bar, WithinAbs(4.41e-11, 5e-14));
    CHECK_THAT(exact.mean_theta_tau, WithinAbs(1.3196e-9, 5e-14));
    CHECK_THAT(exact.e_c_tau_bar, WithinAbs(4.27e-11, 5e-14));
    CHECK_THAT(exact.delta_theta_bar, WithinAbs(7.7557e-11, 5e-15));
    CrossSeedOptions theta_shown;
    theta_shown.theta_sig_digits = 5;
    CHECK_THAT(cross_seed_stats(rs, theta_shown).delta_theta_bar, WithinAbs(7.75e-11, 1e-20));
    CHECK_THAT(exact.k1_bar, WithinRel(exact.delta_dt_bar / 3e-9, 1e-15));
    CHECK_THAT(exact.e1_bar, WithinRel((exact.e_t0_bar + exact.e_t_tau_bar) / 3e-9, 1e-15));

    CrossSeedOptions display;
    display.time_sig_digits = 3;
    const CrossSeedStats rounded = cross_seed_stats(rs, display);
    CHECK_THAT(rounded.delta_dt_bar, WithinAbs(3.00e-5, 5e-8));
    CHECK_THAT(rounded.e_t_tau_bar, WithinAbs(2.30e-6, 5e-9));
    CHECK_THAT(rounded.k1_bar / 1e4, WithinAbs(1.000, 5e-4));
    CHECK_THAT(rounded.e1_bar / 1e4, WithinAbs(0.146, 5e-4));
}

TEST_CASE("cross-seed edge cases", "[cross]") {
    const auto same = table_records({1e-6, 1e-6, 1e-6}, {3e-5, 3e-5, 3e-5}, {1e-9, 1e-9, 1e-9}, {9e-10, 9e-10, 9e-10});
    const CrossSeedStats s = cross_seed_stats(same);
    CHECK(s.e_t0_bar == 0.0);
    CHECK(s.e_t_tau_bar == 0.0);
    CHECK(s.e_c0_bar == 0.0);
    CHECK(s.e_c_tau_bar == 0.0);
    CHECK(s.e1_bar == 0.0);
    CHECK(s.e2_bar == 0.0);

    auto mixed = same;
    mixed[1].snr_db_target = 1.4;
    CHECK_THROWS_AS(cross_seed_stats(mixed), GroupingError);
    mixed = same;
    mixed[2].tau = 6e-9;
    CHECK_THROWS_AS(cross_seed_stats(mixed), GroupingError);
    CHECK_THROWS_AS(cross_seed_stats(std::span(same).first(1)), ConfigError);
}

TEST_CASE("sweep sizes", "[sweep]") {
    const ExperimentPlan plan;
    const auto tasks = sweep_tasks(plan);
    CHECK(tasks.size() == 140 + 5);
    CHECK(std::count_if(tasks.begin(), tasks.end(), [](const SweepTask& t) { return !t.snr; }) == 5);

    const SweepResult r = sweep(small_plan());
    CHECK(r.records.size() == 2 * 2 * 3 + 2);
    CHECK(r.groups.size() == 2 * 2);
    for (const auto& g : r.groups) {
        CHECK(g.n_runs == 3);
        CHECK(g.cross.has_value());
    }
    CHECK_FALSE(r.all_non_converged());
    // per tau: baseline first, then snr-major, seed-minor
    CHECK(r.records[0].noiseless());
    CHECK(*r.records[1].snr_db_target == 6.6);
    CHECK(*r.records[1].seed == 0);
    CHECK(*r.records[3].seed == 200);
    CHECK(*r.records[4].snr_db_target == -3.3);
    CHECK(r.records[7].noiseless());
    CHECK(r.records[7].tau == 9e-9);
}

TEST_CASE("sweep output does not depend on execution order or threads", "[sweep][property]") {
    ExperimentPlan plan = small_plan();
    const std::string ref = format_runs_csv(sweep(plan).records);

    std::vector<std::size_t> order(sweep_tasks(plan).size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937 shuffler(2024);
    std::shuffle(order.begin(), order.end(), shuffler);
    CHECK(format_runs_csv(sweep(plan, order).records) == ref);

    plan.threads = 1;
    CHECK(format_runs_csv(sweep(plan).records) == ref);
    plan.threads = 7;
    const SweepResult again = sweep(plan);
    CHECK(format_runs_csv(again.records) == ref);
    CHECK(format_aggregates_csv(again.groups) == format_aggregates_csv(sweep(small_plan()).groups));

    std::vector<std::size_t> wrong(order.begin(), order.end() - 1);
    CHECK_THROWS_AS(sweep(plan, wrong), ConfigError);
}

TEST_CASE("plan validation", "[plan]") {
    ExperimentPlan p;
    CHECK_NOTHROW(p.validate());
    p.taus.clear();
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.seeds.clear();
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.report_time = 4e-3;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.taus = {3e-8};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.snr_targets_db = {std::nan("")};
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
