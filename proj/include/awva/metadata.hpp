#pragma once

// Reproduction metadata written next to every CLI output.

#include <chrono>
#include <ctime>
#include <string>

#include <json.hpp>

#include "awva/config.hpp"
#include "awva/rng.hpp"

#ifndef AWVA_VERSION
#define AWVA_VERSION "0.0.0"
#endif

namespace awva {

inline constexpr const char* version = AWVA_VERSION;

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Everything needed to rerun: the resolved config text plus the numerical settings
/// spelled out. `command` names the CLI subcommand that produced the output.
inline nlohmann::ordered_json run_metadata(const RunConfig& cfg, const std::string& command) {
    const ExperimentPlan& p = cfg.plan;
    nlohmann::ordered_json j;
    j["artifact"] = "awva";
    j["version"] = version;
    j["command"] = command;
    j["generated_at"] = utc_timestamp();
    j["prng"] = Xoshiro256StarStar::name;
    j["grid"] = {{"t_start_s", p.grid.t_start()}, {"t_end_s", p.grid.t_end()}, {"dt_s", p.grid.dt()},
                 {"samples", p.grid.size()}};
    j["lm"] = {{"initial_lambda", p.lm.initial_lambda}, {"lambda_up", p.lm.lambda_up},
               {"lambda_down", p.lm.lambda_down},       {"step_tolerance", p.lm.step_tolerance},
               {"residual_tolerance", p.lm.residual_tolerance}, {"max_iterations", p.lm.max_iterations},
               {"fit_offset", p.lm.fit_offset}};
    j["resolved_config"] = format_config(cfg);
    return j;
}

}  // namespace awva
