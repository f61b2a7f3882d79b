#pragma once

// Sectioned "key = value" configuration documents.
//
//   [time]        t_start, t_end, dt
//   [pointer]     i0, t0, omega
//   [selection]   alpha, amplification_mode (fixed | from_alpha), g
//   [coupling]    taus = [..]
//   [noise]       snr_targets_db = [..], injection (after_bs | before_bs),
//                 pairing (shared | independent)
//   [experiment]  seeds = [..], report_time, include_noiseless, k2_statistic
//                 (report | max), fit_offset, max_iterations, threads
//   [output]      plots
//
// '#' starts a comment. Unknown sections or keys are rejected with the line number.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "awva/experiment.hpp"

namespace awva {

struct RunConfig {
    ExperimentPlan plan;
    bool plots = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Shortest representation that parses back to the same double.
inline std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct ConfigLine {
    int line;
    std::string value;
};

class ConfigReader {
public:
    using Entries = std::map<std::string, ConfigLine>;  // "section.key" -> value

    explicit ConfigReader(const Entries& e) : entries_(e) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        const auto it = entries_.find(key);
        const std::string where = it != entries_.end() ? "line " + std::to_string(it->second.line) + ": " : "";
        throw ConfigError(where + key + ": " + msg);
    }

    [[nodiscard]] int line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    double number(std::string_view text, const std::string& key) const {
        const std::string_view t = trim(text);
        double v = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
            fail(key, "expected a number, got '" + std::string(t) + "'");
        }
        return v;
    }

    void get(const std::string& key, double& out) const {
        if (const auto it = entries_.find(key); it != entries_.end()) out = number(it->second.value, key);
    }

    void get(const std::string& key, bool& out) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return;
        const std::string_view v = trim(it->second.value);
        if (v == "true") out = true;
        else if (v == "false") out = false;
        else fail(key, "expected true or false");
    }

    void get_unsigned(const std::string& key, unsigned& out) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return;
        const std::string_view v = trim(it->second.value);
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) fail(key, "expected an unsigned integer");
    }

    void get_list(const std::string& key, std::vector<double>& out) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return;
        out.clear();
        for (const auto& item : list_items(it->second.value, key)) out.push_back(number(item, key));
    }

    void get_list(const std::string& key, std::vector<std::uint64_t>& out) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return;
        out.clear();
        for (const auto& item : list_items(it->second.value, key)) {
            std::uint64_t v = 0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
                fail(key, "expected unsigned integer seeds, got '" + item + "'");
            }
            out.push_back(v);
        }
    }

    template <class Enum>
    void get_enum(const std::string& key, Enum& out, std::initializer_list<std::pair<std::string_view, Enum>> names) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return;
        const std::string_view v = trim(it->second.value);
        std::string allowed;
        for (const auto& [name, value] : names) {
            if (v == name) {
                out = value;
                return;
            }
            allowed += (allowed.empty() ? "" : " | ") + std::string(name);
        }
        fail(key, "expected one of " + allowed + ", got '" + std::string(v) + "'");
    }

private:
    std::vector<std::string> list_items(std::string_view text, const std::string& key) const {
        std::string_view t = trim(text);
        if (t.size() < 2 || t.front() != '[' || t.back() != ']') fail(key, "expected a list like [a, b, c]");
        t = trim(t.substr(1, t.size() - 2));
        std::vector<std::string> items;
        if (t.empty()) return items;
        std::size_t start = 0;
        while (true) {
            const auto comma = t.find(',', start);
            items.emplace_back(trim(t.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
            if (items.back().empty()) fail(key, "empty list item");
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return items;
    }

    const Entries& entries_;
};

inline const std::map<std::string, std::vector<std::string>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>> keys{
        {"time", {"t_start", "t_end", "dt"}},
        {"pointer", {"i0", "t0", "omega"}},
        {"selection", {"alpha", "amplification_mode", "g"}},
        {"coupling", {"taus"}},
        {"noise", {"snr_targets_db", "injection", "pairing"}},
        {"experiment",
         {"seeds", "report_time", "include_noiseless", "k2_statistic", "fit_offset", "max_iterations", "threads"}},
        {"output", {"plots"}},
    };
    return keys;
}

}  // namespace detail

/// Parses a configuration document; every key is optional and defaults to the
/// table-reproduction plan.
inline RunConfig parse_config(std::string_view text) {
    detail::ConfigReader::Entries entries;
    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string at = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at + "malformed section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (!detail::known_keys().contains(section)) throw ConfigError(at + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(at + "expected 'key = value'");
        if (section.empty()) throw ConfigError(at + "key outside of any [section]");
        const std::string key(detail::trim(line.substr(0, eq)));
        const auto& allowed = detail::known_keys().at(section);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(at + "unknown key '" + key + "' in [" + section + "]");
        }
        const std::string full = section + "." + key;
        if (entries.contains(full)) throw ConfigError(at + "duplicate key " + full);
        entries[full] = {line_no, std::string(detail::trim(line.substr(eq + 1)))};
    }

    const detail::ConfigReader r(entries);
    RunConfig cfg;
    ExperimentPlan& p = cfg.plan;

    double t_start = p.grid.t_start(), t_end = p.grid.t_end(), dt = p.grid.dt();
    r.get("time.t_start", t_start);
    r.get("time.t_end", t_end);
    r.get("time.dt", dt);
    try {
        p.grid = TimeGrid(t_start, t_end, dt);
    } catch (const ConfigError& e) {
        r.fail(r.line_of("time.dt") ? "time.dt" : "time.t_end", e.what());
    }

    r.get("pointer.i0", p.pointer.i0);
    r.get("pointer.t0", p.pointer.t0);
    r.get("pointer.omega", p.pointer.omega);
    r.get("selection.alpha", p.selection.alpha);
    r.get_enum("selection.amplification_mode", p.selection.mode,
               {{"fixed", AmplificationMode::Fixed}, {"from_alpha", AmplificationMode::FromAlpha}});
    r.get("selection.g", p.selection.g);
    r.get_list("coupling.taus", p.taus);
    r.get_list("noise.snr_targets_db", p.snr_targets_db);
    r.get_enum("noise.injection", p.injection, {{"after_bs", Injection::AfterBS}, {"before_bs", Injection::BeforeBS}});
    r.get_enum("noise.pairing", p.pairing,
               {{"shared", NoisePairing::SharedTrace}, {"independent", NoisePairing::IndependentTraces}});
    r.get_list("experiment.seeds", p.seeds);
    r.get("experiment.report_time", p.report_time);
    r.get("experiment.include_noiseless", p.include_noiseless);
    r.get_enum("experiment.k2_statistic", p.k2_statistic, {{"report", K2Statistic::AtReport}, {"max", K2Statistic::Max}});
    r.get("experiment.fit_offset", p.lm.fit_offset);
    unsigned max_it = static_cast<unsigned>(p.lm.max_iterations);
    r.get_unsigned("experiment.max_iterations", max_it);
    p.lm.max_iterations = static_cast<int>(max_it);
    r.get_unsigned("experiment.threads", p.threads);
    r.get("output.plots", cfg.plots);

    try {
        p.validate();
    } catch (const ConfigError& e) {
        // messages lead with the offending "section.key"; anchor them to its line
        const std::string msg = e.what();
        std::string key = msg.substr(0, msg.find_first_of(" :"));
        if (r.line_of(key) == 0 && r.line_of(key + "s") > 0) key += "s";  // coupling.tau -> coupling.taus
        if (const int ln = r.line_of(key); ln > 0) throw ConfigError("line " + std::to_string(ln) + ": " + msg);
        throw;
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

inline ExperimentPlan load_config(const std::string& path) { return load_run_config(path).plan; }

/// Fully resolved document; parse_config(format_config(c)) reproduces c.
inline std::string format_config(const RunConfig& cfg) {
    const ExperimentPlan& p = cfg.plan;
    using detail::shortest;
    auto list = [](const auto& xs) {
        std::string s = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) s += ", ";
            if constexpr (std::is_same_v<std::decay_t<decltype(xs[i])>, double>) s += shortest(xs[i]);
            else s += std::to_string(xs[i]);
        }
        return s + "]";
    };
    auto b = [](bool v) { return v ? "true" : "false"; };
    std::ostringstream o;
    o << "[time]\n"
      << "t_start = " << shortest(p.grid.t_start()) << "\n"
      << "t_end = " << shortest(p.grid.t_end()) << "\n"
      << "dt = " << shortest(p.grid.dt()) << "\n\n"
      << "[pointer]\n"
      << "i0 = " << shortest(p.pointer.i0) << "\n"
      << "t0 = " << shortest(p.pointer.t0) << "\n"
      << "omega = " << shortest(p.pointer.omega) << "\n\n"
      << "[selection]\n"
      << "alpha = " << shortest(p.selection.alpha) << "\n"
      << "amplification_mode = " << (p.selection.mode == AmplificationMode::Fixed ? "fixed" : "from_alpha") << "\n"
      << "g = " << shortest(p.selection.g) << "\n\n"
      << "[coupling]\n"
      << "taus = " << list(p.taus) << "\n\n"
      << "[noise]\n"
      << "snr_targets_db = " << list(p.snr_targets_db) << "\n"
      << "injection = " << (p.injection == Injection::AfterBS ? "after_bs" : "before_bs") << "\n"
      << "pairing = " << (p.pairing == NoisePairing::SharedTrace ? "shared" : "independent") << "\n\n"
      << "[experiment]\n"
      << "seeds = " << list(p.seeds) << "\n"
      << "report_time = " << shortest(p.report_time) << "\n"
      << "include_noiseless = " << b(p.include_noiseless) << "\n"
      << "k2_statistic = " << (p.k2_statistic == K2Statistic::AtReport ? "report" : "max") << "\n"
      << "fit_offset = " << b(p.lm.fit_offset) << "\n"
      << "max_iterations = " << p.lm.max_iterations << "\n"
      << "threads = " << p.threads << "\n\n"
      << "[output]\n"
      << "plots = " << b(cfg.plots) << "\n";
    return o.str();
}

}  // namespace awva
