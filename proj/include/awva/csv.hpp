#pragma once

// CSV serialization of run records, aggregates, traces and spectra. Numbers are
// written with std::to_chars (17 significant digits, locale independent), so a
// parsed file re-serializes byte for byte.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "awva/experiment.hpp"

namespace awva {

inline constexpr std::string_view runs_csv_header =
    "scheme,tau_s,snr_db_target,snr_db_realized,snr_star_db,seed,sigma2,delta_t0_s,se_t0_s,delta_t_tau_s,"
    "se_t_tau_s,k1,e1,theta0,theta_tau,delta_theta,k2_at_report,k2_max,t_at_max_s,valid";

inline constexpr std::string_view aggregates_csv_header =
    "tau_s,snr_db_target,n_runs,n_invalid_wva,mean_k2,e2,mean_dt0_s,e_t0_bar_s,mean_dt_tau_s,e_t_tau_bar_s,"
    "delta_dt_bar_s,k1_bar,e1_bar,mean_theta0,e_c0_bar,mean_theta_tau,e_c_tau_bar,delta_theta_bar,k2_bar_bar,e2_bar";

inline constexpr std::string_view trace_csv_header = "t_s,value";

/// Every row carries both schemes of one realization.
inline constexpr std::string_view runs_scheme_token = "wva+awva";

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline double parse_number(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw IoError("csv line " + std::to_string(line) + ": '" + std::string(s) + "' is not a number");
    }
    return v;
}

inline std::optional<double> parse_optional(std::string_view s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    return parse_number(s, line);
}

inline std::vector<std::string> read_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    for (std::string l; std::getline(in, l);) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (!l.empty()) lines.push_back(std::move(l));
    }
    return lines;
}

inline void append_optional(std::string& row, const std::optional<double>& v) {
    row += ',';
    if (v) row += format_number(*v);
}

}  // namespace detail

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.flush();
    if (!f) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Runs

inline std::string format_runs_csv(const std::vector<RunRecord>& records) {
    std::string out(runs_csv_header);
    out += '\n';
    for (const auto& r : records) {
        std::string row(runs_scheme_token);
        row += ',' + format_number(r.tau);
        detail::append_optional(row, r.snr_db_target);
        detail::append_optional(row, r.snr_db_realized);
        detail::append_optional(row, r.snr_star_db);
        row += ',';
        if (r.seed) row += std::to_string(*r.seed);
        detail::append_optional(row, r.sigma2);
        for (double v : {r.fit0.delta_t, r.fit0.se_delta_t, r.fit_tau.delta_t, r.fit_tau.se_delta_t, r.wva.k1, r.wva.e1,
                         r.theta0, r.theta_tau, r.delta_theta, r.awva.k2_at_report, r.awva.k2_max, r.awva.t_at_max}) {
            row += ',' + format_number(v);
        }
        row += r.wva.valid ? ",true" : ",false";
        out += row;
        out += '\n';
    }
    return out;
}

inline void write_runs_csv(const std::vector<RunRecord>& records, const std::string& path) {
    if (records.empty()) throw ConfigError("write_runs_csv: no records");
    write_text_file(path, format_runs_csv(records));
}

/// Inverse of format_runs_csv. Fit diagnostics not in the schema (amplitude,
/// width, iterations) are left at their defaults.
inline std::vector<RunRecord> parse_runs_csv(std::string_view text) {
    const auto lines = detail::read_lines(text);
    if (lines.empty() || lines.front() != runs_csv_header) throw IoError("runs csv: missing or unexpected header");
    std::vector<RunRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        const auto f = detail::split_fields(lines[i]);
        if (f.size() != 20) throw IoError("runs csv line " + std::to_string(ln) + ": expected 20 fields");
        if (f[0] != runs_scheme_token) throw IoError("runs csv line " + std::to_string(ln) + ": unknown scheme");
        RunRecord r;
        r.tau = detail::parse_number(f[1], ln);
        r.snr_db_target = detail::parse_optional(f[2], ln);
        r.snr_db_realized = detail::parse_optional(f[3], ln);
        r.snr_star_db = detail::parse_optional(f[4], ln);
        if (!f[5].empty()) {
            std::uint64_t seed = 0;
            const auto res = std::from_chars(f[5].data(), f[5].data() + f[5].size(), seed);
            if (res.ec != std::errc{} || res.ptr != f[5].data() + f[5].size()) {
                throw IoError("runs csv line " + std::to_string(ln) + ": bad seed");
            }
            r.seed = seed;
        }
        r.sigma2 = detail::parse_optional(f[6], ln);
        r.fit0.delta_t = detail::parse_number(f[7], ln);
        r.fit0.se_delta_t = detail::parse_number(f[8], ln);
        r.fit_tau.delta_t = detail::parse_number(f[9], ln);
        r.fit_tau.se_delta_t = detail::parse_number(f[10], ln);
        r.wva.k1 = detail::parse_number(f[11], ln);
        r.wva.e1 = detail::parse_number(f[12], ln);
        r.theta0 = detail::parse_number(f[13], ln);
        r.theta_tau = detail::parse_number(f[14], ln);
        r.delta_theta = detail::parse_number(f[15], ln);
        r.awva.k2_at_report = detail::parse_number(f[16], ln);
        r.awva.k2_max = detail::parse_number(f[17], ln);
        r.awva.t_at_max = detail::parse_number(f[18], ln);
        r.awva.valid = r.awva.k2_at_report > 0.0;
        if (f[19] == "true") r.wva.valid = true;
        else if (f[19] == "false") r.wva.valid = false;
        else throw IoError("runs csv line " + std::to_string(ln) + ": valid must be true or false");
        r.fit0.converged = std::isfinite(r.fit0.se_delta_t);
        r.fit_tau.converged = std::isfinite(r.fit_tau.se_delta_t);
        records.push_back(r);
    }
    return records;
}

inline std::vector<RunRecord> read_runs_csv(const std::string& path) { return parse_runs_csv(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Aggregates

inline std::string format_aggregates_csv(const std::vector<GroupAggregate>& groups) {
    std::string out(aggregates_csv_header);
    out += '\n';
    for (const auto& g : groups) {
        std::string row = format_number(g.tau) + ',' + format_number(g.snr_db_target) + ',' + std::to_string(g.n_runs) +
                          ',' + std::to_string(g.n_invalid_wva) + ',' + format_number(g.ensemble.mean_k2) + ',' +
                          format_number(g.ensemble.e2);
        if (g.cross) {
            const CrossSeedStats& c = *g.cross;
            for (double v : {c.mean_dt0, c.e_t0_bar, c.mean_dt_tau, c.e_t_tau_bar, c.delta_dt_bar, c.k1_bar, c.e1_bar,
                             c.mean_theta0, c.e_c0_bar, c.mean_theta_tau, c.e_c_tau_bar, c.delta_theta_bar, c.k2_bar_bar,
                             c.e2_bar}) {
                row += ',' + format_number(v);
            }
        } else {
            row += std::string(14, ',');
        }
        out += row;
        out += '\n';
    }
    return out;
}

inline void write_aggregates_csv(const std::vector<GroupAggregate>& groups, const std::string& path) {
    write_text_file(path, format_aggregates_csv(groups));
}

// ---------------------------------------------------------------------------
// Traces

inline std::string format_trace_csv(const Trace& trace) {
    std::string out(trace_csv_header);
    out += '\n';
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out += format_number(trace.time(k));
        out += ',';
        out += format_number(trace[k]);
        out += '\n';
    }
    return out;
}

inline void write_trace_csv(const Trace& trace, const std::string& path) { write_text_file(path, format_trace_csv(trace)); }

/// Rebuilds the uniform grid from the time column; rejects non-uniform sampling.
inline Trace parse_trace_csv(std::string_view text, Unit unit = Unit::Intensity) {
    const auto lines = detail::read_lines(text);
    if (lines.empty() || lines.front() != trace_csv_header) throw IoError("trace csv: expected header 't_s,value'");
    if (lines.size() < 3) throw ShapeError("trace csv: need at least 2 samples");
    std::vector<double> t, v;
    t.reserve(lines.size() - 1);
    v.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = detail::split_fields(lines[i]);
        if (f.size() != 2) throw IoError("trace csv line " + std::to_string(i + 1) + ": expected 2 fields");
        t.push_back(detail::parse_number(f[0], i + 1));
        v.push_back(detail::parse_number(f[1], i + 1));
    }
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    const TimeGrid grid(t.front(), t.back(), dt);
    if (grid.size() != t.size()) throw ShapeError("trace csv: time column is not uniformly sampled");
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (std::abs(t[k] - grid.time(k)) > 1e-6 * dt) throw ShapeError("trace csv: time column is not uniformly sampled");
    }
    return Trace(grid, std::move(v), unit);
}

inline Trace read_trace_csv(const std::string& path, Unit unit = Unit::Intensity) {
    return parse_trace_csv(read_text_file(path), unit);
}

inline std::string format_spectrum_csv(const Spectrum& s) {
    std::string out = "freq_hz,psd,magnitude\n";
    for (std::size_t k = 0; k < s.freqs.size(); ++k) {
        out += format_number(s.freqs[k]) + ',' + format_number(s.psd[k]) + ',' + format_number(s.magnitude[k]) + '\n';
    }
    return out;
}

}  // namespace awva
