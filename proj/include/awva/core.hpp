#pragma once

// Shared value types: time grid, sampled traces, and the error hierarchy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace awva {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Traces that do not share a grid.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Input that carries no usable information (all-zero trace, zero noise).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Division by a zero delay and similar arithmetic dead ends.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Uniform sample grid. Sample k sits at t_start + k*dt, computed from the index.
class TimeGrid {
public:
    TimeGrid() = default;

    TimeGrid(double t_start, double t_end, double dt) : t_start_(t_start), t_end_(t_end), dt_(dt) {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ConfigError("time.dt must be > 0 (got " + std::to_string(dt) + ")");
        }
        if (!(t_end > t_start) || !std::isfinite(t_start) || !std::isfinite(t_end)) {
            throw ConfigError("time.t_end must be > time.t_start");
        }
        // floor((t_end - t_start)/dt) + 1, snapping ratios that are integers up to rounding
        const double steps = (t_end - t_start) / dt;
        const double nearest = std::round(steps);
        const double whole = std::abs(steps - nearest) <= 1e-9 * std::max(1.0, nearest) ? nearest : std::floor(steps);
        n_ = static_cast<std::size_t>(whole) + 1;
    }

    [[nodiscard]] double t_start() const noexcept { return t_start_; }
    [[nodiscard]] double t_end() const noexcept { return t_end_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    [[nodiscard]] double time(std::size_t k) const noexcept { return t_start_ + static_cast<double>(k) * dt_; }

    /// Index of the sample at time t, which must lie on the grid (to 1e-6 of a step).
    [[nodiscard]] std::size_t index_of(double t) const {
        const double pos = (t - t_start_) / dt_;
        const double k = std::round(pos);
        if (k < 0.0 || k > static_cast<double>(n_ - 1) || std::abs(pos - k) > 1e-6) {
            throw ConfigError("time " + std::to_string(t) + " s is not a sample of the grid");
        }
        return static_cast<std::size_t>(k);
    }

    [[nodiscard]] bool contains(double t) const noexcept {
        return t >= t_start_ - 1e-6 * dt_ && t <= time(n_ - 1) + 1e-6 * dt_;
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_start_ = 0.0;
    double t_end_ = 1.0;
    double dt_ = 1.0;
    std::size_t n_ = 2;
};

enum class Unit { Intensity, IntensitySquaredTime, Dimensionless };

inline std::string_view unit_label(Unit u) {
    switch (u) {
        case Unit::Intensity: return "I0";
        case Unit::IntensitySquaredTime: return "I0^2*s";
        case Unit::Dimensionless: return "dimensionless";
    }
    return "?";
}

/// Real-valued samples on a TimeGrid.
class Trace {
public:
    Trace(TimeGrid grid, std::vector<double> values, Unit unit = Unit::Intensity)
        : grid_(grid), values_(std::move(values)), unit_(unit) {
        if (values_.size() != grid_.size()) {
            throw ShapeError("trace has " + std::to_string(values_.size()) + " samples, grid has " +
                             std::to_string(grid_.size()));
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw DegenerateInputError("trace contains a non-finite sample");
        }
    }

    static Trace zeros(const TimeGrid& grid, Unit unit = Unit::Intensity) {
        return Trace(grid, std::vector<double>(grid.size(), 0.0), unit);
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] Unit unit() const noexcept { return unit_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t k) const noexcept { return values_[k]; }
    [[nodiscard]] double time(std::size_t k) const noexcept { return grid_.time(k); }

    friend bool operator==(const Trace&, const Trace&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
    Unit unit_;
};

inline void require_same_grid(const Trace& a, const Trace& b, std::string_view what) {
    if (!(a.grid() == b.grid())) {
        throw ShapeError(std::string(what) + ": traces are on different grids");
    }
}

/// Pointwise a*x + b*y on a shared grid.
inline Trace combine(const Trace& x, double a, const Trace& y, double b) {
    require_same_grid(x, y, "combine");
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * x[k] + b * y[k];
    return Trace(x.grid(), std::move(out), x.unit());
}

inline Trace scaled(const Trace& x, double c) {
    std::vector<double> out(x.values().begin(), x.values().end());
    for (double& v : out) v *= c;
    return Trace(x.grid(), std::move(out), x.unit());
}

/// First index of the maximum value.
inline std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] > v[best]) best = k;
    }
    return best;
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace awva
