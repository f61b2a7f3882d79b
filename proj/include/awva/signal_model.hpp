#pragma once

// Noiseless detector traces for the single-path (WVA) and split-path (AWVA) schemes.

#include <cmath>
#include <numbers>
#include <string>

#include "awva/core.hpp"

namespace awva {

struct PointerConfig {
    double i0 = 1.0;
    double t0 = 1.5e-3;     // pulse center, s
    double omega = 2.0e-4;  // pointer spread, s

    /// Peak of the normalized profile, i0 * (2*pi*omega^2)^(-1/4).
    [[nodiscard]] double peak() const { return i0 / std::sqrt(std::sqrt(2.0 * std::numbers::pi * omega * omega)); }
};

enum class AmplificationMode { FromAlpha, Fixed };

struct SelectionConfig {
    double alpha = 0.01;  // post-selection angle, rad
    AmplificationMode mode = AmplificationMode::Fixed;
    double g = 1.0e4;

    [[nodiscard]] double probability() const { return std::sin(alpha) * std::sin(alpha); }
};

struct CouplingConfig {
    double tau = 3.0e-9;  // s
};

inline void validate(const PointerConfig& p) {
    if (!(p.omega > 0.0) || !std::isfinite(p.omega)) throw ConfigError("pointer.omega must be > 0");
    if (!(p.i0 > 0.0) || !std::isfinite(p.i0)) throw ConfigError("pointer.i0 must be > 0");
    if (!std::isfinite(p.t0)) throw ConfigError("pointer.t0 must be finite");
}

inline void validate(const PointerConfig& p, const TimeGrid& grid) {
    validate(p);
    if (p.t0 < grid.t_start() || p.t0 > grid.t_end()) {
        throw ConfigError("pointer.t0 must lie within [time.t_start, time.t_end]");
    }
}

// pi/2 itself is admitted: sin^2 = 1 and the weak value is 0, both well defined.
inline void validate(const SelectionConfig& s) {
    if (!(s.alpha > 0.0) || !(s.alpha <= std::numbers::pi / 2.0)) {
        throw ConfigError("selection.alpha must lie in (0, pi/2) rad (got " + std::to_string(s.alpha) + ")");
    }
    if (s.mode == AmplificationMode::Fixed && !std::isfinite(s.g)) {
        throw ConfigError("selection.g must be finite");
    }
}

/// Real weak value -cot(alpha).
inline double weak_value(const SelectionConfig& s) {
    validate(s);
    return -std::cos(s.alpha) / std::sin(s.alpha);
}

/// Effective amplification factor G: cot(alpha) or the fixed g.
inline double amplification(const SelectionConfig& s) {
    validate(s);
    return s.mode == AmplificationMode::FromAlpha ? -weak_value(s) : s.g;
}

/// Peak shift dt = tau * G.
inline double pointer_shift(const CouplingConfig& c, const SelectionConfig& s) { return c.tau * amplification(s); }

/// Rejects couplings whose amplified shift is not small against the pointer spread.
inline void validate_weak_regime(const CouplingConfig& c, const SelectionConfig& s, const PointerConfig& p) {
    const double shift = pointer_shift(c, s);
    if (!(std::abs(shift) < p.omega)) {
        throw ConfigError("coupling.tau: |tau*G| = " + std::to_string(std::abs(shift)) +
                          " s is not below pointer.omega (weak-measurement regime)");
    }
}

namespace detail {

inline Trace gaussian_profile(const TimeGrid& grid, double amplitude, double center, double omega) {
    std::vector<double> v(grid.size());
    const double inv4w2 = 1.0 / (4.0 * omega * omega);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double x = grid.time(k) - center;
        v[k] = amplitude * std::exp(-x * x * inv4w2);
    }
    return Trace(grid, std::move(v), Unit::Intensity);
}

}  // namespace detail

/// Input pulse i0 (2 pi w^2)^(-1/4) exp(-(t - t0)^2 / 4w^2).
inline Trace synth_pointer(const TimeGrid& grid, const PointerConfig& p) {
    validate(p, grid);
    return detail::gaussian_profile(grid, p.peak(), p.t0, p.omega);
}

struct SchemeOutputs {
    Trace i1;   // single-path detector
    Trace i21;  // split path through the delay (APD1)
    Trace i22;  // split path without the delay (APD2)
};

inline SchemeOutputs synth_outputs(const TimeGrid& grid, const PointerConfig& p, const SelectionConfig& s,
                                   const CouplingConfig& c) {
    validate(p, grid);
    validate_weak_regime(c, s, p);
    const double shift = pointer_shift(c, s);
    const double amp = p.peak() * s.probability();

    Trace i1 = detail::gaussian_profile(grid, amp, p.t0 + shift, p.omega);
    Trace i21 = scaled(i1, 0.5);
    Trace i22 = detail::gaussian_profile(grid, 0.5 * amp, p.t0, p.omega);
    return {std::move(i1), std::move(i21), std::move(i22)};
}

}  // namespace awva
