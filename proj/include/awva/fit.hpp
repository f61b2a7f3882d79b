#pragma once

// Gaussian peak fitting by Levenberg-Marquardt, with standard errors from the
// Gauss-Newton covariance at the solution.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

#include "awva/core.hpp"
#include "awva/signal_model.hpp"

namespace awva {

struct LmSettings {
    double initial_lambda = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 10.0;
    double step_tolerance = 1e-12;      // relative parameter step
    double residual_tolerance = 1e-12;  // relative change of the sum of squares
    int max_iterations = 200;
    bool fit_offset = false;  // adds a constant baseline parameter
};

struct FitResult {
    double delta_t = std::numeric_limits<double>::quiet_NaN();     // fitted center - t0, s
    double se_delta_t = std::numeric_limits<double>::quiet_NaN();  // standard error of the center, s
    double amplitude = std::numeric_limits<double>::quiet_NaN();
    double width = std::numeric_limits<double>::quiet_NaN();  // omega-equivalent, s
    double offset = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual_norm = std::numeric_limits<double>::quiet_NaN();  // sqrt of the sum of squares

    [[nodiscard]] static FitResult failed() { return {}; }
};

namespace detail {

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;
template <std::size_t N>
using Vec = std::array<double, N>;

/// Solves a x = b by Gaussian elimination with partial pivoting. Returns nullopt if singular.
template <std::size_t N>
std::optional<Vec<N>> solve(Mat<N> a, Vec<N> b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (!(std::abs(a[piv][col]) > 0.0) || !std::isfinite(a[piv][col])) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec<N> x{};
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

class GaussianModel {
public:
    static constexpr std::size_t max_params = 4;
    using Params = Vec<max_params>;  // A, mu, w, offset

    GaussianModel(const Trace& y, bool offset) : y_(y), n_params_(offset ? 4 : 3) {}

    [[nodiscard]] std::size_t n_params() const { return n_params_; }

    [[nodiscard]] double cost(const Params& p) const {
        const double a = p[0], mu = p[1], w = p[2], c = n_params_ == 4 ? p[3] : 0.0;
        const double inv4w2 = 1.0 / (4.0 * w * w);
        double s = 0.0;
        for (std::size_t k = 0; k < y_.size(); ++k) {
            const double x = y_.time(k) - mu;
            const double r = y_[k] - (a * std::exp(-x * x * inv4w2) + c);
            s += r * r;
        }
        return s;
    }

    /// Normal equations J^T J and J^T r at p; returns the sum of squares.
    double normal_equations(const Params& p, Mat<max_params>& jtj, Vec<max_params>& jtr) const {
        jtj = {};
        jtr = {};
        const double a = p[0], mu = p[1], w = p[2], c = n_params_ == 4 ? p[3] : 0.0;
        const double inv4w2 = 1.0 / (4.0 * w * w);
        const double inv2w2 = 1.0 / (2.0 * w * w);
        double s = 0.0;
        for (std::size_t k = 0; k < y_.size(); ++k) {
            const double x = y_.time(k) - mu;
            const double e = std::exp(-x * x * inv4w2);
            const double r = y_[k] - (a * e + c);
            const Vec<max_params> j{e, a * e * x * inv2w2, a * e * x * x * inv2w2 / w, 1.0};
            for (std::size_t i = 0; i < n_params_; ++i) {
                jtr[i] += j[i] * r;
                for (std::size_t m = i; m < n_params_; ++m) jtj[i][m] += j[i] * j[m];
            }
            s += r * r;
        }
        for (std::size_t i = 0; i < n_params_; ++i) {
            for (std::size_t m = 0; m < i; ++m) jtj[i][m] = jtj[m][i];
        }
        return s;
    }

private:
    const Trace& y_;
    std::size_t n_params_;
};

}  // namespace detail

/// Starting point: grid argmax for the center, its value for the amplitude, and
/// the second moment of the positive part of the trace for the width.
inline std::array<double, 3> initial_guess(const Trace& trace) {
    const auto v = trace.values();
    const std::size_t peak = argmax(v);
    const double a0 = v[peak];
    if (!(a0 > 0.0)) throw DegenerateInputError("fit_gaussian: trace has no positive sample");
    const double mu0 = trace.time(peak);
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] <= 0.0) continue;
        const double x = trace.time(k) - mu0;
        m0 += v[k];
        m2 += v[k] * x * x;
    }
    // intensity exp(-x^2/4w^2) has second moment 2 w^2
    const double span = trace.grid().time(trace.size() - 1) - trace.grid().t_start();
    double w0 = std::sqrt(m2 / m0 / 2.0);
    if (!std::isfinite(w0)) w0 = span;
    w0 = std::clamp(w0, trace.grid().dt(), span);
    return {a0, mu0, w0};
}

/// Least-squares fit of A exp(-(t - mu)^2 / 4w^2) (+ c) reported relative to pointer.t0.
inline FitResult fit_gaussian(const Trace& trace, const PointerConfig& pointer, const LmSettings& lm = {}) {
    if (max_abs(trace.values()) == 0.0) throw DegenerateInputError("fit_gaussian: trace is identically zero");
    const auto [a0, mu0, w0] = initial_guess(trace);

    detail::GaussianModel model(trace, lm.fit_offset);
    const std::size_t np = model.n_params();
    detail::GaussianModel::Params p{a0, mu0, w0, 0.0};
    detail::Mat<4> jtj{};
    detail::Vec<4> jtr{};
    double cost = model.normal_equations(p, jtj, jtr);
    double lambda = lm.initial_lambda;

    FitResult out;
    bool converged = false;
    int it = 0;
    while (it < lm.max_iterations) {
        ++it;
        detail::Mat<4> damped = jtj;
        for (std::size_t i = 0; i < np; ++i) damped[i][i] += lambda * jtj[i][i];
        const auto step = detail::solve<4>(damped, jtr, np);
        if (!step) break;

        detail::GaussianModel::Params trial = p;
        double rel_step = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            trial[i] += (*step)[i];
            const double scale = std::max(std::abs(p[i]), i == 3 ? std::abs(p[0]) : 0.0);
            if (scale > 0.0) rel_step = std::max(rel_step, std::abs((*step)[i]) / scale);
        }
        const double trial_cost = trial[2] > 0.0 ? model.cost(trial) : std::numeric_limits<double>::infinity();

        if (trial_cost < cost) {
            const double rel_change = (cost - trial_cost) / cost;
            p = trial;
            cost = model.normal_equations(p, jtj, jtr);
            lambda /= lm.lambda_down;
            if (rel_step < lm.step_tolerance && rel_change < lm.residual_tolerance) {
                converged = true;
                break;
            }
        } else {
            // no decrease and a negligible step: p is a minimum to working precision
            if (rel_step < lm.step_tolerance) {
                converged = true;
                break;
            }
            lambda *= lm.lambda_up;
            if (!std::isfinite(lambda) || lambda > 1e300) break;
        }
        if (cost == 0.0) {
            converged = true;
            break;
        }
    }

    out.iterations = it;
    out.converged = converged;
    out.amplitude = p[0];
    out.delta_t = p[1] - pointer.t0;
    out.width = p[2];
    out.offset = np == 4 ? p[3] : 0.0;
    out.residual_norm = std::sqrt(cost);

    // covariance s^2 (J^T J)^-1, center column only
    detail::Vec<4> unit{};
    unit[1] = 1.0;
    const auto col = detail::solve<4>(jtj, unit, np);
    const double dof = static_cast<double>(trace.size()) - static_cast<double>(np);
    if (col && dof > 0.0 && (*col)[1] >= 0.0) {
        out.se_delta_t = std::sqrt(cost / dof) * std::sqrt((*col)[1]);
    } else {
        out.converged = false;
    }
    return out;
}

}  // namespace awva
