#pragma once

// Auto-correlative intensity (running integral of a trace product) and the
// sensitivities of both schemes.

#include <cmath>
#include <limits>
#include <vector>

#include "awva/core.hpp"
#include "awva/fit.hpp"

namespace awva {

/// Running trapezoid integral of a product of two traces; values[0] = 0.
class ThetaCurve {
public:
    ThetaCurve(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) throw ShapeError("theta curve length does not match its grid");
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t k) const noexcept { return values_[k]; }
    [[nodiscard]] double at(double t) const { return values_[grid_.index_of(t)]; }
    [[nodiscard]] double final_value() const noexcept { return values_.back(); }

    [[nodiscard]] Trace as_trace() const { return Trace(grid_, values_, Unit::IntensitySquaredTime); }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

inline ThetaCurve theta_curve(const Trace& a, const Trace& b) {
    require_same_grid(a, b, "theta_curve");
    const std::size_t n = a.size();
    const double half_dt = 0.5 * a.grid().dt();
    std::vector<double> out(n, 0.0);
    // Neumaier-compensated running sum
    double sum = 0.0, comp = 0.0;
    double prev = a[0] * b[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double cur = a[k] * b[k];
        const double term = half_dt * (prev + cur);
        const double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        out[k] = sum + comp;
        prev = cur;
    }
    return ThetaCurve(a.grid(), std::move(out));
}

struct SensitivityRecord {
    static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    double k1 = nan;
    double e1 = nan;
    double k2_at_report = nan;
    double k2_max = nan;
    double t_at_max = nan;
    bool valid = false;
};

/// K1 = (dt_tau - dt_0)/tau with E1 = (|se_tau| + |se_0|)/tau; valid iff both fits
/// converged and K1 - E1 > 0.
inline SensitivityRecord k1_sensitivity(const FitResult& fit0, const FitResult& fit_tau, double tau) {
    if (tau == 0.0) throw NumericalError("k1_sensitivity: tau must be nonzero");
    SensitivityRecord r;
    r.k1 = (fit_tau.delta_t - fit0.delta_t) / tau;
    r.e1 = (std::abs(fit_tau.se_delta_t) + std::abs(fit0.se_delta_t)) / std::abs(tau);
    r.valid = fit0.converged && fit_tau.converged && (r.k1 - r.e1 > 0.0);
    return r;
}

/// K2(t) = (theta0(t) - theta_tau(t))/tau over the whole grid.
inline std::vector<double> k2_curve(const ThetaCurve& theta0, const ThetaCurve& theta_tau, double tau) {
    if (tau == 0.0) throw NumericalError("k2_sensitivity: tau must be nonzero");
    if (!(theta0.grid() == theta_tau.grid())) throw ShapeError("k2_sensitivity: curves are on different grids");
    std::vector<double> k2(theta0.size());
    for (std::size_t k = 0; k < k2.size(); ++k) k2[k] = (theta0[k] - theta_tau[k]) / tau;
    return k2;
}

inline SensitivityRecord k2_sensitivity(const ThetaCurve& theta0, const ThetaCurve& theta_tau, double tau,
                                        double report_time) {
    const std::vector<double> k2 = k2_curve(theta0, theta_tau, tau);
    SensitivityRecord r;
    r.k2_at_report = k2[theta0.grid().index_of(report_time)];
    const std::size_t best = argmax(k2);
    r.k2_max = k2[best];
    r.t_at_max = theta0.grid().time(best);
    r.valid = r.k2_at_report > 0.0;
    return r;
}

}  // namespace awva
