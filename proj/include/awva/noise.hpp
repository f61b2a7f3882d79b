#pragma once

// Seeded Gaussian white noise, injection, SNR and spectral diagnostics.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "awva/core.hpp"
#include "awva/rng.hpp"

namespace awva {

enum class Injection { BeforeBS, AfterBS };

struct NoiseSpec {
    std::optional<double> sigma2;         // per-sample variance, I0^2
    std::optional<double> target_snr_db;  // resolved to sigma2 by calibrate_sigma
    std::uint64_t seed = 0;
    Injection injection = Injection::AfterBS;

    void validate() const {
        if (sigma2.has_value() == target_snr_db.has_value()) {
            throw ConfigError("noise: exactly one of sigma2 / target_snr_db must be set");
        }
        if (sigma2 && !(*sigma2 >= 0.0 && std::isfinite(*sigma2))) {
            throw ConfigError("noise.sigma2 must be a finite, nonnegative variance");
        }
    }
};

/// Unit-variance deviates for (seed, n); gen_noise scales these by sqrt(sigma2).
inline std::vector<double> unit_noise(std::size_t n, std::uint64_t seed) {
    BoxMuller normal(seed);
    std::vector<double> v(n);
    for (double& x : v) x = normal();
    return v;
}

inline Trace gen_noise(const TimeGrid& grid, const NoiseSpec& spec) {
    if (!spec.sigma2) throw ConfigError("gen_noise: noise spec has no concrete sigma2 (calibrate first)");
    spec.validate();
    std::vector<double> v = unit_noise(grid.size(), spec.seed);
    const double sd = std::sqrt(*spec.sigma2);
    for (double& x : v) x *= sd;
    return Trace(grid, std::move(v), Unit::Intensity);
}

/// 10*log10(max|signal| / max|noise|), the amplitude-ratio convention.
inline double snr_db(const Trace& signal, const Trace& noise) {
    require_same_grid(signal, noise, "snr_db");
    const double n = max_abs(noise.values());
    if (!(n > 0.0)) throw DegenerateInputError("snr_db: noise trace is identically zero");
    return 10.0 * std::log10(max_abs(signal.values()) / n);
}

/// Variance that makes snr_db(signal, gen_noise(grid, {sigma2, seed})) hit the target
/// for this particular seed.
inline double calibrate_sigma(double target_snr_db, const Trace& signal, const TimeGrid& grid, std::uint64_t seed) {
    const double s = max_abs(signal.values());
    if (!(s > 0.0)) throw DegenerateInputError("calibrate_sigma: signal is identically zero");
    if (!std::isfinite(target_snr_db)) throw ConfigError("calibrate_sigma: target SNR must be finite");
    const std::vector<double> unit = unit_noise(grid.size(), seed);
    const double m = max_abs(unit);
    const double sd = s * std::pow(10.0, -target_snr_db / 10.0) / m;
    return sd * sd;
}

inline Trace inject(const Trace& trace, const Trace& noise) {
    require_same_grid(trace, noise, "inject");
    std::vector<double> out(trace.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = trace[k] + noise[k];
    return Trace(trace.grid(), std::move(out), trace.unit());
}

// ---------------------------------------------------------------------------
// Spectra

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                // twiddles from the angle directly, no recurrence drift
                const std::complex<double> w(std::cos(ang * static_cast<double>(k)),
                                             std::sin(ang * static_cast<double>(k)));
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

struct Spectrum {
    std::vector<double> freqs;      // Hz, 0 .. 1/(2 dt)
    std::vector<double> psd;        // |X|^2 dt / n
    std::vector<double> magnitude;  // |X|
    std::size_t samples = 0;        // original trace length n
    std::size_t fft_length = 0;     // after zero padding
    bool zero_padded = false;
};

/// One-sided periodogram of the trace (mean kept), zero-padded to a power of two.
inline Spectrum spectrum(const Trace& trace) {
    const std::size_t n = trace.size();
    if (n < 2) throw DegenerateInputError("spectrum: need at least 2 samples");
    const std::size_t m = next_pow2(n);
    std::vector<std::complex<double>> buf(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) buf[k] = trace[k];
    fft_radix2(buf);

    const double dt = trace.grid().dt();
    Spectrum s;
    s.samples = n;
    s.fft_length = m;
    s.zero_padded = m != n;
    const std::size_t bins = m / 2 + 1;
    s.freqs.resize(bins);
    s.psd.resize(bins);
    s.magnitude.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        s.freqs[k] = static_cast<double>(k) / (static_cast<double>(m) * dt);
        const double mag = std::abs(buf[k]);
        s.magnitude[k] = mag;
        s.psd[k] = mag * mag * dt / static_cast<double>(n);
    }
    return s;
}

}  // namespace awva
