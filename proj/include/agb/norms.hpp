#pragma once

// L_p norms of Walsh spectra on [0,1] with Lebesgue measure.
//
//   lp_dense          exact, synthesizes the cell values (depth <= 24)
//   lp_even_spectral  exact for even integer p: ||f||_{2m}^{2m} = <f^m, f^m>
//   lp_monte_carlo    sampled at the spectrum depth, where f is constant on
//                     every cell, so the only error is sampling error

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agb/errors.hpp"
#include "agb/parallel.hpp"
#include "agb/walsh.hpp"

namespace agb {

enum class EstimateKind { exact, sampled };

struct NormEstimate {
    double p = 2.0;
    double value = 0.0;
    EstimateKind kind = EstimateKind::exact;
    // Sampled estimates only: 95% interval for the norm.
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;

    bool exact() const { return kind == EstimateKind::exact; }

    static NormEstimate exact_value(double p, double value) { return {p, value, EstimateKind::exact, {}, {}, {}, {}}; }
};

inline constexpr std::size_t kMaxDenseNormDepth = 24;
inline constexpr double kNormalQuantile975 = 1.959963984540054;

inline NormEstimate lp_dense(const WalshSpectrum& f, double p) {
    if (!(p >= 1.0)) throw DomainError("lp_dense: p must be >= 1");
    if (f.depth() > kMaxDenseNormDepth) {
        throw DomainError("lp_dense: spectrum depth " + std::to_string(f.depth()) + " exceeds 24");
    }
    const DenseDyadic v = synthesize(f, f.depth());
    double sum = 0.0;
    for (double x : v.values()) sum += std::pow(std::abs(x), p);
    const double mean = std::ldexp(sum, -int(v.depth()));
    return NormEstimate::exact_value(p, std::pow(mean, 1.0 / p));
}

namespace detail {

inline double neumaier_sum_of_squares(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double y = x * x;
        const double t = sum + y;
        comp += sum >= y ? (sum - t) + y : (y - t) + sum;
        sum = t;
    }
    return sum + comp;
}

inline WalshSpectrum spectrum_power(const WalshSpectrum& f, unsigned e, std::size_t budget) {
    if (e == 1) return f;
    if (e % 2 == 0) {
        const WalshSpectrum half = spectrum_power(f, e / 2, budget);
        return spectrum_square(half, budget);
    }
    return spectrum_product(spectrum_power(f, e - 1, budget), f, budget);
}

} // namespace detail

inline bool is_even_integer(double p) { return p >= 2.0 && p == std::floor(p) && std::fmod(p, 2.0) == 0.0; }

/// Exact ||f||_p for even integer p via repeated XOR convolution; no depth limit.
inline NormEstimate lp_even_spectral(const WalshSpectrum& f, double p,
                                     std::size_t pair_budget = kDefaultPairBudget) {
    if (!is_even_integer(p)) throw DomainError("lp_even_spectral: p must be an even integer >= 2");
    const auto m = unsigned(p / 2);
    double power_sum = 0.0;  // ||f||_p^p
    if (m == 1) {
        std::vector<double> c;
        c.reserve(f.size());
        for (const auto& t : f.terms()) c.push_back(t.coefficient);
        power_sum = detail::neumaier_sum_of_squares(c);
    } else if (m % 2 == 0) {
        const WalshSpectrum half = detail::spectrum_power(f, m / 2, pair_budget);
        power_sum = detail::neumaier_sum_of_squares(detail::convolve(half, half, pair_budget).values());
    } else {
        const WalshSpectrum rest = detail::spectrum_power(f, m - 1, pair_budget);
        power_sum = detail::neumaier_sum_of_squares(detail::convolve(rest, f, pair_budget).values());
    }
    return NormEstimate::exact_value(p, std::pow(power_sum, 1.0 / p));
}

namespace detail {

// Uniform random cell of the given depth from a per-sample seed.
inline DyadicPoint random_cell(std::size_t depth, std::uint64_t seed) {
    std::vector<Word> words((depth + kWordBits - 1) / kWordBits);
    std::uint64_t state = seed;
    for (auto& w : words) w = mix64(state++);
    if (!words.empty() && depth % kWordBits != 0) words.back() &= (Word{1} << (depth % kWordBits)) - 1;
    return DyadicPoint(depth, Frequency::from_words(words));
}

} // namespace detail

/// Sampled ||f||_p with a 95% normal-approximation interval. Sample s uses
/// derive_seed(seed, s), so the estimate does not depend on `threads`.
inline NormEstimate lp_monte_carlo(const WalshSpectrum& f, double p, std::size_t samples, std::uint64_t seed,
                                   unsigned threads = 1) {
    if (!(p >= 1.0)) throw DomainError("lp_monte_carlo: p must be >= 1");
    if (samples < 2) throw DomainError("lp_monte_carlo: need at least 2 samples");
    const std::size_t depth = f.depth();
    std::vector<double> abs_values(samples);
    parallel_for(samples, threads, [&](std::size_t s) {
        abs_values[s] = std::abs(f.evaluate(detail::random_cell(depth, derive_seed(seed, s))));
    });

    NormEstimate est;
    est.p = p;
    est.kind = EstimateKind::sampled;
    est.samples = samples;
    est.seed = seed;

    const auto [lo, hi] = std::ranges::minmax(abs_values);
    if (lo == hi) {
        // constant integrand
        est.value = lo;
        est.ci_low = lo;
        est.ci_high = lo;
        return est;
    }
    std::vector<double> powered(samples);
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) sum += powered[s] = std::pow(abs_values[s], p);
    const double n = double(samples);
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : powered) ss += (x - mean) * (x - mean);
    const double stderr_mean = std::sqrt(ss / (n - 1.0) / n);
    const double half_width = kNormalQuantile975 * stderr_mean;
    est.value = std::pow(mean, 1.0 / p);
    est.ci_low = std::pow(std::max(0.0, mean - half_width), 1.0 / p);
    est.ci_high = std::pow(mean + half_width, 1.0 / p);
    return est;
}

enum class NormEngine { automatic, dense, even, monte_carlo };

struct NormOptions {
    NormEngine engine = NormEngine::automatic;
    std::size_t samples = 20000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t pair_budget = kDefaultPairBudget;
};

/// Dispatches to an engine. `automatic` prefers exact results: the spectral
/// engine for even p, dense synthesis when the depth allows, sampling last.
inline NormEstimate lp_norm(const WalshSpectrum& f, double p, const NormOptions& opt = {}) {
    switch (opt.engine) {
    case NormEngine::dense: return lp_dense(f, p);
    case NormEngine::even: return lp_even_spectral(f, p, opt.pair_budget);
    case NormEngine::monte_carlo: return lp_monte_carlo(f, p, opt.samples, opt.seed, opt.threads);
    case NormEngine::automatic: break;
    }
    if (is_even_integer(p)) return lp_even_spectral(f, p, opt.pair_budget);
    if (f.depth() <= kMaxDenseNormDepth) return lp_dense(f, p);
    return lp_monte_carlo(f, p, opt.samples, opt.seed, opt.threads);
}

} // namespace agb
