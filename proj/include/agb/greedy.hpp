#pragma once

// Expansion coefficients, greedy ordering, greedy approximants G_m, linear
// partial sums S_n, and the per-block coefficient classifier.
//
// The basis is orthonormal, so the coefficient functionals are
// e*_m(f) = <f, psi_m>. The greedy ordering lists nonzero coefficients by
// decreasing magnitude; equal magnitudes keep increasing index order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "agb/basis.hpp"
#include "agb/errors.hpp"
#include "agb/norms.hpp"
#include "agb/olevskii.hpp"
#include "agb/walsh.hpp"

namespace agb {

/// Magnitudes below this are treated as zero when ordering or analyzing.
inline constexpr double kZeroCoefficient = 1e-15;

inline void validate_coefficients(std::span<const Coefficient> coeffs) {
    std::vector<std::uint64_t> idx;
    idx.reserve(coeffs.size());
    for (const auto& c : coeffs) {
        if (c.index == 0) throw DomainError("coefficient index must be >= 1");
        idx.push_back(c.index);
    }
    std::ranges::sort(idx);
    if (std::ranges::adjacent_find(idx) != idx.end()) throw DomainError("duplicate coefficient index");
}

/// <f, psi_m> for every psi_m sharing a Walsh frequency with f, sorted by m.
/// Throws DomainError if f has a frequency outside the plan horizon.
inline CoefficientList analyze(const WalshSpectrum& f, const BlockPlan& plan,
                               std::uint64_t cap = kDefaultMaterializationCap) {
    // block -> (column -> coefficient of the block symbol)
    std::map<std::size_t, std::map<std::uint64_t, double>> blocks;
    for (const auto& t : f.terms()) {
        const auto loc = locate_symbol(plan, t.frequency);
        if (!loc) throw DomainError("analyze: frequency 0x" + t.frequency.to_hex() + " outside plan horizon");
        blocks[loc->block][loc->row] = t.coefficient;
    }
    CoefficientList out;
    for (const auto& [k, symbols] : blocks) {
        const std::uint64_t n = detail::materializable_block(plan, k, cap);
        const std::size_t g = plan.exponent(k);
        std::vector<double> x(n + 1, 0.0);
        std::vector<bool> present(n + 1, false);
        for (const auto& [j, c] : symbols) {
            x[j] = c;
            present[j] = true;
        }
        const std::uint64_t base = plan.to_global(k, 1) - 1;
        for (std::uint64_t i = 1; i <= n; ++i) {
            double y = 0.0;
            bool touches = false;
            for (const auto& nz : olevskii_row(g, i)) {
                if (!present[nz.column]) continue;
                touches = true;
                y += nz.entry.value() * x[nz.column];
            }
            if (touches && std::abs(y) >= kZeroCoefficient) out.push_back({base + i, y});
        }
    }
    return out;
}

/// Coefficients in greedy order (the permutation rho applied to the support).
struct GreedyOrdering {
    std::vector<Coefficient> order;

    std::vector<std::uint64_t> indices() const {
        std::vector<std::uint64_t> r;
        r.reserve(order.size());
        for (const auto& c : order) r.push_back(c.index);
        return r;
    }
};

inline GreedyOrdering greedy_order(std::span<const Coefficient> coeffs) {
    validate_coefficients(coeffs);
    GreedyOrdering g;
    for (const auto& c : coeffs) {
        if (std::abs(c.value) >= kZeroCoefficient) g.order.push_back(c);
    }
    std::ranges::sort(g.order, [](const Coefficient& a, const Coefficient& b) {
        const double ma = std::abs(a.value), mb = std::abs(b.value);
        if (ma != mb) return ma > mb;
        return a.index < b.index;
    });
    return g;
}

struct TraceStep {
    std::size_t m = 0;
    std::uint64_t selected = 0;  // 0 for the initial row (G_0 = 0)
    double coefficient = 0.0;
    double residual_l2 = 0.0;
    std::vector<NormEstimate> residual_norms;     // ||f - G_m f||_p per requested p
    std::vector<NormEstimate> approximant_norms;  // ||G_m f||_p per requested p
};

struct ApproximantTrace {
    std::vector<TraceStep> steps;
};

struct GreedyResult {
    WalshSpectrum approximant;
    ApproximantTrace trace;
};

/// G_m for f = sum_j coeffs_j psi_j, with the history G_0, ..., G_m. For m
/// beyond the support the approximant is the full expansion.
inline GreedyResult greedy_expansion(std::span<const Coefficient> coeffs, const BlockPlan& plan, std::size_t m,
                                     std::span<const double> ps = {}, const NormOptions& norm_options = {},
                                     std::uint64_t cap = kDefaultMaterializationCap) {
    const GreedyOrdering rho = greedy_order(coeffs);
    const std::size_t steps = std::min(m, rho.order.size());

    GreedyResult result;
    WalshSpectrum residual = combination_spectrum(plan, rho.order, cap);
    WalshSpectrum approx;
    auto record = [&](std::size_t step, std::uint64_t selected, double coefficient) {
        TraceStep t{step, selected, coefficient, residual.l2_norm(), {}, {}};
        for (double p : ps) {
            t.residual_norms.push_back(lp_norm(residual, p, norm_options));
            t.approximant_norms.push_back(lp_norm(approx, p, norm_options));
        }
        result.trace.steps.push_back(std::move(t));
    };
    record(0, 0, 0.0);
    for (std::size_t j = 0; j < steps; ++j) {
        const auto& c = rho.order[j];
        const WalshSpectrum term = spectrum_scale(basis_element(plan, c.index, cap), c.value);
        approx = spectrum_add(approx, term);
        residual = spectrum_add(residual, spectrum_scale(term, -1.0));
        record(j + 1, c.index, c.value);
    }
    const std::vector<Coefficient> chosen(rho.order.begin(), rho.order.begin() + std::ptrdiff_t(steps));
    result.approximant = combination_spectrum(plan, chosen, cap);
    return result;
}

/// As greedy_expansion, with the coefficients obtained by analyzing f.
inline GreedyResult greedy_approximant(const WalshSpectrum& f, const BlockPlan& plan, std::size_t m,
                                       std::span<const double> ps = {}, const NormOptions& norm_options = {},
                                       std::uint64_t cap = kDefaultMaterializationCap) {
    return greedy_expansion(analyze(f, plan, cap), plan, m, ps, norm_options, cap);
}

/// G_m f from precomputed coefficients, without a trace.
inline WalshSpectrum greedy_sum(const BlockPlan& plan, const GreedyOrdering& rho, std::size_t m,
                                std::uint64_t cap = kDefaultMaterializationCap) {
    const std::size_t steps = std::min(m, rho.order.size());
    return combination_spectrum(plan, std::span<const Coefficient>(rho.order.data(), steps), cap);
}

/// S_n f = sum_{m <= n} <f, psi_m> psi_m.
inline WalshSpectrum partial_sum(const WalshSpectrum& f, const BlockPlan& plan, std::uint64_t n,
                                 std::uint64_t cap = kDefaultMaterializationCap) {
    CoefficientList kept;
    for (const auto& c : analyze(f, plan, cap)) {
        if (c.index <= n) kept.push_back(c);
    }
    return combination_spectrum(plan, kept, cap);
}

struct LambdaBlock {
    std::size_t block = 0;
    double lower = 0.0;  // 1/N_k
    double upper = 0.0;  // N_k^{-1/10}
    std::vector<std::uint64_t> middle;  // lower < |c| < upper
    std::vector<std::uint64_t> small;   // |c| <= lower
    std::vector<std::uint64_t> large;   // |c| >= upper
};

struct LambdaPartition {
    std::vector<LambdaBlock> blocks;  // one per block 1..K
    // 1/N_k >= N_{k+1}^{-1/10} for every k < K.
    bool plan_separates = false;
    // Every middle coefficient of block k exceeds every middle coefficient of
    // later blocks, so greedy rearrangement of the middle sets stays in blocks.
    bool data_separates = false;
};

inline LambdaPartition lambda_classify(std::span<const Coefficient> coeffs, const BlockPlan& plan) {
    validate_coefficients(coeffs);
    LambdaPartition out;
    for (std::size_t k = 1; k <= plan.horizon(); ++k) {
        const double g = double(plan.exponent(k));
        out.blocks.push_back({k, std::exp2(-g), std::exp2(-g / 10.0), {}, {}, {}});
    }
    for (const auto& c : coeffs) {
        auto& b = out.blocks[plan.to_block(c.index).block - 1];
        const double a = std::abs(c.value);
        if (a <= b.lower) b.small.push_back(c.index);
        else if (a >= b.upper) b.large.push_back(c.index);
        else b.middle.push_back(c.index);
    }
    out.plan_separates = true;
    for (std::size_t k = 1; k < out.blocks.size(); ++k) {
        if (out.blocks[k - 1].lower < out.blocks[k].upper) out.plan_separates = false;
    }
    std::map<std::uint64_t, double> magnitude;
    for (const auto& c : coeffs) magnitude[c.index] = std::abs(c.value);
    out.data_separates = true;
    double later_max = -1.0;  // max middle magnitude over blocks after k
    for (std::size_t k = out.blocks.size(); k-- > 0;) {
        double lo = std::numeric_limits<double>::infinity(), hi = -1.0;
        for (auto m : out.blocks[k].middle) {
            lo = std::min(lo, magnitude[m]);
            hi = std::max(hi, magnitude[m]);
        }
        if (!out.blocks[k].middle.empty() && !(lo > later_max)) out.data_separates = false;
        later_max = std::max(later_max, hi);
    }
    return out;
}

} // namespace agb
