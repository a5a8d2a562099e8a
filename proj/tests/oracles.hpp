#pragma once

// Independent reference computations used only by the tests. They evaluate
// functions through sin() and explicit sign enumeration, never through the
// library's Walsh machinery.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

// r_k(t) = sign(sin(2^k pi t)), evaluated at an interior point.
inline int rademacher_sin(unsigned k, double t) {
    const double s = std::sin(std::ldexp(std::numbers::pi, int(k)) * t);
    return s > 0 ? 1 : (s < 0 ? -1 : 0);
}

// W_n(t) as the product of Rademachers over the binary digits of n.
inline int walsh_direct(std::uint64_t n, double t) {
    int v = 1;
    for (unsigned j = 1; n != 0; ++j, n >>= 1) {
        if (n & 1U) v *= rademacher_sin(j, t);
    }
    return v;
}

// Midpoint of dyadic cell c at depth d.
inline double cell_midpoint(std::uint64_t cell, unsigned depth) {
    return (double(cell) + 0.5) * std::ldexp(1.0, -int(depth));
}

struct Term {
    std::uint64_t n;
    double c;
};

inline double eval_direct(const std::vector<Term>& f, double t) {
    double v = 0.0;
    for (const auto& term : f) v += term.c * walsh_direct(term.n, t);
    return v;
}

// (mean over cells of |f|^p)^{1/p} using direct evaluation at midpoints.
inline double lp_by_cells(const std::vector<Term>& f, double p, unsigned depth) {
    double s = 0.0;
    const std::uint64_t cells = std::uint64_t{1} << depth;
    for (std::uint64_t c = 0; c < cells; ++c) s += std::pow(std::abs(eval_direct(f, cell_midpoint(c, depth))), p);
    return std::pow(s / double(cells), 1.0 / p);
}

// E|sum a_k eps_k|^p over all 2^n sign patterns.
inline double sign_moment(const std::vector<double>& a, double p) {
    const std::size_t n = a.size();
    double s = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double v = 0.0;
        for (std::size_t k = 0; k < n; ++k) v += (mask >> k & 1U) ? -a[k] : a[k];
        s += std::pow(std::abs(v), p);
    }
    return s / double(std::uint64_t{1} << n);
}

// 3 (sum a^2)^2 - 2 sum a^4
inline double fourth_moment_identity(const std::vector<double>& a) {
    double s2 = 0.0, s4 = 0.0;
    for (double x : a) {
        s2 += x * x;
        s4 += x * x * x * x;
    }
    return 3.0 * s2 * s2 - 2.0 * s4;
}

} // namespace oracle
