#pragma once

// Olevskii matrices A^k: 2^k x 2^k orthogonal matrices whose rows have
// uniformly bounded absolute sums. Entries are generated on demand; no
// dense matrix is ever built.
//
//   a_{i1} = 2^{-k/2}
//   for j = 2^s + nu, 1 <= nu <= 2^s, s = 0..k-1:
//     a_{ij} = +2^{(s-k)/2}  if (nu-1) 2^{k-s} < i <= (2nu-1) 2^{k-s-1}
//            = -2^{(s-k)/2}  if (2nu-1) 2^{k-s-1} < i <= nu 2^{k-s}
//            = 0             otherwise

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agb/errors.hpp"

namespace agb {

inline constexpr std::size_t kMaxOlevskiiOrder = 62;
inline constexpr std::size_t kDefaultOrthogonalityCap = 10;

/// 2^{e/2}, exact for even e.
inline double half_power_of_two(int e) {
    if (e % 2 == 0) return std::ldexp(1.0, e / 2);
    // e odd: 2^{e/2} = 2^{(e+1)/2} / sqrt(2)
    return std::ldexp(std::numbers::sqrt2 / 2.0, (e + 1) / 2);
}

/// One entry of A^k as sign * 2^{(scale-k)/2}. The first column uses scale 0.
struct OlevskiiEntry {
    int sign = 0;
    int scale = 0;
    int order = 0;

    double magnitude() const { return half_power_of_two(scale - order); }
    double value() const { return sign == 0 ? 0.0 : sign * magnitude(); }

    friend bool operator==(const OlevskiiEntry&, const OlevskiiEntry&) = default;
};

namespace detail {

inline void check_order(std::size_t k) {
    if (k == 0 || k > kMaxOlevskiiOrder) {
        throw DomainError("Olevskii order must be in 1.." + std::to_string(kMaxOlevskiiOrder));
    }
}

inline void check_index(std::size_t k, std::uint64_t idx, const char* what) {
    if (idx == 0 || idx > (std::uint64_t{1} << k)) {
        throw DomainError(std::string("Olevskii ") + what + " index out of range");
    }
}

// Band s of column j >= 2.
inline int column_band(std::uint64_t j) { return int(std::bit_width(j - 1)) - 1; }

} // namespace detail

inline OlevskiiEntry olevskii_entry(std::size_t k, std::uint64_t i, std::uint64_t j) {
    detail::check_order(k);
    detail::check_index(k, i, "row");
    detail::check_index(k, j, "column");
    const int order = int(k);
    if (j == 1) return {1, 0, order};
    const int s = detail::column_band(j);
    const std::uint64_t nu = j - (std::uint64_t{1} << s);
    const std::uint64_t half = std::uint64_t{1} << (k - std::size_t(s) - 1);
    const std::uint64_t full = half << 1;
    if ((nu - 1) * full < i && i <= (2 * nu - 1) * half) return {1, s, order};
    if ((2 * nu - 1) * half < i && i <= nu * full) return {-1, s, order};
    return {0, s, order};
}

struct RowNonzero {
    std::uint64_t column;
    OlevskiiEntry entry;
};

/// The k+1 nonzero entries of row i, ordered by column.
inline std::vector<RowNonzero> olevskii_row(std::size_t k, std::uint64_t i) {
    detail::check_order(k);
    detail::check_index(k, i, "row");
    std::vector<RowNonzero> row;
    row.reserve(k + 1);
    const int order = int(k);
    row.push_back({1, {1, 0, order}});
    for (std::size_t s = 0; s < k; ++s) {
        const std::uint64_t half = std::uint64_t{1} << (k - s - 1);
        const std::uint64_t full = half << 1;
        const std::uint64_t nu = (i - 1) / full + 1;
        const int sign = i <= (2 * nu - 1) * half ? 1 : -1;
        row.push_back({(std::uint64_t{1} << s) + nu, {sign, int(s), order}});
    }
    return row;
}

enum class Accumulation { floating, exact };

/// max |(A A^T)_{ii'} - delta_{ii'}| over all row pairs. In exact mode each
/// product of same-column entries is +-2^{s-k}, accumulated as integers over
/// the common denominator 2^k.
inline double check_orthogonality(std::size_t k, Accumulation mode = Accumulation::floating,
                                  std::size_t cap = kDefaultOrthogonalityCap) {
    detail::check_order(k);
    if (k > cap) throw ResourceError("check_orthogonality: order exceeds cap " + std::to_string(cap));
    const std::uint64_t n = std::uint64_t{1} << k;
    std::vector<std::vector<RowNonzero>> rows;
    rows.reserve(n);
    for (std::uint64_t i = 1; i <= n; ++i) rows.push_back(olevskii_row(k, i));

    double worst = 0.0;
    for (std::uint64_t a = 0; a < n; ++a) {
        for (std::uint64_t b = a; b < n; ++b) {
            std::int64_t exact_sum = 0;
            double float_sum = 0.0;
            auto p = rows[a].begin();
            auto q = rows[b].begin();
            while (p != rows[a].end() && q != rows[b].end()) {
                if (p->column < q->column) {
                    ++p;
                } else if (q->column < p->column) {
                    ++q;
                } else {
                    const int sign = p->entry.sign * q->entry.sign;
                    exact_sum += sign * (std::int64_t{1} << p->entry.scale);
                    float_sum += p->entry.value() * q->entry.value();
                    ++p;
                    ++q;
                }
            }
            double dev = 0.0;
            if (mode == Accumulation::exact) {
                const std::int64_t target = a == b ? std::int64_t(n) : 0;
                dev = std::ldexp(double(std::abs(exact_sum - target)), -int(k));
            } else {
                dev = std::abs(float_sum - (a == b ? 1.0 : 0.0));
            }
            worst = std::max(worst, dev);
        }
    }
    return worst;
}

/// sum_j |a_{ij}| for row i of A^k.
inline double row_abs_sum(std::size_t k, std::uint64_t i) {
    double s = 0.0;
    for (const auto& nz : olevskii_row(k, i)) s += nz.entry.magnitude();
    return s;
}

/// 2^{-k/2} + sum_{s=0}^{k-1} 2^{(s-k)/2}; increases to 1 + sqrt(2).
inline double row_abs_sum_closed_form(std::size_t k) {
    const double q = std::numbers::sqrt2 / 2.0;
    const double tail = std::pow(q, double(k));
    // geometric series sum_{t=1}^{k} q^t = q (1 - q^k) / (1 - q)
    return tail + q * (1.0 - tail) / (1.0 - q);
}

/// Sparse column vector: (column, value) pairs, increasing column, no zeros.
using SparseColumns = std::vector<std::pair<std::uint64_t, double>>;

/// sum_{i in rows} w_i a_{ij} for every column j. Within a column all nonzero
/// entries share one magnitude, so signed weights are summed first and scaled
/// once; with unit weights the sums are integer multiples of that magnitude.
inline SparseColumns weighted_column_sums(std::size_t k, std::span<const std::uint64_t> rows,
                                          std::span<const double> weights) {
    if (rows.size() != weights.size()) throw DomainError("weighted_column_sums: size mismatch");
    struct Contribution {
        std::uint64_t column;
        int scale;
        double signed_weight;
    };
    std::vector<Contribution> parts;
    parts.reserve(rows.size() * (k + 1));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& nz : olevskii_row(k, rows[r])) {
            parts.push_back({nz.column, nz.entry.scale, nz.entry.sign * weights[r]});
        }
    }
    std::ranges::stable_sort(parts, {}, &Contribution::column);
    SparseColumns out;
    for (std::size_t a = 0; a < parts.size();) {
        std::size_t b = a;
        double w = 0.0;
        while (b < parts.size() && parts[b].column == parts[a].column) w += parts[b++].signed_weight;
        if (w != 0.0) out.emplace_back(parts[a].column, w * half_power_of_two(parts[a].scale - int(k)));
        a = b;
    }
    return out;
}

/// sum_{i in rows} a_{ij} for every column j; `rows` is a set of row indices.
inline SparseColumns column_sums(std::size_t k, std::span<const std::uint64_t> rows) {
    std::vector<std::uint64_t> sorted(rows.begin(), rows.end());
    std::ranges::sort(sorted);
    if (std::ranges::adjacent_find(sorted) != sorted.end()) {
        throw DomainError("column_sums: duplicate row index");
    }
    const std::vector<double> ones(rows.size(), 1.0);
    return weighted_column_sums(k, rows, ones);
}

/// Coefficient of each symbol in sum_{i in rows} (A^k symbols)_i, i.e. the
/// column sums of the selected rows attached to their symbols.
template <class Symbol>
std::vector<std::pair<Symbol, double>> apply_rows(std::size_t k, std::span<const std::uint64_t> rows,
                                                  std::span<const Symbol> symbols) {
    detail::check_order(k);
    if (symbols.size() != (std::uint64_t{1} << k)) {
        throw DomainError("apply_rows: expected 2^k symbols");
    }
    std::vector<std::pair<Symbol, double>> out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) out.emplace_back(s, 0.0);
    for (const auto& [column, value] : column_sums(k, rows)) out[column - 1].second = value;
    return out;
}

} // namespace agb
