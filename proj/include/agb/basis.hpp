#pragma once

// Block schedule and synthesis of the basis elements.
//
// The Walsh system is split into Rademachers r_1, r_2, ... and the remaining
// functions phi_1, phi_2, ... (in Paley order). Block k collects
// {phi_k, r_{F_{k-1}+1}, ..., r_{F_k}} (N_k = 2^{g(k)} functions) and is
// rotated by the Olevskii matrix A^{g(k)}:
//
//   psi_i^{(k)} = phi_k / sqrt(N_k) + sum_{j=2}^{N_k} a_{ij} r_{F_{k-1}+j-1}
//
// Basis elements are numbered globally block after block, starting at 1.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "agb/errors.hpp"
#include "agb/olevskii.hpp"
#include "agb/walsh.hpp"

namespace agb {

using BigInt = boost::multiprecision::cpp_int;

/// Largest block (in spectrum terms) that may be materialized by default.
inline constexpr std::uint64_t kDefaultMaterializationCap = std::uint64_t{1} << 20;

/// Block exponents g(1), ..., g(K); N_k = 2^{g(k)}.
struct GrowthSchedule {
    std::vector<std::size_t> exponents;

    /// g(k) = 10^k. Only block 1 is materializable.
    static GrowthSchedule paper(std::size_t horizon = 2) {
        GrowthSchedule s;
        std::size_t g = 1;
        for (std::size_t k = 1; k <= horizon; ++k) s.exponents.push_back(g *= 10);
        return s;
    }

    /// g = (2, 4, 8): N = (4, 16, 256), F = (3, 18, 273).
    static GrowthSchedule desk() { return {{2, 4, 8}}; }
};

/// Position of a basis element inside its block (both 1-based).
struct BlockIndex {
    std::size_t block = 0;
    std::uint64_t row = 0;

    friend bool operator==(const BlockIndex&, const BlockIndex&) = default;
    friend auto operator<=>(const BlockIndex&, const BlockIndex&) = default;
};

/// One expansion coefficient: global basis index m >= 1 and its value.
struct Coefficient {
    std::uint64_t index = 0;
    double value = 0.0;

    friend bool operator==(const Coefficient&, const Coefficient&) = default;
};

using CoefficientList = std::vector<Coefficient>;

class BlockPlan {
public:
    const GrowthSchedule& schedule() const { return schedule_; }
    std::size_t horizon() const { return schedule_.exponents.size(); }

    std::size_t exponent(std::size_t k) const {
        check_block(k);
        return schedule_.exponents[k - 1];
    }

    BigInt block_size(std::size_t k) const { return BigInt(1) << exponent(k); }

    /// F_k for k = 0..K, with F_0 = 0 and F_k - F_{k-1} = N_k - 1.
    BigInt offset(std::size_t k) const {
        if (k > horizon()) throw DomainError("block beyond plan horizon");
        BigInt f = 0;
        for (std::size_t b = 1; b <= k; ++b) f += block_size(b) - 1;
        return f;
    }

    std::optional<std::uint64_t> block_size_u64(std::size_t k) const {
        const std::size_t g = exponent(k);
        if (g >= 64) return std::nullopt;
        return std::uint64_t{1} << g;
    }

    std::optional<std::uint64_t> offset_u64(std::size_t k) const {
        const BigInt f = offset(k);
        if (f > BigInt(std::numeric_limits<std::uint64_t>::max())) return std::nullopt;
        return f.convert_to<std::uint64_t>();
    }

    /// g(k+1) >= 2 g(k) for all k < K.
    bool democracy_condition() const { return ratio_condition(2); }

    /// g(k+1) >= 10 g(k) for all k < K, i.e. 1/N_k >= N_{k+1}^{-1/10}.
    bool lambda_separation() const { return ratio_condition(10); }

    /// Number of basis elements within the horizon, if it fits in 64 bits.
    std::optional<std::uint64_t> total_size() const {
        BigInt total = 0;
        for (std::size_t k = 1; k <= horizon(); ++k) total += block_size(k);
        if (total > BigInt(std::numeric_limits<std::uint64_t>::max())) return std::nullopt;
        return total.convert_to<std::uint64_t>();
    }

    std::uint64_t to_global(std::size_t k, std::uint64_t i) const {
        check_block(k);
        const BigInt n = block_size(k);
        if (i == 0 || BigInt(i) > n) throw DomainError("to_global: row outside block");
        BigInt m = i;
        for (std::size_t b = 1; b < k; ++b) m += block_size(b);
        if (m > BigInt(std::numeric_limits<std::uint64_t>::max())) {
            throw ResourceError("to_global: index does not fit in 64 bits");
        }
        return m.convert_to<std::uint64_t>();
    }

    BlockIndex to_block(std::uint64_t m) const {
        if (m == 0) throw DomainError("to_block: global index must be >= 1");
        BigInt rest = m;
        for (std::size_t k = 1; k <= horizon(); ++k) {
            const BigInt n = block_size(k);
            if (rest <= n) return {k, rest.convert_to<std::uint64_t>()};
            rest -= n;
        }
        throw DomainError("to_block: index " + std::to_string(m) + " beyond plan horizon");
    }

    /// Human-readable tag used in result files, e.g. "g=2,4,8".
    std::string label() const {
        std::string s = "g=";
        for (std::size_t k = 0; k < horizon(); ++k) {
            if (k) s += ',';
            s += std::to_string(schedule_.exponents[k]);
        }
        return s;
    }

    friend BlockPlan validate_schedule(GrowthSchedule schedule);

private:
    explicit BlockPlan(GrowthSchedule s) : schedule_(std::move(s)) {}

    void check_block(std::size_t k) const {
        if (k == 0 || k > horizon()) {
            throw DomainError("block " + std::to_string(k) + " outside plan horizon " +
                              std::to_string(horizon()));
        }
    }

    bool ratio_condition(std::size_t factor) const {
        for (std::size_t k = 1; k < horizon(); ++k) {
            if (schedule_.exponents[k] < factor * schedule_.exponents[k - 1]) return false;
        }
        return true;
    }

    GrowthSchedule schedule_;
};

/// Builds a plan; rejects empty, zero or non-increasing exponents. Weak
/// schedules are accepted and reported through the condition flags.
inline BlockPlan validate_schedule(GrowthSchedule schedule) {
    const auto& g = schedule.exponents;
    if (g.empty()) throw DomainError("growth schedule is empty");
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] == 0) throw DomainError("growth schedule exponents must be >= 1");
        if (k > 0 && g[k] <= g[k - 1]) throw DomainError("growth schedule must be strictly increasing");
    }
    return BlockPlan(std::move(schedule));
}

namespace detail {

inline std::uint64_t materializable_block(const BlockPlan& plan, std::size_t k, std::uint64_t cap) {
    const auto n = plan.block_size_u64(k);
    if (!n || *n > cap) {
        throw ResourceError("block " + std::to_string(k) + " has 2^" + std::to_string(plan.exponent(k)) +
                            " elements, above the materialization cap of " + std::to_string(cap));
    }
    return *n;
}

} // namespace detail

/// Walsh frequency of the j-th function (1-based) of block k:
/// phi_k for j = 1, r_{F_{k-1}+j-1} otherwise.
inline Frequency block_symbol(const BlockPlan& plan, std::size_t k, std::uint64_t j) {
    if (j == 1) return phi_index(k);
    const auto base = plan.offset_u64(k - 1);
    if (!base) throw ResourceError("block offset does not fit in 64 bits");
    return rademacher_index(std::size_t(*base + j - 1));
}

/// Locates a Walsh frequency in the block structure: (block, column).
inline std::optional<BlockIndex> locate_symbol(const BlockPlan& plan, const Frequency& n) {
    if (n.popcount() == 1) {
        const std::uint64_t r = n.width();  // n = r_r
        for (std::size_t k = 1; k <= plan.horizon(); ++k) {
            const auto hi = plan.offset_u64(k);
            if (!hi) return std::nullopt;
            if (r <= *hi) return BlockIndex{k, r - *plan.offset_u64(k - 1) + 1};
        }
        return std::nullopt;
    }
    const auto rank = phi_rank(n);
    if (!rank || *rank > plan.horizon()) return std::nullopt;
    return BlockIndex{std::size_t(*rank), 1};
}

namespace detail {

inline void append_block_columns(const BlockPlan& plan, std::size_t k, const SparseColumns& columns,
                                 std::vector<WalshTerm>& out) {
    for (const auto& [j, value] : columns) out.push_back({block_symbol(plan, k, j), value});
}

} // namespace detail

/// Walsh spectrum of psi_i^{(k)}: g(k)+1 terms with unit l2 norm.
inline WalshSpectrum psi_spectrum(const BlockPlan& plan, std::size_t k, std::uint64_t i,
                                  std::uint64_t cap = kDefaultMaterializationCap) {
    const std::uint64_t n = detail::materializable_block(plan, k, cap);
    if (i == 0 || i > n) throw DomainError("psi_spectrum: row outside block");
    std::vector<WalshTerm> terms;
    for (const auto& nz : olevskii_row(plan.exponent(k), i)) {
        terms.push_back({block_symbol(plan, k, nz.column), nz.entry.value()});
    }
    return WalshSpectrum(std::move(terms));
}

/// psi_m by global index.
inline WalshSpectrum basis_element(const BlockPlan& plan, std::uint64_t m,
                                   std::uint64_t cap = kDefaultMaterializationCap) {
    const auto [k, i] = plan.to_block(m);
    return psi_spectrum(plan, k, i, cap);
}

/// sum_m c_m psi_m, built blockwise from weighted Olevskii column sums.
inline WalshSpectrum combination_spectrum(const BlockPlan& plan, std::span<const Coefficient> coeffs,
                                          std::uint64_t cap = kDefaultMaterializationCap) {
    std::map<std::size_t, std::pair<std::vector<std::uint64_t>, std::vector<double>>> by_block;
    for (const auto& c : coeffs) {
        const auto [k, i] = plan.to_block(c.index);
        auto& [rows, weights] = by_block[k];
        rows.push_back(i);
        weights.push_back(c.value);
    }
    std::vector<WalshTerm> terms;
    for (const auto& [k, rw] : by_block) {
        detail::materializable_block(plan, k, cap);
        detail::append_block_columns(plan, k, weighted_column_sums(plan.exponent(k), rw.first, rw.second), terms);
    }
    return WalshSpectrum(std::move(terms));
}

/// sum_{m in A} psi_m for a set A of global indices.
inline WalshSpectrum sum_spectrum(const BlockPlan& plan, std::span<const std::uint64_t> members,
                                  std::uint64_t cap = kDefaultMaterializationCap) {
    std::map<std::size_t, std::vector<std::uint64_t>> by_block;
    for (std::uint64_t m : members) {
        const auto [k, i] = plan.to_block(m);
        by_block[k].push_back(i);
    }
    std::vector<WalshTerm> terms;
    for (const auto& [k, rows] : by_block) {
        detail::materializable_block(plan, k, cap);
        detail::append_block_columns(plan, k, column_sums(plan.exponent(k), rows), terms);
    }
    return WalshSpectrum(std::move(terms));
}

inline WalshSpectrum sum_spectrum(const BlockPlan& plan, std::span<const BlockIndex> members,
                                  std::uint64_t cap = kDefaultMaterializationCap) {
    std::vector<std::uint64_t> global;
    global.reserve(members.size());
    for (const auto& b : members) global.push_back(plan.to_global(b.block, b.row));
    return sum_spectrum(plan, global, cap);
}

} // namespace agb
