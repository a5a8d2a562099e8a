#pragma once

// Walsh/Rademacher indexing and exact arithmetic on sparse Walsh spectra.
//
// A function on [0,1] is represented by its finitely many nonzero Walsh
// coefficients. Frequencies are arbitrary-width bit-vectors in Paley order:
// bit j-1 set means the Rademacher function r_j is a factor of W_n. Since
// W_a * W_b = W_{a xor b}, pointwise products are XOR convolutions and
// every even-integer L_p norm can be computed without sampling.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "agb/errors.hpp"

namespace agb {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

/// Frequency of a Walsh function as an unbounded bit-vector.
///
/// Stored normalized (no trailing zero words), so equality is bitwise and
/// the default ordering is numeric. Frequencies up to 384 bits live inline.
class Frequency {
public:
    Frequency() = default;
    explicit Frequency(Word value) {
        if (value != 0) words_.push_back(value);
    }

    static Frequency from_words(std::span<const Word> words) {
        Frequency f;
        f.words_.assign(words.begin(), words.end());
        f.trim();
        return f;
    }

    static Frequency single_bit(std::size_t position) {
        Frequency f;
        f.words_.resize(position / kWordBits + 1, 0);
        f.words_.back() = Word{1} << (position % kWordBits);
        return f;
    }

    // Most-significant nibble first, no prefix; zero is "0". A leading "0x"
    // is accepted on input.
    static Frequency from_hex(std::string_view hex) {
        if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
        if (hex.empty()) throw ConfigError("empty hex frequency");
        Frequency f;
        f.words_.assign((hex.size() * 4 + kWordBits - 1) / kWordBits, 0);
        std::size_t bit = 0;
        for (auto it = hex.rbegin(); it != hex.rend(); ++it, bit += 4) {
            const char ch = *it;
            Word nibble = 0;
            if (ch >= '0' && ch <= '9') nibble = Word(ch - '0');
            else if (ch >= 'a' && ch <= 'f') nibble = Word(ch - 'a' + 10);
            else if (ch >= 'A' && ch <= 'F') nibble = Word(ch - 'A' + 10);
            else throw ConfigError("invalid hex digit in frequency: " + std::string(hex));
            f.words_[bit / kWordBits] |= nibble << (bit % kWordBits);
        }
        f.trim();
        return f;
    }

    std::string to_hex() const {
        if (is_zero()) return "0";
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        const std::size_t nibbles = (width() + 3) / 4;
        out.reserve(nibbles);
        for (std::size_t k = nibbles; k-- > 0;) {
            const std::size_t bit = 4 * k;
            out.push_back(digits[(words_[bit / kWordBits] >> (bit % kWordBits)) & 0xF]);
        }
        return out;
    }

    bool is_zero() const { return words_.empty(); }

    /// Number of significant bits; zero for the zero frequency.
    std::size_t width() const {
        if (words_.empty()) return 0;
        return (words_.size() - 1) * kWordBits + std::size_t(std::bit_width(words_.back()));
    }

    std::size_t popcount() const {
        std::size_t n = 0;
        for (Word w : words_) n += std::size_t(std::popcount(w));
        return n;
    }

    bool test(std::size_t position) const {
        const std::size_t w = position / kWordBits;
        return w < words_.size() && ((words_[w] >> (position % kWordBits)) & 1U);
    }

    std::optional<Word> to_u64() const {
        if (words_.size() > 1) return std::nullopt;
        return words_.empty() ? Word{0} : words_.front();
    }

    std::span<const Word> words() const { return {words_.data(), words_.size()}; }

    Frequency& operator^=(const Frequency& other) {
        if (other.words_.size() > words_.size()) words_.resize(other.words_.size(), 0);
        for (std::size_t i = 0; i < other.words_.size(); ++i) words_[i] ^= other.words_[i];
        trim();
        return *this;
    }

    friend Frequency operator^(Frequency a, const Frequency& b) {
        a ^= b;
        return a;
    }

    friend Frequency operator&(const Frequency& a, const Frequency& b) {
        Frequency r;
        const std::size_t n = std::min(a.words_.size(), b.words_.size());
        r.words_.resize(n);
        for (std::size_t i = 0; i < n; ++i) r.words_[i] = a.words_[i] & b.words_[i];
        r.trim();
        return r;
    }

    friend bool operator==(const Frequency& a, const Frequency& b) {
        return std::ranges::equal(a.words_, b.words_);
    }

    friend std::strong_ordering operator<=>(const Frequency& a, const Frequency& b) {
        if (a.words_.size() != b.words_.size()) return a.words_.size() <=> b.words_.size();
        for (std::size_t i = a.words_.size(); i-- > 0;) {
            if (a.words_[i] != b.words_[i]) return a.words_[i] <=> b.words_[i];
        }
        return std::strong_ordering::equal;
    }

private:
    void trim() {
        while (!words_.empty() && words_.back() == 0) words_.pop_back();
    }

    boost::container::small_vector<Word, 6> words_;
};

namespace detail {

inline bool odd_overlap(std::span<const Word> a, std::span<const Word> b) {
    const std::size_t n = std::min(a.size(), b.size());
    Word acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc ^= a[i] & b[i];
    return (std::popcount(acc) & 1) != 0;
}

inline Word reverse_bits(Word value, std::size_t width) {
    Word out = 0;
    for (std::size_t i = 0; i < width; ++i) {
        out = (out << 1) | ((value >> i) & 1U);
    }
    return out;
}

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Rademacher r_j as a frequency: only bit j-1 set.
inline Frequency rademacher_index(std::size_t j) {
    if (j == 0) throw DomainError("rademacher_index: j must be >= 1");
    return Frequency::single_bit(j - 1);
}

namespace detail {
// Count of integers in [0, x] whose popcount is not 1.
inline std::uint64_t non_rademacher_count(std::uint64_t x) {
    return x + 1 - std::uint64_t(std::bit_width(x));
}
} // namespace detail

/// k-th (1-based) natural number whose popcount is not 1: 0, 3, 5, 6, 7, 9, ...
inline Frequency phi_index(std::uint64_t k) {
    if (k == 0) throw DomainError("phi_index: k must be >= 1");
    std::uint64_t x = k - 1;
    while (detail::non_rademacher_count(x) < k) ++x;
    return Frequency(x);
}

/// Inverse of phi_index; nullopt for Rademacher frequencies or ranks beyond 64 bits.
inline std::optional<std::uint64_t> phi_rank(const Frequency& n) {
    if (n.popcount() == 1) return std::nullopt;
    const auto v = n.to_u64();
    if (!v) return std::nullopt;
    return detail::non_rademacher_count(*v);
}

/// A dyadic interval [cell 2^-D, (cell+1) 2^-D) stored by its binary digits:
/// digit t_j sits at bit j-1 of `digits`, matching the frequency layout.
class DyadicPoint {
public:
    DyadicPoint(std::size_t depth, Frequency digits) : depth_(depth), digits_(std::move(digits)) {
        if (digits_.width() > depth_) throw DomainError("DyadicPoint: cell index >= 2^depth");
    }

    static DyadicPoint from_cell(std::size_t depth, std::uint64_t cell) {
        if (depth > 64) throw DomainError("DyadicPoint::from_cell: depth > 64");
        if (depth < 64 && cell >> depth) throw DomainError("DyadicPoint: cell index >= 2^depth");
        return DyadicPoint(depth, Frequency(detail::reverse_bits(cell, depth)));
    }

    std::size_t depth() const { return depth_; }
    const Frequency& digits() const { return digits_; }

    std::uint64_t cell() const {
        if (depth_ > 64) throw DomainError("DyadicPoint::cell: depth > 64");
        return detail::reverse_bits(digits_.to_u64().value_or(0), depth_);
    }

    /// r_j on this cell, j in 1..depth.
    int rademacher(std::size_t j) const {
        if (j == 0 || j > depth_) throw DomainError("DyadicPoint::rademacher: j outside 1..depth");
        return digits_.test(j - 1) ? -1 : 1;
    }

private:
    std::size_t depth_;
    Frequency digits_;
};

/// W_n on the cell t; requires t.depth() >= width(n).
inline int walsh_eval(const Frequency& n, const DyadicPoint& t) {
    if (t.depth() < n.width()) {
        throw DomainError("walsh_eval: cell depth " + std::to_string(t.depth()) +
                          " does not determine W_n of width " + std::to_string(n.width()));
    }
    return detail::odd_overlap(n.words(), t.digits().words()) ? -1 : 1;
}

struct WalshTerm {
    Frequency frequency;
    double coefficient = 0.0;

    friend bool operator==(const WalshTerm&, const WalshTerm&) = default;
};

/// Finite Walsh expansion sum c_n W_n; terms sorted by frequency, none zero.
class WalshSpectrum {
public:
    struct canonical_t {};
    static constexpr canonical_t canonical{};

    WalshSpectrum() = default;

    /// Accepts terms in any order; duplicates are summed, zeros dropped.
    explicit WalshSpectrum(std::vector<WalshTerm> terms) {
        std::ranges::stable_sort(terms, {}, &WalshTerm::frequency);
        for (auto& t : terms) {
            if (!terms_.empty() && terms_.back().frequency == t.frequency) {
                terms_.back().coefficient += t.coefficient;
            } else {
                terms_.push_back(std::move(t));
            }
        }
        std::erase_if(terms_, [](const WalshTerm& t) { return t.coefficient == 0.0; });
    }

    /// Caller guarantees the terms are strictly increasing and nonzero.
    WalshSpectrum(canonical_t, std::vector<WalshTerm> terms) : terms_(std::move(terms)) {}

    static WalshSpectrum single(Frequency n, double c = 1.0) {
        std::vector<WalshTerm> t;
        if (c != 0.0) t.push_back({std::move(n), c});
        return WalshSpectrum(canonical, std::move(t));
    }

    std::span<const WalshTerm> terms() const& { return terms_; }
    std::span<const WalshTerm> terms() const&& = delete;
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    /// Largest frequency width; the function is constant on cells of this depth.
    std::size_t depth() const { return terms_.empty() ? 0 : terms_.back().frequency.width(); }

    double coefficient(const Frequency& n) const {
        auto it = std::ranges::lower_bound(terms_, n, {}, &WalshTerm::frequency);
        return (it != terms_.end() && it->frequency == n) ? it->coefficient : 0.0;
    }

    double evaluate(const DyadicPoint& t) const {
        if (t.depth() < depth()) throw DomainError("WalshSpectrum::evaluate: cell too coarse");
        double v = 0.0;
        for (const auto& term : terms_) {
            v += detail::odd_overlap(term.frequency.words(), t.digits().words()) ? -term.coefficient
                                                                                 : term.coefficient;
        }
        return v;
    }

    double sum_of_squares() const {
        double s = 0.0;
        for (const auto& t : terms_) s += t.coefficient * t.coefficient;
        return s;
    }

    double l2_norm() const { return std::sqrt(sum_of_squares()); }

    friend bool operator==(const WalshSpectrum&, const WalshSpectrum&) = default;

private:
    std::vector<WalshTerm> terms_;
};

inline WalshSpectrum spectrum_add(const WalshSpectrum& f, const WalshSpectrum& g) {
    std::vector<WalshTerm> out;
    out.reserve(f.size() + g.size());
    auto a = f.terms().begin();
    auto b = g.terms().begin();
    while (a != f.terms().end() || b != g.terms().end()) {
        if (b == g.terms().end() || (a != f.terms().end() && a->frequency < b->frequency)) {
            out.push_back(*a++);
        } else if (a == f.terms().end() || b->frequency < a->frequency) {
            out.push_back(*b++);
        } else {
            const double c = a->coefficient + b->coefficient;
            if (c != 0.0) out.push_back({a->frequency, c});
            ++a;
            ++b;
        }
    }
    return WalshSpectrum(WalshSpectrum::canonical, std::move(out));
}

inline WalshSpectrum spectrum_scale(const WalshSpectrum& f, double c) {
    if (c == 0.0) return {};
    std::vector<WalshTerm> out(f.terms().begin(), f.terms().end());
    for (auto& t : out) t.coefficient *= c;
    std::erase_if(out, [](const WalshTerm& t) { return t.coefficient == 0.0; });
    return WalshSpectrum(WalshSpectrum::canonical, std::move(out));
}

/// <f, g> = integral of f*g over [0,1] (Parseval for the Walsh system).
inline double inner_product(const WalshSpectrum& f, const WalshSpectrum& g) {
    // Neumaier summation
    double sum = 0.0, comp = 0.0;
    auto a = f.terms().begin();
    auto b = g.terms().begin();
    while (a != f.terms().end() && b != g.terms().end()) {
        if (a->frequency < b->frequency) {
            ++a;
        } else if (b->frequency < a->frequency) {
            ++b;
        } else {
            const double x = a->coefficient * b->coefficient;
            const double t = sum + x;
            comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
            sum = t;
            ++a;
            ++b;
        }
    }
    return sum + comp;
}

/// Default cap on pair products in one XOR convolution.
inline constexpr std::size_t kDefaultPairBudget = std::size_t{1} << 24;

namespace detail {

// Open-addressing accumulator keyed by fixed-stride frequency words. Used for
// XOR convolutions, where building a Frequency per pair product would dominate.
class XorAccumulator {
public:
    explicit XorAccumulator(std::size_t stride, std::size_t expected)
        : stride_(std::max<std::size_t>(stride, 1)) {
        std::size_t cap = 16;
        while (cap < 2 * expected) cap <<= 1;
        table_.assign(cap, 0);
        keys_.reserve(expected * stride_);
        values_.reserve(expected);
    }

    void add(const Word* key, double value) {
        std::size_t mask = table_.size() - 1;
        std::size_t slot = hash(key) & mask;
        while (true) {
            const std::uint32_t idx = table_[slot];
            if (idx == 0) break;
            if (std::equal(key, key + stride_, keys_.data() + (idx - 1) * stride_)) {
                values_[idx - 1] += value;
                return;
            }
            slot = (slot + 1) & mask;
        }
        keys_.insert(keys_.end(), key, key + stride_);
        values_.push_back(value);
        table_[slot] = std::uint32_t(values_.size());
        if (2 * values_.size() > table_.size()) grow();
    }

    std::span<const double> values() const { return values_; }

    WalshSpectrum to_spectrum() const {
        std::vector<std::uint32_t> order(values_.size());
        std::iota(order.begin(), order.end(), 0U);
        std::ranges::sort(order, [&](std::uint32_t a, std::uint32_t b) {
            const Word* ka = keys_.data() + a * stride_;
            const Word* kb = keys_.data() + b * stride_;
            for (std::size_t i = stride_; i-- > 0;) {
                if (ka[i] != kb[i]) return ka[i] < kb[i];
            }
            return false;
        });
        std::vector<WalshTerm> terms;
        terms.reserve(order.size());
        for (std::uint32_t idx : order) {
            if (values_[idx] == 0.0) continue;
            terms.push_back({Frequency::from_words({keys_.data() + idx * stride_, stride_}), values_[idx]});
        }
        return WalshSpectrum(WalshSpectrum::canonical, std::move(terms));
    }

private:
    std::size_t hash(const Word* key) const {
        std::uint64_t h = 0;
        for (std::size_t i = 0; i < stride_; ++i) h = mix64(h ^ key[i]);
        return std::size_t(h);
    }

    void grow() {
        std::vector<std::uint32_t> bigger(table_.size() * 2, 0);
        const std::size_t mask = bigger.size() - 1;
        for (std::uint32_t idx = 1; idx <= values_.size(); ++idx) {
            std::size_t slot = hash(keys_.data() + (idx - 1) * stride_) & mask;
            while (bigger[slot] != 0) slot = (slot + 1) & mask;
            bigger[slot] = idx;
        }
        table_ = std::move(bigger);
    }

    std::size_t stride_;
    std::vector<Word> keys_;
    std::vector<double> values_;
    std::vector<std::uint32_t> table_;
};

inline std::vector<Word> flatten_keys(const WalshSpectrum& f, std::size_t stride) {
    std::vector<Word> flat(f.size() * stride, 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto w = f.terms()[i].frequency.words();
        std::ranges::copy(w, flat.begin() + std::ptrdiff_t(i * stride));
    }
    return flat;
}

inline std::size_t stride_for(const WalshSpectrum& f, const WalshSpectrum& g) {
    return std::max<std::size_t>(1, (std::max(f.depth(), g.depth()) + kWordBits - 1) / kWordBits);
}

inline void check_budget(std::size_t pairs, std::size_t budget) {
    if (pairs > budget) {
        throw ResourceError("spectrum product needs " + std::to_string(pairs) +
                            " pair products, budget is " + std::to_string(budget));
    }
}

// XOR convolution of f and g into an accumulator (unsorted).
inline XorAccumulator convolve(const WalshSpectrum& f, const WalshSpectrum& g, std::size_t budget) {
    const bool square = &f == &g;
    const std::size_t pairs = square ? f.size() * (f.size() + 1) / 2 : f.size() * g.size();
    check_budget(pairs, budget);
    const std::size_t stride = stride_for(f, g);
    const auto fk = flatten_keys(f, stride);
    const auto gk = square ? std::vector<Word>{} : flatten_keys(g, stride);
    const Word* gkeys = square ? fk.data() : gk.data();
    XorAccumulator acc(stride, std::min(pairs, std::size_t{1} << 22));
    std::vector<Word> key(stride);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Word* a = fk.data() + i * stride;
        const double ca = f.terms()[i].coefficient;
        const std::size_t j0 = square ? i : 0;
        for (std::size_t j = j0; j < g.size(); ++j) {
            const Word* b = gkeys + j * stride;
            for (std::size_t w = 0; w < stride; ++w) key[w] = a[w] ^ b[w];
            double v = ca * g.terms()[j].coefficient;
            if (square && j != i) v *= 2.0;
            acc.add(key.data(), v);
        }
    }
    return acc;
}

} // namespace detail

/// Pointwise product f*g, i.e. the XOR convolution of the spectra.
/// Throws ResourceError when |f|*|g| pair products exceed `pair_budget`.
inline WalshSpectrum spectrum_product(const WalshSpectrum& f, const WalshSpectrum& g,
                                      std::size_t pair_budget = kDefaultPairBudget) {
    return detail::convolve(f, g, pair_budget).to_spectrum();
}

/// f*f using the symmetric half of the pair products.
inline WalshSpectrum spectrum_square(const WalshSpectrum& f, std::size_t pair_budget = kDefaultPairBudget) {
    return detail::convolve(f, f, pair_budget).to_spectrum();
}

inline constexpr std::size_t kMaxDenseDepth = 30;

/// Values of a function on the 2^D dyadic cells of depth D.
class DenseDyadic {
public:
    DenseDyadic(std::size_t depth, std::vector<double> values) : depth_(depth), values_(std::move(values)) {
        if (depth_ > kMaxDenseDepth) throw DomainError("DenseDyadic: depth exceeds 30");
        if (values_.size() != (std::size_t{1} << depth_)) {
            throw DomainError("DenseDyadic: expected 2^depth values");
        }
    }

    std::size_t depth() const { return depth_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t cell) const { return values_[cell]; }

private:
    std::size_t depth_;
    std::vector<double> values_;
};

namespace detail {
inline void fwht(std::vector<double>& a) {
    for (std::size_t h = 1; h < a.size(); h <<= 1) {
        for (std::size_t i = 0; i < a.size(); i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double x = a[j];
                const double y = a[j + h];
                a[j] = x + y;
                a[j + h] = x - y;
            }
        }
    }
}
} // namespace detail

/// Cell values of f at depth D (unnormalized Walsh-Hadamard synthesis).
inline DenseDyadic synthesize(const WalshSpectrum& f, std::size_t depth) {
    if (depth > kMaxDenseDepth) throw DomainError("synthesize: depth exceeds 30");
    if (depth < f.depth()) throw DomainError("synthesize: depth smaller than spectrum depth");
    const std::size_t n = std::size_t{1} << depth;
    std::vector<double> coeffs(n, 0.0);
    for (const auto& t : f.terms()) coeffs[*t.frequency.to_u64()] = t.coefficient;
    detail::fwht(coeffs);
    // coeffs is indexed by digit vector; cells are indexed by binary value.
    std::vector<double> values(n);
    for (std::size_t cell = 0; cell < n; ++cell) values[cell] = coeffs[detail::reverse_bits(cell, depth)];
    return DenseDyadic(depth, std::move(values));
}

/// Walsh coefficients <v, W_n> of a dense cell function. Coefficients with
/// magnitude at or below `drop_tolerance` times the largest |value| are
/// treated as roundoff and dropped.
inline WalshSpectrum analyze_dense(const DenseDyadic& v, double drop_tolerance = 1e-13) {
    const std::size_t depth = v.depth();
    const std::size_t n = std::size_t{1} << depth;
    std::vector<double> a(n);
    double scale = 0.0;
    for (std::size_t cell = 0; cell < n; ++cell) {
        a[detail::reverse_bits(cell, depth)] = v[cell];
        scale = std::max(scale, std::abs(v[cell]));
    }
    detail::fwht(a);
    const double inv = std::ldexp(1.0, -int(depth));
    const double cutoff = drop_tolerance * scale;
    std::vector<WalshTerm> terms;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = a[k] * inv;
        if (c != 0.0 && std::abs(c) > cutoff) terms.push_back({Frequency(Word(k)), c});
    }
    return WalshSpectrum(WalshSpectrum::canonical, std::move(terms));
}

} // namespace agb
