#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "agb/basis.hpp"

using namespace agb;

namespace {

BlockPlan plan_of(std::vector<std::size_t> g) { return validate_schedule(GrowthSchedule{std::move(g)}); }

WalshSpectrum W(std::uint64_t n, double c = 1.0) { return WalshSpectrum::single(Frequency(n), c); }

} // namespace

TEST(Schedule, Flags) {
    const auto paper = validate_schedule(GrowthSchedule::paper(2));
    EXPECT_EQ(paper.schedule().exponents, (std::vector<std::size_t>{10, 100}));
    EXPECT_TRUE(paper.democracy_condition());
    EXPECT_TRUE(paper.lambda_separation());

    const auto desk = validate_schedule(GrowthSchedule::desk());
    EXPECT_TRUE(desk.democracy_condition());
    EXPECT_FALSE(desk.lambda_separation());

    EXPECT_THROW(plan_of({3, 2}), DomainError);
    EXPECT_THROW(plan_of({2, 2}), DomainError);
    EXPECT_THROW(plan_of({}), DomainError);
    EXPECT_THROW(plan_of({0, 1}), DomainError);
    EXPECT_FALSE(plan_of({2, 3}).democracy_condition());
}

TEST(Schedule, SizesAndOffsets) {
    const auto desk = validate_schedule(GrowthSchedule::desk());
    EXPECT_EQ(desk.offset(0), 0);
    EXPECT_EQ(desk.offset(1), 3);
    EXPECT_EQ(desk.offset(2), 18);
    EXPECT_EQ(desk.offset(3), 273);
    EXPECT_EQ(*desk.block_size_u64(3), 256U);
    EXPECT_EQ(*desk.total_size(), 276U);
    for (std::size_t k = 1; k <= 3; ++k) EXPECT_EQ(desk.offset(k) - desk.offset(k - 1), desk.block_size(k) - 1);

    const auto paper = validate_schedule(GrowthSchedule::paper(2));
    EXPECT_EQ(paper.offset(1), 1023);
    EXPECT_EQ(paper.block_size(2), BigInt(1) << 100);
    EXPECT_FALSE(paper.block_size_u64(2).has_value());
    EXPECT_FALSE(paper.total_size().has_value());
}

TEST(IndexMaps, Examples) {
    const auto plan = plan_of({2, 4});
    EXPECT_EQ(plan.to_global(1, 4), 4U);
    EXPECT_EQ(plan.to_global(2, 1), 5U);
    EXPECT_EQ(plan.to_block(20), (BlockIndex{2, 16}));
    for (std::size_t k = 1; k <= 2; ++k) {
        for (std::uint64_t i = 1; i <= *plan.block_size_u64(k); ++i) {
            ASSERT_EQ(plan.to_block(plan.to_global(k, i)), (BlockIndex{k, i}));
        }
    }
    EXPECT_THROW(plan.to_block(21), DomainError);
    EXPECT_THROW(plan.to_block(0), DomainError);
    EXPECT_THROW(plan.to_global(3, 1), DomainError);
    EXPECT_THROW(plan.to_global(1, 5), DomainError);
}

TEST(Psi, SmallestPlan) {
    const auto plan = plan_of({1});
    const double r = std::numbers::sqrt2 / 2;
    const auto p1 = psi_spectrum(plan, 1, 1);
    const auto p2 = psi_spectrum(plan, 1, 2);
    EXPECT_EQ(p1, spectrum_add(W(0, r), W(1, r)));
    EXPECT_EQ(p2, spectrum_add(W(0, r), W(1, -r)));
    EXPECT_EQ(inner_product(p1, p2), 0.0);
    EXPECT_NEAR(inner_product(p1, p1), 1.0, 1e-15);
}

TEST(Psi, BlockSupport) {
    const auto plan = plan_of({2, 4});
    std::set<Frequency> freqs;
    for (std::uint64_t i = 1; i <= 16; ++i) {
        const auto psi = psi_spectrum(plan, 2, i);
        EXPECT_EQ(psi.size(), 5U);  // g(2) + 1 nonzero Olevskii entries
        EXPECT_NEAR(psi.l2_norm(), 1.0, 1e-15);
        EXPECT_EQ(psi.coefficient(Frequency(3)), 0.25);
        for (const auto& t : psi.terms()) freqs.insert(t.frequency);
    }
    std::set<Frequency> expected{Frequency(3)};
    for (std::size_t j = 3; j <= 17; ++j) expected.insert(Frequency(std::uint64_t{1} << j));
    EXPECT_EQ(freqs, expected);
}

TEST(Psi, Orthonormal) {
    const auto plan = plan_of({2, 4});
    std::vector<WalshSpectrum> psi;
    for (std::uint64_t m = 1; m <= 20; ++m) psi.push_back(basis_element(plan, m));
    for (std::size_t a = 0; a < psi.size(); ++a) {
        for (std::size_t b = 0; b < psi.size(); ++b) {
            ASSERT_NEAR(inner_product(psi[a], psi[b]), a == b ? 1.0 : 0.0, 1e-12);
        }
    }
}

TEST(Psi, UniformlyBounded) {
    const auto plan = plan_of({2, 4});
    for (std::uint64_t m = 1; m <= 20; ++m) {
        const auto [k, i] = plan.to_block(m);
        const auto dense = synthesize(basis_element(plan, m), 18);
        double sup = 0.0;
        for (double v : dense.values()) sup = std::max(sup, std::abs(v));
        EXPECT_LE(sup, row_abs_sum(plan.exponent(k), i) + 1e-12);
        EXPECT_LE(sup, 2.45);
    }
}

TEST(Psi, HorizonIsCovered) {
    const auto plan = validate_schedule(GrowthSchedule::desk());
    std::map<Frequency, std::size_t> owner;
    for (std::uint64_t m = 1; m <= *plan.total_size(); ++m) {
        const std::size_t k = plan.to_block(m).block;
        const auto psi = basis_element(plan, m);
        for (const auto& t : psi.terms()) {
            auto [it, fresh] = owner.emplace(t.frequency, k);
            ASSERT_EQ(it->second, k) << "frequency shared across blocks";
        }
    }
    std::set<Frequency> expected;
    for (std::size_t k = 1; k <= 3; ++k) expected.insert(phi_index(k));
    for (std::size_t j = 1; j <= 273; ++j) expected.insert(rademacher_index(j));
    std::set<Frequency> got;
    for (const auto& [f, k] : owner) got.insert(f);
    EXPECT_EQ(got, expected);
    for (const auto& f : expected) {
        const auto loc = locate_symbol(plan, f);
        ASSERT_TRUE(loc.has_value());
        EXPECT_EQ(block_symbol(plan, loc->block, loc->row), f);
    }
    EXPECT_FALSE(locate_symbol(plan, rademacher_index(274)).has_value());
    EXPECT_FALSE(locate_symbol(plan, phi_index(4)).has_value());
}

TEST(Psi, MaterializationCap) {
    const auto paper = validate_schedule(GrowthSchedule::paper(2));
    EXPECT_EQ(psi_spectrum(paper, 1, 7).size(), 11U);
    EXPECT_THROW(psi_spectrum(paper, 2, 1), ResourceError);
    const auto desk = validate_schedule(GrowthSchedule::desk());
    EXPECT_THROW(psi_spectrum(desk, 3, 1, 128), ResourceError);
}

TEST(SumSpectrum, Examples) {
    const auto plan = plan_of({1});
    const std::vector<std::uint64_t> both{1, 2};
    const auto s = sum_spectrum(plan, both);
    EXPECT_EQ(s.size(), 1U);
    EXPECT_NEAR(s.coefficient(Frequency(0)), std::numbers::sqrt2, 1e-15);
    const auto desk = validate_schedule(GrowthSchedule::desk());
    const std::vector<std::uint64_t> one{200};
    EXPECT_EQ(sum_spectrum(desk, one), basis_element(desk, 200));
    const std::vector<BlockIndex> pair{{1, 1}, {1, 2}};
    EXPECT_EQ(sum_spectrum(plan, pair), s);
}

TEST(SumSpectrum, MatchesTermwiseSumAndParseval) {
    const auto plan = validate_schedule(GrowthSchedule::desk());
    std::mt19937_64 rng(8);
    std::vector<std::uint64_t> all(276);
    std::iota(all.begin(), all.end(), 1);
    for (int trial = 0; trial < 30; ++trial) {
        std::shuffle(all.begin(), all.end(), rng);
        const std::size_t size = 1 + rng() % 276;
        const std::span<const std::uint64_t> members(all.data(), size);
        const auto fast = sum_spectrum(plan, members);
        WalshSpectrum slow;
        for (auto m : members) slow = spectrum_add(slow, basis_element(plan, m));
        // column sums cancel exactly; the termwise sum may leave roundoff
        for (const auto& t : slow.terms()) ASSERT_NEAR(fast.coefficient(t.frequency), t.coefficient, 1e-12);
        for (const auto& t : fast.terms()) ASSERT_NEAR(slow.coefficient(t.frequency), t.coefficient, 1e-12);
        ASSERT_NEAR(fast.l2_norm(), std::sqrt(double(size)), 1e-12);
        // per-block coefficient norm is |A cap block|^{1/2}
        std::map<std::size_t, std::pair<double, std::size_t>> per_block;
        for (auto m : members) per_block[plan.to_block(m).block].second++;
        for (const auto& t : fast.terms()) per_block[locate_symbol(plan, t.frequency)->block].first += t.coefficient * t.coefficient;
        for (const auto& [k, acc] : per_block) ASSERT_NEAR(acc.first, double(acc.second), 1e-10);
    }
}

TEST(CombinationSpectrum, WeightedSum) {
    const auto plan = validate_schedule(GrowthSchedule::desk());
    const CoefficientList c{{1, 0.5}, {7, -2.0}, {100, 0.25}, {276, 1.5}};
    WalshSpectrum slow;
    for (const auto& x : c) slow = spectrum_add(slow, spectrum_scale(basis_element(plan, x.index), x.value));
    const auto fast = combination_spectrum(plan, c);
    for (const auto& t : slow.terms()) ASSERT_NEAR(fast.coefficient(t.frequency), t.coefficient, 1e-12);
    for (const auto& t : fast.terms()) ASSERT_NEAR(slow.coefficient(t.frequency), t.coefficient, 1e-12);
}
