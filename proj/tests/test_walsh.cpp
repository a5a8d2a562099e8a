#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "agb/walsh.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace agb;
using testing_support::random_spectrum;
using testing_support::to_oracle;

namespace {

WalshSpectrum W(std::uint64_t n, double c = 1.0) { return WalshSpectrum::single(Frequency(n), c); }

} // namespace

TEST(WalshEval, EmptyProductIsOne) {
    for (std::uint64_t cell = 0; cell < 8; ++cell) EXPECT_EQ(walsh_eval(Frequency(0), DyadicPoint::from_cell(3, cell)), 1);
}

TEST(WalshEval, KnownCells) {
    EXPECT_EQ(walsh_eval(Frequency(3), DyadicPoint::from_cell(2, 0)), 1);
    EXPECT_EQ(walsh_eval(Frequency(1), DyadicPoint::from_cell(2, 3)), -1);
    EXPECT_EQ(oracle::rademacher_sin(1, 0.875), -1);
}

TEST(WalshEval, MatchesSineDefinition) {
    for (std::uint64_t n = 0; n < 64; ++n) {
        for (std::uint64_t cell = 0; cell < 64; ++cell) {
            ASSERT_EQ(walsh_eval(Frequency(n), DyadicPoint::from_cell(6, cell)),
                      oracle::walsh_direct(n, oracle::cell_midpoint(cell, 6)))
                << "n=" << n << " cell=" << cell;
        }
    }
}

TEST(WalshEval, RejectsCoarseCell) {
    EXPECT_THROW(walsh_eval(Frequency(4), DyadicPoint::from_cell(2, 1)), DomainError);
    EXPECT_THROW(DyadicPoint::from_cell(2, 4), DomainError);
}

TEST(WalshEval, CharacterIdentity) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const Frequency a = Frequency::from_words(std::vector<Word>{rng(), rng(), rng() >> 20});
        const Frequency b = Frequency::from_words(std::vector<Word>{rng(), rng() >> 3});
        const DyadicPoint t(180, Frequency::from_words(std::vector<Word>{rng(), rng(), rng() >> 12}));
        ASSERT_EQ(walsh_eval(a, t) * walsh_eval(b, t), walsh_eval(a ^ b, t));
    }
}

TEST(Indexing, Rademacher) {
    EXPECT_EQ(rademacher_index(1), Frequency(1));
    EXPECT_EQ(rademacher_index(4), Frequency(8));
    const Frequency r = rademacher_index(273);
    EXPECT_EQ(r.width(), 273U);
    EXPECT_TRUE(r.test(272));
    EXPECT_EQ(r.popcount(), 1U);
    EXPECT_THROW(rademacher_index(0), DomainError);
}

TEST(Indexing, PhiMatchesEnumeration) {
    EXPECT_EQ(phi_index(1), Frequency(0));
    EXPECT_EQ(phi_index(2), Frequency(3));
    EXPECT_EQ(phi_index(3), Frequency(5));
    EXPECT_EQ(phi_index(4), Frequency(6));
    std::uint64_t k = 0;
    for (std::uint64_t n = 0; n < 20000; ++n) {
        if (std::popcount(n) == 1) continue;
        ++k;
        ASSERT_EQ(phi_index(k), Frequency(n)) << k;
    }
}

TEST(Indexing, PhiAndRademacherPartitionFrequencies) {
    for (std::uint64_t n = 0; n < 5000; ++n) {
        const Frequency f(n);
        const auto rank = phi_rank(f);
        const bool is_rad = std::popcount(n) == 1;
        ASSERT_NE(rank.has_value(), is_rad) << n;
        if (rank) {
            ASSERT_EQ(phi_index(*rank), f);
        } else {
            ASSERT_EQ(rademacher_index(std::size_t(std::bit_width(n))), f);
        }
    }
}

TEST(FrequencyHex, KnownAndRoundtrip) {
    EXPECT_EQ(Frequency(0).to_hex(), "0");
    EXPECT_EQ(Frequency::from_hex("10"), Frequency(16));
    EXPECT_EQ(Frequency::from_hex("0xff"), Frequency(255));
    EXPECT_EQ(rademacher_index(273).to_hex(), "1" + std::string(68, '0'));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Frequency f = Frequency::from_words(std::vector<Word>{rng(), rng() >> (rng() % 64), 0, rng() % 5});
        ASSERT_EQ(Frequency::from_hex(f.to_hex()), f);
    }
    EXPECT_THROW(Frequency::from_hex("12g"), ConfigError);
}

TEST(SpectrumArithmetic, AddAndScale) {
    EXPECT_TRUE(spectrum_add(W(1), W(1, -1.0)).empty());
    const WalshSpectrum f = spectrum_add(W(0), W(3));
    EXPECT_EQ(spectrum_scale(f, 2.0), spectrum_add(W(0, 2.0), W(3, 2.0)));
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_spectrum(rng, 12, 6);
        const auto b = random_spectrum(rng, 9, 6);
        ASSERT_LE(spectrum_add(a, b).size(), a.size() + b.size());
    }
    EXPECT_TRUE(spectrum_scale(f, 0.0).empty());
}

TEST(SpectrumArithmetic, ProductExamples) {
    EXPECT_EQ(spectrum_product(W(1), W(1)), W(0));
    const WalshSpectrum f = spectrum_add(W(0), W(1));
    EXPECT_EQ(spectrum_square(f), spectrum_add(W(0, 2.0), W(1, 2.0)));
    EXPECT_EQ(spectrum_product(f, f), spectrum_square(f));
}

TEST(SpectrumArithmetic, ProductMatchesPointwiseOracle) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = random_spectrum(rng, 10, 8);
        const auto g = random_spectrum(rng, 10, 8);
        const auto fg = spectrum_product(f, g);
        const auto of = to_oracle(f), og = to_oracle(g), ofg = to_oracle(fg);
        for (std::uint64_t cell = 0; cell < 256; ++cell) {
            const double t = oracle::cell_midpoint(cell, 8);
            ASSERT_NEAR(oracle::eval_direct(ofg, t), oracle::eval_direct(of, t) * oracle::eval_direct(og, t), 1e-12);
        }
    }
}

TEST(SpectrumArithmetic, ProductCommutesAndAssociates) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_spectrum(rng, 10, 7);
        const auto b = random_spectrum(rng, 10, 7);
        const auto c = random_spectrum(rng, 10, 7);
        const auto ab = spectrum_product(a, b), ba = spectrum_product(b, a);
        const auto lhs = spectrum_product(ab, c), rhs = spectrum_product(a, spectrum_product(b, c));
        for (std::uint64_t n = 0; n < 128; ++n) {
            ASSERT_NEAR(ab.coefficient(Frequency(n)), ba.coefficient(Frequency(n)), 1e-12);
            ASSERT_NEAR(lhs.coefficient(Frequency(n)), rhs.coefficient(Frequency(n)), 1e-12);
        }
    }
}

TEST(SpectrumArithmetic, ProductBudget) {
    std::mt19937_64 rng(1);
    const auto a = random_spectrum(rng, 40, 12);
    EXPECT_THROW(spectrum_product(a, a, 100), ResourceError);
    EXPECT_NO_THROW(spectrum_product(a, a, 40 * 40));
}

TEST(SpectrumArithmetic, WideFrequencies) {
    // r_1 r_300 times r_300 = r_1
    const Frequency wide = rademacher_index(1) ^ rademacher_index(300);
    const auto p = spectrum_product(WalshSpectrum::single(wide, 2.0), WalshSpectrum::single(rademacher_index(300), 3.0));
    EXPECT_EQ(p, W(1, 6.0));
}

TEST(InnerProduct, Orthonormality) {
    for (std::uint64_t a = 0; a < 16; ++a) {
        for (std::uint64_t b = 0; b < 16; ++b) EXPECT_EQ(inner_product(W(a), W(b)), a == b ? 1.0 : 0.0);
    }
    const auto f = spectrum_add(W(0, 2.0), W(5, 3.0));
    EXPECT_DOUBLE_EQ(inner_product(f, f), 13.0);
}

TEST(InnerProduct, MatchesRiemannSum) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const auto f = random_spectrum(rng, 8, 7);
        const auto g = random_spectrum(rng, 8, 7);
        const auto of = to_oracle(f), og = to_oracle(g);
        double s = 0.0, ff = 0.0;
        for (std::uint64_t cell = 0; cell < 128; ++cell) {
            const double t = oracle::cell_midpoint(cell, 7);
            s += oracle::eval_direct(of, t) * oracle::eval_direct(og, t);
            ff += std::pow(oracle::eval_direct(of, t), 2);
        }
        ASSERT_NEAR(inner_product(f, g), s / 128.0, 1e-12);
        ASSERT_NEAR(inner_product(f, f), ff / 128.0, 1e-12);
    }
}

TEST(Dense, SynthesisExamples) {
    const auto ind = synthesize(spectrum_add(W(0, 0.5), W(1, 0.5)), 1);
    EXPECT_EQ(ind[0], 1.0);
    EXPECT_EQ(ind[1], 0.0);
    const auto spec = analyze_dense(DenseDyadic(1, {3.0, 1.0}));
    EXPECT_EQ(spec, spectrum_add(W(0, 2.0), W(1, 1.0)));
}

TEST(Dense, SynthesisMatchesOracle) {
    std::mt19937_64 rng(2);
    const auto f = random_spectrum(rng, 20, 9);
    const auto dense = synthesize(f, 10);
    const auto of = to_oracle(f);
    for (std::uint64_t cell = 0; cell < 1024; ++cell) {
        ASSERT_NEAR(dense[cell], oracle::eval_direct(of, oracle::cell_midpoint(cell, 10)), 1e-12);
    }
}

TEST(Dense, Roundtrips) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> v(1024);
        for (auto& x : v) x = u(rng);
        const auto back = synthesize(analyze_dense(DenseDyadic(10, v)), 10);
        for (std::size_t c = 0; c < v.size(); ++c) ASSERT_NEAR(back[c], v[c], 1e-12);
    }
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_spectrum(rng, 30, 10);
        const auto g = analyze_dense(synthesize(f, 12), 1e-12);
        ASSERT_EQ(g.size(), f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            ASSERT_EQ(g.terms()[i].frequency, f.terms()[i].frequency);
            ASSERT_NEAR(g.terms()[i].coefficient, f.terms()[i].coefficient, 1e-12);
        }
    }
}

TEST(Dense, DepthLimits) {
    EXPECT_THROW(synthesize(W(8), 3), DomainError);
    EXPECT_THROW(synthesize(W(0), 31), DomainError);
    EXPECT_THROW(DenseDyadic(2, {1.0, 2.0}), DomainError);
}
