#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "agb/norms.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace agb;
using testing_support::random_spectrum;
using testing_support::to_oracle;

namespace {

WalshSpectrum W(std::uint64_t n, double c = 1.0) { return WalshSpectrum::single(Frequency(n), c); }

WalshSpectrum rademacher_sum(const std::vector<double>& a) {
    std::vector<WalshTerm> t;
    for (std::size_t k = 0; k < a.size(); ++k) t.push_back({rademacher_index(k + 1), a[k]});
    return WalshSpectrum(std::move(t));
}

} // namespace

TEST(Dense, Examples) {
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 7.5}) EXPECT_NEAR(lp_dense(W(0, -2.5), p).value, 2.5, 1e-15);
    const auto f = spectrum_add(W(0), W(1));
    EXPECT_NEAR(lp_dense(f, 4.0).value, std::pow(8.0, 0.25), 1e-15);
    EXPECT_TRUE(lp_dense(f, 4.0).exact());
    EXPECT_FALSE(lp_dense(f, 4.0).ci_low.has_value());
    EXPECT_THROW(lp_dense(W(std::uint64_t{1} << 30), 2.0), DomainError);
}

TEST(Dense, MatchesOracleAndParseval) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_spectrum(rng, 10, 9);
        for (double p : {1.5, 3.0, 4.0}) ASSERT_NEAR(lp_dense(f, p).value, oracle::lp_by_cells(to_oracle(f), p, 9), 1e-12);
        ASSERT_NEAR(lp_dense(f, 2.0).value, f.l2_norm(), 1e-12);
    }
}

TEST(EvenSpectral, Examples) {
    const auto f = spectrum_add(W(0), W(1));
    EXPECT_NEAR(lp_even_spectral(f, 4.0).value, std::pow(8.0, 0.25), 1e-15);
    EXPECT_NEAR(lp_even_spectral(WalshSpectrum::single(rademacher_index(300) ^ Frequency(5), 1.0), 4.0).value, 1.0, 1e-15);
    const std::vector<double> ones{1, 1, 1, 1};
    const double moment = oracle::sign_moment(ones, 4.0);
    EXPECT_DOUBLE_EQ(moment, 40.0);
    EXPECT_NEAR(lp_even_spectral(rademacher_sum(ones), 4.0).value, std::pow(40.0, 0.25), 1e-14);
    EXPECT_THROW(lp_even_spectral(f, 3.0), DomainError);
    EXPECT_THROW(lp_even_spectral(f, 4.5), DomainError);
}

TEST(EvenSpectral, HigherPowersMatchDense) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_spectrum(rng, 8, 8);
        for (double p : {6.0, 8.0}) ASSERT_NEAR(lp_even_spectral(f, p).value, lp_dense(f, p).value, 1e-10);
    }
}

TEST(EvenSpectral, BudgetPropagates) {
    std::mt19937_64 rng(3);
    const auto f = random_spectrum(rng, 50, 12);
    EXPECT_THROW(lp_even_spectral(f, 4.0, 100), ResourceError);
}

TEST(Engines, AgreeOnRandomSpectra) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const auto f = random_spectrum(rng, 1 + rng() % 30, 1 + unsigned(rng() % 12));
        for (double p : {2.0, 4.0}) ASSERT_NEAR(lp_dense(f, p).value, lp_even_spectral(f, p).value, 1e-10);
    }
}

TEST(Engines, MonotoneInP) {
    std::mt19937_64 rng(15);
    const double ps[] = {1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
    for (int trial = 0; trial < 30; ++trial) {
        const auto f = random_spectrum(rng, 12, 10);
        for (std::size_t i = 1; i < std::size(ps); ++i) ASSERT_LE(lp_dense(f, ps[i - 1]).value, lp_dense(f, ps[i]).value + 1e-12);
    }
}

TEST(Engines, Khintchine) {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + rng() % 16);
        for (auto& x : a) x = u(rng);
        const auto f = rademacher_sum(a);
        const double l4 = lp_even_spectral(f, 4.0).value;
        ASSERT_LE(l4, std::pow(3.0, 0.25) * f.l2_norm() + 1e-12);
        ASSERT_NEAR(std::pow(l4, 4), oracle::fourth_moment_identity(a), 1e-12 * std::max(1.0, std::pow(l4, 4)));
    }
}

TEST(MonteCarlo, ConstantIntegrandIsExact) {
    const auto est = lp_monte_carlo(W(0, -3.25), 2.7, 50, 99);
    EXPECT_EQ(est.value, 3.25);
    EXPECT_EQ(*est.ci_low, *est.ci_high);
    EXPECT_FALSE(est.exact());
    EXPECT_EQ(*est.samples, 50U);
    EXPECT_THROW(lp_monte_carlo(W(0), 2.0, 1, 1), DomainError);
}

TEST(MonteCarlo, CoversKnownValue) {
    const auto f = spectrum_add(W(0), W(1));
    const auto est = lp_monte_carlo(f, 3.0, 100000, 2024);
    const double truth = std::cbrt(4.0);
    EXPECT_LE(*est.ci_low, truth);
    EXPECT_GE(*est.ci_high, truth);
    EXPECT_LE(*est.ci_low, est.value);
    EXPECT_LE(est.value, *est.ci_high);
}

TEST(MonteCarlo, DeterministicAndThreadIndependent) {
    std::mt19937_64 rng(1);
    const auto f = spectrum_add(random_spectrum(rng, 20, 10), WalshSpectrum::single(rademacher_index(200), 0.7));
    const auto a = lp_monte_carlo(f, 3.0, 5000, 77, 1);
    const auto b = lp_monte_carlo(f, 3.0, 5000, 77, 1);
    const auto c = lp_monte_carlo(f, 3.0, 5000, 77, 4);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.value, c.value);
    EXPECT_EQ(*a.ci_low, *c.ci_low);
    EXPECT_EQ(*a.ci_high, *c.ci_high);
}

TEST(MonteCarlo, Calibration) {
    std::mt19937_64 rng(31);
    const auto f = random_spectrum(rng, 12, 10);
    const double truth = lp_dense(f, 3.0).value;
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto est = lp_monte_carlo(f, 3.0, 2000, seed);
        covered += (*est.ci_low <= truth && truth <= *est.ci_high) ? 1 : 0;
    }
    EXPECT_GE(covered, 90);
}

TEST(Dispatch, PrefersExactEngines) {
    const auto f = spectrum_add(W(0), WalshSpectrum::single(rademacher_index(100), 1.0));
    EXPECT_TRUE(lp_norm(f, 4.0).exact());
    EXPECT_FALSE(lp_norm(f, 3.0).exact());
    EXPECT_TRUE(lp_norm(spectrum_add(W(0), W(1)), 3.0).exact());
    NormOptions mc;
    mc.engine = NormEngine::monte_carlo;
    mc.samples = 100;
    EXPECT_FALSE(lp_norm(W(1), 4.0, mc).exact());
}
