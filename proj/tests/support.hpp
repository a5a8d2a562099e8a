#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "agb/walsh.hpp"
#include "oracles.hpp"

namespace testing_support {

inline agb::WalshSpectrum random_spectrum(std::mt19937_64& rng, std::size_t terms, unsigned depth) {
    std::uniform_int_distribution<std::uint64_t> freq(0, (std::uint64_t{1} << depth) - 1);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::vector<agb::WalshTerm> t;
    for (std::size_t i = 0; i < terms; ++i) t.push_back({agb::Frequency(freq(rng)), coeff(rng)});
    return agb::WalshSpectrum(std::move(t));
}

inline std::vector<oracle::Term> to_oracle(const agb::WalshSpectrum& f) {
    std::vector<oracle::Term> out;
    for (const auto& t : f.terms()) out.push_back({*t.frequency.to_u64(), t.coefficient});
    return out;
}

} // namespace testing_support
