// Builds the desk plan, prints one block of the rotated basis, and traces
// greedy approximation of a small expansion.

#include <cstdio>

#include "agb/basis.hpp"
#include "agb/greedy.hpp"
#include "agb/norms.hpp"

int main() {
    using namespace agb;
    const BlockPlan plan = validate_schedule(GrowthSchedule::desk());
    std::printf("%s: %llu elements\n", plan.label().c_str(), (unsigned long long)*plan.total_size());

    for (std::uint64_t i = 1; i <= 4; ++i) {
        const WalshSpectrum psi = psi_spectrum(plan, 1, i);
        std::printf("psi_%llu:", (unsigned long long)i);
        for (const auto& t : psi.terms()) std::printf("  %+.4f W_%s", t.coefficient, t.frequency.to_hex().c_str());
        std::printf("   |psi|_4 = %.6f\n", lp_norm(psi, 4.0).value);
    }

    const CoefficientList c{{2, 0.9}, {7, -0.6}, {30, 0.6}, {200, 0.1}};
    const double ps[] = {4.0};
    const auto result = greedy_expansion(c, plan, c.size(), ps);
    for (const auto& step : result.trace.steps) {
        std::printf("m=%zu  picked %3llu  |f - G_m f|_2 = %.6f  |f - G_m f|_4 = %.6f\n", step.m,
                    (unsigned long long)step.selected, step.residual_l2, step.residual_norms[0].value);
    }
}
