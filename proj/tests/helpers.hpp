#pragma once

#include <random>

#include "carom/models.hpp"

// Shared generators for property-style tests. Seeds are fixed so every
// run exercises the same cases.

namespace test_helpers {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Random sub-stochastic 2x2 matrix: column sums in (0.05, kappa_max),
    // each split at a uniform point.
    carom::Mat2 substochastic(double kappa_max = 0.999) {
        const double kap1 = uniform(0.05, kappa_max);
        const double kap2 = uniform(0.05, kappa_max);
        const double u1 = uniform(0.0, 1.0);
        const double u2 = uniform(0.0, 1.0);
        return {kap1 * u1, kap2 * u2, kap1 * (1.0 - u1), kap2 * (1.0 - u2)};
    }

    // As above but with a usable spectral gap and both geometric modes
    // carrying weight for the given p0 draw.
    carom::MarkovModel identifiable_model(double min_gap = 0.05, double y_lo = 0.05,
                                          double y_hi = 0.95, double kappa_max = 0.999) {
        for (;;) {
            const carom::Mat2 k = substochastic(kappa_max);
            const carom::Eigen2 e = carom::eigen2(k);
            if (e.degenerate || e.rho2 - e.rho1 < min_gap) continue;
            if (!(e.rho1 > 1e-4) || !(e.rho2 < 0.99)) continue;
            const double p0 = uniform(0.0, 1.0);
            carom::MarkovModel mm(k, p0);
            const carom::SpectralFit f = carom::spectral_from_model(mm);
            if (f.y < y_lo || f.y > y_hi) continue;
            return mm;
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace test_helpers
