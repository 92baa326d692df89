#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include "carom/errors.hpp"
#include "carom/histogram.hpp"
#include "carom/models.hpp"
#include "carom/recovery.hpp"

// Monte Carlo generation of innings, used as the independent oracle for
// every closed form in the library, plus the opponent-strategy average
// surface over (dk1, dk2) = (k21 - k11, k22 - k12).

namespace carom {

// Seeded uniform source. The engine is mt19937_64 and draws map to
// [0, 1) through the top 53 bits, so a seed reproduces the same innings
// on any platform.
class InningRng {
public:
    explicit InningRng(std::uint64_t seed) : engine_(seed) {}
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

// Plays one inning and returns its score. Draw order is part of the
// seeding contract: one uniform selects the initial type from p_start,
// then each shot consumes exactly one uniform, split over the type-j
// column as [0, k_1j) -> score leaving type 1, [k_1j, k_1j + k_2j, ...)
// -> score leaving the next type, [kappa_j, 1) -> miss.
inline int simulate_inning(const MarkovModel& mm, InningRng& rng) {
    const std::size_t N = mm.n_types();
    std::size_t type = N - 1;
    {
        double u = rng.uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            cum += mm.p_start()[i];
            if (u < cum) {
                type = i;
                break;
            }
        }
    }
    int score = 0;
    for (;;) {
        const double u = rng.uniform();
        double cum = 0.0;
        std::size_t next = N;
        for (std::size_t i = 0; i < N; ++i) {
            cum += mm.k(i, type);
            if (u < cum) {
                next = i;
                break;
            }
        }
        if (next == N) return score;  // miss
        ++score;
        type = next;
    }
}

namespace detail {

inline ScoreHistogram::Entries simulate_entries(const MarkovModel& mm,
                                                std::int64_t innings,
                                                std::uint64_t seed) {
    InningRng rng(seed);
    ScoreHistogram::Entries entries;
    for (std::int64_t i = 0; i < innings; ++i) ++entries[simulate_inning(mm, rng)];
    return entries;
}

}  // namespace detail

// Aggregates `innings` simulated innings, deterministically for a given
// seed. With shards > 1 the innings are split evenly (earlier shards get
// the remainder), shard s uses the derived seed `seed + s`, and shards
// run concurrently; the merged histogram is identical to running the
// same shards one after the other.
inline ScoreHistogram simulate_histogram(const MarkovModel& mm, std::int64_t innings,
                                         std::uint64_t seed, int shards = 1) {
    if (innings < 1) throw ValidationError("innings must be >= 1");
    if (shards < 1) throw ValidationError("shards must be >= 1");
    if (shards == 1)
        return ScoreHistogram(detail::simulate_entries(mm, innings, seed));

    std::vector<std::future<ScoreHistogram::Entries>> parts;
    const std::int64_t base = innings / shards;
    const std::int64_t rem = innings % shards;
    for (int s = 0; s < shards; ++s) {
        const std::int64_t count = base + (s < rem ? 1 : 0);
        parts.push_back(std::async(std::launch::async, [&mm, count, seed, s] {
            return detail::simulate_entries(mm, count, seed + static_cast<std::uint64_t>(s));
        }));
    }
    ScoreHistogram::Entries merged;
    for (auto& part : parts)
        for (const auto& [score, count] : part.get()) merged[score] += count;
    return ScoreHistogram(std::move(merged));
}

// Average as a function of the opponent: the cell (dk1, dk2) fixes
// k21 - k11 and k22 - k12, which together with trace and determinant
// determines K (a linear system); p0 is the opponent's policy.
struct OpponentSurface {
    struct Cell {
        double m = 0.0;
        bool feasible = false;
    };

    double rho1 = 0.0, rho2 = 0.0, p0 = 0.0;
    std::vector<double> dk1_axis, dk2_axis;
    std::vector<Cell> cells;  // row-major: cells[i * dk2_axis.size() + j]

    const Cell& at(std::size_t i, std::size_t j) const {
        return cells[i * dk2_axis.size() + j];
    }
};

namespace detail {

struct DeltaCell {
    Mat2 k;
    bool determinate = false;  // false on the singular line dk1 + dk2 = 0
    bool feasible = false;
};

// Solves { k11 + k12 = s - dk2, dk2*k11 - dk1*k12 = d } unless the
// system is singular (dk1 + dk2 = 0).
inline DeltaCell reconstruct_from_deltas(double rho1, double rho2, double dk1,
                                         double dk2) {
    const double s = rho1 + rho2;
    const double d = rho1 * rho2;
    DeltaCell cell;
    if (std::abs(dk1 + dk2) > 1e-12) {
        const double k12 = ((s - dk2) * dk2 - d) / (dk1 + dk2);
        const double k11 = s - dk2 - k12;
        cell.k = {k11, k12, k11 + dk1, k12 + dk2};
        cell.determinate = true;
        cell.feasible = validate_k(cell.k);
    }
    return cell;
}

}  // namespace detail

inline OpponentSurface opponent_surface(double rho1, double rho2,
                                        std::pair<double, double> dk1_range,
                                        std::pair<double, double> dk2_range,
                                        double p0, int grid = 161) {
    if (!(rho1 > 0.0) || !(rho2 < 1.0) || !(rho1 < rho2))
        throw ValidationError("opponent_surface requires 0 < rho1 < rho2 < 1");
    if (!(p0 >= 0.0) || p0 > 1.0) throw ValidationError("p0 must be in [0, 1]");
    if (grid < 2) throw ValidationError("grid must be >= 2");

    OpponentSurface surf;
    surf.rho1 = rho1;
    surf.rho2 = rho2;
    surf.p0 = p0;
    auto axis = [grid](std::pair<double, double> range) {
        std::vector<double> v(grid);
        for (int i = 0; i < grid; ++i)
            v[i] = range.first +
                   (range.second - range.first) * static_cast<double>(i) / (grid - 1);
        return v;
    };
    surf.dk1_axis = axis(dk1_range);
    surf.dk2_axis = axis(dk2_range);
    surf.cells.resize(surf.dk1_axis.size() * surf.dk2_axis.size());

    const double s = rho1 + rho2;
    const double d = rho1 * rho2;
    for (std::size_t i = 0; i < surf.dk1_axis.size(); ++i) {
        for (std::size_t j = 0; j < surf.dk2_axis.size(); ++j) {
            const double dk1 = surf.dk1_axis[i];
            const double dk2 = surf.dk2_axis[j];
            OpponentSurface::Cell& out = surf.cells[i * surf.dk2_axis.size() + j];
            detail::DeltaCell cell = detail::reconstruct_from_deltas(rho1, rho2, dk1, dk2);
            if (cell.determinate) {
                if (cell.feasible) {
                    out.m = markov_mean(snap_to_unit(cell.k), p0);
                    out.feasible = true;
                }
                continue;
            }
            // Singular line: solutions exist only when dk2(s - dk2) = d,
            // i.e. dk2 is one of the eigenvalues, and then k12 is a free
            // parameter. kappa1 + kappa2 = 2s + dk1 - dk2 over the whole
            // family, so the average is pinned only at p0 = 1/2.
            if (std::abs(dk2 * (s - dk2) - d) > 1e-12) continue;
            if (std::abs(p0 - 0.5) > 1e-12) continue;
            // feasible k12 range: intersect the probability constraints,
            // all linear in k12 (k11 = s - dk2 - k12 decreasing, k21 and
            // kappa1 decreasing, k22 and kappa2 increasing)
            const double k11_at0 = s - dk2;
            double lo = 0.0, hi = 1.0;
            hi = std::min(hi, k11_at0);                    // k11 >= 0
            lo = std::max(lo, k11_at0 - 1.0);              // k11 <= 1
            hi = std::min(hi, k11_at0 + dk1);              // k21 >= 0
            lo = std::max(lo, k11_at0 + dk1 - 1.0);        // k21 <= 1
            lo = std::max(lo, -dk2);                       // k22 >= 0
            hi = std::min(hi, 1.0 - dk2);                  // k22 <= 1
            lo = std::max(lo, (2.0 * k11_at0 + dk1 - 1.0) / 2.0);  // kappa1 <= 1
            hi = std::min(hi, (1.0 - dk2) / 2.0);          // kappa2 <= 1
            if (lo > hi + kBoundaryTol) continue;
            const double mu1 = s + 0.5 * (dk1 - dk2);
            const double y = (mu1 - rho1) / (rho2 - rho1);
            if (!y_admissible(rho1, rho2, y)) continue;
            out.m = spectral_mean(rho1, rho2, y);
            out.feasible = true;
        }
    }
    return surf;
}

// CSV rows "dk1,dk2,m,feasible"; infeasible cells carry m = nan.
inline void write_surface_csv(std::ostream& os, const OpponentSurface& surf) {
    os << "dk1,dk2,m,feasible\n";
    char buf[96];
    for (std::size_t i = 0; i < surf.dk1_axis.size(); ++i) {
        for (std::size_t j = 0; j < surf.dk2_axis.size(); ++j) {
            const OpponentSurface::Cell& c = surf.at(i, j);
            if (c.feasible)
                std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,1\n",
                              surf.dk1_axis[i], surf.dk2_axis[j], c.m);
            else
                std::snprintf(buf, sizeof buf, "%.10g,%.10g,nan,0\n",
                              surf.dk1_axis[i], surf.dk2_axis[j]);
            os << buf;
        }
    }
}

}  // namespace carom
