#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "carom/errors.hpp"
#include "carom/histogram.hpp"
#include "carom/models.hpp"

// Cross-player comparison tools. Rescaling run length to nu = (-ln lambda) n
// turns every Bernoulli curve into exp(-nu), so players with different
// averages become comparable; the tail slope against nu then measures how
// much the easy-shot eigenvalue outlives the Bernoulli rate.

namespace carom {

struct DedimCurve {
    struct Point {
        double nu = 0.0;
        double mu = 0.0;
    };
    std::vector<Point> points;
};

// Maps each n with mu_n > 0 to ((-ln lambda) n, mu_n).
inline DedimCurve dedimensionalize(const SurvivalCurve& curve, double lambda) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw ValidationError("dedimensionalize requires 0 < lambda < 1");
    const double scale = -std::log(lambda);
    DedimCurve out;
    out.points.reserve(curve.max_index());
    for (std::size_t n = 0; n < curve.values().size(); ++n)
        if (curve[n] > 0.0)
            out.points.push_back({scale * static_cast<double>(n), curve[n]});
    return out;
}

// Semi-log slope of the large-n asymptote against nu: -ln(rho2)/ln(lambda).
inline double asymptote_slope(double rho2, double lambda) {
    if (!(rho2 > 0.0) || !(rho2 < 1.0))
        throw ValidationError("asymptote_slope requires 0 < rho2 < 1");
    if (!(lambda > 0.0)) throw ValidationError("asymptote_slope requires lambda > 0");
    if (lambda >= 1.0) throw DivergenceError("asymptote slope diverges as lambda -> 1");
    return -std::log(rho2) / std::log(lambda);
}

inline double asymptote_slope(const SpectralFit& fit, double lambda) {
    return asymptote_slope(fit.rho2, lambda);
}

// Empirical exponent ln(rho2)/ln(lambda), to compare against the 0.6
// observed across skill levels.
inline double check_rho2_lambda(double rho2, double lambda) {
    if (!(rho2 > 0.0) || !(rho2 < 1.0) || !(lambda > 0.0) || !(lambda < 1.0))
        throw ValidationError("check_rho2_lambda requires rho2, lambda in (0, 1)");
    return std::log(rho2) / std::log(lambda);
}

inline double check_rho2_lambda(const SpectralFit& fit, double lambda) {
    return check_rho2_lambda(fit.rho2, lambda);
}

// Contribution to the average of runs beginning with an easy (type-2)
// shot: exact value (1-p0) 1^T K (I-K)^{-1} e2, plus the rule-of-thumb
// (1-p0) lambda^0.6 / (1 - lambda^0.6) with lambda = m/(m+1). The exact
// form is authoritative; the power law is only as good as the 0.6 fit.
struct EasyStartMean {
    double exact = 0.0;
    double approx = 0.0;
};

inline EasyStartMean easy_start_mean(const MarkovModel& mm) {
    if (mm.n_types() != 2) throw ValidationError("easy_start_mean requires a 2-type model");
    const Mat2 k = mm.k2();
    std::vector<double> a{1.0 - k.k11, -k.k12, -k.k21, 1.0 - k.k22};
    std::vector<double> x = detail::solve_dense(std::move(a), {0.0, 1.0}, 2);
    EasyStartMean out;
    const double run_from_easy = x[0] + x[1] - 1.0;  // 1^T K (I-K)^{-1} e2
    if (!std::isfinite(run_from_easy) || run_from_easy < -1e-9)
        throw DivergenceError("series sum is not finite: spectral radius not below 1");
    out.exact = (1.0 - mm.p0()) * run_from_easy;
    const double m = markov_mean(mm);
    const double lambda = m / (m + 1.0);
    const double pl = std::pow(lambda, 0.6);
    out.approx = (1.0 - mm.p0()) * pl / (1.0 - pl);
    return out;
}

// CSV rows "nu,mu".
inline void write_dedim_csv(std::ostream& os, const DedimCurve& curve) {
    os << "nu,mu\n";
    char buf[64];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", p.nu, p.mu);
        os << buf;
    }
}

}  // namespace carom
