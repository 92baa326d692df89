#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "carom/models.hpp"
#include "helpers.hpp"

using carom::BernoulliModel;
using carom::Eigen2;
using carom::eigen2;
using carom::MarkovModel;
using carom::Mat2;
using carom::SpectralFit;

namespace {

// Brute-force reference: mu_n via explicit 2x2 matrix powers, kept
// deliberately separate from the library's iteration.
double mu_by_matrix_power(const Mat2& k, double p0, int n) {
    std::array<std::array<double, 2>, 2> kn{{{1.0, 0.0}, {0.0, 1.0}}};
    const std::array<std::array<double, 2>, 2> km{{{k.k11, k.k12}, {k.k21, k.k22}}};
    for (int step = 0; step < n; ++step) {
        std::array<std::array<double, 2>, 2> next{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < 2; ++l) next[i][j] += km[i][l] * kn[l][j];
        kn = next;
    }
    const double p1 = kn[0][0] * p0 + kn[0][1] * (1.0 - p0);
    const double p2 = kn[1][0] * p0 + kn[1][1] * (1.0 - p0);
    return p1 + p2;
}

const Mat2 kBalklineDiagonal{0.407, 0.0, 0.0, 0.980};
const Mat2 kBalklineMixed{0.435, 0.048, 0.322, 0.952};
const Mat2 kBalklineCenter{0.409, 0.012, 0.115, 0.978};

}  // namespace

TEST_CASE("bernoulli_survival") {
    REQUIRE(carom::bernoulli_survival(BernoulliModel(0.5), 2) == 0.25);
    REQUIRE(carom::bernoulli_survival(BernoulliModel(0.0), 3) == 0.0);
    REQUIRE(carom::bernoulli_survival(BernoulliModel(0.0), 0) == 1.0);

    double repeated = 1.0;
    for (int i = 0; i < 100; ++i) repeated *= 0.98;
    REQUIRE(carom::bernoulli_survival(BernoulliModel(0.98), 100) ==
            Catch::Approx(repeated).margin(1e-15));
    REQUIRE(repeated == Catch::Approx(0.1326).margin(5e-5));
}

TEST_CASE("bernoulli_mean and its inverse") {
    REQUIRE(carom::bernoulli_mean(BernoulliModel(0.5)) == 1.0);
    REQUIRE(carom::bernoulli_mean(BernoulliModel(0.0)) == 0.0);
    const double m = 30.0;
    REQUIRE(carom::bernoulli_mean(BernoulliModel(m / (m + 1.0))) ==
            Catch::Approx(30.0).epsilon(1e-12));
    REQUIRE_THROWS_AS(BernoulliModel(1.0), carom::ValidationError);
    REQUIRE_THROWS_AS(BernoulliModel(-0.1), carom::ValidationError);
}

TEST_CASE("markov_survival on hand-checked cases") {
    const MarkovModel diag(Mat2{0.4, 0.0, 0.0, 0.8}, 0.5);
    REQUIRE(carom::markov_survival(diag, 1) == Catch::Approx(0.6).margin(1e-15));
    REQUIRE(carom::markov_survival(diag, 0) == 1.0);

    // both column sums are 0.8, so the process is Bernoullian
    const MarkovModel bern_like(Mat2{0.8, 0.4, 0.0, 0.4}, 0.3);
    for (int n : {0, 1, 2, 5, 10, 40}) {
        REQUIRE(carom::markov_survival(bern_like, n) ==
                Catch::Approx(std::pow(0.8, n)).epsilon(1e-12));
        REQUIRE(carom::markov_survival(bern_like, n) ==
                Catch::Approx(mu_by_matrix_power(bern_like.k2(), 0.3, n)).epsilon(1e-13));
    }
}

TEST_CASE("markov_survival agrees with matrix powers on random models") {
    test_helpers::Gen gen(77001);
    for (int rep = 0; rep < 30; ++rep) {
        const Mat2 k = gen.substochastic();
        const double p0 = gen.uniform(0.0, 1.0);
        const MarkovModel mm(k, p0);
        for (int n : {0, 1, 2, 3, 7, 19, 64})
            REQUIRE(carom::markov_survival(mm, n) ==
                    Catch::Approx(mu_by_matrix_power(k, p0, n)).margin(1e-13));
    }
}

TEST_CASE("markov_survival handles three shot types") {
    // block model: types 1,2 as in the diagonal case plus a sticky type 3
    const MarkovModel mm({0.4, 0.0, 0.1,
                          0.0, 0.8, 0.1,
                          0.1, 0.1, 0.7},
                         {0.2, 0.3, 0.5});
    REQUIRE(carom::markov_survival(mm, 0) == 1.0);
    // reference by independent dense power iteration
    std::vector<double> p{0.2, 0.3, 0.5};
    for (int n = 1; n <= 25; ++n) {
        std::vector<double> q(3, 0.0);
        const double k[3][3] = {{0.4, 0.0, 0.1}, {0.0, 0.8, 0.1}, {0.1, 0.1, 0.7}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) q[i] += k[i][j] * p[j];
        p = q;
        REQUIRE(carom::markov_survival(mm, n) ==
                Catch::Approx(p[0] + p[1] + p[2]).margin(1e-14));
    }
}

TEST_CASE("markov_mean closed form") {
    for (double p0 : {0.0, 0.3, 1.0})
        REQUIRE(carom::markov_mean(Mat2{0.8, 0.4, 0.0, 0.4}, p0) ==
                Catch::Approx(4.0).epsilon(1e-12));
    REQUIRE(carom::markov_mean(Mat2{0.4, 0.0, 0.0, 0.8}, 1.0) ==
            Catch::Approx(2.0 / 3.0).epsilon(1e-12));

    const double m = carom::markov_mean(kBalklineCenter, 0.5);
    REQUIRE(m == Catch::Approx(30.8).margin(0.05));
    // cross-check against partial sums of the survival curve
    const MarkovModel mm(kBalklineCenter, 0.5);
    double partial = 0.0;
    for (int n = 1; n <= 3000; ++n) partial += carom::markov_survival(mm, n);
    REQUIRE(m == Catch::Approx(partial).margin(1e-9));
}

TEST_CASE("markov_mean matches truncated sums within the tail bound") {
    test_helpers::Gen gen(77002);
    for (int rep = 0; rep < 10; ++rep) {
        const Mat2 k = gen.substochastic(0.98);
        const double p0 = gen.uniform(0.0, 1.0);
        const MarkovModel mm(k, p0);
        const double m = carom::markov_mean(mm);
        const double rho2 = eigen2(k).rho2;
        int n_star = 1;
        while (std::pow(rho2, n_star) * std::max(m, 1.0) >= 1e-9) ++n_star;
        double partial = 0.0;
        for (int n = 1; n <= n_star; ++n) partial += carom::markov_survival(mm, n);
        REQUIRE(std::abs(m - partial) <= 1e-9 + 1e-12);
    }
}

TEST_CASE("markov_mean diverges when the spectral radius reaches 1") {
    REQUIRE_THROWS_AS(carom::markov_mean(Mat2{1.0, 0.0, 0.0, 1.0}, 0.5),
                      carom::DivergenceError);
}

TEST_CASE("a never-missed shot type is allowed while the radius stays below 1") {
    // second column of the mixed reference matrix sums to exactly 1
    const MarkovModel mm(kBalklineMixed, 0.5);
    REQUIRE(mm.kappa(1) == 1.0);
    const double m = carom::markov_mean(mm);
    REQUIRE(std::isfinite(m));
    REQUIRE(m > 0.0);
}

TEST_CASE("model validation") {
    REQUIRE_THROWS_AS(MarkovModel(Mat2{-0.1, 0.0, 0.0, 0.5}, 0.5),
                      carom::ValidationError);
    REQUIRE_THROWS_AS(MarkovModel(Mat2{0.5, 0.5, 0.6, 0.4}, 0.5),
                      carom::ValidationError);
    REQUIRE_THROWS_AS(MarkovModel({0.1, 0.2, 0.3, 0.1}, {0.7, 0.7}),
                      carom::ValidationError);
    const MarkovModel three({0.1, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.1},
                            {0.3, 0.3, 0.4});
    REQUIRE_THROWS_AS(three.k2(), carom::ValidationError);
}

TEST_CASE("eigen2 on the published matrices") {
    const Eigen2 a = eigen2(kBalklineDiagonal);
    REQUIRE(a.rho1 == 0.407);
    REQUIRE(a.rho2 == 0.980);
    REQUIRE_FALSE(a.degenerate);

    const Eigen2 b = eigen2(kBalklineMixed);
    REQUIRE(b.rho1 == Catch::Approx(0.4067).margin(2e-4));
    REQUIRE(b.rho2 == Catch::Approx(0.9803).margin(2e-4));
}

TEST_CASE("eigen2 flags scalar matrices as degenerate") {
    const Eigen2 e = eigen2(Mat2{0.6, 0.0, 0.0, 0.6});
    REQUIRE(e.degenerate);
    REQUIRE(e.rho1 == 0.6);
    REQUIRE(e.rho2 == 0.6);
    REQUIRE_THROWS_AS(eigen2(Mat2{-0.1, 0.0, 0.0, 0.5}), carom::ValidationError);

    // defective matrix: repeated eigenvalue with a single eigenvector
    const Eigen2 j = eigen2(Mat2{0.5, 0.1, 0.0, 0.5});
    REQUIRE(j.degenerate);
    REQUIRE(j.v1.x1 == j.v2.x1);
    REQUIRE(j.v1.x2 == j.v2.x2);
}

TEST_CASE("eigen2 satisfies the eigen equations on random matrices") {
    test_helpers::Gen gen(77003);
    for (int rep = 0; rep < 200; ++rep) {
        const Mat2 k = gen.substochastic();
        const Eigen2 e = eigen2(k);
        REQUIRE(e.rho1 <= e.rho2);
        REQUIRE(e.rho1 + e.rho2 == Catch::Approx(k.trace()).margin(1e-12));
        REQUIRE(e.rho1 * e.rho2 == Catch::Approx(k.det()).margin(1e-12));
        if (e.degenerate) continue;
        for (auto [rho, v] : {std::pair{e.rho1, e.v1}, std::pair{e.rho2, e.v2}}) {
            const carom::Vec2 kv = k.apply(v);
            REQUIRE(kv.x1 == Catch::Approx(rho * v.x1).margin(1e-12));
            REQUIRE(kv.x2 == Catch::Approx(rho * v.x2).margin(1e-12));
            REQUIRE(std::max(std::abs(v.x1), std::abs(v.x2)) == 1.0);
            REQUIRE((v.x1 == 1.0 || v.x2 == 1.0));
        }
    }
}

TEST_CASE("y_from round trip and boundaries") {
    const double m = carom::spectral_mean(0.4, 0.8, 0.5);
    REQUIRE(m == Catch::Approx(7.0 / 3.0).epsilon(1e-14));
    REQUIRE(carom::y_from(0.4, 0.8, m) == Catch::Approx(0.5).epsilon(1e-13));
    REQUIRE_THROWS_AS(carom::y_from(0.4, 0.4, 1.0), carom::DegenerateError);
    REQUIRE_THROWS_AS(carom::y_from(0.0, 0.8, 1.0), carom::ValidationError);

    const SpectralFit pure{0.4, 0.8, 1.0, 4.0, 0.0};
    for (int n : {0, 1, 5, 9})
        REQUIRE(carom::spectral_survival(pure, n) ==
                Catch::Approx(std::pow(0.8, n)).epsilon(1e-14));
}

TEST_CASE("y_from on the balkline-scale triple") {
    const double y = carom::y_from(0.4067, 0.9803, 30.8);
    REQUIRE(y == Catch::Approx(0.6136).margin(5e-4));
}

TEST_CASE("admissible Y range keeps the curve monotone in [0, 1]") {
    test_helpers::Gen gen(77004);
    for (int rep = 0; rep < 50; ++rep) {
        const double rho1 = gen.uniform(0.05, 0.6);
        const double rho2 = gen.uniform(rho1 + 0.05, 0.98);
        const double ymax = carom::y_max(rho1, rho2);
        for (double y : {0.0, 0.3, 1.0, ymax}) {
            if (!carom::y_admissible(rho1, rho2, y)) continue;
            const SpectralFit f{rho1, rho2, y, carom::spectral_mean(rho1, rho2, y), 0.0};
            double prev = 1.0;
            for (int n = 0; n <= 60; ++n) {
                const double mu = carom::spectral_survival(f, n);
                REQUIRE(mu >= -1e-12);
                REQUIRE(mu <= prev + 1e-12);
                prev = mu;
            }
        }
        // just past the admissible edge mu_1 would exceed 1
        const double y_bad = ymax * 1.02;
        const SpectralFit f{rho1, rho2, y_bad, carom::spectral_mean(rho1, rho2, y_bad),
                            0.0};
        REQUIRE_THROWS_AS(carom::spectral_survival(f, 1), carom::ValidationError);
        REQUIRE((1.0 - y_bad) * rho1 + y_bad * rho2 > 1.0);
    }
}

TEST_CASE("spectral decomposition reproduces the survival curve") {
    test_helpers::Gen gen(77005);
    for (int rep = 0; rep < 40; ++rep) {
        const Mat2 k = gen.substochastic();
        const Eigen2 e = eigen2(k);
        if (e.degenerate || e.rho2 - e.rho1 < 1e-3) continue;
        const double p0 = gen.uniform(0.0, 1.0);
        const MarkovModel mm(k, p0);
        const SpectralFit f = carom::spectral_from_model(mm);
        for (int n = 0; n <= 200; ++n)
            REQUIRE(carom::spectral_survival(f, n) ==
                    Catch::Approx(carom::markov_survival(mm, n)).margin(1e-10));
        REQUIRE(f.m == Catch::Approx(carom::markov_mean(mm)).margin(1e-9));
    }
}

TEST_CASE("spectral_from_model rejects degenerate matrices") {
    REQUIRE_THROWS_AS(carom::spectral_from_model(MarkovModel(Mat2{0.5, 0, 0, 0.5}, 0.5)),
                      carom::DegenerateError);
}

TEST_CASE("Bernoulli embedding is exact") {
    const double lambda = 0.73;
    const MarkovModel embedded(Mat2{lambda, 0.0, 0.0, lambda}, 0.5);
    double power = 1.0;
    for (int n = 0; n <= 50; ++n) {
        REQUIRE(carom::markov_survival(embedded, n) == power);  // bit-level
        power *= lambda;
    }
    for (double p0 : {0.0, 1.0}) {
        const MarkovModel at_corner(Mat2{lambda, 0.0, 0.0, lambda}, p0);
        double pw = 1.0;
        for (int n = 0; n <= 50; ++n) {
            REQUIRE(carom::markov_survival(at_corner, n) == pw);
            pw *= lambda;
        }
    }
}
