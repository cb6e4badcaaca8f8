#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "delayosc/lambda.hpp"

using namespace delayosc;

TEST_CASE("lambda closed-form values") {
    CHECK(lambda_of(2.0) == Catch::Approx(2.0).margin(1e-12));
    CHECK(lambda_of(1.0) ==
          Catch::Approx(3.0 - std::sqrt(2.0) - std::log(std::sqrt(2.0) - 1.0)).margin(1e-12));
    CHECK(lambda_of(1.0) == Catch::Approx(2.467160).margin(5e-7));
    // sqrt(2 * 9/8) = 3/2 exactly, so Lambda(9/8) = 13/8 + ln 2
    CHECK(lambda_of(1.125) == Catch::Approx(1.625 + std::log(2.0)).margin(1e-12));
    CHECK_THROWS_AS(lambda_of(0.9), DomainError);
    CHECK_THROWS_AS(lambda_of(2.1), DomainError);
}

TEST_CASE("lambda is strictly decreasing with the stated range") {
    std::mt19937_64 rng(3);
    auto u = [&] { return 1.0 + (rng() >> 11) * 0x1.0p-53; };
    const double lo = lambda_of(2.0);
    const double hi = lambda_of(1.0);
    for (int i = 0; i < 1000; ++i) {
        double a = u();
        double b = u();
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        CHECK(lambda_of(a) > lambda_of(b));
        CHECK(lambda_of(a) <= hi + 1e-12);
        CHECK(lambda_of(b) >= lo - 1e-12);
    }
}

TEST_CASE("sigma values and minimum") {
    CHECK(sigma_of(1.125) == Catch::Approx(2.75 + std::log(2.0)).margin(1e-12));
    CHECK(sigma_of(2.0) == Catch::Approx(4.0).margin(1e-12));
    CHECK(sigma_of(1.0) == Catch::Approx(1.0 + lambda_of(1.0)).margin(1e-12));

    const SigmaMin m = sigma_argmin();
    CHECK(m.s_star == Catch::Approx(1.125).margin(1e-9));
    CHECK(m.sigma_star == Catch::Approx(2.75 + std::log(2.0)).margin(1e-12));

    // derivative signs on either side of the minimum (finite differences)
    auto dsigma = [](double s) { return (sigma_of(s + 1e-7) - sigma_of(s - 1e-7)) / 2e-7; };
    CHECK(dsigma(1.5) > 0.0);
    CHECK(dsigma(1.05) < 0.0);
}

TEST_CASE("psi closed form hits the documented knots") {
    CHECK(psi_closed(2.0, 0.7) == Catch::Approx(0.7).margin(1e-15));
    CHECK(psi_closed(1.125, 0.625) == Catch::Approx(0.5).margin(1e-12));
    CHECK(psi_closed(1.125, 0.625 + std::log(2.0)) == Catch::Approx(1.0).margin(1e-10));
    CHECK_THROWS_AS(psi_closed(1.5, -0.2), DomainError);
    CHECK_THROWS_AS(psi_closed(1.5, lambda_of(1.5)), DomainError);
}

TEST_CASE("psi profile knots are increasing with increasing values") {
    for (double s : {1.0, 1.1, 1.5, 1.9}) {
        const PsiProfile p = psi_profile(s);
        CHECK(p.knots[0] < p.knots[1]);
        CHECK(p.knots[1] < p.knots[2]);
        CHECK(p.values[0] <= p.values[1]);
        CHECK(p.values[1] < p.values[2]);
        CHECK(p.values[2] == 1.0);
        for (int k = 0; k < 3; ++k) {
            CHECK(psi_closed(s, p.knots[k]) == Catch::Approx(p.values[k]).margin(1e-12));
        }
    }
    const PsiProfile p2 = psi_profile(2.0);
    CHECK(p2.knots[2] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("psi is continuous, increasing, and solves its equation") {
    for (double s : {1.0, 1.125, 1.37, 1.5, 1.86, 2.0}) {
        const PsiProfile p = psi_profile(s);
        const double lam1 = p.knots[2];
        for (int k = 0; k < 2; ++k) {
            if (p.knots[k] <= 0.0 || p.knots[k] >= lam1) continue;
            const double below = psi_closed(s, std::nextafter(p.knots[k], 0.0));
            const double above = psi_closed(s, std::nextafter(p.knots[k], lam1));
            CHECK(std::abs(below - above) <= 1e-12);
        }
        double prev = -1.0;
        for (int j = 0; j <= 1000; ++j) {
            const double t = lam1 * j / 1000.0;
            const double v = psi_closed(s, t);
            CHECK(v > prev);
            prev = v;
            // central-difference residual of psi' = min{1, max(s - t, psi)}
            if (t > 2e-6 && t < lam1 - 2e-6 && std::abs(t - p.knots[0]) > 1e-3 &&
                std::abs(t - p.knots[1]) > 1e-3) {
                const double d = (psi_closed(s, t + 1e-6) - psi_closed(s, t - 1e-6)) / 2e-6;
                const double rhs = std::min(1.0, std::max(s - t, v));
                CHECK(std::abs(d - rhs) <= 2e-6);
            }
        }
    }
}

TEST_CASE("picard iterates start at zero and saturate quickly") {
    CHECK(psi_picard(1.3, 0.7, 0) == 0.0);
    CHECK(psi_picard(2.0, 1.0, 1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(psi_picard(1.125, 0.625 + std::log(2.0), 60) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("picard iterates are monotone in n and converge to the closed form") {
    for (double s : {1.0, 1.125, 1.5, 2.0}) {
        const std::vector<double> a = psi_picard_grid(s, 7);
        const std::vector<double> b = psi_picard_grid(s, 8);
        for (std::size_t j = 0; j < a.size(); ++j) {
            CHECK(b[j] >= a[j] - 1e-12);
        }
        const std::vector<double> v = psi_picard_grid(s, 60);
        const double lam1 = lambda_of(s) - 1.0;
        double worst = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double t = lam1 * static_cast<double>(j) / static_cast<double>(v.size() - 1);
            worst = std::max(worst, std::abs(v[j] - psi_closed(s, t)));
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("alpha root solves the fixed-point equation") {
    CHECK(alpha_root(1.125, lambda_of(1.125)) == 1.0);
    CHECK(alpha_root(2.0, 2.0) == 1.0);
    // psi_2 is the identity, so alpha - (1.5 - alpha) = 0 gives 0.75
    CHECK(alpha_root(2.0, 1.5) == Catch::Approx(0.75).margin(1e-12));

    std::mt19937_64 rng(5);
    auto u = [&] { return (rng() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 300; ++i) {
        const double s = 1.0 + u();
        const double lam = lambda_of(s);
        const double ell = lam - 1.0 + 1e-6 + (1.0 - 1e-6) * u() * (lam - (lam - 1.0) - 1e-6);
        const double a = alpha_root(s, ell);
        CHECK(std::abs(a - psi_closed(s, ell - a)) <= 1e-10);
    }
}

TEST_CASE("decay factors per theorem") {
    CHECK(decay_factor(DecayTheorem::t2352, 1.0, 0.0, 1.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(decay_factor(DecayTheorem::t2352, 1.5, 0.0, 1.0) == Catch::Approx(1.0).margin(1e-15));
    CHECK_THROWS_AS(decay_factor(DecayTheorem::t2352, 1.6, 0.0, 1.0), HypothesisViolated);

    // ell = 1: equating q - 1 = 1 - (q - ell)/2 gives q* = 5/3, factor 2/3.
    CHECK(decay_factor(DecayTheorem::t2055, 0.0, 1.0, 1.0) ==
          Catch::Approx(2.0 / 3.0).margin(1e-12));
    CHECK(decay_factor(DecayTheorem::t2055, 0.0, 2.0, 1.0) == 1.0);
    CHECK_THROWS_AS(decay_factor(DecayTheorem::t2055, 0.0, 2.2, 1.0), HypothesisViolated);

    // grid-search oracle over q for the t2055 minimization
    const double ell = 1.0;
    double best = 10.0;
    for (double q = ell + 1e-6; q < 2.0; q += 1e-6) {
        best = std::min(best, std::max(q - 1.0, 1.0 - 0.5 * (q - ell)));
    }
    CHECK(decay_factor(DecayTheorem::t2055, 0.0, ell, 1.0) <= best + 1e-9);
    CHECK(std::abs(decay_factor(DecayTheorem::t2055, 0.0, ell, 1.0) - best) <= 2e-6);

    for (double s : {1.0, 1.125, 1.5, 2.0}) {
        CHECK(decay_factor(DecayTheorem::t2056, s, lambda_of(s), s) ==
              Catch::Approx(1.0).margin(1e-10));
    }
    CHECK_THROWS_AS(decay_factor(DecayTheorem::t2056, 1.7, 2.0, 1.5), HypothesisViolated);
    CHECK_THROWS_AS(decay_factor(DecayTheorem::t2056, 1.0, 2.5, 1.5), HypothesisViolated);
    // the factor equals the fixed point alpha
    const double d = decay_factor(DecayTheorem::t2056, 1.2, 1.2, 1.6);
    CHECK(d == Catch::Approx(alpha_root(1.6, 1.2)).margin(1e-9));
}

TEST_CASE("exponential decay constants") {
    const DecayConstants k = exp_decay_constants(0.5, 1.0, 1.0, 1.0);
    CHECK(k.beta == 2);
    CHECK(k.delta == Catch::Approx(4.0).margin(1e-15));
    CHECK(k.M == Catch::Approx(2.0).margin(1e-15));
    CHECK(k.gamma == Catch::Approx(std::log(2.0) / 4.0).margin(1e-15));

    const DecayConstants k2 = exp_decay_constants(std::exp(-1.0), 1.0, 2.0, 1.0);
    CHECK(k2.beta == 1);
    CHECK(k2.delta == Catch::Approx(3.0).margin(1e-15));
    CHECK(k2.gamma == Catch::Approx(1.0 / 3.0).margin(1e-12));

    // gamma -> 0 as d -> 1 from below
    CHECK(exp_decay_constants(1.0 - 1e-12, 1.0, 1.0, 1.0).gamma < 1e-9);

    CHECK_THROWS_AS(exp_decay_constants(1.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(exp_decay_constants(0.5, -1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(exp_decay_constants(0.5, 1.0, 0.0, 1.0), DomainError);
}
