#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "delayosc/named_examples.hpp"
#include "delayosc/piecewise.hpp"

using namespace delayosc;

namespace {

// Independent quadrature oracle: composite Simpson with n panels (n even).
double simpson_abs(const PiecewiseFn& f, double a, double b, int n) {
    if (n % 2 == 1) ++n;
    const double h = (b - a) / n;
    double acc = std::abs(f(a)) + std::abs(f(b));
    for (int i = 1; i < n; ++i) {
        acc += std::abs(f(a + i * h)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

// Brute-force delay infimum over a dense grid on [t, t + 2 periods].
double grid_tau_min(const PiecewiseFn& tau, double t, int pts = 20001) {
    const double span = 2.0 * tau.period();
    double best = tau(t);
    for (int i = 0; i <= pts; ++i) {
        best = std::min(best, tau(t + span * i / pts));
    }
    return best;
}

PiecewiseFn tau_t_minus_1() {
    return PiecewiseFn::delay({Piece::affine(0.0, 1.0, 1.0, -1.0)}, Extension::affine_periodic);
}

PiecewiseFn tau_identity() {
    return PiecewiseFn::delay({Piece::affine(0.0, 1.0, 1.0, 0.0)}, Extension::affine_periodic);
}

// Example 19.12 collapsed delay at s = 2: -1 on [0,1), 1 on [1,2),
// tau(t + 2) = tau(t) + 2.
PiecewiseFn tau2() {
    return PiecewiseFn::delay({Piece::constant(0.0, 1.0, -1.0), Piece::constant(1.0, 2.0, 1.0)},
                              Extension::affine_periodic);
}

PiecewiseFn c2() {
    return PiecewiseFn::coefficient(
        {Piece::constant(0.0, 1.0, 1.0), Piece::constant(1.0, 2.0, -1.0)}, Extension::periodic);
}

} // namespace

TEST_CASE("eval on constant and affine pieces") {
    const PiecewiseFn c =
        PiecewiseFn::coefficient({Piece::constant(0.0, 2.0, 1.0)}, Extension::none);
    CHECK(c(1.3) == 1.0);

    const PiecewiseFn t2 = tau2();
    CHECK(t2(0.5) == -1.0);
    CHECK(t2(1.5) == 1.0);

    const PiecewiseFn tm1 = tau_t_minus_1();
    CHECK(tm1(3.4) == Catch::Approx(2.4).margin(1e-12));
}

TEST_CASE("eval respects extension rules exactly on dyadic arguments") {
    const PiecewiseFn c = c2();
    for (double t : {0.25, 0.5, 1.75, 0.0, 1.0}) {
        CHECK(c(t + 2.0) == c(t));
        CHECK(c(t + 8.0) == c(t));
    }
    const PiecewiseFn t2 = tau2();
    for (double t : {0.25, 0.5, 1.75}) {
        CHECK(t2(t + 2.0) == t2(t) + 2.0);
    }
}

TEST_CASE("eval outside a finite window fails") {
    const PiecewiseFn c =
        PiecewiseFn::coefficient({Piece::constant(0.0, 2.0, 1.0)}, Extension::none);
    CHECK_THROWS_AS(c(2.5), OutOfDomain);
    CHECK_THROWS_AS(c(-0.5), OutOfDomain);
    CHECK(c(2.0) == 1.0); // closure of the window
}

TEST_CASE("abs_integral closed forms") {
    const PiecewiseFn ones =
        PiecewiseFn::coefficient({Piece::constant(0.0, 2.0, 1.0)}, Extension::periodic);
    CHECK(ones.abs_integral(0.0, 1.5) == Catch::Approx(1.5).margin(1e-14));

    // |c_s| = 1 everywhere, so the integral over one period is Lambda(s).
    for (double s : {1.0, 1.125, 1.5, 2.0}) {
        const NamedExample ex = make_xs(s);
        const double lam = lambda_of(s);
        CHECK(ex.eq.c().abs_integral(0.0, lam) == Catch::Approx(lam).margin(1e-12));
    }

    // f(u) = 1 - u on [0, 2]: split at the sign change, total 1/2 + 1/2.
    const PiecewiseFn hat =
        PiecewiseFn::coefficient({Piece::affine(0.0, 2.0, -1.0, 1.0)}, Extension::none);
    CHECK(hat.abs_integral(0.0, 2.0) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("abs_integral agrees with Simpson quadrature") {
    const PiecewiseFn hat =
        PiecewiseFn::coefficient({Piece::affine(0.0, 2.0, -1.0, 1.0)}, Extension::none);
    CHECK(hat.abs_integral(0.0, 2.0) ==
          Catch::Approx(simpson_abs(hat, 0.0, 2.0, 100000)).epsilon(1e-8));

    for (double s : {1.125, 2.0}) {
        const NamedExample ex = make_xs(s);
        const double b = 2.0 * lambda_of(s);
        CHECK(ex.eq.c().abs_integral(0.0, b) ==
              Catch::Approx(simpson_abs(ex.eq.c(), 0.0, b, 100000)).epsilon(1e-8));
    }
}

TEST_CASE("abs_integral additivity") {
    std::mt19937_64 rng(7);
    const PiecewiseFn c = make_xs(1.5).eq.c();
    for (int i = 0; i < 200; ++i) {
        double pts[3];
        for (double& p : pts) p = 10.0 * (rng() >> 11) * 0x1.0p-53;
        std::sort(std::begin(pts), std::end(pts));
        const double whole = c.abs_integral(pts[0], pts[2]);
        const double split = c.abs_integral(pts[0], pts[1]) + c.abs_integral(pts[1], pts[2]);
        CHECK(whole == Catch::Approx(split).epsilon(1e-12).margin(1e-13));
    }
}

TEST_CASE("breakpoints include boundaries and sign changes") {
    const PiecewiseFn ten =
        PiecewiseFn::coefficient({Piece::constant(0.0, 10.0, 1.0)}, Extension::none);
    CHECK(ten.breakpoints(0.0, 10.0) == std::vector<double>{0.0, 10.0});

    const PiecewiseFn c = c2();
    CHECK(c.breakpoints(0.0, 4.0) == std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0});

    const PiecewiseFn hat =
        PiecewiseFn::coefficient({Piece::affine(0.0, 2.0, -1.0, 1.0)}, Extension::none);
    CHECK(hat.breakpoints(0.0, 2.0) == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("tau_min on monotone and jumping delays") {
    CHECK(tau_t_minus_1().tau_min(5.0) == Catch::Approx(4.0).margin(1e-12));

    const PiecewiseFn t2 = tau2();
    CHECK(t2.tau_min(0.0) == -1.0);
    CHECK(t2.tau_min(1.0) == 1.0);

    // cross-check against the dense-grid oracle
    for (double t : {0.0, 0.4, 1.0, 2.7, 4.0}) {
        const double g = grid_tau_min(t2, t);
        CHECK(t2.tau_min(t) <= g + 1e-9);
        CHECK(g - t2.tau_min(t) <= 3e-4);
    }
}

TEST_CASE("tau_min is nondecreasing and below tau") {
    std::mt19937_64 rng(11);
    for (const PiecewiseFn& tau : {tau2(), make_xs(1.5).eq.tau(), make_ys(1.125).eq.tau()}) {
        double prev = tau.tau_min(0.0);
        for (int i = 1; i <= 400; ++i) {
            const double t = 8.0 * i / 400.0;
            const double m = tau.tau_min(t);
            CHECK(m >= prev - 1e-12);
            CHECK(m <= tau(t) + 1e-12);
            prev = m;
        }
        for (int i = 0; i < 10000; ++i) {
            const double t = 12.0 * (rng() >> 11) * 0x1.0p-53;
            CHECK(tau(t) <= t + 1e-9);
        }
    }
}

TEST_CASE("tau_min_iter composes tau_min") {
    const PiecewiseFn tm1 = tau_t_minus_1();
    CHECK(tm1.tau_min_iter(5.0, 1) == Catch::Approx(4.0).margin(1e-12));
    CHECK(tm1.tau_min_iter(5.0, 2) == Catch::Approx(3.0).margin(1e-12));

    const PiecewiseFn t2 = tau2();
    CHECK(t2.tau_min_iter(4.0, 2) == Catch::Approx(t2.tau_min(t2.tau_min(4.0))).margin(1e-12));
    const double g = grid_tau_min(t2, grid_tau_min(t2, 4.0));
    CHECK(std::abs(t2.tau_min_iter(4.0, 2) - g) <= 3e-4);
}

TEST_CASE("compute_anchor canonical values") {
    const Anchor a = compute_anchor(tau_t_minus_1());
    CHECK(a.t1 == Catch::Approx(1.0).margin(1e-9));
    CHECK(a.rho == Catch::Approx(2.0 + 1e-9).margin(1e-9));

    const Anchor id = compute_anchor(tau_identity());
    CHECK(id.t1 == Catch::Approx(0.0).margin(1e-9));
    CHECK(id.rho == Catch::Approx(1e-9).margin(1e-9));

    // bisection against a dense forward scan for the jumping delay
    const PiecewiseFn t2 = tau2();
    const Anchor a2 = compute_anchor(t2);
    double scan = -1.0;
    for (int i = 0; i <= 400000; ++i) {
        const double t = 4.0 * i / 400000.0;
        if (t2.tau_min(t) > 0.0) {
            scan = t;
            break;
        }
    }
    REQUIRE(scan >= 0.0);
    CHECK(std::abs(a2.t1 - scan) <= 2e-5);
    CHECK(a2.t1 == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("delay validation rejects broken inputs") {
    // gap between pieces
    CHECK_THROWS_AS(PiecewiseFn::coefficient(
                        {Piece::constant(0.0, 1.0, 1.0), Piece::constant(1.5, 2.0, 1.0)},
                        Extension::periodic),
                    ValidationError);
    // delay above t
    CHECK_THROWS_AS(
        PiecewiseFn::delay({Piece::affine(0.0, 1.0, 1.0, 1.0)}, Extension::affine_periodic),
        ValidationError);
    // bounded (periodic) delay cannot reach infinity
    CHECK_THROWS_AS(PiecewiseFn::delay({Piece::constant(0.0, 1.0, 0.0)}, Extension::periodic),
                    ValidationError);
    // base interval must start at zero
    CHECK_THROWS_AS(PiecewiseFn::coefficient({Piece::constant(0.5, 1.0, 1.0)}, Extension::none),
                    ValidationError);
}

TEST_CASE("equation anchors for the collapsed s=2 example") {
    const Equation eq(c2(), tau2());
    CHECK(eq.t1() == Catch::Approx(1.0).margin(1e-9));
    CHECK(eq.rho() == Catch::Approx(3.0 + 1e-9).margin(1e-9));
    CHECK(eq.is_periodic());
}
