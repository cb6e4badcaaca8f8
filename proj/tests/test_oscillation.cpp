#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "delayosc/named_examples.hpp"
#include "delayosc/oscillation.hpp"
#include "delayosc/random_equations.hpp"
#include "delayosc/verify.hpp"

using namespace delayosc;

namespace {

History exact_history(const NamedExample& ex, double h) {
    return History::sample(ex.solution, ex.eq.tau().tau_min(0.0), 0.0, h, &ex.eq);
}

} // namespace

TEST_CASE("find_zeros on sampled shapes") {
    const NamedExample x2 = make_xs(2.0);
    const Trajectory s = sample_trajectory(x2.eq, x2.solution, 0.0, 6.0, 1e-3);
    const std::vector<double> zeros = find_zeros(s);
    std::vector<double> inside;
    for (double z : zeros)
        if (z >= -1e-9) inside.push_back(z);
    REQUIRE(inside.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(inside[i] == Catch::Approx(2.0 * static_cast<double>(i)).margin(2e-3));
    }

    const Trajectory flat = sample_trajectory(x2.eq, [](double) { return 1.0; }, 0.0, 6.0, 1e-2);
    CHECK(find_zeros(flat).empty());

    const Trajectory line =
        sample_trajectory(x2.eq, [](double t) { return t - 1.0; }, 0.0, 2.0, 1e-2);
    const std::vector<double> lz = find_zeros(line);
    REQUIRE(lz.size() == 1);
    CHECK(lz[0] == Catch::Approx(1.0).margin(1e-2));
}

TEST_CASE("zero solution collapses to a full-window cluster") {
    const NamedExample x2 = make_xs(2.0);
    const Trajectory z = sample_trajectory(x2.eq, [](double) { return 0.0; }, 0.0, 6.0, 1e-2);
    const std::vector<double> zeros = find_zeros(z);
    REQUIRE(zeros.size() == 1);
    CHECK(zeros[0] == Catch::Approx(0.5 * (z.t_start() + 6.0)).margin(1e-9));
    const OscillationReport r = classify(x2.eq, z);
    CHECK_FALSE(r.oscillatory);
}

TEST_CASE("measure_ell never counts censored segments") {
    // zeros at 1 and 2 only; a long positive tail afterwards would dominate
    // the mass if the trailing censored segment were counted.
    const NamedExample x2 = make_xs(2.0);
    auto shape = [](double t) {
        if (t < 2.0) return std::sin(3.14159265358979323846 * t);
        return 0.5 + (t - 2.0);
    };
    const Trajectory x = sample_trajectory(x2.eq, shape, 0.0, 4.5, 1e-3);
    const double ell = measure_ell(x, x2.eq, x2.eq.t1());
    CHECK(ell == Catch::Approx(1.0).margin(5e-3)); // interior (1,2) only
}

TEST_CASE("measure_ell needs two interior zeros") {
    const NamedExample x2 = make_xs(2.0);
    const Trajectory flat = sample_trajectory(x2.eq, [](double) { return 1.0; }, 0.0, 6.0, 1e-2);
    CHECK_THROWS_AS(measure_ell(flat, x2.eq, x2.eq.t1()), TooFewZeros);
}

TEST_CASE("sup_delay_integral exact values") {
    for (double s : {1.0, 1.125, 1.5, 2.0}) {
        const NamedExample x = make_xs(s);
        CHECK(sup_delay_integral(x.eq, x.eq.rho() + 3.0 * x.period) ==
              Catch::Approx(s).margin(1e-9));
        const NamedExample y = make_ys(s);
        CHECK(sup_delay_integral(y.eq, y.eq.rho() + 3.0 * y.period) ==
              Catch::Approx(s + lambda_of(s)).margin(1e-9));
    }
    const Equation unit(
        PiecewiseFn::coefficient({Piece::constant(0.0, 1.0, 1.0)}, Extension::periodic),
        PiecewiseFn::delay({Piece::affine(0.0, 1.0, 1.0, -1.0)}, Extension::affine_periodic));
    CHECK(sup_delay_integral(unit, unit.rho() + 3.0) == Catch::Approx(1.0).margin(1e-9));
    CHECK_THROWS_AS(sup_delay_integral(unit, unit.rho() - 1.0), OutOfDomain);
}

TEST_CASE("classify on the integrated s=2 example") {
    const NamedExample ex = make_xs(2.0);
    const double h = 1e-3;
    const Trajectory x = integrate(ex.eq, exact_history(ex, h), 6.0 * ex.period, h);
    const OscillationReport r = classify(ex.eq, x);
    const double tol = 4.0 * h;
    CHECK(r.oscillatory);
    REQUIRE(r.ell_measured.has_value());
    CHECK(*r.ell_measured == Catch::Approx(2.0).margin(tol));
    CHECK(r.sup_delay_integral == Catch::Approx(2.0).margin(tol));
    CHECK(r.tau_max == Catch::Approx(2.0).margin(tol));
}

TEST_CASE("classify the monotone regime") {
    const Equation eq(
        PiecewiseFn::coefficient({Piece::constant(0.0, 1.0, 0.3)}, Extension::periodic),
        PiecewiseFn::delay({Piece::affine(0.0, 1.0, 1.0, -1.0)}, Extension::affine_periodic));
    const double t0 = eq.rho();
    const Trajectory x =
        integrate(eq, History::constant(1.0, eq.tau().tau_min(t0), t0), t0 + 10.0, 1e-3);
    const OscillationReport r = classify(eq, x);
    CHECK_FALSE(r.oscillatory);
    CHECK(eq.c().integral_diverges());
    for (std::size_t i = 1; i < x.values.size(); ++i) CHECK(x.values[i] > 0.0);
}

TEST_CASE("certificate ladder: nonnegative coefficient") {
    Features f;
    f.sign_of_c = CoeffSign::nonneg;
    f.sup_int = 1.4;
    Certificate c = certify(f);
    CHECK(c.theorem == CertTheorem::t2352_to_zero);
    CHECK(c.factor == Catch::Approx(0.9).margin(1e-12));

    f.sup_int = 1.5;
    c = certify(f);
    CHECK(c.theorem == CertTheorem::t2352_bounded);
    CHECK(c.factor == Catch::Approx(1.0).margin(1e-12));

    f.sup_int = 0.5; // q = max(sup, 1) = 1
    c = certify(f);
    CHECK(c.factor == Catch::Approx(0.5).margin(1e-12));

    // past 3/2 with no ell: only the nonoscillatory branch survives
    f.sup_int = 2.0;
    f.divergent_integral = true;
    c = certify(f);
    CHECK(c.theorem == CertTheorem::t2353_to_zero);
    f.divergent_integral = false;
    c = certify(f);
    CHECK(c.theorem == CertTheorem::t2353_monotone);
}

TEST_CASE("certificate ladder: nonpositive coefficient pins ell") {
    Features f;
    f.sign_of_c = CoeffSign::nonpos;
    f.sup_int = 1.2;
    const Certificate c = certify(f);
    CHECK(c.theorem == CertTheorem::t2056_to_zero);
    CHECK(c.factor < 1.0);
    CHECK(c.factor > 0.4);

    // declared ell above the speed bound is contradictory
    f.ell = 2.0;
    CHECK_THROWS_AS(certify(f), InconsistentFeatures);
}

TEST_CASE("certificate ladder: mixed sign with known ell") {
    Features f;
    f.sign_of_c = CoeffSign::mixed;
    f.sup_int = 3.0;
    f.ell = 1.0;
    Certificate c = certify(f);
    CHECK(c.theorem == CertTheorem::t2055_to_zero);
    CHECK(c.factor == Catch::Approx(2.0 / 3.0).margin(1e-12));

    f.ell = 2.5;
    c = certify(f);
    CHECK(c.theorem == CertTheorem::none);
    CHECK(c.verdict.find("ell - 2 = 0.5") != std::string::npos);

    f.ell.reset();
    c = certify(f);
    CHECK(c.theorem == CertTheorem::none);

    // sup within the Lambda region: the scanned s certificate applies
    f.sup_int = 1.3;
    f.ell = 1.7;
    c = certify(f);
    CHECK(c.theorem == CertTheorem::t2056_to_zero);
    CHECK(c.factor < 1.0);
}

TEST_CASE("fixed s choice is honored") {
    Features f;
    f.sign_of_c = CoeffSign::mixed;
    f.sup_int = 2.0;
    f.ell = 1.5;
    f.s_choice = 2.0;
    const Certificate c = certify(f);
    CHECK(c.theorem == CertTheorem::t2056_to_zero);
    // psi_2 is the identity: the factor equals alpha = 0.75
    CHECK(c.factor == Catch::Approx(0.75).margin(1e-10));
}

TEST_CASE("scanned s never loses to a fixed feasible s") {
    Features base;
    base.sign_of_c = CoeffSign::mixed;
    base.sup_int = 1.1;
    base.ell = 1.4;
    const Certificate scanned = certify(base);
    for (double s : {1.2, 1.5, 1.8, 2.0}) {
        Features fixed = base;
        fixed.s_choice = s;
        CHECK(scanned.factor <= certify(fixed).factor + 1e-9);
    }
}

TEST_CASE("sharpness: the x_s family is certified bounded, never to-zero") {
    for (double s : {1.125, 2.0}) {
        Features f;
        f.sign_of_c = CoeffSign::mixed;
        f.sup_int = s;
        f.ell = lambda_of(s);
        const Certificate c = certify(f);
        CHECK(std::abs(c.factor - 1.0) <= 1e-10);
        CHECK((c.theorem == CertTheorem::t2056_bounded ||
               c.theorem == CertTheorem::t2055_bounded));
    }
}

TEST_CASE("exponential constants attach when C and D are provided") {
    Features f;
    f.sign_of_c = CoeffSign::nonpos;
    f.sup_int = 1.0;
    f.C = 2.0;
    f.D = 0.5;
    const Certificate c = certify(f);
    REQUIRE(c.theorem == CertTheorem::t1914_exponential);
    REQUIRE(c.constants.has_value());
    const DecayConstants& k = *c.constants;
    CHECK(k.d == Catch::Approx(c.factor).margin(1e-15));
    CHECK(k.beta == static_cast<int>(std::floor(1.0 / 0.5)) + 1);
    CHECK(k.M == Catch::Approx(1.0 / k.d).margin(1e-12));
    CHECK(k.delta == Catch::Approx(2.0 * k.beta + 3.0).margin(1e-12));
    CHECK(k.gamma == Catch::Approx(-std::log(k.d) / k.delta).margin(1e-12));
}

TEST_CASE("verify_exponential accepts decay and rejects periodic solutions") {
    // a contracting nonnegative-coefficient instance with measured ell
    std::mt19937_64 rng(99);
    RandomEqOptions opt;
    opt.sign = CoeffSign::nonneg;
    opt.sup_lo = 1.0;
    opt.sup_hi = 1.0;
    const double h = 1e-3;
    const RandomInstance inst = make_random_instance(rng, opt, h);
    const Trajectory probe = integrate(inst.eq, inst.history, inst.history.t0() + 15.0, h);
    const OscillationReport rep = classify(inst.eq, probe);
    REQUIRE(rep.ell_measured.has_value());
    const Condition2308 cd = measure_condition_2308(inst.eq);
    REQUIRE(cd.valid);
    const Features f = features_of(inst.eq, rep, h, cd.C, cd.D);
    const Certificate cert = certify(f);
    REQUIRE(cert.theorem == CertTheorem::t1914_exponential);
    const Trajectory x =
        integrate(inst.eq, inst.history, inst.eq.t1() + 3.0 * cert.constants->delta, h);
    const ExpBoundCheck ok = verify_exponential(x, *cert.constants, inst.eq.t1());
    CHECK(ok.pass);

    // the periodic x_2 fails against any positive decay rate
    const NamedExample ex = make_xs(2.0);
    const Trajectory px = integrate(ex.eq, exact_history(ex, h), 8.0 * ex.period, h);
    DecayConstants fake;
    fake.d = 0.9;
    fake.M = 1.0 / 0.9;
    fake.delta = ex.period;
    fake.gamma = 0.2;
    const ExpBoundCheck bad = verify_exponential(px, fake, ex.eq.t1());
    CHECK_FALSE(bad.pass);

    // the zero solution passes trivially
    const Trajectory z = sample_trajectory(ex.eq, [](double) { return 0.0; }, 0.0, 10.0, 1e-2);
    CHECK(verify_exponential(z, fake, ex.eq.t1()).pass);

    CHECK_THROWS_AS(verify_exponential(z, fake, 9.0), WindowTooShort);
}

TEST_CASE("speed bound and cascade on a few random instances") {
    std::mt19937_64 rng(1234);
    RandomEqOptions nn;
    nn.sign = CoeffSign::nonneg;
    nn.sup_lo = 0.6;
    nn.sup_hi = 1.3;
    const double h = 2e-3;
    int realized = 0;
    for (int i = 0; i < 6; ++i) {
        const RandomInstance inst = make_random_instance(rng, nn, h);
        const Trajectory x = integrate(inst.eq, inst.history, inst.history.t0() + 25.0, h);
        const CascadeCheck c = check_cascade_bound(inst.eq, x, inst.sup_int);
        CHECK(c.ok);
        realized += c.steps;
    }
    CHECK(realized > 0);

    RandomEqOptions np;
    np.sign = CoeffSign::nonpos;
    np.sup_lo = 0.6;
    np.sup_hi = 1.3;
    int applicable = 0;
    for (int i = 0; i < 6; ++i) {
        const RandomInstance inst = make_random_instance(rng, np, 1e-3);
        const Trajectory x = integrate(inst.eq, inst.history, inst.history.t0() + 12.0, 1e-3);
        const SpeedBoundCheck c = check_speed_bound(inst.eq, x, inst.sup_int, 1e-3);
        if (c.applicable) {
            ++applicable;
            CHECK(c.ok);
        }
    }
    CHECK(applicable > 0);
}

TEST_CASE("classify is deterministic") {
    const NamedExample ex = make_ys(1.5);
    auto run = [&] {
        const Trajectory x = integrate(ex.eq, exact_history(ex, 2e-3), 4.0 * ex.period, 2e-3);
        const OscillationReport r = classify(ex.eq, x);
        return r;
    };
    const OscillationReport a = run();
    const OscillationReport b = run();
    REQUIRE(a.zeros.size() == b.zeros.size());
    for (std::size_t i = 0; i < a.zeros.size(); ++i) CHECK(a.zeros[i] == b.zeros[i]);
    CHECK(a.sup_delay_integral == b.sup_delay_integral);
    CHECK(a.tau_max == b.tau_max);
    REQUIRE(a.ell_measured.has_value());
    REQUIRE(b.ell_measured.has_value());
    CHECK(*a.ell_measured == *b.ell_measured);
}
