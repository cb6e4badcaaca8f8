#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "delayosc/errors.hpp"
#include "delayosc/lambda.hpp"
#include "delayosc/piecewise.hpp"

namespace delayosc {

/// Exact characteristics of a limit-case example.
struct ExpectedMeasures {
    double sup_int = 0.0;
    double ell = 0.0;
    double tau_max = 0.0;
};

/// A limit-case periodic solution together with the equation it solves.
/// `solution` is an exact analytic evaluator (including the exponential
/// branch); only the coefficient and delay are piecewise representations.
struct NamedExample {
    std::string name;
    std::optional<double> s;
    Equation eq;
    std::function<double(double)> solution;
    double period = 0.0; // full period of the solution pattern
    ExpectedMeasures expected;
};

namespace detail {

inline double wrap(double t, double period) {
    double m = std::fmod(t, period);
    if (m < 0.0) m += period;
    if (m >= period) m -= period;
    return m;
}

/// One-period shape shared by x_s and |y_s|: psi_s up to Lambda(s)-1, then a
/// unit descent back to zero.
inline double xs_base(double s, double lam1, double r) {
    if (r <= lam1) return psi_closed(s, std::min(r, lam1));
    return 1.0 - (r - lam1);
}

} // namespace detail

/// The sup-integral-s, Lambda(s)-rapidly oscillating periodic solution.
/// Nonnegative, touching zero once per period; the witness that the Lambda
/// threshold admits no decay.
inline NamedExample make_xs(double s) {
    const double lam = lambda_of(s);
    const double lam1 = lam - 1.0;
    const double r = std::sqrt(2.0 * s);
    const double k1 = s - 1.0;
    const double k2 = (1.0 + s) - r;

    std::vector<Piece> cp;
    cp.push_back(Piece::constant(0.0, lam1, -1.0));
    cp.push_back(Piece::constant(lam1, lam, 1.0));

    std::vector<Piece> tp;
    if (k1 > kBreakpointTol) tp.push_back(Piece::constant(0.0, k1, -1.0));
    if (k2 - k1 > kBreakpointTol) tp.push_back(Piece::affine(k1, k2, 1.0, -s));
    if (lam1 - k2 > kBreakpointTol) tp.push_back(Piece::affine(k2, lam1, 1.0, 0.0));
    tp.push_back(Piece::constant(lam1, lam, lam1));

    NamedExample ex{
        "x_s",
        s,
        Equation(PiecewiseFn::coefficient(std::move(cp), Extension::periodic),
                 PiecewiseFn::delay(std::move(tp), Extension::affine_periodic)),
        [s, lam, lam1](double t) { return detail::xs_base(s, lam1, detail::wrap(t, lam)); },
        lam,
        {s, lam, s}};
    return ex;
}

/// The nonpositive-coefficient antiperiodic variant: |y_s| = x_s pointwise,
/// the sign flips each period, and the delay reaches one period further back,
/// so tau_max = sigma(s) = s + Lambda(s).
inline NamedExample make_ys(double s) {
    const double lam = lambda_of(s);
    const double lam1 = lam - 1.0;
    const double r = std::sqrt(2.0 * s);
    const double k1 = s - 1.0;
    const double k2 = (1.0 + s) - r;

    std::vector<Piece> cp;
    cp.push_back(Piece::constant(0.0, lam, -1.0));

    std::vector<Piece> tp;
    if (k1 > kBreakpointTol) tp.push_back(Piece::constant(0.0, k1, -1.0 - lam));
    if (k2 - k1 > kBreakpointTol) tp.push_back(Piece::affine(k1, k2, 1.0, -s - lam));
    if (lam1 - k2 > kBreakpointTol) tp.push_back(Piece::affine(k2, lam1, 1.0, 0.0));
    tp.push_back(Piece::constant(lam1, lam, -1.0));

    NamedExample ex{
        "y_s",
        s,
        Equation(PiecewiseFn::coefficient(std::move(cp), Extension::periodic),
                 PiecewiseFn::delay(std::move(tp), Extension::affine_periodic)),
        [s, lam, lam1](double t) {
            const double m = detail::wrap(t, 2.0 * lam);
            return m < lam ? detail::xs_base(s, lam1, m) : -detail::xs_base(s, lam1, m - lam);
        },
        2.0 * lam,
        {s + lam, lam, sigma_of(s)}};
    return ex;
}

/// Myshkis' periodic solution at the 3/2 boundary: 0 <= c <= 1, tau_max = 3/2,
/// antiperiodic with half-period 5/2.
inline NamedExample make_myshkis_f() {
    std::vector<Piece> cp;
    cp.push_back(Piece::constant(0.0, 2.5, 1.0));

    std::vector<Piece> tp;
    tp.push_back(Piece::constant(0.0, 1.5, 0.0));
    tp.push_back(Piece::affine(1.5, 2.5, 1.0, -1.5));

    auto base = [](double r) {
        if (r <= 1.5) return 1.0 - r;
        const double v = r - 1.5;
        return -0.5 - (v - 0.5 * v * v);
    };
    NamedExample ex{
        "myshkis_f",
        std::nullopt,
        Equation(PiecewiseFn::coefficient(std::move(cp), Extension::periodic),
                 PiecewiseFn::delay(std::move(tp), Extension::affine_periodic)),
        [base](double t) {
            const double m = detail::wrap(t, 5.0);
            return m < 2.5 ? base(m) : -base(m - 2.5);
        },
        5.0,
        {1.5, 2.5, 1.5}};
    return ex;
}

/// Lillo's periodic solution at the 2.75 + ln 2 boundary: -1 <= c <= 0,
/// tau_max = 2.75 + ln 2, antiperiodic with half-period 13/8 + ln 2. It is a
/// time shift of y_{9/8}.
inline NamedExample make_lillo_g() {
    const double p = 1.625 + std::log(2.0); // 13/8 + ln 2 = Lambda(9/8)

    std::vector<Piece> cp;
    cp.push_back(Piece::constant(0.0, p, -1.0));

    std::vector<Piece> tp;
    tp.push_back(Piece::constant(0.0, 1.125, -p));
    tp.push_back(Piece::affine(1.125, 1.625, 1.0, -1.125 - p));
    tp.push_back(Piece::affine(1.625, p, 1.0, 0.0));

    auto base = [](double r) {
        if (r <= 1.125) return 1.0 - r;
        if (r <= 1.625) {
            const double v = r - 1.125;
            return -0.125 - (v - 0.5 * v * v);
        }
        return -0.5 * std::exp(r - 1.625);
    };
    NamedExample ex{
        "lillo_g",
        std::nullopt,
        Equation(PiecewiseFn::coefficient(std::move(cp), Extension::periodic),
                 PiecewiseFn::delay(std::move(tp), Extension::affine_periodic)),
        [base, p](double t) {
            const double m = detail::wrap(t, 2.0 * p);
            return m < p ? base(m) : -base(m - p);
        },
        2.0 * p,
        {2.75 + std::log(2.0), p, 2.75 + std::log(2.0)}};
    return ex;
}

/// Max deviation of g(t+1) from y_{9/8}(t + ln2 + 13/8) over a uniform grid
/// spanning two full periods. Analytically zero.
inline double check_g_ys_identity(int grid_points) {
    if (grid_points < 2) throw DomainError("need at least two grid points");
    const NamedExample g = make_lillo_g();
    const NamedExample y = make_ys(1.125);
    const double shift = std::log(2.0) + 1.625;
    const double span = 2.0 * g.period;
    double worst = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double t = span * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        worst = std::max(worst, std::abs(g.solution(t + 1.0) - y.solution(t + shift)));
    }
    return worst;
}

inline NamedExample make_named_example(const std::string& name, double s = 1.125) {
    if (name == "xs" || name == "x_s") return make_xs(s);
    if (name == "ys" || name == "y_s") return make_ys(s);
    if (name == "f" || name == "myshkis_f") return make_myshkis_f();
    if (name == "g" || name == "lillo_g") return make_lillo_g();
    throw DomainError("unknown example '" + name + "' (expected xs, ys, f or g)");
}

} // namespace delayosc
