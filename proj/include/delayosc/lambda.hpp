#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "delayosc/errors.hpp"

namespace delayosc {

namespace detail {

inline void check_s(double s) {
    if (!(s >= 1.0 - 1e-12 && s <= 2.0 + 1e-12))
        throw DomainError("s must lie in [1, 2]");
}

} // namespace detail

/// Lambda(s) = 2 + s - sqrt(2s) - ln(sqrt(2s) - 1), strictly decreasing on [1, 2].
inline double lambda_of(double s) {
    detail::check_s(s);
    const double r = std::sqrt(2.0 * s);
    return 2.0 + s - r - std::log(r - 1.0);
}

/// sigma(s) = Lambda(s) + s; decreasing on [1, 9/8), increasing on (9/8, 2].
inline double sigma_of(double s) {
    return lambda_of(s) + s;
}

struct SigmaMin {
    double s_star = 0.0;
    double sigma_star = 0.0;
};

/// Global minimum of sigma over [1, 2]: golden-section search down to a 1e-6
/// bracket, then bisection on the sign of a wide-stencil symmetric difference.
/// Function values alone cannot localize the flat minimum past the roundoff
/// plateau (about 2e-8 wide), but the stencil difference keeps a reliable sign
/// down to ~1e-11. Cross-checked against the closed forms 9/8 and 2.75 + ln 2.
inline SigmaMin sigma_argmin() {
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 1.0, b = 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = sigma_of(c);
    double fd = sigma_of(d);
    while (b - a > 1e-6) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = sigma_of(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = sigma_of(d);
        }
    }
    const double stencil = 1e-5;
    auto slope = [&](double s) { return sigma_of(s + stencil) - sigma_of(s - stencil); };
    double lo = std::max(1.0 + stencil, a - 1e-3);
    double hi = std::min(2.0 - stencil, b + 1e-3);
    if (slope(lo) < 0.0 && slope(hi) > 0.0) {
        for (int i = 0; i < 120 && hi - lo > 1e-11; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (slope(mid) > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        a = lo;
        b = hi;
    }
    SigmaMin m;
    m.s_star = 0.5 * (a + b);
    m.sigma_star = sigma_of(m.s_star);
    if (std::abs(m.s_star - 1.125) > 1e-9 ||
        std::abs(m.sigma_star - (2.75 + std::log(2.0))) > 1e-12)
        throw Error("sigma_argmin drifted from the closed-form minimum");
    return m;
}

/// Knots and knot values of the extremal profile psi_s. The three branches of
/// psi_s meet at t = s-1 and t = (1+s)-sqrt(2s) and end at t = Lambda(s)-1,
/// with values s-1, sqrt(2s)-1 and exactly 1. For s = 2 everything collapses
/// onto [0, 1] with psi(t) = t.
struct PsiProfile {
    double s = 0.0;
    std::array<double, 3> knots{};
    std::array<double, 3> values{};
};

inline PsiProfile psi_profile(double s) {
    detail::check_s(s);
    PsiProfile p;
    p.s = s;
    const double r = std::sqrt(2.0 * s);
    p.knots = {s - 1.0, (1.0 + s) - r, lambda_of(s) - 1.0};
    p.values = {s - 1.0, r - 1.0, 1.0};
    return p;
}

/// Closed-form evaluation of psi_s on [0, Lambda(s)-1]:
/// identity up to s-1, the expanded quadratic up to (1+s)-sqrt(2s), then the
/// exponential branch (sqrt(2s)-1) exp(t - (1+s) + sqrt(2s)).
inline double psi_closed(double s, double t) {
    detail::check_s(s);
    const double r = std::sqrt(2.0 * s);
    const double k1 = s - 1.0;
    const double k2 = (1.0 + s) - r;
    const double lam1 = lambda_of(s) - 1.0;
    if (t < -1e-12 || t > lam1 + 1e-12)
        throw DomainError("psi argument outside [0, Lambda(s)-1]");
    if (t <= k1) return t;
    if (t <= k2) return k1 + (s * (t - k1) - 0.5 * (t * t - k1 * k1));
    return (r - 1.0) * std::exp(t - k2);
}

/// Values of the n-th Picard iterate of psi_s on a uniform grid over
/// [0, Lambda(s)-1] ((panels+1) points), computed by cumulative trapezoids of
/// iota' = min{1, max(s-u, iota(u))}. Monotone nondecreasing in n.
inline std::vector<double> psi_picard_grid(double s, int n, std::size_t panels = 4096) {
    detail::check_s(s);
    if (n < 0) throw DomainError("iteration count must be >= 0");
    if (panels < 4096) panels = 4096;
    const double lam1 = lambda_of(s) - 1.0;
    const double h = lam1 / static_cast<double>(panels);
    std::vector<double> v(panels + 1, 0.0);
    std::vector<double> w(panels + 1, 0.0);
    for (int it = 0; it < n; ++it) {
        w[0] = 0.0;
        double gprev = std::min(1.0, std::max(s, v[0]));
        for (std::size_t j = 1; j <= panels; ++j) {
            const double u = lam1 * (static_cast<double>(j) / static_cast<double>(panels));
            const double g = std::min(1.0, std::max(s - u, v[j]));
            w[j] = w[j - 1] + 0.5 * h * (gprev + g);
            gprev = g;
        }
        v.swap(w);
    }
    return v;
}

/// n-th Picard iterate of psi_s at one point (linear interpolation on the grid).
inline double psi_picard(double s, double t, int n, std::size_t panels = 4096) {
    const double lam1 = lambda_of(s) - 1.0;
    if (t < -1e-12 || t > lam1 + 1e-12)
        throw DomainError("psi argument outside [0, Lambda(s)-1]");
    const std::vector<double> v = psi_picard_grid(s, n, panels);
    const std::size_t np = v.size() - 1;
    const double x = std::clamp(t / lam1, 0.0, 1.0) * static_cast<double>(np);
    const std::size_t j = std::min(static_cast<std::size_t>(x), np - 1);
    const double w = x - static_cast<double>(j);
    return v[j] * (1.0 - w) + v[j + 1] * w;
}

namespace detail {

// The theorems assume ell > Lambda(s)-1 without loss of generality; smaller
// ell is raised just above the knee before solving for alpha.
inline double lifted_ell(double s, double ell) {
    const double lam1 = lambda_of(s) - 1.0;
    return ell <= lam1 ? lam1 + 1e-9 : ell;
}

} // namespace detail

/// Root alpha of alpha - psi_s(ell - alpha) = 0 on [1 + ell - Lambda(s), 1],
/// by bisection to 1e-12. Returns 1 exactly when ell = Lambda(s).
inline double alpha_root(double s, double ell) {
    detail::check_s(s);
    const double lam = lambda_of(s);
    if (ell < 0.0 || ell > lam + 1e-12)
        throw DomainError("ell must lie in [0, Lambda(s)]");
    if (ell >= lam - 1e-15) return 1.0;
    const double l = detail::lifted_ell(s, ell);
    auto j = [&](double a) { return a - psi_closed(s, l - a); };
    double lo = 1.0 + l - lam;
    double hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (j(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Which contraction statement a decay factor is requested for.
enum class DecayTheorem { t2352, t2055, t2056 };

/// Per-cascade-step contraction factor of the named statement:
///   t2352: q - 1/2 with q = max(sup_int, 1), requires sup_int <= 3/2;
///   t2055: min over q in (ell, 2) of max{q-1, 1-(q-ell)/2}, i.e. (1+ell)/3 at
///          q* = (4+ell)/3; requires ell <= 2 (factor 1 at ell = 2);
///   t2056: psi_s(ell - alpha) with alpha the fixed point; requires
///          sup_int <= s and ell <= Lambda(s).
/// A factor of 1 certifies boundedness only; below 1, convergence to zero.
inline double decay_factor(DecayTheorem theorem, double sup_int, double ell, double s) {
    std::ostringstream os;
    switch (theorem) {
    case DecayTheorem::t2352: {
        if (sup_int > 1.5 + 1e-12) {
            os << "sup integral " << sup_int << " exceeds 3/2";
            throw HypothesisViolated(os.str());
        }
        const double q = std::max(sup_int, 1.0);
        return q - 0.5;
    }
    case DecayTheorem::t2055: {
        if (ell > 2.0 + 1e-12) {
            os << "ell " << ell << " exceeds 2";
            throw HypothesisViolated(os.str());
        }
        if (ell >= 2.0 - 1e-15) return 1.0;
        double qstar = (4.0 + ell) / 3.0;
        qstar = std::clamp(qstar, std::nextafter(ell, 2.0), std::nextafter(2.0, ell));
        return std::max(qstar - 1.0, 1.0 - 0.5 * (qstar - ell));
    }
    case DecayTheorem::t2056: {
        detail::check_s(s);
        if (sup_int > s + 1e-12) {
            os << "sup integral " << sup_int << " exceeds s = " << s;
            throw HypothesisViolated(os.str());
        }
        const double lam = lambda_of(s);
        if (ell > lam + 1e-12) {
            os << "ell " << ell << " exceeds Lambda(s) = " << lam;
            throw HypothesisViolated(os.str());
        }
        const double a = alpha_root(s, ell);
        if (ell >= lam - 1e-15) return psi_closed(s, lam - 1.0);
        const double l = detail::lifted_ell(s, ell);
        return psi_closed(s, l - a);
    }
    }
    throw DomainError("unknown theorem");
}

/// Exponential-decay certificate data: per-step contraction d over windows of
/// length delta gives |x(t)| <= M sup_{[t1,t1+delta]}|x| exp(-gamma (t-t1)).
struct DecayConstants {
    double d = 1.0;
    double q = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    int beta = 0;
    double M = 1.0;
    double gamma = 0.0;
    double delta = 0.0;
};

/// beta = floor(ell/D) + 1, delta = C beta + C + 1, M = 1/d, gamma = -ln(d)/delta.
inline DecayConstants exp_decay_constants(double d, double C, double D, double ell) {
    if (!(d > 0.0 && d < 1.0)) throw DomainError("contraction factor d must lie in (0,1)");
    if (!(C > 0.0) || !(D > 0.0)) throw DomainError("C and D must be positive");
    if (ell < 0.0) throw DomainError("ell must be nonnegative");
    DecayConstants k;
    k.d = d;
    k.beta = static_cast<int>(std::floor(ell / D)) + 1;
    k.delta = C * k.beta + C + 1.0;
    k.M = 1.0 / d;
    k.gamma = -std::log(d) / k.delta;
    return k;
}

} // namespace delayosc
