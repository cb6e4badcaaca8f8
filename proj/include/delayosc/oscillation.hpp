#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "delayosc/errors.hpp"
#include "delayosc/integrate.hpp"
#include "delayosc/lambda.hpp"
#include "delayosc/piecewise.hpp"

namespace delayosc {

/// Maximal zero-free interval of a trajectory with its coefficient mass.
struct SignSegment {
    double a = 0.0;
    double b = 0.0;
    int sign = 0;
    double mass = 0.0;
    /// Leading/trailing segments abut the window edge; their true extent is
    /// unknown, so they never count toward the measured ell.
    bool censored = false;
};

struct OscillationReport {
    std::vector<double> zeros;
    std::vector<SignSegment> segments;
    std::optional<double> ell_measured;
    double sup_delay_integral = 0.0;
    double tau_max = 0.0;
    double window_t1 = 0.0;
    double window_end = 0.0;
    bool oscillatory = false;
};

/// Zero locations of a sampled trajectory. Sign changes between consecutive
/// samples are placed by linear interpolation; samples within
/// eps_zero * (running max |x|) open a zero cluster reported at its midpoint;
/// events closer than eps_t merge to their midpoint. eps_t <= 0 means one step.
inline std::vector<double> find_zeros(const Trajectory& x, double eps_zero = 1e-9,
                                      double eps_t = -1.0) {
    if (eps_t <= 0.0) eps_t = x.step;
    if (!(eps_zero > 0.0)) throw DomainError("eps_zero must be positive");
    const std::size_t n = x.grid.size();
    std::vector<char> zeroish(n, 0);
    double runmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        runmax = std::max(runmax, std::abs(x.values[i]));
        zeroish[i] = std::abs(x.values[i]) <= eps_zero * runmax ? 1 : 0;
    }
    std::vector<double> events;
    std::size_t i = 0;
    while (i < n) {
        if (zeroish[i]) {
            std::size_t j = i;
            while (j + 1 < n && zeroish[j + 1]) ++j;
            events.push_back(0.5 * (x.grid[i] + x.grid[j]));
            i = j + 1;
            continue;
        }
        if (i + 1 < n && !zeroish[i + 1]) {
            const double v0 = x.values[i];
            const double v1 = x.values[i + 1];
            if ((v0 < 0.0) != (v1 < 0.0)) {
                events.push_back(x.grid[i] + v0 * (x.grid[i + 1] - x.grid[i]) / (v0 - v1));
            }
        }
        ++i;
    }
    std::vector<double> zeros;
    std::size_t k = 0;
    while (k < events.size()) {
        std::size_t j = k;
        while (j + 1 < events.size() && events[j + 1] - events[j] < eps_t) ++j;
        zeros.push_back(0.5 * (events[k] + events[j]));
        k = j + 1;
    }
    return zeros;
}

namespace detail {

inline int segment_sign(const Trajectory& x, double a, double b) {
    double best = 0.0;
    int sign = 0;
    auto lo = std::lower_bound(x.grid.begin(), x.grid.end(), a);
    for (auto it = lo; it != x.grid.end() && *it < b; ++it) {
        const double v = x.values[static_cast<std::size_t>(it - x.grid.begin())];
        if (std::abs(v) > best) {
            best = std::abs(v);
            sign = v < 0.0 ? -1 : 1;
        }
    }
    if (sign == 0) {
        const double v = x.value_at(0.5 * (a + b));
        sign = v < 0.0 ? -1 : 1;
    }
    return sign;
}

inline std::vector<SignSegment> sign_segments(const Trajectory& x, const Equation& eq, double t1,
                                              const std::vector<double>& zeros) {
    const double T = x.t_end();
    std::vector<double> bounds;
    bounds.push_back(t1);
    for (double z : zeros) {
        if (z > t1 && z < T) bounds.push_back(z);
    }
    bounds.push_back(T);
    std::vector<SignSegment> segs;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const double a = bounds[i];
        const double b = bounds[i + 1];
        if (!(b - a > 1e-12)) continue;
        SignSegment s;
        s.a = a;
        s.b = b;
        s.mass = eq.c().abs_integral(a, b);
        s.sign = segment_sign(x, a, b);
        s.censored = (i == 0) || (i + 2 == bounds.size());
        segs.push_back(s);
    }
    return segs;
}

} // namespace detail

/// Largest coefficient mass of a zero-free interval between consecutive
/// detected zeros after t1. A lower estimate of the true oscillation speed:
/// the censored leading/trailing intervals are excluded.
inline double measure_ell(const Trajectory& x, const Equation& eq, double t1) {
    const std::vector<double> zeros = find_zeros(x);
    std::size_t in_window = 0;
    for (double z : zeros)
        if (z > t1 && z < x.t_end()) ++in_window;
    if (in_window < 2) throw TooFewZeros("need at least two zeros after t1");
    const std::vector<SignSegment> segs = detail::sign_segments(x, eq, t1, zeros);
    double ell = 0.0;
    for (const SignSegment& s : segs)
        if (!s.censored) ell = std::max(ell, s.mass);
    return ell;
}

/// sup over t in [rho, T] of int_{tau(t)}^{t} |c|, evaluated exactly: the
/// window is split at delay/coefficient breakpoints and pullbacks of
/// coefficient breakpoints through the delay; on each panel the derivative of
/// the integral is affine, so the sup sits at a panel edge (either one-sided
/// limit) or at the closed-form stationary point. For a periodic equation one
/// period past rho suffices.
inline double sup_delay_integral(const Equation& eq, double T) {
    const double rho = eq.rho();
    if (!(T > rho)) throw OutOfDomain("horizon must exceed rho");
    double hi = T;
    if (eq.is_periodic()) hi = std::min(T, rho + eq.common_period());

    const PiecewiseFn& c = eq.c();
    const PiecewiseFn& tau = eq.tau();
    std::vector<double> pts = eq.breakpoints(rho, hi);
    tau.for_each_local(rho, hi, [&](const LocalPiece& lp, double lo, double hiP) {
        if (lp.slope == 0.0) return;
        const double ia = lp.at(lo);
        const double ib = lp.at(hiP);
        for (double beta : c.breakpoints(std::min(ia, ib), std::max(ia, ib))) {
            const double t = (beta - lp.intercept) / lp.slope;
            if (t > lo && t < hiP) pts.push_back(t);
        }
    });
    std::sort(pts.begin(), pts.end());

    auto F_at = [&](double tauval, double t) { return c.abs_integral(tauval, t); };
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double p = pts[i];
        const double q = pts[i + 1];
        if (!(q - p > 1e-13)) continue;
        const double mid = 0.5 * (p + q);
        const LocalPiece tl = tau.resolve(mid);
        // Right limit at p and left limit at q, both through this panel's
        // delay formula (tau may jump at panel edges).
        best = std::max(best, F_at(tl.at(p), p));
        best = std::max(best, F_at(tl.at(q), q));
        // F'(t) = |c(t)| - tau'(t) |c(tau(t))| is affine on the open panel.
        const LocalPiece ct = c.resolve(mid);
        const LocalPiece ctau = c.resolve(tl.at(mid));
        const double s1 = c.eval(mid) < 0.0 ? -1.0 : 1.0;
        const double s2 = c.eval(tl.at(mid)) < 0.0 ? -1.0 : 1.0;
        const double A = s1 * ct.slope - tl.slope * tl.slope * s2 * ctau.slope;
        const double B = s1 * ct.intercept - tl.slope * s2 * (ctau.slope * tl.intercept + ctau.intercept);
        if (A != 0.0) {
            const double tstar = -B / A;
            if (tstar > p && tstar < q) best = std::max(best, F_at(tl.at(tstar), tstar));
        }
    }
    return best;
}

/// Full oscillation picture of a trajectory over [t1, T].
inline OscillationReport classify(const Equation& eq, const Trajectory& x,
                                  double eps_zero = 1e-9, double eps_t = -1.0) {
    if (eps_t <= 0.0) eps_t = x.step;
    OscillationReport r;
    r.window_t1 = eq.t1();
    r.window_end = x.t_end();
    r.zeros = find_zeros(x, eps_zero, eps_t);
    r.segments = detail::sign_segments(x, eq, r.window_t1, r.zeros);
    std::size_t in_window = 0;
    double last_zero = -std::numeric_limits<double>::infinity();
    for (double z : r.zeros) {
        if (z > r.window_t1 && z < r.window_end) {
            ++in_window;
            last_zero = z;
        }
    }
    if (in_window >= 2) {
        double ell = 0.0;
        for (const SignSegment& s : r.segments)
            if (!s.censored) ell = std::max(ell, s.mass);
        r.ell_measured = ell;
    }
    r.sup_delay_integral = sup_delay_integral(eq, r.window_end);
    const double rho = eq.rho();
    const double lag_end = eq.is_periodic() ? std::min(r.window_end, rho + eq.common_period())
                                            : r.window_end;
    r.tau_max = eq.tau().sup_lag(rho, lag_end);
    r.oscillatory = in_window >= 2 && last_zero < r.window_end - eps_t;
    return r;
}

enum class CoeffSign { nonneg, nonpos, mixed };

inline CoeffSign coefficient_sign(const PiecewiseFn& c) {
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    for (const Piece& p : c.pieces()) {
        const double va = p.eff_slope() * p.start + p.eff_intercept();
        const double vb = p.eff_slope() * p.end + p.eff_intercept();
        vmin = std::min(vmin, std::min(va, vb));
        vmax = std::max(vmax, std::max(va, vb));
    }
    if (vmin >= -1e-15) return CoeffSign::nonneg;
    if (vmax <= 1e-15) return CoeffSign::nonpos;
    return CoeffSign::mixed;
}

inline const char* to_string(CoeffSign s) {
    switch (s) {
    case CoeffSign::nonneg: return "nonneg";
    case CoeffSign::nonpos: return "nonpos";
    default: return "mixed";
    }
}

enum class CertTheorem {
    t2352_bounded,
    t2352_to_zero,
    t2353_monotone,
    t2353_to_zero,
    t2054_speed_bound,
    t2055_bounded,
    t2055_to_zero,
    t2056_bounded,
    t2056_to_zero,
    t1914_exponential,
    none
};

inline const char* to_string(CertTheorem t) {
    switch (t) {
    case CertTheorem::t2352_bounded: return "T2352_bounded";
    case CertTheorem::t2352_to_zero: return "T2352_to_zero";
    case CertTheorem::t2353_monotone: return "T2353_monotone";
    case CertTheorem::t2353_to_zero: return "T2353_to_zero";
    case CertTheorem::t2054_speed_bound: return "T2054_speed_bound";
    case CertTheorem::t2055_bounded: return "T2055_bounded";
    case CertTheorem::t2055_to_zero: return "T2055_to_zero";
    case CertTheorem::t2056_bounded: return "T2056_bounded";
    case CertTheorem::t2056_to_zero: return "T2056_to_zero";
    case CertTheorem::t1914_exponential: return "T1914_exponential";
    default: return "none";
    }
}

struct HypothesisCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool satisfied = false;
};

struct Certificate {
    CertTheorem theorem = CertTheorem::none;
    std::vector<HypothesisCheck> measured;
    std::optional<DecayConstants> constants;
    /// Contraction per cascade step; 1 means bounded only.
    double factor = 1.0;
    std::string verdict;
};

struct Features {
    CoeffSign sign_of_c = CoeffSign::mixed;
    double sup_int = 0.0;
    std::optional<double> ell;
    std::optional<double> s_choice; // empty = automatic scan
    std::optional<double> C;        // |t - tau_min^2(t)| <= C
    std::optional<double> D;        // int over [tau_min^2(t), t] of |c| >= D
    bool divergent_integral = false;
};

namespace detail {

/// Largest s in [1,2] with Lambda(s) >= ell (Lambda is decreasing).
inline double lambda_inverse_floor(double ell) {
    if (ell <= lambda_of(2.0)) return 2.0;
    if (ell >= lambda_of(1.0)) return 1.0;
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (lambda_of(mid) >= ell)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

/// s minimizing the t2056 factor subject to sup_int <= s <= 2, ell <= Lambda(s):
/// 2000-point grid scan polished by bisection on the factor's slope sign.
inline double auto_s(double sup_int, double ell) {
    const double s_lo = std::max(1.0, sup_int);
    const double s_hi = lambda_inverse_floor(ell);
    if (s_hi < s_lo) throw HypothesisViolated("no feasible s for the given sup integral and ell");
    if (s_hi - s_lo < 1e-12) return s_lo;
    auto factor = [&](double s) { return decay_factor(DecayTheorem::t2056, sup_int, ell, s); };
    const int npts = 2000;
    double best_s = s_lo;
    double best_f = factor(s_lo);
    for (int i = 1; i <= npts; ++i) {
        const double s = s_lo + (s_hi - s_lo) * static_cast<double>(i) / npts;
        const double f = factor(s);
        if (f < best_f) {
            best_f = f;
            best_s = s;
        }
    }
    const double gridstep = (s_hi - s_lo) / npts;
    double lo = std::max(s_lo, best_s - gridstep);
    double hi = std::min(s_hi, best_s + gridstep);
    const double hstep = 1e-7;
    auto slope_positive = [&](double s) {
        const double a = std::max(s_lo, s - hstep);
        const double b = std::min(s_hi, s + hstep);
        return factor(b) - factor(a) > 0.0;
    };
    if (!slope_positive(lo) && slope_positive(hi)) {
        for (int i = 0; i < 80 && hi - lo > 1e-10; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (slope_positive(mid))
                hi = mid;
            else
                lo = mid;
        }
        const double s = 0.5 * (lo + hi);
        if (factor(s) <= best_f) return s;
    }
    return best_s;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace delayosc::detail

/// Applies the certificate ladder, strongest statement first:
///   (i)  nonnegative coefficient with sup integral <= 3/2;
///   (ii) nonpositive coefficient: the speed bound pins ell to sup integral;
///   (iii) known ell: the Lambda criterion with fixed or scanned s, else the
///         ell <= 2 criterion;
///   (iv) with C and D and a factor below 1, exponential constants attach.
/// Nonnegative coefficients always retain at least the monotone classification
/// of nonoscillatory solutions. Otherwise the result is `none` with the
/// nearest failing margin spelled out.
inline Certificate certify(const Features& f) {
    if (!std::isfinite(f.sup_int) || f.sup_int < 0.0)
        throw DomainError("sup integral must be finite and nonnegative");
    Certificate cert;
    auto note = [&](const std::string& name, double value, double threshold, bool ok) {
        cert.measured.push_back({name, value, threshold, ok});
    };

    std::optional<double> ell = f.ell;
    if (f.sign_of_c == CoeffSign::nonpos) {
        if (ell && *ell > f.sup_int + 1e-9) {
            std::ostringstream os;
            os << "ell = " << *ell << " exceeds sup integral = " << f.sup_int
               << " although a nonpositive coefficient forces ell <= sup integral";
            throw InconsistentFeatures(os.str());
        }
        if (!ell) ell = f.sup_int;
        note("speed_bound_ell", *ell, f.sup_int, true);
    }

    const double inf = std::numeric_limits<double>::infinity();
    double margin = inf;
    std::string margin_text;
    auto offer_margin = [&](const std::string& name, double excess) {
        if (excess > 0.0 && excess < margin) {
            margin = excess;
            margin_text = name + " = " + detail::fmt(excess);
        }
    };

    bool resolved = false;

    if (f.sign_of_c == CoeffSign::nonneg) {
        if (f.sup_int <= 1.5 + 1e-12) {
            const double d = decay_factor(DecayTheorem::t2352, f.sup_int, 0.0, 1.0);
            cert.factor = d;
            cert.theorem = d < 1.0 - 1e-12 ? CertTheorem::t2352_to_zero : CertTheorem::t2352_bounded;
            note("sup_int", f.sup_int, 1.5, true);
            note("q", std::max(f.sup_int, 1.0), 2.0, true);
            std::ostringstream os;
            os << "oscillatory solutions "
               << (d < 1.0 - 1e-12 ? "tend to zero (contraction " + detail::fmt(d) +
                                         " per zero cascade step)"
                                   : "are bounded (sup integral sits at 3/2)")
               << "; nonoscillatory solutions are monotone"
               << (f.divergent_integral ? " and tend to zero (divergent coefficient integral)"
                                        : " with a finite limit");
            cert.verdict = os.str();
            resolved = true;
        } else {
            offer_margin("sup_int - 3/2", f.sup_int - 1.5);
        }
    }

    if (!resolved && ell) {
        const double s_lo = std::max(1.0, f.sup_int);
        const bool feasible_2056 =
            f.s_choice ? (*f.s_choice >= 1.0 - 1e-12 && *f.s_choice <= 2.0 + 1e-12 &&
                          f.sup_int <= *f.s_choice + 1e-12 &&
                          *ell <= lambda_of(*f.s_choice) + 1e-12)
                       : (f.sup_int <= 2.0 + 1e-12 && *ell <= lambda_of(s_lo) + 1e-12);
        if (feasible_2056) {
            const double s = f.s_choice ? *f.s_choice : detail::auto_s(f.sup_int, *ell);
            const double d = decay_factor(DecayTheorem::t2056, f.sup_int, *ell, s);
            cert.factor = d;
            cert.theorem = d < 1.0 - 1e-12 ? CertTheorem::t2056_to_zero : CertTheorem::t2056_bounded;
            note("sup_int", f.sup_int, s, true);
            note("ell", *ell, lambda_of(s), true);
            note("s", s, 2.0, true);
            note("alpha", alpha_root(s, std::min(*ell, lambda_of(s))), 1.0, true);
            std::ostringstream os;
            os << "ell-rapidly oscillating solutions "
               << (d < 1.0 - 1e-12 ? "tend to zero (contraction " + detail::fmt(d) +
                                         " per zero cascade step, s = " + detail::fmt(s) + ")"
                                   : "are bounded (ell sits at Lambda(s), s = " + detail::fmt(s) +
                                         ")");
            cert.verdict = os.str();
            resolved = true;
        } else {
            if (f.sup_int > 2.0) offer_margin("sup_int - 2", f.sup_int - 2.0);
            else offer_margin("ell - Lambda(s)", *ell - lambda_of(s_lo));
            if (*ell <= 2.0 + 1e-12) {
                const double d = decay_factor(DecayTheorem::t2055, f.sup_int, *ell, 1.0);
                cert.factor = d;
                cert.theorem =
                    d < 1.0 - 1e-12 ? CertTheorem::t2055_to_zero : CertTheorem::t2055_bounded;
                note("ell", *ell, 2.0, true);
                if (d < 1.0 - 1e-12) note("q_star", (4.0 + *ell) / 3.0, 2.0, true);
                std::ostringstream os;
                os << "ell-rapidly oscillating solutions "
                   << (d < 1.0 - 1e-12
                           ? "tend to zero (contraction " + detail::fmt(d) + " per zero cascade step)"
                           : "are bounded (ell sits at 2)");
                cert.verdict = os.str();
                resolved = true;
            } else {
                offer_margin("ell - 2", *ell - 2.0);
            }
        }
    }

    if (!resolved && f.sign_of_c == CoeffSign::nonpos) {
        cert.theorem = CertTheorem::t2054_speed_bound;
        cert.factor = 1.0;
        note("sup_int", f.sup_int, std::numeric_limits<double>::infinity(), true);
        std::ostringstream os;
        os << "oscillatory solutions are " << detail::fmt(*ell)
           << "-rapidly oscillating; no decay criterion applies";
        if (margin < inf) os << " (nearest margin: " << margin_text << ")";
        cert.verdict = os.str();
        resolved = true;
    }

    if (!resolved && f.sign_of_c == CoeffSign::nonneg) {
        cert.theorem =
            f.divergent_integral ? CertTheorem::t2353_to_zero : CertTheorem::t2353_monotone;
        cert.factor = 1.0;
        note("sup_int", f.sup_int, 1.5, false);
        std::ostringstream os;
        os << "nonoscillatory solutions are monotone"
           << (f.divergent_integral ? " and tend to zero (divergent coefficient integral)"
                                    : " with a finite limit")
           << "; oscillatory behavior uncertified";
        if (margin < inf) os << " (nearest margin: " << margin_text << ")";
        cert.verdict = os.str();
        resolved = true;
    }

    if (!resolved) {
        cert.theorem = CertTheorem::none;
        cert.factor = 1.0;
        if (!ell) {
            cert.verdict = "no theorem applies: oscillation speed ell unknown for a "
                           "sign-changing coefficient";
        } else {
            cert.verdict = "no theorem applies; nearest margin: " + margin_text;
        }
    }

    if (cert.factor < 1.0 - 1e-12 && f.C && f.D && ell) {
        DecayConstants k = exp_decay_constants(cert.factor, *f.C, *f.D, *ell);
        switch (cert.theorem) {
        case CertTheorem::t2352_to_zero: k.q = std::max(f.sup_int, 1.0); break;
        case CertTheorem::t2055_to_zero: k.q = (4.0 + *ell) / 3.0; break;
        case CertTheorem::t2056_to_zero:
            for (const HypothesisCheck& h : cert.measured)
                if (h.name == "alpha") k.alpha = h.value;
            break;
        default: break;
        }
        note("C", *f.C, std::numeric_limits<double>::infinity(), true);
        note("D_lower", *f.D, 0.0, true);
        std::ostringstream os;
        os << "exponential decay with M = " << detail::fmt(k.M) << ", gamma = "
           << detail::fmt(k.gamma) << ", delta = " << detail::fmt(k.delta) << " (via "
           << to_string(cert.theorem) << ")";
        cert.constants = k;
        cert.theorem = CertTheorem::t1914_exponential;
        cert.verdict = os.str() + "; " + cert.verdict;
    }

    return cert;
}

/// Convenience: certificate inputs measured from an equation and a classified
/// trajectory. The measured ell is widened by the 4 h sup|c| safety margin.
inline Features features_of(const Equation& eq, const OscillationReport& report, double h,
                            std::optional<double> C = std::nullopt,
                            std::optional<double> D = std::nullopt) {
    Features f;
    f.sign_of_c = coefficient_sign(eq.c());
    f.sup_int = report.sup_delay_integral;
    if (report.ell_measured) {
        const double supc = eq.c().sup_abs(report.window_t1, report.window_end);
        f.ell = *report.ell_measured + 4.0 * h * supc;
    }
    f.divergent_integral = eq.c().integral_diverges();
    f.C = C;
    f.D = D;
    return f;
}

struct ExpBoundCheck {
    bool pass = false;
    double worst_margin = 0.0;
};

/// Checks |x(t)| <= M sup_{[t1, t1+delta]} |x| exp(-gamma (t - t1)) at every
/// grid point past t1 + delta. Returns the worst (bound - |x|) margin.
inline ExpBoundCheck verify_exponential(const Trajectory& x, const DecayConstants& k, double t1) {
    if (x.t_end() < t1 + k.delta)
        throw WindowTooShort("trajectory must cover [t1, t1+delta] and beyond");
    const double S = x.max_abs_between(t1, t1 + k.delta);
    ExpBoundCheck out;
    out.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.grid.size(); ++i) {
        const double t = x.grid[i];
        if (t <= t1 + k.delta) continue;
        const double bound = k.M * S * std::exp(-k.gamma * (t - t1));
        out.worst_margin = std::min(out.worst_margin, bound - std::abs(x.values[i]));
    }
    if (!std::isfinite(out.worst_margin)) out.worst_margin = 0.0; // nothing past the window
    out.pass = out.worst_margin >= -1e-12;
    return out;
}

} // namespace delayosc
