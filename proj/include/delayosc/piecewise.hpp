#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "delayosc/errors.hpp"

namespace delayosc {

enum class PieceKind { constant, affine };
enum class Extension { none, periodic, affine_periodic };
enum class Role { coefficient, delay };

/// Absolute tolerance used to deduplicate and snap breakpoints.
inline constexpr double kBreakpointTol = 1e-12;
/// Offset realizing the strict inequality in the rho anchor.
inline constexpr double kRhoOffset = 1e-9;

/// One segment of a piecewise function, valid on [start, end).
struct Piece {
    double start = 0.0;
    double end = 0.0;
    PieceKind kind = PieceKind::constant;
    double value = 0.0;     // constant pieces
    double slope = 0.0;     // affine pieces
    double intercept = 0.0; // affine pieces

    static Piece constant(double start, double end, double value) {
        Piece p;
        p.start = start;
        p.end = end;
        p.kind = PieceKind::constant;
        p.value = value;
        return p;
    }

    static Piece affine(double start, double end, double slope, double intercept) {
        Piece p;
        p.start = start;
        p.end = end;
        p.kind = PieceKind::affine;
        p.slope = slope;
        p.intercept = intercept;
        return p;
    }

    double eff_slope() const { return kind == PieceKind::constant ? 0.0 : slope; }
    double eff_intercept() const { return kind == PieceKind::constant ? value : intercept; }
};

/// A piece unrolled into one concrete period: f(t) = slope*t + intercept on [start, end).
struct LocalPiece {
    double start = 0.0;
    double end = 0.0;
    double slope = 0.0;
    double intercept = 0.0;

    double at(double t) const { return slope * t + intercept; }
};

namespace detail {

inline std::string interval_str(double a, double b) {
    std::ostringstream os;
    os << "[" << a << ", " << b << ")";
    return os.str();
}

} // namespace detail

/// Piecewise constant/affine function on a base interval starting at 0, with an
/// optional periodic or affine-periodic extension. Immutable after construction.
///
/// Extension rules: periodic means f(t+P)=f(t); affine_periodic means
/// f(t+P)=f(t)+P and is only allowed for delays, where it guarantees
/// tau(t) -> infinity. Values are right-continuous at breakpoints.
class PiecewiseFn {
public:
    static PiecewiseFn coefficient(std::vector<Piece> pieces, Extension ext) {
        if (ext == Extension::affine_periodic)
            throw ValidationError("affine_periodic extension is reserved for delays");
        return PiecewiseFn(std::move(pieces), ext, Role::coefficient);
    }

    static PiecewiseFn delay(std::vector<Piece> pieces, Extension ext) {
        return PiecewiseFn(std::move(pieces), ext, Role::delay);
    }

    Role role() const { return role_; }
    Extension extension() const { return ext_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    /// Length of the base interval; the period for extended functions.
    double period() const { return period_; }
    double domain_start() const { return pieces_.front().start; }
    double domain_end() const { return pieces_.back().end; }

    /// Right-continuous evaluation with the extension rule applied.
    double eval(double t) const {
        return resolve(t).at(t);
    }

    double operator()(double t) const { return eval(t); }

    /// Exact integral of |f| over [a, b], piece by piece in closed form.
    double abs_integral(double a, double b) const {
        check_interval(a, b);
        double total = 0.0;
        for_each_local(a, b, [&](const LocalPiece& lp, double lo, double hi) {
            total += abs_integral_affine(lp, lo, hi);
        });
        return total;
    }

    /// Signed integral over [a, b] (no absolute value).
    double integral(double a, double b) const {
        check_interval(a, b);
        double total = 0.0;
        for_each_local(a, b, [&](const LocalPiece& lp, double lo, double hi) {
            total += lp.slope * 0.5 * (hi * hi - lo * lo) + lp.intercept * (hi - lo);
        });
        return total;
    }

    /// Piece boundaries (extension unrolled) and sign-change points of affine
    /// pieces in [a, b], sorted and deduplicated within 1e-12. Always contains
    /// a and b themselves.
    std::vector<double> breakpoints(double a, double b) const {
        check_interval(a, b);
        std::vector<double> pts;
        pts.push_back(a);
        pts.push_back(b);
        for_each_local(a, b, [&](const LocalPiece& lp, double lo, double hi) {
            if (lp.start >= a && lp.start <= b) pts.push_back(lp.start);
            if (lp.end >= a && lp.end <= b) pts.push_back(lp.end);
            if (lp.slope != 0.0) {
                const double root = -lp.intercept / lp.slope;
                if (root > lo && root < hi) pts.push_back(root);
            }
        });
        std::sort(pts.begin(), pts.end());
        std::vector<double> out;
        for (double p : pts) {
            if (out.empty() || p - out.back() > kBreakpointTol) {
                out.push_back(p);
            }
        }
        // b must survive deduplication exactly.
        if (!out.empty() && std::abs(out.back() - b) <= kBreakpointTol) out.back() = b;
        return out;
    }

    /// inf over v >= t of f(v). Requires a delay whose representation decides
    /// lim f = infinity (affine_periodic, or a finite base window).
    double tau_min(double t) const {
        if (role_ != Role::delay)
            throw DomainError("tau_min is defined for delays only");
        double best = std::numeric_limits<double>::infinity();
        if (ext_ == Extension::affine_periodic) {
            // The infimum over [t, +inf) is attained within one period because
            // f(v+P) = f(v) + P > f(v).
            for_each_local(t, t + period_, [&](const LocalPiece& lp, double lo, double hi) {
                best = std::min(best, std::min(lp.at(lo), lp.at(hi)));
            });
        } else if (ext_ == Extension::none) {
            const double lo0 = std::max(t, domain_start());
            if (lo0 > domain_end())
                throw OutOfDomain("tau_min past the end of a finite delay window");
            for_each_local(lo0, domain_end(), [&](const LocalPiece& lp, double lo, double hi) {
                best = std::min(best, std::min(lp.at(lo), lp.at(hi)));
            });
        } else {
            throw Unbounded("periodic delay cannot guarantee lim tau = infinity");
        }
        return best;
    }

    /// k-fold composition of tau_min applied to t.
    double tau_min_iter(double t, int k) const {
        if (k <= 0) throw DomainError("tau_min_iter needs k >= 1");
        double v = t;
        for (int i = 0; i < k; ++i) v = tau_min(v);
        return v;
    }

    /// Exact sup of |f| over [a, b].
    double sup_abs(double a, double b) const {
        check_interval(a, b);
        double best = 0.0;
        for_each_local(a, b, [&](const LocalPiece& lp, double lo, double hi) {
            best = std::max(best, std::max(std::abs(lp.at(lo)), std::abs(lp.at(hi))));
        });
        return best;
    }

    /// Exact sup of (t - f(t)) over [a, b]; the delay span in time units.
    double sup_lag(double a, double b) const {
        check_interval(a, b);
        double best = -std::numeric_limits<double>::infinity();
        for_each_local(a, b, [&](const LocalPiece& lp, double lo, double hi) {
            best = std::max(best, std::max(lo - lp.at(lo), hi - lp.at(hi)));
        });
        return best;
    }

    /// Whether the representation proves that the signed integral of f over
    /// [0, t] diverges as t -> infinity.
    bool integral_diverges() const {
        if (ext_ != Extension::periodic) return false;
        return std::abs(integral(domain_start(), domain_end())) > 1e-15;
    }

    /// Affine view of the piece containing t, shifted into its period.
    LocalPiece resolve(double t) const {
        if (ext_ == Extension::none) {
            if (t < domain_start() - kBreakpointTol || t > domain_end() + kBreakpointTol)
                throw OutOfDomain("evaluation outside the base interval " +
                                  detail::interval_str(domain_start(), domain_end()));
            // t == domain_end uses the last piece's formula (left limit).
            const std::size_t idx = t >= domain_end() ? pieces_.size() - 1
                                                      : index_of(std::clamp(t, domain_start(), domain_end()));
            return local(idx, 0.0);
        }
        double k = std::floor(t / period_);
        double r = t - k * period_;
        if (r >= period_) {
            r -= period_;
            k += 1.0;
        }
        if (r < 0.0) {
            r += period_;
            k -= 1.0;
        }
        return local(index_of(r), k);
    }

    /// Invokes fn(localPiece, lo, hi) for every unrolled piece overlapping
    /// [a, b], clipped to it, in increasing order.
    template <typename Fn>
    void for_each_local(double a, double b, Fn&& fn) const {
        if (b < a) return;
        if (ext_ == Extension::none) {
            if (a < domain_start() - kBreakpointTol || b > domain_end() + kBreakpointTol)
                throw OutOfDomain("interval outside the base window " +
                                  detail::interval_str(domain_start(), domain_end()));
            for (std::size_t i = 0; i < pieces_.size(); ++i) {
                const LocalPiece lp = local(i, 0.0);
                const double lo = std::max(lp.start, a);
                const double hi = std::min(lp.end, b);
                if (hi > lo || (hi == lo && a == b)) fn(lp, lo, hi);
            }
            return;
        }
        const double kfirst = std::floor(a / period_) - 1.0;
        const double klast = std::floor(b / period_) + 1.0;
        for (double k = kfirst; k <= klast; k += 1.0) {
            for (std::size_t i = 0; i < pieces_.size(); ++i) {
                const LocalPiece lp = local(i, k);
                const double lo = std::max(lp.start, a);
                const double hi = std::min(lp.end, b);
                if (hi > lo || (hi == lo && a == b)) fn(lp, lo, hi);
            }
        }
    }

private:
    PiecewiseFn(std::vector<Piece> pieces, Extension ext, Role role)
        : pieces_(std::move(pieces)), ext_(ext), role_(role) {
        validate();
        period_ = pieces_.back().end - pieces_.front().start;
    }

    LocalPiece local(std::size_t idx, double k) const {
        const Piece& p = pieces_[idx];
        const double kP = k * period_;
        LocalPiece lp;
        lp.start = p.start + kP;
        lp.end = p.end + kP;
        lp.slope = p.eff_slope();
        switch (ext_) {
        case Extension::none:
            lp.intercept = p.eff_intercept();
            break;
        case Extension::periodic:
            lp.intercept = p.eff_intercept() - lp.slope * kP;
            break;
        case Extension::affine_periodic:
            lp.intercept = p.eff_intercept() + kP * (1.0 - lp.slope);
            break;
        }
        return lp;
    }

    // Index of the piece whose [start, end) contains r (base coordinates).
    std::size_t index_of(double r) const {
        std::size_t lo = 0, hi = pieces_.size();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (pieces_[mid].start <= r)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    static double abs_integral_affine(const LocalPiece& lp, double lo, double hi) {
        auto segment = [&](double p, double q) {
            const double mid = 0.5 * (p + q);
            const double sign = lp.at(mid) < 0.0 ? -1.0 : 1.0;
            return sign * (lp.slope * 0.5 * (q * q - p * p) + lp.intercept * (q - p));
        };
        if (lp.slope != 0.0) {
            const double root = -lp.intercept / lp.slope;
            if (root > lo && root < hi) return segment(lo, root) + segment(root, hi);
        }
        return segment(lo, hi);
    }

    void check_interval(double a, double b) const {
        if (!(a <= b)) throw OutOfDomain("interval endpoints out of order");
        if (ext_ == Extension::none &&
            (a < domain_start() - kBreakpointTol || b > domain_end() + kBreakpointTol))
            throw OutOfDomain("interval outside the base window " +
                              detail::interval_str(domain_start(), domain_end()));
    }

    void validate() {
        if (pieces_.empty()) throw ValidationError("piecewise function needs at least one piece");
        if (std::abs(pieces_.front().start) > kBreakpointTol)
            throw ValidationError("base interval must start at 0");
        pieces_.front().start = 0.0;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            Piece& p = pieces_[i];
            if (!(p.end > p.start))
                throw ValidationError("piece " + std::to_string(i) + " has start >= end");
            if (i + 1 < pieces_.size()) {
                Piece& q = pieces_[i + 1];
                if (q.start - p.end > kBreakpointTol) {
                    std::ostringstream os;
                    os << "gap between pieces in [" << p.end << ", " << q.start << ")";
                    throw ValidationError(os.str());
                }
                if (p.end - q.start > kBreakpointTol)
                    throw ValidationError("overlapping pieces at index " + std::to_string(i));
                q.start = p.end; // snap contiguity drift below tolerance
            }
        }
        if (role_ == Role::delay) {
            if (ext_ == Extension::periodic)
                throw ValidationError(
                    "delay with periodic extension is bounded; lim tau = infinity fails");
            // tau(t) <= t holds everywhere iff it holds on the base pieces:
            // the affine-periodic shift preserves it.
            for (std::size_t i = 0; i < pieces_.size(); ++i) {
                const Piece& p = pieces_[i];
                const double va = p.eff_slope() * p.start + p.eff_intercept();
                const double vb = p.eff_slope() * p.end + p.eff_intercept();
                if (va > p.start + kRhoOffset || vb > p.end + kRhoOffset) {
                    std::ostringstream os;
                    os << "delay exceeds t on piece " << i << " "
                       << detail::interval_str(p.start, p.end);
                    throw ValidationError(os.str());
                }
            }
        }
    }

    std::vector<Piece> pieces_;
    Extension ext_;
    Role role_;
    double period_ = 0.0;
};

/// Starting points after which the delayed argument is usable: t1 is the first
/// time the future infimum of the delay is positive, rho the first time it
/// exceeds t1 (plus a fixed offset realizing the strict inequality).
struct Anchor {
    double t1 = 0.0;
    double rho = 0.0;
};

namespace detail {

/// inf{t >= lo0 : pred(t)} for a monotone predicate, by doubling + bisection
/// to 1e-12, snapped onto a structural breakpoint when one is within 1e-9.
template <typename Pred>
double monotone_infimum(const PiecewiseFn& tau, double lo0, Pred&& pred) {
    if (pred(lo0)) return lo0;
    const bool finite = tau.extension() == Extension::none;
    const double cap = finite ? tau.domain_end() : std::numeric_limits<double>::infinity();
    if (finite && !pred(cap)) throw Unbounded("predicate never satisfied within the delay window");
    double hi = lo0 + std::max(1.0, tau.period());
    while (!finite && !pred(hi)) {
        hi = lo0 + (hi - lo0) * 2.0;
        if (hi - lo0 > 1e18) throw Unbounded("predicate never satisfied");
    }
    if (finite) hi = cap;
    double lo = lo0;
    for (int i = 0; i < 300 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    const double span = std::max(1e-6, 2.0 * (hi - lo));
    double blo = std::max(lo0, hi - span);
    double bhi = hi + span;
    if (finite) {
        blo = std::min(std::max(blo, tau.domain_start()), tau.domain_end());
        bhi = std::min(bhi, tau.domain_end());
    }
    for (double bp : tau.breakpoints(blo, bhi)) {
        if (std::abs(bp - hi) <= 1e-9) return bp;
    }
    return hi;
}

} // namespace detail

/// t1 := inf{t >= 0 : tau_min(t) > 0}; rho := inf{t > 0 : tau_min(t) > t1} + 1e-9.
inline Anchor compute_anchor(const PiecewiseFn& tau) {
    if (tau.role() != Role::delay) throw DomainError("compute_anchor needs a delay");
    Anchor a;
    a.t1 = detail::monotone_infimum(tau, 0.0, [&](double t) { return tau.tau_min(t) > 0.0; });
    const double r =
        detail::monotone_infimum(tau, 0.0, [&](double t) { return tau.tau_min(t) > a.t1; });
    a.rho = r + kRhoOffset;
    return a;
}

/// inf{v > 0 : tau_min(v) >= a}; the start of guaranteed monotone behavior for
/// a solution of one sign on [a, +inf) under a nonnegative coefficient.
inline double first_time_tau_min_at_least(const PiecewiseFn& tau, double a) {
    return detail::monotone_infimum(tau, 0.0, [&](double t) { return tau.tau_min(t) >= a; });
}

/// The equation x'(t) + c(t) x(tau(t)) = 0 with its validity anchors.
class Equation {
public:
    Equation(PiecewiseFn c, PiecewiseFn tau) : c_(std::move(c)), tau_(std::move(tau)) {
        if (c_.role() != Role::coefficient)
            throw ValidationError("first argument must be a coefficient");
        if (tau_.role() != Role::delay) throw ValidationError("second argument must be a delay");
        const Anchor a = compute_anchor(tau_);
        t1_ = a.t1;
        rho_ = a.rho;
    }

    const PiecewiseFn& c() const { return c_; }
    const PiecewiseFn& tau() const { return tau_; }
    double t1() const { return t1_; }
    double rho() const { return rho_; }

    /// True when coefficient and delay repeat with one common period.
    bool is_periodic() const {
        return c_.extension() == Extension::periodic &&
               tau_.extension() == Extension::affine_periodic &&
               std::abs(c_.period() - tau_.period()) <= kBreakpointTol;
    }

    double common_period() const { return c_.period(); }

    /// Union of coefficient and delay breakpoints in [a, b].
    std::vector<double> breakpoints(double a, double b) const {
        std::vector<double> pts = c_.breakpoints(a, b);
        std::vector<double> tp = tau_.breakpoints(a, b);
        pts.insert(pts.end(), tp.begin(), tp.end());
        std::sort(pts.begin(), pts.end());
        std::vector<double> out;
        for (double p : pts) {
            if (out.empty() || p - out.back() > kBreakpointTol) out.push_back(p);
        }
        if (!out.empty() && std::abs(out.back() - b) <= kBreakpointTol) out.back() = b;
        return out;
    }

private:
    PiecewiseFn c_;
    PiecewiseFn tau_;
    double t1_ = 0.0;
    double rho_ = 0.0;
};

} // namespace delayosc
