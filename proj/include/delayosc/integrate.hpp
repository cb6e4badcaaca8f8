#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "delayosc/errors.hpp"
#include "delayosc/piecewise.hpp"

namespace delayosc {

namespace detail {

/// Linear interpolation over the first vs.size() entries of ts. Exact at nodes.
inline double interp(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
    const std::size_t m = vs.size();
    if (t <= ts[0]) {
        if (t < ts[0] - 1e-12) throw HistoryTooShort("delayed argument reaches below the history");
        return vs[0];
    }
    if (t >= ts[m - 1]) {
        if (t > ts[m - 1] + 1e-12) throw OutOfDomain("interpolation past the last computed sample");
        return vs[m - 1];
    }
    std::size_t lo = 0, hi = m - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (ts[mid] <= t)
            lo = mid;
        else
            hi = mid;
    }
    const double w = (t - ts[lo]) / (ts[lo + 1] - ts[lo]);
    return vs[lo] + w * (vs[lo + 1] - vs[lo]);
}

/// Uniform h-grid on [t0, t_end] merged with the equation breakpoints.
/// Breakpoints win over uniform points closer than 0.1 h, so they appear in
/// the grid bit-exactly.
inline std::vector<double> build_grid(const Equation& eq, double t0, double t_end, double h) {
    std::vector<double> bps = eq.breakpoints(t0, t_end);
    std::vector<double> grid = bps;
    const double tol = 0.1 * h;
    const std::size_t n = static_cast<std::size_t>(std::ceil((t_end - t0) / h - 1e-9));
    for (std::size_t i = 1; i < n; ++i) {
        const double p = t0 + static_cast<double>(i) * h;
        auto it = std::lower_bound(bps.begin(), bps.end(), p);
        double dist = std::numeric_limits<double>::infinity();
        if (it != bps.end()) dist = std::min(dist, *it - p);
        if (it != bps.begin()) dist = std::min(dist, p - *std::prev(it));
        if (dist > tol) grid.push_back(p);
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

} // namespace detail

/// Solution values on [t_start, t0] seeding an integration; times strictly
/// increasing, last time is t0.
struct History {
    std::vector<double> times;
    std::vector<double> values;

    double t_start() const { return times.front(); }
    double t0() const { return times.back(); }

    static History constant(double value, double t_start, double t0) {
        History h;
        if (t0 < t_start) throw ValidationError("history interval reversed");
        h.times.push_back(t_start);
        h.values.push_back(value);
        if (t0 > t_start) {
            h.times.push_back(t0);
            h.values.push_back(value);
        }
        return h;
    }

    /// Samples fn on an h-grid over [t_start, t0]; eq's breakpoints in the
    /// window are inserted so kinks of exact solutions fall on nodes.
    static History sample(const std::function<double(double)>& fn, double t_start, double t0,
                          double h, const Equation* eq = nullptr) {
        History out;
        if (t0 < t_start) throw ValidationError("history interval reversed");
        if (t0 == t_start) {
            out.times.push_back(t0);
            out.values.push_back(fn(t0));
            return out;
        }
        std::vector<double> ts;
        if (eq != nullptr) {
            ts = eq->breakpoints(t_start, t0);
        } else {
            ts = {t_start, t0};
        }
        const double tol = 0.1 * h;
        const std::size_t n = static_cast<std::size_t>(std::ceil((t0 - t_start) / h - 1e-9));
        std::vector<double> base = ts;
        for (std::size_t i = 1; i < n; ++i) {
            const double p = t_start + static_cast<double>(i) * h;
            auto it = std::lower_bound(base.begin(), base.end(), p);
            double dist = std::numeric_limits<double>::infinity();
            if (it != base.end()) dist = std::min(dist, *it - p);
            if (it != base.begin()) dist = std::min(dist, p - *std::prev(it));
            if (dist > tol) ts.push_back(p);
        }
        std::sort(ts.begin(), ts.end());
        out.times = ts;
        out.values.reserve(ts.size());
        for (double t : ts) out.values.push_back(fn(t));
        return out;
    }

    History scaled(double a) const {
        History h = *this;
        for (double& v : h.values) v *= a;
        return h;
    }
};

/// Discrete solution samples, history segment included. grid runs from the
/// history start to t_end; the equation is satisfied (numerically) from t0 on.
struct Trajectory {
    Equation equation;
    std::vector<double> grid;
    std::vector<double> values;
    double step = 0.0;
    double t0 = 0.0;

    double t_start() const { return grid.front(); }
    double t_end() const { return grid.back(); }

    double value_at(double t) const { return detail::interp(grid, values, t); }

    /// Max of |x| over grid samples in [a, b].
    double max_abs_between(double a, double b) const {
        double best = 0.0;
        auto lo = std::lower_bound(grid.begin(), grid.end(), a - 1e-12);
        for (auto it = lo; it != grid.end() && *it <= b + 1e-12; ++it) {
            best = std::max(best, std::abs(values[static_cast<std::size_t>(it - grid.begin())]));
        }
        return best;
    }
};

/// Advances x' = -c(t) x(tau(t)) from the history by the method of steps:
/// per panel, 2-point Gauss quadrature of c(u) x(tau(u)) against the linear
/// interpolant of everything already known. When tau(u) lands inside the
/// current panel, the panel is swept once more with the provisional endpoint
/// (the step map is a contraction for h sup|c| < 1/2, which is enforced).
/// Globally second order on piecewise-smooth data.
inline Trajectory integrate(const Equation& eq, const History& hist, double t_end, double h) {
    if (!(h > 0.0)) throw StepInvalid("step must be positive");
    const double t0 = hist.t0();
    if (!(t_end > t0)) throw StepInvalid("horizon must exceed the history end");
    const double supc = eq.c().sup_abs(t0, t_end);
    if (supc > 0.0 && h >= 0.5 / supc)
        throw StepInvalid("step too large: require h < 0.5/sup|c| for the delayed step map");
    const double reach = eq.tau().tau_min(t0);
    if (hist.t_start() > reach + 1e-12)
        throw HistoryTooShort("history must start at or before tau_min(t0)");

    Trajectory x{eq, hist.times, hist.values, h, t0};
    const std::vector<double> future = detail::build_grid(eq, t0, t_end, h);
    x.grid.insert(x.grid.end(), future.begin() + 1, future.end());
    x.values.reserve(x.grid.size());

    constexpr double kGaussNode = 0.28867513459481287; // 1/(2 sqrt(3))
    for (std::size_t n = hist.times.size() - 1; n + 1 < x.grid.size(); ++n) {
        const double a = x.grid[n];
        const double b = x.grid[n + 1];
        const double len = b - a;
        const double um = 0.5 * (a + b);
        const double u1 = um - kGaussNode * len;
        const double u2 = um + kGaussNode * len;
        const double c1 = eq.c()(u1);
        const double c2 = eq.c()(u2);
        const double tau1 = eq.tau()(u1);
        const double tau2 = eq.tau()(u2);
        const double xn = x.values[n];

        auto delayed = [&](double tau, double provisional) {
            if (tau <= a) return detail::interp(x.grid, x.values, tau);
            const double w = (tau - a) / len;
            return xn + w * (provisional - xn);
        };
        auto quad = [&](double provisional) {
            return 0.5 * len * (c1 * delayed(tau1, provisional) + c2 * delayed(tau2, provisional));
        };

        double next = xn - quad(xn);
        if (tau1 > a || tau2 > a) next = xn - quad(next);
        if (!std::isfinite(next)) throw NonFiniteValue("integration overflowed");
        x.values.push_back(next);
    }
    return x;
}

/// Interval-averaged defect of a trajectory against the equation:
/// max over grid panels past t0 of |x(b) - x(a) + int_a^b c(u) x(tau(u)) du| / (b-a),
/// the integral by 4-point Gauss against the trajectory's linear interpolant.
inline double residual(const Equation& eq, const Trajectory& x) {
    static const double nodes[4] = {-0.8611363115940526, -0.33998104358485626,
                                    0.33998104358485626, 0.8611363115940526};
    static const double weights[4] = {0.34785484513745385, 0.6521451548625461,
                                      0.6521451548625461, 0.34785484513745385};
    double worst = 0.0;
    for (std::size_t n = 0; n + 1 < x.grid.size(); ++n) {
        const double a = x.grid[n];
        if (a < x.t0 - 1e-12) continue;
        const double b = x.grid[n + 1];
        const double len = b - a;
        if (!(len > 0.0)) continue;
        double integral = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double u = 0.5 * (a + b) + 0.5 * len * nodes[i];
            const double tau = eq.tau()(u);
            if (tau < x.t_start() - 1e-12)
                throw HistoryTooShort("trajectory does not cover the delayed arguments");
            integral += 0.5 * len * weights[i] * eq.c()(u) * detail::interp(x.grid, x.values, tau);
        }
        const double defect = std::abs(x.values[n + 1] - x.values[n] + integral) / len;
        worst = std::max(worst, defect);
    }
    return worst;
}

/// Samples an exact solution evaluator into a Trajectory whose grid starts at
/// tau_min(t0) and is aligned with the equation breakpoints; the usual oracle
/// input for residual().
inline Trajectory sample_trajectory(const Equation& eq, const std::function<double(double)>& fn,
                                    double t0, double t_end, double h) {
    const double t_start = eq.tau().tau_min(t0);
    std::vector<double> grid = detail::build_grid(eq, t_start, t_end, h);
    Trajectory x{eq, std::move(grid), {}, h, t0};
    x.values.reserve(x.grid.size());
    for (double t : x.grid) x.values.push_back(fn(t));
    return x;
}

} // namespace delayosc
