#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <vector>

#include "delayosc/integrate.hpp"
#include "delayosc/oscillation.hpp"
#include "delayosc/piecewise.hpp"

namespace delayosc {

/// Shape of the randomized test equations: piecewise-constant coefficient of
/// one sign, piecewise-constant lag (tau(t) = t - L on each piece), both with
/// one common period, scaled so the sup delay integral hits a target range.
struct RandomEqOptions {
    CoeffSign sign = CoeffSign::nonneg;
    double sup_lo = 0.5;
    double sup_hi = 1.4;
    int c_pieces_min = 2;
    int c_pieces_max = 4;
    int tau_pieces_min = 1;
    int tau_pieces_max = 3;
    double lag_lo = 0.4;
    double lag_hi = 1.2;
};

struct RandomInstance {
    Equation eq;
    History history;
    double sup_int = 0.0;  // recomputed exactly after scaling
    double mean_lag = 0.0;
};

namespace detail {

inline double runif(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double runif(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * runif(rng);
}

inline int rint(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(runif(rng) * static_cast<double>(hi - lo + 1));
}

/// n contiguous segment boundaries over [0, P] with comparable widths.
inline std::vector<double> random_cuts(std::mt19937_64& rng, int n, double period) {
    std::vector<double> w(n);
    double total = 0.0;
    for (double& x : w) {
        x = runif(rng, 0.5, 1.0);
        total += x;
    }
    std::vector<double> cuts(n + 1, 0.0);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += w[i];
        cuts[i + 1] = period * acc / total;
    }
    cuts[n] = period;
    return cuts;
}

} // namespace detail

/// Draws one instance and a sign-alternating history sampled at step h.
inline RandomInstance make_random_instance(std::mt19937_64& rng, const RandomEqOptions& opt,
                                           double h) {
    const int nc = detail::rint(rng, opt.c_pieces_min, opt.c_pieces_max);
    const int nt = detail::rint(rng, opt.tau_pieces_min, opt.tau_pieces_max);
    const double period = detail::runif(rng, 1.2, 2.4);

    const std::vector<double> ccuts = detail::random_cuts(rng, nc, period);
    std::vector<double> cvals(nc);
    for (double& v : cvals) v = detail::runif(rng, 0.5, 1.0);

    const std::vector<double> tcuts = detail::random_cuts(rng, nt, period);
    std::vector<double> lags(nt);
    double mean_lag = 0.0;
    for (double& L : lags) {
        L = detail::runif(rng, opt.lag_lo, opt.lag_hi);
        mean_lag += L / nt;
    }

    auto build = [&](double scale, double sign) {
        std::vector<Piece> cp;
        for (int i = 0; i < nc; ++i)
            cp.push_back(Piece::constant(ccuts[i], ccuts[i + 1], sign * scale * cvals[i]));
        std::vector<Piece> tp;
        for (int i = 0; i < nt; ++i)
            tp.push_back(Piece::affine(tcuts[i], tcuts[i + 1], 1.0, -lags[i]));
        return Equation(PiecewiseFn::coefficient(std::move(cp), Extension::periodic),
                        PiecewiseFn::delay(std::move(tp), Extension::affine_periodic));
    };

    const Equation raw = build(1.0, 1.0);
    const double sup_raw = sup_delay_integral(raw, raw.rho() + period + 1.0);
    const double target = detail::runif(rng, opt.sup_lo, opt.sup_hi);
    const double scale = target / sup_raw;
    Equation eq = build(scale, opt.sign == CoeffSign::nonpos ? -1.0 : 1.0);
    const double sup_int = sup_delay_integral(eq, eq.rho() + period + 1.0);

    const double t0 = eq.rho();
    const double t_start = eq.tau().tau_min(t0);
    const double omega = 3.14159265358979323846 / mean_lag;
    auto seed_fn = [omega, t0](double t) { return std::cos(omega * (t - t0)); };
    History hist = t_start < t0 ? History::sample(seed_fn, t_start, t0, h, &eq)
                                : History::constant(1.0, t0, t0);

    return RandomInstance{std::move(eq), std::move(hist), sup_int, mean_lag};
}

/// Seed from the DELAYOSC_SEED environment variable, or the fixed default.
inline std::uint64_t seed_from_env(std::uint64_t fallback = 20260810ULL) {
    if (const char* s = std::getenv("DELAYOSC_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end != s) return static_cast<std::uint64_t>(v);
    }
    return fallback;
}

} // namespace delayosc
