#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "delayosc/integrate.hpp"
#include "delayosc/io.hpp"
#include "delayosc/lambda.hpp"
#include "delayosc/named_examples.hpp"
#include "delayosc/oscillation.hpp"
#include "delayosc/piecewise.hpp"
#include "delayosc/random_equations.hpp"

namespace delayosc {

// ------------------------------------------------------------ shared protocols

/// Cascade contraction check: from the first usable zero xi_1, each later
/// zero xi_k with tau_min^2(xi_k) > xi_{k-1} must satisfy
/// sup_{[xi_k, T]} |x| <= (q - 1/2 + margin)^k sup_{[tau_min^2(xi_1), xi_1]} |x|.
/// Steps stop when the window runs out of usable zeros.
struct CascadeCheck {
    int steps = 0;
    bool ok = true;
    std::string detail;
};

inline CascadeCheck check_cascade_bound(const Equation& eq, const Trajectory& x, double sup_int,
                                        double margin = 0.05, int max_steps = 3) {
    CascadeCheck out;
    const double T = x.t_end();
    const std::vector<double> zeros = find_zeros(x);
    const double q = std::max(sup_int, 1.0);
    const double f = q - 0.5 + margin;

    double xi = 0.0;
    bool have_xi = false;
    for (double z : zeros) {
        if (z <= eq.t1() || z >= T) continue;
        if (eq.tau().tau_min_iter(z, 2) >= x.t_start() - 1e-9) {
            xi = z;
            have_xi = true;
            break;
        }
    }
    if (!have_xi) return out;
    const double S0 = x.max_abs_between(eq.tau().tau_min_iter(xi, 2), xi);
    if (S0 <= 0.0) return out;

    double bound = 1.0;
    for (int k = 1; k <= max_steps; ++k) {
        bound *= f;
        const double sup_k = x.max_abs_between(xi, T);
        if (sup_k > bound * S0 + 1e-12) {
            out.ok = false;
            std::ostringstream os;
            os << "cascade step " << k << ": sup " << sup_k << " exceeds " << bound * S0;
            out.detail = os.str();
            return out;
        }
        out.steps = k;
        bool advanced = false;
        for (double z : zeros) {
            if (z > xi && z < T && eq.tau().tau_min_iter(z, 2) > xi) {
                xi = z;
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
    return out;
}

/// Trajectory-level speed bound for a nonpositive coefficient: every interior
/// zero-free segment must carry coefficient mass at most sup_int + 4 h sup|c|.
struct SpeedBoundCheck {
    bool applicable = false;
    bool ok = true;
    double ell = 0.0;
    double limit = 0.0;
};

inline SpeedBoundCheck check_speed_bound(const Equation& eq, const Trajectory& x, double sup_int,
                                         double h) {
    SpeedBoundCheck out;
    try {
        out.ell = measure_ell(x, eq, eq.t1());
    } catch (const TooFewZeros&) {
        return out;
    }
    out.applicable = true;
    out.limit = sup_int + 4.0 * h * eq.c().sup_abs(eq.t1(), x.t_end());
    out.ok = out.ell <= out.limit;
    return out;
}

/// Measured constants for the double condition |t - tau_min^2(t)| <= C,
/// int over [tau_min^2(t), t] of |c| >= D, scanned over one period past t1
/// with safe grid margins (C rounded up, D rounded down).
struct Condition2308 {
    double C = 0.0;
    double D = 0.0;
    bool valid = false;
};

inline Condition2308 measure_condition_2308(const Equation& eq, int grid_pts = 2001) {
    Condition2308 out;
    const double t1 = eq.t1();
    const double span = eq.is_periodic() ? eq.common_period() : 4.0 * eq.tau().sup_lag(t1, t1 + 4.0);
    const double gap = span / (grid_pts - 1);
    double cmax = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_pts; ++i) {
        const double t = t1 + gap * i;
        const double back = eq.tau().tau_min_iter(t, 2);
        cmax = std::max(cmax, t - back);
        dmin = std::min(dmin, eq.c().abs_integral(back, t));
    }
    const double supc = eq.c().sup_abs(t1, t1 + span);
    out.C = cmax + 5.0 * gap;
    out.D = dmin - 5.0 * gap * supc;
    out.valid = out.D > 0.05;
    return out;
}

// --------------------------------------------------------------- check registry

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace checks {

inline void add(std::vector<CheckResult>& out, const std::string& name, bool pass,
                const std::string& detail = "") {
    out.push_back({name, pass, detail});
}

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline void lambda_values(std::vector<CheckResult>& out) {
    const double e1 = std::abs(lambda_of(2.0) - 2.0);
    const double e2 = std::abs(lambda_of(1.125) - (1.625 + std::log(2.0)));
    add(out, "lambda.values", e1 <= 1e-12 && e2 <= 1e-12,
        "|L(2)-2|=" + num(e1) + " |L(9/8)-(13/8+ln2)|=" + num(e2));
}

inline void lambda_shape(std::vector<CheckResult>& out, std::mt19937_64& rng) {
    bool ok = true;
    const double lo = lambda_of(2.0);
    const double hi = lambda_of(1.0);
    for (int i = 0; i < 1000 && ok; ++i) {
        double a = 1.0 + detail::runif(rng);
        double b = 1.0 + detail::runif(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        const double la = lambda_of(a);
        const double lb = lambda_of(b);
        ok = la > lb && la <= hi + 1e-12 && lb >= lo - 1e-12;
    }
    add(out, "lambda.decreasing_range", ok);
}

inline void sigma_minimum(std::vector<CheckResult>& out) {
    const SigmaMin m = sigma_argmin();
    const bool ok = std::abs(m.s_star - 1.125) <= 1e-9 &&
                    std::abs(m.sigma_star - (2.75 + std::log(2.0))) <= 1e-12;
    add(out, "sigma.argmin", ok, "s*=" + num(m.s_star));
}

inline void psi_shape(std::vector<CheckResult>& out) {
    bool ok = true;
    std::string why;
    for (int i = 0; i <= 50 && ok; ++i) {
        const double s = 1.0 + static_cast<double>(i) / 50.0;
        const PsiProfile prof = psi_profile(s);
        for (int kidx = 0; kidx < 2 && ok; ++kidx) {
            const double k = prof.knots[kidx];
            if (k <= 0.0 || k >= prof.knots[2]) continue;
            const double below = psi_closed(s, std::nextafter(k, 0.0));
            const double above = psi_closed(s, std::nextafter(k, prof.knots[2]));
            if (std::abs(below - above) > 1e-12) {
                ok = false;
                why = "jump at knot for s=" + num(s);
            }
        }
        if (std::abs(psi_closed(s, prof.knots[2]) - 1.0) > 1e-10) {
            ok = false;
            why = "endpoint off 1 for s=" + num(s);
        }
        double prev = -1.0;
        for (int j = 0; j <= 1000 && ok; ++j) {
            const double t = prof.knots[2] * j / 1000.0;
            const double v = psi_closed(s, t);
            if (j > 0 && v <= prev) {
                ok = false;
                why = "not strictly increasing at s=" + num(s);
            }
            prev = v;
        }
    }
    add(out, "psi.knots_monotone", ok, why);
}

inline void psi_ode_residual(std::vector<CheckResult>& out) {
    bool ok = true;
    std::string why;
    for (double s : {1.0, 1.125, 1.5, 2.0}) {
        const PsiProfile prof = psi_profile(s);
        const double lam1 = prof.knots[2];
        for (int j = 1; j < 1000; ++j) {
            const double t = lam1 * j / 1000.0;
            if (t < 2e-6 || t > lam1 - 2e-6) continue;
            if (std::abs(t - prof.knots[0]) < 1e-3 || std::abs(t - prof.knots[1]) < 1e-3) continue;
            const double d = (psi_closed(s, t + 1e-6) - psi_closed(s, t - 1e-6)) / 2e-6;
            const double rhs = std::min(1.0, std::max(s - t, psi_closed(s, t)));
            if (std::abs(d - rhs) > 2e-6) {
                ok = false;
                why = "s=" + num(s) + " t=" + num(t) + " defect=" + num(std::abs(d - rhs));
                break;
            }
        }
        if (!ok) break;
    }
    add(out, "psi.ode_residual", ok, why);
}

inline void psi_picard_checks(std::vector<CheckResult>& out) {
    bool monotone = true;
    bool converged = true;
    std::string why;
    for (double s : {1.0, 1.125, 1.5, 2.0}) {
        const std::vector<double> v10 = psi_picard_grid(s, 10);
        const std::vector<double> v11 = psi_picard_grid(s, 11);
        for (std::size_t j = 0; j < v10.size(); ++j) {
            if (v11[j] < v10[j] - 1e-12) monotone = false;
        }
        const std::vector<double> v60 = psi_picard_grid(s, 60);
        const double lam1 = lambda_of(s) - 1.0;
        const std::size_t np = v60.size() - 1;
        double worst = 0.0;
        for (std::size_t j = 0; j <= np; ++j) {
            const double t = lam1 * static_cast<double>(j) / static_cast<double>(np);
            worst = std::max(worst, std::abs(v60[j] - psi_closed(s, t)));
        }
        if (worst > 1e-6) {
            converged = false;
            why = "s=" + num(s) + " deviation " + num(worst);
        }
    }
    add(out, "psi.picard_monotone", monotone);
    add(out, "psi.picard_convergence", converged, why);
}

inline void alpha_fixed_point(std::vector<CheckResult>& out, std::mt19937_64& rng) {
    bool ok = true;
    std::string why;
    for (int i = 0; i < 200 && ok; ++i) {
        const double s = detail::runif(rng, 1.0, 2.0);
        const double lam = lambda_of(s);
        const double ell = detail::runif(rng, lam - 1.0 + 1e-6, lam);
        const double a = alpha_root(s, ell);
        const double defect = std::abs(a - psi_closed(s, ell - a));
        if (defect > 1e-10) {
            ok = false;
            why = "s=" + num(s) + " ell=" + num(ell) + " defect=" + num(defect);
        }
    }
    add(out, "alpha.fixed_point", ok, why);
}

inline void t2056_boundary(std::vector<CheckResult>& out) {
    bool ok = true;
    std::string why;
    for (int i = 0; i <= 40; ++i) {
        const double s = 1.0 + static_cast<double>(i) / 40.0;
        const double d = decay_factor(DecayTheorem::t2056, s, lambda_of(s), s);
        if (std::abs(d - 1.0) > 1e-10) {
            ok = false;
            why = "s=" + num(s) + " factor " + num(d);
        }
    }
    add(out, "decay.t2056_boundary_is_one", ok, why);
}

inline std::vector<NamedExample> all_examples() {
    std::vector<NamedExample> v;
    for (double s : {1.0, 1.125, 1.5, 2.0}) v.push_back(make_xs(s));
    for (double s : {1.0, 1.125, 1.5, 2.0}) v.push_back(make_ys(s));
    v.push_back(make_myshkis_f());
    v.push_back(make_lillo_g());
    return v;
}

inline std::string example_label(const NamedExample& ex) {
    std::string label = ex.name;
    if (ex.s) label += "(s=" + num(*ex.s) + ")";
    return label;
}

inline void example_delay_validity(std::vector<CheckResult>& out, std::mt19937_64& rng) {
    bool ok = true;
    std::string why;
    for (const NamedExample& ex : all_examples()) {
        for (int i = 0; i < 10000; ++i) {
            const double t = detail::runif(rng, 0.0, 6.0 * ex.period);
            if (ex.eq.tau()(t) > t + 1e-9) {
                ok = false;
                why = example_label(ex) + " at t=" + num(t);
                break;
            }
        }
        if (!ok) break;
    }
    add(out, "examples.delay_validity", ok, why);
}

inline void example_residuals(std::vector<CheckResult>& out, double h, double tol) {
    bool ok = true;
    std::string why;
    for (const NamedExample& ex : all_examples()) {
        const Trajectory x = sample_trajectory(ex.eq, ex.solution, 0.0, 2.0 * ex.period, h);
        const double r = residual(ex.eq, x);
        if (!(r <= tol)) {
            ok = false;
            why = example_label(ex) + " residual " + num(r);
            break;
        }
    }
    add(out, "examples.oracle_residual", ok, why);
}

inline void example_identity(std::vector<CheckResult>& out) {
    const double dev = check_g_ys_identity(10000);
    add(out, "examples.g_ys_identity", dev <= 1e-12, "deviation " + num(dev));
}

inline History example_history(const NamedExample& ex, double h) {
    const double t0 = 0.0;
    const double t_start = ex.eq.tau().tau_min(t0);
    return History::sample(ex.solution, t_start, t0, h, &ex.eq);
}

inline void example_measured_vs_expected(std::vector<CheckResult>& out, double h) {
    bool ok = true;
    std::string why;
    for (const NamedExample& ex : {make_xs(1.5), make_ys(1.125)}) {
        const Trajectory x = integrate(ex.eq, example_history(ex, h), 6.0 * ex.period, h);
        const OscillationReport r = classify(ex.eq, x);
        const double tol = 4.0 * h * ex.eq.c().sup_abs(0.0, x.t_end());
        if (std::abs(r.sup_delay_integral - ex.expected.sup_int) > tol ||
            !r.ell_measured || std::abs(*r.ell_measured - ex.expected.ell) > tol ||
            std::abs(r.tau_max - ex.expected.tau_max) > tol) {
            ok = false;
            why = example_label(ex);
            break;
        }
    }
    add(out, "examples.measured_vs_expected", ok, why);
}

inline void example_sharpness(std::vector<CheckResult>& out, double h, int periods, double tol) {
    bool ok = true;
    std::string why;
    for (const NamedExample& ex : {make_xs(2.0), make_xs(1.125)}) {
        const Trajectory x = integrate(ex.eq, example_history(ex, h), periods * ex.period, h);
        const double first = x.max_abs_between(0.0, ex.period);
        double drift = 0.0;
        for (int k = 1; k < periods; ++k) {
            const double supk = x.max_abs_between(k * ex.period, (k + 1) * ex.period);
            drift = std::max(drift, std::abs(supk - first));
        }
        if (drift > tol) {
            ok = false;
            why = example_label(ex) + " drift " + num(drift);
            break;
        }
        const Certificate cert =
            certify({coefficient_sign(ex.eq.c()), ex.expected.sup_int, ex.expected.ell,
                     std::nullopt, std::nullopt, std::nullopt, false});
        if (std::abs(cert.factor - 1.0) > 1e-10) {
            ok = false;
            why = example_label(ex) + " certified factor " + num(cert.factor);
            break;
        }
    }
    add(out, "examples.sharpness_no_false_decay", ok, why);
}

inline Equation pure_ode_equation() {
    std::vector<Piece> cp{Piece::constant(0.0, 1.0, 1.0)};
    std::vector<Piece> tp{Piece::affine(0.0, 1.0, 1.0, 0.0)};
    return Equation(PiecewiseFn::coefficient(std::move(cp), Extension::periodic),
                    PiecewiseFn::delay(std::move(tp), Extension::affine_periodic));
}

inline double exp_ode_error(double h) {
    const Equation eq = pure_ode_equation();
    const History hist = History::constant(1.0, 0.0, 0.0);
    const Trajectory x = integrate(eq, hist, 1.0, h);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.grid.size(); ++i) {
        worst = std::max(worst, std::abs(x.values[i] - std::exp(-x.grid[i])));
    }
    return worst;
}

inline void integrator_order(std::vector<CheckResult>& out) {
    const double e1 = exp_ode_error(2e-3);
    const double e2 = exp_ode_error(1e-3);
    const double ratio = e1 / e2;
    add(out, "integrator.order2", ratio >= 3.2 && ratio <= 4.8, "ratio " + num(ratio));
}

inline void integrator_linearity(std::vector<CheckResult>& out) {
    const NamedExample ex = make_xs(2.0);
    const History hist = example_history(ex, 1e-3);
    const Trajectory a = integrate(ex.eq, hist, 4.0, 1e-3);
    const Trajectory b = integrate(ex.eq, hist.scaled(3.7), 4.0, 1e-3);
    bool ok = true;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double want = 3.7 * a.values[i];
        if (std::abs(b.values[i] - want) > 1e-12 * std::max(1.0, std::abs(want))) ok = false;
    }
    add(out, "integrator.linear_in_history", ok);
}

inline void cascade_t2352(std::vector<CheckResult>& out, std::mt19937_64& rng, int count) {
    RandomEqOptions opt;
    opt.sign = CoeffSign::nonneg;
    opt.sup_lo = 0.5;
    opt.sup_hi = 1.4;
    const double h = 2e-3;
    bool ok = true;
    int realized = 0;
    std::string why;
    for (int i = 0; i < count && ok; ++i) {
        const RandomInstance inst = make_random_instance(rng, opt, h);
        const Trajectory x = integrate(inst.eq, inst.history, inst.history.t0() + 25.0, h);
        const CascadeCheck c = check_cascade_bound(inst.eq, x, inst.sup_int);
        realized += c.steps;
        if (!c.ok) {
            ok = false;
            why = "equation " + std::to_string(i) + ": " + c.detail;
        }
    }
    add(out, "oscillation.cascade_3_2", ok && realized > 0,
        ok ? "realized steps " + std::to_string(realized) : why);
}

inline void speed_bound_t2054(std::vector<CheckResult>& out, std::mt19937_64& rng, int count) {
    RandomEqOptions opt;
    opt.sign = CoeffSign::nonpos;
    opt.sup_lo = 0.6;
    opt.sup_hi = 1.3;
    const double h = 1e-3;
    bool ok = true;
    int applicable = 0;
    std::string why;
    for (int i = 0; i < count && ok; ++i) {
        const RandomInstance inst = make_random_instance(rng, opt, h);
        const Trajectory x = integrate(inst.eq, inst.history, inst.history.t0() + 12.0, h);
        const SpeedBoundCheck c = check_speed_bound(inst.eq, x, inst.sup_int, h);
        if (c.applicable) {
            ++applicable;
            if (!c.ok) {
                ok = false;
                why = "equation " + std::to_string(i) + ": ell " + num(c.ell) + " > " +
                      num(c.limit);
            }
        }
    }
    add(out, "oscillation.speed_bound", ok && applicable > 0,
        ok ? "applicable " + std::to_string(applicable) : why);
}

inline void exponential_t1914(std::vector<CheckResult>& out, std::mt19937_64& rng, int count) {
    RandomEqOptions opt;
    opt.sign = CoeffSign::nonpos;
    opt.sup_lo = 0.7;
    opt.sup_hi = 1.0;
    opt.lag_lo = 0.4;
    opt.lag_hi = 0.8;
    const double h = 1e-3;
    bool ok = true;
    int checked = 0;
    std::string why;
    for (int i = 0; i < count && ok; ++i) {
        const RandomInstance inst = make_random_instance(rng, opt, h);
        const Condition2308 cd = measure_condition_2308(inst.eq);
        if (!cd.valid) continue;
        Features f;
        f.sign_of_c = CoeffSign::nonpos;
        f.sup_int = inst.sup_int;
        f.C = cd.C;
        f.D = cd.D;
        const Certificate cert = certify(f);
        if (cert.theorem != CertTheorem::t1914_exponential || !cert.constants) continue;
        const double t1 = inst.eq.t1();
        const double horizon = t1 + cert.constants->delta * 3.5;
        const Trajectory x = integrate(inst.eq, inst.history, horizon, h);
        const ExpBoundCheck chk = verify_exponential(x, *cert.constants, t1);
        ++checked;
        if (!chk.pass) {
            ok = false;
            why = "equation " + std::to_string(i) + ": margin " + num(chk.worst_margin);
        }
    }
    add(out, "oscillation.exponential_bound", ok && checked > 0,
        ok ? "checked " + std::to_string(checked) : why);
}

inline void io_roundtrip(std::vector<CheckResult>& out) {
    const NamedExample ex = make_xs(2.0);
    const json j = equation_to_json(ex.eq);
    const EquationFile back = equation_from_json(j);
    const double T = ex.eq.rho() + 3.0 * ex.period;
    const bool ok =
        std::abs(sup_delay_integral(ex.eq, T) - sup_delay_integral(back.eq, T)) <= 1e-12 &&
        std::abs(ex.eq.tau().sup_lag(ex.eq.rho(), ex.eq.rho() + ex.period) -
                 back.eq.tau().sup_lag(back.eq.rho(), back.eq.rho() + ex.period)) <= 1e-12;
    add(out, "io.equation_roundtrip", ok);
}

inline void classify_determinism(std::vector<CheckResult>& out) {
    const NamedExample ex = make_ys(1.5);
    auto run = [&]() {
        const Trajectory x = integrate(ex.eq, example_history(ex, 2e-3), 4.0 * ex.period, 2e-3);
        return report_to_text(classify(ex.eq, x));
    };
    add(out, "oscillation.classify_deterministic", run() == run());
}

} // namespace checks

/// The oracle/invariant suite behind the `verify` subcommand. Deterministic
/// for a fixed seed.
inline std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(seed);
    checks::lambda_values(out);
    checks::lambda_shape(out, rng);
    checks::sigma_minimum(out);
    checks::psi_shape(out);
    checks::psi_ode_residual(out);
    checks::psi_picard_checks(out);
    checks::alpha_fixed_point(out, rng);
    checks::t2056_boundary(out);
    checks::example_delay_validity(out, rng);
    checks::example_residuals(out, 1e-3, 1e-4);
    checks::example_identity(out);
    checks::example_measured_vs_expected(out, 1e-3);
    checks::example_sharpness(out, 1e-3, 4, 5e-4);
    checks::integrator_order(out);
    checks::integrator_linearity(out);
    checks::cascade_t2352(out, rng, 12);
    checks::speed_bound_t2054(out, rng, 12);
    checks::exponential_t1914(out, rng, 6);
    checks::io_roundtrip(out);
    checks::classify_determinism(out);
    return out;
}

/// Prints one PASS/FAIL line per invariant; true iff everything passed.
inline bool run_and_print_invariants(std::ostream& os, std::uint64_t seed) {
    bool all = true;
    for (const CheckResult& c : run_invariant_suite(seed)) {
        os << (c.pass ? "PASS" : "FAIL") << "  " << c.name;
        if (!c.detail.empty()) os << "  (" << c.detail << ")";
        os << "\n";
        all = all && c.pass;
    }
    return all;
}

} // namespace delayosc
