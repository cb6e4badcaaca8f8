#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "delayosc/delayosc.hpp"

namespace {

using namespace delayosc;

struct Options {
    std::string input;
    std::string output;
    double step = 1e-3;
    double horizon = 20.0;
    double eps_zero = 1e-9;
    double eps_t = -1.0;
    std::string sign = "mixed";
    double sup_int = 0.0;
    std::optional<double> ell;
    std::optional<double> s_choice;
    std::optional<double> big_c;
    std::optional<double> big_d;
    bool divergent = false;
    std::string name = "xs";
    double s = 1.125;
    int samples = 401;
    std::string format = "both";
};

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
    } else {
        atomic_write(path, content);
    }
}

History default_history(const Equation& eq) {
    const double t0 = eq.rho();
    const double t_start = eq.tau().tau_min(t0);
    return History::constant(1.0, std::min(t_start, t0), t0);
}

Trajectory simulate(const Options& opt) {
    const EquationFile ef = read_equation_file(opt.input);
    const History hist = ef.history ? *ef.history : default_history(ef.eq);
    return integrate(ef.eq, hist, opt.horizon, opt.step);
}

int cmd_simulate(const Options& opt) {
    emit(opt.output, trajectory_csv(simulate(opt)));
    return 0;
}

int cmd_analyze(const Options& opt) {
    const EquationFile ef = read_equation_file(opt.input);
    const History hist = ef.history ? *ef.history : default_history(ef.eq);
    const Trajectory x = integrate(ef.eq, hist, opt.horizon, opt.step);
    const OscillationReport r = classify(ef.eq, x, opt.eps_zero, opt.eps_t);
    emit(opt.output, report_to_text(r));
    return 0;
}

int cmd_certify(const Options& opt) {
    Features f;
    if (opt.sign == "nonneg")
        f.sign_of_c = CoeffSign::nonneg;
    else if (opt.sign == "nonpos")
        f.sign_of_c = CoeffSign::nonpos;
    else
        f.sign_of_c = CoeffSign::mixed;
    f.sup_int = opt.sup_int;
    f.ell = opt.ell;
    f.s_choice = opt.s_choice;
    f.C = opt.big_c;
    f.D = opt.big_d;
    f.divergent_integral = opt.divergent;
    emit(opt.output, certificate_to_text(certify(f)));
    return 0;
}

int cmd_lambda_table(const Options& opt) {
    emit(opt.output, lambda_table_csv(opt.samples));
    return 0;
}

int cmd_example(const Options& opt) {
    const NamedExample ex = make_named_example(opt.name, opt.s);
    const double t_start = ex.eq.tau().tau_min(0.0);
    const History hist = History::sample(ex.solution, t_start, 0.0, opt.step, &ex.eq);
    json meta;
    meta["name"] = ex.name;
    if (ex.s) meta["s"] = *ex.s;
    meta["period"] = ex.period;
    meta["expected"] = {{"sup_int", ex.expected.sup_int},
                        {"ell", ex.expected.ell},
                        {"tau_max", ex.expected.tau_max}};
    const std::string path = opt.output.empty() ? ex.name + ".json" : opt.output;
    write_equation_file(path, ex.eq, &hist, &meta);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_figure(const Options& opt) {
    const std::string base = opt.output.empty() ? "figure" : opt.output;
    if (opt.format == "csv") {
        emit(base, figure_csv());
    } else if (opt.format == "svg") {
        emit(base, figure_svg());
    } else {
        atomic_write(base + ".csv", figure_csv());
        atomic_write(base + ".svg", figure_svg());
        std::cout << "wrote " << base << ".csv and " << base << ".svg\n";
    }
    return 0;
}

int cmd_verify() {
    const bool ok = run_and_print_invariants(std::cout, seed_from_env());
    return ok ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulate, analyze and certify the scalar delay equation "
                 "x'(t) + c(t) x(tau(t)) = 0 with piecewise coefficient and delay"};
    app.require_subcommand(1);
    Options opt;
    int (*runner)(const Options&) = nullptr;
    bool want_verify = false;

    auto* sim = app.add_subcommand("simulate", "integrate an equation file to a trajectory CSV");
    sim->add_option("--input", opt.input, "equation JSON file")->required();
    sim->add_option("--output", opt.output, "trajectory CSV path (stdout if omitted)");
    sim->add_option("--step", opt.step, "nominal step size");
    sim->add_option("--horizon", opt.horizon, "end time of the integration");
    sim->callback([&] { runner = cmd_simulate; });

    auto* ana = app.add_subcommand("analyze", "integrate and report zeros, ell, sup integral");
    ana->add_option("--input", opt.input, "equation JSON file")->required();
    ana->add_option("--output", opt.output, "report path (stdout if omitted)");
    ana->add_option("--step", opt.step, "nominal step size");
    ana->add_option("--horizon", opt.horizon, "end time of the integration");
    ana->add_option("--eps-zero", opt.eps_zero, "relative zero-cluster threshold");
    ana->add_option("--eps-t", opt.eps_t, "zero merge distance (default: one step)");
    ana->callback([&] { runner = cmd_analyze; });

    auto* cer = app.add_subcommand("certify", "apply the stability ladder to measured features");
    cer->add_option("--sign", opt.sign, "coefficient sign: nonneg|nonpos|mixed")->required();
    cer->add_option("--sup-int", opt.sup_int, "sup of the delay integral of |c|")->required();
    cer->add_option("--ell", opt.ell, "oscillation speed, when known");
    cer->add_option("--s", opt.s_choice, "fixed s in [1,2] (default: scanned)");
    cer->add_option("--C", opt.big_c, "bound on |t - tau_min^2(t)|");
    cer->add_option("--D", opt.big_d, "lower bound on the |c| mass of [tau_min^2(t), t]");
    cer->add_flag("--divergent", opt.divergent, "the integral of c diverges");
    cer->add_option("--output", opt.output, "certificate path (stdout if omitted)");
    cer->callback([&] { runner = cmd_certify; });

    auto* tab = app.add_subcommand("lambda-table", "emit (s, Lambda(s), sigma(s)) as CSV");
    tab->add_option("--output", opt.output, "CSV path (stdout if omitted)");
    tab->add_option("--samples", opt.samples, "grid size on [1,2] (default 401)");
    tab->callback([&] { runner = cmd_lambda_table; });

    auto* exa = app.add_subcommand("example", "write a limit-case example as an equation fixture");
    exa->add_option("--name", opt.name, "xs|ys|f|g")->required();
    exa->add_option("--s", opt.s, "parameter s for xs/ys (default 9/8)");
    exa->add_option("--step", opt.step, "history sampling step");
    exa->add_option("--output", opt.output, "fixture path (default <name>.json)");
    exa->callback([&] { runner = cmd_example; });

    auto* fig = app.add_subcommand("figure", "emit the threshold-curve dataset and rendering");
    fig->add_option("--output", opt.output, "output base path (default 'figure')");
    fig->add_option("--format", opt.format, "csv|svg|both (default both)")
        ->check(CLI::IsMember({"csv", "svg", "both"}));
    fig->callback([&] { runner = cmd_figure; });

    auto* ver = app.add_subcommand("verify", "run the oracle/invariant suite (DELAYOSC_SEED)");
    ver->callback([&] { want_verify = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (want_verify) return cmd_verify();
        if (runner != nullptr) return runner(opt);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
