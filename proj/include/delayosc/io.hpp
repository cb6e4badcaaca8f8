#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "delayosc/errors.hpp"
#include "delayosc/integrate.hpp"
#include "delayosc/lambda.hpp"
#include "delayosc/oscillation.hpp"
#include "delayosc/piecewise.hpp"

namespace delayosc {

using json = nlohmann::json;

namespace detail {

inline std::string fmt_sig(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

} // namespace detail

/// Writes content to path atomically (temp file + rename).
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os.flush()) throw Error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------- equations

inline json piecewise_to_json(const PiecewiseFn& f) {
    json pieces = json::array();
    for (const Piece& p : f.pieces()) {
        json jp;
        jp["start"] = p.start;
        jp["end"] = p.end;
        if (p.kind == PieceKind::constant) {
            jp["kind"] = "constant";
            jp["params"] = {{"value", p.value}};
        } else {
            jp["kind"] = "affine";
            jp["params"] = {{"slope", p.slope}, {"intercept", p.intercept}};
        }
        pieces.push_back(jp);
    }
    json ext;
    switch (f.extension()) {
    case Extension::none: ext["type"] = "none"; break;
    case Extension::periodic:
        ext["type"] = "periodic";
        ext["period"] = f.period();
        break;
    case Extension::affine_periodic:
        ext["type"] = "affine_periodic";
        ext["period"] = f.period();
        break;
    }
    return json{{"pieces", pieces}, {"extension", ext}};
}

inline json equation_to_json(const Equation& eq) {
    return json{{"coefficient", piecewise_to_json(eq.c())}, {"delay", piecewise_to_json(eq.tau())}};
}

namespace detail {

inline double number_field(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(where + ": missing numeric field '" + key + "'");
    return j[key].get<double>();
}

inline PiecewiseFn piecewise_from_json(const json& j, Role role, const std::string& where) {
    if (!j.is_object() || !j.contains("pieces") || !j["pieces"].is_array())
        throw ParseError(where + ": expected an object with a 'pieces' array");
    std::vector<Piece> pieces;
    std::size_t idx = 0;
    for (const json& jp : j["pieces"]) {
        const std::string ctx = where + ".pieces[" + std::to_string(idx) + "]";
        const double start = number_field(jp, "start", ctx);
        const double end = number_field(jp, "end", ctx);
        const std::string kind = jp.value("kind", "");
        if (!jp.contains("params") || !jp["params"].is_object())
            throw ParseError(ctx + ": missing 'params' object");
        const json& params = jp["params"];
        if (kind == "constant") {
            pieces.push_back(Piece::constant(start, end, number_field(params, "value", ctx)));
        } else if (kind == "affine") {
            pieces.push_back(Piece::affine(start, end, number_field(params, "slope", ctx),
                                           number_field(params, "intercept", ctx)));
        } else {
            throw ParseError(ctx + ": kind must be 'constant' or 'affine'");
        }
        ++idx;
    }
    Extension ext = Extension::none;
    double declared_period = -1.0;
    if (j.contains("extension")) {
        const json& je = j["extension"];
        const std::string type = je.value("type", "none");
        if (type == "none") {
            ext = Extension::none;
        } else if (type == "periodic") {
            ext = Extension::periodic;
            declared_period = number_field(je, "period", where + ".extension");
        } else if (type == "affine_periodic") {
            ext = Extension::affine_periodic;
            declared_period = number_field(je, "period", where + ".extension");
        } else {
            throw ParseError(where + ".extension: unknown type '" + type + "'");
        }
    }
    PiecewiseFn f = role == Role::coefficient ? PiecewiseFn::coefficient(std::move(pieces), ext)
                                              : PiecewiseFn::delay(std::move(pieces), ext);
    if (declared_period >= 0.0 && std::abs(declared_period - f.period()) > kBreakpointTol)
        throw ValidationError(where + ".extension: declared period " +
                              std::to_string(declared_period) +
                              " does not match the base interval length " +
                              std::to_string(f.period()));
    return f;
}

} // namespace detail

struct EquationFile {
    Equation eq;
    std::optional<History> history;
    json meta;
};

/// Builds the equation (and optional seeding history) from parsed JSON,
/// enforcing all structural invariants.
inline EquationFile equation_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("top level: expected an object");
    if (!j.contains("coefficient")) throw ParseError("top level: missing 'coefficient'");
    if (!j.contains("delay")) throw ParseError("top level: missing 'delay'");
    PiecewiseFn c = detail::piecewise_from_json(j["coefficient"], Role::coefficient, "coefficient");
    PiecewiseFn tau = detail::piecewise_from_json(j["delay"], Role::delay, "delay");
    EquationFile out{Equation(std::move(c), std::move(tau)), std::nullopt, json::object()};
    if (j.contains("history")) {
        const json& jh = j["history"];
        if (!jh.contains("times") || !jh.contains("values") || !jh["times"].is_array() ||
            !jh["values"].is_array() || jh["times"].size() != jh["values"].size() ||
            jh["times"].empty())
            throw ParseError("history: needs equally sized 'times' and 'values' arrays");
        History h;
        for (const json& v : jh["times"]) h.times.push_back(v.get<double>());
        for (const json& v : jh["values"]) h.values.push_back(v.get<double>());
        for (std::size_t i = 0; i + 1 < h.times.size(); ++i)
            if (!(h.times[i] < h.times[i + 1]))
                throw ValidationError("history: times must be strictly increasing");
        out.history = std::move(h);
    }
    if (j.contains("meta")) out.meta = j["meta"];
    return out;
}

/// Reads and validates an equation file. Parse failures carry the byte
/// position reported by the JSON parser.
inline EquationFile read_equation_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return equation_from_json(j);
}

inline void write_equation_file(const std::filesystem::path& path, const Equation& eq,
                                const History* history = nullptr,
                                const json* meta = nullptr) {
    json j = equation_to_json(eq);
    if (history != nullptr) {
        j["history"] = {{"times", history->times}, {"values", history->values}};
    }
    if (meta != nullptr) j["meta"] = *meta;
    atomic_write(path, j.dump(2) + "\n");
}

// -------------------------------------------------------------------- tables

/// Trajectory CSV: header t,x; 12 significant digits; rows strictly increasing.
inline std::string trajectory_csv(const Trajectory& x) {
    std::ostringstream os;
    os << "t,x\n";
    for (std::size_t i = 0; i < x.grid.size(); ++i) {
        os << detail::fmt_sig(x.grid[i], 12) << "," << detail::fmt_sig(x.values[i], 12) << "\n";
    }
    return os.str();
}

/// (s, Lambda(s), sigma(s)) over a uniform grid on [1, 2].
inline std::string lambda_table_csv(int samples) {
    if (samples < 2) throw DomainError("need at least two samples");
    std::ostringstream os;
    os << "s,lambda,sigma\n";
    for (int i = 0; i < samples; ++i) {
        const double s = 1.0 + static_cast<double>(i) / (samples - 1);
        os << detail::fmt_sig(s, 17) << "," << detail::fmt_sig(lambda_of(s), 17) << ","
           << detail::fmt_sig(sigma_of(s), 17) << "\n";
    }
    return os.str();
}

/// Threshold-curve dataset: 400 uniform samples of (s, Lambda(s)) on [1, 2],
/// then the constant-2 continuation out to s = 4 for the ell <= 2 regime.
inline std::string figure_csv() {
    std::ostringstream os;
    os << "s,lambda\n";
    const int n = 400;
    for (int i = 0; i < n; ++i) {
        const double s = 1.0 + static_cast<double>(i) / (n - 1);
        os << detail::fmt_sig(s, 17) << "," << detail::fmt_sig(lambda_of(s), 17) << "\n";
    }
    const int m = 100;
    for (int i = 1; i <= m; ++i) {
        const double s = 2.0 + 2.0 * static_cast<double>(i) / m;
        os << detail::fmt_sig(s, 17) << ",2\n";
    }
    return os.str();
}

/// Presentation rendering of the same dataset: the Lambda curve, its
/// constant-2 continuation, and circle markers at (9/8, 13/8 + ln 2) and
/// (2, 2). Data coordinates ride along as data-s/data-lambda attributes.
inline std::string figure_svg() {
    const double sx0 = 0.9, sx1 = 4.1, sy0 = 1.9, sy1 = 2.7;
    auto X = [&](double s) { return 60.0 + (s - sx0) / (sx1 - sx0) * 540.0; };
    auto Y = [&](double v) { return 380.0 - (v - sy0) / (sy1 - sy0) * 330.0; };
    auto pt = [&](double s, double v) {
        std::ostringstream os;
        os << detail::fmt_sig(X(s), 8) << "," << detail::fmt_sig(Y(v), 8);
        return os.str();
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 660 430\">\n";
    os << "  <rect width=\"660\" height=\"430\" fill=\"white\"/>\n";
    os << "  <line x1=\"60\" y1=\"380\" x2=\"600\" y2=\"380\" stroke=\"black\"/>\n";
    os << "  <line x1=\"60\" y1=\"50\" x2=\"60\" y2=\"380\" stroke=\"black\"/>\n";
    for (int s = 1; s <= 4; ++s) {
        os << "  <text x=\"" << detail::fmt_sig(X(s), 8)
           << "\" y=\"398\" font-size=\"12\" text-anchor=\"middle\">" << s << "</text>\n";
    }
    for (double v : {2.0, 2.2, 2.4, 2.6}) {
        os << "  <text x=\"52\" y=\"" << detail::fmt_sig(Y(v) + 4.0, 8)
           << "\" font-size=\"12\" text-anchor=\"end\">" << detail::fmt_sig(v, 3) << "</text>\n";
    }
    os << "  <polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"";
    const int n = 400;
    for (int i = 0; i < n; ++i) {
        const double s = 1.0 + static_cast<double>(i) / (n - 1);
        os << pt(s, lambda_of(s)) << (i + 1 < n ? " " : "");
    }
    os << "\"/>\n";
    os << "  <polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\" "
          "points=\""
       << pt(2.0, 2.0) << " " << pt(4.0, 2.0) << "\"/>\n";
    const double marker_s[2] = {1.125, 2.0};
    for (double s : marker_s) {
        const double v = lambda_of(s);
        os << "  <circle cx=\"" << detail::fmt_sig(X(s), 8) << "\" cy=\""
           << detail::fmt_sig(Y(v), 8) << "\" r=\"5\" fill=\"black\" data-s=\""
           << detail::fmt_sig(s, 17) << "\" data-lambda=\"" << detail::fmt_sig(v, 17) << "\"/>\n";
    }
    os << "  <text x=\"330\" y=\"30\" font-size=\"14\" text-anchor=\"middle\">oscillation speed "
          "threshold vs sup delay integral</text>\n";
    os << "</svg>\n";
    return os.str();
}

// ------------------------------------------------------------------- reports

inline std::string report_to_text(const OscillationReport& r) {
    std::ostringstream os;
    os << "window.t1 = " << detail::fmt_sig(r.window_t1, 12) << "\n";
    os << "window.end = " << detail::fmt_sig(r.window_end, 12) << "\n";
    os << "oscillatory = " << (r.oscillatory ? "true" : "false") << "\n";
    os << "sup_delay_integral = " << detail::fmt_sig(r.sup_delay_integral, 12) << "\n";
    os << "tau_max = " << detail::fmt_sig(r.tau_max, 12) << "\n";
    os << "ell.measured = "
       << (r.ell_measured ? detail::fmt_sig(*r.ell_measured, 12) : std::string("n/a")) << "\n";
    os << "zeros.count = " << r.zeros.size() << "\n";
    os << "zeros =";
    for (double z : r.zeros) os << " " << detail::fmt_sig(z, 12);
    os << "\n";
    os << "segments.count = " << r.segments.size() << "\n";
    for (const SignSegment& s : r.segments) {
        os << "segment = " << detail::fmt_sig(s.a, 12) << " " << detail::fmt_sig(s.b, 12) << " "
           << (s.sign >= 0 ? "+1" : "-1") << " " << detail::fmt_sig(s.mass, 12) << " "
           << (s.censored ? "censored" : "interior") << "\n";
    }
    return os.str();
}

inline std::string certificate_to_text(const Certificate& c) {
    std::ostringstream os;
    os << "theorem = " << to_string(c.theorem) << "\n";
    os << "factor = " << detail::fmt_sig(c.factor, 12) << "\n";
    os << "verdict = " << c.verdict << "\n";
    for (const HypothesisCheck& h : c.measured) {
        os << "hypothesis = " << h.name << " value " << detail::fmt_sig(h.value, 12)
           << " threshold " << detail::fmt_sig(h.threshold, 12) << " "
           << (h.satisfied ? "ok" : "violated") << "\n";
    }
    if (c.constants) {
        const DecayConstants& k = *c.constants;
        os << "constants.d = " << detail::fmt_sig(k.d, 12) << "\n";
        os << "constants.beta = " << k.beta << "\n";
        os << "constants.M = " << detail::fmt_sig(k.M, 12) << "\n";
        os << "constants.gamma = " << detail::fmt_sig(k.gamma, 12) << "\n";
        os << "constants.delta = " << detail::fmt_sig(k.delta, 12) << "\n";
    }
    return os.str();
}

} // namespace delayosc
