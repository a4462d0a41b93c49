#ifndef CMRW_IO_HPP
#define CMRW_IO_HPP

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomize.hpp"
#include "ctmc.hpp"
#include "error.hpp"
#include "geometric.hpp"
#include "negbin.hpp"
#include "pmf.hpp"
#include "smile.hpp"

namespace cmrw::io {

using nlohmann::json;

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, origin + ": " + e.what());
    }
}

inline json load_json(const std::string& path) { return parse_json_text(read_text(path), path); }

inline void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
    out << doc.dump(2) << '\n';
}

inline std::vector<double> number_array(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw Error(ErrorKind::Parse, std::string("missing field \"") + key + "\"");
    const json& arr = doc.at(key);
    if (!arr.is_array()) throw Error(ErrorKind::Parse, std::string("field \"") + key + "\" must be an array");
    std::vector<double> out;
    for (const json& x : arr) {
        if (!x.is_number()) throw Error(ErrorKind::Parse, std::string("field \"") + key + "\" must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

/// {"states": [...], "masses": [...]}; masses under `floor` are dropped.
inline TargetPMF pmf_from_json(const json& doc, double floor = kDefaultMassFloor) {
    const auto states = number_array(doc, "states");
    const auto masses = number_array(doc, "masses");
    double total = 0.0;
    for (double m : masses) total += m;
    if (std::abs(total - 1.0) > 1e-6) {
        throw Error(ErrorKind::InvalidInput, "masses sum to " + std::to_string(total) + ", expected 1");
    }
    return TargetPMF::from_raw(states, masses, floor);
}

inline TargetPMF load_pmf(const std::string& path, double floor = kDefaultMassFloor) {
    return pmf_from_json(load_json(path), floor);
}

inline json pmf_to_json(const TargetPMF& pmf) {
    return json{{"states", std::vector<double>(pmf.grid().states().begin(), pmf.grid().states().end())},
                {"masses", std::vector<double>(pmf.masses().begin(), pmf.masses().end())}};
}

/// {"strikes": [...], "calls": [...], "forward": optional}
inline QuoteGrid quotes_from_json(const json& doc) {
    QuoteGrid q;
    q.strikes = number_array(doc, "strikes");
    q.calls = number_array(doc, "calls");
    if (doc.contains("forward") && !doc.at("forward").is_null()) {
        if (!doc.at("forward").is_number()) throw Error(ErrorKind::Parse, "field \"forward\" must be a number");
        q.forward = doc.at("forward").get<double>();
    }
    return q;
}

/// Rows "x,F(x)"; a non-numeric first row is taken as a header.
inline DiscreteCdf empirical_cdf_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> xs;
    std::vector<double> fs;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(ErrorKind::Parse, "CSV row " + std::to_string(row) + " lacks a comma");
        try {
            const double x = std::stod(line.substr(0, comma));
            const double f = std::stod(line.substr(comma + 1));
            xs.push_back(x);
            fs.push_back(f);
        } catch (const std::exception&) {
            if (xs.empty() && row == 1) continue;
            throw Error(ErrorKind::Parse, "CSV row " + std::to_string(row) + " is not numeric");
        }
    }
    return DiscreteCdf::from_cdf_points(xs, fs);
}

inline json vector_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

/// Infinite atoms are written as null.
inline json atoms_json(const StringMeasure& sm) {
    json arr = json::array();
    for (double a : sm.atoms) {
        if (std::isfinite(a)) arr.push_back(a);
        else arr.push_back(nullptr);
    }
    return arr;
}

inline json geometric_report(const TargetPMF& p, const GeometricSolution& sol) {
    json doc = pmf_to_json(p);
    doc["mode"] = "geometric";
    doc["grid"] = doc["states"];
    doc["a"] = sol.a;
    doc["a_min"] = min_feasible_a(p);
    doc["q"] = vector_json(sol.q.values());
    doc["feasible"] = sol.feasible;
    doc["residual"] = sol.feasible ? json(sol.residual) : json(nullptr);
    if (!sol.feasible) doc["violated_state"] = sol.violated_state;
    return doc;
}

/// With `t`, also exports the Gamma(r, t/r)-time generator and its string.
inline json negbin_report(const TargetPMF& p, const NegBinSolution& sol, double verify_residual,
                          std::optional<double> t = std::nullopt) {
    json doc = pmf_to_json(p);
    doc["mode"] = "negbin";
    doc["grid"] = doc["states"];
    doc["r"] = sol.r;
    doc["lambda"] = vector_json(sol.lambda.values());
    doc["a0"] = sol.a0;
    doc["solver_residual"] = sol.residual;
    doc["law_residual"] = sol.law_residual;
    doc["residual"] = verify_residual;
    doc["iterations"] = sol.iterations;
    doc["used_fallback"] = sol.used_fallback;
    doc["method"] = sol.method;
    if (t) {
        const Generator gen = rates_from_lambda(p.grid(), sol.lambda, sol.r, *t);
        doc["t"] = *t;
        doc["rates"] = vector_json(gen.rates().values());
        if (p.size() > 2 && gen.rates().min_interior() > 0.0) doc["string_atoms"] = atoms_json(string_measure(gen));
    }
    return doc;
}

inline json deterministic_report(const TargetPMF& p, double t, const DeterministicCalibration& cal,
                                 double tolerance) {
    json doc = pmf_to_json(p);
    doc["mode"] = "deterministic";
    doc["grid"] = doc["states"];
    doc["t"] = t;
    doc["rates"] = vector_json(cal.generator.rates().values());
    if (p.size() > 2 && cal.generator.rates().min_interior() > 0.0) {
        doc["string_atoms"] = atoms_json(string_measure(cal.generator));
    } else {
        doc["string_atoms"] = json::array();
        for (std::size_t j = 0; j < p.size(); ++j) doc["string_atoms"].push_back(nullptr);
    }
    doc["residual"] = cal.residual;
    doc["tolerance"] = tolerance;
    doc["converged"] = cal.converged;
    doc["r_final"] = cal.r_final;
    doc["extrapolation_order"] = cal.extrapolation_order;
    doc["polished"] = cal.polished;
    if (!cal.diagnostic.empty()) doc["diagnostic"] = cal.diagnostic;
    json trace = json::array();
    for (const auto& e : cal.trace) {
        trace.push_back({{"r", e.r},
                         {"lambda", e.lambda},
                         {"rates", e.rates},
                         {"residual", e.residual},
                         {"best_residual", e.best_residual}});
    }
    doc["trace"] = std::move(trace);
    return doc;
}

inline TargetPMF pmf_from_report(const json& doc) {
    return TargetPMF(StateGrid(number_array(doc, "states")), number_array(doc, "masses"));
}

inline std::string report_mode(const json& doc) {
    if (!doc.is_object() || !doc.contains("mode") || !doc.at("mode").is_string()) {
        throw Error(ErrorKind::Parse, "report lacks a \"mode\" field");
    }
    return doc.at("mode").get<std::string>();
}

inline Generator generator_from_report(const json& doc) {
    if (!doc.contains("rates")) throw Error(ErrorKind::InvalidInput, "report carries no generator rates");
    return Generator(StateGrid(number_array(doc, "grid")), RateVector(number_array(doc, "rates")));
}

inline double report_number(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_number()) {
        throw Error(ErrorKind::Parse, std::string("report lacks numeric \"") + key + "\"");
    }
    return doc.at(key).get<double>();
}

}  // namespace cmrw::io

#endif  // CMRW_IO_HPP
