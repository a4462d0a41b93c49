#include "cli_app.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmrw/cmrw.hpp"
#include "cmrw/io.hpp"

namespace cmrw::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};

/// Options left unset on the command line are filled from a flat JSON object.
void apply_config(CLI::App& app, const std::string& path) {
    const json doc = io::load_json(path);
    if (!doc.is_object()) throw Error(ErrorKind::Parse, path + ": config must be a JSON object");
    auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (const auto& [key, value] : doc.items()) {
        if (key == "config") continue;
        CLI::Option* opt = app.get_option_no_throw("--" + key);
        if (opt == nullptr) throw Error(ErrorKind::InvalidInput, path + ": unknown setting \"" + key + "\"");
        if (opt->count() > 0) continue;
        std::vector<std::string> parts;
        if (value.is_array()) {
            for (const json& v : value) parts.push_back(text(v));
        } else {
            parts.push_back(text(value));
        }
        opt->add_result(parts);
        opt->run_callback();
    }
}

void emit_json(const json& doc, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << doc.dump(2) << '\n';
    } else {
        io::write_json(path, doc);
    }
}

/// Writes to `path`, or to `out` when the path is empty.
void emit_text(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path);
    if (!file) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
    file << text;
}

// ---------------------------------------------------------------- calibrate

struct CalibrationSettings {
    std::string mode = "deterministic";
    std::optional<double> a;
    int r = 2;
    double t = 1.0;
    std::optional<double> tolerance;
    int r0 = 2;
    int r_max = 1 << 14;
    bool polish = false;
    bool no_extrapolate = false;
    double damping = 0.5;
    double mass_floor = kDefaultMassFloor;
};

void add_calibration_options(CLI::App* sub, CalibrationSettings& s) {
    sub->add_option("--mode", s.mode, "geometric, negbin or deterministic")
        ->check(CLI::IsMember({"geometric", "negbin", "deterministic"}))
        ->capture_default_str();
    sub->add_option("--a", s.a, "parameter of the geometric/negative binomial time")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--r", s.r, "negative binomial order")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--t", s.t, "deterministic horizon; for negbin, exports Gamma(r, t/r) rates")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tolerance", s.tolerance, "acceptance tolerance of the residual")->check(CLI::PositiveNumber);
    sub->add_option("--r0", s.r0, "first order of the continuation")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--r-max", s.r_max, "largest order of the continuation")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--polish", s.polish, "Levenberg-Marquardt polish of the final rates");
    sub->add_flag("--no-extrapolate", s.no_extrapolate, "disable Richardson extrapolation in 1/r");
    sub->add_option("--damping", s.damping, "fixed-point damping in (0,1]")->check(CLI::Range(1e-6, 1.0))->capture_default_str();
    sub->add_option("--mass-floor", s.mass_floor, "drop masses below this and renormalize")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
}

struct CalibrationOutcome {
    json report;
    bool ok = false;
    std::string message;
    std::vector<TraceEntry> trace;
};

CalibrationOutcome calibrate_pmf(const TargetPMF& p, const CalibrationSettings& s, bool negbin_t_given) {
    CalibrationOutcome res;
    FixedPointOptions fp;
    fp.damping = s.damping;

    if (s.mode == "geometric") {
        if (!s.a) throw UsageError("--mode geometric needs --a");
        const GeometricSolution sol = solve_geometric(p, *s.a);
        const double tol = s.tolerance.value_or(1e-10);
        res.report = io::geometric_report(p, sol);
        res.report["tolerance"] = tol;
        res.ok = sol.feasible && sol.residual <= tol;
        if (!sol.feasible) {
            res.message = "a = " + num(*s.a) + " is infeasible (q = " + num(sol.q[sol.violated_state]) +
                          " at state " + num(p.grid()[sol.violated_state]) + "); need a >= " + num(min_feasible_a(p));
        } else if (!res.ok) {
            res.message = "residual " + num(sol.residual) + " above tolerance " + num(tol);
        }
        return res;
    }

    if (s.mode == "negbin") {
        if (s.tolerance) fp.tolerance = *s.tolerance;
        const double tol = fp.resolved_tolerance(p.size());
        NegBinSolution sol;
        try {
            sol = solve_negbin(p, s.r, fp);
        } catch (const NoConvergenceError& e) {
            const auto& d = e.diagnostics();
            res.report = io::pmf_to_json(p);
            res.report["mode"] = "negbin";
            res.report["converged"] = false;
            res.report["diagnostics"] = {{"r", d.r},
                                         {"best_residual", d.best_residual},
                                         {"best_lambda", d.best_lambda},
                                         {"iterations", d.iterations},
                                         {"last_stage", d.last_stage}};
            res.message = e.what();
            return res;
        }
        std::vector<double> checked = s.a ? std::vector<double>{*s.a} : sample_a_values(sol.a0, 10);
        double worst = 0.0;
        for (double a : checked) worst = std::max(worst, verify_negbin(p, sol, a));
        res.report = io::negbin_report(p, sol, worst, negbin_t_given ? std::optional<double>(s.t) : std::nullopt);
        res.report["a_checked"] = checked;
        res.report["tolerance"] = 10.0 * tol;
        res.report["converged"] = true;
        res.ok = worst <= 10.0 * tol;
        if (!res.ok) res.message = "resolvent residual " + num(worst) + " above " + num(10.0 * tol);
        return res;
    }

    DeterministicOptions opts;
    opts.r0 = s.r0;
    opts.r_max = s.r_max;
    opts.tolerance = s.tolerance.value_or(1e-6);
    opts.extrapolate = !s.no_extrapolate;
    opts.newton_polish = s.polish;
    opts.fixed_point = fp;
    const DeterministicCalibration cal = calibrate_deterministic(p, s.t, opts);
    res.report = io::deterministic_report(p, s.t, cal, opts.tolerance);
    res.ok = cal.converged;
    res.message = cal.diagnostic;
    res.trace = cal.trace;
    return res;
}

std::string trace_csv(const std::vector<TraceEntry>& trace) {
    std::ostringstream s;
    s << "r,residual,best_residual";
    const std::size_t m = trace.empty() ? 0 : trace.front().rates.size();
    for (std::size_t j = 0; j < m; ++j) s << ",rate_" << j;
    s << '\n';
    for (const auto& e : trace) {
        s << e.r << ',' << num(e.residual) << ',' << num(e.best_residual);
        for (double x : e.rates) s << ',' << num(x);
        s << '\n';
    }
    return s.str();
}

struct CalibrateArgs {
    std::string input;
    std::string output;
    std::string trace_csv;
    CalibrationSettings settings;
};

int cmd_calibrate(const CalibrateArgs& args, bool t_given, std::ostream& out, std::ostream& err) {
    const TargetPMF p = io::load_pmf(args.input, args.settings.mass_floor);
    const CalibrationOutcome res = calibrate_pmf(p, args.settings, t_given);
    emit_json(res.report, args.output, out);
    if (!args.trace_csv.empty()) emit_text(trace_csv(res.trace), args.trace_csv, out);
    if (!res.ok) {
        err << "cmrw: calibration failed: " << res.message << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

// ------------------------------------------------------------------- verify

struct VerifyArgs {
    std::string report;
    std::optional<double> tolerance;
};

int cmd_verify(const VerifyArgs& args, std::ostream& out) {
    const json doc = io::load_json(args.report);
    const std::string mode = io::report_mode(doc);
    const TargetPMF p = io::pmf_from_report(doc);
    const InitialVector v = initial_vector(p);
    struct Row {
        std::string check;
        std::string parameter;
        double residual;
    };
    std::vector<Row> rows;
    double tol = 0.0;

    if (mode == "geometric") {
        GeometricSolution sol;
        sol.a = io::report_number(doc, "a");
        sol.q = QVector(io::number_array(doc, "q"));
        rows.push_back({"resolvent", "a=" + num(sol.a), verify_geometric(p, sol)});
        tol = args.tolerance.value_or(1e-10);
    } else if (mode == "negbin") {
        NegBinSolution sol;
        sol.r = static_cast<int>(io::report_number(doc, "r"));
        sol.lambda = LambdaVector(io::number_array(doc, "lambda"));
        rows.push_back({"fixed_point", "r=" + std::to_string(sol.r), fixed_point_residual(p, sol.lambda, sol.r)});
        for (double a : sample_a_values(a_zero(sol.lambda), 10)) {
            rows.push_back({"resolvent", "a=" + num(a), verify_negbin(p, sol, a)});
        }
        if (doc.contains("rates") && doc.contains("t")) {
            const double t = io::report_number(doc, "t");
            const auto law = gamma_marginal(v.weights, io::generator_from_report(doc), sol.r, t);
            rows.push_back({"gamma", "t=" + num(t), sup_distance(law, p.masses())});
        }
        tol = args.tolerance.value_or(doc.contains("tolerance") ? io::report_number(doc, "tolerance") : 1e-8);
    } else if (mode == "deterministic") {
        const double t = io::report_number(doc, "t");
        rows.push_back({"matexp", "t=" + num(t), deterministic_residual(p, v, io::generator_from_report(doc), t)});
        tol = args.tolerance.value_or(doc.contains("tolerance") ? io::report_number(doc, "tolerance") : 1e-6);
    } else {
        throw Error(ErrorKind::Parse, "unknown report mode \"" + mode + "\"");
    }

    out << "check,parameter,residual\n";
    bool ok = true;
    for (const Row& row : rows) {
        out << row.check << ',' << row.parameter << ',' << num(row.residual) << '\n';
        ok = ok && row.residual <= tol;
    }
    return ok ? kExitOk : kExitNumerical;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string report;
    std::string output;
    std::uint64_t paths = 100000;
    std::uint64_t seed = 20240601;
    std::string time = "auto";
    std::optional<int> r;
    std::optional<double> a;
    std::optional<double> t;
    unsigned threads = 0;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    const json doc = io::load_json(args.report);
    const std::string mode = io::report_mode(doc);
    const TargetPMF p = io::pmf_from_report(doc);
    const InitialVector v = initial_vector(p);
    SimConfig cfg;
    cfg.paths = args.paths;
    cfg.seed = args.seed;
    cfg.threads = args.threads;

    const bool continuous = args.time == "fixed" || args.time == "gamma" || (args.time == "auto" && mode == "deterministic");
    EmpiricalMarginal emp;
    if (continuous) {
        const Generator gen = io::generator_from_report(doc);
        const double t = args.t ? *args.t : io::report_number(doc, "t");
        if (args.time == "gamma") {
            int r = 1;
            if (args.r) r = *args.r;
            else if (doc.contains("r")) r = static_cast<int>(io::report_number(doc, "r"));
            else if (doc.contains("r_final")) r = static_cast<int>(io::report_number(doc, "r_final"));
            cfg.time = GammaTime{r, t};
        } else {
            cfg.time = FixedTime{t};
        }
        emp = simulate_ctmc(gen, v, cfg);
    } else if (mode == "geometric") {
        const double a = args.a ? *args.a : io::report_number(doc, "a");
        cfg.time = GeometricTime{a};
        emp = simulate_discrete(build_P(p.grid(), QVector(io::number_array(doc, "q"))), p.grid(), v, cfg);
    } else if (mode == "negbin") {
        const LambdaVector lambda(io::number_array(doc, "lambda"));
        const int r = args.r ? *args.r : static_cast<int>(io::report_number(doc, "r"));
        const double a = args.a ? *args.a : 0.5 * (a_zero(lambda) + 1.0);
        cfg.time = NegBinTime{r, a};
        emp = simulate_discrete(build_P(p.grid(), q_of_a(lambda, a)), p.grid(), v, cfg);
    } else {
        throw UsageError("cannot simulate a \"" + mode + "\" report with --time " + args.time);
    }

    std::ostringstream csv;
    csv << "state,target_mass,empirical_freq,abs_error\n";
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double f = emp.frequency(j);
        csv << num(p.grid()[j]) << ',' << num(p[j]) << ',' << num(f) << ',' << num(std::abs(f - p[j])) << '\n';
    }
    emit_text(csv.str(), args.output, out);
    return kExitOk;
}

// ------------------------------------------------------------------ atomize

struct AtomizeArgs {
    std::string family;
    int n = 8;
    double lo = 0.0;
    double hi = 1.0;
    double p = 0.5;
    std::vector<double> atoms;
    std::vector<double> masses;
    double mu = 0.0;
    double sigma = 1.0;
    std::string csv;
    std::string output;
};

int cmd_atomize(const AtomizeArgs& args, std::ostream& out) {
    std::unique_ptr<CdfOracle> law;
    if (args.family == "uniform") {
        law = std::make_unique<UniformCdf>(args.lo, args.hi);
    } else if (args.family == "bernoulli") {
        law = std::make_unique<DiscreteCdf>(DiscreteCdf::bernoulli(args.p));
    } else if (args.family == "discrete") {
        law = std::make_unique<DiscreteCdf>(args.atoms, args.masses);
    } else if (args.family == "lognormal") {
        law = std::make_unique<LognormalCdf>(args.mu, args.sigma);
    } else {
        if (args.csv.empty()) throw UsageError("--family empirical needs --csv");
        law = std::make_unique<DiscreteCdf>(io::empirical_cdf_from_csv(io::read_text(args.csv)));
    }
    json doc = io::pmf_to_json(atomize(*law, args.n));
    doc["family"] = args.family;
    doc["n"] = args.n;
    emit_json(doc, args.output, out);
    return kExitOk;
}

// -------------------------------------------------------------------- smile

struct SmileArgs {
    std::string quotes;
    std::string output;
    double mass_floor = kDefaultMassFloor;
};

int cmd_smile(const SmileArgs& args, std::ostream& out) {
    const QuoteGrid quotes = io::quotes_from_json(io::load_json(args.quotes));
    const TargetPMF p = smile_to_pmf(quotes, args.mass_floor);
    json doc = io::pmf_to_json(p);
    doc["forward"] = expectation(p);
    emit_json(doc, args.output, out);
    return kExitOk;
}

// -------------------------------------------------------------------- price

struct PriceArgs {
    std::string report;
    std::vector<double> strikes;
    std::optional<double> horizon;
};

int cmd_price(const PriceArgs& args, std::ostream& out) {
    const json doc = io::load_json(args.report);
    const TargetPMF p = io::pmf_from_report(doc);
    const Generator gen = io::generator_from_report(doc);
    const double s = args.horizon ? *args.horizon : io::report_number(doc, "t");
    if (!(s >= 0.0)) throw Error(ErrorKind::InvalidParameter, "horizon must be nonnegative");
    const std::vector<double> law = matexp_marginal(initial_vector(p).weights, gen, s);
    out << "strike,price\n";
    for (double k : args.strikes) {
        double price = 0.0;
        for (std::size_t j = 0; j < law.size(); ++j) price += std::max(p.grid()[j] - k, 0.0) * law[j];
        out << num(k) << ',' << num(price) << '\n';
    }
    return kExitOk;
}

// -------------------------------------------------------------------- batch

struct BatchArgs {
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    unsigned jobs = 0;
    CalibrationSettings settings;
};

struct BatchRow {
    std::string input;
    std::string report;
    std::string status;
    double residual = std::numeric_limits<double>::quiet_NaN();
    int code = kExitOk;
};

BatchRow calibrate_one(const std::string& input, const BatchArgs& args, bool t_given) {
    BatchRow row;
    row.input = input;
    try {
        const TargetPMF p = io::load_pmf(input, args.settings.mass_floor);
        const CalibrationOutcome res = calibrate_pmf(p, args.settings, t_given);
        row.report = (fs::path(args.out_dir) / (fs::path(input).stem().string() + ".report.json")).string();
        io::write_json(row.report, res.report);
        if (res.report.contains("residual") && res.report.at("residual").is_number()) {
            row.residual = res.report.at("residual").get<double>();
        }
        row.status = res.ok ? "ok" : "failed: " + res.message;
        row.code = res.ok ? kExitOk : kExitNumerical;
    } catch (const Error& e) {
        row.status = std::string("error: ") + e.what();
        row.code = e.is_numerical() ? kExitNumerical : kExitInput;
    } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
        row.code = kExitInput;
    }
    return row;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

int cmd_batch(const BatchArgs& args, bool t_given, std::ostream& out) {
    fs::create_directories(args.out_dir);
    const unsigned jobs = args.jobs != 0 ? args.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<BatchRow> rows(args.inputs.size());
    for (std::size_t begin = 0; begin < args.inputs.size(); begin += jobs) {
        const std::size_t end = std::min(args.inputs.size(), begin + jobs);
        std::vector<std::future<BatchRow>> wave;
        for (std::size_t i = begin; i < end; ++i) {
            wave.push_back(std::async(std::launch::async, calibrate_one, std::cref(args.inputs[i]), std::cref(args), t_given));
        }
        for (std::size_t i = begin; i < end; ++i) rows[i] = wave[i - begin].get();
    }
    int code = kExitOk;
    out << "input,report,status,residual\n";
    for (const BatchRow& row : rows) {
        out << csv_field(row.input) << ',' << csv_field(row.report) << ',' << csv_field(row.status) << ','
            << (std::isnan(row.residual) ? std::string() : num(row.residual)) << '\n';
        code = std::max(code, row.code);
    }
    return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Calibrate martingale birth-death walks to a target law", "cmrw"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cmrw 0.1.0");
    std::string config;
    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", config, "flat JSON file of option defaults")->check(CLI::ExistingFile);
        return sub;
    };

    CalibrateArgs cal;
    CLI::App* calibrate = with_config(app.add_subcommand("calibrate", "calibrate to a PMF and write a report"));
    calibrate->add_option("input", cal.input, "PMF JSON with states and masses")->required();
    calibrate->add_option("-o,--output", cal.output, "report path (default stdout)");
    calibrate->add_option("--trace-csv", cal.trace_csv, "continuation trace as CSV");
    add_calibration_options(calibrate, cal.settings);

    VerifyArgs ver;
    CLI::App* verify = with_config(app.add_subcommand("verify", "recompute the residuals of a report"));
    verify->add_option("report", ver.report, "calibration report JSON")->required();
    verify->add_option("--tolerance", ver.tolerance, "pass threshold (default from the report)");

    SimulateArgs sim;
    CLI::App* simulate = with_config(app.add_subcommand("simulate", "Monte Carlo check of a report"));
    simulate->add_option("report", sim.report, "calibration report JSON")->required();
    simulate->add_option("-o,--output", sim.output, "CSV path (default stdout)");
    simulate->add_option("--paths", sim.paths, "number of paths")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
    simulate->add_option("--time", sim.time, "auto, discrete, fixed or gamma")
        ->check(CLI::IsMember({"auto", "discrete", "fixed", "gamma"}))
        ->capture_default_str();
    simulate->add_option("--r", sim.r, "order of the random time")->check(CLI::PositiveNumber);
    simulate->add_option("--a", sim.a, "parameter of the discrete random time")->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--t", sim.t, "horizon (default from the report)")->check(CLI::NonNegativeNumber);
    simulate->add_option("--threads", sim.threads, "worker threads (0 = all cores)");

    AtomizeArgs atm;
    CLI::App* atomize_cmd = with_config(app.add_subcommand("atomize", "quantile discretization of a law"));
    atomize_cmd->add_option("--family", atm.family, "uniform, bernoulli, discrete, lognormal or empirical")
        ->check(CLI::IsMember({"uniform", "bernoulli", "discrete", "lognormal", "empirical"}))
        ->required();
    atomize_cmd->add_option("--n", atm.n, "mesh level (mesh 2^-n)")->check(CLI::Range(1, 52))->capture_default_str();
    atomize_cmd->add_option("--lo", atm.lo, "uniform lower end")->capture_default_str();
    atomize_cmd->add_option("--hi", atm.hi, "uniform upper end")->capture_default_str();
    atomize_cmd->add_option("--p", atm.p, "bernoulli success probability")->capture_default_str();
    atomize_cmd->add_option("--atoms", atm.atoms, "discrete atoms");
    atomize_cmd->add_option("--masses", atm.masses, "discrete masses");
    atomize_cmd->add_option("--mu", atm.mu, "lognormal location")->capture_default_str();
    atomize_cmd->add_option("--sigma", atm.sigma, "lognormal scale")->capture_default_str();
    atomize_cmd->add_option("--csv", atm.csv, "empirical CDF rows x,F(x)");
    atomize_cmd->add_option("-o,--output", atm.output, "PMF path (default stdout)");

    SmileArgs sml;
    CLI::App* smile = with_config(app.add_subcommand("smile", "call quotes to an implied PMF"));
    smile->add_option("quotes", sml.quotes, "JSON with strikes, calls and optional forward")->required();
    smile->add_option("-o,--output", sml.output, "PMF path (default stdout)");
    smile->add_option("--mass-floor", sml.mass_floor, "drop masses below this")->check(CLI::NonNegativeNumber)->capture_default_str();

    PriceArgs prc;
    CLI::App* price = with_config(app.add_subcommand("price", "call prices under a calibrated generator"));
    price->add_option("report", prc.report, "report with rates")->required();
    price->add_option("--strike", prc.strikes, "one or more strikes")->required();
    price->add_option("--horizon", prc.horizon, "horizon s (default: the report's t)");

    BatchArgs bat;
    CLI::App* batch = with_config(app.add_subcommand("batch", "calibrate several PMFs concurrently"));
    batch->add_option("inputs", bat.inputs, "PMF JSON files")->required();
    batch->add_option("--out-dir", bat.out_dir, "directory for the reports")->capture_default_str();
    batch->add_option("--jobs", bat.jobs, "concurrent calibrations (0 = all cores)");
    add_calibration_options(batch, bat.settings);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        if (!config.empty()) apply_config(*chosen, config);
        if (chosen == calibrate) return cmd_calibrate(cal, calibrate->count("--t") > 0, out, err);
        if (chosen == verify) return cmd_verify(ver, out);
        if (chosen == simulate) return cmd_simulate(sim, out);
        if (chosen == atomize_cmd) return cmd_atomize(atm, out);
        if (chosen == smile) return cmd_smile(sml, out);
        if (chosen == price) return cmd_price(prc, out);
        return cmd_batch(bat, batch->count("--t") > 0, out);
    } catch (const CLI::Error& e) {
        err << "cmrw: " << e.what() << '\n';
        return kExitInput;
    } catch (const Error& e) {
        err << "cmrw: " << e.what() << '\n';
        return e.is_numerical() ? kExitNumerical : kExitInput;
    } catch (const json::exception& e) {
        err << "cmrw: parse: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "cmrw: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace cmrw::cli
