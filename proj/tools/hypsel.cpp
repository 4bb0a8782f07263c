// hypsel: bounds, simulations, sweeps, constant calibration and real-data
// selection for on-line hypothesis selection.
//
// Exit codes: 0 success, 2 validation, 3 I/O, 4 calibration failure,
// 5 malformed input data.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hypsel/bounds.hpp"
#include "hypsel/experiments.hpp"
#include "hypsel/hypotheses.hpp"
#include "hypsel/selectors.hpp"

namespace {

using namespace hypsel;

enum Exit : int { kOk = 0, kValidation = 2, kIo = 3, kCalibration = 4, kMalformed = 5 };

struct ExitError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, std::string message) { throw ExitError{code, std::move(message)}; }

constexpr std::pair<const char*, const char*> kExperimentKeys[] = {
    {"algo", "bs | cs | as (default as)"},
    {"n", "number of hypotheses, a multiple of 9 (default 18)"},
    {"delta", "confidence parameter (default 0.01)"},
    {"gamma0", "true margin of the best hypothesis (default 0.2)"},
    {"gamma", "assumed lower bound on gamma0 (default gamma0)"},
    {"c", "tail-bound constant (default 4)"},
    {"dec", "variable | fixed weight decrement for cs (default variable)"},
    {"bcs", "simple | full threshold form for cs (default simple)"},
    {"dist", "symmetric | positive | negative class layout (default symmetric)"},
    {"runs", "number of trials (default 30)"},
    {"seed", "base seed (default 1)"},
    {"jobs", "worker threads; output does not depend on it (default 1)"},
    {"max-steps", "per-trial step cap (default unlimited)"},
    {"fixed-patterns", "true to reuse one pattern realization across trials"},
};

// Experiment flags are captured as raw strings and applied through the same
// path as config-file entries: defaults < config file < command line.
struct ExperimentFlags {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_path;
    std::string class_file;

    void add_to(CLI::App& app) {
        for (const auto& [key, help] : kExperimentKeys)
            options[key] = app.add_option(std::string("--") + key, values[key], help);
        app.add_option("--config", config_path, "key = value config file (flags override it)");
        app.add_option("--class-file", class_file, "class-definition file (id, accuracy records)");
    }

    ExperimentConfig build() const {
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) fail(kIo, "cannot read config file '" + config_path + "'");
            try {
                read_experiment_config(in, cfg);
            } catch (const ParseError& e) {
                fail(kValidation, config_path + ": " + e.what());
            }
        }
        for (const auto& entry : kExperimentKeys) {
            const std::string key = entry.first;
            if (options.at(key)->count() == 0) continue;
            try {
                apply_config_entry(cfg, key, values.at(key));
            } catch (const std::invalid_argument& e) {
                fail(kValidation, std::string("--") + e.what());
            }
        }
        if (!class_file.empty()) {
            std::ifstream in(class_file);
            if (!in) fail(kIo, "cannot read class file '" + class_file + "'");
            try {
                cfg.custom_class = read_class_definition(in);
            } catch (const ParseError& e) {
                fail(kMalformed, class_file + ": " + e.what());
            }
        }
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            fail(kValidation, std::string("invalid configuration: ") + e.what());
        }
        return cfg;
    }
};

// Output sink: a file when a path is given, otherwise stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) fail(kIo, "cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void finish() {
        stream().flush();
        if (!stream()) fail(kIo, "write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

// ---------------------------------------------------------------------------

struct BoundsArgs {
    std::int64_t n = 0;
    double delta = 0, gamma = 0, gamma0 = 0, c = 0;
};

int cmd_bounds(const BoundsArgs& a) {
    std::ostringstream out;
    try {
        BoundParams{a.n, a.delta, a.gamma, a.gamma0, a.c}.validate();
        out << "quantity,value\n";
        out << "t_bs," << sample_size_bs(a.n, a.delta, a.gamma, a.c) << '\n';
        out << "b_cs_full," << format_real(b_cs(a.n, a.delta, a.gamma, a.c, BcsVariant::full)) << '\n';
        out << "b_cs_simple," << format_real(b_cs(a.n, a.delta, a.gamma, a.c, BcsVariant::simple)) << '\n';
        out << "threshold_b," << format_real(threshold_b(a.n, a.delta, a.gamma, a.c, BcsVariant::simple)) << '\n';
        out << "t_cs_avg," << format_real(t_cs_avg(a.n, a.delta, a.gamma, a.gamma0, a.c)) << '\n';
        out << "t_as_worst," << format_real(t_as_worst(a.n, a.delta, a.gamma0, a.c)) << '\n';
        out << "t_as_empirical," << format_real(t_as_empirical(a.n, a.delta, a.gamma0, a.c)) << '\n';
        out << "as_warmup," << as_warmup(a.n, a.delta, a.c) << '\n';
    } catch (const std::domain_error& e) {
        fail(kValidation, std::string("invalid bound parameters: ") + e.what());
    }
    std::cout << out.str();
    return kOk;
}

int cmd_simulate(const ExperimentFlags& flags, const std::string& csv_path) {
    const auto cfg = flags.build();
    Sink sink(csv_path);
    const auto table = run_trials(cfg);
    write_trials_csv(sink.stream(), table);
    sink.finish();
    return kOk;
}

struct SweepArgs {
    std::string param = "gamma0";
    std::string algos = "bs,cs,as";
    std::optional<double> from, to, step;
    std::string csv;
};

int cmd_sweep(const ExperimentFlags& flags, const SweepArgs& a) {
    auto base = flags.build();
    std::vector<Algorithm> algos;
    for (auto token : split(a.algos, ',')) {
        const auto alg = parse_algorithm(trim(token));
        if (!alg) fail(kValidation, "--algos: unknown algorithm '" + std::string(token) + "'");
        algos.push_back(*alg);
    }
    if (a.param != "gamma0" && a.param != "gamma") fail(kValidation, "--param: expected gamma0 or gamma");
    Grid grid = a.param == "gamma0" ? kDefaultMarginGrid : kDefaultLowerBoundGrid;
    if (a.from) grid.from = *a.from;
    if (a.to) grid.to = *a.to;
    if (a.step) grid.step = *a.step;

    std::vector<std::vector<SweepRow>> per_algo;
    try {
        for (Algorithm alg : algos) {
            ExperimentConfig cfg = base;
            cfg.algorithm = alg;
            per_algo.push_back(a.param == "gamma0" ? sweep_gamma0(cfg, grid) : sweep_gamma(cfg, grid));
        }
    } catch (const std::invalid_argument& e) {
        fail(kValidation, std::string("invalid sweep: ") + e.what());
    }

    Sink sink(a.csv);
    write_sweep_header(sink.stream());
    const std::size_t points = per_algo.empty() ? 0 : per_algo.front().size();
    for (std::size_t i = 0; i < points; ++i)
        for (const auto& rows : per_algo) write_sweep_rows(sink.stream(), std::span(&rows[i], 1));
    sink.finish();
    return kOk;
}

struct CalibrateArgs {
    CalibrationGrid grid;
    std::string csv;
};

int cmd_calibrate(const ExperimentFlags& flags, const CalibrateArgs& a) {
    const auto cfg = flags.build();
    CalibrationResult result;
    try {
        result = calibrate_optimal_c(cfg, a.grid);
    } catch (const std::invalid_argument& e) {
        fail(kValidation, std::string("invalid calibration grid: ") + e.what());
    }
    if (!a.csv.empty()) {
        Sink sink(a.csv);
        sink.stream() << "c,mistakes\n";
        for (const auto& p : result.trace) sink.stream() << format_real(p.c) << ',' << p.mistakes << '\n';
        sink.finish();
    }
    if (!result.ok) {
        std::cerr << "hypsel: calibration failed: " << result.trace.front().mistakes << " mistake(s) at c="
                  << format_real(result.trace.front().c) << '\n';
        return kCalibration;
    }
    std::cout << "safe_c," << format_real(result.c) << '\n';
    return kOk;
}

struct SelectArgs {
    std::string matrix;
    std::string algo = "as";
    std::optional<std::int64_t> m;
    double delta = 0.01;
    std::optional<double> gamma;
    double c = 4.0;
    std::string dec = "variable";
    std::string bcs = "simple";
    std::int64_t max_steps = kNoStepLimit;
};

int cmd_select(const SelectArgs& a) {
    const auto alg = parse_algorithm(a.algo);
    if (!alg) fail(kValidation, "--algo: expected bs, cs or as");
    const auto dec = parse_dec_mode(a.dec);
    if (!dec) fail(kValidation, "--dec: expected variable or fixed");
    const auto variant = parse_bcs_variant(a.bcs);
    if (!variant) fail(kValidation, "--bcs: expected simple or full");
    if (!(a.delta > 0.0 && a.delta < 1.0)) fail(kValidation, "--delta: must lie in (0,1)");
    if (!(a.c > 0.0)) fail(kValidation, "--c: must be positive");
    if (a.max_steps < 1) fail(kValidation, "--max-steps: must be >= 1");
    if (*alg == Algorithm::cs && !a.gamma) fail(kValidation, "--gamma: required for cs");
    if (*alg == Algorithm::bs && !a.m && !a.gamma) fail(kValidation, "--m or --gamma: required for bs");
    if (a.gamma && !(*a.gamma > 0.0 && *a.gamma < 1.0)) fail(kValidation, "--gamma: must lie in (0,1)");
    if (a.m && *a.m < 1) fail(kValidation, "--m: must be >= 1");

    std::ifstream in(a.matrix);
    if (!in) fail(kIo, "cannot read matrix file '" + a.matrix + "'");
    std::vector<SuccessVector> rows;
    try {
        rows = read_matrix_csv(in);
    } catch (const ParseError& e) {
        fail(kMalformed, a.matrix + ": " + e.what());
    }
    // Header width defines n even when there are no data rows.
    std::ifstream header_in(a.matrix);
    std::string header;
    std::getline(header_in, header);
    const std::size_t n = split(trim(header), ',').size();
    MatrixSource source(std::move(rows), n);

    SelectionResult r;
    switch (*alg) {
        case Algorithm::bs: {
            const auto m = a.m ? *a.m : sample_size_bs(static_cast<std::int64_t>(n), a.delta, *a.gamma, a.c);
            r = bs_run(source, m);
            break;
        }
        case Algorithm::cs:
            r = cs_run(source, CsParams{a.delta, *a.gamma, a.c, *dec, *variant}, a.max_steps);
            break;
        case Algorithm::as:
            r = as_run(source, AsParams{a.delta, a.c}, a.max_steps);
            break;
    }
    std::cout << "chosen," << r.chosen << '\n'
              << "steps," << r.steps << '\n'
              << "stop_reason," << to_string(r.stop_reason) << '\n';
    if (r.final_eps) std::cout << "final_eps," << format_real(*r.final_eps) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"On-line hypothesis selection: bounds, simulation and selection"};
    app.require_subcommand(1);

    BoundsArgs bounds;
    auto* bounds_cmd = app.add_subcommand("bounds", "print sample-complexity bounds");
    bounds_cmd->add_option("--n", bounds.n, "number of hypotheses")->required();
    bounds_cmd->add_option("--delta", bounds.delta, "confidence parameter")->required();
    bounds_cmd->add_option("--gamma", bounds.gamma, "lower bound on gamma0")->required();
    bounds_cmd->add_option("--gamma0", bounds.gamma0, "margin of the best hypothesis")->required();
    bounds_cmd->add_option("--c", bounds.c, "Hoeffding constant")->required();

    ExperimentFlags sim_flags;
    std::string sim_csv;
    auto* sim_cmd = app.add_subcommand("simulate", "run seeded trials, one CSV row per trial");
    sim_flags.add_to(*sim_cmd);
    sim_cmd->add_option("--csv", sim_csv, "output path (default stdout)");

    ExperimentFlags sweep_flags;
    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep gamma0 or gamma, one row per (value, algorithm)");
    sweep_flags.add_to(*sweep_cmd);
    sweep_cmd->add_option("--param", sweep.param, "gamma0 or gamma");
    sweep_cmd->add_option("--algos", sweep.algos, "comma-separated algorithms");
    sweep_cmd->add_option("--from", sweep.from, "first grid value");
    sweep_cmd->add_option("--to", sweep.to, "last grid value");
    sweep_cmd->add_option("--step", sweep.step, "grid step");
    sweep_cmd->add_option("--csv", sweep.csv, "output path (default stdout)");

    ExperimentFlags cal_flags;
    CalibrateArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "largest mistake-free constant c");
    cal_flags.add_to(*cal_cmd);
    cal_cmd->add_option("--c-min", cal.grid.c_min, "smallest constant tried");
    cal_cmd->add_option("--c-max", cal.grid.c_max, "largest constant tried");
    cal_cmd->add_option("--c-step", cal.grid.c_step, "constant grid step");
    cal_cmd->add_option("--csv", cal.csv, "write the (c, mistakes) trace to this CSV");

    SelectArgs sel;
    auto* sel_cmd = app.add_subcommand("select", "select a hypothesis from a prediction matrix");
    sel_cmd->add_option("--matrix", sel.matrix, "prediction-matrix CSV")->required();
    sel_cmd->add_option("--algo", sel.algo, "bs, cs or as");
    sel_cmd->add_option("--m", sel.m, "batch size for bs");
    sel_cmd->add_option("--delta", sel.delta, "confidence parameter");
    sel_cmd->add_option("--gamma", sel.gamma, "lower bound on gamma0 (bs, cs)");
    sel_cmd->add_option("--c", sel.c, "Hoeffding constant");
    sel_cmd->add_option("--dec", sel.dec, "variable or fixed (cs)");
    sel_cmd->add_option("--bcs", sel.bcs, "simple or full (cs)");
    sel_cmd->add_option("--max-steps", sel.max_steps, "cap on consumed examples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        if (*bounds_cmd) return cmd_bounds(bounds);
        if (*sim_cmd) return cmd_simulate(sim_flags, sim_csv);
        if (*sweep_cmd) return cmd_sweep(sweep_flags, sweep);
        if (*cal_cmd) return cmd_calibrate(cal_flags, cal);
        if (*sel_cmd) return cmd_select(sel);
    } catch (const ExitError& e) {
        std::cerr << "hypsel: " << e.message << '\n';
        return e.code;
    } catch (const std::invalid_argument& e) {
        std::cerr << "hypsel: " << e.what() << '\n';
        return kValidation;
    }
    return kOk;
}
