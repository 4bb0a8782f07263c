#pragma once

// Repeated seeded trials over synthetic hypothesis classes, parameter sweeps
// and the derived studies (dec-mode ratio, final epsilon, constant
// calibration).
//
// Trial i uses seed_i = mix_seed(base_seed, i) and writes into slot i, so
// results do not depend on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hypsel/bounds.hpp"
#include "hypsel/hypotheses.hpp"
#include "hypsel/random.hpp"
#include "hypsel/selectors.hpp"
#include "hypsel/text_io.hpp"

namespace hypsel {

enum class Algorithm { bs, cs, as };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::bs: return "bs";
        case Algorithm::cs: return "cs";
        case Algorithm::as: return "as";
    }
    return "?";
}

inline std::string_view to_string(Distribution d) {
    switch (d) {
        case Distribution::symmetric: return "symmetric";
        case Distribution::positive: return "positive";
        case Distribution::negative: return "negative";
    }
    return "?";
}

inline std::string_view to_string(DecMode d) { return d == DecMode::fixed ? "fixed" : "variable"; }
inline std::string_view to_string(BcsVariant v) { return v == BcsVariant::full ? "full" : "simple"; }

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
    if (s == "bs") return Algorithm::bs;
    if (s == "cs") return Algorithm::cs;
    if (s == "as") return Algorithm::as;
    return std::nullopt;
}

inline std::optional<Distribution> parse_distribution(std::string_view s) {
    if (s == "symmetric") return Distribution::symmetric;
    if (s == "positive") return Distribution::positive;
    if (s == "negative") return Distribution::negative;
    return std::nullopt;
}

inline std::optional<DecMode> parse_dec_mode(std::string_view s) {
    if (s == "variable") return DecMode::variable;
    if (s == "fixed") return DecMode::fixed;
    return std::nullopt;
}

inline std::optional<BcsVariant> parse_bcs_variant(std::string_view s) {
    if (s == "simple") return BcsVariant::simple;
    if (s == "full") return BcsVariant::full;
    return std::nullopt;
}

// Sub-stream index for patterns shared across trials (fixed_patterns mode).
inline constexpr std::uint64_t kSharedPatternStream = 0xFFFF'FFFF'FFFF'FFFFULL;

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::as;
    std::size_t n = 18;
    double delta = 0.01;
    double gamma0 = 0.2;
    std::optional<double> gamma;  // bs/cs lower bound; defaults to gamma0
    double c = 4.0;
    DecMode dec = DecMode::variable;
    BcsVariant variant = BcsVariant::simple;
    Distribution distribution = Distribution::symmetric;
    std::optional<HypothesisClass> custom_class;  // overrides distribution/n/gamma0
    std::int64_t runs = 30;
    std::uint64_t base_seed = 1;
    bool fixed_patterns = false;
    unsigned jobs = 1;
    std::int64_t max_steps = kNoStepLimit;

    double effective_gamma() const { return gamma.value_or(custom_class ? custom_class->gamma0() : gamma0); }

    // Quantized class every trial of this config runs against.
    HypothesisClass hypothesis_class() const {
        if (custom_class) return custom_class->quantized();
        return make_class(distribution, gamma0, n / 9).quantized();
    }

    void validate() const {
        if (runs < 1) throw std::invalid_argument("runs must be >= 1");
        if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
        if (max_steps < 1) throw std::invalid_argument("max-steps must be >= 1");
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
        if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
        if (!custom_class) {
            if (n == 0 || n % 9 != 0) throw std::invalid_argument("n must be a positive multiple of 9");
            if (!(gamma0 > 0.0 && gamma0 <= 0.3)) throw std::invalid_argument("gamma0 must lie in (0, 0.3]");
        }
        if (algorithm != Algorithm::as) {
            const double g = effective_gamma();
            const double g0 = custom_class ? custom_class->gamma0() : gamma0;
            if (!(g > 0.0 && g < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
            if (g > g0 + 1e-12) throw std::invalid_argument("gamma must not exceed gamma0");
        }
    }
};

struct TrialResult {
    std::int64_t trial_index = 0;
    std::uint64_t seed = 0;
    std::size_t chosen = 0;
    std::int64_t steps = 0;
    bool mistake = false;
    StopReason stop_reason = StopReason::threshold;
    std::optional<double> final_eps;  // as
    std::optional<double> ratio;      // cs: steps / (B / gamma0)
};

struct AggregateResult {
    std::int64_t runs = 0;
    double mean_steps = 0.0;
    double stddev_steps = 0.0;
    double error_rate = 0.0;
    std::optional<double> mean_final_eps;
    std::optional<double> mean_margin_over_eps;  // mean of gamma0 / final eps
    std::optional<double> mean_ratio;
};

struct TrialTable {
    std::vector<TrialResult> trials;
    AggregateResult aggregate;
};

inline TrialResult run_trial(const ExperimentConfig& cfg, const HypothesisClass& cls, std::int64_t index) {
    TrialResult r;
    r.trial_index = index;
    r.seed = mix_seed(cfg.base_seed, static_cast<std::uint64_t>(index));

    Rng pattern_rng(cfg.fixed_patterns ? mix_seed(cfg.base_seed, kSharedPatternStream) : mix_seed(r.seed, 0));
    const auto patterns = make_patterns(cls, pattern_rng);
    PatternSource source(patterns, mix_seed(r.seed, 1));
    const auto n = static_cast<std::int64_t>(cls.n());

    SelectionResult sel;
    switch (cfg.algorithm) {
        case Algorithm::bs:
            sel = bs_run(source, sample_size_bs(n, cfg.delta, cfg.effective_gamma(), cfg.c));
            break;
        case Algorithm::cs: {
            const CsParams p{cfg.delta, cfg.effective_gamma(), cfg.c, cfg.dec, cfg.variant};
            sel = cs_run(source, p, cfg.max_steps);
            const double b = threshold_b(n, p.delta, p.gamma, p.c, p.variant);
            r.ratio = static_cast<double>(sel.steps) / (b / cls.gamma0());
            break;
        }
        case Algorithm::as:
            sel = as_run(source, AsParams{cfg.delta, cfg.c}, cfg.max_steps);
            r.final_eps = sel.final_eps;
            break;
    }
    r.chosen = sel.chosen;
    r.steps = sel.steps;
    r.stop_reason = sel.stop_reason;
    r.mistake = !cls.in_good_set(sel.chosen);
    return r;
}

inline AggregateResult aggregate(const std::vector<TrialResult>& trials, double gamma0) {
    AggregateResult a;
    a.runs = static_cast<std::int64_t>(trials.size());
    if (trials.empty()) return a;
    const auto runs = static_cast<double>(trials.size());
    double steps = 0.0, mistakes = 0.0, eps = 0.0, margin_ratio = 0.0, ratio = 0.0;
    bool has_eps = false, has_ratio = false;
    for (const auto& t : trials) {
        steps += static_cast<double>(t.steps);
        mistakes += t.mistake ? 1.0 : 0.0;
        if (t.final_eps) {
            has_eps = true;
            eps += *t.final_eps;
            margin_ratio += gamma0 / *t.final_eps;
        }
        if (t.ratio) {
            has_ratio = true;
            ratio += *t.ratio;
        }
    }
    a.mean_steps = steps / runs;
    a.error_rate = mistakes / runs;
    if (trials.size() > 1) {
        double ss = 0.0;
        for (const auto& t : trials) ss += std::pow(static_cast<double>(t.steps) - a.mean_steps, 2);
        a.stddev_steps = std::sqrt(ss / (runs - 1.0));
    }
    if (has_eps) {
        a.mean_final_eps = eps / runs;
        a.mean_margin_over_eps = margin_ratio / runs;
    }
    if (has_ratio) a.mean_ratio = ratio / runs;
    return a;
}

inline TrialTable run_trials(const ExperimentConfig& cfg) {
    cfg.validate();
    const HypothesisClass cls = cfg.hypothesis_class();
    TrialTable table;
    table.trials.resize(static_cast<std::size_t>(cfg.runs));

    const auto worker = [&](std::atomic<std::int64_t>& next, std::exception_ptr& error, std::mutex& m) {
        for (std::int64_t i = next++; i < cfg.runs; i = next++) {
            try {
                table.trials[static_cast<std::size_t>(i)] = run_trial(cfg, cls, i);
            } catch (...) {
                const std::lock_guard lock(m);
                if (!error) error = std::current_exception();
            }
        }
    };

    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto workers = std::min<std::int64_t>(cfg.jobs, cfg.runs);
    if (workers <= 1) {
        worker(next, error, error_mutex);
    } else {
        std::vector<std::jthread> pool;
        for (std::int64_t w = 0; w < workers; ++w)
            pool.emplace_back([&] { worker(next, error, error_mutex); });
    }
    if (error) std::rethrow_exception(error);

    table.aggregate = aggregate(table.trials, cls.gamma0());
    return table;
}

// ---------------------------------------------------------------------------
// Sweeps

struct Grid {
    double from = 0.04;
    double to = 0.296;
    double step = 0.004;

    std::vector<double> values() const {
        if (!(step > 0.0) || to < from) throw std::invalid_argument("grid must satisfy from <= to and step > 0");
        const auto count = static_cast<std::int64_t>(std::floor((to - from) / step + 1e-9)) + 1;
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(count));
        for (std::int64_t k = 0; k < count; ++k)
            out.push_back(std::round((from + static_cast<double>(k) * step) * 1e9) / 1e9);
        return out;
    }
};

// 0.04, 0.044, ..., 0.296: 65 margins, i.e. best accuracy 54% to 79.6% in 0.4% steps.
inline constexpr Grid kDefaultMarginGrid{0.04, 0.296, 0.004};
inline constexpr Grid kDefaultLowerBoundGrid{0.04, 0.2, 0.004};

struct SweepRow {
    double param = 0.0;
    Algorithm algorithm = Algorithm::as;
    AggregateResult aggregate;
};

// One row per gamma0. For bs/cs the lower bound gamma follows gamma0 unless
// the template sets it explicitly.
inline std::vector<SweepRow> sweep_gamma0(const ExperimentConfig& base, const Grid& grid = kDefaultMarginGrid) {
    std::vector<SweepRow> rows;
    for (double g0 : grid.values()) {
        ExperimentConfig cfg = base;
        cfg.gamma0 = g0;
        rows.push_back({g0, cfg.algorithm, run_trials(cfg).aggregate});
    }
    return rows;
}

// gamma0 fixed by the template, the lower bound gamma swept.
inline std::vector<SweepRow> sweep_gamma(const ExperimentConfig& base, const Grid& grid = kDefaultLowerBoundGrid) {
    const auto values = grid.values();
    for (double g : values)
        if (g > base.gamma0 + 1e-12)
            throw std::invalid_argument("lower bound gamma must not exceed gamma0");
    std::vector<SweepRow> rows;
    for (double g : values) {
        ExperimentConfig cfg = base;
        cfg.gamma = g;
        rows.push_back({g, cfg.algorithm, run_trials(cfg).aggregate});
    }
    return rows;
}

struct DecRatioRow {
    Distribution distribution = Distribution::symmetric;
    double gamma0 = 0.0;
    double mean_ratio = 0.0;
    double mean_steps = 0.0;
};

// Constrained selection with gamma = gamma0: mean of steps / (B / gamma0).
inline std::vector<DecRatioRow> dec_ratio_study(const ExperimentConfig& base, const Grid& grid,
                                                std::span<const Distribution> distributions) {
    std::vector<DecRatioRow> rows;
    for (Distribution d : distributions)
        for (double g0 : grid.values()) {
            ExperimentConfig cfg = base;
            cfg.algorithm = Algorithm::cs;
            cfg.distribution = d;
            cfg.custom_class.reset();
            cfg.gamma0 = g0;
            cfg.gamma.reset();
            const auto agg = run_trials(cfg).aggregate;
            rows.push_back({d, g0, agg.mean_ratio.value_or(0.0), agg.mean_steps});
        }
    return rows;
}

struct FinalEpsRow {
    double gamma0 = 0.0;
    double mean_final_eps = 0.0;
    double mean_margin_over_eps = 0.0;
    double mean_steps = 0.0;
};

inline std::vector<FinalEpsRow> final_eps_study(const ExperimentConfig& base, const Grid& grid = kDefaultMarginGrid) {
    std::vector<FinalEpsRow> rows;
    for (double g0 : grid.values()) {
        ExperimentConfig cfg = base;
        cfg.algorithm = Algorithm::as;
        cfg.gamma0 = g0;
        const auto agg = run_trials(cfg).aggregate;
        rows.push_back({g0, agg.mean_final_eps.value_or(0.0), agg.mean_margin_over_eps.value_or(0.0),
                        agg.mean_steps});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Constant calibration

struct CalibrationPoint {
    double c = 0.0;
    std::int64_t mistakes = 0;
};

struct CalibrationResult {
    bool ok = false;
    double c = 0.0;  // largest zero-mistake constant before the first failure
    std::vector<CalibrationPoint> trace;
};

// Walks the constant grid from c_min upward (sample sizes shrink as c grows)
// with the same trial seeds at every c, and stops at the first constant that
// makes a mistake. Fails when even c_min makes one.
inline CalibrationResult calibrate_optimal_c(const ExperimentConfig& base, const CalibrationGrid& grid = {}) {
    if (!(grid.c_step > 0.0 && grid.c_min > 0.0 && grid.c_max >= grid.c_min))
        throw std::invalid_argument("invalid constant grid");
    CalibrationResult result;
    const auto k_lo = static_cast<std::int64_t>(std::ceil(grid.c_min / grid.c_step - 1e-9));
    const auto k_hi = static_cast<std::int64_t>(std::floor(grid.c_max / grid.c_step + 1e-9));
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        ExperimentConfig cfg = base;
        cfg.c = static_cast<double>(k) * grid.c_step;
        const auto table = run_trials(cfg);
        const auto mistakes = static_cast<std::int64_t>(
            std::count_if(table.trials.begin(), table.trials.end(), [](const auto& t) { return t.mistake; }));
        result.trace.push_back({cfg.c, mistakes});
        if (mistakes > 0) break;
        result.ok = true;
        result.c = cfg.c;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Config file: `key = value` lines using the CLI flag names.

inline void apply_config_entry(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    const auto bad = [&](const char* what) {
        return std::invalid_argument(std::string(key) + ": " + what);
    };
    const auto real = [&]() {
        const auto v = parse_double(value);
        if (!v) throw bad("expected a number");
        return *v;
    };
    if (key == "algo") {
        const auto a = parse_algorithm(value);
        if (!a) throw bad("expected bs, cs or as");
        cfg.algorithm = *a;
    } else if (key == "n") {
        const auto v = parse_int<std::size_t>(value);
        if (!v) throw bad("expected an integer");
        cfg.n = *v;
    } else if (key == "delta") {
        cfg.delta = real();
    } else if (key == "gamma0") {
        cfg.gamma0 = real();
    } else if (key == "gamma") {
        cfg.gamma = real();
    } else if (key == "c") {
        cfg.c = real();
    } else if (key == "dec") {
        const auto d = parse_dec_mode(value);
        if (!d) throw bad("expected variable or fixed");
        cfg.dec = *d;
    } else if (key == "bcs") {
        const auto v = parse_bcs_variant(value);
        if (!v) throw bad("expected simple or full");
        cfg.variant = *v;
    } else if (key == "dist") {
        const auto d = parse_distribution(value);
        if (!d) throw bad("expected symmetric, positive or negative");
        cfg.distribution = *d;
    } else if (key == "runs") {
        const auto v = parse_int<std::int64_t>(value);
        if (!v) throw bad("expected an integer");
        cfg.runs = *v;
    } else if (key == "seed") {
        const auto v = parse_int<std::uint64_t>(value);
        if (!v) throw bad("expected an unsigned integer");
        cfg.base_seed = *v;
    } else if (key == "jobs") {
        const auto v = parse_int<unsigned>(value);
        if (!v) throw bad("expected an unsigned integer");
        cfg.jobs = *v;
    } else if (key == "max-steps") {
        const auto v = parse_int<std::int64_t>(value);
        if (!v) throw bad("expected an integer");
        cfg.max_steps = *v;
    } else if (key == "fixed-patterns") {
        if (value == "true" || value == "1") cfg.fixed_patterns = true;
        else if (value == "false" || value == "0") cfg.fixed_patterns = false;
        else throw bad("expected true or false");
    } else {
        throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    }
}

inline void read_experiment_config(std::istream& in, ExperimentConfig& cfg) {
    for (const auto& kv : read_key_values(in)) {
        if (kv.key.empty()) throw ParseError(kv.line, "expected 'key = value'");
        try {
            apply_config_entry(cfg, kv.key, kv.value);
        } catch (const std::invalid_argument& e) {
            throw ParseError(kv.line, e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// CSV output. Reals use 6 significant digits so the tables are byte-stable.

inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

inline void write_trials_csv(std::ostream& out, const TrialTable& table) {
    out << "trial,seed,chosen,steps,mistake,final_eps,ratio\n";
    for (const auto& t : table.trials)
        out << t.trial_index << ',' << t.seed << ',' << t.chosen << ',' << t.steps << ',' << (t.mistake ? 1 : 0)
            << ',' << format_optional(t.final_eps) << ',' << format_optional(t.ratio) << '\n';
    const auto& a = table.aggregate;
    out << "mean,,," << format_real(a.mean_steps) << ',' << format_real(a.error_rate) << ','
        << format_optional(a.mean_final_eps) << ',' << format_optional(a.mean_ratio) << '\n';
    out << "stddev,,," << format_real(a.stddev_steps) << ",,,\n";
}

inline void write_sweep_header(std::ostream& out) {
    out << "param,algo,mean_steps,stddev,error_rate,mean_final_eps\n";
}

inline void write_sweep_rows(std::ostream& out, std::span<const SweepRow> rows) {
    for (const auto& r : rows)
        out << format_real(r.param) << ',' << to_string(r.algorithm) << ',' << format_real(r.aggregate.mean_steps)
            << ',' << format_real(r.aggregate.stddev_steps) << ',' << format_real(r.aggregate.error_rate) << ','
            << format_optional(r.aggregate.mean_final_eps) << '\n';
}

}  // namespace hypsel
