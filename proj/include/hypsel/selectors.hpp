#pragma once

// On-line hypothesis selection: Batch, Constrained and Adaptive Selection.
//
// Each selector consumes SuccessVectors one at a time. CsState and AsState
// are step-wise state machines; the *_run drivers pull from an
// ExampleSource until the stopping rule fires or the source runs dry.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "hypsel/bounds.hpp"
#include "hypsel/hypotheses.hpp"

namespace hypsel {

enum class DecMode { variable, fixed };
enum class StopReason { threshold, exhausted, step_limit };

inline std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::threshold: return "threshold";
        case StopReason::exhausted: return "exhausted";
        case StopReason::step_limit: return "step_limit";
    }
    return "unknown";
}

inline constexpr std::int64_t kNoStepLimit = std::numeric_limits<std::int64_t>::max();

struct SelectionResult {
    std::size_t chosen = 0;
    std::int64_t steps = 0;
    std::optional<double> final_eps;               // adaptive selection only
    std::optional<std::vector<double>> final_weights;  // constrained selection only
    StopReason stop_reason = StopReason::threshold;
};

namespace detail {

template <class T>
std::size_t argmax_lowest(const std::vector<T>& xs) {
    return static_cast<std::size_t>(std::distance(xs.begin(), std::max_element(xs.begin(), xs.end())));
}

inline void check_width(std::span<const std::uint8_t> v, std::size_t n) {
    if (v.size() != n)
        throw std::invalid_argument("success vector has " + std::to_string(v.size()) +
                                    " entries, expected " + std::to_string(n));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Constrained Selection
//
// Weights are kept as integers W(h) = scale * w(h):
//   variable dec: scale = n, success adds n - n', failure subtracts n'
//   fixed dec:    scale = 2, success adds 1, failure subtracts 1 (W = 2# - t)
// and compared against scale * B.
class CsState {
public:
    CsState(std::size_t n, double threshold, DecMode mode)
        : mode_(mode),
          scale_(mode == DecMode::variable ? static_cast<std::int64_t>(n) : 2),
          threshold_(threshold),
          scaled_threshold_(threshold * static_cast<double>(scale_)),
          counts_(n, 0),
          weights_(n, 0) {
        if (n == 0) throw std::invalid_argument("constrained selection needs n >= 1");
        if (!(threshold > 0.0)) throw std::invalid_argument("threshold B must be positive");
    }

    // One while-iteration. Returns the chosen id once some weight reaches B.
    std::optional<std::size_t> step(std::span<const std::uint8_t> v) {
        detail::check_width(v, n());
        ++t_;
        const auto n_signed = static_cast<std::int64_t>(n());
        const std::int64_t winners = std::count_if(v.begin(), v.end(), [](auto b) { return b != 0; });
        const std::int64_t gain = mode_ == DecMode::variable ? n_signed - winners : 1;
        const std::int64_t loss = mode_ == DecMode::variable ? winners : 1;
        bool crossed = false;
        for (std::size_t h = 0; h < n(); ++h) {
            if (v[h]) {
                ++counts_[h];
                weights_[h] += gain;
            } else {
                weights_[h] -= loss;
            }
            crossed = crossed || static_cast<double>(weights_[h]) >= scaled_threshold_;
        }
        if (!crossed) return std::nullopt;
        return leader();
    }

    std::size_t n() const { return counts_.size(); }
    std::int64_t t() const { return t_; }
    DecMode mode() const { return mode_; }
    std::int64_t scale() const { return scale_; }
    double threshold() const { return threshold_; }
    double scaled_threshold() const { return scaled_threshold_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    const std::vector<std::int64_t>& scaled_weights() const { return weights_; }
    double weight(std::size_t h) const { return static_cast<double>(weights_.at(h)) / static_cast<double>(scale_); }
    std::size_t leader() const { return detail::argmax_lowest(weights_); }

    std::vector<double> weights() const {
        std::vector<double> out(n());
        for (std::size_t h = 0; h < n(); ++h) out[h] = weight(h);
        return out;
    }

private:
    DecMode mode_;
    std::int64_t scale_;
    double threshold_;
    double scaled_threshold_;
    std::int64_t t_ = 0;
    std::vector<std::int64_t> counts_;
    std::vector<std::int64_t> weights_;
};

// ---------------------------------------------------------------------------
// Adaptive Selection
//
// Stops once some count exceeds t/2 + 5 t eps_t / 2 with
// eps_t = sqrt(4 ln(3n/delta) / (c t)). The guard cannot fail before
// eps_t < 1/5, so it is only evaluated from the warmup step on.
class AsState {
public:
    AsState(std::size_t n, double delta, double c)
        : delta_(delta),
          c_(c),
          log_term_(n ? std::log(3.0 * static_cast<double>(n) / delta) : 0.0),
          warmup_(as_warmup(static_cast<std::int64_t>(n), delta, c)),
          counts_(n, 0) {
        if (n == 0) throw std::invalid_argument("adaptive selection needs n >= 1");
    }

    std::optional<std::size_t> step(std::span<const std::uint8_t> v) {
        detail::check_width(v, n());
        ++t_;
        for (std::size_t h = 0; h < n(); ++h)
            if (v[h]) ++counts_[h];
        eps_ = std::sqrt(4.0 * log_term_ / (c_ * static_cast<double>(t_)));
        if (t_ < warmup_) return std::nullopt;
        const std::size_t best = detail::argmax_lowest(counts_);
        if (static_cast<double>(counts_[best]) > guard()) return best;
        return std::nullopt;
    }

    // t/2 + 5 t eps_t / 2 at the current step.
    double guard() const {
        const auto tt = static_cast<double>(t_);
        return tt / 2.0 + 2.5 * tt * eps_;
    }

    std::size_t n() const { return counts_.size(); }
    std::int64_t t() const { return t_; }
    double eps() const { return eps_; }
    double delta() const { return delta_; }
    double c() const { return c_; }
    std::int64_t warmup() const { return warmup_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    std::size_t leader() const { return detail::argmax_lowest(counts_); }

private:
    double delta_;
    double c_;
    double log_term_;
    std::int64_t warmup_;
    std::int64_t t_ = 0;
    double eps_ = 0.2;
    std::vector<std::int64_t> counts_;
};

// ---------------------------------------------------------------------------
// Drivers

// Batch Selection: take exactly m examples, output the best empirical count.
template <ExampleSource Source>
SelectionResult bs_run(Source& source, std::int64_t m) {
    if (m < 1) throw std::invalid_argument("batch size m must be >= 1");
    std::vector<std::int64_t> counts(source.n(), 0);
    SelectionResult result;
    for (; result.steps < m; ++result.steps) {
        auto v = source.next();
        if (!v) {
            result.stop_reason = StopReason::exhausted;
            break;
        }
        detail::check_width(*v, counts.size());
        for (std::size_t h = 0; h < counts.size(); ++h)
            if ((*v)[h]) ++counts[h];
    }
    result.chosen = detail::argmax_lowest(counts);
    return result;
}

struct CsParams {
    double delta = 0.01;
    double gamma = 0.1;
    double c = 4.0;
    DecMode dec = DecMode::variable;
    BcsVariant variant = BcsVariant::simple;
};

template <ExampleSource Source>
SelectionResult cs_run(Source& source, const CsParams& p, std::int64_t max_steps = kNoStepLimit) {
    const double b = threshold_b(static_cast<std::int64_t>(source.n()), p.delta, p.gamma, p.c, p.variant);
    CsState state(source.n(), b, p.dec);
    SelectionResult result;
    result.stop_reason = StopReason::step_limit;
    while (state.t() < max_steps) {
        auto v = source.next();
        if (!v) {
            result.stop_reason = StopReason::exhausted;
            break;
        }
        if (state.step(*v)) {
            result.stop_reason = StopReason::threshold;
            break;
        }
    }
    result.chosen = state.leader();
    result.steps = state.t();
    result.final_weights = state.weights();
    return result;
}

struct AsParams {
    double delta = 0.01;
    double c = 4.0;
};

template <ExampleSource Source>
SelectionResult as_run(Source& source, const AsParams& p, std::int64_t max_steps = kNoStepLimit) {
    AsState state(source.n(), p.delta, p.c);
    SelectionResult result;
    result.stop_reason = StopReason::step_limit;
    while (state.t() < max_steps) {
        auto v = source.next();
        if (!v) {
            result.stop_reason = StopReason::exhausted;
            break;
        }
        if (state.step(*v)) {
            result.stop_reason = StopReason::threshold;
            break;
        }
    }
    result.chosen = state.leader();
    result.steps = state.t();
    result.final_eps = state.eps();
    return result;
}

}  // namespace hypsel
