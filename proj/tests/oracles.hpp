#pragma once

// Test-only reference implementations. These deliberately avoid the code
// paths they check: the binomial oracle sums the pmf by recurrence in long
// double with an explicit integer cut, and the reference selectors keep the
// whole example sequence and recount from scratch at every step.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

// Pr[Bin(t, p) in [lo, hi]] by direct pmf recurrence.
inline long double binomial_range(std::int64_t t, long double p, std::int64_t lo, std::int64_t hi) {
    if (lo < 0) lo = 0;
    if (hi > t) hi = t;
    if (lo > hi) return 0.0L;
    const long double q = 1.0L - p;
    long double pmf = std::pow(q, static_cast<long double>(t));
    long double sum = 0.0L;
    for (std::int64_t k = 0; k <= hi; ++k) {
        if (k >= lo) sum += pmf;
        pmf = pmf * static_cast<long double>(t - k) / static_cast<long double>(k + 1) * p / q;
    }
    return sum;
}

inline long double upper_at_least(std::int64_t t, long double p, std::int64_t k_min) {
    return binomial_range(t, p, k_min, t);
}

inline long double lower_at_most(std::int64_t t, long double p, std::int64_t k_max) {
    return binomial_range(t, p, 0, k_max);
}

struct Outcome {
    std::size_t chosen;
    std::int64_t steps;
    bool stopped;
};

inline std::size_t argmax(const std::vector<long long>& xs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > xs[best]) best = i;
    return best;
}

// Constrained selection with weights recomputed from the stored prefix.
// `fixed` uses w = # - t/2; otherwise w = sum(1{h correct} - n'/n).
inline Outcome constrained(const std::vector<std::vector<std::uint8_t>>& seq, std::size_t n, double b, bool fixed) {
    for (std::size_t t = 1; t <= seq.size(); ++t) {
        // Weights scaled by n (variable) or 2 (fixed) stay integral.
        std::vector<long long> w(n, 0);
        const long long scale = fixed ? 2 : static_cast<long long>(n);
        for (std::size_t s = 0; s < t; ++s) {
            long long winners = 0;
            for (auto bit : seq[s]) winners += bit;
            for (std::size_t h = 0; h < n; ++h) {
                if (fixed) w[h] += seq[s][h] ? 1 : -1;
                else w[h] += static_cast<long long>(n) * seq[s][h] - winners;
            }
        }
        bool crossed = false;
        for (std::size_t h = 0; h < n; ++h)
            if (static_cast<double>(w[h]) >= b * static_cast<double>(scale)) crossed = true;
        if (crossed) return {argmax(w), static_cast<std::int64_t>(t), true};
        if (t == seq.size()) return {argmax(w), static_cast<std::int64_t>(t), false};
    }
    return {0, 0, false};
}

// Adaptive selection evaluating the literal while-guard at every step,
// starting from eps = 1/5 at t = 0 (no warmup shortcut).
inline Outcome adaptive(const std::vector<std::vector<std::uint8_t>>& seq, std::size_t n, double delta, double c) {
    double eps = 0.2;
    for (std::size_t t = 0;; ++t) {
        std::vector<long long> counts(n, 0);
        for (std::size_t s = 0; s < t; ++s)
            for (std::size_t h = 0; h < n; ++h) counts[h] += seq[s][h];
        const double tt = static_cast<double>(t);
        bool all_below = true;
        for (auto k : counts)
            if (!(static_cast<double>(k) <= tt / 2.0 + 5.0 * tt * eps / 2.0)) all_below = false;
        if (!all_below) return {argmax(counts), static_cast<std::int64_t>(t), true};
        if (t == seq.size()) return {argmax(counts), static_cast<std::int64_t>(t), false};
        eps = std::sqrt(4.0 * std::log(3.0 * static_cast<double>(n) / delta) / (c * (tt + 1.0)));
    }
}

}  // namespace oracle
