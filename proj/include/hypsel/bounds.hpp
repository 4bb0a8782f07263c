#pragma once

// Tail bounds and sample-complexity formulas for hypothesis selection.
//
// All functions are pure. Invalid arguments raise std::domain_error.
// Notation: n = |H|, delta = confidence, gamma = known lower bound on the
// best margin, gamma0 = true margin of the best hypothesis, c = constant in
// the Hoeffding tail exp(-c eps^2 t).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypsel {

enum class Tail { upper, lower };
enum class BcsVariant { full, simple };

struct BoundParams {
    std::int64_t n = 18;
    double delta = 0.01;
    double gamma = 0.1;
    std::optional<double> gamma0;
    double c = 4.0;

    void validate() const {
        if (n < 1) throw std::domain_error("n must be >= 1");
        if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0,1)");
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("gamma must lie in (0,1)");
        if (!(c > 0.0)) throw std::domain_error("c must be positive");
        if (gamma0) {
            if (!(*gamma0 > 0.0 && *gamma0 < 1.0)) throw std::domain_error("gamma0 must lie in (0,1)");
            if (gamma > *gamma0) throw std::domain_error("gamma must not exceed gamma0");
        }
    }
};

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

inline void check_common(std::int64_t n, double delta, double c) {
    require(n >= 1, "n must be >= 1");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
    require(c > 0.0, "c must be positive");
}

inline void check_margin(double g, const char* what) {
    require(g > 0.0 && g < 1.0, what);
}

// Thresholds within this distance of an integer are snapped to it, so decimal
// grids such as p=0.6, t=100 land on the intended integer boundary.
inline constexpr double kBoundarySnap = 1e-9;

inline double snap(double x) {
    const double r = std::round(x);
    return std::abs(x - r) < kBoundarySnap ? r : x;
}

inline double log_binomial_pmf(std::int64_t t, std::int64_t k, double log_p, double log_q) {
    const auto tt = static_cast<double>(t);
    const auto kk = static_cast<double>(k);
    return std::lgamma(tt + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(tt - kk + 1.0) +
           kk * log_p + (tt - kk) * log_q;
}

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double s = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - s) + x;
        else
            comp_ += (x - s) + sum_;
        sum_ = s;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace detail

// exp(-c eps^2 t), the common bound on both binomial tails.
inline double hoeffding_tail(double eps, std::int64_t t, double c) {
    detail::require(eps > 0.0, "eps must be positive");
    detail::require(c > 0.0, "c must be positive");
    detail::require(t >= 0, "t must be nonnegative");
    return std::exp(-c * eps * eps * static_cast<double>(t));
}

// Exact tail of Bin(t, p):
//   upper: Pr[X > pt + eps t], i.e. k >= floor(pt + eps t) + 1
//   lower: Pr[X < pt - eps t], i.e. k <= ceil(pt - eps t) - 1
// Terms are accumulated from the boundary outward (descending magnitude,
// since the boundary lies beyond the mode) with compensated summation.
inline double exact_binomial_tail(double p, double eps, std::int64_t t, Tail side) {
    detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
    detail::require(eps > 0.0, "eps must be positive");
    detail::require(t >= 1, "t must be >= 1");

    const auto tt = static_cast<double>(t);
    std::int64_t first = 0;
    std::int64_t last = 0;
    int stride = 1;
    if (side == Tail::upper) {
        const double cut = detail::snap(p * tt + eps * tt);
        if (cut >= tt) return 0.0;
        first = static_cast<std::int64_t>(std::floor(cut)) + 1;
        last = t;
        stride = 1;
    } else {
        const double cut = detail::snap(p * tt - eps * tt);
        if (cut <= 0.0) return 0.0;
        first = static_cast<std::int64_t>(std::ceil(cut)) - 1;
        last = 0;
        stride = -1;
    }

    // Degenerate success probabilities put all mass on one point.
    if (p == 0.0 || p == 1.0) {
        const std::int64_t atom = p == 0.0 ? 0 : t;
        const bool inside = stride > 0 ? atom >= first : atom <= first;
        return inside ? 1.0 : 0.0;
    }

    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    detail::CompensatedSum acc;
    for (std::int64_t k = first;; k += stride) {
        const double term = std::exp(detail::log_binomial_pmf(t, k, log_p, log_q));
        acc.add(term);
        // Past the boundary the pmf is nonincreasing, so the remainder is at
        // most (remaining terms) * term.
        const auto remaining = static_cast<double>(stride > 0 ? last - k : k - last);
        if (k == last || term * remaining < 1e-18 * acc.value()) break;
    }
    return std::min(1.0, acc.value());
}

struct CalibrationGrid {
    double c_step = 0.25;
    double c_min = 2.0;
    double c_max = 16.0;
};

// Largest c on {k * c_step} within [c_min, c_max] such that exp(-c eps^2 t)
// dominates both exact tails at every (p, eps, t) of the cross product.
// Returns c_min when no grid value qualifies.
inline double calibrate_constant(std::span<const double> p_grid, std::span<const double> eps_grid,
                                 std::span<const std::int64_t> t_grid,
                                 const CalibrationGrid& grid = {}) {
    detail::require(!p_grid.empty() && !eps_grid.empty() && !t_grid.empty(), "grids must be non-empty");
    detail::require(grid.c_step > 0.0 && grid.c_min > 0.0 && grid.c_max >= grid.c_min,
                    "invalid constant grid");

    struct Point {
        double x;     // eps^2 t
        double tail;  // exact tail probability, either side
    };
    std::vector<Point> points;
    for (double p : p_grid)
        for (double eps : eps_grid)
            for (std::int64_t t : t_grid) {
                const double x = eps * eps * static_cast<double>(t);
                for (Tail side : {Tail::upper, Tail::lower}) {
                    const double tail = exact_binomial_tail(p, eps, t, side);
                    if (tail > 0.0) points.push_back({x, tail});
                }
            }

    const auto dominates = [&](double c) {
        return std::all_of(points.begin(), points.end(),
                           [c](const Point& pt) { return std::exp(-c * pt.x) >= pt.tail; });
    };

    const auto k_lo = static_cast<std::int64_t>(std::ceil(grid.c_min / grid.c_step - 1e-9));
    const auto k_hi = static_cast<std::int64_t>(std::floor(grid.c_max / grid.c_step + 1e-9));
    double best = grid.c_min;
    // Admissible constants form a down-set, so scan upward until the first failure.
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const double c = static_cast<double>(k) * grid.c_step;
        if (!dominates(c)) break;
        best = c;
    }
    return best;
}

// ceil(16 ln(2n/delta) / (c gamma^2)), the batch sample size.
inline std::int64_t sample_size_bs(std::int64_t n, double delta, double gamma, double c) {
    detail::check_common(n, delta, c);
    detail::check_margin(gamma, "gamma must lie in (0,1)");
    const double m = 16.0 * std::log(2.0 * static_cast<double>(n) / delta) / (c * gamma * gamma);
    return static_cast<std::int64_t>(std::ceil(m));
}

inline double b_cs(std::int64_t n, double delta, double gamma, double c, BcsVariant variant) {
    detail::check_common(n, delta, c);
    detail::check_margin(gamma, "gamma must lie in (0,1)");
    const auto nn = static_cast<double>(n);
    const double scale = 16.0 / (c * gamma * gamma);
    double arg = 0.0;
    if (variant == BcsVariant::full) {
        const double e = std::numbers::e;
        arg = 32.0 * e * nn / (c * (e - 1.0) * delta * gamma * gamma);
    } else {
        arg = 2.0 * nn / delta;
    }
    detail::require(arg > 1.0, "degenerate parameters: logarithm argument must exceed 1");
    return scale * std::log(arg);
}

// Weight threshold B = 3 gamma b_cs / 4.
inline double threshold_b(std::int64_t n, double delta, double gamma, double c, BcsVariant variant) {
    return 3.0 * gamma * b_cs(n, delta, gamma, c, variant) / 4.0;
}

// Average constrained-selection complexity B / gamma0 (simple variant).
inline double t_cs_avg(std::int64_t n, double delta, double gamma, double gamma0, double c) {
    detail::check_margin(gamma0, "gamma0 must lie in (0,1)");
    detail::require(gamma <= gamma0, "gamma must not exceed gamma0");
    return threshold_b(n, delta, gamma, c, BcsVariant::simple) / gamma0;
}

inline double t_as_worst(std::int64_t n, double delta, double gamma0, double c) {
    detail::check_common(n, delta, c);
    detail::check_margin(gamma0, "gamma0 must lie in (0,1)");
    return 64.0 * std::log(3.0 * static_cast<double>(n) / delta) / (c * gamma0 * gamma0);
}

// Stopping tolerance observed empirically near gamma0 / 2.38.
inline constexpr double kAsEmpiricalRatio = 2.38;

inline double t_as_empirical(std::int64_t n, double delta, double gamma0, double c) {
    detail::check_common(n, delta, c);
    detail::check_margin(gamma0, "gamma0 must lie in (0,1)");
    const double r = kAsEmpiricalRatio;
    return 4.0 * r * r * std::log(3.0 * static_cast<double>(n) / delta) / (c * gamma0 * gamma0);
}

// Number of examples before the adaptive guard can first fail:
// ceil(4 ln(3n/delta) / (c (1/5)^2)).
inline std::int64_t as_warmup(std::int64_t n, double delta, double c) {
    detail::check_common(n, delta, c);
    const double t0 = 100.0 * std::log(3.0 * static_cast<double>(n) / delta) / c;
    return static_cast<std::int64_t>(std::ceil(t0));
}

// eps_t = sqrt(4 ln(3n/delta) / (c t)).
inline double as_epsilon(std::int64_t n, double delta, double c, std::int64_t t) {
    detail::check_common(n, delta, c);
    detail::require(t >= 1, "t must be >= 1");
    return std::sqrt(4.0 * std::log(3.0 * static_cast<double>(n) / delta) / (c * static_cast<double>(t)));
}

}  // namespace hypsel
