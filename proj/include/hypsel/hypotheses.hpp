#pragma once

// Hypothesis classes, success patterns and example sources.
//
// A hypothesis is modelled only through its accuracy p(h) = 1/2 + gamma_h.
// Each round of the simulation yields a SuccessVector whose entry h is 1 iff
// hypothesis h predicted the current example correctly.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypsel/random.hpp"
#include "hypsel/text_io.hpp"

namespace hypsel {

inline constexpr std::size_t kPatternLength = 1000;

// Accuracies are compared against the H>= threshold with this slack so that
// boundary values such as 0.6 = 0.5 + 0.2/2 land in H>=.
inline constexpr double kAccuracySlack = 1e-12;

using SuccessVector = std::vector<std::uint8_t>;

struct HypothesisSpec {
    std::size_t id = 0;
    double accuracy = 0.5;

    double margin() const { return accuracy - 0.5; }
};

struct Partition {
    std::vector<std::size_t> good;  // H>=: accuracy >= 1/2 + gamma0/2
    std::vector<std::size_t> bad;   // H<
};

class HypothesisClass {
public:
    explicit HypothesisClass(std::span<const double> accuracies,
                             std::optional<double> gamma0_override = std::nullopt) {
        if (accuracies.empty()) throw std::invalid_argument("hypothesis class must be non-empty");
        hypotheses_.reserve(accuracies.size());
        for (std::size_t id = 0; id < accuracies.size(); ++id) {
            const double p = accuracies[id];
            if (!(p > 0.0 && p < 1.0))
                throw std::invalid_argument("accuracy of hypothesis " + std::to_string(id) +
                                            " must lie in (0,1)");
            hypotheses_.push_back({id, p});
        }
        const double best = *std::max_element(accuracies.begin(), accuracies.end());
        gamma0_ = gamma0_override.value_or(best - 0.5);
        if (!(gamma0_ > 0.0 && gamma0_ < 0.5))
            throw std::invalid_argument("gamma0 must lie in (0,1/2): the best hypothesis must beat 1/2");
        overridden_ = gamma0_override.has_value();
    }

    HypothesisClass(std::initializer_list<double> accuracies)
        : HypothesisClass(std::span<const double>(accuracies.begin(), accuracies.size())) {}

    std::size_t n() const { return hypotheses_.size(); }
    double gamma0() const { return gamma0_; }
    const std::vector<HypothesisSpec>& hypotheses() const { return hypotheses_; }
    double accuracy(std::size_t id) const { return hypotheses_.at(id).accuracy; }

    std::vector<double> accuracies() const {
        std::vector<double> out;
        out.reserve(n());
        for (const auto& h : hypotheses_) out.push_back(h.accuracy);
        return out;
    }

    bool in_good_set(std::size_t id) const {
        return accuracy(id) >= 0.5 + gamma0_ / 2.0 - kAccuracySlack;
    }

    // Accuracies rounded to the resolution of a pattern of `length` bits,
    // i.e. the accuracies a pattern-driven simulation actually realizes.
    HypothesisClass quantized(std::size_t length = kPatternLength) const {
        std::vector<double> q;
        q.reserve(n());
        const auto len = static_cast<double>(length);
        for (const auto& h : hypotheses_) q.push_back(std::round(h.accuracy * len) / len);
        if (overridden_) return HypothesisClass(q, gamma0_);
        return HypothesisClass(q);
    }

private:
    std::vector<HypothesisSpec> hypotheses_;
    double gamma0_ = 0.0;
    bool overridden_ = false;
};

inline Partition partition(const HypothesisClass& cls) {
    Partition out;
    for (const auto& h : cls.hypotheses()) (cls.in_good_set(h.id) ? out.good : out.bad).push_back(h.id);
    return out;
}

// Fixed-length 0/1 string; bit i says whether the hypothesis is correct on
// the i-th entry of the simulated example pool.
class SuccessPattern {
public:
    SuccessPattern() = default;
    explicit SuccessPattern(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        for (auto b : bits_)
            if (b > 1) throw std::invalid_argument("success pattern entries must be 0 or 1");
    }

    std::size_t size() const { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    std::size_t ones() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }
    double accuracy() const { return static_cast<double>(ones()) / static_cast<double>(size()); }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    friend bool operator==(const SuccessPattern&, const SuccessPattern&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

// Exactly round(length * accuracy) ones at positions given by a seeded shuffle.
inline SuccessPattern make_pattern(double accuracy, Rng& rng, std::size_t length = kPatternLength) {
    if (!(accuracy > 0.0 && accuracy < 1.0)) throw std::invalid_argument("accuracy must lie in (0,1)");
    const auto ones = static_cast<std::size_t>(std::llround(accuracy * static_cast<double>(length)));
    std::vector<std::uint8_t> bits(length, 0);
    std::fill_n(bits.begin(), ones, std::uint8_t{1});
    std::shuffle(bits.begin(), bits.end(), rng);
    return SuccessPattern(std::move(bits));
}

inline std::vector<SuccessPattern> make_patterns(const HypothesisClass& cls, Rng& rng,
                                                 std::size_t length = kPatternLength) {
    std::vector<SuccessPattern> out;
    out.reserve(cls.n());
    for (const auto& h : cls.hypotheses()) out.push_back(make_pattern(h.accuracy, rng, length));
    return out;
}

// Anything that yields success vectors until exhaustion (std::nullopt).
template <class S>
concept ExampleSource = requires(S& s) {
    { s.next() } -> std::same_as<std::optional<SuccessVector>>;
    { s.n() } -> std::convertible_to<std::size_t>;
};

// Unbounded source over per-hypothesis success patterns. Each round draws one
// pool index shared by all hypotheses; round r's index depends only on
// (seed, r).
class PatternSource {
public:
    PatternSource(std::span<const SuccessPattern> patterns, std::uint64_t seed) : seed_(seed) {
        if (patterns.empty()) throw std::invalid_argument("pattern source needs at least one pattern");
        const std::size_t len = patterns.front().size();
        if (len == 0) throw std::invalid_argument("patterns must be non-empty");
        for (const auto& p : patterns)
            if (p.size() != len) throw std::invalid_argument("patterns must share one length");
        n_ = patterns.size();
        columns_.assign(len, SuccessVector(n_, 0));
        for (std::size_t h = 0; h < n_; ++h)
            for (std::size_t i = 0; i < len; ++i) columns_[i][h] = patterns[h][i] ? 1 : 0;
    }

    std::optional<SuccessVector> next() { return columns_[index_at(round_++)]; }

    std::size_t n() const { return n_; }
    std::uint64_t rounds() const { return round_; }

    // Pool index drawn at round r (0-based).
    std::size_t index_at(std::uint64_t r) const {
        return counter_draw(seed_, r, static_cast<std::uint32_t>(columns_.size()));
    }

    SuccessVector vector_at(std::uint64_t r) const { return columns_[index_at(r)]; }

private:
    std::uint64_t seed_;
    std::uint64_t round_ = 0;
    std::size_t n_ = 0;
    std::vector<SuccessVector> columns_;
};

// Finite source over precomputed prediction rows.
class MatrixSource {
public:
    explicit MatrixSource(std::vector<SuccessVector> rows, std::size_t n = 0) : rows_(std::move(rows)), n_(n) {
        if (!rows_.empty()) {
            if (n_ == 0) n_ = rows_.front().size();
            for (const auto& r : rows_)
                if (r.size() != n_ || n_ == 0)
                    throw std::invalid_argument("matrix rows must share one non-zero width");
        }
    }

    std::optional<SuccessVector> next() {
        if (cursor_ >= rows_.size()) return std::nullopt;
        return rows_[cursor_++];
    }

    std::size_t n() const { return n_; }
    std::size_t remaining() const { return rows_.size() - cursor_; }

private:
    std::vector<SuccessVector> rows_;
    std::size_t n_;
    std::size_t cursor_ = 0;
};

static_assert(ExampleSource<PatternSource>);
static_assert(ExampleSource<MatrixSource>);

// ---------------------------------------------------------------------------
// Synthetic accuracy distributions

enum class Distribution { symmetric, positive, negative };

inline void check_class_margin(double gamma0) {
    if (!(gamma0 > 0.0 && gamma0 <= 0.3)) throw std::invalid_argument("gamma0 must lie in (0, 0.3]");
}

// `copies` hypotheses at each offset -g0, -3g0/4, ..., +3g0/4, +g0.
inline HypothesisClass symmetric_class(double gamma0, std::size_t copies = 2) {
    check_class_margin(gamma0);
    std::vector<double> acc;
    for (int k = -4; k <= 4; ++k)
        for (std::size_t j = 0; j < copies; ++j) acc.push_back(0.5 + gamma0 * k / 4.0);
    return HypothesisClass(acc);
}

// positive: offsets 0, g0/8, ..., g0 (all at or above 1/2).
// negative: offsets -g0, -7g0/8, ..., -g0/8 plus one group at +g0.
inline HypothesisClass biased_class(double gamma0, Distribution bias, std::size_t copies = 2) {
    check_class_margin(gamma0);
    if (bias == Distribution::symmetric) return symmetric_class(gamma0, copies);
    std::vector<double> acc;
    const auto push = [&](double offset) {
        for (std::size_t j = 0; j < copies; ++j) acc.push_back(0.5 + offset);
    };
    if (bias == Distribution::positive) {
        for (int k = 0; k <= 8; ++k) push(gamma0 * k / 8.0);
    } else {
        for (int k = -8; k <= -1; ++k) push(gamma0 * k / 8.0);
        push(gamma0);
    }
    return HypothesisClass(acc);
}

inline HypothesisClass make_class(Distribution dist, double gamma0, std::size_t copies = 2) {
    return dist == Distribution::symmetric ? symmetric_class(gamma0, copies)
                                           : biased_class(gamma0, dist, copies);
}

// ---------------------------------------------------------------------------
// Prediction-matrix CSV: header `h0,h1,...`, then one 0/1 row per example.

inline std::vector<SuccessVector> read_matrix_csv(std::istream& in) {
    std::string raw;
    if (!std::getline(in, raw)) throw ParseError(1, "missing header");
    const auto header = split(trim(raw), ',');
    for (std::size_t h = 0; h < header.size(); ++h)
        if (trim(header[h]) != "h" + std::to_string(h))
            throw ParseError(1, "header field " + std::to_string(h) + " must be h" + std::to_string(h));
    const std::size_t n = header.size();

    std::vector<SuccessVector> rows;
    std::size_t line = 1;
    while (std::getline(in, raw)) {
        ++line;
        const auto body = trim(raw);
        if (body.empty()) throw ParseError(line, "empty row");
        const auto fields = split(body, ',');
        if (fields.size() != n)
            throw ParseError(line, "expected " + std::to_string(n) + " fields, got " + std::to_string(fields.size()));
        SuccessVector row(n);
        for (std::size_t h = 0; h < n; ++h) {
            const auto f = trim(fields[h]);
            if (f != "0" && f != "1") throw ParseError(line, "entries must be 0 or 1");
            row[h] = f == "1" ? 1 : 0;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_matrix_csv(std::ostream& out, std::span<const SuccessVector> rows, std::size_t n) {
    for (std::size_t h = 0; h < n; ++h) out << (h ? "," : "") << 'h' << h;
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != n) throw std::invalid_argument("row width does not match header");
        for (std::size_t h = 0; h < n; ++h) out << (h ? "," : "") << static_cast<int>(row[h]);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Class-definition file:
//
//   # comment
//   gamma0 = 0.2      (optional override)
//   0, 0.70           (id, accuracy) records; ids contiguous from 0
//
inline HypothesisClass read_class_definition(std::istream& in) {
    std::optional<double> gamma0;
    std::vector<std::pair<std::size_t, double>> records;
    std::vector<std::size_t> record_lines;
    for (const auto& kv : read_key_values(in)) {
        if (!kv.key.empty()) {
            if (kv.key != "gamma0") throw ParseError(kv.line, "unknown key '" + kv.key + "'");
            gamma0 = parse_double(kv.value);
            if (!gamma0 || !(*gamma0 > 0.0 && *gamma0 < 0.5))
                throw ParseError(kv.line, "gamma0 must be a number in (0,1/2)");
            continue;
        }
        const auto fields = split(kv.value, ',');
        if (fields.size() != 2) throw ParseError(kv.line, "expected 'id, accuracy'");
        const auto id = parse_int<std::size_t>(fields[0]);
        const auto acc = parse_double(fields[1]);
        if (!id) throw ParseError(kv.line, "invalid hypothesis id");
        if (!acc || !(*acc > 0.0 && *acc < 1.0)) throw ParseError(kv.line, "accuracy must lie in (0,1)");
        records.emplace_back(*id, *acc);
        record_lines.push_back(kv.line);
    }
    if (records.empty()) throw ParseError(0, "class definition lists no hypotheses");

    std::vector<double> acc(records.size(), -1.0);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto [id, p] = records[i];
        if (id >= acc.size()) throw ParseError(record_lines[i], "ids must be contiguous from 0");
        if (acc[id] >= 0.0) throw ParseError(record_lines[i], "duplicate id " + std::to_string(id));
        acc[id] = p;
    }
    try {
        return HypothesisClass(acc, gamma0);
    } catch (const std::invalid_argument& e) {
        throw ParseError(0, e.what());
    }
}

}  // namespace hypsel
