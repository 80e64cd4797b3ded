#pragma once

// Confusion matrices over the six CEFR levels and the ordinal-aware metric suite:
// exact accuracy, adjacent-level ("group") accuracy, mean classification distance,
// per-class precision/recall/F1 and their support-weighted averages.
//
// Every metric is computed as an exact rational; conversion to floating point or to
// a rounded decimal string happens only at presentation time.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cefr/error.hpp"
#include "cefr/levels.hpp"

namespace cefr {

using Fraction = boost::multiprecision::cpp_rational;

inline double to_double(const Fraction& value)
{
    return value.convert_to<double>();
}

/// Round half-up to `decimals` places and print; exact, so 97/150 at 3 places is always "0.647".
inline std::string format_fraction(const Fraction& value, int decimals)
{
    using boost::multiprecision::cpp_int;
    cpp_int scale = 1;
    for (int i = 0; i < decimals; ++i) {
        scale *= 10;
    }
    const bool negative = value < 0;
    const Fraction magnitude = negative ? Fraction(-value) : value;
    const cpp_int num = boost::multiprecision::numerator(magnitude);
    const cpp_int den = boost::multiprecision::denominator(magnitude);
    const cpp_int scaled = (2 * num * scale + den) / (2 * den);
    const cpp_int whole = scaled / scale;
    std::string out = negative && scaled != 0 ? "-" : "";
    out += whole.str();
    if (decimals > 0) {
        std::string frac = cpp_int(scaled % scale).str();
        frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
        out += "." + frac;
    }
    return out;
}

/// How responses without an extractable label are scored.
enum class MetricMode
{
    /// Unparsed responses stay in the denominator, count as wrong and cost the maximum distance 5.
    strict,
    /// Unparsed responses are dropped before scoring.
    parsed_only,
};

inline std::string_view to_string(MetricMode mode) noexcept
{
    return mode == MetricMode::strict ? "strict" : "parsed_only";
}

inline MetricMode parse_metric_mode(std::string_view text)
{
    if (text == "strict") {
        return MetricMode::strict;
    }
    if (text == "parsed_only" || text == "parsed-only") {
        return MetricMode::parsed_only;
    }
    throw InvalidArgument("unknown metric mode '" + std::string(text) + "'");
}

struct LabelPair
{
    CefrLevel actual;
    std::optional<CefrLevel> predicted;
};

/// 6x6 count grid, rows = actual level, columns = predicted level, plus a per-actual-level
/// counter of responses that carried no level at all.
class ConfusionMatrix
{
public:
    using Count = std::uint64_t;
    using Grid = std::array<std::array<Count, kLevelCount>, kLevelCount>;
    using Row = std::array<Count, kLevelCount>;

    ConfusionMatrix() = default;
    ConfusionMatrix(const Grid& counts, const Row& unparsed) : counts_(counts), unparsed_(unparsed) {}

    void add(CefrLevel actual, std::optional<CefrLevel> predicted, Count n = 1) noexcept
    {
        if (predicted) {
            counts_[actual.index()][predicted->index()] += n;
        } else {
            unparsed_[actual.index()] += n;
        }
    }

    void merge(const ConfusionMatrix& other) noexcept
    {
        for (std::size_t i = 0; i < kLevelCount; ++i) {
            for (std::size_t j = 0; j < kLevelCount; ++j) {
                counts_[i][j] += other.counts_[i][j];
            }
            unparsed_[i] += other.unparsed_[i];
        }
    }

    Count count(CefrLevel actual, CefrLevel predicted) const noexcept
    {
        return counts_[actual.index()][predicted.index()];
    }
    Count unparsed(CefrLevel actual) const noexcept { return unparsed_[actual.index()]; }

    const Grid& counts() const noexcept { return counts_; }
    const Row& unparsed_counts() const noexcept { return unparsed_; }

    /// Parsed predictions only.
    Count row_sum(CefrLevel actual) const noexcept
    {
        Count sum = 0;
        for (Count c : counts_[actual.index()]) {
            sum += c;
        }
        return sum;
    }

    Count column_sum(CefrLevel predicted) const noexcept
    {
        Count sum = 0;
        for (const auto& row : counts_) {
            sum += row[predicted.index()];
        }
        return sum;
    }

    Count trace() const noexcept
    {
        Count sum = 0;
        for (std::size_t i = 0; i < kLevelCount; ++i) {
            sum += counts_[i][i];
        }
        return sum;
    }

    Count parsed_total() const noexcept
    {
        Count sum = 0;
        for (const auto& row : counts_) {
            for (Count c : row) {
                sum += c;
            }
        }
        return sum;
    }

    Count unparsed_total() const noexcept
    {
        Count sum = 0;
        for (Count c : unparsed_) {
            sum += c;
        }
        return sum;
    }

    Count total() const noexcept { return parsed_total() + unparsed_total(); }

    /// Support of a true class under the given mode.
    Count support(CefrLevel actual, MetricMode mode) const noexcept
    {
        return row_sum(actual) + (mode == MetricMode::strict ? unparsed(actual) : 0);
    }

    Count denominator(MetricMode mode) const noexcept
    {
        return mode == MetricMode::strict ? total() : parsed_total();
    }

    bool operator==(const ConfusionMatrix&) const = default;

private:
    Grid counts_{};
    Row unparsed_{};
};

inline ConfusionMatrix build_confusion(std::span<const LabelPair> pairs) noexcept
{
    ConfusionMatrix cm;
    for (const auto& pair : pairs) {
        cm.add(pair.actual, pair.predicted);
    }
    return cm;
}

namespace detail {

inline ConfusionMatrix::Count checked_denominator(const ConfusionMatrix& cm, MetricMode mode)
{
    const auto den = cm.denominator(mode);
    if (den == 0) {
        throw EmptyMatrix();
    }
    return den;
}

inline Fraction ratio(ConfusionMatrix::Count num, ConfusionMatrix::Count den)
{
    if (den == 0) {
        return Fraction(0);
    }
    return Fraction(boost::multiprecision::cpp_int(num), boost::multiprecision::cpp_int(den));
}

} // namespace detail

inline Fraction accuracy(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict)
{
    return detail::ratio(cm.trace(), detail::checked_denominator(cm, mode));
}

/// Predictions at most one level away from the truth count as correct. Unparsed responses never do.
inline Fraction group_accuracy(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict)
{
    const auto den = detail::checked_denominator(cm, mode);
    ConfusionMatrix::Count near = 0;
    for (auto actual : CefrLevel::all()) {
        for (auto predicted : CefrLevel::all()) {
            if (distance(actual, predicted) <= 1) {
                near += cm.count(actual, predicted);
            }
        }
    }
    return detail::ratio(near, den);
}

inline Fraction mean_classification_distance(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict)
{
    const auto den = detail::checked_denominator(cm, mode);
    ConfusionMatrix::Count penalty = 0;
    for (auto actual : CefrLevel::all()) {
        for (auto predicted : CefrLevel::all()) {
            penalty += cm.count(actual, predicted) * distance(actual, predicted);
        }
    }
    if (mode == MetricMode::strict) {
        penalty += cm.unparsed_total() * kMaxDistance;
    }
    return detail::ratio(penalty, den);
}

struct ClassMetrics
{
    Fraction precision;
    Fraction recall;
    Fraction f1;
    ConfusionMatrix::Count support = 0;
};

inline Fraction f1_score(const Fraction& precision, const Fraction& recall)
{
    const Fraction sum = precision + recall;
    if (sum == 0) {
        return Fraction(0);
    }
    return 2 * precision * recall / sum;
}

/// 0/0 precision or recall is defined as 0.
inline std::array<ClassMetrics, kLevelCount> per_class_metrics(const ConfusionMatrix& cm,
                                                               MetricMode mode = MetricMode::strict)
{
    std::array<ClassMetrics, kLevelCount> out;
    for (auto level : CefrLevel::all()) {
        auto& m = out[level.index()];
        const auto tp = cm.count(level, level);
        m.support = cm.support(level, mode);
        m.precision = detail::ratio(tp, cm.column_sum(level));
        m.recall = detail::ratio(tp, m.support);
        m.f1 = f1_score(m.precision, m.recall);
    }
    return out;
}

struct WeightedMetrics
{
    Fraction precision;
    Fraction recall;
    Fraction f1;
};

/// Support-weighted means of the per-class metrics; supports are true-class row sums.
inline WeightedMetrics weighted_metrics(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict)
{
    const auto den = detail::checked_denominator(cm, mode);
    WeightedMetrics w;
    for (const auto& m : per_class_metrics(cm, mode)) {
        const Fraction weight(boost::multiprecision::cpp_int(m.support));
        w.precision += weight * m.precision;
        w.recall += weight * m.recall;
        w.f1 += weight * m.f1;
    }
    const Fraction total(boost::multiprecision::cpp_int{den});
    w.precision /= total;
    w.recall /= total;
    w.f1 /= total;
    return w;
}

struct MetricsReport
{
    MetricMode mode = MetricMode::strict;
    ConfusionMatrix::Count evaluated = 0;
    ConfusionMatrix::Count unparsed = 0;
    Fraction accuracy;
    Fraction group_accuracy;
    Fraction mean_distance;
    std::array<ClassMetrics, kLevelCount> per_class;
    WeightedMetrics weighted;
};

inline MetricsReport compute_report(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict)
{
    MetricsReport report;
    report.mode = mode;
    report.evaluated = cm.total();
    report.unparsed = cm.unparsed_total();
    report.accuracy = accuracy(cm, mode);
    report.group_accuracy = group_accuracy(cm, mode);
    report.mean_distance = mean_classification_distance(cm, mode);
    report.per_class = per_class_metrics(cm, mode);
    report.weighted = weighted_metrics(cm, mode);
    return report;
}

/// Field-wise arithmetic mean of several reports (e.g. per-fold cross-validation results).
/// Supports and counts are summed.
inline MetricsReport mean_report(std::span<const MetricsReport> reports)
{
    if (reports.empty()) {
        throw InvalidArgument("mean_report needs at least one report");
    }
    MetricsReport mean;
    mean.mode = reports.front().mode;
    for (const auto& r : reports) {
        mean.evaluated += r.evaluated;
        mean.unparsed += r.unparsed;
        mean.accuracy += r.accuracy;
        mean.group_accuracy += r.group_accuracy;
        mean.mean_distance += r.mean_distance;
        for (std::size_t c = 0; c < kLevelCount; ++c) {
            mean.per_class[c].precision += r.per_class[c].precision;
            mean.per_class[c].recall += r.per_class[c].recall;
            mean.per_class[c].f1 += r.per_class[c].f1;
            mean.per_class[c].support += r.per_class[c].support;
        }
        mean.weighted.precision += r.weighted.precision;
        mean.weighted.recall += r.weighted.recall;
        mean.weighted.f1 += r.weighted.f1;
    }
    const Fraction n(static_cast<long long>(reports.size()));
    mean.accuracy /= n;
    mean.group_accuracy /= n;
    mean.mean_distance /= n;
    for (auto& c : mean.per_class) {
        c.precision /= n;
        c.recall /= n;
        c.f1 /= n;
    }
    mean.weighted.precision /= n;
    mean.weighted.recall /= n;
    mean.weighted.f1 /= n;
    return mean;
}

} // namespace cefr
