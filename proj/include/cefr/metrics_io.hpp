#pragma once

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cefr/metrics.hpp"

namespace cefr {

// Canonical form: {"labels":["A1",..,"C2"],"counts":[[..6..] x6],"unparsed":[..6..]}.
inline nlohmann::json to_json(const ConfusionMatrix& cm)
{
    nlohmann::json labels = nlohmann::json::array();
    for (auto label : CefrLevel::kLabels) {
        labels.push_back(std::string(label));
    }
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& row : cm.counts()) {
        counts.push_back(row);
    }
    return nlohmann::json{{"labels", labels}, {"counts", counts}, {"unparsed", cm.unparsed_counts()}};
}

inline ConfusionMatrix confusion_from_json(const nlohmann::json& j)
{
    auto fail = [](const std::string& why) -> ConfusionMatrix { throw ParseError(1, "confusion matrix: " + why); };
    if (!j.is_object() || !j.contains("counts")) {
        return fail("expected an object with 'counts'");
    }
    if (j.contains("labels")) {
        const auto& labels = j.at("labels");
        if (!labels.is_array() || labels.size() != kLevelCount) {
            return fail("'labels' must list the six levels");
        }
        for (std::size_t i = 0; i < kLevelCount; ++i) {
            if (!labels[i].is_string() || labels[i].get<std::string>() != CefrLevel::kLabels[i]) {
                return fail("'labels' must be A1..C2 in order");
            }
        }
    }
    auto read_row = [&](const nlohmann::json& row, ConfusionMatrix::Row& out) {
        if (!row.is_array() || row.size() != kLevelCount) {
            fail("every row must have 6 entries");
        }
        for (std::size_t i = 0; i < kLevelCount; ++i) {
            if (!row[i].is_number_integer() || row[i].get<long long>() < 0) {
                fail("entries must be non-negative integers");
            }
            out[i] = row[i].get<ConfusionMatrix::Count>();
        }
    };
    const auto& counts = j.at("counts");
    if (!counts.is_array() || counts.size() != kLevelCount) {
        return fail("'counts' must have 6 rows");
    }
    ConfusionMatrix::Grid grid{};
    for (std::size_t i = 0; i < kLevelCount; ++i) {
        read_row(counts[i], grid[i]);
    }
    ConfusionMatrix::Row unparsed{};
    if (j.contains("unparsed")) {
        read_row(j.at("unparsed"), unparsed);
    }
    return ConfusionMatrix(grid, unparsed);
}

/// Aligned plain-text grid; an "n/a" column appears only when some responses were unparsed.
inline std::string render_matrix_text(const ConfusionMatrix& cm)
{
    const bool with_unparsed = cm.unparsed_total() > 0;
    std::size_t width = 3;
    for (const auto& row : cm.counts()) {
        for (auto c : row) {
            width = std::max(width, std::to_string(c).size());
        }
    }
    for (auto c : cm.unparsed_counts()) {
        width = std::max(width, std::to_string(c).size());
    }
    std::ostringstream out;
    out << "actual\\pred";
    for (auto label : CefrLevel::kLabels) {
        out << ' ' << std::setw(static_cast<int>(width)) << label;
    }
    if (with_unparsed) {
        out << ' ' << std::setw(static_cast<int>(width)) << "n/a";
    }
    out << '\n';
    for (auto actual : CefrLevel::all()) {
        out << std::left << std::setw(11) << actual.label() << std::right;
        for (auto predicted : CefrLevel::all()) {
            out << ' ' << std::setw(static_cast<int>(width)) << cm.count(actual, predicted);
        }
        if (with_unparsed) {
            out << ' ' << std::setw(static_cast<int>(width)) << cm.unparsed(actual);
        }
        out << '\n';
    }
    return out.str();
}

inline nlohmann::json to_json(const MetricsReport& r)
{
    nlohmann::json per_class = nlohmann::json::object();
    for (auto level : CefrLevel::all()) {
        const auto& m = r.per_class[level.index()];
        per_class[level.str()] = {{"precision", to_double(m.precision)},
                                  {"recall", to_double(m.recall)},
                                  {"f1", to_double(m.f1)},
                                  {"support", m.support}};
    }
    return nlohmann::json{{"mode", std::string(to_string(r.mode))},
                          {"evaluated", r.evaluated},
                          {"unparsed", r.unparsed},
                          {"accuracy", to_double(r.accuracy)},
                          {"group_accuracy", to_double(r.group_accuracy)},
                          {"mean_distance", to_double(r.mean_distance)},
                          {"per_class", per_class},
                          {"weighted",
                           {{"precision", to_double(r.weighted.precision)},
                            {"recall", to_double(r.weighted.recall)},
                            {"f1", to_double(r.weighted.f1)}}}};
}

/// Long format: one row per metric, so summary and per-class values share a header.
inline std::string report_to_csv(const MetricsReport& r)
{
    std::ostringstream out;
    out << "scope,metric,value\n";
    out << "overall,accuracy," << format_fraction(r.accuracy, 4) << '\n';
    out << "overall,group_accuracy," << format_fraction(r.group_accuracy, 4) << '\n';
    out << "overall,mean_distance," << format_fraction(r.mean_distance, 4) << '\n';
    for (auto level : CefrLevel::all()) {
        const auto& m = r.per_class[level.index()];
        out << level.label() << ",precision," << format_fraction(m.precision, 4) << '\n';
        out << level.label() << ",recall," << format_fraction(m.recall, 4) << '\n';
        out << level.label() << ",f1," << format_fraction(m.f1, 4) << '\n';
        out << level.label() << ",support," << m.support << '\n';
    }
    out << "weighted,precision," << format_fraction(r.weighted.precision, 4) << '\n';
    out << "weighted,recall," << format_fraction(r.weighted.recall, 4) << '\n';
    out << "weighted,f1," << format_fraction(r.weighted.f1, 4) << '\n';
    return out.str();
}

inline std::string percent(const Fraction& f)
{
    return format_fraction(f * 100, 1) + "%";
}

inline std::string render_report_text(const MetricsReport& r)
{
    std::ostringstream out;
    out << "mode:            " << to_string(r.mode) << '\n';
    out << "evaluated:       " << r.evaluated << " (unparsed " << r.unparsed << ")\n";
    out << "accuracy:        " << percent(r.accuracy) << '\n';
    out << "group accuracy:  " << percent(r.group_accuracy) << '\n';
    out << "mean distance:   " << format_fraction(r.mean_distance, 3) << '\n';
    out << '\n' << "class  precision  recall     f1  support\n";
    auto row = [&](std::string_view name, const Fraction& p, const Fraction& rc, const Fraction& f,
                   const std::string& support) {
        out << std::left << std::setw(5) << name << std::right << std::setw(11) << format_fraction(p, 3)
            << std::setw(8) << format_fraction(rc, 3) << std::setw(7) << format_fraction(f, 3) << std::setw(9)
            << support << '\n';
    };
    for (auto level : CefrLevel::all()) {
        const auto& m = r.per_class[level.index()];
        row(level.label(), m.precision, m.recall, m.f1, std::to_string(m.support));
    }
    const auto scored = r.mode == MetricMode::strict ? r.evaluated : r.evaluated - r.unparsed;
    row("wavg", r.weighted.precision, r.weighted.recall, r.weighted.f1, std::to_string(scored));
    return out.str();
}

inline std::string render_report_markdown(const MetricsReport& r)
{
    std::ostringstream out;
    out << "| Metric | Value |\n|---|---|\n";
    out << "| Accuracy | " << percent(r.accuracy) << " |\n";
    out << "| Group accuracy | " << percent(r.group_accuracy) << " |\n";
    out << "| Mean classification distance | " << format_fraction(r.mean_distance, 3) << " |\n\n";
    out << "| Class | Precision | Recall | F1 | Support |\n|---|---|---|---|---|\n";
    for (auto level : CefrLevel::all()) {
        const auto& m = r.per_class[level.index()];
        out << "| " << level.label() << " | " << format_fraction(m.precision, 3) << " | "
            << format_fraction(m.recall, 3) << " | " << format_fraction(m.f1, 3) << " | " << m.support << " |\n";
    }
    out << "| Weighted avg | " << format_fraction(r.weighted.precision, 3) << " | "
        << format_fraction(r.weighted.recall, 3) << " | " << format_fraction(r.weighted.f1, 3) << " | |\n";
    return out.str();
}

} // namespace cefr
