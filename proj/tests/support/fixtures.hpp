#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cefr/corpus.hpp"
#include "cefr/metrics.hpp"

namespace cefr::fixtures {

using Grid = ConfusionMatrix::Grid;

inline ConfusionMatrix matrix(const Grid& g)
{
    return ConfusionMatrix(g, {});
}

// Confusion matrices as published, rows = actual A1..C2, columns = predicted A1..C2.

/// English base prompt, 150 test texts.
inline ConfusionMatrix english_base()
{
    return matrix({{{3, 1, 21, 0, 0, 0},
                    {0, 0, 25, 0, 0, 0},
                    {0, 0, 24, 1, 0, 0},
                    {0, 0, 17, 8, 0, 0},
                    {0, 0, 7, 18, 0, 0},
                    {0, 0, 0, 25, 0, 0}}});
}

/// German few-shot prompt, 150 test texts.
inline ConfusionMatrix german_few_shot()
{
    return matrix({{{15, 5, 5, 0, 0, 0},
                    {3, 9, 13, 0, 0, 0},
                    {0, 1, 16, 7, 1, 0},
                    {0, 0, 0, 21, 2, 2},
                    {0, 0, 0, 8, 6, 11},
                    {0, 0, 0, 1, 2, 22}}});
}

/// Probing classifier, pooled over 5 folds (120 test items).
inline ConfusionMatrix probe()
{
    return matrix({{{16, 4, 0, 0, 0, 0},
                    {2, 15, 3, 0, 0, 0},
                    {0, 6, 11, 3, 0, 0},
                    {0, 0, 7, 12, 0, 1},
                    {0, 0, 0, 4, 11, 5},
                    {0, 0, 0, 0, 6, 14}}});
}

/// Fine-tuned model, 150 test texts.
inline ConfusionMatrix finetuned()
{
    return matrix({{{21, 4, 0, 0, 0, 0},
                    {3, 18, 4, 0, 0, 0},
                    {0, 2, 21, 2, 0, 0},
                    {0, 0, 4, 16, 5, 0},
                    {0, 0, 0, 4, 21, 0},
                    {0, 0, 0, 0, 7, 18}}});
}

struct PrfRow
{
    double precision;
    double recall;
    double f1;
};

inline constexpr std::array<PrfRow, 6> english_base_table{{
    {1.000, 0.120, 0.214}, {0.000, 0.000, 0.000}, {0.255, 0.960, 0.403},
    {0.154, 0.320, 0.208}, {0.000, 0.000, 0.000}, {0.000, 0.000, 0.000},
}};

inline constexpr std::array<PrfRow, 6> few_shot_table{{
    {0.833, 0.600, 0.698}, {0.600, 0.360, 0.450}, {0.471, 0.640, 0.542},
    {0.568, 0.840, 0.677}, {0.546, 0.240, 0.333}, {0.629, 0.880, 0.733},
}};

inline constexpr std::array<PrfRow, 6> probe_table{{
    {0.889, 0.800, 0.842}, {0.600, 0.750, 0.667}, {0.524, 0.550, 0.537},
    {0.632, 0.600, 0.615}, {0.647, 0.550, 0.595}, {0.700, 0.700, 0.700},
}};
inline constexpr PrfRow probe_weighted{0.665, 0.658, 0.659};

inline constexpr std::array<PrfRow, 6> finetuned_table{{
    {0.875, 0.840, 0.857}, {0.750, 0.720, 0.735}, {0.724, 0.840, 0.778},
    {0.727, 0.640, 0.681}, {0.636, 0.840, 0.724}, {1.000, 0.720, 0.837},
}};
inline constexpr PrfRow finetuned_weighted{0.785, 0.767, 0.769};

struct SourceCounts
{
    const char* source;
    std::array<int, 6> counts;
};

/// Published corpus composition (1,567 texts).
inline constexpr std::array<SourceCounts, 5> table1{{
    {"falko_essay_l2", {0, 0, 0, 83, 84, 81}},
    {"falko_summary_l1", {0, 0, 0, 0, 0, 58}},
    {"falko_summary_l2", {0, 0, 0, 0, 53, 53}},
    {"merlin", {57, 306, 331, 293, 42, 4}},
    {"synthetic", {122, 0, 0, 0, 0, 0}},
}};
inline constexpr std::array<int, 6> table1_totals{179, 306, 331, 376, 179, 196};

/// Samples with the published composition. Essay texts carry only a C-test score (cycling
/// through the score band of their level) so that their level comes from the mapping; every
/// other sample carries an explicit label. Texts are unique.
inline std::vector<TextSample> table1_composition()
{
    static constexpr std::array<std::pair<int, int>, 6> bands{{{0, 0}, {0, 0}, {0, 0}, {60, 79}, {80, 89}, {90, 100}}};
    std::vector<TextSample> out;
    for (const auto& row : table1) {
        for (std::size_t level = 0; level < 6; ++level) {
            for (int i = 0; i < row.counts[level]; ++i) {
                TextSample s;
                s.id = std::string(row.source) + "-" + std::string(CefrLevel::kLabels[level]) + "-" + std::to_string(i);
                s.text = "Beispieltext " + s.id + " mit etwas Inhalt.";
                s.source = Source::parse(row.source);
                if (s.source.kind == SourceKind::falko_essay_l2) {
                    const auto [lo, hi] = bands[level];
                    s.ctest_score = lo + i % (hi - lo + 1);
                } else {
                    s.level = CefrLevel::from_index(level);
                }
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

/// table1_composition() with the C-test mapping applied.
inline std::vector<TextSample> table1_labeled()
{
    return apply_ctest_labels(table1_composition()).samples;
}

} // namespace cefr::fixtures
