#pragma once

#include <array>
#include <cstdlib>
#include <optional>
#include <vector>

#include "cefr/metrics.hpp"

namespace cefr::testing {

// Direct computation over the pair list, no matrix involved.
struct PairOracle
{
    std::vector<LabelPair> pairs;
    MetricMode mode;

    std::vector<LabelPair> scored() const
    {
        std::vector<LabelPair> out;
        for (const auto& p : pairs) {
            if (mode == MetricMode::strict || p.predicted) {
                out.push_back(p);
            }
        }
        return out;
    }

    std::optional<Fraction> accuracy() const
    {
        const auto s = scored();
        if (s.empty()) {
            return std::nullopt;
        }
        long long hit = 0;
        for (const auto& p : s) {
            hit += p.predicted && *p.predicted == p.actual;
        }
        return Fraction(hit, static_cast<long long>(s.size()));
    }

    std::optional<Fraction> group() const
    {
        const auto s = scored();
        if (s.empty()) {
            return std::nullopt;
        }
        long long hit = 0;
        for (const auto& p : s) {
            hit += p.predicted &&
                   std::abs(static_cast<int>(p.predicted->index()) - static_cast<int>(p.actual.index())) <= 1;
        }
        return Fraction(hit, static_cast<long long>(s.size()));
    }

    std::optional<Fraction> distance() const
    {
        const auto s = scored();
        if (s.empty()) {
            return std::nullopt;
        }
        long long sum = 0;
        for (const auto& p : s) {
            sum += p.predicted ? std::abs(static_cast<int>(p.predicted->index()) - static_cast<int>(p.actual.index()))
                               : 5;
        }
        return Fraction(sum, static_cast<long long>(s.size()));
    }

    // precision, recall, f1, support for one class
    std::array<Fraction, 4> per_class(std::size_t c) const
    {
        long long tp = 0, predicted = 0, actual = 0;
        for (const auto& p : scored()) {
            const bool is_pred = p.predicted && p.predicted->index() == c;
            const bool is_act = p.actual.index() == c;
            tp += is_pred && is_act;
            predicted += is_pred;
            actual += is_act;
        }
        const Fraction prec = predicted ? Fraction(tp, predicted) : Fraction(0);
        const Fraction rec = actual ? Fraction(tp, actual) : Fraction(0);
        const Fraction f1 = prec + rec == 0 ? Fraction(0) : Fraction(2 * prec * rec / (prec + rec));
        return {prec, rec, f1, Fraction(actual)};
    }
};


} // namespace cefr::testing
