#pragma once

// Level-stratified train/test splitting and k-fold partitioning.
//
// Selection procedure (stable across platforms and input order):
//   1. group items by level; within a level sort by id;
//   2. shuffle each group with Fisher-Yates driven by mt19937_64 seeded with
//      stream_seed(seed, level index) (see random.hpp);
//   3. take a prefix of the shuffled group.

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cefr/corpus.hpp"
#include "cefr/error.hpp"
#include "cefr/levels.hpp"
#include "cefr/random.hpp"

namespace cefr {

/// Level and id accessors for anything that can be split; overload for new item types.
inline CefrLevel level_of(const TextSample& s)
{
    if (!s.level) {
        throw UnlabeledSample(s.id);
    }
    return *s.level;
}

inline std::string_view id_of(const TextSample& s) noexcept
{
    return s.id;
}

template <class T>
concept Stratifiable = requires(const T& item) {
    { level_of(item) } -> std::convertible_to<CefrLevel>;
    { id_of(item) } -> std::convertible_to<std::string_view>;
};

struct SplitSpec
{
    std::size_t per_level_train = 154;
    std::size_t per_level_test = 25;
    std::uint64_t seed = 0;
};

template <class T>
struct Split
{
    std::vector<T> train;
    std::vector<T> test;
};

namespace detail {

/// Indices of `items` grouped by level, each group in its seeded shuffled order.
template <Stratifiable T>
std::array<std::vector<std::size_t>, kLevelCount> shuffled_groups(std::span<const T> items, std::uint64_t seed)
{
    std::array<std::vector<std::size_t>, kLevelCount> groups;
    for (std::size_t i = 0; i < items.size(); ++i) {
        groups[level_of(items[i]).index()].push_back(i);
    }
    for (std::size_t level = 0; level < kLevelCount; ++level) {
        auto& g = groups[level];
        std::sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
            const auto ia = id_of(items[a]);
            const auto ib = id_of(items[b]);
            return ia != ib ? ia < ib : a < b;
        });
        Rng rng(stream_seed(seed, level));
        rng.shuffle(std::span<std::size_t>(g));
    }
    return groups;
}

} // namespace detail

/// Exactly per_level_train / per_level_test items of every level; train and test are disjoint.
template <Stratifiable T>
Split<T> stratified_split(std::span<const T> items, const SplitSpec& spec)
{
    const auto groups = detail::shuffled_groups(items, spec.seed);
    const auto need = spec.per_level_train + spec.per_level_test;
    for (auto level : CefrLevel::all()) {
        const auto have = groups[level.index()].size();
        if (have < need) {
            throw InsufficientSamples(level.str(), have, need);
        }
    }
    Split<T> split;
    split.train.reserve(spec.per_level_train * kLevelCount);
    split.test.reserve(spec.per_level_test * kLevelCount);
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < spec.per_level_train; ++i) {
            split.train.push_back(items[g[i]]);
        }
        for (std::size_t i = spec.per_level_train; i < need; ++i) {
            split.test.push_back(items[g[i]]);
        }
    }
    return split;
}

template <Stratifiable T>
Split<T> stratified_split(const std::vector<T>& items, const SplitSpec& spec)
{
    return stratified_split(std::span<const T>(items), spec);
}

struct FoldIndices
{
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;

    bool operator==(const FoldIndices&) const = default;
};

/// Stratified k-fold partition. Every index lands in exactly one test fold and the per-level
/// test counts of any two folds differ by at most one. Each level present must have >= k items;
/// levels absent from the data are skipped. Index lists are sorted ascending.
template <Stratifiable T>
std::vector<FoldIndices> kfold_indices(std::span<const T> items, std::size_t k, std::uint64_t seed)
{
    if (k < 2) {
        throw InvalidArgument("k-fold needs k >= 2, got " + std::to_string(k));
    }
    const auto groups = detail::shuffled_groups(items, seed);
    for (auto level : CefrLevel::all()) {
        const auto have = groups[level.index()].size();
        if (have > 0 && have < k) {
            throw InsufficientSamples(level.str(), have, k);
        }
    }
    std::vector<std::size_t> fold_of(items.size());
    // Rotating the starting fold per level keeps overall fold sizes balanced too.
    std::size_t offset = 0;
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            fold_of[g[i]] = (offset + i) % k;
        }
        offset = (offset + g.size()) % k;
    }
    std::vector<FoldIndices> folds(k);
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t f = 0; f < k; ++f) {
            (f == fold_of[i] ? folds[f].test : folds[f].train).push_back(i);
        }
    }
    return folds;
}

template <Stratifiable T>
std::vector<Split<T>> kfold(std::span<const T> items, std::size_t k, std::uint64_t seed)
{
    std::vector<Split<T>> out;
    for (const auto& f : kfold_indices(items, k, seed)) {
        Split<T> s;
        for (auto i : f.train) {
            s.train.push_back(items[i]);
        }
        for (auto i : f.test) {
            s.test.push_back(items[i]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

template <Stratifiable T>
std::vector<Split<T>> kfold(const std::vector<T>& items, std::size_t k, std::uint64_t seed)
{
    return kfold(std::span<const T>(items), k, seed);
}

} // namespace cefr
