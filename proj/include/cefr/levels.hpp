#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cefr/error.hpp"

namespace cefr {

inline constexpr std::size_t kLevelCount = 6;

/// One of the six ordinal CEFR proficiency levels, A1 (index 0) through C2 (index 5).
class CefrLevel
{
public:
    static constexpr std::array<std::string_view, kLevelCount> kLabels{"A1", "A2", "B1", "B2", "C1", "C2"};

    constexpr CefrLevel() noexcept = default;

    /// Throws InvalidArgument unless index < 6.
    static constexpr CefrLevel from_index(std::size_t index)
    {
        if (index >= kLevelCount) {
            throw InvalidArgument("CEFR level index out of range: " + std::to_string(index));
        }
        return CefrLevel(static_cast<std::uint8_t>(index));
    }

    /// Case-insensitive, exact two-character match ("b1", "C2"); surrounding whitespace is not accepted.
    static constexpr std::optional<CefrLevel> try_parse(std::string_view text) noexcept
    {
        if (text.size() != 2) {
            return std::nullopt;
        }
        char letter = text[0];
        if (letter >= 'a' && letter <= 'z') {
            letter = static_cast<char>(letter - 'a' + 'A');
        }
        const char digit = text[1];
        if (letter < 'A' || letter > 'C' || (digit != '1' && digit != '2')) {
            return std::nullopt;
        }
        return CefrLevel(static_cast<std::uint8_t>((letter - 'A') * 2 + (digit - '1')));
    }

    /// Like try_parse but throws InvalidLevelLabel.
    static CefrLevel parse(std::string_view text)
    {
        if (auto level = try_parse(text)) {
            return *level;
        }
        throw InvalidLevelLabel(std::string(text));
    }

    static constexpr std::array<CefrLevel, kLevelCount> all() noexcept
    {
        return {CefrLevel(0), CefrLevel(1), CefrLevel(2), CefrLevel(3), CefrLevel(4), CefrLevel(5)};
    }

    constexpr std::size_t index() const noexcept { return index_; }
    constexpr std::string_view label() const noexcept { return kLabels[index_]; }
    std::string str() const { return std::string(label()); }

    constexpr auto operator<=>(const CefrLevel&) const noexcept = default;

private:
    constexpr explicit CefrLevel(std::uint8_t index) noexcept : index_(index) {}

    std::uint8_t index_ = 0;
};

namespace levels {
inline constexpr CefrLevel A1 = CefrLevel::from_index(0);
inline constexpr CefrLevel A2 = CefrLevel::from_index(1);
inline constexpr CefrLevel B1 = CefrLevel::from_index(2);
inline constexpr CefrLevel B2 = CefrLevel::from_index(3);
inline constexpr CefrLevel C1 = CefrLevel::from_index(4);
inline constexpr CefrLevel C2 = CefrLevel::from_index(5);
} // namespace levels

/// Ordinal distance |a - b| in [0, 5].
constexpr std::size_t distance(CefrLevel a, CefrLevel b) noexcept
{
    return a.index() > b.index() ? a.index() - b.index() : b.index() - a.index();
}

inline constexpr std::size_t kMaxDistance = kLevelCount - 1;

} // namespace cefr
