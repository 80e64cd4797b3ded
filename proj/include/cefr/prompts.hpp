#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cefr/corpus.hpp"
#include "cefr/error.hpp"
#include "cefr/levels.hpp"

namespace cefr {

/// Version of the built-in prompt texts; bump when any text below changes.
inline constexpr std::string_view kPromptAssetVersion = "1";

namespace prompt_text {

inline constexpr std::string_view english_base =
    "Classify the language level of a given text according to the Common European Framework of Reference for "
    "Languages (CEFR). Respond with only the corresponding CEFR level (A1, A2, B1, B2, C1 or C2).";

inline constexpr std::string_view german_zero_shot =
    "Bewerte die Sprachkenntnisse des bereitgestellten deutschen Textes gemäß dem Gemeinsamen Europäischen "
    "Referenzrahmen für Sprachen (GER/CEFR). Antworte NUR mit der entsprechenden Stufe: A1, A2, B1, B2, C1 oder C2, "
    "*keiner* Begründung.";

inline constexpr std::string_view german_few_shot =
    "Klassifiziere die Sprachkenntnisse des bereitgestellten deutschen Textes gemäß dem Gemeinsamen Europäischen "
    "Referenzrahmen für Sprachen (GER/CEFR). Antworte NUR mit der entsprechenden Stufe: A1, A2, B1, B2, C1 oder C2, "
    "NICHT MEHR. Gebe auch *keine* Begründung! Hier sind jeweils Beispiele:";

/// Request for synthetic A1 learner texts.
inline constexpr std::string_view synthetic_a1 =
    "Bitte generiere Texte mit dem CEFR Niveau A1. Diese sollten länger (Circa 600 Wörter) sein. Versuche Themen zu "
    "finden, welche nicht mit Schule/Kindheit in Verbindung stehen. Es sollte sich um Texte für Deutsch Sprachler mit "
    "dem Level A1 handeln.\n"
    "Hier ist eine Definition des A1 Levels:\n"
    "Kann vertraute, alltägliche Ausdrücke und ganz einfache Sätze verstehen und verwenden, die auf die Befriedigung "
    "konkreter Bedürfnisse zielen. Kann sich und andere vorstellen und anderen Leuten Fragen zu ihrer Person stellen - "
    "z. B. wo sie wohnen, welche Leute sie kennen oder welche Dinge sie haben - und kann auf Fragen dieser Art Antwort "
    "geben. Kann sich auf einfache Art verständigen, wenn die Gesprächspartner langsam und deutlich sprechen und "
    "bereit sind zu helfen.";

} // namespace prompt_text

struct ChatMessage
{
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

using FewShotBank = std::map<CefrLevel, std::string>;

struct PromptTemplate
{
    std::string id;
    std::string language;
    std::string system_text;
    std::string user_template = "{text}";
    /// When set, every level must have an example and they are appended to the system turn.
    bool uses_few_shot = false;
    FewShotBank few_shot_bank;
};

inline constexpr std::string_view kTextPlaceholder = "{text}";

inline PromptTemplate english_base_template()
{
    return {"english_base", "en", std::string(prompt_text::english_base), "{text}", false, {}};
}

inline PromptTemplate german_zero_shot_template()
{
    return {"german_zero_shot", "de", std::string(prompt_text::german_zero_shot), "{text}", false, {}};
}

inline PromptTemplate german_few_shot_template(FewShotBank bank = {})
{
    return {"german_few_shot", "de", std::string(prompt_text::german_few_shot), "{text}", true, std::move(bank)};
}

/// Accepts both "german-few-shot" and "german_few_shot" spellings.
inline PromptTemplate builtin_template(std::string_view id, FewShotBank bank = {})
{
    std::string key(id);
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "english_base") {
        return english_base_template();
    }
    if (key == "german_zero_shot") {
        return german_zero_shot_template();
    }
    if (key == "german_few_shot") {
        return german_few_shot_template(std::move(bank));
    }
    throw InvalidArgument("unknown prompt template '" + std::string(id) + "'");
}

/// Few-shot bank file: a JSON object mapping "A1".."C2" to example texts. Keys starting with
/// "_" are comments.
inline FewShotBank load_few_shot_bank(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open few-shot bank '" + path + "'");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, e.what());
    }
    if (!j.is_object()) {
        throw ParseError(1, "few-shot bank must be a JSON object");
    }
    FewShotBank bank;
    for (const auto& [key, value] : j.items()) {
        if (!key.empty() && key.front() == '_') {
            continue;
        }
        if (!value.is_string()) {
            throw ParseError(1, "few-shot example for '" + key + "' must be a string");
        }
        bank[CefrLevel::parse(key)] = value.get<std::string>();
    }
    return bank;
}

inline void validate(const PromptTemplate& t)
{
    const auto first = t.user_template.find(kTextPlaceholder);
    if (first == std::string::npos ||
        t.user_template.find(kTextPlaceholder, first + kTextPlaceholder.size()) != std::string::npos) {
        throw InvalidArgument("template '" + t.id + "': user template must contain {text} exactly once");
    }
    if (t.uses_few_shot) {
        for (auto level : CefrLevel::all()) {
            if (!t.few_shot_bank.contains(level)) {
                throw MissingFewShotExample(level.str());
            }
        }
    }
}

/// System turn carries the instruction (and, for few-shot templates, one example per level
/// in ascending order A1..C2); the user turn carries the target text verbatim.
inline std::vector<ChatMessage> render_prompt(const PromptTemplate& t, std::string_view text)
{
    validate(t);
    std::string system = t.system_text;
    if (t.uses_few_shot) {
        for (const auto& [level, example] : t.few_shot_bank) {
            system += "\n\n";
            system += level.label();
            system += ": ";
            system += example;
        }
    }
    std::string user = t.user_template;
    user.replace(user.find(kTextPlaceholder), kTextPlaceholder.size(), text);
    return {{"system", std::move(system)}, {"user", std::move(user)}};
}

inline std::vector<ChatMessage> render_prompt(const PromptTemplate& t, const TextSample& sample)
{
    return render_prompt(t, std::string_view(sample.text));
}

/// First level token (A1..C2, any case) standing as a whole word. Letters, digits and
/// non-ASCII bytes count as word characters, so "B1" in "B1-Niveau" matches but "AB12" does not.
inline std::optional<CefrLevel> parse_level(std::string_view raw) noexcept
{
    auto is_word = [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || c == '_';
    };
    for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
        if (i > 0 && is_word(raw[i - 1])) {
            continue;
        }
        if (i + 2 < raw.size() && is_word(raw[i + 2])) {
            continue;
        }
        if (auto level = CefrLevel::try_parse(raw.substr(i, 2))) {
            return level;
        }
    }
    return std::nullopt;
}

} // namespace cefr
