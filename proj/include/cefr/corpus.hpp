#pragma once

// Learner-text datasets: the interchange JSONL format, a CSV adapter, the Falko C-test to
// CEFR mapping, source x level distribution reports and duplicate detection.
//
// Interchange JSONL: one object per line with
//   id (string, required), text (string, required, non-blank), source (string, required),
//   level ("A1".."C2", optional), ctest_score (integer 0..100, optional),
//   needs_review (bool, optional, default false).
// Blank lines are ignored. Native Falko/MERLIN exports are converted to this format outside
// the tool (see README).

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "cefr/error.hpp"
#include "cefr/levels.hpp"

namespace cefr {

enum class SourceKind
{
    falko_essay_l2,
    falko_summary_l1,
    falko_summary_l2,
    merlin,
    synthetic,
    other,
};

/// Provenance tag of a text. Unknown tags are kept verbatim as `other`.
struct Source
{
    SourceKind kind = SourceKind::other;
    std::string other_name;

    static Source parse(std::string_view tag)
    {
        static constexpr std::array<std::pair<std::string_view, SourceKind>, 5> known{{
            {"falko_essay_l2", SourceKind::falko_essay_l2},
            {"falko_summary_l1", SourceKind::falko_summary_l1},
            {"falko_summary_l2", SourceKind::falko_summary_l2},
            {"merlin", SourceKind::merlin},
            {"synthetic", SourceKind::synthetic},
        }};
        for (const auto& [name, kind] : known) {
            if (tag == name) {
                return Source{kind, {}};
            }
        }
        return Source{SourceKind::other, std::string(tag)};
    }

    std::string str() const
    {
        switch (kind) {
        case SourceKind::falko_essay_l2: return "falko_essay_l2";
        case SourceKind::falko_summary_l1: return "falko_summary_l1";
        case SourceKind::falko_summary_l2: return "falko_summary_l2";
        case SourceKind::merlin: return "merlin";
        case SourceKind::synthetic: return "synthetic";
        case SourceKind::other: break;
        }
        return other_name;
    }

    bool operator==(const Source&) const = default;

    /// Canonical report order: the known corpora first, then other tags alphabetically.
    bool operator<(const Source& rhs) const
    {
        if (kind != rhs.kind) {
            return kind < rhs.kind;
        }
        return other_name < rhs.other_name;
    }
};

struct TextSample
{
    std::string id;
    std::string text;
    Source source;
    std::optional<CefrLevel> level;
    std::optional<int> ctest_score;
    bool needs_review = false;

    bool operator==(const TextSample&) const = default;
};

inline std::string trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(ws);
    return std::string(s.substr(first, last - first + 1));
}

/// Collapses every whitespace run to one space and trims; the key for exact duplicate detection.
inline std::string normalize_whitespace(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

enum class InputFormat
{
    interchange_jsonl,
    csv,
};

inline InputFormat parse_input_format(std::string_view text)
{
    if (text == "jsonl" || text == "interchange_jsonl" || text == "interchange") {
        return InputFormat::interchange_jsonl;
    }
    if (text == "csv") {
        return InputFormat::csv;
    }
    throw InvalidArgument("unknown input format '" + std::string(text) + "'");
}

namespace detail {

inline int checked_ctest_score(long long value, std::size_t line)
{
    if (value < 0 || value > 100) {
        throw ParseError(line, "ctest_score " + std::to_string(value) + " outside [0,100]");
    }
    return static_cast<int>(value);
}

inline void require_text(const std::string& text, std::size_t line)
{
    if (trim(text).empty()) {
        throw ParseError(line, "text is empty");
    }
}

inline TextSample sample_from_json(const nlohmann::json& j, std::size_t line)
{
    if (!j.is_object()) {
        throw ParseError(line, "expected a JSON object");
    }
    auto required_string = [&](const char* key) {
        if (!j.contains(key) || j.at(key).is_null()) {
            throw MissingField(line, key);
        }
        if (!j.at(key).is_string()) {
            throw ParseError(line, std::string("'") + key + "' must be a string");
        }
        return j.at(key).get<std::string>();
    };
    TextSample s;
    s.id = required_string("id");
    if (s.id.empty()) {
        throw ParseError(line, "id is empty");
    }
    s.text = required_string("text");
    require_text(s.text, line);
    s.source = Source::parse(required_string("source"));
    if (j.contains("level") && !j.at("level").is_null()) {
        if (!j.at("level").is_string()) {
            throw ParseError(line, "'level' must be a string");
        }
        s.level = CefrLevel::parse(j.at("level").get<std::string>());
    }
    if (j.contains("ctest_score") && !j.at("ctest_score").is_null()) {
        if (!j.at("ctest_score").is_number_integer()) {
            throw ParseError(line, "'ctest_score' must be an integer");
        }
        s.ctest_score = checked_ctest_score(j.at("ctest_score").get<long long>(), line);
    }
    if (j.contains("needs_review") && !j.at("needs_review").is_null()) {
        if (!j.at("needs_review").is_boolean()) {
            throw ParseError(line, "'needs_review' must be a boolean");
        }
        s.needs_review = j.at("needs_review").get<bool>();
    }
    return s;
}

inline void check_unique(std::vector<TextSample>& samples, const std::vector<std::size_t>& lines)
{
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!seen.insert(samples[i].id).second) {
            throw ParseError(lines[i], "duplicate id '" + samples[i].id + "'");
        }
    }
}

} // namespace detail

inline nlohmann::ordered_json to_json(const TextSample& s)
{
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["text"] = s.text;
    j["source"] = s.source.str();
    if (s.level) {
        j["level"] = s.level->str();
    }
    if (s.ctest_score) {
        j["ctest_score"] = *s.ctest_score;
    }
    if (s.needs_review) {
        j["needs_review"] = true;
    }
    return j;
}

inline std::vector<TextSample> read_interchange(std::istream& in)
{
    std::vector<TextSample> samples;
    std::vector<std::size_t> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, e.what());
        }
        samples.push_back(detail::sample_from_json(j, line_no));
        lines.push_back(line_no);
    }
    detail::check_unique(samples, lines);
    return samples;
}

inline void write_interchange(std::ostream& out, std::span<const TextSample> samples)
{
    for (const auto& s : samples) {
        out << to_json(s).dump() << '\n';
    }
}

/// RFC 4180 records: quoted fields may contain separators, doubled quotes and newlines.
/// Each record is returned with the (1-based) line on which it starts.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv_records(std::istream& in)
{
    std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;
    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = fields.size() == 1 && fields.front().empty();
        if (!blank) {
            records.emplace_back(record_line, std::move(fields));
        }
        fields.clear();
    };
    char c;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started || !field.empty()) {
                throw ParseError(line, "stray quote inside unquoted field");
            }
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            record_line = line;
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw ParseError(record_line, "unterminated quoted field");
    }
    if (field_started || !field.empty() || !fields.empty()) {
        end_record();
    }
    return records;
}

/// CSV adapter: a header row naming at least id, text, source; optional level, ctest_score, needs_review.
inline std::vector<TextSample> read_csv(std::istream& in)
{
    auto records = read_csv_records(in);
    if (records.empty()) {
        return {};
    }
    const auto& header = records.front().second;
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        column[trim(header[i])] = i;
    }
    for (const char* required : {"id", "text", "source"}) {
        if (!column.contains(required)) {
            throw MissingField(records.front().first, required);
        }
    }
    auto cell = [&](const std::vector<std::string>& row, const char* name) -> std::optional<std::string> {
        auto it = column.find(name);
        if (it == column.end() || it->second >= row.size()) {
            return std::nullopt;
        }
        return row[it->second];
    };

    std::vector<TextSample> samples;
    std::vector<std::size_t> lines;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& [line, row] = records[r];
        if (row.size() != header.size()) {
            throw ParseError(line, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(row.size()));
        }
        TextSample s;
        s.id = trim(*cell(row, "id"));
        if (s.id.empty()) {
            throw ParseError(line, "id is empty");
        }
        s.text = *cell(row, "text");
        detail::require_text(s.text, line);
        const auto source = trim(*cell(row, "source"));
        if (source.empty()) {
            throw MissingField(line, "source");
        }
        s.source = Source::parse(source);
        if (auto level = cell(row, "level"); level && !trim(*level).empty()) {
            s.level = CefrLevel::parse(trim(*level));
        }
        if (auto score = cell(row, "ctest_score"); score && !trim(*score).empty()) {
            const auto text = trim(*score);
            std::size_t used = 0;
            long long value = 0;
            try {
                value = std::stoll(text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != text.size()) {
                throw ParseError(line, "ctest_score '" + text + "' is not an integer");
            }
            s.ctest_score = detail::checked_ctest_score(value, line);
        }
        if (auto review = cell(row, "needs_review"); review) {
            const auto v = trim(*review);
            if (v == "true" || v == "1" || v == "yes") {
                s.needs_review = true;
            } else if (!(v.empty() || v == "false" || v == "0" || v == "no")) {
                throw ParseError(line, "needs_review '" + v + "' is not a boolean");
            }
        }
        samples.push_back(std::move(s));
        lines.push_back(line);
    }
    detail::check_unique(samples, lines);
    return samples;
}

inline std::vector<TextSample> ingest(std::istream& in, InputFormat format)
{
    return format == InputFormat::csv ? read_csv(in) : read_interchange(in);
}

inline std::vector<TextSample> ingest(const std::string& path, InputFormat format)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    return ingest(in, format);
}

/// Falko C-test score to CEFR: 60-79 B2, 80-89 C1, 90-100 C2. Nothing below 60 is mapped.
inline CefrLevel map_ctest_to_cefr(int score)
{
    if (score < 0 || score > 100) {
        throw ScoreOutOfBounds(score);
    }
    if (score < 60) {
        throw ScoreBelowMappedRange(score);
    }
    if (score <= 79) {
        return levels::B2;
    }
    if (score <= 89) {
        return levels::C1;
    }
    return levels::C2;
}

struct ExcludedSample
{
    TextSample sample;
    std::string reason;
};

struct CtestLabeling
{
    std::vector<TextSample> samples;
    std::vector<ExcludedSample> excluded;
    std::vector<std::string> warnings;
};

inline constexpr std::string_view kBelowMappedRange = "below mapped range";

/// Labels unlabeled C-test-scored samples. An explicit label always wins over the mapping;
/// a disagreement is reported as a warning. Unlabeled samples scoring below 60 are excluded.
inline CtestLabeling apply_ctest_labels(std::vector<TextSample> samples)
{
    CtestLabeling result;
    for (auto& s : samples) {
        if (!s.ctest_score) {
            result.samples.push_back(std::move(s));
            continue;
        }
        std::optional<CefrLevel> mapped;
        std::string failure;
        try {
            mapped = map_ctest_to_cefr(*s.ctest_score);
        } catch (const ScoreBelowMappedRange&) {
            failure = std::string(kBelowMappedRange);
        } catch (const ScoreOutOfBounds&) {
            failure = "score out of bounds";
        }
        if (s.level) {
            if (mapped != s.level) {
                result.warnings.push_back("sample '" + s.id + "': explicit level " + s.level->str() +
                                          " kept over C-test score " + std::to_string(*s.ctest_score) + " (" +
                                          (mapped ? "maps to " + mapped->str() : failure) + ")");
            }
            result.samples.push_back(std::move(s));
        } else if (mapped) {
            s.level = mapped;
            result.samples.push_back(std::move(s));
        } else {
            result.excluded.push_back({std::move(s), failure});
        }
    }
    return result;
}

inline void write_exclusions(std::ostream& out, std::span<const ExcludedSample> excluded)
{
    for (const auto& e : excluded) {
        auto j = to_json(e.sample);
        j["reason"] = e.reason;
        out << j.dump() << '\n';
    }
}

/// Groups of ids whose texts are identical after whitespace normalisation, in first-seen order.
inline std::vector<std::vector<std::string>> find_duplicate_texts(std::span<const TextSample> samples)
{
    std::unordered_map<std::string, std::size_t> group_of;
    std::vector<std::vector<std::string>> groups;
    for (const auto& s : samples) {
        auto [it, inserted] = group_of.try_emplace(normalize_whitespace(s.text), groups.size());
        if (inserted) {
            groups.emplace_back();
        }
        groups[it->second].push_back(s.id);
    }
    std::erase_if(groups, [](const auto& g) { return g.size() < 2; });
    return groups;
}

struct DistributionRow
{
    Source source;
    std::array<std::size_t, kLevelCount> counts{};

    std::size_t total() const noexcept
    {
        std::size_t sum = 0;
        for (auto c : counts) {
            sum += c;
        }
        return sum;
    }
};

struct DistributionReport
{
    std::vector<DistributionRow> rows;
    std::array<std::size_t, kLevelCount> totals{};
    std::size_t total = 0;
};

inline DistributionReport distribution_report(std::span<const TextSample> samples)
{
    std::map<Source, std::array<std::size_t, kLevelCount>> table;
    DistributionReport report;
    for (const auto& s : samples) {
        if (!s.level) {
            throw UnlabeledSample(s.id);
        }
        ++table[s.source][s.level->index()];
        ++report.totals[s.level->index()];
        ++report.total;
    }
    for (const auto& [source, counts] : table) {
        report.rows.push_back({source, counts});
    }
    return report;
}

inline std::string render_distribution_text(const DistributionReport& report)
{
    std::size_t name_width = 12;
    for (const auto& row : report.rows) {
        name_width = std::max(name_width, row.source.str().size());
    }
    std::ostringstream out;
    auto cell = [&](const std::string& s, std::size_t w) {
        out << std::string(w > s.size() ? w - s.size() : 0, ' ') << s;
    };
    out << std::string("source") << std::string(name_width - 6, ' ');
    for (auto label : CefrLevel::kLabels) {
        cell(std::string(label), 6);
    }
    cell("total", 7);
    out << '\n';
    auto line = [&](const std::string& name, const std::array<std::size_t, kLevelCount>& counts, std::size_t total) {
        out << name << std::string(name_width - name.size(), ' ');
        for (auto c : counts) {
            cell(std::to_string(c), 6);
        }
        cell(std::to_string(total), 7);
        out << '\n';
    };
    for (const auto& row : report.rows) {
        line(row.source.str(), row.counts, row.total());
    }
    line("total", report.totals, report.total);
    return out.str();
}

inline std::string distribution_to_csv(const DistributionReport& report)
{
    std::ostringstream out;
    out << "source,A1,A2,B1,B2,C1,C2,total\n";
    auto line = [&](const std::string& name, const std::array<std::size_t, kLevelCount>& counts, std::size_t total) {
        out << name;
        for (auto c : counts) {
            out << ',' << c;
        }
        out << ',' << total << '\n';
    };
    for (const auto& row : report.rows) {
        line(row.source.str(), row.counts, row.total());
    }
    line("total", report.totals, report.total);
    return out.str();
}

inline nlohmann::ordered_json to_json(const DistributionReport& report)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"source", row.source.str()}, {"counts", row.counts}, {"total", row.total()}});
    }
    nlohmann::ordered_json j;
    j["labels"] = CefrLevel::kLabels;
    j["rows"] = rows;
    j["totals"] = report.totals;
    j["total"] = report.total;
    return j;
}

} // namespace cefr
