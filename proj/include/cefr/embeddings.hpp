#pragma once

// Contextualised embedding vectors with gold levels, as exported by the hidden-state extractor.
//
// Text variant (JSON Lines):
//   line 1:   {"dim":D,"model":"...","layer":"last","token":"last","count":N, ...extra provenance...}
//   lines 2+: {"id":"...","level":"A1".."C2","vector":[D numbers]}        (exactly N records)
// Binary variant: the same header line with "encoding":"f32le" added, then N records of
//   u32 id byte length | id bytes | u8 level index | D x float32, all little-endian.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "cefr/corpus.hpp"
#include "cefr/error.hpp"
#include "cefr/levels.hpp"

namespace cefr {

struct EmbeddingRecord
{
    std::string sample_id;
    CefrLevel level;
    std::vector<double> vector;

    bool operator==(const EmbeddingRecord&) const = default;
};

inline CefrLevel level_of(const EmbeddingRecord& r) noexcept
{
    return r.level;
}

inline std::string_view id_of(const EmbeddingRecord& r) noexcept
{
    return r.sample_id;
}

struct EmbeddingDataset
{
    std::size_t dim = 0;
    std::string model;
    std::string layer = "last";
    std::string token = "last";
    /// Any further header keys (e.g. precision), preserved on write.
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    std::vector<EmbeddingRecord> records;
};

inline constexpr std::string_view kBinaryEncoding = "f32le";

namespace detail {

/// Replaces bare NaN / Infinity / -Infinity tokens and overflowing literals such as 1e999 outside
/// strings with null, so that files written by permissive JSON emitters can be diagnosed as
/// NonFiniteValue rather than a parse error.
inline std::string neutralise_nonfinite_tokens(std::string_view line)
{
    std::string out;
    out.reserve(line.size());
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string) {
            out.push_back(c);
            if (c == '\\' && i + 1 < line.size()) {
                out.push_back(line[++i]);
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            out.push_back(c);
            continue;
        }
        bool replaced = false;
        for (std::string_view token : {"-Infinity", "Infinity", "NaN"}) {
            if (line.substr(i, token.size()) == token) {
                out += "null";
                i += token.size() - 1;
                replaced = true;
                break;
            }
        }
        if (!replaced && (c == '-' || (c >= '0' && c <= '9'))) {
            std::size_t end = i + 1;
            while (end < line.size() && std::string_view("0123456789.eE+-").find(line[end]) != std::string_view::npos) {
                ++end;
            }
            const std::string literal(line.substr(i, end - i));
            const double v = std::strtod(literal.c_str(), nullptr);
            out += std::isfinite(v) ? literal : std::string("null");
            i = end - 1;
            replaced = true;
        }
        if (!replaced) {
            out.push_back(c);
        }
    }
    return out;
}

inline void read_header(const nlohmann::json& h, EmbeddingDataset& ds, std::size_t& count, bool& binary)
{
    if (!h.is_object()) {
        throw BadHeader("header line is not a JSON object");
    }
    if (!h.contains("dim") || !h["dim"].is_number_integer() || h["dim"].get<long long>() <= 0) {
        throw BadHeader("'dim' must be a positive integer");
    }
    if (!h.contains("count") || !h["count"].is_number_integer() || h["count"].get<long long>() < 0) {
        throw BadHeader("'count' must be a non-negative integer");
    }
    for (const char* key : {"model", "layer", "token"}) {
        if (!h.contains(key) || !h[key].is_string() || h[key].get<std::string>().empty()) {
            throw BadHeader(std::string("'") + key + "' provenance tag is missing");
        }
    }
    ds.dim = h["dim"].get<std::size_t>();
    count = h["count"].get<std::size_t>();
    ds.model = h["model"].get<std::string>();
    ds.layer = h["layer"].get<std::string>();
    ds.token = h["token"].get<std::string>();
    binary = false;
    if (h.contains("encoding")) {
        if (!h["encoding"].is_string() || h["encoding"].get<std::string>() != kBinaryEncoding) {
            throw BadHeader("unsupported encoding");
        }
        binary = true;
    }
    for (const auto& [key, value] : h.items()) {
        if (key != "dim" && key != "count" && key != "model" && key != "layer" && key != "token" &&
            key != "encoding") {
            ds.extra[key] = value;
        }
    }
}

inline nlohmann::ordered_json header_json(const EmbeddingDataset& ds, bool binary)
{
    nlohmann::ordered_json h;
    h["dim"] = ds.dim;
    h["model"] = ds.model;
    h["layer"] = ds.layer;
    h["token"] = ds.token;
    h["count"] = ds.records.size();
    if (binary) {
        h["encoding"] = kBinaryEncoding;
    }
    for (const auto& [key, value] : ds.extra.items()) {
        h[key] = value;
    }
    return h;
}

template <class T>
T read_le(std::istream& in, const std::string& what)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw ParseError(0, "truncated binary record (" + what + ")");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    if constexpr (std::is_same_v<T, float>) {
        return std::bit_cast<float>(static_cast<std::uint32_t>(v));
    } else {
        return static_cast<T>(v);
    }
}

template <class T>
void write_le(std::ostream& out, T value)
{
    std::uint64_t v;
    if constexpr (std::is_same_v<T, float>) {
        v = std::bit_cast<std::uint32_t>(value);
    } else {
        v = static_cast<std::uint64_t>(value);
    }
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

inline void check_finite(const EmbeddingRecord& r)
{
    for (double x : r.vector) {
        if (!std::isfinite(x)) {
            throw NonFiniteValue(r.sample_id);
        }
    }
}

} // namespace detail

inline EmbeddingDataset read_embeddings(std::istream& in)
{
    EmbeddingDataset ds;
    std::string line;
    if (!std::getline(in, line)) {
        throw BadHeader("file is empty");
    }
    const auto header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded()) {
        throw BadHeader("header line is not valid JSON");
    }
    std::size_t count = 0;
    bool binary = false;
    detail::read_header(header, ds, count, binary);
    ds.records.reserve(count);

    if (binary) {
        for (std::size_t n = 0; n < count; ++n) {
            EmbeddingRecord r;
            const auto id_len = detail::read_le<std::uint32_t>(in, "id length");
            r.sample_id.resize(id_len);
            if (!in.read(r.sample_id.data(), id_len)) {
                throw ParseError(n + 2, "truncated binary record (id)");
            }
            const auto level = detail::read_le<std::uint8_t>(in, "level");
            if (level >= kLevelCount) {
                throw InvalidLevelLabel("index " + std::to_string(level));
            }
            r.level = CefrLevel::from_index(level);
            r.vector.resize(ds.dim);
            for (auto& x : r.vector) {
                x = detail::read_le<float>(in, "vector of " + r.sample_id);
            }
            detail::check_finite(r);
            ds.records.push_back(std::move(r));
        }
        if (in.peek() != std::char_traits<char>::eof()) {
            throw ParseError(count + 2, "trailing bytes after " + std::to_string(count) + " records");
        }
        return ds;
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            j = nlohmann::json::parse(detail::neutralise_nonfinite_tokens(line), nullptr, false);
            if (j.is_discarded()) {
                throw ParseError(line_no, "record is not valid JSON");
            }
        }
        if (!j.is_object()) {
            throw ParseError(line_no, "record is not a JSON object");
        }
        for (const char* key : {"id", "level", "vector"}) {
            if (!j.contains(key)) {
                throw MissingField(line_no, key);
            }
        }
        if (!j["id"].is_string() || !j["level"].is_string() || !j["vector"].is_array()) {
            throw ParseError(line_no, "record fields have the wrong types");
        }
        EmbeddingRecord r;
        r.sample_id = j["id"].get<std::string>();
        r.level = CefrLevel::parse(j["level"].get<std::string>());
        const auto& v = j["vector"];
        if (v.size() != ds.dim) {
            throw DimMismatch("record " + r.sample_id, ds.dim, v.size());
        }
        r.vector.reserve(ds.dim);
        for (const auto& x : v) {
            if (x.is_null()) {
                throw NonFiniteValue(r.sample_id);
            }
            if (!x.is_number()) {
                throw ParseError(line_no, "vector component is not a number");
            }
            r.vector.push_back(x.get<double>());
        }
        detail::check_finite(r);
        ds.records.push_back(std::move(r));
    }
    if (ds.records.size() != count) {
        throw ParseError(line_no, "header announces " + std::to_string(count) + " records, found " +
                                      std::to_string(ds.records.size()));
    }
    return ds;
}

inline EmbeddingDataset load_embeddings(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open embedding file '" + path + "'");
    }
    return read_embeddings(in);
}

inline void write_embeddings(std::ostream& out, const EmbeddingDataset& ds, bool binary = false)
{
    for (const auto& r : ds.records) {
        if (r.vector.size() != ds.dim) {
            throw DimMismatch("record " + r.sample_id, ds.dim, r.vector.size());
        }
        detail::check_finite(r);
    }
    out << detail::header_json(ds, binary).dump() << '\n';
    for (const auto& r : ds.records) {
        if (binary) {
            detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.sample_id.size()));
            out.write(r.sample_id.data(), static_cast<std::streamsize>(r.sample_id.size()));
            detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(r.level.index()));
            for (double x : r.vector) {
                detail::write_le<float>(out, static_cast<float>(x));
            }
        } else {
            nlohmann::ordered_json j;
            j["id"] = r.sample_id;
            j["level"] = r.level.str();
            j["vector"] = r.vector;
            out << j.dump() << '\n';
        }
    }
}

inline void save_embeddings(const std::string& path, const EmbeddingDataset& ds, bool binary = false)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write embedding file '" + path + "'");
    }
    write_embeddings(out, ds, binary);
}

} // namespace cefr
