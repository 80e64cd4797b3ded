#pragma once

// Run configuration for cefrtk: TOML file + ${ENV} interpolation + flag overrides, and the run
// directory that records what a command produced.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <toml.hpp>

#include "cefr/cefr.hpp"

namespace cefrtk {

using json = nlohmann::ordered_json;

inline std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw cefr::Error("sha256 failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return out.str();
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw cefr::InputError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Replaces every ${NAME} with the value of environment variable NAME.
inline std::string interpolate(std::string_view text, const std::string& where)
{
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find("${", pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        const auto close = text.find('}', open + 2);
        if (close == std::string_view::npos) {
            throw cefr::InvalidArgument(where + ": unterminated ${ in '" + std::string(text) + "'");
        }
        const std::string name(text.substr(open + 2, close - open - 2));
        if (name.empty()) {
            throw cefr::InvalidArgument(where + ": empty ${} reference");
        }
        const char* value = std::getenv(name.c_str());
        if (value == nullptr) {
            throw cefr::InvalidArgument(where + ": environment variable " + name + " is not set");
        }
        out.append(text.substr(pos, open - pos));
        out.append(value);
        pos = close + 1;
    }
    return out;
}

namespace detail {

inline void toml_to_json(const toml::node& node, json& raw, json& expanded, const std::string& where)
{
    if (const auto* t = node.as_table()) {
        raw = json::object();
        expanded = json::object();
        for (auto&& [key, value] : *t) {
            const std::string k(key.str());
            if (k == "api_key" || k == "key" || k == "token" || k == "secret") {
                throw cefr::InvalidArgument(where + "." + k +
                                            ": secrets are not read from config; name the variable in api_key_env");
            }
            toml_to_json(value, raw[k], expanded[k], where.empty() ? k : where + "." + k);
        }
    } else if (const auto* a = node.as_array()) {
        raw = json::array();
        expanded = json::array();
        for (std::size_t i = 0; i < a->size(); ++i) {
            json r;
            json e;
            toml_to_json(*a->get(i), r, e, where + "[" + std::to_string(i) + "]");
            raw.push_back(std::move(r));
            expanded.push_back(std::move(e));
        }
    } else if (const auto* s = node.as_string()) {
        raw = s->get();
        expanded = interpolate(s->get(), where);
    } else if (const auto* i = node.as_integer()) {
        raw = expanded = i->get();
    } else if (const auto* f = node.as_floating_point()) {
        raw = expanded = f->get();
    } else if (const auto* b = node.as_boolean()) {
        raw = expanded = b->get();
    } else {
        throw cefr::InvalidArgument(where + ": dates and times are not supported in config");
    }
}

} // namespace detail

/// Effective configuration. `raw` keeps ${NAME} references unexpanded and is what gets recorded;
/// `values` is what commands read.
struct Config
{
    json raw = json::object();
    json values = json::object();

    static Config from_toml_text(std::string_view text, const std::string& source)
    {
        toml::table table;
        try {
            table = toml::parse(text, source);
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << source << ":" << e.source().begin.line << ": " << e.description();
            throw cefr::ParseError(static_cast<std::size_t>(e.source().begin.line), msg.str());
        }
        Config c;
        detail::toml_to_json(table, c.raw, c.values, "");
        return c;
    }

    static Config from_file(const std::string& path)
    {
        return from_toml_text(read_file(path), path);
    }

    /// Sets a value given on the command line; `path` is dotted ("probe.epochs").
    void set(const std::string& path, const json& value)
    {
        const auto pointer = json::json_pointer("/" + replace_dots(path));
        raw[pointer] = value;
        values[pointer] = value;
    }

    bool has(const std::string& path) const
    {
        return values.contains(json::json_pointer("/" + replace_dots(path)));
    }

    template <class T>
    T get(const std::string& path, T fallback) const
    {
        const auto pointer = json::json_pointer("/" + replace_dots(path));
        if (!values.contains(pointer)) {
            return fallback;
        }
        return convert<T>(values.at(pointer), path);
    }

    template <class T>
    T require(const std::string& path) const
    {
        const auto pointer = json::json_pointer("/" + replace_dots(path));
        if (!values.contains(pointer)) {
            throw cefr::InvalidArgument("missing config value '" + path + "'");
        }
        return convert<T>(values.at(pointer), path);
    }

    /// Digest of everything that can change results; the output location is not part of it.
    std::string hash() const
    {
        auto v = values;
        v.erase("run_dir");
        return "sha256:" + sha256_hex(v.dump());
    }

    template <class T>
    static T convert(const json& v, const std::string& path)
    {
        try {
            if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) {
                    throw cefr::InvalidArgument("");
                }
            }
            return v.get<T>();
        } catch (const std::exception&) {
            throw cefr::InvalidArgument("config value '" + path + "' has the wrong type: " + v.dump());
        }
    }

private:
    static std::string replace_dots(std::string path)
    {
        std::replace(path.begin(), path.end(), '.', '/');
        return path;
    }
};

/// Resolves an endpoint table, falling back to [endpoint] for anything the table leaves out.
inline cefr::EndpointConfig endpoint_from(const json& table, const json& defaults, std::uint64_t seed)
{
    auto pick = [&](const char* key) -> const json* {
        if (table.is_object() && table.contains(key)) {
            return &table.at(key);
        }
        if (defaults.is_object() && defaults.contains(key)) {
            return &defaults.at(key);
        }
        return nullptr;
    };
    auto field = [&]<class T>(const char* key, T fallback) {
        const json* v = pick(key);
        return v ? Config::convert<T>(*v, std::string("endpoint.") + key) : fallback;
    };
    cefr::EndpointConfig c;
    c.base_url = field("base_url", std::string());
    c.model_id = field("model_id", std::string());
    c.api_key_env = field("api_key_env", std::string());
    c.temperature = field("temperature", c.temperature);
    c.max_tokens = field("max_tokens", c.max_tokens);
    c.timeout = std::chrono::milliseconds(field("timeout_ms", static_cast<long long>(c.timeout.count())));
    c.max_retries = field("max_retries", c.max_retries);
    c.concurrency_limit = field("concurrency_limit", c.concurrency_limit);
    c.retry.base = std::chrono::milliseconds(field("retry_base_ms", static_cast<long long>(c.retry.base.count())));
    c.retry.cap = std::chrono::milliseconds(field("retry_cap_ms", static_cast<long long>(c.retry.cap.count())));
    c.retry.factor = field("retry_factor", c.retry.factor);
    c.retry.jitter = field("retry_jitter", c.retry.jitter);
    c.seed = seed;
    c.validate();
    return c;
}

/// Output directory of one command. Files are recorded as written; finish() adds manifest.json.
class RunDir
{
public:
    RunDir(std::string path, std::string command) : path_(std::move(path)), command_(std::move(command))
    {
        std::error_code ec;
        std::filesystem::create_directories(path_, ec);
        if (ec) {
            throw cefr::InputError("cannot create run directory '" + path_ + "': " + ec.message());
        }
    }

    const std::string& path() const noexcept { return path_; }

    std::string file(const std::string& name) const { return (std::filesystem::path(path_) / name).string(); }

    void write(const std::string& name, std::string_view content)
    {
        std::ofstream out(file(name), std::ios::binary | std::ios::trunc);
        if (!out) {
            throw cefr::InputError("cannot write '" + file(name) + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        outputs_.insert(name);
    }

    void input(const std::string& role, const std::string& path) { inputs_[role] = path; }

    void finish(const Config& config)
    {
        json inputs = json::object();
        for (const auto& [role, path] : inputs_) {
            inputs[role] = {{"path", path}, {"sha256", sha256_hex(read_file(path))}};
        }
        json m;
        m["tool"] = "cefrtk";
        m["version"] = CEFR_VERSION;
        m["prompt_assets"] = std::string(cefr::kPromptAssetVersion);
        m["command"] = command_;
        m["config_hash"] = config.hash();
        m["config"] = config.raw;
        m["inputs"] = std::move(inputs);
        m["outputs"] = std::vector<std::string>(outputs_.begin(), outputs_.end());
        std::ofstream out(file("manifest.json"), std::ios::binary | std::ios::trunc);
        out << m.dump(2) << '\n';
    }

private:
    std::string path_;
    std::string command_;
    std::set<std::string> outputs_;
    std::map<std::string, std::string> inputs_;
};

} // namespace cefrtk
