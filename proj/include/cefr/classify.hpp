#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cefr/chat_client.hpp"
#include "cefr/corpus.hpp"
#include "cefr/metrics.hpp"
#include "cefr/metrics_io.hpp"
#include "cefr/prompts.hpp"

namespace cefr {

/// One model response to one sample. `actual` is the gold level when known so that metrics can be
/// recomputed from persisted outcomes alone.
struct ClassificationOutcome
{
    std::string sample_id;
    std::string model_id;
    std::string template_id;
    std::optional<CefrLevel> actual;
    std::string raw_response;
    std::optional<CefrLevel> predicted;
    double latency_ms = 0.0;
    int attempt_count = 0;
    std::optional<std::string> error;

    bool operator==(const ClassificationOutcome&) const = default;
};

inline nlohmann::ordered_json to_json(const ClassificationOutcome& o)
{
    nlohmann::ordered_json j;
    j["sample_id"] = o.sample_id;
    j["model_id"] = o.model_id;
    j["template_id"] = o.template_id;
    j["actual"] = o.actual ? nlohmann::ordered_json(o.actual->str()) : nlohmann::ordered_json(nullptr);
    j["raw_response"] = o.raw_response;
    j["predicted"] = o.predicted ? nlohmann::ordered_json(o.predicted->str()) : nlohmann::ordered_json(nullptr);
    j["latency_ms"] = o.latency_ms;
    j["attempt_count"] = o.attempt_count;
    if (o.error) {
        j["error"] = *o.error;
    }
    return j;
}

inline void write_outcomes(std::ostream& out, std::span<const ClassificationOutcome> outcomes)
{
    for (const auto& o : outcomes) {
        out << to_json(o).dump() << '\n';
    }
}

inline std::vector<ClassificationOutcome> read_outcomes(std::istream& in)
{
    std::vector<ClassificationOutcome> out;
    std::string line;
    std::size_t line_no = 0;
    auto level_field = [&](const nlohmann::json& j, const char* key) -> std::optional<CefrLevel> {
        if (!j.contains(key) || j[key].is_null()) {
            return std::nullopt;
        }
        if (!j[key].is_string()) {
            throw ParseError(line_no, std::string("'") + key + "' must be a level string or null");
        }
        return CefrLevel::parse(j[key].get<std::string>());
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw ParseError(line_no, "outcome is not a JSON object");
        }
        if (!j.contains("sample_id") || !j["sample_id"].is_string()) {
            throw MissingField(line_no, "sample_id");
        }
        ClassificationOutcome o;
        o.sample_id = j["sample_id"].get<std::string>();
        o.model_id = j.value("model_id", "");
        o.template_id = j.value("template_id", "");
        o.actual = level_field(j, "actual");
        o.raw_response = j.value("raw_response", "");
        o.predicted = level_field(j, "predicted");
        o.latency_ms = j.value("latency_ms", 0.0);
        o.attempt_count = j.value("attempt_count", 0);
        if (j.contains("error") && j["error"].is_string()) {
            o.error = j["error"].get<std::string>();
        }
        out.push_back(std::move(o));
    }
    return out;
}

inline std::vector<ClassificationOutcome> read_outcomes(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open outcomes file '" + path + "'");
    }
    return read_outcomes(in);
}

/// Every outcome must carry its gold level.
inline ConfusionMatrix confusion_from_outcomes(std::span<const ClassificationOutcome> outcomes)
{
    ConfusionMatrix cm;
    for (const auto& o : outcomes) {
        if (!o.actual) {
            throw UnlabeledSample(o.sample_id);
        }
        cm.add(*o.actual, o.predicted);
    }
    return cm;
}

/// Classifies every sample; the result is index-aligned with `samples`. At most
/// concurrency_limit requests are in flight. Samples whose request failed permanently get an
/// outcome with no prediction and an error note. Throws AuthError on rejected credentials and
/// EndpointUnreachable when no sample got a response.
inline std::vector<ClassificationOutcome> classify_batch(const ChatClient& client, const PromptTemplate& tmpl,
                                                         std::span<const TextSample> samples)
{
    if (samples.empty()) {
        throw InvalidArgument("classify_batch needs at least one sample");
    }
    validate(tmpl);
    std::vector<ClassificationOutcome> outcomes(samples.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            if (abort.load()) {
                return;
            }
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) {
                return;
            }
            const auto& sample = samples[i];
            auto& o = outcomes[i];
            o.sample_id = sample.id;
            o.model_id = client.config().model_id;
            o.template_id = tmpl.id;
            o.actual = sample.level;
            try {
                const auto start = std::chrono::steady_clock::now();
                const Completion c = client.complete(render_prompt(tmpl, sample), i);
                o.latency_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                o.attempt_count = c.attempts;
                o.error = c.error;
                if (c.content) {
                    o.raw_response = *c.content;
                    o.predicted = parse_level(o.raw_response);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                abort.store(true);
                return;
            }
        }
    };

    const std::size_t threads = std::min(client.config().concurrency_limit, samples.size());
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    const bool any_response =
        std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return !o.error.has_value(); });
    if (!any_response) {
        throw EndpointUnreachable("endpoint " + client.config().model_id + " failed for all " +
                                  std::to_string(samples.size()) + " samples: " + outcomes.front().error.value_or(""));
    }
    return outcomes;
}

struct ModelComparison
{
    std::string model_id;
    std::optional<MetricsReport> report;
    std::optional<std::string> error;
    std::vector<ClassificationOutcome> outcomes;
};

/// Runs every endpoint over the same samples. A failing endpoint is recorded with its error and
/// does not stop the others. Successful models are ordered by accuracy ascending (ties by model id),
/// failed ones follow in input order.
inline std::vector<ModelComparison> compare_models(std::span<const ChatClient> clients, const PromptTemplate& tmpl,
                                                   std::span<const TextSample> samples,
                                                   MetricMode mode = MetricMode::strict)
{
    if (clients.empty()) {
        throw InvalidArgument("compare_models needs at least one endpoint");
    }
    std::vector<ModelComparison> ok;
    std::vector<ModelComparison> failed;
    for (const auto& client : clients) {
        ModelComparison m;
        m.model_id = client.config().model_id;
        try {
            m.outcomes = classify_batch(client, tmpl, samples);
            m.report = compute_report(confusion_from_outcomes(m.outcomes), mode);
            ok.push_back(std::move(m));
        } catch (const Error& e) {
            m.error = e.what();
            failed.push_back(std::move(m));
        }
    }
    std::stable_sort(ok.begin(), ok.end(), [](const ModelComparison& a, const ModelComparison& b) {
        if (a.report->accuracy != b.report->accuracy) {
            return a.report->accuracy < b.report->accuracy;
        }
        return a.model_id < b.model_id;
    });
    for (auto& f : failed) {
        ok.push_back(std::move(f));
    }
    return ok;
}

inline std::string render_comparison_text(std::span<const ModelComparison> results)
{
    std::size_t width = 5;
    for (const auto& r : results) {
        width = std::max(width, r.model_id.size());
    }
    std::string out = "model" + std::string(width - 5, ' ') + "  accuracy  group_acc\n";
    for (const auto& r : results) {
        out += r.model_id + std::string(width - r.model_id.size(), ' ');
        if (r.report) {
            const auto acc = percent(r.report->accuracy);
            const auto grp = percent(r.report->group_accuracy);
            out += "  " + std::string(8 - std::min<std::size_t>(8, acc.size()), ' ') + acc;
            out += "  " + std::string(9 - std::min<std::size_t>(9, grp.size()), ' ') + grp + "\n";
        } else {
            out += "  failed: " + r.error.value_or("") + "\n";
        }
    }
    return out;
}

} // namespace cefr
