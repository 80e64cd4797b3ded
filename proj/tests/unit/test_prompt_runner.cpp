#include <catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "cefr/classify.hpp"
#include "cefr/synthetic.hpp"
#include "fixtures.hpp"
#include "mock_server.hpp"
#include "parser_cases.hpp"

using namespace cefr;
using cefr::testing::completion_body;
using cefr::testing::MockChatServer;
using cefr::testing::MockReply;

namespace {

class ScriptedTransport final : public ChatTransport
{
public:
    using Script = std::function<HttpReply(const ChatRequest&, std::size_t call)>;

    explicit ScriptedTransport(Script script, std::chrono::milliseconds hold = {}) : script_(std::move(script)), hold_(hold) {}

    HttpReply send(const ChatRequest& request) override
    {
        const auto now = ++in_flight_;
        auto peak = max_in_flight_.load();
        while (now > peak && !max_in_flight_.compare_exchange_weak(peak, now)) {
        }
        if (hold_.count() > 0) {
            std::this_thread::sleep_for(hold_);
        }
        const auto call = calls_++;
        auto reply = script_(request, call);
        --in_flight_;
        return reply;
    }

    std::size_t calls() const { return calls_.load(); }
    int max_in_flight() const { return max_in_flight_.load(); }

private:
    Script script_;
    std::chrono::milliseconds hold_;
    std::atomic<std::size_t> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
};

EndpointConfig config_for(std::string model, std::string base_url = "http://unused.invalid/v1")
{
    EndpointConfig c;
    c.base_url = std::move(base_url);
    c.model_id = std::move(model);
    c.retry.base = std::chrono::milliseconds(1);
    c.retry.cap = std::chrono::milliseconds(2);
    return c;
}

ChatClient no_sleep(ChatClient c)
{
    c.set_sleeper([](std::chrono::milliseconds) {});
    return c;
}

/// 25 samples per level, text "Text <level> <i>".
std::vector<TextSample> balanced_150()
{
    std::vector<TextSample> out;
    for (auto level : CefrLevel::all()) {
        for (int i = 0; i < 25; ++i) {
            TextSample s;
            s.id = std::string(level.label()) + "-" + std::to_string(i);
            s.text = "Text " + s.id;
            s.source = Source::parse("merlin");
            s.level = level;
            out.push_back(std::move(s));
        }
    }
    return out;
}

/// Gold level of a balanced_150 text, recovered from the user turn.
std::string level_in(const std::string& text)
{
    return text.substr(5, 2);
}

std::string user_of(const ChatRequest& r)
{
    return r.messages.back().content;
}

// Independent oracle: split into maximal runs of word characters and take the first run
// that is exactly a level label.
std::optional<CefrLevel> tokenizer_oracle(const std::string& raw)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char c : raw) {
        const auto u = static_cast<unsigned char>(c);
        const bool word = std::isalnum(u) || c == '_' || u >= 0x80;
        if (word) {
            current.push_back(c);
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(current);
    }
    for (const auto& t : tokens) {
        if (t.size() != 2) {
            continue;
        }
        const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
        if ((letter == 'A' || letter == 'B' || letter == 'C') && (t[1] == '1' || t[1] == '2')) {
            return CefrLevel::from_index(static_cast<std::size_t>((letter - 'A') * 2 + (t[1] - '1')));
        }
    }
    return std::nullopt;
}

} // namespace

TEST_CASE("built-in templates carry the published instructions", "[prompts]")
{
    const auto msgs = render_prompt(english_base_template(), "Ich bin ein Student.");
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].role == "system");
    CHECK(msgs[0].content.find("Classify the language level") != std::string::npos);
    CHECK(msgs[1].role == "user");
    CHECK(msgs[1].content == "Ich bin ein Student.");

    CHECK(german_zero_shot_template().system_text.find("Antworte NUR mit der entsprechenden Stufe") !=
          std::string::npos);
    CHECK(german_few_shot_template().system_text.find("Hier sind jeweils Beispiele:") != std::string::npos);
    CHECK(std::string(prompt_text::synthetic_a1).rfind("Bitte generiere Texte mit dem CEFR Niveau A1", 0) == 0);

    CHECK(builtin_template("german-zero-shot").id == "german_zero_shot");
    CHECK(builtin_template("english_base").id == "english_base");
    CHECK_THROWS_AS(builtin_template("klingon"), InvalidArgument);
}

TEST_CASE("prompt asset files match the built-in texts", "[prompts]")
{
    auto slurp = [](const std::string& name) {
        std::ifstream in(std::string(CEFR_SOURCE_DIR) + "/assets/prompts/" + name, std::ios::binary);
        REQUIRE(in);
        std::stringstream ss;
        ss << in.rdbuf();
        auto s = ss.str();
        while (!s.empty() && s.back() == '\n') {
            s.pop_back();
        }
        return s;
    };
    CHECK(slurp("english_base.txt") == prompt_text::english_base);
    CHECK(slurp("german_zero_shot.txt") == prompt_text::german_zero_shot);
    CHECK(slurp("german_few_shot.txt") == prompt_text::german_few_shot);
    CHECK(slurp("synthetic_a1.txt") == prompt_text::synthetic_a1);
    CHECK(slurp("VERSION") == kPromptAssetVersion);
}

TEST_CASE("few-shot rendering embeds one example per level in ascending order", "[prompts]")
{
    FewShotBank bank;
    for (auto level : CefrLevel::all()) {
        bank[level] = "Beispiel " + level.str();
    }
    const auto t = german_few_shot_template(bank);
    const auto msgs = render_prompt(t, "Zieltext");
    const auto& system = msgs[0].content;
    std::size_t last = system.find("Hier sind jeweils Beispiele:");
    REQUIRE(last != std::string::npos);
    for (auto level : CefrLevel::all()) {
        const auto pos = system.find(level.str() + ": Beispiel " + level.str());
        REQUIRE(pos != std::string::npos);
        CHECK(pos > last);
        last = pos;
    }
    CHECK(msgs[1].content == "Zieltext");
    CHECK(render_prompt(t, "Zieltext") == msgs);

    auto missing = bank;
    missing.erase(levels::C1);
    try {
        render_prompt(german_few_shot_template(missing), "x");
        FAIL("expected MissingFewShotExample");
    } catch (const MissingFewShotExample& e) {
        CHECK(e.level() == "C1");
    }
}

TEST_CASE("user template must hold exactly one placeholder", "[prompts]")
{
    auto t = english_base_template();
    t.user_template = "Text: {text}\nLevel?";
    CHECK(render_prompt(t, "abc")[1].content == "Text: abc\nLevel?");
    t.user_template = "no placeholder";
    CHECK_THROWS_AS(render_prompt(t, "abc"), InvalidArgument);
    t.user_template = "{text} {text}";
    CHECK_THROWS_AS(render_prompt(t, "abc"), InvalidArgument);
    // The target text is inserted verbatim, even when it looks like a placeholder.
    t.user_template = "{text}";
    CHECK(render_prompt(t, "{text} ü")[1].content == "{text} ü");
}

TEST_CASE("few-shot bank file loads and validates", "[prompts]")
{
    const auto bank = load_few_shot_bank(std::string(CEFR_SOURCE_DIR) + "/assets/few_shot_bank.example.json");
    CHECK(bank.size() == 6);
    CHECK_NOTHROW(validate(german_few_shot_template(bank)));
    CHECK_THROWS_AS(load_few_shot_bank("/nonexistent/bank.json"), InputError);
}

TEST_CASE("label parser table", "[prompts]")
{
    const auto& cases = cefr::testing::parser_cases();
    REQUIRE(cases.size() >= 20);
    for (const auto& c : cases) {
        INFO("raw: " << c.raw);
        CHECK(parse_level(c.raw) == c.expect);
        CHECK(tokenizer_oracle(c.raw) == c.expect);
    }
}

TEST_CASE("label parser agrees with a tokenizer oracle on random strings", "[prompts]")
{
    const std::vector<std::string> alphabet{"a", "b", "c", "A", "B", "C", "1", "2", "3", " ", "-", "_", ".",
                                            "\n", "\xC3\xBC", ":", "x"};
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(0, 12);
    for (int trial = 0; trial < 5000; ++trial) {
        std::string raw;
        const int n = len(gen);
        for (int i = 0; i < n; ++i) {
            raw += alphabet[pick(gen)];
        }
        INFO("raw: " << raw);
        REQUIRE(parse_level(raw) == tokenizer_oracle(raw));
    }
}

TEST_CASE("label-only responses round-trip every level", "[prompts]")
{
    for (auto level : CefrLevel::all()) {
        CHECK(parse_level(level.label()) == level);
        CHECK(parse_level(level.str() + "\n") == level);
    }
}

TEST_CASE("retry delays grow exponentially and respect the cap", "[client]")
{
    RetryPolicy p;
    p.jitter = false;
    Rng rng(1);
    CHECK(p.delay(0, rng) == std::chrono::milliseconds(1000));
    CHECK(p.delay(1, rng) == std::chrono::milliseconds(2000));
    CHECK(p.delay(4, rng) == std::chrono::milliseconds(16000));
    CHECK(p.delay(5, rng) == std::chrono::milliseconds(30000));
    CHECK(p.delay(20, rng) == std::chrono::milliseconds(30000));
    p.jitter = true;
    for (int i = 0; i < 100; ++i) {
        const auto d = p.delay(2, rng);
        CHECK(d >= std::chrono::milliseconds(2000));
        CHECK(d <= std::chrono::milliseconds(4000));
    }
}

TEST_CASE("endpoint config validation", "[client]")
{
    auto c = config_for("m");
    CHECK_NOTHROW(c.validate());
    c.concurrency_limit = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = config_for("m");
    c.temperature = -0.1;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = config_for("");
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = config_for("m", "");
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("transient failures are retried and counted", "[client]")
{
    auto transport = std::make_shared<ScriptedTransport>([](const ChatRequest&, std::size_t call) -> HttpReply {
        if (call < 2) {
            return {503, "busy", {}};
        }
        return {200, completion_body("B2"), {}};
    });
    std::vector<std::chrono::milliseconds> slept;
    ChatClient client(config_for("m"), transport);
    client.set_sleeper([&](std::chrono::milliseconds d) { slept.push_back(d); });
    const auto c = client.complete({{"user", "x"}});
    CHECK(c.content == "B2");
    CHECK(c.attempts == 3);
    CHECK_FALSE(c.error);
    CHECK(slept.size() == 2);
}

TEST_CASE("retries stop at max_retries and permanent errors are not retried", "[client]")
{
    auto always_down = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {0, {}, "connection refused"}; });
    auto cfg = config_for("m");
    cfg.max_retries = 2;
    const auto c = no_sleep(ChatClient(cfg, always_down)).complete({{"user", "x"}});
    CHECK_FALSE(c.content);
    CHECK(c.attempts == 3);
    CHECK(always_down->calls() == 3);
    REQUIRE(c.error);
    CHECK(c.error->find("connection refused") != std::string::npos);

    auto bad_request = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {400, "bad", {}}; });
    const auto d = no_sleep(ChatClient(config_for("m"), bad_request)).complete({{"user", "x"}});
    CHECK(d.attempts == 1);
    CHECK(d.error == "HTTP 400");

    auto garbled = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {200, "{\"choices\":[]}", {}}; });
    const auto e = no_sleep(ChatClient(config_for("m"), garbled)).complete({{"user", "x"}});
    CHECK_FALSE(e.content);
    CHECK(e.error == "malformed completion response");

    auto denied = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {401, "no", {}}; });
    CHECK_THROWS_AS(no_sleep(ChatClient(config_for("m"), denied)).complete({{"user", "x"}}), AuthError);
}

TEST_CASE("request body follows the chat-completion schema", "[client]")
{
    ChatRequest r{"llama", {{"system", "s"}, {"user", "u"}}, 0.0, 16};
    const auto j = to_json(r);
    CHECK(j["model"] == "llama");
    CHECK(j["messages"][1]["role"] == "user");
    CHECK(j["messages"][1]["content"] == "u");
    CHECK(j["temperature"] == 0.0);
    CHECK(j["max_tokens"] == 16);
    CHECK(ChatClient::extract_content(completion_body("C1")) == "C1");
    CHECK_FALSE(ChatClient::extract_content("not json"));
}

TEST_CASE("HTTP client talks to a live endpoint and sends the key only as a header", "[client]")
{
    MockChatServer server([](const nlohmann::json& req, std::size_t) {
        return MockReply{200, completion_body("Antwort: " + cefr::testing::user_text(req).substr(0, 2))};
    });
    ::setenv("CEFR_UNIT_TEST_KEY", "sk-unit-secret-123", 1);
    auto cfg = config_for("mock-model", server.base_url());
    cfg.api_key_env = "CEFR_UNIT_TEST_KEY";
    const auto client = no_sleep(ChatClient::http(cfg));
    const auto c = client.complete({{"system", "s"}, {"user", "B1 text"}});
    CHECK(c.content == "Antwort: B1");
    const auto seen = server.seen();
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].authorization == "Bearer sk-unit-secret-123");
    CHECK(seen[0].body["model"] == "mock-model");
    CHECK(to_json(cfg).dump().find("sk-unit-secret") == std::string::npos);

    ::unsetenv("CEFR_UNIT_TEST_KEY");
    CHECK_THROWS_AS(client.complete({{"user", "x"}}), AuthError);
}

TEST_CASE("HTTP client reports an unreachable endpoint", "[client]")
{
    int port = 0;
    {
        MockChatServer probe([](const nlohmann::json&, std::size_t) { return MockReply{}; });
        port = probe.port();
    }
    auto cfg = config_for("m", "http://127.0.0.1:" + std::to_string(port) + "/v1");
    cfg.max_retries = 1;
    cfg.timeout = std::chrono::milliseconds(500);
    const auto c = no_sleep(ChatClient::http(cfg)).complete({{"user", "x"}});
    CHECK_FALSE(c.content);
    CHECK(c.attempts == 2);
}

TEST_CASE("batch of 150 against a mock endpoint keeps order and cardinality", "[classify]")
{
    const auto samples = balanced_150();
    MockChatServer server([](const nlohmann::json& req, std::size_t) {
        return MockReply{200, completion_body(level_in(cefr::testing::user_text(req)))};
    });
    auto cfg = config_for("mock", server.base_url());
    cfg.concurrency_limit = 8;
    const auto outcomes = classify_batch(no_sleep(ChatClient::http(cfg)), german_zero_shot_template(), samples);
    REQUIRE(outcomes.size() == 150);
    CHECK(server.calls() == 150);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(outcomes[i].sample_id == samples[i].id);
        CHECK(outcomes[i].predicted == samples[i].level);
        CHECK(outcomes[i].actual == samples[i].level);
        CHECK(outcomes[i].attempt_count == 1);
        CHECK(outcomes[i].template_id == "german_zero_shot");
    }
    CHECK(accuracy(confusion_from_outcomes(outcomes)) == 1);
}

TEST_CASE("batch honours retries and the concurrency limit", "[classify]")
{
    const auto samples = balanced_150();
    std::mutex m;
    std::map<std::string, int> attempts;
    auto transport = std::make_shared<ScriptedTransport>(
        [&](const ChatRequest& r, std::size_t) -> HttpReply {
            const auto text = user_of(r);
            int n;
            {
                std::lock_guard lock(m);
                n = ++attempts[text];
            }
            // Every third sample fails twice before answering.
            const int index = std::stoi(text.substr(8));
            if (index % 3 == 0 && n <= 2) {
                return {n == 1 ? 429 : 502, "", {}};
            }
            return {200, completion_body(level_in(text)), {}};
        },
        std::chrono::milliseconds(1));
    auto cfg = config_for("scripted");
    cfg.concurrency_limit = 3;
    const auto outcomes = classify_batch(no_sleep(ChatClient(cfg, transport)), english_base_template(), samples);
    REQUIRE(outcomes.size() == 150);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int index = std::stoi(samples[i].id.substr(3));
        CHECK(outcomes[i].sample_id == samples[i].id);
        CHECK(outcomes[i].attempt_count == (index % 3 == 0 ? 3 : 1));
        CHECK(outcomes[i].predicted == samples[i].level);
    }
    CHECK(transport->max_in_flight() <= 3);
    CHECK(transport->max_in_flight() >= 2);
}

TEST_CASE("permanent failures become outcomes without a prediction", "[classify]")
{
    const auto samples = balanced_150();
    auto transport = std::make_shared<ScriptedTransport>([](const ChatRequest& r, std::size_t) -> HttpReply {
        const auto text = user_of(r);
        if (text.find("C2") != std::string::npos) {
            return {400, "rejected", {}};
        }
        if (text.find("C1") != std::string::npos) {
            return {200, completion_body("Ich weiß es nicht."), {}};
        }
        return {200, completion_body("B1"), {}};
    });
    const auto outcomes =
        classify_batch(no_sleep(ChatClient(config_for("m"), transport)), english_base_template(), samples);
    const auto cm = confusion_from_outcomes(outcomes);
    CHECK(cm.unparsed(levels::C2) == 25);
    CHECK(cm.unparsed(levels::C1) == 25);
    CHECK(outcomes.back().error == "HTTP 400");
    CHECK(outcomes[100].raw_response == "Ich weiß es nicht.");
    CHECK_FALSE(outcomes[100].error);
    CHECK(accuracy(cm, MetricMode::strict) == Fraction(25, 150));
    CHECK(accuracy(cm, MetricMode::parsed_only) == Fraction(25, 100));
}

TEST_CASE("batch failures that are total or auth-related raise", "[classify]")
{
    const auto samples = balanced_150();
    auto down = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {503, "", {}}; });
    auto cfg = config_for("m");
    cfg.max_retries = 1;
    CHECK_THROWS_AS(classify_batch(no_sleep(ChatClient(cfg, down)), english_base_template(), samples),
                    EndpointUnreachable);

    auto denied = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {403, "", {}}; });
    CHECK_THROWS_AS(classify_batch(no_sleep(ChatClient(cfg, denied)), english_base_template(), samples), AuthError);
    CHECK_THROWS_AS(classify_batch(no_sleep(ChatClient(cfg, denied)), english_base_template(), {}), InvalidArgument);
    CHECK_THROWS_AS(
        classify_batch(no_sleep(ChatClient(cfg, denied)), german_few_shot_template(), samples), MissingFewShotExample);
}

TEST_CASE("outcomes persist as JSONL and replay to the identical report", "[classify]")
{
    const auto samples = balanced_150();
    auto transport = std::make_shared<ScriptedTransport>([](const ChatRequest& r, std::size_t call) -> HttpReply {
        const auto text = user_of(r);
        const auto level = CefrLevel::parse(level_in(text));
        const auto guess = CefrLevel::from_index(std::min<std::size_t>(5, level.index() + call % 2));
        return {200, completion_body(call % 7 == 0 ? "keine Ahnung" : "Level " + guess.str()), {}};
    });
    auto cfg = config_for("m");
    cfg.concurrency_limit = 1;
    auto outcomes = classify_batch(no_sleep(ChatClient(cfg, transport)), english_base_template(), samples);
    for (auto& o : outcomes) {
        o.latency_ms = 0;
    }
    std::ostringstream stored;
    write_outcomes(stored, outcomes);
    std::istringstream in(stored.str());
    const auto replayed = read_outcomes(in);
    CHECK(replayed == outcomes);
    const auto live = render_report_text(compute_report(confusion_from_outcomes(outcomes)));
    const auto again = render_report_text(compute_report(confusion_from_outcomes(replayed)));
    CHECK(live == again);

    std::istringstream broken("{\"sample_id\":\"x\",\"predicted\":\"Q9\"}\n");
    CHECK_THROWS_AS(read_outcomes(broken), InvalidLevelLabel);
    std::istringstream missing("{\"predicted\":\"A1\"}\n");
    CHECK_THROWS_AS(read_outcomes(missing), MissingField);
}

TEST_CASE("model comparison sorts by accuracy and isolates failures", "[classify]")
{
    const auto samples = balanced_150();
    MockChatServer perfect([](const nlohmann::json& req, std::size_t) {
        return MockReply{200, completion_body(level_in(cefr::testing::user_text(req)))};
    });
    MockChatServer always_b1([](const nlohmann::json&, std::size_t) { return MockReply{200, completion_body("B1")}; });
    MockChatServer broken([](const nlohmann::json&, std::size_t) { return MockReply{500, "oops"}; });
    std::vector<ChatClient> clients;
    clients.push_back(no_sleep(ChatClient::http(config_for("perfect", perfect.base_url()))));
    auto broken_cfg = config_for("broken", broken.base_url());
    broken_cfg.max_retries = 0;
    clients.push_back(no_sleep(ChatClient::http(broken_cfg)));
    clients.push_back(no_sleep(ChatClient::http(config_for("always-b1", always_b1.base_url()))));

    const auto results = compare_models(clients, english_base_template(), samples);
    REQUIRE(results.size() == 3);
    CHECK(results[0].model_id == "always-b1");
    CHECK(results[0].report->accuracy == Fraction(1, 6));
    CHECK(format_fraction(results[0].report->accuracy, 4) == "0.1667");
    CHECK(results[0].report->group_accuracy == Fraction(75, 150));
    CHECK(results[1].model_id == "perfect");
    CHECK(results[1].report->accuracy == 1);
    CHECK(results[2].model_id == "broken");
    CHECK_FALSE(results[2].report);
    CHECK(results[2].error);

    const auto table = render_comparison_text(results);
    CHECK(table.find("always-b1     16.7%      50.0%") != std::string::npos);
    CHECK(table.find("broken     failed") != std::string::npos);

    const std::vector<ChatClient> none;
    CHECK_THROWS_AS(compare_models(none, english_base_template(), samples), InvalidArgument);
    const std::vector<ChatClient> one{clients[0]};
    CHECK(compare_models(one, english_base_template(), samples).size() == 1);
}

TEST_CASE("synthetic generation issues the A1 request and flags texts for review", "[classify]")
{
    std::string long_text;
    for (int i = 0; i < 600; ++i) {
        long_text += "Wort ";
    }
    auto transport = std::make_shared<ScriptedTransport>([&](const ChatRequest& r, std::size_t) -> HttpReply {
        REQUIRE(r.messages.size() == 1);
        CHECK(r.messages[0].content == prompt_text::synthetic_a1);
        return {200, completion_body(long_text), {}};
    });
    const auto client = no_sleep(ChatClient(config_for("gen"), transport));
    const auto one = generate_synthetic(client, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].needs_review);
    CHECK(one[0].level == levels::A1);
    CHECK(one[0].source.kind == SourceKind::synthetic);
    CHECK(one[0].id == "synthetic-0001");
    const auto three = generate_synthetic(client, 3, "gen");
    CHECK(three[2].id == "gen-0003");
    for (const auto& s : three) {
        CHECK(s.needs_review);
        CHECK(s.level == levels::A1);
    }
    CHECK_THROWS_AS(generate_synthetic(client, 0), InvalidArgument);

    auto empty = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {200, completion_body("   "), {}}; });
    CHECK_THROWS_AS(generate_synthetic(no_sleep(ChatClient(config_for("gen"), empty)), 1), EmptyGeneration);
    auto down = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&, std::size_t) -> HttpReply { return {404, "", {}}; });
    CHECK_THROWS_AS(generate_synthetic(no_sleep(ChatClient(config_for("gen"), down)), 1), EndpointUnreachable);
}
