// cefrtk: command-line runner for corpus preparation, LLM classification, probing and reporting.
//
// Exit codes: 0 success, 1 internal failure (or a failed gradient check), 2 input/config error,
// 3 remote endpoint error.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "run_config.hpp"

using namespace cefr;
using cefrtk::Config;
using cefrtk::json;
using cefrtk::RunDir;

namespace {

void log(const std::string& line)
{
    std::cerr << "cefrtk: " << line << '\n';
}

/// Flag values, applied over the config file in command-line order.
class Overrides
{
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& path, const std::string& help)
    {
        return app->add_option_function<T>(
            flag, [this, path](const T& v) { items_.emplace_back(path, json(v)); }, help);
    }

    CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& path, const std::string& help)
    {
        return app->add_flag_function(
            flag, [this, path](std::int64_t) { items_.emplace_back(path, json(true)); }, help);
    }

    CLI::Option* add_archs(CLI::App* app, const std::string& flag, const std::string& path, const std::string& help)
    {
        return app->add_option_function<std::vector<std::string>>(
            flag,
            [this, path](const std::vector<std::string>& specs) {
                json archs = json::array();
                for (const auto& s : specs) {
                    archs.push_back(parse_arch(s));
                }
                items_.emplace_back(path, archs);
            },
            help);
    }

    void apply(Config& c) const
    {
        for (const auto& [path, value] : items_) {
            c.set(path, value);
        }
    }

    static json parse_arch(const std::string& spec)
    {
        json units = json::array();
        std::stringstream in(spec);
        std::string part;
        while (std::getline(in, part, ',')) {
            try {
                std::size_t used = 0;
                const long long v = std::stoll(part, &used);
                if (used != part.size() || v < 1) {
                    throw std::invalid_argument(part);
                }
                units.push_back(v);
            } catch (const std::exception&) {
                throw CLI::ValidationError("--arch", "'" + spec + "' is not a comma-separated list of layer widths");
            }
        }
        return units;
    }

private:
    std::vector<std::pair<std::string, json>> items_;
};

std::string existing_file(const Config& c, const std::string& key, const std::string& flag)
{
    if (!c.has(key)) {
        throw InvalidArgument("missing input: pass " + flag + " or set " + key);
    }
    auto path = c.require<std::string>(key);
    if (!std::filesystem::is_regular_file(path)) {
        throw InputError("file not found: " + path);
    }
    return path;
}

RunDir open_run(const Config& c, const std::string& command)
{
    if (!c.has("run_dir")) {
        throw InvalidArgument("no run directory: pass --run-dir or set run_dir");
    }
    return RunDir(c.require<std::string>("run_dir"), command);
}

std::uint64_t seed_of(const Config& c)
{
    return c.get<std::uint64_t>("seed", 0);
}

MetricMode mode_of(const Config& c)
{
    return parse_metric_mode(c.get<std::string>("mode", "strict"));
}

std::vector<TextSample> load_dataset(const std::string& path)
{
    return ingest(path, InputFormat::interchange_jsonl);
}

template <class F>
std::string render(F&& f)
{
    std::ostringstream out;
    f(out);
    return out.str();
}

PromptTemplate template_of(const Config& c, const std::string& key, RunDir* run)
{
    const auto id = c.get<std::string>(key, "german_zero_shot");
    FewShotBank bank;
    if (c.has("paths.few_shot_bank")) {
        const auto path = existing_file(c, "paths.few_shot_bank", "--few-shot-bank");
        bank = load_few_shot_bank(path);
        if (run) {
            run->input("few_shot_bank", path);
        }
    }
    auto t = builtin_template(id, std::move(bank));
    if (t.uses_few_shot && t.few_shot_bank.empty()) {
        throw InvalidArgument("template " + t.id + " needs a few-shot example bank (--few-shot-bank)");
    }
    validate(t);
    return t;
}

EndpointConfig endpoint_of(const Config& c)
{
    const json defaults = c.values.contains("endpoint") ? c.values["endpoint"] : json::object();
    return cefrtk::endpoint_from(json::object(), defaults, seed_of(c));
}

TrainConfig train_config_of(const Config& c)
{
    TrainConfig t;
    t.learning_rate = c.get("probe.learning_rate", t.learning_rate);
    t.l2 = c.get("probe.l2", t.l2);
    t.epochs = c.get("probe.epochs", t.epochs);
    t.batch_size = c.get("probe.batch_size", t.batch_size);
    t.hidden = c.get("probe.hidden", t.hidden);
    t.optimizer = parse_optimizer(c.get<std::string>("probe.optimizer", std::string(to_string(t.optimizer))));
    t.patience = c.get("probe.patience", t.patience);
    t.min_improvement = c.get("probe.min_improvement", t.min_improvement);
    t.standardize = c.get("probe.standardize", t.standardize);
    t.seed = seed_of(c);
    t.validate();
    return t;
}

std::string report_text(const MetricsReport& r, const ConfusionMatrix& cm)
{
    return render_report_text(r) + "\n" + render_matrix_text(cm);
}

json report_json(const MetricsReport& r, const ConfusionMatrix& cm)
{
    json j;
    j["report"] = json::parse(to_json(r).dump());
    j["confusion"] = json::parse(to_json(cm).dump());
    return j;
}

void write_distribution(RunDir& run, const DistributionReport& d)
{
    run.write("distribution.txt", render_distribution_text(d));
    run.write("distribution.csv", distribution_to_csv(d));
    run.write("distribution.json", to_json(d).dump(2) + "\n");
}

void warn_duplicates(std::span<const TextSample> samples)
{
    for (const auto& group : find_duplicate_texts(samples)) {
        std::string ids;
        for (const auto& id : group) {
            ids += (ids.empty() ? "" : ", ") + id;
        }
        log("warning: identical texts: " + ids);
    }
}

int cmd_ingest(const Config& c)
{
    const auto path = existing_file(c, "paths.input", "--in");
    const auto format_name =
        c.get<std::string>("ingest.format", std::filesystem::path(path).extension() == ".csv" ? "csv" : "jsonl");
    auto run = open_run(c, "ingest");
    run.input("input", path);
    auto labeled = apply_ctest_labels(ingest(path, parse_input_format(format_name)));
    for (const auto& w : labeled.warnings) {
        log("warning: " + w);
    }
    const auto dist = distribution_report(labeled.samples);
    warn_duplicates(labeled.samples);
    run.write("dataset.jsonl", render([&](std::ostream& o) { write_interchange(o, labeled.samples); }));
    run.write("exclusions.jsonl", render([&](std::ostream& o) { write_exclusions(o, labeled.excluded); }));
    write_distribution(run, dist);
    run.finish(c);
    std::cout << render_distribution_text(dist);
    log(std::to_string(labeled.samples.size()) + " samples kept, " + std::to_string(labeled.excluded.size()) +
        " excluded");
    return 0;
}

int cmd_stats(const Config& c)
{
    const auto path = existing_file(c, "paths.input", "--in");
    const auto samples = load_dataset(path);
    const auto dist = distribution_report(samples);
    warn_duplicates(samples);
    if (c.has("run_dir")) {
        auto run = open_run(c, "stats");
        run.input("input", path);
        write_distribution(run, dist);
        run.finish(c);
    }
    std::cout << render_distribution_text(dist);
    return 0;
}

int cmd_split(const Config& c)
{
    const auto path = existing_file(c, "paths.input", "--in");
    auto run = open_run(c, "split");
    run.input("input", path);
    const auto samples = load_dataset(path);
    SplitSpec spec;
    spec.per_level_train = c.get("split.per_level_train", spec.per_level_train);
    spec.per_level_test = c.get("split.per_level_test", spec.per_level_test);
    spec.seed = seed_of(c);
    const auto split = stratified_split<TextSample>(samples, spec);
    run.write("train.jsonl", render([&](std::ostream& o) { write_interchange(o, split.train); }));
    run.write("test.jsonl", render([&](std::ostream& o) { write_interchange(o, split.test); }));
    const auto k = c.get<std::size_t>("split.folds", 0);
    if (k > 0) {
        json folds = json::array();
        for (const auto& f : kfold_indices<TextSample>(samples, k, spec.seed)) {
            json ids = json::array();
            for (auto i : f.test) {
                ids.push_back(samples[i].id);
            }
            folds.push_back({{"test", ids}});
        }
        run.write("folds.json", folds.dump(2) + "\n");
    }
    run.finish(c);
    std::cout << "train: " << split.train.size() << "\ntest: " << split.test.size() << '\n';
    return 0;
}

int cmd_classify(const Config& c)
{
    auto run = open_run(c, "classify");
    std::vector<ClassificationOutcome> outcomes;
    if (c.has("paths.replay")) {
        const auto path = existing_file(c, "paths.replay", "--replay");
        run.input("replay", path);
        outcomes = read_outcomes(path);
        log("replaying " + std::to_string(outcomes.size()) + " stored outcomes");
    } else {
        const auto path = existing_file(c, "paths.input", "--in");
        run.input("input", path);
        const auto tmpl = template_of(c, "classify.template", &run);
        const auto samples = load_dataset(path);
        const auto client = ChatClient::http(endpoint_of(c));
        log("classifying " + std::to_string(samples.size()) + " samples with " + client.config().model_id + " (" +
            tmpl.id + ")");
        outcomes = classify_batch(client, tmpl, samples);
    }
    const auto cm = confusion_from_outcomes(outcomes);
    const auto report = compute_report(cm, mode_of(c));
    std::size_t failed = 0;
    for (const auto& o : outcomes) {
        failed += o.error.has_value();
    }
    if (failed > 0) {
        log("warning: " + std::to_string(failed) + " requests failed permanently");
    }
    run.write("outcomes.jsonl", render([&](std::ostream& o) { write_outcomes(o, outcomes); }));
    run.write("report.txt", report_text(report, cm));
    run.write("report.json", report_json(report, cm).dump(2) + "\n");
    run.finish(c);
    std::cout << report_text(report, cm);
    return 0;
}

std::string file_safe(std::string s)
{
    for (auto& ch : s) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '.') {
            ch = '_';
        }
    }
    return s;
}

int cmd_compare(const Config& c)
{
    const auto path = existing_file(c, "paths.input", "--in");
    auto run = open_run(c, "compare");
    run.input("input", path);
    const auto tmpl = template_of(c, "classify.template", &run);
    const auto samples = load_dataset(path);
    const json defaults = c.values.contains("endpoint") ? c.values["endpoint"] : json::object();
    std::vector<ChatClient> clients;
    if (c.has("endpoints")) {
        for (const auto& table : c.values["endpoints"]) {
            clients.push_back(ChatClient::http(cefrtk::endpoint_from(table, defaults, seed_of(c))));
        }
    }
    for (const auto& model : c.get<std::vector<std::string>>("compare.models", {})) {
        clients.push_back(ChatClient::http(cefrtk::endpoint_from({{"model_id", model}}, defaults, seed_of(c))));
    }
    if (clients.empty()) {
        throw InvalidArgument("no endpoints to compare: set [[endpoints]] or pass --model");
    }
    const auto results = compare_models(clients, tmpl, samples, mode_of(c));
    json summary = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        json entry{{"model_id", r.model_id}};
        if (r.report) {
            entry["report"] = json::parse(to_json(*r.report).dump());
        } else {
            entry["error"] = r.error.value_or("");
        }
        summary.push_back(entry);
        if (!r.outcomes.empty()) {
            run.write("outcomes-" + file_safe(r.model_id) + ".jsonl",
                      render([&](std::ostream& o) { write_outcomes(o, r.outcomes); }));
        }
    }
    run.write("comparison.txt", render_comparison_text(results));
    run.write("comparison.json", summary.dump(2) + "\n");
    run.finish(c);
    std::cout << render_comparison_text(results);
    if (std::none_of(results.begin(), results.end(), [](const auto& r) { return r.report.has_value(); })) {
        throw EndpointUnreachable("every endpoint failed");
    }
    return 0;
}

EmbeddingDataset embeddings_of(const Config& c, RunDir* run)
{
    const auto path = existing_file(c, "paths.embeddings", "--embeddings");
    if (run) {
        run->input("embeddings", path);
    }
    return load_embeddings(path);
}

int cmd_probe_train(const Config& c)
{
    auto run = open_run(c, "probe train");
    const auto ds = embeddings_of(c, &run);
    const auto config = train_config_of(c);
    const auto result = train(ds, config);
    const auto cm = evaluate(result.params, ds);
    const auto report = compute_report(cm, mode_of(c));
    run.write("model.json", to_json(result.params).dump() + "\n");
    run.write("history.csv", render([&](std::ostream& o) {
                  o << "epoch,loss,accuracy\n";
                  o << std::setprecision(17);
                  for (const auto& e : result.history) {
                      o << e.epoch << ',' << e.loss << ',' << e.accuracy << '\n';
                  }
              }));
    run.write("train_report.txt", report_text(report, cm));
    run.finish(c);
    log("trained " + std::to_string(result.history.size()) + " epochs on " + std::to_string(ds.records.size()) +
        " records");
    std::cout << report_text(report, cm);
    return 0;
}

int cmd_probe_eval(const Config& c)
{
    auto run = open_run(c, "probe eval");
    const auto model_path = existing_file(c, "paths.model", "--model");
    run.input("model", model_path);
    const auto params = load_model(model_path);
    const auto ds = embeddings_of(c, &run);
    const auto cm = evaluate(params, ds);
    const auto report = compute_report(cm, mode_of(c));
    run.write("report.txt", report_text(report, cm));
    run.write("report.json", report_json(report, cm).dump(2) + "\n");
    run.finish(c);
    std::cout << report_text(report, cm);
    return 0;
}

int cmd_probe_cv(const Config& c)
{
    auto run = open_run(c, "probe cv");
    const auto ds = embeddings_of(c, &run);
    const auto k = c.get<std::size_t>("probe.k", 5);
    const auto cv = cross_validate(ds, k, train_config_of(c));
    json folds = json::array();
    std::string fold_lines;
    for (std::size_t i = 0; i < cv.fold_reports.size(); ++i) {
        folds.push_back(json::parse(to_json(cv.fold_reports[i]).dump()));
        fold_lines += "fold " + std::to_string(i + 1) + " accuracy: " + percent(cv.fold_reports[i].accuracy) + "\n";
    }
    json j;
    j["k"] = k;
    j["folds"] = std::move(folds);
    j["mean"] = json::parse(to_json(cv.mean).dump());
    j["pooled"] = report_json(cv.pooled_report, cv.pooled);
    const auto text = fold_lines + "mean fold accuracy: " + percent(cv.mean.accuracy) + "\n\npooled\n" +
                      report_text(cv.pooled_report, cv.pooled);
    run.write("cv.txt", text);
    run.write("cv.json", j.dump(2) + "\n");
    run.finish(c);
    std::cout << text;
    return 0;
}

int cmd_probe_grid(const Config& c)
{
    auto run = open_run(c, "probe grid");
    const auto ds = embeddings_of(c, &run);
    const auto base = train_config_of(c);
    const auto archs =
        c.get("probe.grid.hidden", std::vector<std::vector<std::size_t>>{base.hidden});
    const auto lrs = c.get<std::vector<double>>("probe.grid.learning_rate", {base.learning_rate});
    const auto l2s = c.get<std::vector<double>>("probe.grid.l2", {base.l2});
    const auto ranked = grid_search(ds, archs, lrs, l2s, c.get<std::size_t>("probe.k", 5), base);
    std::ostringstream csv;
    csv << "rank,hidden,learning_rate,l2,accuracy,group_accuracy,mean_distance\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i];
        std::string hidden;
        for (auto h : r.point.hidden) {
            hidden += (hidden.empty() ? "" : "-") + std::to_string(h);
        }
        csv << i + 1 << ',' << hidden << ',' << r.point.learning_rate << ',' << r.point.l2 << ','
            << format_fraction(r.cv.pooled_report.accuracy, 4) << ','
            << format_fraction(r.cv.pooled_report.group_accuracy, 4) << ','
            << format_fraction(r.cv.pooled_report.mean_distance, 4) << '\n';
    }
    run.write("grid.csv", csv.str());
    run.finish(c);
    std::cout << csv.str();
    return 0;
}

int cmd_probe_gradcheck(const Config& c)
{
    const auto [params, batch] = toy_gradcheck_problem(c.get<std::uint64_t>("seed", 7));
    const double l2 = c.get("probe.l2", 0.001);
    const auto r = gradient_check(params, batch, l2);
    std::ostringstream out;
    out << "parameters checked: " << r.parameters_checked << '\n'
        << "max relative error: " << std::scientific << std::setprecision(3) << r.max_relative_error << '\n'
        << "gradient check " << (r.max_relative_error < 1e-4 ? "passed" : "FAILED") << '\n';
    if (c.has("run_dir")) {
        auto run = open_run(c, "probe gradcheck");
        run.write("gradcheck.txt", out.str());
        run.finish(c);
    }
    std::cout << out.str();
    return r.max_relative_error < 1e-4 ? 0 : 1;
}

int cmd_export_finetune(const Config& c)
{
    const auto path = existing_file(c, "paths.input", "--in");
    auto run = open_run(c, "export-finetune");
    run.input("input", path);
    FinetuneExportConfig config;
    config.prompt = template_of(c, "finetune.template", &run);
    config.layout.begin_text = c.get("finetune.begin_text", config.layout.begin_text);
    config.layout.header_start = c.get("finetune.header_start", config.layout.header_start);
    config.layout.header_end = c.get("finetune.header_end", config.layout.header_end);
    config.layout.turn_end = c.get("finetune.turn_end", config.layout.turn_end);
    const auto samples = load_dataset(path);
    run.write("finetune.jsonl", render([&](std::ostream& o) { export_finetune(o, samples, config); }));
    run.write("hyperparameters.json", finetune_hyperparameters().dump(2) + "\n");
    run.finish(c);
    std::cout << "exported " << samples.size() << " records\n";
    return 0;
}

int cmd_gen_synthetic(const Config& c)
{
    auto run = open_run(c, "gen-synthetic");
    const auto n = c.get<std::size_t>("synthetic.n", 1);
    const auto client = ChatClient::http(endpoint_of(c));
    const auto samples = generate_synthetic(client, n, c.get<std::string>("synthetic.id_prefix", "synthetic"));
    run.write("synthetic.jsonl", render([&](std::ostream& o) { write_interchange(o, samples); }));
    run.finish(c);
    log(std::to_string(samples.size()) + " synthetic A1 texts written; review them before use");
    return 0;
}

int cmd_report(const Config& c)
{
    ConfusionMatrix cm;
    std::string input_role;
    std::string input_path;
    if (c.has("paths.outcomes")) {
        input_role = "outcomes";
        input_path = existing_file(c, "paths.outcomes", "--outcomes");
        cm = confusion_from_outcomes(read_outcomes(input_path));
    } else if (c.has("paths.matrix")) {
        input_role = "matrix";
        input_path = existing_file(c, "paths.matrix", "--matrix");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(cefrtk::read_file(input_path));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(1, input_path + ": " + e.what());
        }
        cm = confusion_from_json(j.contains("confusion") ? j.at("confusion") : j);
    } else {
        throw InvalidArgument("report needs --outcomes or --matrix");
    }
    const auto report = compute_report(cm, mode_of(c));
    const auto format = c.get<std::string>("report.format", "text");
    std::string text;
    std::string ext;
    if (format == "text") {
        text = report_text(report, cm);
        ext = "txt";
    } else if (format == "csv") {
        text = report_to_csv(report);
        ext = "csv";
    } else if (format == "json") {
        text = report_json(report, cm).dump(2) + "\n";
        ext = "json";
    } else if (format == "markdown" || format == "md") {
        text = render_report_markdown(report);
        ext = "md";
    } else {
        throw InvalidArgument("unknown report format '" + format + "'");
    }
    if (c.has("run_dir")) {
        auto run = open_run(c, "report");
        run.input(input_role, input_path);
        run.write("report." + ext, text);
        run.finish(c);
    }
    std::cout << text;
    return 0;
}

void add_endpoint_flags(CLI::App* app, Overrides& o)
{
    o.add<std::string>(app, "--base-url", "endpoint.base_url", "chat-completion API base, e.g. http://host/v1");
    o.add<std::string>(app, "--model", "endpoint.model_id", "model id sent with each request");
    o.add<std::string>(app, "--api-key-env", "endpoint.api_key_env",
                       "name of the environment variable holding the API key");
    o.add<int>(app, "--max-retries", "endpoint.max_retries", "retries for transient failures");
    o.add<std::size_t>(app, "--concurrency", "endpoint.concurrency_limit", "simultaneous requests");
    o.add<long long>(app, "--timeout-ms", "endpoint.timeout_ms", "per-request timeout");
    o.add<long long>(app, "--retry-base-ms", "endpoint.retry_base_ms", "first backoff delay");
}

void add_train_flags(CLI::App* app, Overrides& o)
{
    o.add<std::vector<std::size_t>>(app, "--hidden", "probe.hidden", "hidden layer widths, e.g. 1024,512,256")
        ->delimiter(',');
    o.add<double>(app, "--lr", "probe.learning_rate", "learning rate");
    o.add<double>(app, "--l2", "probe.l2", "L2 weight penalty");
    o.add<std::size_t>(app, "--epochs", "probe.epochs", "maximum epochs");
    o.add<std::size_t>(app, "--batch-size", "probe.batch_size", "minibatch size");
    o.add<std::string>(app, "--optimizer", "probe.optimizer", "adam or sgd");
    o.add<std::size_t>(app, "--patience", "probe.patience", "early-stopping patience in epochs (0 disables)");
    o.add_flag(app, "--standardize", "probe.standardize", "z-score features with training statistics");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cefrtk: CEFR proficiency classification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string("cefrtk ") + CEFR_VERSION);

    Overrides o;
    std::string config_path;
    app.add_option("--config", config_path, "TOML run configuration")->check(CLI::ExistingFile);
    o.add<std::string>(&app, "--run-dir", "run_dir", "directory receiving every artifact and manifest.json");
    o.add<std::uint64_t>(&app, "--seed", "seed", "seed for every stochastic step");
    o.add<std::string>(&app, "--mode", "mode", "metric mode: strict or parsed_only");

    auto* ingest_cmd = app.add_subcommand("ingest", "validate a corpus, apply C-test labels, count levels");
    o.add<std::string>(ingest_cmd, "--in", "paths.input", "interchange JSONL or CSV file");
    o.add<std::string>(ingest_cmd, "--format", "ingest.format", "jsonl or csv (default: by extension)");

    auto* stats_cmd = app.add_subcommand("stats", "level distribution of a labeled dataset");
    o.add<std::string>(stats_cmd, "--in", "paths.input", "interchange JSONL");

    auto* split_cmd = app.add_subcommand("split", "stratified train/test split");
    o.add<std::string>(split_cmd, "--in", "paths.input", "labeled interchange JSONL");
    o.add<std::size_t>(split_cmd, "--per-level-train", "split.per_level_train", "training items per level");
    o.add<std::size_t>(split_cmd, "--per-level-test", "split.per_level_test", "test items per level");
    o.add<std::size_t>(split_cmd, "--folds", "split.folds", "also write a stratified k-fold partition");

    auto* classify_cmd = app.add_subcommand("classify", "classify texts with a chat-completion endpoint");
    o.add<std::string>(classify_cmd, "--in", "paths.input", "interchange JSONL to classify");
    o.add<std::string>(classify_cmd, "--template", "classify.template",
                       "english-base, german-zero-shot or german-few-shot");
    o.add<std::string>(classify_cmd, "--few-shot-bank", "paths.few_shot_bank", "JSON file with one example per level");
    o.add<std::string>(classify_cmd, "--replay", "paths.replay", "recompute the report from stored outcomes");
    add_endpoint_flags(classify_cmd, o);

    auto* compare_cmd = app.add_subcommand("compare", "classify the same texts with several endpoints");
    o.add<std::string>(compare_cmd, "--in", "paths.input", "interchange JSONL to classify");
    o.add<std::string>(compare_cmd, "--template", "classify.template", "prompt template id");
    o.add<std::string>(compare_cmd, "--few-shot-bank", "paths.few_shot_bank", "JSON file with one example per level");
    o.add<std::vector<std::string>>(compare_cmd, "--models", "compare.models",
                                    "model ids sharing the [endpoint] settings")
        ->delimiter(',');
    add_endpoint_flags(compare_cmd, o);

    auto* probe_cmd = app.add_subcommand("probe", "MLP probe on pre-extracted embeddings");
    probe_cmd->require_subcommand(1);
    probe_cmd->fallthrough();
    auto* train_cmd = probe_cmd->add_subcommand("train", "train on an embedding file");
    auto* eval_cmd = probe_cmd->add_subcommand("eval", "evaluate a saved model");
    auto* cv_cmd = probe_cmd->add_subcommand("cv", "stratified k-fold cross-validation");
    auto* grid_cmd = probe_cmd->add_subcommand("grid", "grid search ranked by pooled CV accuracy");
    auto* gradcheck_cmd = probe_cmd->add_subcommand("gradcheck", "finite-difference check of backprop on a toy net");
    for (auto* sub : {train_cmd, eval_cmd, cv_cmd, grid_cmd}) {
        o.add<std::string>(sub, "--embeddings", "paths.embeddings", "embedding file");
    }
    for (auto* sub : {train_cmd, cv_cmd, grid_cmd}) {
        add_train_flags(sub, o);
    }
    for (auto* sub : {cv_cmd, grid_cmd}) {
        o.add<std::size_t>(sub, "--k", "probe.k", "number of folds");
    }
    o.add<std::string>(eval_cmd, "--model", "paths.model", "model.json from probe train");
    o.add_archs(grid_cmd, "--arch", "probe.grid.hidden", "hidden widths to try, e.g. --arch 256 --arch 512,256");
    o.add<std::vector<double>>(grid_cmd, "--lrs", "probe.grid.learning_rate", "learning rates to try")
        ->delimiter(',');
    o.add<std::vector<double>>(grid_cmd, "--l2s", "probe.grid.l2", "L2 penalties to try")->delimiter(',');
    o.add<double>(gradcheck_cmd, "--l2", "probe.l2", "L2 penalty included in the checked loss");

    auto* export_cmd = app.add_subcommand("export-finetune", "write a chat-format fine-tuning file");
    o.add<std::string>(export_cmd, "--in", "paths.input", "labeled interchange JSONL (usually train.jsonl)");
    o.add<std::string>(export_cmd, "--template", "finetune.template", "prompt template rendered into each record");
    o.add<std::string>(export_cmd, "--few-shot-bank", "paths.few_shot_bank", "JSON file with one example per level");

    auto* synth_cmd = app.add_subcommand("gen-synthetic", "generate A1 texts for manual review");
    o.add<std::size_t>(synth_cmd, "--n", "synthetic.n", "number of texts");
    o.add<std::string>(synth_cmd, "--id-prefix", "synthetic.id_prefix", "prefix of generated ids");
    add_endpoint_flags(synth_cmd, o);

    auto* report_cmd = app.add_subcommand("report", "render metrics from stored outcomes or a confusion matrix");
    o.add<std::string>(report_cmd, "--outcomes", "paths.outcomes", "outcomes JSONL");
    o.add<std::string>(report_cmd, "--matrix", "paths.matrix", "confusion matrix JSON");
    o.add<std::string>(report_cmd, "--format", "report.format", "text, csv, json or markdown");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        Config config = config_path.empty() ? Config{} : Config::from_file(config_path);
        o.apply(config);

        if (ingest_cmd->parsed()) {
            return cmd_ingest(config);
        }
        if (stats_cmd->parsed()) {
            return cmd_stats(config);
        }
        if (split_cmd->parsed()) {
            return cmd_split(config);
        }
        if (classify_cmd->parsed()) {
            return cmd_classify(config);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(config);
        }
        if (train_cmd->parsed()) {
            return cmd_probe_train(config);
        }
        if (eval_cmd->parsed()) {
            return cmd_probe_eval(config);
        }
        if (cv_cmd->parsed()) {
            return cmd_probe_cv(config);
        }
        if (grid_cmd->parsed()) {
            return cmd_probe_grid(config);
        }
        if (gradcheck_cmd->parsed()) {
            return cmd_probe_gradcheck(config);
        }
        if (export_cmd->parsed()) {
            return cmd_export_finetune(config);
        }
        if (synth_cmd->parsed()) {
            return cmd_gen_synthetic(config);
        }
        if (report_cmd->parsed()) {
            return cmd_report(config);
        }
    } catch (const InputError& e) {
        log(std::string("error: ") + e.what());
        return 2;
    } catch (const RemoteError& e) {
        log(std::string("remote error: ") + e.what());
        return 3;
    } catch (const std::exception& e) {
        log(std::string("internal error: ") + e.what());
        return 1;
    }
    return 1;
}
