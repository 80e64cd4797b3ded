#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cefr/embeddings.hpp"
#include "cefr/error.hpp"
#include "cefr/metrics.hpp"
#include "cefr/mlp.hpp"
#include "cefr/random.hpp"
#include "cefr/splits.hpp"

namespace cefr {

enum class Optimizer { adam, sgd };

inline std::string_view to_string(Optimizer o) noexcept
{
    return o == Optimizer::adam ? "adam" : "sgd";
}

inline Optimizer parse_optimizer(std::string_view s)
{
    if (s == "adam") {
        return Optimizer::adam;
    }
    if (s == "sgd") {
        return Optimizer::sgd;
    }
    throw InvalidArgument("unknown optimizer '" + std::string(s) + "' (expected adam or sgd)");
}

struct TrainConfig
{
    double learning_rate = 1e-3;
    double l2 = 0.001;
    int epochs = 100;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    std::vector<std::size_t> hidden = kDefaultHidden;
    /// Per-feature standardisation fitted on the training records.
    bool standardize = false;
    /// Stop once the epoch loss has improved by less than min_improvement for `patience` epochs in a row.
    /// patience 0 disables early stopping.
    int patience = 10;
    double min_improvement = 1e-5;

    // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const
    {
        if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) {
            throw InvalidArgument("learning_rate must be a finite number >= 0");
        }
        if (!(l2 >= 0) || !std::isfinite(l2)) {
            throw InvalidArgument("l2 must be a finite number >= 0");
        }
        if (epochs < 1) {
            throw InvalidArgument("epochs must be >= 1");
        }
        if (batch_size < 1) {
            throw InvalidArgument("batch_size must be >= 1");
        }
        if (patience < 0) {
            throw InvalidArgument("patience must be >= 0");
        }
        for (auto h : hidden) {
            if (h == 0) {
                throw InvalidArgument("hidden layer width must be positive");
            }
        }
    }
};

inline nlohmann::ordered_json to_json(const TrainConfig& c)
{
    nlohmann::ordered_json j;
    j["learning_rate"] = c.learning_rate;
    j["l2"] = c.l2;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    j["optimizer"] = to_string(c.optimizer);
    j["hidden"] = c.hidden;
    j["standardize"] = c.standardize;
    j["patience"] = c.patience;
    j["min_improvement"] = c.min_improvement;
    return j;
}

/// Plain gradient descent step: p -= lr * g.
inline void sgd_step(MlpParams& p, const MlpParams& grad, double lr)
{
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        p.layers[i].weights -= lr * grad.layers[i].weights;
        p.layers[i].bias -= lr * grad.layers[i].bias;
    }
}

class AdamState
{
public:
    explicit AdamState(const MlpParams& shape) : m_(zeros_like(shape)), v_(zeros_like(shape)) {}

    void step(MlpParams& p, const MlpParams& grad, const TrainConfig& c)
    {
        ++t_;
        const double bc1 = 1.0 - std::pow(c.beta1, t_);
        const double bc2 = 1.0 - std::pow(c.beta2, t_);
        auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
            m = c.beta1 * m + (1.0 - c.beta1) * g;
            v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
            param.array() -= c.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
        };
        for (std::size_t i = 0; i < p.layers.size(); ++i) {
            update(p.layers[i].weights, m_.layers[i].weights, v_.layers[i].weights, grad.layers[i].weights);
            update(p.layers[i].bias, m_.layers[i].bias, v_.layers[i].bias, grad.layers[i].bias);
        }
    }

private:
    MlpParams m_;
    MlpParams v_;
    int t_ = 0;
};

struct EpochStats
{
    int epoch = 0;
    double loss = 0.0;     ///< mean objective over the epoch's mini-batches, weighted by batch size
    double accuracy = 0.0; ///< training accuracy after the epoch
};

struct TrainResult
{
    MlpParams params;
    std::vector<EpochStats> history;
};

inline Standardizer fit_standardizer(const Eigen::MatrixXd& x)
{
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale = ((x.rowwise() - s.mean.transpose()).array().square().colwise().sum() / static_cast<double>(x.rows()))
                  .sqrt()
                  .transpose();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
        if (!(s.scale(i) > 1e-12)) {
            s.scale(i) = 1.0;
        }
    }
    return s;
}

inline Eigen::MatrixXd embedding_matrix(std::span<const EmbeddingRecord> records, std::size_t dim)
{
    return stack_rows(records, [](const EmbeddingRecord& r) -> const std::vector<double>& { return r.vector; }, dim);
}

inline std::vector<CefrLevel> embedding_labels(std::span<const EmbeddingRecord> records)
{
    std::vector<CefrLevel> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.level);
    }
    return out;
}

namespace detail {

inline double accuracy_of(const MlpParams& p, const Eigen::MatrixXd& x, const std::vector<CefrLevel>& y)
{
    const auto pred = predict(p, x);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        hit += pred[i] == y[i] ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

} // namespace detail

/// Mini-batch training. Initialisation uses config.seed; the per-epoch shuffle draws from an
/// independent stream of the same seed, so the result is a pure function of (data order, config).
inline TrainResult train(const Eigen::MatrixXd& x, const std::vector<CefrLevel>& y, const TrainConfig& config)
{
    config.validate();
    if (x.rows() == 0) {
        throw EmptyDataset();
    }
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw DimMismatch("training labels", static_cast<std::size_t>(x.rows()), y.size());
    }
    TrainResult result;
    result.params = init_mlp(static_cast<std::size_t>(x.cols()), config.hidden, config.seed);
    if (config.standardize) {
        result.params.standardizer = fit_standardizer(x);
    }
    auto& p = result.params;
    AdamState adam(p);
    Rng order_rng(stream_seed(config.seed, 1));
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    Batch batch;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        order_rng.shuffle(std::span<std::size_t>(order));
        double weighted_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.inputs.resize(static_cast<Eigen::Index>(end - start), x.cols());
            batch.labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.inputs.row(static_cast<Eigen::Index>(i - start)) = x.row(static_cast<Eigen::Index>(order[i]));
                batch.labels.push_back(y[order[i]]);
            }
            const auto lg = loss_and_grad(p, batch, config.l2);
            weighted_loss += lg.loss * static_cast<double>(end - start);
            if (config.optimizer == Optimizer::adam) {
                adam.step(p, lg.grad, config);
            } else {
                sgd_step(p, lg.grad, config.learning_rate);
            }
        }
        EpochStats stats{epoch, weighted_loss / static_cast<double>(order.size()), detail::accuracy_of(p, x, y)};
        result.history.push_back(stats);
        if (config.patience > 0) {
            if (best - stats.loss < config.min_improvement) {
                if (++stale >= config.patience) {
                    break;
                }
            } else {
                stale = 0;
            }
            best = std::min(best, stats.loss);
        }
    }
    return result;
}

inline TrainResult train(std::span<const EmbeddingRecord> records, std::size_t dim, const TrainConfig& config)
{
    if (records.empty()) {
        throw EmptyDataset();
    }
    return train(embedding_matrix(records, dim), embedding_labels(records), config);
}

inline TrainResult train(const EmbeddingDataset& ds, const TrainConfig& config)
{
    return train(std::span<const EmbeddingRecord>(ds.records), ds.dim, config);
}

/// Confusion matrix of the model's predictions on `records`.
inline ConfusionMatrix evaluate(const MlpParams& p, std::span<const EmbeddingRecord> records, std::size_t dim)
{
    if (records.empty()) {
        throw EmptyDataset();
    }
    const auto pred = predict(p, embedding_matrix(records, dim));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < records.size(); ++i) {
        cm.add(records[i].level, pred[i]);
    }
    return cm;
}

inline ConfusionMatrix evaluate(const MlpParams& p, const EmbeddingDataset& ds)
{
    return evaluate(p, std::span<const EmbeddingRecord>(ds.records), ds.dim);
}

struct CrossValidationResult
{
    std::vector<MetricsReport> fold_reports;
    MetricsReport mean;          ///< field-wise mean of the fold reports
    ConfusionMatrix pooled;      ///< all test-fold predictions
    MetricsReport pooled_report; ///< metrics of the pooled matrix
};

/// Stratified k-fold cross-validation. Fold f trains with seed stream_seed(config.seed, 100 + f).
inline CrossValidationResult cross_validate(const EmbeddingDataset& ds, std::size_t k, const TrainConfig& config)
{
    if (ds.records.empty()) {
        throw EmptyDataset();
    }
    config.validate();
    const std::span<const EmbeddingRecord> records(ds.records);
    const auto folds = kfold_indices(records, k, config.seed);
    const Eigen::MatrixXd x = embedding_matrix(records, ds.dim);
    const auto y = embedding_labels(records);

    CrossValidationResult cv;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        Eigen::MatrixXd xtrain(static_cast<Eigen::Index>(folds[f].train.size()), x.cols());
        std::vector<CefrLevel> ytrain;
        ytrain.reserve(folds[f].train.size());
        for (std::size_t i = 0; i < folds[f].train.size(); ++i) {
            xtrain.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(folds[f].train[i]));
            ytrain.push_back(y[folds[f].train[i]]);
        }
        TrainConfig fold_config = config;
        fold_config.seed = stream_seed(config.seed, 100 + f);
        const auto model = train(xtrain, ytrain, fold_config).params;

        Eigen::MatrixXd xtest(static_cast<Eigen::Index>(folds[f].test.size()), x.cols());
        for (std::size_t i = 0; i < folds[f].test.size(); ++i) {
            xtest.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(folds[f].test[i]));
        }
        const auto pred = predict(model, xtest);
        ConfusionMatrix cm;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            cm.add(y[folds[f].test[i]], pred[i]);
        }
        cv.pooled.merge(cm);
        cv.fold_reports.push_back(compute_report(cm, MetricMode::strict));
    }
    cv.mean = mean_report(cv.fold_reports);
    cv.pooled_report = compute_report(cv.pooled, MetricMode::strict);
    return cv;
}

struct GridPoint
{
    std::vector<std::size_t> hidden;
    double learning_rate = 0.0;
    double l2 = 0.0;
};

struct GridResult
{
    GridPoint point;
    CrossValidationResult cv;
};

namespace detail {

inline std::size_t architecture_size(const std::vector<std::size_t>& hidden)
{
    return std::accumulate(hidden.begin(), hidden.end(), std::size_t{0});
}

/// True when a should rank before b: higher pooled accuracy, then smaller architecture
/// (total hidden units, then layer count, then lexicographic widths), smaller lr, larger l2.
inline bool grid_before(const GridResult& a, const GridResult& b)
{
    if (a.cv.pooled_report.accuracy != b.cv.pooled_report.accuracy) {
        return a.cv.pooled_report.accuracy > b.cv.pooled_report.accuracy;
    }
    const auto sa = architecture_size(a.point.hidden);
    const auto sb = architecture_size(b.point.hidden);
    if (sa != sb) {
        return sa < sb;
    }
    if (a.point.hidden.size() != b.point.hidden.size()) {
        return a.point.hidden.size() < b.point.hidden.size();
    }
    if (a.point.hidden != b.point.hidden) {
        return a.point.hidden < b.point.hidden;
    }
    if (a.point.learning_rate != b.point.learning_rate) {
        return a.point.learning_rate < b.point.learning_rate;
    }
    return a.point.l2 > b.point.l2;
}

} // namespace detail

/// Exhaustive search over architectures x learning rates x l2 values, each scored by k-fold CV
/// (pooled accuracy). The remaining fields of `base` apply to every point.
inline std::vector<GridResult> grid_search(const EmbeddingDataset& ds, std::span<const std::vector<std::size_t>> architectures,
                                           std::span<const double> learning_rates, std::span<const double> l2s,
                                           std::size_t k, const TrainConfig& base)
{
    if (architectures.empty() || learning_rates.empty() || l2s.empty()) {
        throw InvalidArgument("grid search needs at least one value per axis");
    }
    std::vector<GridResult> results;
    results.reserve(architectures.size() * learning_rates.size() * l2s.size());
    for (const auto& arch : architectures) {
        for (double lr : learning_rates) {
            for (double l2 : l2s) {
                TrainConfig c = base;
                c.hidden = arch;
                c.learning_rate = lr;
                c.l2 = l2;
                results.push_back({{arch, lr, l2}, cross_validate(ds, k, c)});
            }
        }
    }
    std::stable_sort(results.begin(), results.end(), detail::grid_before);
    return results;
}

struct GradCheckResult
{
    double max_relative_error = 0.0;
    std::size_t parameters_checked = 0;
};

/// Compares backprop gradients with central differences (step eps) on every parameter.
/// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps exactly-zero gradients
/// (dead ReLU units) from dividing by zero.
inline GradCheckResult gradient_check(const MlpParams& params, const Batch& batch, double l2, double eps = 1e-5,
                                      double floor = 1e-8)
{
    const auto analytic = loss_and_grad(params, batch, l2).grad;
    MlpParams probe = params;
    GradCheckResult out;
    auto check = [&](double& slot, double a) {
        const double saved = slot;
        slot = saved + eps;
        const double up = loss_and_grad(probe, batch, l2).loss;
        slot = saved - eps;
        const double down = loss_and_grad(probe, batch, l2).loss;
        slot = saved;
        const double numeric = (up - down) / (2 * eps);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        out.max_relative_error = std::max(out.max_relative_error, rel);
        ++out.parameters_checked;
    };
    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        auto& w = probe.layers[l].weights;
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                check(w(r, c), analytic.layers[l].weights(r, c));
            }
        }
        auto& b = probe.layers[l].bias;
        for (Eigen::Index r = 0; r < b.size(); ++r) {
            check(b(r), analytic.layers[l].bias(r));
        }
    }
    return out;
}

/// Seeded toy problem for gradient checking: dim-8 inputs, small hidden layers, 12 examples.
inline std::pair<MlpParams, Batch> toy_gradcheck_problem(std::uint64_t seed = 7)
{
    const std::vector<std::size_t> hidden{10, 8, 7};
    MlpParams p = init_mlp(8, hidden, seed);
    Rng rng(stream_seed(seed, 2));
    for (auto& l : p.layers) {
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) {
            l.bias(i) = rng.uniform(-0.1, 0.1);
        }
    }
    Batch batch;
    batch.inputs.resize(12, 8);
    for (Eigen::Index r = 0; r < 12; ++r) {
        for (Eigen::Index c = 0; c < 8; ++c) {
            batch.inputs(r, c) = rng.uniform(-1.0, 1.0);
        }
        batch.labels.push_back(CefrLevel::from_index(static_cast<std::size_t>(r) % kLevelCount));
    }
    return {std::move(p), std::move(batch)};
}

/// Six well-separated Gaussian clusters, one per level: centre_c = 4 * e_c (first six axes),
/// noise N(0, 0.25^2) per component via Box-Muller. Records are ordered by level.
inline EmbeddingDataset separable_fixture(std::size_t dim = 16, std::size_t per_level = 10, std::uint64_t seed = 42)
{
    if (dim < kLevelCount) {
        throw InvalidArgument("separable fixture needs dim >= 6");
    }
    EmbeddingDataset ds;
    ds.dim = dim;
    ds.model = "synthetic-clusters";
    Rng rng(stream_seed(seed, 3));
    auto gauss = [&rng] {
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    };
    for (auto level : CefrLevel::all()) {
        for (std::size_t i = 0; i < per_level; ++i) {
            EmbeddingRecord r;
            r.sample_id = std::string(level.label()) + "-" + std::to_string(i);
            r.level = level;
            r.vector.resize(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                r.vector[d] = 0.25 * gauss() + (d == level.index() ? 4.0 : 0.0);
            }
            ds.records.push_back(std::move(r));
        }
    }
    return ds;
}

} // namespace cefr
