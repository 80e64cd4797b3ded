#pragma once

// Multi-layer perceptron probe: input -> hidden ReLU layers -> 6 linear outputs -> softmax.
// Training objective: mean cross-entropy over the batch plus (l2 / 2) * sum of squared weights
// (biases are not regularised).

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cefr/error.hpp"
#include "cefr/levels.hpp"
#include "cefr/random.hpp"

namespace cefr {

inline const std::vector<std::size_t> kDefaultHidden{1024, 512, 256};

struct DenseLayer
{
    Eigen::MatrixXd weights; ///< out x in
    Eigen::VectorXd bias;    ///< out
};

/// Per-feature affine input transform x' = (x - mean) / scale.
struct Standardizer
{
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
};

struct MlpParams
{
    std::vector<DenseLayer> layers;
    std::uint64_t init_seed = 0;
    std::optional<Standardizer> standardizer;

    std::size_t input_dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols()); }

    /// [input, hidden..., 6]
    std::vector<std::size_t> dims() const
    {
        std::vector<std::size_t> d;
        if (layers.empty()) {
            return d;
        }
        d.push_back(input_dim());
        for (const auto& l : layers) {
            d.push_back(static_cast<std::size_t>(l.weights.rows()));
        }
        return d;
    }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (const auto& l : layers) {
            n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
        }
        return n;
    }

    bool operator==(const MlpParams& o) const
    {
        if (layers.size() != o.layers.size() || init_seed != o.init_seed ||
            standardizer.has_value() != o.standardizer.has_value()) {
            return false;
        }
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].weights.rows() != o.layers[i].weights.rows() ||
                layers[i].weights.cols() != o.layers[i].weights.cols() || layers[i].weights != o.layers[i].weights ||
                layers[i].bias != o.layers[i].bias) {
                return false;
            }
        }
        return !standardizer || (standardizer->mean == o.standardizer->mean && standardizer->scale == o.standardizer->scale);
    }
};

/// Zero-filled parameters of the given shape; also the shape of a gradient.
inline MlpParams zeros_like(const MlpParams& p)
{
    MlpParams z;
    z.init_seed = p.init_seed;
    for (const auto& l : p.layers) {
        z.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    }
    return z;
}

/// He-uniform weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero biases. The output layer is always 6 wide.
inline MlpParams init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed)
{
    if (input_dim == 0) {
        throw InvalidArgument("input dimension must be positive");
    }
    MlpParams p;
    p.init_seed = seed;
    Rng rng(stream_seed(seed, 0));
    std::size_t fan_in = input_dim;
    auto add_layer = [&](std::size_t out) {
        if (out == 0) {
            throw InvalidArgument("hidden layer width must be positive");
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        DenseLayer l{Eigen::MatrixXd(out, fan_in), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
        // Row-major fill order keeps the draw sequence independent of Eigen's storage order.
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
                l.weights(r, c) = rng.uniform(-limit, limit);
            }
        }
        p.layers.push_back(std::move(l));
        fan_in = out;
    };
    for (auto h : hidden) {
        add_layer(h);
    }
    add_layer(kLevelCount);
    return p;
}

namespace detail {

inline void check_input(const MlpParams& p, Eigen::Index cols)
{
    if (p.layers.empty()) {
        throw InvalidArgument("model has no layers");
    }
    if (static_cast<std::size_t>(cols) != p.input_dim()) {
        throw DimMismatch("model input", p.input_dim(), static_cast<std::size_t>(cols));
    }
}

inline Eigen::MatrixXd standardize(const MlpParams& p, const Eigen::MatrixXd& x)
{
    if (!p.standardizer) {
        return x;
    }
    return ((x.rowwise() - p.standardizer->mean.transpose()).array().rowwise() /
            p.standardizer->scale.transpose().array())
        .matrix();
}

/// Row-wise softmax with max subtraction.
inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits)
{
    Eigen::MatrixXd out = logits.colwise() - logits.rowwise().maxCoeff();
    out = out.array().exp().matrix();
    out = out.array().colwise() / out.rowwise().sum().array();
    return out;
}

/// Pre-activations of every layer for a batch (rows = examples).
inline std::vector<Eigen::MatrixXd> forward_all(const MlpParams& p, const Eigen::MatrixXd& x, Eigen::MatrixXd& input)
{
    check_input(p, x.cols());
    input = standardize(p, x);
    std::vector<Eigen::MatrixXd> pre;
    pre.reserve(p.layers.size());
    const Eigen::MatrixXd* a = &input;
    Eigen::MatrixXd activated;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const auto& l = p.layers[i];
        Eigen::MatrixXd z = (*a) * l.weights.transpose();
        z.rowwise() += l.bias.transpose();
        pre.push_back(std::move(z));
        if (i + 1 < p.layers.size()) {
            activated = pre.back().cwiseMax(0.0);
            a = &activated;
            // keep activations alive for the next layer only; backprop recomputes them from `pre`
        }
    }
    return pre;
}

} // namespace detail

struct ForwardResult
{
    std::array<double, kLevelCount> logits{};
    std::array<double, kLevelCount> probs{};
};

/// Batch forward pass; returns (n x 6) logits.
inline Eigen::MatrixXd forward_logits(const MlpParams& p, const Eigen::MatrixXd& x)
{
    Eigen::MatrixXd input;
    return detail::forward_all(p, x, input).back();
}

inline ForwardResult forward(const MlpParams& p, std::span<const double> vector)
{
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(vector.size()));
    for (std::size_t i = 0; i < vector.size(); ++i) {
        x(0, static_cast<Eigen::Index>(i)) = vector[i];
    }
    const Eigen::MatrixXd logits = forward_logits(p, x);
    const Eigen::MatrixXd probs = detail::softmax_rows(logits);
    ForwardResult r;
    for (std::size_t c = 0; c < kLevelCount; ++c) {
        r.logits[c] = logits(0, static_cast<Eigen::Index>(c));
        r.probs[c] = probs(0, static_cast<Eigen::Index>(c));
    }
    return r;
}

/// Arg-max class per row.
inline std::vector<CefrLevel> predict(const MlpParams& p, const Eigen::MatrixXd& x)
{
    const Eigen::MatrixXd logits = forward_logits(p, x);
    std::vector<CefrLevel> out;
    out.reserve(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best = 0;
        logits.row(r).maxCoeff(&best);
        out.push_back(CefrLevel::from_index(static_cast<std::size_t>(best)));
    }
    return out;
}

struct Batch
{
    Eigen::MatrixXd inputs; ///< n x dim
    std::vector<CefrLevel> labels;
};

struct LossAndGrad
{
    double loss = 0.0;
    MlpParams grad;
};

inline double l2_penalty(const MlpParams& p, double l2)
{
    double sq = 0.0;
    for (const auto& l : p.layers) {
        sq += l.weights.squaredNorm();
    }
    return 0.5 * l2 * sq;
}

/// Mean cross-entropy + (l2/2)||W||^2 and its gradient by backpropagation.
inline LossAndGrad loss_and_grad(const MlpParams& p, const Batch& batch, double l2)
{
    const auto n = batch.inputs.rows();
    if (n == 0) {
        throw EmptyDataset();
    }
    if (static_cast<std::size_t>(n) != batch.labels.size()) {
        throw DimMismatch("batch labels", static_cast<std::size_t>(n), batch.labels.size());
    }
    Eigen::MatrixXd input;
    const auto pre = detail::forward_all(p, batch.inputs, input);
    const Eigen::MatrixXd& logits = pre.back();

    LossAndGrad out;
    const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    const Eigen::VectorXd log_norm =
        row_max.array() + (logits.colwise() - row_max).array().exp().rowwise().sum().log();
    Eigen::MatrixXd delta = detail::softmax_rows(logits);
    double ce = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto y = static_cast<Eigen::Index>(batch.labels[static_cast<std::size_t>(i)].index());
        ce += log_norm(i) - logits(i, y);
        delta(i, y) -= 1.0;
    }
    delta /= static_cast<double>(n);
    out.loss = ce / static_cast<double>(n) + l2_penalty(p, l2);

    out.grad = zeros_like(p);
    for (std::size_t k = p.layers.size(); k-- > 0;) {
        const Eigen::MatrixXd prev_act = k == 0 ? input : Eigen::MatrixXd(pre[k - 1].cwiseMax(0.0));
        auto& g = out.grad.layers[k];
        g.weights = delta.transpose() * prev_act + l2 * p.layers[k].weights;
        g.bias = delta.colwise().sum().transpose();
        if (k > 0) {
            Eigen::MatrixXd back = delta * p.layers[k].weights;
            delta = (pre[k - 1].array() > 0.0).select(back, 0.0);
        }
    }
    return out;
}

/// Inputs of `records` stacked as rows.
template <class Range, class Vec>
Eigen::MatrixXd stack_rows(const Range& records, Vec vector_of, std::size_t dim)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(std::size(records)), static_cast<Eigen::Index>(dim));
    Eigen::Index r = 0;
    for (const auto& rec : records) {
        const auto& v = vector_of(rec);
        if (v.size() != dim) {
            throw DimMismatch("input vector", dim, v.size());
        }
        for (std::size_t c = 0; c < dim; ++c) {
            x(r, static_cast<Eigen::Index>(c)) = v[c];
        }
        ++r;
    }
    return x;
}

inline nlohmann::ordered_json to_json(const MlpParams& p)
{
    nlohmann::ordered_json j;
    j["format"] = "cefr-probe-mlp";
    j["version"] = 1;
    j["dims"] = p.dims();
    j["init_seed"] = p.init_seed;
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const auto& l : p.layers) {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(l.weights.size()));
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
                w.push_back(l.weights(r, c));
            }
        }
        nlohmann::ordered_json layer;
        layer["rows"] = l.weights.rows();
        layer["cols"] = l.weights.cols();
        layer["weights"] = std::move(w);
        layer["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
        layers.push_back(std::move(layer));
    }
    j["layers"] = std::move(layers);
    if (p.standardizer) {
        const auto& s = *p.standardizer;
        j["standardizer"] = {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
                             {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
    } else {
        j["standardizer"] = nullptr;
    }
    return j;
}

inline MlpParams mlp_from_json(const nlohmann::json& j)
{
    auto bad = [](const std::string& why) { return ParseError(1, "model file: " + why); };
    if (!j.is_object() || j.value("format", "") != "cefr-probe-mlp") {
        throw bad("not a cefr-probe-mlp model");
    }
    if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty()) {
        throw bad("no layers");
    }
    MlpParams p;
    p.init_seed = j.value("init_seed", std::uint64_t{0});
    Eigen::Index prev_out = -1;
    for (const auto& layer : j["layers"]) {
        const auto rows = layer.at("rows").get<Eigen::Index>();
        const auto cols = layer.at("cols").get<Eigen::Index>();
        const auto w = layer.at("weights").get<std::vector<double>>();
        const auto b = layer.at("bias").get<std::vector<double>>();
        if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
            static_cast<Eigen::Index>(b.size()) != rows) {
            throw bad("layer shape does not match its data");
        }
        if (prev_out >= 0 && cols != prev_out) {
            throw bad("layer shapes do not chain");
        }
        DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                l.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
            }
            l.bias(r) = b[static_cast<std::size_t>(r)];
        }
        prev_out = rows;
        p.layers.push_back(std::move(l));
    }
    if (prev_out != static_cast<Eigen::Index>(kLevelCount)) {
        throw bad("output layer must have 6 units");
    }
    if (j.contains("standardizer") && !j["standardizer"].is_null()) {
        const auto mean = j["standardizer"].at("mean").get<std::vector<double>>();
        const auto scale = j["standardizer"].at("scale").get<std::vector<double>>();
        if (mean.size() != p.input_dim() || scale.size() != p.input_dim()) {
            throw bad("standardizer size does not match input dimension");
        }
        p.standardizer = Standardizer{Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                                      Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()))};
    }
    return p;
}

inline void save_model(const std::string& path, const MlpParams& p)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write model file '" + path + "'");
    }
    out << to_json(p).dump() << '\n';
}

inline MlpParams load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open model file '" + path + "'");
    }
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(1, "model file is not valid JSON");
    }
    return mlp_from_json(j);
}

} // namespace cefr
