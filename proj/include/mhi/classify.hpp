#ifndef MHI_CLASSIFY_HPP
#define MHI_CLASSIFY_HPP

// Stratified splitting, standardisation, KNN and MLP classifiers and
// confusion-matrix evaluation. Feature dimension is taken from the data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "moments.hpp"
#include "rng.hpp"

namespace mhi {

struct Sample {
    std::vector<double> x;
    std::string label;
    std::string source;
};

inline Sample to_sample(const LabeledSample& s) {
    return {std::vector<double>(s.features.begin(), s.features.end()), s.label, s.source};
}

/// Sorted distinct labels.
inline std::vector<std::string> label_set(std::span<const Sample> samples) {
    std::vector<std::string> labels;
    for (const auto& s : samples)
        labels.push_back(s.label);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

// ---------------------------------------------------------------- splitting

struct SplitSpec {
    double train = 0.50;
    double val = 0.25;
    double test = 0.25;
    std::uint64_t seed = 0;

    void validate() const {
        if (train < 0 || val < 0 || test < 0)
            throw Error(ErrorKind::InvalidArgument, "split ratios must be non-negative");
        if (std::abs(train + val + test - 1.0) > 1e-9)
            throw Error(ErrorKind::InvalidArgument, "split ratios must sum to 1");
    }
};

struct DatasetSplit {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
};

/// Stratified split. Label groups are visited in lexicographic order, each
/// shuffled by one Rng stream seeded with spec.seed, then cut at
/// floor(train*n), floor(val*n), remainder to test.
inline DatasetSplit split_dataset(std::span<const Sample> samples, const SplitSpec& spec) {
    spec.validate();
    if (samples.size() < 4)
        throw Error(ErrorKind::StratificationError, "need at least 4 samples to split");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i)
        groups[samples[i].label].push_back(i);
    for (const auto& [label, idx] : groups)
        if (idx.size() < 2)
            throw Error(ErrorKind::StratificationError, "label '" + label + "' has fewer than 2 samples");

    Rng rng(spec.seed);
    DatasetSplit out;
    for (auto& [label, idx] : groups) {
        rng.shuffle(std::span<std::size_t>(idx));
        const auto n = idx.size();
        // the epsilon keeps e.g. 0.5 * 6 from landing on 2.999...
        const auto n_train = static_cast<std::size_t>(std::floor(spec.train * double(n) + 1e-9));
        const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(spec.val * double(n) + 1e-9)));
        for (std::size_t i = 0; i < n; ++i) {
            auto& dst = i < n_train ? out.train : (i < n_train + n_val ? out.val : out.test);
            dst.push_back(samples[idx[i]]);
        }
    }
    if (out.train.empty() || out.val.empty() || out.test.empty())
        throw Error(ErrorKind::EmptySplit, "a split received no samples");
    return out;
}

// ---------------------------------------------------------- standardisation

inline constexpr double std_floor = 1e-12;

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    std::vector<double> apply(std::span<const double> v) const {
        if (v.size() != mean.size())
            throw Error(ErrorKind::DimensionMismatch, "feature dimension differs from standardizer");
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = (v[i] - mean[i]) / stddev[i];
        return out;
    }

    std::vector<double> inverse(std::span<const double> v) const {
        if (v.size() != mean.size())
            throw Error(ErrorKind::DimensionMismatch, "feature dimension differs from standardizer");
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = v[i] * stddev[i] + mean[i];
        return out;
    }

    std::vector<Sample> apply(std::span<const Sample> samples) const {
        std::vector<Sample> out(samples.begin(), samples.end());
        for (auto& s : out)
            s.x = apply(s.x);
        return out;
    }
};

/// Population mean / std per feature; std floored at 1e-12.
inline Standardizer standardize_fit(std::span<const Sample> train) {
    if (train.empty())
        throw Error(ErrorKind::EmptyTraining, "cannot fit standardizer on empty set");
    const auto dim = train.front().x.size();
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 0.0);
    for (const auto& smp : train) {
        if (smp.x.size() != dim)
            throw Error(ErrorKind::DimensionMismatch, "inconsistent feature dimension");
        for (std::size_t i = 0; i < dim; ++i)
            s.mean[i] += smp.x[i];
    }
    for (auto& m : s.mean)
        m /= double(train.size());
    for (const auto& smp : train)
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = smp.x[i] - s.mean[i];
            s.stddev[i] += d * d;
        }
    for (auto& sd : s.stddev)
        sd = std::max(std::sqrt(sd / double(train.size())), std_floor);
    return s;
}

// ---------------------------------------------------------------------- KNN

inline constexpr int default_k = 5;

struct KnnModel {
    int k = default_k;
    std::vector<std::vector<double>> vectors; // standardised
    std::vector<std::string> labels;          // one per vector
};

struct KnnPrediction {
    std::string label;
    double score = 0.0;                    // winning votes / k
    std::vector<std::size_t> neighbors;    // stored-sample indices, nearest first
    std::map<std::string, int> votes;
};

inline KnnModel knn_fit(std::span<const Sample> train, int k) {
    if (train.empty())
        throw Error(ErrorKind::EmptyTraining, "knn needs training samples");
    if (k < 1 || static_cast<std::size_t>(k) > train.size())
        throw Error(ErrorKind::InvalidArgument,
                    "k must be in [1, " + std::to_string(train.size()) + "], got " + std::to_string(k));
    KnnModel m;
    m.k = k;
    for (const auto& s : train) {
        m.vectors.push_back(s.x);
        m.labels.push_back(s.label);
    }
    return m;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

/// Majority vote of the k nearest stored vectors. Equal distances go to the
/// lower stored index; equal vote counts go to the smaller mean neighbour
/// distance, then to the lexicographically smaller label.
inline KnnPrediction knn_predict(const KnnModel& m, std::span<const double> v) {
    const auto n = m.vectors.size();
    if (m.k < 1 || static_cast<std::size_t>(m.k) > n)
        throw Error(ErrorKind::InvalidArgument, "knn model k out of range");
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (m.vectors[i].size() != v.size())
            throw Error(ErrorKind::DimensionMismatch, "query dimension differs from model");
        dist[i] = {squared_distance(m.vectors[i], v), i};
    }
    const auto k = static_cast<std::size_t>(m.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    KnnPrediction out;
    std::map<std::string, double> dist_sum;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& lbl = m.labels[dist[i].second];
        out.neighbors.push_back(dist[i].second);
        ++out.votes[lbl];
        dist_sum[lbl] += std::sqrt(dist[i].first);
    }
    int best_votes = -1;
    double best_mean = 0.0;
    for (const auto& [lbl, count] : out.votes) { // map order = lexicographic
        const double mean = dist_sum[lbl] / count;
        if (count > best_votes || (count == best_votes && mean < best_mean)) {
            best_votes = count;
            best_mean = mean;
            out.label = lbl;
        }
    }
    out.score = double(best_votes) / double(k);
    return out;
}

// ---------------------------------------------------------------------- MLP

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights; // out x in, row-major
    std::vector<double> bias;    // out

    double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
    double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }
    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected net: tanh on hidden layers, softmax on the output.
struct MlpModel {
    std::vector<std::string> labels;
    std::vector<std::size_t> sizes; // input, hidden..., classes
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return sizes.front(); }
    std::size_t classes() const { return sizes.back(); }

    void validate() const {
        if (sizes.size() < 2 || layers.size() + 1 != sizes.size() || labels.size() != sizes.back())
            throw Error(ErrorKind::InvalidArgument, "inconsistent MLP shape");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& L = layers[l];
            if (L.in != sizes[l] || L.out != sizes[l + 1] || L.weights.size() != L.in * L.out ||
                L.bias.size() != L.out)
                throw Error(ErrorKind::InvalidArgument, "MLP layer " + std::to_string(l) + " has wrong shape");
            for (double v : L.weights)
                if (!std::isfinite(v))
                    throw Error(ErrorKind::NonFiniteLoss, "non-finite MLP weight");
            for (double v : L.bias)
                if (!std::isfinite(v))
                    throw Error(ErrorKind::NonFiniteLoss, "non-finite MLP bias");
        }
    }
    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

struct MlpConfig {
    double lr = 0.01;
    int epochs = 200;
    int batch = 16;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{64, 32};
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

/// Glorot-uniform weights, zero biases.
inline MlpModel mlp_init(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                         std::vector<std::string> labels, Rng& rng) {
    MlpModel m;
    m.labels = std::move(labels);
    m.sizes.push_back(input_dim);
    m.sizes.insert(m.sizes.end(), hidden.begin(), hidden.end());
    m.sizes.push_back(m.labels.size());
    for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
        DenseLayer L;
        L.in = m.sizes[l];
        L.out = m.sizes[l + 1];
        const double limit = std::sqrt(6.0 / double(L.in + L.out));
        L.weights.resize(L.in * L.out);
        for (auto& w : L.weights)
            w = rng.uniform(-limit, limit);
        L.bias.assign(L.out, 0.0);
        m.layers.push_back(std::move(L));
    }
    return m;
}

namespace detail {

inline void softmax_inplace(std::vector<double>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : z)
        v /= sum;
}

// activations[0] = input, activations.back() = softmax probabilities
inline std::vector<std::vector<double>> mlp_forward_all(const MlpModel& m, std::span<const double> x) {
    if (x.size() != m.input_dim())
        throw Error(ErrorKind::DimensionMismatch, "input dimension differs from MLP");
    std::vector<std::vector<double>> acts;
    acts.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& L = m.layers[l];
        const auto& a = acts.back();
        std::vector<double> z(L.out);
        for (std::size_t o = 0; o < L.out; ++o) {
            double s = L.bias[o];
            for (std::size_t i = 0; i < L.in; ++i)
                s += L.w(o, i) * a[i];
            z[o] = s;
        }
        if (l + 1 < m.layers.size())
            for (auto& v : z)
                v = std::tanh(v);
        else
            softmax_inplace(z);
        acts.push_back(std::move(z));
    }
    return acts;
}

inline std::size_t label_index(const std::vector<std::string>& labels, const std::string& label) {
    const auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label)
        throw Error(ErrorKind::UnknownLabel, "label '" + label + "' not known to model");
    return static_cast<std::size_t>(it - labels.begin());
}

} // namespace detail

/// Same shape as the model's layers; holds dLoss/dParam.
using MlpGradient = std::vector<DenseLayer>;

struct LossAndGradient {
    double loss = 0.0;
    MlpGradient grad;
};

/// Mean softmax cross-entropy over `batch` and its gradient by backprop.
inline LossAndGradient mlp_loss_and_gradient(const MlpModel& m, std::span<const Sample> batch) {
    LossAndGradient out;
    out.grad = m.layers;
    for (auto& g : out.grad) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
    }
    if (batch.empty())
        return out;
    const double inv_n = 1.0 / double(batch.size());
    for (const auto& s : batch) {
        const auto target = detail::label_index(m.labels, s.label);
        const auto acts = detail::mlp_forward_all(m, s.x);
        const auto& probs = acts.back();
        out.loss -= std::log(probs[target]) * inv_n;

        std::vector<double> delta = probs; // dL/dz at the output
        delta[target] -= 1.0;
        for (auto& d : delta)
            d *= inv_n;
        for (std::size_t l = m.layers.size(); l-- > 0;) {
            const auto& L = m.layers[l];
            auto& G = out.grad[l];
            const auto& a_in = acts[l];
            for (std::size_t o = 0; o < L.out; ++o) {
                G.bias[o] += delta[o];
                for (std::size_t i = 0; i < L.in; ++i)
                    G.w(o, i) += delta[o] * a_in[i];
            }
            if (l == 0)
                break;
            std::vector<double> prev(L.in, 0.0);
            for (std::size_t o = 0; o < L.out; ++o)
                for (std::size_t i = 0; i < L.in; ++i)
                    prev[i] += L.w(o, i) * delta[o];
            for (std::size_t i = 0; i < L.in; ++i)
                prev[i] *= 1.0 - a_in[i] * a_in[i]; // tanh'
            delta = std::move(prev);
        }
    }
    return out;
}

inline double mlp_loss(const MlpModel& m, std::span<const Sample> batch) {
    double loss = 0.0;
    for (const auto& s : batch) {
        const auto acts = detail::mlp_forward_all(m, s.x);
        loss -= std::log(acts.back()[detail::label_index(m.labels, s.label)]);
    }
    return batch.empty() ? 0.0 : loss / double(batch.size());
}

struct MlpPrediction {
    std::string label;
    std::vector<double> probabilities; // in model label order
    double score = 0.0;                // probability of `label`
};

/// Forward pass; argmax with ties to the earlier (lexicographically smaller) label.
inline MlpPrediction mlp_predict(const MlpModel& m, std::span<const double> v) {
    auto acts = detail::mlp_forward_all(m, v);
    MlpPrediction out;
    out.probabilities = std::move(acts.back());
    const auto best = static_cast<std::size_t>(
        std::max_element(out.probabilities.begin(), out.probabilities.end()) - out.probabilities.begin());
    out.label = m.labels[best];
    out.score = out.probabilities[best];
    return out;
}

namespace detail {

inline double mlp_accuracy(const MlpModel& m, std::span<const Sample> samples) {
    if (samples.empty())
        return 0.0;
    std::size_t hit = 0;
    for (const auto& s : samples)
        hit += mlp_predict(m, s.x).label == s.label;
    return double(hit) / double(samples.size());
}

} // namespace detail

/// Mini-batch SGD on softmax cross-entropy. Samples are expected to be
/// standardised already. Returns the epoch snapshot with the best
/// validation accuracy (earliest on ties); with an empty validation set the
/// training accuracy is used instead.
inline MlpModel mlp_train(std::span<const Sample> train, std::span<const Sample> val, const MlpConfig& cfg,
                          std::vector<EpochStats>* history = nullptr) {
    if (train.empty())
        throw Error(ErrorKind::EmptyTraining, "mlp needs training samples");
    if (cfg.lr <= 0 || cfg.epochs < 1 || cfg.batch < 1)
        throw Error(ErrorKind::InvalidArgument, "lr, epochs and batch must be positive");
    auto labels = label_set(train);
    if (labels.size() < 2)
        throw Error(ErrorKind::SingleClass, "training set has a single class");

    Rng rng(cfg.seed);
    MlpModel model = mlp_init(train.front().x.size(), cfg.hidden, std::move(labels), rng);
    MlpModel best = model;
    double best_acc = -1.0;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Sample> batch;
    const auto batch_size = static_cast<std::size_t>(cfg.batch);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const auto stop = std::min(order.size(), start + batch_size);
            batch.clear();
            for (std::size_t i = start; i < stop; ++i)
                batch.push_back(train[order[i]]);
            const auto lg = mlp_loss_and_gradient(model, batch);
            if (!std::isfinite(lg.loss))
                throw Error(ErrorKind::NonFiniteLoss,
                            "loss diverged at epoch " + std::to_string(epoch) + "; lower the learning rate");
            epoch_loss += lg.loss * double(stop - start);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                auto& L = model.layers[l];
                const auto& G = lg.grad[l];
                for (std::size_t i = 0; i < L.weights.size(); ++i)
                    L.weights[i] -= cfg.lr * G.weights[i];
                for (std::size_t i = 0; i < L.bias.size(); ++i)
                    L.bias[i] -= cfg.lr * G.bias[i];
            }
        }
        const double acc = detail::mlp_accuracy(model, val.empty() ? train : val);
        if (history)
            history->push_back({epoch, epoch_loss / double(train.size()), acc});
        if (acc > best_acc) {
            best_acc = acc;
            best = model;
        }
    }
    best.validate();
    return best;
}

// --------------------------------------------------------------- evaluation

struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::size_t>> counts; // [true][predicted]

    explicit ConfusionMatrix(std::vector<std::string> lbls = {})
        : labels(std::move(lbls)), counts(labels.size(), std::vector<std::size_t>(labels.size(), 0)) {}

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : counts)
            for (auto c : row)
                t += c;
        return t;
    }
    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i)
            t += counts[i][i];
        return t;
    }
    double accuracy() const {
        const auto t = total();
        return t == 0 ? 0.0 : double(trace()) / double(t);
    }
};

struct Evaluation {
    ConfusionMatrix matrix;
    double accuracy = 0.0;
};

/// Tabulates `predict(sample)` against true labels; rows follow `labels`.
inline Evaluation evaluate(const std::vector<std::string>& labels, std::span<const Sample> samples,
                           const std::function<std::string(const Sample&)>& predict) {
    if (samples.empty())
        throw Error(ErrorKind::InvalidArgument, "evaluate needs samples");
    auto index_of = [&](const std::string& l) -> std::size_t {
        const auto it = std::find(labels.begin(), labels.end(), l);
        if (it == labels.end())
            throw Error(ErrorKind::UnknownLabel, "label '" + l + "' not known to model");
        return static_cast<std::size_t>(it - labels.begin());
    };
    Evaluation ev{ConfusionMatrix(labels), 0.0};
    for (const auto& s : samples) {
        const auto t = index_of(s.label);
        const auto p = index_of(predict(s));
        ++ev.matrix.counts[t][p];
    }
    ev.accuracy = ev.matrix.accuracy();
    return ev;
}

// ----------------------------------------------------------- trained model

struct Prediction {
    std::string label;
    double score = 0.0;
};

/// A trained classifier plus everything needed to apply it to raw
/// feature vectors: pipeline parameters, label set and standardiser.
struct Classifier {
    int tau = default_tau;
    int theta = default_theta;
    std::vector<std::string> labels;
    Standardizer standardizer;
    std::variant<KnnModel, MlpModel> model;

    std::string_view kind() const { return std::holds_alternative<KnnModel>(model) ? "knn" : "mlp"; }

    Prediction predict(std::span<const double> raw) const {
        const auto v = standardizer.apply(raw);
        if (const auto* knn = std::get_if<KnnModel>(&model)) {
            auto p = knn_predict(*knn, v);
            return {std::move(p.label), p.score};
        }
        auto p = mlp_predict(std::get<MlpModel>(model), v);
        return {std::move(p.label), p.score};
    }
};

/// `samples` hold raw (unstandardised) features.
inline Evaluation evaluate(const Classifier& c, std::span<const Sample> samples) {
    return evaluate(c.labels, samples, [&](const Sample& s) { return c.predict(s.x).label; });
}

} // namespace mhi

#endif // MHI_CLASSIFY_HPP
