#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "calib/error.hpp"
#include "calib/format.hpp"
#include "calib/prediction_store.hpp"
#include "calib/rng.hpp"
#include "calib/smoothing.hpp"

namespace calib {

struct FeatureRecord {
    std::vector<double> features;
    std::size_t label = 0;

    bool operator==(const FeatureRecord&) const = default;
};

struct FeatureDataset {
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::vector<FeatureRecord> records;

    std::size_t size() const noexcept { return records.size(); }

    bool operator==(const FeatureDataset&) const = default;
};

inline void check_dataset(const FeatureDataset& data) {
    if (data.num_classes < 2) throw Error("num_classes must be at least 2");
    if (data.feature_dim < 1) throw Error("feature_dim must be at least 1");
    if (data.records.empty()) throw Error("empty dataset");
    for (const auto& record : data.records) {
        if (record.features.size() != data.feature_dim) throw Error("inconsistent feature arity");
        if (record.label >= data.num_classes) throw Error("label out of range");
        for (const double f : record.features) {
            if (!std::isfinite(f)) throw Error("non-finite feature");
        }
    }
}

struct LinearSoftmaxModel {
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::vector<double> weights;  // row-major, num_classes x feature_dim
    std::vector<double> bias;

    bool operator==(const LinearSoftmaxModel&) const = default;

    std::vector<double> logits_for(const std::vector<double>& features) const {
        std::vector<double> z(num_classes, 0.0);
        for (std::size_t k = 0; k < num_classes; ++k) {
            const double* row = weights.data() + k * feature_dim;
            double sum = bias[k];
            for (std::size_t d = 0; d < feature_dim; ++d) sum += row[d] * features[d];
            z[k] = sum;
        }
        return z;
    }
};

inline LinearSoftmaxModel zero_model(std::size_t num_classes, std::size_t feature_dim) {
    LinearSoftmaxModel model;
    model.num_classes = num_classes;
    model.feature_dim = feature_dim;
    model.weights.assign(num_classes * feature_dim, 0.0);
    model.bias.assign(num_classes, 0.0);
    return model;
}

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
};

struct TrainResult {
    LinearSoftmaxModel model;
    std::vector<double> epoch_losses;
};

// Seeded minibatch gradient descent on the mean smoothed loss; alpha = 0 is
// plain MLE. Single-threaded on purpose: the result must be bitwise
// deterministic for a fixed seed.
inline TrainResult train(const LinearSoftmaxModel& init, const FeatureDataset& data, double alpha,
                         const TrainConfig& config) {
    check_dataset(data);
    if (init.num_classes != data.num_classes || init.feature_dim != data.feature_dim) {
        throw Error("model/dataset dimension mismatch");
    }
    if (!(std::isfinite(config.learning_rate) && config.learning_rate > 0.0)) {
        throw Error("learning_rate must be positive");
    }
    if (config.epochs < 1) throw Error("epochs must be at least 1");
    if (config.batch_size < 1) throw Error("batch_size must be at least 1");

    const std::size_t k = data.num_classes;
    const std::size_t d = data.feature_dim;
    const SmoothingConfig smoothing{alpha, k};
    std::vector<TargetDistribution> targets;
    targets.reserve(k);
    for (std::size_t gold = 0; gold < k; ++gold) targets.push_back(smooth_targets(gold, smoothing));

    TrainResult result;
    result.model = init;
    result.epoch_losses.reserve(config.epochs);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);

    std::vector<double> grad_w(k * d);
    std::vector<double> grad_b(k);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_loss = 0.0;
        std::size_t start = 0;
        while (start < order.size()) {
            const std::size_t end = std::min(start + config.batch_size, order.size());
            const auto batch_n = static_cast<double>(end - start);
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            for (std::size_t i = start; i < end; ++i) {
                const FeatureRecord& record = data.records[order[i]];
                const TargetDistribution& target = targets[record.label];
                const std::vector<double> z = result.model.logits_for(record.features);
                for (const double zk : z) {
                    if (!std::isfinite(zk)) throw Error("training diverged");
                }
                epoch_loss += smoothed_loss(z, target);
                const std::vector<double> g = loss_gradient(z, target);
                for (std::size_t c = 0; c < k; ++c) {
                    const double gc = g[c];
                    double* row = grad_w.data() + c * d;
                    for (std::size_t f = 0; f < d; ++f) row[f] += gc * record.features[f];
                    grad_b[c] += gc;
                }
            }
            const double scale = config.learning_rate / batch_n;
            for (std::size_t i = 0; i < grad_w.size(); ++i) result.model.weights[i] -= scale * grad_w[i];
            for (std::size_t c = 0; c < k; ++c) result.model.bias[c] -= scale * grad_b[c];
            start = end;
        }
        epoch_loss /= static_cast<double>(data.size());
        if (!std::isfinite(epoch_loss)) throw Error("training diverged");
        result.epoch_losses.push_back(epoch_loss);
    }
    return result;
}

inline PredictionSet predictions_for(const LinearSoftmaxModel& model, const FeatureDataset& data,
                                     SplitTag tag) {
    check_dataset(data);
    if (model.num_classes != data.num_classes || model.feature_dim != data.feature_dim) {
        throw Error("model/dataset dimension mismatch");
    }
    std::vector<PredictionRecord> records;
    records.reserve(data.size());
    for (const auto& record : data.records) {
        records.push_back(PredictionRecord{model.logits_for(record.features), record.label});
    }
    return make_prediction_set(std::move(records), tag);
}

inline void write_feature_csv(std::ostream& out, const FeatureDataset& data) {
    for (std::size_t i = 0; i < data.feature_dim; ++i) out << "f_" << i << ",";
    out << "label\n";
    for (const auto& record : data.records) {
        for (const double f : record.features) out << fmt_roundtrip(f) << ",";
        out << record.label << "\n";
    }
}

inline void write_feature_csv(const std::string& path, const FeatureDataset& data) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file: " + path);
    write_feature_csv(out, data);
}

inline FeatureDataset read_feature_csv(std::istream& in, std::size_t num_classes) {
    std::string line;
    if (!std::getline(in, line)) throw Error("empty file");
    const auto header = split_csv(line);
    if (header.size() < 2 || header.back() != "label") throw ParseError("malformed row", 1);
    const std::size_t dim = header.size() - 1;
    for (std::size_t i = 0; i < dim; ++i) {
        if (header[i] != "f_" + std::to_string(i)) throw ParseError("malformed row", 1);
    }

    FeatureDataset data;
    data.num_classes = num_classes;
    data.feature_dim = dim;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto fields = split_csv(line);
        if (fields.size() != dim + 1) throw ParseError("inconsistent feature arity", row);
        FeatureRecord record;
        record.features.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const auto value = parse_double(fields[i]);
            if (!value) throw ParseError("malformed row", row);
            record.features.push_back(*value);
        }
        const auto label = parse_int64(fields.back());
        if (!label) throw ParseError("malformed row", row);
        if (*label < 0 || static_cast<std::size_t>(*label) >= num_classes) {
            throw ParseError("label out of range", row);
        }
        record.label = static_cast<std::size_t>(*label);
        data.records.push_back(std::move(record));
    }
    if (data.records.empty()) throw Error("empty file");
    check_dataset(data);
    return data;
}

// Flat parameter dump: one header line with the dims and seed, then all
// weights row-major followed by the biases.
inline void write_model_csv(std::ostream& out, const LinearSoftmaxModel& model,
                            std::uint64_t seed) {
    out << "num_classes=" << model.num_classes << ",feature_dim=" << model.feature_dim
        << ",seed=" << seed << "\n";
    bool first = true;
    for (const double w : model.weights) {
        out << (first ? "" : ",") << fmt_roundtrip(w);
        first = false;
    }
    for (const double b : model.bias) out << "," << fmt_roundtrip(b);
    out << "\n";
}

inline std::pair<LinearSoftmaxModel, std::uint64_t> read_model_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("empty file");
    const auto header = split_csv(line);
    if (header.size() != 3) throw ParseError("malformed row", 1);
    auto field_value = [&](std::size_t i, std::string_view key) {
        const auto& field = header[i];
        if (field.substr(0, key.size()) != key || field.size() <= key.size() ||
            field[key.size()] != '=') {
            throw ParseError("malformed row", 1);
        }
        const auto value = parse_int64(field.substr(key.size() + 1));
        if (!value || *value < 0) throw ParseError("malformed row", 1);
        return static_cast<std::uint64_t>(*value);
    };
    const auto k = static_cast<std::size_t>(field_value(0, "num_classes"));
    const auto d = static_cast<std::size_t>(field_value(1, "feature_dim"));
    const std::uint64_t seed = field_value(2, "seed");

    if (!std::getline(in, line)) throw Error("empty file");
    const auto fields = split_csv(line);
    if (fields.size() != k * d + k) throw ParseError("malformed row", 2);
    LinearSoftmaxModel model = zero_model(k, d);
    for (std::size_t i = 0; i < k * d + k; ++i) {
        const auto value = parse_double(fields[i]);
        if (!value) throw ParseError("malformed row", 2);
        (i < k * d ? model.weights[i] : model.bias[i - k * d]) = *value;
    }
    return {std::move(model), seed};
}

}  // namespace calib
