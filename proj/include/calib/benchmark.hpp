#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "calib/calibration.hpp"
#include "calib/error.hpp"
#include "calib/rng.hpp"
#include "calib/temperature.hpp"
#include "calib/training.hpp"

namespace calib {

// Class-conditional Gaussian clusters standing in for genre/domain shift:
// the OOD split translates every cluster mean by shift_magnitude along one
// random direction and inflates the noise.
struct ShiftBenchmark {
    FeatureDataset train_id;
    FeatureDataset dev_id;
    FeatureDataset test_id;
    FeatureDataset test_ood;
    std::uint64_t seed = 0;
    double shift_magnitude = 0.0;

    bool operator==(const ShiftBenchmark&) const = default;
};

namespace detail {

inline constexpr double kMeanSpread = 2.0;
inline constexpr double kStdLo = 0.5;
inline constexpr double kStdHi = 1.5;
inline constexpr double kOodStdSlope = 0.15;

inline FeatureDataset sample_split(std::mt19937_64& rng, const std::vector<std::vector<double>>& means,
                                   const std::vector<double>& offset,
                                   const std::vector<double>& stds, double std_scale,
                                   std::size_t n) {
    const std::size_t k = means.size();
    const std::size_t dim = means.front().size();
    FeatureDataset data;
    data.num_classes = k;
    data.feature_dim = dim;
    data.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<std::size_t>(uniform_index(rng, k));
        FeatureRecord record;
        record.label = label;
        record.features.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            record.features[d] =
                means[label][d] + offset[d] + std_scale * stds[label] * standard_normal(rng);
        }
        data.records.push_back(std::move(record));
    }
    return data;
}

}  // namespace detail

// Draw order is fixed (means, shift direction, then the four splits in
// declaration order) so outputs are reproducible per seed.
inline ShiftBenchmark generate_shift_benchmark(std::size_t num_classes, std::size_t feature_dim,
                                               std::size_t n_per_split, double shift_magnitude,
                                               std::uint64_t seed) {
    if (num_classes < 2 || feature_dim < 1 || n_per_split < 10) throw Error("invalid sizes");
    if (!(std::isfinite(shift_magnitude) && shift_magnitude >= 0.0)) {
        throw Error("shift_magnitude must be nonnegative");
    }

    std::mt19937_64 rng(seed);
    // Per-coordinate spread shrinks with sqrt(dim) so expected cluster
    // separation, and with it task difficulty, stays comparable across
    // feature dimensions.
    const double spread = detail::kMeanSpread / std::sqrt(static_cast<double>(feature_dim));
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(feature_dim));
    for (auto& mean : means) {
        for (double& m : mean) m = spread * standard_normal(rng);
    }

    // Per-class isotropic spread. Unequal spreads keep the clusters Gaussian
    // while making the Bayes boundary quadratic, so a linear-softmax model is
    // systematically miscalibrated the way the paper's classifiers are.
    std::vector<double> stds(num_classes);
    for (double& s : stds) s = detail::kStdLo + (detail::kStdHi - detail::kStdLo) * uniform_unit(rng);

    std::vector<double> direction(feature_dim);
    double norm_sq = 0.0;
    for (double& d : direction) {
        d = standard_normal(rng);
        norm_sq += d * d;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 0.0) {
        for (double& d : direction) d /= norm;
    } else {
        direction[0] = 1.0;
    }

    std::vector<double> no_offset(feature_dim, 0.0);
    std::vector<double> ood_offset(feature_dim);
    for (std::size_t d = 0; d < feature_dim; ++d) ood_offset[d] = shift_magnitude * direction[d];
    const double ood_scale = 1.0 + detail::kOodStdSlope * shift_magnitude;

    ShiftBenchmark bench;
    bench.seed = seed;
    bench.shift_magnitude = shift_magnitude;
    bench.train_id = detail::sample_split(rng, means, no_offset, stds, 1.0, n_per_split);
    bench.dev_id = detail::sample_split(rng, means, no_offset, stds, 1.0, n_per_split);
    bench.test_id = detail::sample_split(rng, means, no_offset, stds, 1.0, n_per_split);
    bench.test_ood = detail::sample_split(rng, means, ood_offset, stds, ood_scale, n_per_split);
    return bench;
}

// The full per-seed Table 3 pipeline: generate splits, train MLE and LS
// models, fit a temperature on dev for each, evaluate ID and OOD both
// out-of-the-box and scaled. Shared between the CLI and the acceptance suite
// so both report the same numbers.
struct BenchmarkPipelineConfig {
    std::size_t num_classes = 3;
    std::size_t feature_dim = 64;
    std::size_t n_per_split = 2000;
    double shift_magnitude = 3.0;
    double alpha = 0.1;
    TrainConfig train{150, 64, 0.5, 0};
    SearchGrid grid{};
    BinSpec bin_spec{};
};

struct BenchmarkModelRun {
    LinearSoftmaxModel model;
    // train, dev, test_id, test_ood
    std::array<PredictionSet, 4> predictions;
    TemperatureFit fit;
    EvaluationResult id_oob, ood_oob, id_scaled, ood_scaled;
};

struct BenchmarkSeedRun {
    std::uint64_t seed = 0;
    BenchmarkModelRun mle, ls;
};

inline constexpr std::array<const char*, 4> kBenchmarkSplitNames = {"train", "dev", "test_id",
                                                                    "test_ood"};

inline BenchmarkSeedRun run_benchmark_seed(const BenchmarkPipelineConfig& config,
                                           std::uint64_t seed) {
    const ShiftBenchmark bench = generate_shift_benchmark(
        config.num_classes, config.feature_dim, config.n_per_split, config.shift_magnitude, seed);
    TrainConfig train_config = config.train;
    train_config.seed = seed;
    const LinearSoftmaxModel init = zero_model(config.num_classes, config.feature_dim);
    const Objective objective{ObjectiveKind::ece, config.bin_spec};

    auto run_model = [&](double alpha) {
        BenchmarkModelRun run;
        run.model = train(init, bench.train_id, alpha, train_config).model;
        run.predictions = {
            predictions_for(run.model, bench.train_id, SplitTag::unlabeled),
            predictions_for(run.model, bench.dev_id, SplitTag::in_domain_dev),
            predictions_for(run.model, bench.test_id, SplitTag::in_domain_test),
            predictions_for(run.model, bench.test_ood, SplitTag::out_of_domain_test),
        };
        run.fit = fit_temperature(run.predictions[1], config.grid, objective);
        run.id_oob = evaluate(run.predictions[2], 1.0, config.bin_spec);
        run.ood_oob = evaluate(run.predictions[3], 1.0, config.bin_spec);
        run.id_scaled = evaluate(run.predictions[2], run.fit.temperature, config.bin_spec);
        run.ood_scaled = evaluate(run.predictions[3], run.fit.temperature, config.bin_spec);
        return run;
    };

    BenchmarkSeedRun result;
    result.seed = seed;
    result.mle = run_model(0.0);
    result.ls = run_model(config.alpha);
    return result;
}

}  // namespace calib
