#pragma once

#include <cstddef>
#include <vector>

#include "calib/error.hpp"
#include "calib/numerics.hpp"

namespace calib {

// alpha == 0 reproduces exact one-hot targets, the MLE special case.
struct SmoothingConfig {
    double alpha = 0.1;
    std::size_t num_classes = 0;
};

inline void check_smoothing(const SmoothingConfig& config) {
    if (!(config.alpha >= 0.0 && config.alpha < 1.0)) throw Error("alpha out of range");
    if (config.num_classes < 2) throw Error("num_classes must be at least 2");
}

using TargetDistribution = ProbabilityVector;

// 1 - alpha on the gold label, alpha/(K-1) on each other label.
inline TargetDistribution smooth_targets(std::size_t gold_label, const SmoothingConfig& config) {
    check_smoothing(config);
    if (gold_label >= config.num_classes) throw Error("gold_label out of range");
    TargetDistribution target;
    target.probs.assign(config.num_classes, config.alpha / static_cast<double>(config.num_classes - 1));
    target.probs[gold_label] = 1.0 - config.alpha;
    return target;
}

// KL(target || softmax(logits)) in the log domain. Differs from the
// cross-entropy H(target, softmax(z)) by the constant entropy of the target,
// so gradients and argmins coincide.
inline double smoothed_loss(const std::vector<double>& logits, const TargetDistribution& target) {
    return kl_from_logits(target, logits);
}

// d/dz KL(target || softmax(z)) = softmax(z) - target; components sum to 0.
inline std::vector<double> loss_gradient(const std::vector<double>& logits,
                                         const TargetDistribution& target) {
    if (target.probs.size() != logits.size()) throw Error("mismatched lengths");
    std::vector<double> grad = softmax(logits).probs;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= target.probs[i];
    return grad;
}

}  // namespace calib
