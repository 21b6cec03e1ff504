#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "calib/error.hpp"
#include "calib/prediction_store.hpp"

namespace calib {

struct ProbabilityVector {
    std::vector<double> probs;

    bool operator==(const ProbabilityVector&) const = default;
};

inline void check_probability(const ProbabilityVector& p) {
    double sum = 0.0;
    for (const double v : p.probs) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error("invalid probability vector");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("invalid probability vector");
}

struct ConfidenceOutcome {
    std::size_t predicted_label = 0;
    double confidence = 0.0;
    bool correct = false;
};

inline void check_finite_logits(const std::vector<double>& logits) {
    if (logits.size() < 2) throw Error("logit vector too short");
    for (const double z : logits) {
        if (!std::isfinite(z)) throw Error("non-finite input");
    }
}

inline void check_temperature(double t) {
    if (!(std::isfinite(t) && t > 0.0)) throw Error("temperature must be positive and finite");
}

// Lowest index wins ties so confidence outcomes are reproducible.
inline std::size_t argmax(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

// Max-subtraction keeps exp in range for logits of magnitude up to ~1e4.
inline ProbabilityVector softmax(const std::vector<double>& logits) {
    check_finite_logits(logits);
    const double m = logits[argmax(logits)];
    ProbabilityVector out;
    out.probs.resize(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out.probs[i] = std::exp(logits[i] - m);
        sum += out.probs[i];
    }
    for (double& p : out.probs) p /= sum;
    return out;
}

inline std::vector<double> log_softmax(const std::vector<double>& logits) {
    check_finite_logits(logits);
    const double m = logits[argmax(logits)];
    double sum = 0.0;
    for (const double z : logits) sum += std::exp(z - m);
    const double lse = m + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

inline std::vector<double> apply_temperature(const std::vector<double>& logits, double t) {
    check_temperature(t);
    check_finite_logits(logits);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] / t;
    return out;
}

inline double nll(const ProbabilityVector& probs, std::size_t gold_label) {
    check_probability(probs);
    if (gold_label >= probs.probs.size()) throw Error("gold_label out of range");
    return -std::log(probs.probs[gold_label]);
}

// Log-domain NLL straight from logits; never materializes tiny probabilities.
inline double nll_from_logits(const std::vector<double>& logits, std::size_t gold_label,
                              double t = 1.0) {
    if (gold_label >= logits.size()) throw Error("gold_label out of range");
    return -log_softmax(apply_temperature(logits, t))[gold_label];
}

inline double kl_divergence(const ProbabilityVector& target, const ProbabilityVector& probs) {
    if (target.probs.size() != probs.probs.size()) throw Error("mismatched lengths");
    check_probability(target);
    check_probability(probs);
    double sum = 0.0;
    for (std::size_t i = 0; i < target.probs.size(); ++i) {
        const double t = target.probs[i];
        if (t > 0.0) sum += t * std::log(t / probs.probs[i]);
    }
    return sum;
}

// KL(target || softmax(z)) in the log domain.
inline double kl_from_logits(const ProbabilityVector& target, const std::vector<double>& logits) {
    if (target.probs.size() != logits.size()) throw Error("mismatched lengths");
    check_probability(target);
    const std::vector<double> logp = log_softmax(logits);
    double sum = 0.0;
    for (std::size_t i = 0; i < target.probs.size(); ++i) {
        const double t = target.probs[i];
        if (t > 0.0) sum += t * (std::log(t) - logp[i]);
    }
    return sum;
}

inline double entropy(const ProbabilityVector& probs) {
    check_probability(probs);
    double sum = 0.0;
    for (const double p : probs.probs) {
        if (p > 0.0) sum -= p * std::log(p);
    }
    return sum;
}

inline ProbabilityVector one_hot(std::size_t gold_label, std::size_t num_classes) {
    if (gold_label >= num_classes) throw Error("gold_label out of range");
    ProbabilityVector out;
    out.probs.assign(num_classes, 0.0);
    out.probs[gold_label] = 1.0;
    return out;
}

// Allocation-free equivalent of softmax(apply_temperature(z, T)) evaluated at
// the argmax: divide-first then max-subtract matches that composition bit for
// bit, which the set-level evaluation relies on.
inline ConfidenceOutcome confidence_outcome(const PredictionRecord& record, double t) {
    check_temperature(t);
    check_finite_logits(record.logits);
    const std::size_t predicted = argmax(record.logits);
    const double top = record.logits[predicted] / t;
    double denom = 0.0;
    for (const double z : record.logits) denom += std::exp(z / t - top);
    return ConfidenceOutcome{predicted, 1.0 / denom, predicted == record.gold_label};
}

}  // namespace calib
