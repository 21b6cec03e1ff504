#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <vector>

#include "calib/error.hpp"
#include "calib/format.hpp"
#include "calib/numerics.hpp"
#include "calib/prediction_store.hpp"

namespace calib {

enum class BinScheme { equal_width, equal_mass };

inline std::string_view to_string(BinScheme scheme) {
    return scheme == BinScheme::equal_width ? "equal-width" : "equal-mass";
}

inline BinScheme scheme_from_name(std::string_view name) {
    if (name == "equal-width") return BinScheme::equal_width;
    if (name == "equal-mass") return BinScheme::equal_mass;
    throw Error("unknown scheme: " + std::string(name));
}

struct BinSpec {
    std::size_t num_bins = 10;
    BinScheme scheme = BinScheme::equal_width;
};

inline void check_bin_spec(const BinSpec& spec) {
    if (spec.num_bins < 1) throw Error("num_bins must be at least 1");
}

struct BinStats {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_confidence = 0.0;
    double accuracy = 0.0;
    double gap = 0.0;

    bool empty() const noexcept { return count == 0; }
};

struct ReliabilityTable {
    BinSpec spec;
    std::vector<BinStats> bins;
    std::size_t n = 0;
};

// Equal-width boundaries, shared with the bin-assignment logic below so a
// confidence exactly on a boundary always lands in the higher bin.
inline std::vector<double> bin_boundaries(std::size_t k) {
    std::vector<double> bounds(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        bounds[i] = static_cast<double>(i) / static_cast<double>(k);
    }
    return bounds;
}

namespace detail {

inline std::vector<BinStats> finalize_bins(std::vector<std::size_t> counts,
                                           std::vector<double> conf_sums,
                                           std::vector<std::size_t> correct_counts,
                                           const std::vector<double>& lo,
                                           const std::vector<double>& hi) {
    std::vector<BinStats> bins(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        bins[i].lo = lo[i];
        bins[i].hi = hi[i];
        bins[i].count = counts[i];
        if (counts[i] > 0) {
            const auto c = static_cast<double>(counts[i]);
            bins[i].mean_confidence = conf_sums[i] / c;
            bins[i].accuracy = static_cast<double>(correct_counts[i]) / c;
            bins[i].gap = std::abs(bins[i].accuracy - bins[i].mean_confidence);
        }
    }
    return bins;
}

}  // namespace detail

inline ReliabilityTable reliability_table(const std::vector<ConfidenceOutcome>& outcomes,
                                          const BinSpec& spec) {
    check_bin_spec(spec);
    if (outcomes.empty()) throw Error("empty input");
    for (const auto& outcome : outcomes) {
        if (!(outcome.confidence > 0.0 && outcome.confidence <= 1.0)) {
            throw Error("confidence out of range");
        }
    }

    const std::size_t k = spec.num_bins;
    std::vector<std::size_t> counts(k, 0);
    std::vector<double> conf_sums(k, 0.0);
    std::vector<std::size_t> correct_counts(k, 0);
    std::vector<double> lo(k), hi(k);

    if (spec.scheme == BinScheme::equal_width) {
        const std::vector<double> bounds = bin_boundaries(k);
        for (std::size_t i = 0; i < k; ++i) {
            lo[i] = bounds[i];
            hi[i] = bounds[i + 1];
        }
        for (const auto& outcome : outcomes) {
            const auto it = std::upper_bound(bounds.begin(), bounds.end(), outcome.confidence);
            const auto raw = static_cast<std::size_t>(it - bounds.begin());
            const std::size_t bin = std::min(raw, k) - 1;
            counts[bin] += 1;
            conf_sums[bin] += outcome.confidence;
            correct_counts[bin] += outcome.correct ? 1 : 0;
        }
    } else {
        // Sorting by (confidence, correct) makes fully tied outcomes
        // interchangeable, so bin stats are permutation-invariant.
        std::vector<std::size_t> order(outcomes.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (outcomes[a].confidence != outcomes[b].confidence) {
                return outcomes[a].confidence < outcomes[b].confidence;
            }
            return outcomes[a].correct < outcomes[b].correct;
        });
        const std::size_t n = outcomes.size();
        const std::size_t base = n / k;
        const std::size_t rem = n % k;
        std::size_t next = 0;
        for (std::size_t i = 0; i < k; ++i) {
            // Quantile positions, so lo < hi holds even for empty bins.
            lo[i] = static_cast<double>(i) / static_cast<double>(k);
            hi[i] = static_cast<double>(i + 1) / static_cast<double>(k);
            const std::size_t size = base + (i < rem ? 1 : 0);
            for (std::size_t j = 0; j < size; ++j, ++next) {
                const auto& outcome = outcomes[order[next]];
                counts[i] += 1;
                conf_sums[i] += outcome.confidence;
                correct_counts[i] += outcome.correct ? 1 : 0;
            }
        }
    }

    ReliabilityTable table;
    table.spec = spec;
    table.n = outcomes.size();
    table.bins = detail::finalize_bins(std::move(counts), std::move(conf_sums),
                                       std::move(correct_counts), lo, hi);
    return table;
}

inline double ece(const ReliabilityTable& table) {
    const auto n = static_cast<double>(table.n);
    double sum = 0.0;
    for (const auto& bin : table.bins) {
        if (!bin.empty()) sum += (static_cast<double>(bin.count) / n) * bin.gap;
    }
    return sum;
}

inline double accuracy(const std::vector<ConfidenceOutcome>& outcomes) {
    if (outcomes.empty()) throw Error("empty input");
    std::size_t correct = 0;
    for (const auto& outcome : outcomes) correct += outcome.correct ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

struct EvaluationResult {
    double accuracy = 0.0;
    double ece = 0.0;
    ReliabilityTable table;
};

inline std::vector<ConfidenceOutcome> confidence_outcomes(const PredictionSet& set, double t) {
    check_temperature(t);
    std::vector<ConfidenceOutcome> outcomes;
    outcomes.reserve(set.size());
    for (const auto& record : set.records) outcomes.push_back(confidence_outcome(record, t));
    return outcomes;
}

inline EvaluationResult evaluate(const PredictionSet& set, double t, const BinSpec& spec) {
    const auto outcomes = confidence_outcomes(set, t);
    EvaluationResult result;
    result.accuracy = accuracy(outcomes);
    result.table = reliability_table(outcomes, spec);
    result.ece = ece(result.table);
    return result;
}

inline void write_reliability_csv(std::ostream& out, const ReliabilityTable& table) {
    out << "bin_lo,bin_hi,count,avg_confidence,accuracy,gap\n";
    for (const auto& bin : table.bins) {
        out << fmt_sig(bin.lo, 9) << "," << fmt_sig(bin.hi, 9) << "," << bin.count << ",";
        if (bin.empty()) {
            out << ",,\n";
        } else {
            out << fmt_sig(bin.mean_confidence, 9) << "," << fmt_sig(bin.accuracy, 9) << ","
                << fmt_sig(bin.gap, 9) << "\n";
        }
    }
}

}  // namespace calib
