#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "calib/error.hpp"
#include "calib/rng.hpp"

namespace calib {

// Prediction logs are the universal input unit: one raw logit vector plus the
// gold-label index per example. Logits, not probabilities, are the canonical
// stored quantity; probabilities are always derived downstream.

// Hard caps checked at construction so downstream index arithmetic stays
// overflow-free.
inline constexpr std::size_t kMaxNumClasses = 10'000;
inline constexpr std::size_t kMaxRecords = 0xFFFF'FFFFull;  // 2^32 - 1

struct LabelSpace {
    std::size_t num_classes = 0;

    bool operator==(const LabelSpace&) const = default;
};

enum class SplitTag { in_domain_dev, in_domain_test, out_of_domain_test, unlabeled };

inline std::string_view to_string(SplitTag tag) {
    switch (tag) {
        case SplitTag::in_domain_dev: return "in-domain-dev";
        case SplitTag::in_domain_test: return "in-domain-test";
        case SplitTag::out_of_domain_test: return "out-of-domain-test";
        case SplitTag::unlabeled: return "unlabeled-split";
    }
    return "unlabeled-split";
}

struct PredictionRecord {
    std::vector<double> logits;
    std::size_t gold_label = 0;

    bool operator==(const PredictionRecord&) const = default;
};

// Immutable after construction; safe to share across threads for reading.
struct PredictionSet {
    LabelSpace label_space;
    std::vector<PredictionRecord> records;
    SplitTag split_tag = SplitTag::unlabeled;

    std::size_t size() const noexcept { return records.size(); }
    std::size_t num_classes() const noexcept { return label_space.num_classes; }

    bool operator==(const PredictionSet&) const = default;
};

// `row` is 1-based and names the offending input line in error messages.
inline void validate_record(const PredictionRecord& record, std::size_t num_classes,
                            std::size_t row) {
    if (record.logits.size() != num_classes) throw ParseError("inconsistent logit arity", row);
    for (const double logit : record.logits) {
        if (!std::isfinite(logit)) throw ParseError("non-finite logit", row);
    }
    if (record.gold_label >= num_classes) throw ParseError("gold_label out of range", row);
}

inline void check_num_classes(std::size_t num_classes) {
    if (num_classes < 2) throw Error("num_classes must be at least 2");
    if (num_classes > kMaxNumClasses) throw Error("num_classes exceeds supported maximum (10000)");
}

// Builds a validated set from in-memory records. num_classes is inferred from
// the first record unless given explicitly.
inline PredictionSet make_prediction_set(std::vector<PredictionRecord> records, SplitTag tag,
                                         std::optional<std::size_t> num_classes = std::nullopt) {
    if (records.empty()) throw Error("empty prediction set");
    if (records.size() > kMaxRecords) throw Error("record count exceeds supported maximum");
    const std::size_t k = num_classes ? *num_classes : records.front().logits.size();
    check_num_classes(k);
    for (std::size_t i = 0; i < records.size(); ++i) {
        validate_record(records[i], k, i + 1);
    }
    return PredictionSet{LabelSpace{k}, std::move(records), tag};
}

// Seeded uniform shuffle, then a cut into halves whose sizes differ by at
// most one (the first half gets the extra record). The union of the outputs
// equals the input as a multiset.
inline std::pair<PredictionSet, PredictionSet> split_half(const PredictionSet& set,
                                                          std::uint64_t seed) {
    if (set.size() < 2) throw Error("set too small to split");
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    shuffle(order, rng);

    const std::size_t first_n = (set.size() + 1) / 2;
    PredictionSet first{set.label_space, {}, set.split_tag};
    PredictionSet second{set.label_space, {}, set.split_tag};
    first.records.reserve(first_n);
    second.records.reserve(set.size() - first_n);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < first_n ? first : second).records.push_back(set.records[order[i]]);
    }
    return {std::move(first), std::move(second)};
}

}  // namespace calib
