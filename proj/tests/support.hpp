#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "calib/calib.hpp"

// Shared fixtures for the unit and acceptance suites: an independent binning
// oracle, random input generators, and process-level helpers for driving the
// CLI binary. The oracle intentionally shares no code path with the library:
// bin assignment is a per-outcome linear scan and ECE a direct summation.

namespace support {

struct OracleBin {
    std::size_t count = 0;
    std::size_t correct = 0;
    double conf_sum = 0.0;
};

inline std::vector<OracleBin> oracle_bins(const std::vector<calib::ConfidenceOutcome>& outcomes,
                                          std::size_t k, calib::BinScheme scheme) {
    std::vector<OracleBin> bins(k);
    if (scheme == calib::BinScheme::equal_width) {
        for (const auto& outcome : outcomes) {
            // Interval [i/k, (i+1)/k) claims a boundary-exact confidence;
            // everything unclaimed (including 1.0) belongs to the top bin.
            std::size_t bin = k - 1;
            for (std::size_t i = 0; i + 1 < k; ++i) {
                const double lo = static_cast<double>(i) / static_cast<double>(k);
                const double hi = static_cast<double>(i + 1) / static_cast<double>(k);
                if (outcome.confidence >= lo && outcome.confidence < hi) {
                    bin = i;
                    break;
                }
            }
            bins[bin].count += 1;
            bins[bin].conf_sum += outcome.confidence;
            bins[bin].correct += outcome.correct ? 1 : 0;
        }
        return bins;
    }
    std::vector<std::pair<double, bool>> items;
    items.reserve(outcomes.size());
    for (const auto& outcome : outcomes) items.emplace_back(outcome.confidence, outcome.correct);
    std::sort(items.begin(), items.end());
    std::size_t next = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t size = outcomes.size() / k + (i < outcomes.size() % k ? 1 : 0);
        for (std::size_t j = 0; j < size; ++j, ++next) {
            bins[i].count += 1;
            bins[i].conf_sum += items[next].first;
            bins[i].correct += items[next].second ? 1 : 0;
        }
    }
    return bins;
}

inline double oracle_ece(const std::vector<calib::ConfidenceOutcome>& outcomes, std::size_t k,
                         calib::BinScheme scheme) {
    const auto bins = oracle_bins(outcomes, k, scheme);
    const auto n = static_cast<double>(outcomes.size());
    double total = 0.0;
    for (const auto& bin : bins) {
        if (bin.count == 0) continue;
        const auto count = static_cast<double>(bin.count);
        const double gap = std::abs(static_cast<double>(bin.correct) / count - bin.conf_sum / count);
        total += (count / n) * gap;
    }
    return total;
}

// Confidences in (0, 1], with a slice of exact bin boundaries mixed in so the
// edge rule gets exercised.
inline std::vector<calib::ConfidenceOutcome> random_outcomes(std::mt19937_64& rng, std::size_t n) {
    std::vector<calib::ConfidenceOutcome> outcomes;
    outcomes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double confidence;
        if (calib::uniform_index(rng, 8) == 0) {
            confidence = static_cast<double>(1 + calib::uniform_index(rng, 10)) / 10.0;
        } else {
            confidence = 1.0 - calib::uniform_unit(rng);
        }
        outcomes.push_back({0, confidence, calib::uniform_index(rng, 2) == 0});
    }
    return outcomes;
}

inline calib::PredictionSet random_set(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::vector<calib::PredictionRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        calib::PredictionRecord record;
        record.logits.resize(k);
        for (double& z : record.logits) z = 10.0 * (calib::uniform_unit(rng) - 0.5);
        record.gold_label = static_cast<std::size_t>(calib::uniform_index(rng, k));
        records.push_back(std::move(record));
    }
    return calib::make_prediction_set(std::move(records), calib::SplitTag::unlabeled);
}

// Labels sampled from softmax(z) but logits presented as scale * z, so the
// population NLL minimizer over temperatures sits at T == scale.
inline calib::PredictionSet overconfident_set(std::size_t n, std::size_t num_classes, double sigma,
                                              double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<calib::PredictionRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> z(num_classes);
        for (double& v : z) v = sigma * calib::standard_normal(rng);
        const auto probs = calib::softmax(z).probs;
        const double u = calib::uniform_unit(rng);
        std::size_t gold = num_classes - 1;
        double cumulative = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
            cumulative += probs[c];
            if (u < cumulative) {
                gold = c;
                break;
            }
        }
        calib::PredictionRecord record;
        record.logits.resize(num_classes);
        for (std::size_t c = 0; c < num_classes; ++c) record.logits[c] = scale * z[c];
        record.gold_label = gold;
        records.push_back(std::move(record));
    }
    return calib::make_prediction_set(std::move(records), calib::SplitTag::in_domain_dev);
}

// Two-class records whose confidences come out 0.95 (correct), 0.85
// (correct), 0.85 (wrong), 0.55 (correct): the hand-binned k=10 equal-width
// ECE is 0.25*0.45 + 0.5*0.35 + 0.25*0.05 = 0.30.
inline calib::PredictionSet four_outcome_set() {
    const double g95 = std::log(19.0);
    const double g85 = std::log(17.0 / 3.0);
    const double g55 = std::log(11.0 / 9.0);
    std::vector<calib::PredictionRecord> records = {
        {{g95, 0.0}, 0}, {{g85, 0.0}, 0}, {{g85, 0.0}, 1}, {{g55, 0.0}, 0}};
    return calib::make_prediction_set(std::move(records), calib::SplitTag::unlabeled);
}

inline std::vector<double> fd_gradient(const std::vector<double>& logits,
                                       const calib::TargetDistribution& target, double h) {
    std::vector<double> grad(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        std::vector<double> plus = logits;
        std::vector<double> minus = logits;
        plus[i] += h;
        minus[i] -= h;
        grad[i] =
            (calib::smoothed_loss(plus, target) - calib::smoothed_loss(minus, target)) / (2.0 * h);
    }
    return grad;
}

inline double worst_component_error(const std::vector<double>& analytic,
                                    const std::vector<double>& numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

inline std::filesystem::path fresh_dir(const std::string& label) {
    static std::uint64_t counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("calib_" + label + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

#ifdef CALIBRATE_CLI_PATH
inline CliResult run_cli(const std::string& args) {
    const auto dir = fresh_dir("cli_io");
    const auto out_path = (dir / "stdout.txt").string();
    const auto err_path = (dir / "stderr.txt").string();
    const std::string command =
        std::string(CALIBRATE_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    const int raw = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    std::filesystem::remove_all(dir);
    return result;
}
#endif

}  // namespace support
