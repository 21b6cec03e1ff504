#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "calib/calib.hpp"
#include "support.hpp"

// Standalone acceptance gate for the toolkit's headline guarantees. Each
// criterion prints exactly one [PASS]/[FAIL] line; the exit code is the number
// of failures. All tolerances and time limits live here, in code.

namespace {

namespace fs = std::filesystem;
using namespace calib;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

// 1. Library ECE agrees with an independent brute-force oracle to 1e-12 over
//    1000 random prediction sets (n <= 64, K <= 5), k in {1, 5, 10}, both
//    binning schemes, in under 5 seconds.
Outcome criterion_ece_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 rng(20260816);
    double max_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto set = support::random_set(rng, 1 + uniform_index(rng, 64),
                                             2 + uniform_index(rng, 4));
        const auto outcomes = confidence_outcomes(set, 1.0);
        for (const std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{10}}) {
            for (const BinScheme scheme : {BinScheme::equal_width, BinScheme::equal_mass}) {
                const double mine = ece(reliability_table(outcomes, BinSpec{k, scheme}));
                const double oracle = support::oracle_ece(outcomes, k, scheme);
                max_err = std::max(max_err, std::abs(mine - oracle));
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {max_err <= 1e-12 && elapsed < 5.0,
            "1000 sets, max err " + fmt("%.2e", max_err) + ", " + fmt("%.2f", elapsed) + "s"};
}

// 2. smooth_targets(gold 0, alpha 0.1, K 3) equals [0.9, 0.05, 0.05] to 1e-15.
Outcome criterion_smoothing_targets() {
    const auto target = smooth_targets(0, SmoothingConfig{0.1, 3});
    const std::vector<double> expected = {0.9, 0.05, 0.05};
    double max_err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        max_err = std::max(max_err, std::abs(target.probs[i] - expected[i]));
    }
    return {target.probs.size() == 3 && max_err <= 1e-15, "max err " + fmt("%.2e", max_err)};
}

// 3. Analytic smoothed-loss gradient matches central differences (h = 1e-5)
//    within 1e-5 per-component relative error over 100 random triples.
Outcome criterion_gradient_check() {
    std::mt19937_64 rng(20260817);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t k = 2 + uniform_index(rng, 4);
        const std::size_t gold = uniform_index(rng, k);
        const double alpha = 0.5 * uniform_unit(rng);
        std::vector<double> logits(k);
        for (double& z : logits) z = 8.0 * (uniform_unit(rng) - 0.5);
        const auto target = smooth_targets(gold, SmoothingConfig{alpha, k});
        const auto analytic = loss_gradient(logits, target);
        const auto numeric = support::fd_gradient(logits, target, 1e-5);
        worst = std::max(worst, support::worst_component_error(analytic, numeric));
    }
    return {worst < 1e-5, "100 triples, worst rel err " + fmt("%.2e", worst)};
}

// 4. With labels sampled from softmax(z) but logits stored as 3z (n = 10000,
//    K = 3, fixed seed), the NLL fit over the default grid lands in
//    [2.7, 3.3] in under 10 seconds.
Outcome criterion_fit_recovery() {
    const auto dev = support::overconfident_set(10000, 3, 1.5, 3.0, 20260818);
    const auto start = Clock::now();
    const auto fit = fit_temperature(dev, SearchGrid{}, Objective{ObjectiveKind::nll, BinSpec{}});
    const double elapsed = seconds_since(start);
    return {fit.temperature >= 2.7 && fit.temperature <= 3.3 && elapsed < 10.0,
            "T=" + fmt("%.2f", fit.temperature) + ", " + fmt("%.2f", elapsed) + "s"};
}

// 5. Rescaling never moves accuracy: over 100 random sets, accuracy at 20
//    sampled grid temperatures is bitwise equal to accuracy at T = 1, and the
//    fitted temperature never changes any predicted label.
Outcome criterion_accuracy_invariance() {
    std::mt19937_64 rng(20260819);
    const auto points = grid_points(SearchGrid{});
    std::size_t mismatches = 0;
    for (int i = 0; i < 100; ++i) {
        const auto set = support::random_set(rng, 1 + uniform_index(rng, 64),
                                             2 + uniform_index(rng, 4));
        const double base = accuracy(confidence_outcomes(set, 1.0));
        for (std::size_t p = 0; p < points.size(); p += 25) {
            if (accuracy(confidence_outcomes(set, points[p])) != base) ++mismatches;
        }
        const auto fit = fit_temperature(set, SearchGrid{}, Objective{ObjectiveKind::ece, BinSpec{}});
        for (const auto& record : set.records) {
            if (argmax(apply_temperature(record.logits, fit.temperature)) !=
                argmax(record.logits)) {
                ++mismatches;
            }
        }
    }
    return {mismatches == 0, "100 sets, " + std::to_string(mismatches) + " mismatches"};
}

// 6. Softmax entropy is nondecreasing in temperature along every adjacent
//    default-grid pair, over 1000 random logit vectors (1e-12 slack).
Outcome criterion_entropy_monotone() {
    std::mt19937_64 rng(20260820);
    const auto points = grid_points(SearchGrid{});
    std::size_t violations = 0;
    std::vector<double> entropies(points.size());
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + uniform_index(rng, 4);
        std::vector<double> logits(k);
        for (double& z : logits) z = 10.0 * (uniform_unit(rng) - 0.5);
        for (std::size_t p = 0; p < points.size(); ++p) {
            entropies[p] = entropy(softmax(apply_temperature(logits, points[p])));
        }
        for (std::size_t p = 1; p < points.size(); ++p) {
            if (entropies[p] < entropies[p - 1] - 1e-12) ++violations;
        }
    }
    return {violations == 0,
            "1000 vectors x 499 pairs, " + std::to_string(violations) + " violations"};
}

// 7. Default benchmark over seeds 1..10 (shift 3.0, alpha 0.1), thresholds
//    frozen from the committed configuration's reference run (10/10, 10/10,
//    9/10): (a) scaling reduces MLE in-domain ECE, (b) label smoothing beats
//    MLE out-of-domain out of the box, (c) MLE beats label smoothing
//    in-domain out of the box, each in at least 8 of 10 seeds, under 120 s.
Outcome criterion_benchmark_trends() {
    const auto start = Clock::now();
    const BenchmarkPipelineConfig config;
    int scaled_helps = 0;
    int ls_ood_better = 0;
    int mle_id_better = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto run = run_benchmark_seed(config, seed);
        if (run.mle.id_scaled.ece < run.mle.id_oob.ece) ++scaled_helps;
        if (run.ls.ood_oob.ece < run.mle.ood_oob.ece) ++ls_ood_better;
        if (run.mle.id_oob.ece < run.ls.id_oob.ece) ++mle_id_better;
    }
    const double elapsed = seconds_since(start);
    const std::string detail = "a=" + std::to_string(scaled_helps) + "/10 b=" +
                               std::to_string(ls_ood_better) + "/10 c=" +
                               std::to_string(mle_id_better) + "/10, " + fmt("%.1f", elapsed) +
                               "s";
    return {scaled_helps >= 8 && ls_ood_better >= 8 && mle_id_better >= 8 && elapsed < 120.0,
            detail};
}

// 8. Throughput: single-threaded ECE over 1,000,000 records (K = 4) in under
//    1 s, and a full 500-point search over 10,000 records in under 10 s.
//    Data generation is excluded from both measurements.
Outcome criterion_throughput() {
    std::mt19937_64 rng(20260821);
    std::vector<PredictionRecord> records;
    records.reserve(1'000'000);
    for (std::size_t i = 0; i < 1'000'000; ++i) {
        PredictionRecord record;
        record.logits.resize(4);
        for (double& z : record.logits) z = 10.0 * (uniform_unit(rng) - 0.5);
        record.gold_label = uniform_index(rng, 4);
        records.push_back(std::move(record));
    }
    const auto big = make_prediction_set(std::move(records), SplitTag::unlabeled);
    const auto ece_start = Clock::now();
    const auto result = evaluate(big, 1.0, BinSpec{});
    const double ece_elapsed = seconds_since(ece_start);
    const bool ece_sane = result.ece >= 0.0 && result.ece <= 1.0;

    const auto dev = support::overconfident_set(10000, 3, 1.5, 2.0, 20260822);
    const auto fit_start = Clock::now();
    const auto fit = fit_temperature(dev, SearchGrid{}, Objective{ObjectiveKind::ece, BinSpec{}});
    const double fit_elapsed = seconds_since(fit_start);

    return {ece_sane && ece_elapsed < 1.0 && fit.curve.size() == 500 && fit_elapsed < 10.0,
            "ece(1M) " + fmt("%.2f", ece_elapsed) + "s, 500-point fit(10k) " +
                fmt("%.2f", fit_elapsed) + "s"};
}

bool dirs_match(const fs::path& a, const fs::path& b, std::string& detail) {
    std::vector<std::string> names_a, names_b;
    for (const auto& entry : fs::directory_iterator(a)) {
        names_a.push_back(entry.path().filename().string());
    }
    for (const auto& entry : fs::directory_iterator(b)) {
        names_b.push_back(entry.path().filename().string());
    }
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    if (names_a != names_b) {
        detail = "file lists differ under " + a.filename().string();
        return false;
    }
    for (const auto& name : names_a) {
        if (support::read_file(a / name) != support::read_file(b / name)) {
            detail = name + " differs";
            return false;
        }
    }
    return true;
}

// 9. Re-running every CLI command with identical inputs and flags yields
//    byte-identical output files (different --out directories).
Outcome criterion_cli_reproducible() {
    const auto in_dir = support::fresh_dir("accept_in");
    const auto four_path = (in_dir / "four.jsonl").string();
    write(four_path, support::four_outcome_set(), FileFormat::jsonl);
    const auto dev_path = (in_dir / "dev.jsonl").string();
    write(dev_path, support::overconfident_set(200, 3, 1.5, 2.5, 20260823), FileFormat::jsonl);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ece", "ece " + four_path + " jsonl"},
        {"reliability", "reliability " + four_path + " jsonl --bins 7 --scheme equal-mass"},
        {"fit-temp", "fit-temp " + dev_path +
                         " jsonl --grid-lo 0.5 --grid-hi 2 --grid-step 0.25 --eval " + four_path},
        {"benchmark", "benchmark --classes 3 --dim 4 --n 64 --shift 1.0 --seeds 1 2"},
    };

    for (const auto& [name, command] : commands) {
        const auto out_a = support::fresh_dir("accept_a");
        const auto out_b = support::fresh_dir("accept_b");
        const auto first = support::run_cli(command + " --out " + out_a.string());
        const auto second = support::run_cli(command + " --out " + out_b.string());
        if (first.exit_code != 0 || second.exit_code != 0) {
            return {false, name + " exited " + std::to_string(first.exit_code) + "/" +
                               std::to_string(second.exit_code)};
        }
        if (first.out != second.out) {
            return {false, name + " stdout differs"};
        }
        std::string detail;
        if (!dirs_match(out_a, out_b, detail)) {
            return {false, name + ": " + detail};
        }
    }
    return {true, "4 commands, all outputs byte-identical"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"ece matches a brute-force binning oracle", criterion_ece_oracle},
        {"label smoothing hits the three-class reference targets", criterion_smoothing_targets},
        {"analytic gradient matches central differences", criterion_gradient_check},
        {"temperature fit recovers a known inflation scale", criterion_fit_recovery},
        {"temperature rescaling never changes predictions", criterion_accuracy_invariance},
        {"entropy is nondecreasing along the temperature grid", criterion_entropy_monotone},
        {"benchmark trends hold across ten seeds", criterion_benchmark_trends},
        {"throughput bounds hold", criterion_throughput},
        {"repeated CLI runs are byte-identical", criterion_cli_reproducible},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = Clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = seconds_since(start);
        std::printf("[%s] criterion %zu: %s (%s) [%.2fs]\n", outcome.passed ? "PASS" : "FAIL",
                    i + 1, criteria[i].name, outcome.detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!outcome.passed) ++failures;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
