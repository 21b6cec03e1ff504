#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "calib/calib.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;

namespace {

// Usage errors exit 2; data errors (calib::Error) exit 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw calib::Error("cannot create output directory: " + out);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw calib::Error("cannot open file: " + path);
    return out;
}

void check_bins_flag(std::size_t bins) {
    if (bins < 1) throw UsageError("bins must be at least 1");
}

void check_temperature_flag(double t) {
    if (!(std::isfinite(t) && t > 0.0)) throw UsageError("temperature must be positive and finite");
}

struct EvalArgs {
    std::string in_path;
    std::string format;
    std::size_t bins = 10;
    std::string scheme = "equal-width";
    double temperature = 1.0;
    std::string out;
};

void run_eval_command(const EvalArgs& args, bool write_summary) {
    check_bins_flag(args.bins);
    check_temperature_flag(args.temperature);
    const calib::BinSpec spec{args.bins, calib::scheme_from_name(args.scheme)};

    nlohmann::json inputs;
    inputs[args.in_path] = tool::sha256_file(args.in_path);

    const auto set =
        calib::ingest(args.in_path, calib::format_from_name(args.format), calib::SplitTag::unlabeled);
    const auto result = calib::evaluate(set, args.temperature, spec);

    ensure_out_dir(args.out);
    {
        auto out = open_out(args.out + "/reliability.csv");
        calib::write_reliability_csv(out, result.table);
    }
    if (write_summary) {
        auto out = open_out(args.out + "/summary.csv");
        out << "n,k,scheme,temperature,accuracy,ece\n";
        out << set.size() << "," << args.bins << "," << args.scheme << ","
            << calib::fmt_fixed(args.temperature, 2) << "," << calib::fmt_roundtrip(result.accuracy)
            << "," << calib::fmt_roundtrip(result.ece) << "\n";
    }

    nlohmann::json parameters;
    parameters["input"] = args.in_path;
    parameters["format"] = args.format;
    parameters["bins"] = args.bins;
    parameters["scheme"] = args.scheme;
    parameters["temperature"] = args.temperature;
    tool::write_manifest(args.out, write_summary ? "ece" : "reliability", parameters, inputs);

    std::cout << "n=" << set.size() << " k=" << args.bins << " scheme=" << args.scheme
              << " T=" << calib::fmt_fixed(args.temperature, 2) << "\n";
    std::cout << "accuracy=" << calib::fmt_fixed(result.accuracy, 4) << "\n";
    std::cout << "ece=" << calib::fmt_fixed(result.ece, 4) << "\n";
}

struct FitArgs {
    std::string dev_path;
    std::string format;
    double grid_lo = 0.01;
    double grid_hi = 5.0;
    double grid_step = 0.01;
    std::string objective = "ece";
    std::size_t bins = 10;
    std::vector<std::string> eval_paths;
    std::string out;
};

void run_fit_temp(const FitArgs& args) {
    check_bins_flag(args.bins);
    const calib::SearchGrid grid{args.grid_lo, args.grid_hi, args.grid_step};
    if (!(std::isfinite(grid.lo) && std::isfinite(grid.hi) && std::isfinite(grid.step) &&
          grid.lo > 0.0 && grid.step > 0.0 && grid.lo <= grid.hi)) {
        throw UsageError("invalid grid");
    }

    nlohmann::json inputs;
    inputs[args.dev_path] = tool::sha256_file(args.dev_path);
    for (const auto& path : args.eval_paths) inputs[path] = tool::sha256_file(path);

    const auto format = calib::format_from_name(args.format);
    const auto dev = calib::ingest(args.dev_path, format, calib::SplitTag::in_domain_dev);
    const calib::Objective objective{calib::objective_from_name(args.objective),
                                     calib::BinSpec{args.bins, calib::BinScheme::equal_width}};
    const auto fit = calib::fit_temperature(dev, grid, objective);

    ensure_out_dir(args.out);
    {
        auto out = open_out(args.out + "/curve.csv");
        calib::write_curve_csv(out, fit);
    }

    nlohmann::json parameters;
    parameters["dev"] = args.dev_path;
    parameters["format"] = args.format;
    parameters["grid_lo"] = args.grid_lo;
    parameters["grid_hi"] = args.grid_hi;
    parameters["grid_step"] = args.grid_step;
    parameters["objective"] = args.objective;
    parameters["bins"] = args.bins;
    parameters["eval"] = args.eval_paths;
    tool::write_manifest(args.out, "fit-temp", parameters, inputs);

    std::cout << "T=" << calib::fmt_fixed(fit.temperature, 2) << "\n";
    std::cout << "dev_objective=" << calib::fmt_fixed(fit.objective_value, 4) << "\n";
    for (const auto& path : args.eval_paths) {
        const auto eval_set = calib::ingest(path, format, calib::SplitTag::unlabeled);
        const auto result = calib::evaluate(eval_set, fit.temperature, objective.bin_spec);
        std::cout << "eval " << path << ": accuracy=" << calib::fmt_fixed(result.accuracy, 4)
                  << " ece=" << calib::fmt_fixed(result.ece, 4) << "\n";
    }
}

struct BenchArgs {
    std::size_t classes = 3;
    std::size_t dim = 64;
    std::size_t n = 2000;
    double shift = 3.0;
    double alpha = 0.1;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out;
};

struct CellMetrics {
    double temperature = 1.0;
    double id_accuracy = 0.0;
    double id_ece = 0.0;
    double ood_accuracy = 0.0;
    double ood_ece = 0.0;
};

struct SeedRow {
    std::uint64_t seed = 0;
    // [model: mle, ls][calibration: out-of-the-box, temperature-scaled]
    std::array<std::array<CellMetrics, 2>, 2> cells;
};

constexpr std::array<const char*, 2> kModelNames = {"mle", "ls"};
constexpr std::array<const char*, 2> kCalibrationNames = {"out-of-the-box", "temperature-scaled"};

void print_summary_row(std::ostream& out, const std::string& seed_label, std::size_t model,
                       std::size_t cal, const CellMetrics& cell) {
    out << "seed=" << seed_label << " model=" << kModelNames[model]
        << " calibration=" << kCalibrationNames[cal]
        << " T=" << calib::fmt_fixed(cell.temperature, 2)
        << " id_accuracy=" << calib::fmt_fixed(cell.id_accuracy, 4)
        << " id_ece=" << calib::fmt_fixed(cell.id_ece, 4)
        << " ood_accuracy=" << calib::fmt_fixed(cell.ood_accuracy, 4)
        << " ood_ece=" << calib::fmt_fixed(cell.ood_ece, 4) << "\n";
}

void write_summary_cell(std::ostream& out, const std::string& seed_label, std::size_t model,
                        std::size_t cal, const CellMetrics& cell) {
    out << seed_label << "," << kModelNames[model] << "," << kCalibrationNames[cal] << ","
        << calib::fmt_fixed(cell.temperature, 2) << "," << calib::fmt_roundtrip(cell.id_accuracy)
        << "," << calib::fmt_roundtrip(cell.id_ece) << ","
        << calib::fmt_roundtrip(cell.ood_accuracy) << "," << calib::fmt_roundtrip(cell.ood_ece)
        << "\n";
}

void run_benchmark(const BenchArgs& args) {
    if (args.classes < 2) throw UsageError("classes must be at least 2");
    if (args.dim < 1) throw UsageError("dim must be at least 1");
    if (args.n < 10) throw UsageError("n must be at least 10");
    if (!(std::isfinite(args.shift) && args.shift >= 0.0)) {
        throw UsageError("shift must be nonnegative");
    }
    if (!(args.alpha >= 0.0 && args.alpha < 1.0)) throw UsageError("alpha must be in [0, 1)");
    if (args.seeds.empty()) throw UsageError("at least one seed required");

    ensure_out_dir(args.out);
    nlohmann::json parameters;
    parameters["classes"] = args.classes;
    parameters["dim"] = args.dim;
    parameters["n"] = args.n;
    parameters["shift"] = args.shift;
    parameters["alpha"] = args.alpha;
    parameters["seeds"] = args.seeds;
    tool::write_manifest(args.out, "benchmark", parameters, nlohmann::json::object());

    calib::BenchmarkPipelineConfig config;
    config.num_classes = args.classes;
    config.feature_dim = args.dim;
    config.n_per_split = args.n;
    config.shift_magnitude = args.shift;
    config.alpha = args.alpha;

    std::vector<SeedRow> rows;
    for (const std::uint64_t seed : args.seeds) {
        try {
            const auto run = calib::run_benchmark_seed(config, seed);

            SeedRow row;
            row.seed = seed;
            const std::array<const calib::BenchmarkModelRun*, 2> models = {&run.mle, &run.ls};
            for (std::size_t m = 0; m < 2; ++m) {
                for (std::size_t s = 0; s < calib::kBenchmarkSplitNames.size(); ++s) {
                    const std::string path = args.out + "/logits_seed" + std::to_string(seed) +
                                             "_" + kModelNames[m] + "_" +
                                             calib::kBenchmarkSplitNames[s] + ".jsonl";
                    calib::write(path, models[m]->predictions[s], calib::FileFormat::jsonl);
                }
                const double t = models[m]->fit.temperature;
                row.cells[m][0] =
                    CellMetrics{1.0, models[m]->id_oob.accuracy, models[m]->id_oob.ece,
                                models[m]->ood_oob.accuracy, models[m]->ood_oob.ece};
                row.cells[m][1] =
                    CellMetrics{t, models[m]->id_scaled.accuracy, models[m]->id_scaled.ece,
                                models[m]->ood_scaled.accuracy, models[m]->ood_scaled.ece};
            }
            rows.push_back(row);
        } catch (const calib::Error& e) {
            std::cerr << "seed " << seed << " failed: " << e.what() << "\n";
        }
    }
    if (rows.empty()) throw calib::Error("all seeds failed");

    std::array<std::array<CellMetrics, 2>, 2> means;
    for (std::size_t m = 0; m < 2; ++m) {
        for (std::size_t c = 0; c < 2; ++c) {
            CellMetrics sum;
            sum.temperature = 0.0;
            for (const auto& row : rows) {
                const auto& cell = row.cells[m][c];
                sum.temperature += cell.temperature;
                sum.id_accuracy += cell.id_accuracy;
                sum.id_ece += cell.id_ece;
                sum.ood_accuracy += cell.ood_accuracy;
                sum.ood_ece += cell.ood_ece;
            }
            const auto count = static_cast<double>(rows.size());
            means[m][c] = CellMetrics{sum.temperature / count, sum.id_accuracy / count,
                                      sum.id_ece / count, sum.ood_accuracy / count,
                                      sum.ood_ece / count};
        }
    }

    auto summary = open_out(args.out + "/summary.csv");
    summary << "seed,model,calibration,T,id_accuracy,id_ece,ood_accuracy,ood_ece\n";
    for (const auto& row : rows) {
        for (std::size_t m = 0; m < 2; ++m) {
            for (std::size_t c = 0; c < 2; ++c) {
                const std::string label = std::to_string(row.seed);
                write_summary_cell(summary, label, m, c, row.cells[m][c]);
                print_summary_row(std::cout, label, m, c, row.cells[m][c]);
            }
        }
    }
    for (std::size_t m = 0; m < 2; ++m) {
        for (std::size_t c = 0; c < 2; ++c) {
            write_summary_cell(summary, "mean", m, c, means[m][c]);
            print_summary_row(std::cout, "mean", m, c, means[m][c]);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibration toolkit for classifier prediction logs"};
    app.require_subcommand(1);

    const auto format_check = CLI::IsMember({"jsonl", "csv"});

    EvalArgs ece_args;
    auto* ece_cmd = app.add_subcommand("ece", "Accuracy, ECE, and reliability table for a log");
    ece_cmd->add_option("input", ece_args.in_path, "Prediction log")->required();
    ece_cmd->add_option("format", ece_args.format, "Input format")->required()->check(format_check);
    ece_cmd->add_option("--bins", ece_args.bins, "Number of confidence bins");
    ece_cmd->add_option("--scheme", ece_args.scheme, "Binning scheme")
        ->check(CLI::IsMember({"equal-width", "equal-mass"}));
    ece_cmd->add_option("--temperature", ece_args.temperature, "Temperature applied to logits");
    ece_cmd->add_option("--out", ece_args.out, "Output directory")->required();
    ece_cmd->callback([&] { run_eval_command(ece_args, true); });

    EvalArgs rel_args;
    auto* rel_cmd = app.add_subcommand("reliability", "Reliability diagram data for a log");
    rel_cmd->add_option("input", rel_args.in_path, "Prediction log")->required();
    rel_cmd->add_option("format", rel_args.format, "Input format")->required()->check(format_check);
    rel_cmd->add_option("--bins", rel_args.bins, "Number of confidence bins");
    rel_cmd->add_option("--scheme", rel_args.scheme, "Binning scheme")
        ->check(CLI::IsMember({"equal-width", "equal-mass"}));
    rel_cmd->add_option("--temperature", rel_args.temperature, "Temperature applied to logits");
    rel_cmd->add_option("--out", rel_args.out, "Output directory")->required();
    rel_cmd->callback([&] { run_eval_command(rel_args, false); });

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit-temp", "Fit a temperature on a development log");
    fit_cmd->add_option("dev", fit_args.dev_path, "Development prediction log")->required();
    fit_cmd->add_option("format", fit_args.format, "Input format")->required()->check(format_check);
    fit_cmd->add_option("--grid-lo", fit_args.grid_lo, "Grid lower bound");
    fit_cmd->add_option("--grid-hi", fit_args.grid_hi, "Grid upper bound");
    fit_cmd->add_option("--grid-step", fit_args.grid_step, "Grid step");
    fit_cmd->add_option("--objective", fit_args.objective, "Line-search objective")
        ->check(CLI::IsMember({"ece", "nll"}));
    fit_cmd->add_option("--bins", fit_args.bins, "Bins for the ece objective");
    fit_cmd->add_option("--eval", fit_args.eval_paths, "Logs to evaluate at the fitted T");
    fit_cmd->add_option("--out", fit_args.out, "Output directory")->required();
    fit_cmd->callback([&] { run_fit_temp(fit_args); });

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("benchmark", "Synthetic domain-shift benchmark");
    bench_cmd->add_option("--classes", bench_args.classes, "Number of classes");
    bench_cmd->add_option("--dim", bench_args.dim, "Feature dimension");
    bench_cmd->add_option("--n", bench_args.n, "Records per split");
    bench_cmd->add_option("--shift", bench_args.shift, "Shift magnitude");
    bench_cmd->add_option("--alpha", bench_args.alpha, "Label-smoothing alpha");
    bench_cmd->add_option("--seeds", bench_args.seeds, "Seeds, one benchmark run each");
    bench_cmd->add_option("--out", bench_args.out, "Output directory")->required();
    bench_cmd->callback([&] { run_benchmark(bench_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const calib::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
