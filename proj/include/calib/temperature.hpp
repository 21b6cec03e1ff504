#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <string_view>
#include <vector>

#include "calib/calibration.hpp"
#include "calib/error.hpp"
#include "calib/format.hpp"
#include "calib/numerics.hpp"
#include "calib/prediction_store.hpp"

namespace calib {

struct SearchGrid {
    double lo = 0.01;
    double hi = 5.0;
    double step = 0.01;
};

inline void check_grid(const SearchGrid& grid) {
    if (!(std::isfinite(grid.lo) && std::isfinite(grid.hi) && std::isfinite(grid.step))) {
        throw Error("invalid grid");
    }
    if (!(grid.lo > 0.0 && grid.step > 0.0 && grid.lo <= grid.hi)) throw Error("invalid grid");
}

// lo, lo+step, ... with hi force-included as the final point. Points that land
// on the two-decimal lattice are snapped to it, so the default grid consists
// of exact parses of its printed temperatures.
inline std::vector<double> grid_points(const SearchGrid& grid) {
    check_grid(grid);
    std::vector<double> points;
    for (std::size_t i = 0;; ++i) {
        if (i > 10'000'000) throw Error("grid too large");
        double t = grid.lo + static_cast<double>(i) * grid.step;
        const double snapped = std::round(t * 100.0) / 100.0;
        if (std::abs(snapped - t) < 1e-9) t = snapped;
        if (t >= grid.hi - 1e-12) break;
        points.push_back(t);
    }
    points.push_back(grid.hi);
    return points;
}

enum class ObjectiveKind { ece, nll };

inline std::string_view to_string(ObjectiveKind kind) {
    return kind == ObjectiveKind::ece ? "ece" : "nll";
}

inline ObjectiveKind objective_from_name(std::string_view name) {
    if (name == "ece") return ObjectiveKind::ece;
    if (name == "nll") return ObjectiveKind::nll;
    throw Error("unknown objective: " + std::string(name));
}

struct Objective {
    ObjectiveKind kind = ObjectiveKind::ece;
    BinSpec bin_spec;
};

// Mean NLL of the gold labels at temperature T, straight from the cached
// logits. Divide-first matches nll_from_logits bit for bit without the
// per-record allocations.
inline double mean_nll(const PredictionSet& set, double t) {
    check_temperature(t);
    double total = 0.0;
    for (const auto& record : set.records) {
        const double top = record.logits[argmax(record.logits)] / t;
        double sum = 0.0;
        for (const double z : record.logits) sum += std::exp(z / t - top);
        total += top + std::log(sum) - record.logits[record.gold_label] / t;
    }
    return total / static_cast<double>(set.size());
}

inline double rescale_evaluate(const PredictionSet& set, double t, const Objective& objective) {
    if (set.size() == 0) throw Error("empty dev set");
    if (objective.kind == ObjectiveKind::nll) return mean_nll(set, t);
    return evaluate(set, t, objective.bin_spec).ece;
}

struct CurvePoint {
    double temperature = 0.0;
    double value = 0.0;
};

struct TemperatureFit {
    double temperature = 0.0;
    double objective_value = 0.0;
    std::vector<CurvePoint> curve;
};

// Exhaustive scan of the grid; ties go to the smallest T.
inline TemperatureFit fit_temperature(const PredictionSet& dev, const SearchGrid& grid,
                                      const Objective& objective) {
    if (dev.size() == 0) throw Error("empty dev set");
    check_bin_spec(objective.bin_spec);
    const std::vector<double> points = grid_points(grid);

    TemperatureFit fit;
    fit.curve.reserve(points.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double value = rescale_evaluate(dev, points[i], objective);
        fit.curve.push_back(CurvePoint{points[i], value});
        if (value < fit.curve[best].value) best = i;
    }
    fit.temperature = fit.curve[best].temperature;
    fit.objective_value = fit.curve[best].value;
    return fit;
}

inline void write_curve_csv(std::ostream& out, const TemperatureFit& fit) {
    out << "temperature,objective\n";
    for (const auto& point : fit.curve) {
        out << fmt_fixed(point.temperature, 2) << "," << fmt_roundtrip(point.value) << "\n";
    }
}

}  // namespace calib
