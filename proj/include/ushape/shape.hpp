#pragma once

// U-shape detection rules, coefficient-reduction metrics and curve depth.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ushape/models.hpp"

namespace ushape {

enum class Rule { quad_t15, range_t1, curve_heuristic };

std::string_view to_string(Rule rule);
std::optional<Rule> rule_from_string(std::string_view name);

struct ShapeVerdict {
    std::string country;
    Rule rule = Rule::quad_t15;
    bool is_ushape = false;
    std::vector<std::pair<std::string, double>> evidence;
    std::string note;

    /// Throws std::out_of_range for an unknown name.
    double value(std::string_view name) const;
};

/// Recomputes the verdict from its evidence fields alone.
bool reevaluate(const ShapeVerdict& verdict);

struct QuadEvidence {
    double beta_age;
    double t_age;
    double beta_sq;
    double t_sq;
};

inline constexpr double kQuadThreshold = 1.5;
inline constexpr double kRangeThreshold = 1.0;

/// U-shape iff age < 0, age_sq > 0 and both |t| exceed the threshold.
ShapeVerdict detect_quad(std::string country, const QuadEvidence& e, double threshold = kQuadThreshold);
ShapeVerdict detect_quad(const ModelFit& model, double threshold = kQuadThreshold);

struct RangeEvidence {
    double beta_young;  // 15-34 vs 35-59
    double t_young;
    double beta_old;  // 60-74 vs 35-59
    double t_old;
};

/// U-shape iff both the 15-34 and 60-74 contrasts are positive with |t| above the threshold.
ShapeVerdict detect_ranges(std::string country, const RangeEvidence& e, double threshold = kRangeThreshold);
ShapeVerdict detect_ranges(const ModelFit& model, double threshold = kRangeThreshold);

struct CoefficientReduction {
    std::string label;
    double old_value = 0.0;
    double new_value = 0.0;
    std::optional<double> percent;  // undefined when old_value == 0
    bool sign_flipped = false;
};

/// Percent reduction (1 - new/old) * 100. Exceeds 100 exactly when the sign flips.
CoefficientReduction reduce(std::string label, double old_value, double new_value);

struct ReductionReport {
    std::vector<CoefficientReduction> rows;

    const CoefficientReduction& at(std::string_view label) const;
};

ReductionReport reduction(const FitResult& old_fit, const FitResult& new_fit, const std::vector<std::string>& labels);

struct DepthReport {
    double max = 0.0;
    double min = 0.0;
    double difference = 0.0;
    std::vector<std::string> max_bins;
    std::vector<std::string> min_bins;
};

/// Throws std::invalid_argument when the curve has fewer than 2 bins.
DepthReport depth(const AgeCurve& curve);

struct CurveRule {
    std::vector<std::string> interior_bins{"35-44", "45-54", "55-64"};
    double rise_epsilon = 0.10;
};

/// Heuristic for fine curves: the minimum sits in an interior mid-life bin and
/// the curve climbs at least rise_epsilon from it to the highest later bin.
ShapeVerdict classify_curve(const AgeCurve& curve, const CurveRule& rule = {});

/// "k of m countries u-shaped under rule R"
std::string summary_line(const std::vector<ShapeVerdict>& verdicts, Rule rule);

}  // namespace ushape
