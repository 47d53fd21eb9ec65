#include "ushape/shape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ushape {

std::string_view to_string(Rule rule) {
    switch (rule) {
        case Rule::quad_t15: return "quad_t15";
        case Rule::range_t1: return "range_t1";
        case Rule::curve_heuristic: return "curve_heuristic";
    }
    return "?";
}

std::optional<Rule> rule_from_string(std::string_view name) {
    for (Rule r : {Rule::quad_t15, Rule::range_t1, Rule::curve_heuristic})
        if (to_string(r) == name) return r;
    return std::nullopt;
}

double ShapeVerdict::value(std::string_view name) const {
    for (const auto& [k, v] : evidence)
        if (k == name) return v;
    throw std::out_of_range("verdict has no evidence field '" + std::string(name) + "'");
}

namespace {

bool quad_rule(double b_age, double t_age, double b_sq, double t_sq, double threshold) {
    return b_age < 0.0 && b_sq > 0.0 && std::abs(t_age) > threshold && std::abs(t_sq) > threshold;
}

bool range_rule(double b_young, double t_young, double b_old, double t_old, double threshold) {
    return b_young > 0.0 && b_old > 0.0 && std::abs(t_young) > threshold && std::abs(t_old) > threshold;
}

bool curve_rule(double min_in_interior, double rise, double epsilon) {
    return min_in_interior != 0.0 && rise >= epsilon;
}

}  // namespace

bool reevaluate(const ShapeVerdict& v) {
    switch (v.rule) {
        case Rule::quad_t15:
            return quad_rule(v.value("age"), v.value("t_age"), v.value("age_sq"), v.value("t_age_sq"),
                             v.value("threshold"));
        case Rule::range_t1:
            return range_rule(v.value("bin:15-34"), v.value("t:15-34"), v.value("bin:60-74"), v.value("t:60-74"),
                              v.value("threshold"));
        case Rule::curve_heuristic:
            return curve_rule(v.value("min_in_interior"), v.value("rise_after_min"), v.value("rise_epsilon"));
    }
    return false;
}

ShapeVerdict detect_quad(std::string country, const QuadEvidence& e, double threshold) {
    ShapeVerdict v;
    v.country = std::move(country);
    v.rule = Rule::quad_t15;
    v.evidence = {{"age", e.beta_age},  {"t_age", e.t_age},       {"age_sq", e.beta_sq},
                  {"t_age_sq", e.t_sq}, {"threshold", threshold}};
    v.is_ushape = quad_rule(e.beta_age, e.t_age, e.beta_sq, e.t_sq, threshold);
    if (!v.is_ushape) {
        std::vector<std::string> failed;
        if (!(e.beta_age < 0.0)) failed.push_back("age not negative");
        if (!(e.beta_sq > 0.0)) failed.push_back("age_sq not positive");
        if (!(std::abs(e.t_age) > threshold)) failed.push_back("t_age below threshold");
        if (!(std::abs(e.t_sq) > threshold)) failed.push_back("t_age_sq below threshold");
        for (std::size_t i = 0; i < failed.size(); ++i) v.note += (i ? "; " : "") + failed[i];
    }
    return v;
}

ShapeVerdict detect_quad(const ModelFit& model, double threshold) {
    const auto& f = model.fit;
    return detect_quad(model.country, {f.coefficient("age"), f.t_stat("age"), f.coefficient("age_sq"), f.t_stat("age_sq")},
                       threshold);
}

ShapeVerdict detect_ranges(std::string country, const RangeEvidence& e, double threshold) {
    ShapeVerdict v;
    v.country = std::move(country);
    v.rule = Rule::range_t1;
    v.evidence = {{"bin:15-34", e.beta_young}, {"t:15-34", e.t_young},    {"bin:60-74", e.beta_old},
                  {"t:60-74", e.t_old},        {"threshold", threshold}};
    v.is_ushape = range_rule(e.beta_young, e.t_young, e.beta_old, e.t_old, threshold);
    if (!v.is_ushape) {
        std::vector<std::string> failed;
        if (!(e.beta_young > 0.0)) failed.push_back("15-34 not positive");
        if (!(std::abs(e.t_young) > threshold)) failed.push_back("t(15-34) below threshold");
        if (!(e.beta_old > 0.0)) failed.push_back("60-74 not positive");
        if (!(std::abs(e.t_old) > threshold)) failed.push_back("t(60-74) below threshold");
        for (std::size_t i = 0; i < failed.size(); ++i) v.note += (i ? "; " : "") + failed[i];
    }
    return v;
}

ShapeVerdict detect_ranges(const ModelFit& model, double threshold) {
    if (model.spec.form != Form::ranges || model.spec.scheme != AgeScheme::coarse)
        throw std::invalid_argument("detect_ranges requires a coarse age-range fit");
    const auto& f = model.fit;
    return detect_ranges(model.country,
                         {f.coefficient("bin:15-34"), f.t_stat("bin:15-34"), f.coefficient("bin:60-74"),
                          f.t_stat("bin:60-74")},
                         threshold);
}

CoefficientReduction reduce(std::string label, double old_value, double new_value) {
    CoefficientReduction r;
    r.label = std::move(label);
    r.old_value = old_value;
    r.new_value = new_value;
    r.sign_flipped = (old_value > 0.0 && new_value < 0.0) || (old_value < 0.0 && new_value > 0.0);
    if (old_value != 0.0) r.percent = (1.0 - new_value / old_value) * 100.0;
    return r;
}

const CoefficientReduction& ReductionReport::at(std::string_view label) const {
    for (const auto& r : rows)
        if (r.label == label) return r;
    throw std::out_of_range("no reduction row '" + std::string(label) + "'");
}

ReductionReport reduction(const FitResult& old_fit, const FitResult& new_fit, const std::vector<std::string>& labels) {
    ReductionReport report;
    for (const auto& label : labels)
        report.rows.push_back(reduce(label, old_fit.coefficient(label), new_fit.coefficient(label)));
    return report;
}

DepthReport depth(const AgeCurve& curve) {
    if (curve.levels.size() < 2) throw std::invalid_argument("depth needs a curve with at least 2 bins");
    DepthReport d;
    d.max = *std::max_element(curve.levels.begin(), curve.levels.end());
    d.min = *std::min_element(curve.levels.begin(), curve.levels.end());
    d.difference = d.max - d.min;
    for (std::size_t i = 0; i < curve.levels.size(); ++i) {
        if (curve.levels[i] == d.max) d.max_bins.push_back(curve.bins[i]);
        if (curve.levels[i] == d.min) d.min_bins.push_back(curve.bins[i]);
    }
    return d;
}

ShapeVerdict classify_curve(const AgeCurve& curve, const CurveRule& rule) {
    ShapeVerdict v;
    v.country = curve.country;
    v.rule = Rule::curve_heuristic;
    if (curve.levels.empty()) {
        v.evidence = {{"min_in_interior", 0.0}, {"rise_after_min", 0.0}, {"rise_epsilon", rule.rise_epsilon}};
        v.note = "empty curve";
        return v;
    }
    const auto min_it = std::min_element(curve.levels.begin(), curve.levels.end());
    const auto min_idx = static_cast<std::size_t>(min_it - curve.levels.begin());
    const bool interior = std::find(rule.interior_bins.begin(), rule.interior_bins.end(), curve.bins[min_idx]) !=
                          rule.interior_bins.end();
    const double fall = curve.levels.front() - *min_it;
    const double later_max =
        min_idx + 1 < curve.levels.size() ? *std::max_element(min_it + 1, curve.levels.end()) : *min_it;
    const double rise = later_max - *min_it;

    v.evidence = {{"min_level", *min_it},
                  {"min_bin_index", static_cast<double>(min_idx)},
                  {"min_in_interior", interior ? 1.0 : 0.0},
                  {"fall_to_min", fall},
                  {"initial_fall", fall >= rule.rise_epsilon ? 1.0 : 0.0},
                  {"rise_after_min", rise},
                  {"rise_epsilon", rule.rise_epsilon}};
    v.is_ushape = curve_rule(interior ? 1.0 : 0.0, rise, rule.rise_epsilon);
    v.note = "minimum at " + curve.bins[min_idx];
    if (v.is_ushape && fall < rule.rise_epsilon) v.note += "; curve starts near its minimum";
    return v;
}

std::string summary_line(const std::vector<ShapeVerdict>& verdicts, Rule rule) {
    const auto k = std::count_if(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.is_ushape; });
    return std::to_string(k) + " of " + std::to_string(verdicts.size()) + " countries u-shaped under rule " +
           std::string(to_string(rule));
}

}  // namespace ushape
