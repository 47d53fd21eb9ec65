#include "ushape/models.hpp"

#include <algorithm>
#include <stdexcept>

#include "ushape/error.hpp"
#include "ushape/parallel.hpp"

namespace ushape {

namespace presets {

namespace {
ModelSpec quadratic(std::string name, bool controls, std::optional<int> cap) {
    ModelSpec s;
    s.name = std::move(name);
    s.form = Form::quadratic;
    if (controls) s.controls.assign(kAllControls.begin(), kAllControls.end());
    s.age_cap = cap;
    return s;
}
}  // namespace

ModelSpec table1_model2() { return quadratic("table1_model2", true, 69); }
ModelSpec table1_model3() { return quadratic("table1_model3", false, 69); }
ModelSpec table1_model3_sex() {
    ModelSpec s = quadratic("table1_model3_sex", false, 69);
    s.controls = {Control::sex};
    return s;
}
ModelSpec table1_model4() { return quadratic("table1_model4", false, std::nullopt); }
ModelSpec table2() { return quadratic("table2", false, std::nullopt); }
ModelSpec baseline() { return quadratic("baseline", true, 69); }

ModelSpec ranges(AgeScheme scheme) {
    ModelSpec s;
    s.name = scheme == AgeScheme::coarse ? "table3" : "table4";
    s.form = Form::ranges;
    s.scheme = scheme;
    s.cohort_control = true;
    return s;
}
ModelSpec table3() { return ranges(AgeScheme::coarse); }
ModelSpec table4() { return ranges(AgeScheme::fine); }

}  // namespace presets

std::optional<ModelSpec> preset(std::string_view name) {
    if (name == "table1_model2") return presets::table1_model2();
    if (name == "table1_model3") return presets::table1_model3();
    if (name == "table1_model3_sex") return presets::table1_model3_sex();
    if (name == "table1_model4") return presets::table1_model4();
    if (name == "table2") return presets::table2();
    if (name == "baseline") return presets::baseline();
    if (name == "table3") return presets::table3();
    if (name == "table4") return presets::table4();
    return std::nullopt;
}

std::vector<std::string> preset_names() {
    return {"table1_model2", "table1_model3", "table1_model3_sex", "table1_model4",
            "table2",        "baseline",      "table3",            "table4"};
}

std::vector<TermSpec> terms_for(const ModelSpec& spec) {
    std::vector<TermSpec> terms{TermSpec::intercept()};
    if (spec.form == Form::quadratic) {
        terms.push_back(TermSpec::age());
        terms.push_back(TermSpec::age_squared());
    } else {
        terms.push_back(TermSpec::bins(spec.scheme));
    }
    terms.push_back(TermSpec::period());
    if (spec.cohort_control) terms.push_back(TermSpec::cohort(spec.cohort_width));
    for (Control c : spec.controls) {
        auto ref = spec.control_reference.find(c);
        terms.push_back(TermSpec::factor(c, ref == spec.control_reference.end() ? std::nullopt
                                                                                 : std::optional(ref->second)));
    }
    return terms;
}

ModelFit fit_design(const DesignMatrix& design, const ModelSpec& spec, std::string country) {
    ModelFit model;
    model.country = std::move(country);
    model.spec = spec;
    model.fit = fit_wls(design);
    model.column_means = design.weighted_column_means();
    model.blocks = design.blocks;
    model.dropped_levels = design.dropped_levels;
    model.warnings = design.warnings;
    return model;
}

ModelFit fit_spec(std::span<const SurveyRecord> records, const ModelSpec& spec, std::string_view country) {
    FilterSpec filter;
    filter.countries = std::set<std::string>{std::string(country)};
    filter.max_age = spec.age_cap;
    filter.listwise.insert(spec.controls.begin(), spec.controls.end());

    std::vector<SurveyRecord> sample;
    try {
        sample = apply_filter(records, filter);
    } catch (const EmptySampleError&) {
        throw EmptySampleError("no usable records for country '" + std::string(country) + "' under spec '" +
                               spec.name + "'");
    }

    const std::size_t rounds = distinct_rounds(sample);
    if (spec.cohort_control && rounds < 2)
        throw DataError("country '" + std::string(country) + "' has fewer than 2 survey rounds; period and cohort "
                        "effects cannot be separated");

    const auto terms = terms_for(spec);
    const DesignMatrix design = build_design(sample, terms);
    ModelFit model = fit_design(design, spec, std::string(country));
    model.rounds = rounds;
    if (rounds < 3)
        model.warnings.push_back("only " + std::to_string(rounds) +
                                 " distinct rounds; period controls give little leverage");
    return model;
}

double standardization_constant(const ModelFit& model) {
    double base = 0.0;
    for (const auto& block : model.blocks) {
        if (block.kind == TermKind::age_linear || block.kind == TermKind::age_squared ||
            block.kind == TermKind::age_bins)
            continue;
        for (Eigen::Index j = block.first_col; j < block.first_col + block.cols; ++j)
            base += model.fit.coefficients(j) * model.column_means(j);
    }
    return base;
}

std::vector<CurvePoint> predict_curve(const ModelFit& model, int first_age, int last_age) {
    const auto age = model.fit.index("age");
    const auto age_sq = model.fit.index("age_sq");
    if (!age || !age_sq) throw std::invalid_argument("predict_curve requires a quadratic fit (age and age_sq)");
    const double base = standardization_constant(model);
    const double b1 = model.fit.coefficients(*age);
    const double b2 = model.fit.coefficients(*age_sq);
    std::vector<CurvePoint> out;
    for (int a = first_age; a <= last_age; ++a) out.push_back({a, base + b1 * a + b2 * double(a) * a});
    return out;
}

std::optional<double> AgeCurve::level(std::string_view bin) const {
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i] == bin) return levels[i];
    return std::nullopt;
}

void AgeCurve::update_extrema() {
    if (levels.empty()) {
        max = min = depth = 0.0;
        return;
    }
    max = *std::max_element(levels.begin(), levels.end());
    min = *std::min_element(levels.begin(), levels.end());
    depth = max - min;
}

AgeCurve adjusted_curve(const ModelFit& model) {
    const TermBlock* bins = nullptr;
    for (const auto& b : model.blocks)
        if (b.kind == TermKind::age_bins) bins = &b;
    if (!bins) throw std::invalid_argument("adjusted means require an age-range fit");

    AgeCurve curve;
    curve.country = model.country;
    curve.scheme = model.spec.scheme;
    const double base = standardization_constant(model);
    for (const auto& label : age_bin_labels(model.spec.scheme)) {
        if (label == bins->reference) {
            curve.bins.push_back(label);
            curve.levels.push_back(base);
            continue;
        }
        auto it = std::find(bins->levels.begin(), bins->levels.end(), label);
        if (it == bins->levels.end()) {
            curve.warnings.push_back("age bin " + label + " has no observations; omitted");
            continue;
        }
        curve.bins.push_back(label);
        curve.levels.push_back(base + model.fit.coefficients(bins->first_col + (it - bins->levels.begin())));
    }
    curve.update_extrema();
    return curve;
}

AgeCurve adjusted_means(std::span<const SurveyRecord> records, std::string_view country, AgeScheme scheme) {
    ModelFit model = fit_spec(records, presets::ranges(scheme), country);
    AgeCurve curve = adjusted_curve(model);
    curve.warnings.insert(curve.warnings.begin(), model.warnings.begin(), model.warnings.end());
    return curve;
}

std::vector<BatchRow> batch_fit(std::span<const SurveyRecord> records, const ModelSpec& spec,
                                std::span<const std::string> countries, unsigned threads) {
    std::vector<BatchRow> rows(countries.size());
    parallel_for(countries.size(), threads, [&](std::size_t i) {
        rows[i].country = countries[i];
        try {
            rows[i].model = fit_spec(records, spec, countries[i]);
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    });
    return rows;
}

}  // namespace ushape
