#pragma once

// The model battery: named specifications, per-country fits, predicted
// quadratic curves, and period/cohort-standardized means by age bin.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ushape/dataset.hpp"
#include "ushape/design.hpp"
#include "ushape/wls.hpp"

namespace ushape {

enum class Form { quadratic, ranges };

struct ModelSpec {
    std::string name;
    Form form = Form::quadratic;
    AgeScheme scheme = AgeScheme::coarse;  // ranges form only
    std::vector<Control> controls;         // empty = controls off
    std::optional<int> age_cap;            // inclusive upper age
    bool cohort_control = false;
    int cohort_width = 5;
    std::map<Control, std::string> control_reference;

    bool controls_on() const { return !controls.empty(); }
};

namespace presets {
ModelSpec table1_model2();      // controls, age <= 69
ModelSpec table1_model3();      // no controls, age <= 69
ModelSpec table1_model3_sex();  // sex only, age <= 69
ModelSpec table1_model4();      // no controls, all ages
ModelSpec table2();             // = table1_model4, fitted per country
ModelSpec baseline();           // = table1_model2; reference for coefficient reductions
ModelSpec table3();             // coarse ranges, period + 5-year cohort
ModelSpec table4();             // fine ranges, period + 5-year cohort
ModelSpec ranges(AgeScheme scheme);
}  // namespace presets

/// Looks up a preset by name ("table2", "table1_model3", ...).
std::optional<ModelSpec> preset(std::string_view name);
std::vector<std::string> preset_names();

std::vector<TermSpec> terms_for(const ModelSpec& spec);

struct ModelFit {
    std::string country;
    ModelSpec spec;
    FitResult fit;
    Eigen::VectorXd column_means;  // weighted, one per design column
    std::vector<TermBlock> blocks;
    std::vector<DroppedLevel> dropped_levels;
    std::vector<std::string> warnings;
    std::size_t rounds = 0;
};

/// Filters to one country (age cap, listwise deletion on the spec's controls),
/// builds the design and fits it.
ModelFit fit_spec(std::span<const SurveyRecord> records, const ModelSpec& spec, std::string_view country);

/// Fit on a prepared design; used when extra covariates are appended.
ModelFit fit_design(const DesignMatrix& design, const ModelSpec& spec, std::string country);

struct CurvePoint {
    int age;
    double value;
};

/// Quadratic curve with every non-age term held at its weighted sample mean.
/// Throws std::invalid_argument for a fit without age and age_sq columns.
std::vector<CurvePoint> predict_curve(const ModelFit& model, int first_age, int last_age);

/// Standardization constant shared by all ages/bins: sum of coefficient x
/// weighted mean over every column outside the age terms (intercept included).
double standardization_constant(const ModelFit& model);

struct AgeCurve {
    std::string country;
    AgeScheme scheme = AgeScheme::fine;
    std::vector<std::string> bins;
    std::vector<double> levels;
    double max = 0.0;
    double min = 0.0;
    double depth = 0.0;
    std::vector<std::string> warnings;

    std::optional<double> level(std::string_view bin) const;
    void update_extrema();
};

/// Adjusted level per bin: standardization constant + bin coefficient
/// (reference bin = 0). Bins absent from the data are omitted with a warning.
AgeCurve adjusted_curve(const ModelFit& ranges_fit);
AgeCurve adjusted_means(std::span<const SurveyRecord> records, std::string_view country, AgeScheme scheme);

struct BatchRow {
    std::string country;
    std::optional<ModelFit> model;
    std::string error;

    bool ok() const { return model.has_value(); }
};

/// One row per requested country, in input order. Failures are captured per row.
std::vector<BatchRow> batch_fit(std::span<const SurveyRecord> records, const ModelSpec& spec,
                                std::span<const std::string> countries, unsigned threads = 0);

}  // namespace ushape
