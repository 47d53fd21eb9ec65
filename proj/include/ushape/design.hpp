#pragma once

// Labeled design matrices: intercept, raw age polynomial, age bins, period and
// cohort factors, and dummy-coded control factors.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ushape/dataset.hpp"

namespace ushape {

enum class AgeScheme { coarse, fine };

std::string_view to_string(AgeScheme scheme);
std::optional<AgeScheme> age_scheme_from_string(std::string_view name);

struct AgeBin {
    int first;
    std::optional<int> last;  // open-ended top bin when absent

    std::string label() const;
    double midpoint(int open_width = 10) const;
};

/// Bins of a scheme in ascending order. Coarse: 15-34, 35-59, 60-74, 75+.
/// Fine: ten-year bins from 15-24 up to 85+.
const std::vector<AgeBin>& age_bin_table(AgeScheme scheme);
std::vector<std::string> age_bin_labels(AgeScheme scheme);
std::string reference_age_bin(AgeScheme scheme);

/// Label of the bin holding `age`. Throws std::invalid_argument below 15.
std::string age_bin(int age, AgeScheme scheme);

// `covariate` marks numeric columns appended after construction; build_design never emits it.
enum class TermKind { intercept, age_linear, age_squared, age_bins, period_factor, cohort_factor, control_factor, covariate };

struct TermSpec {
    TermKind kind = TermKind::intercept;
    AgeScheme scheme = AgeScheme::coarse;
    int cohort_width = 5;
    Control control = Control::sex;
    std::optional<std::string> reference;

    static TermSpec make(TermKind k) {
        TermSpec t;
        t.kind = k;
        return t;
    }
    static TermSpec intercept() { return make(TermKind::intercept); }
    static TermSpec age() { return make(TermKind::age_linear); }
    static TermSpec age_squared() { return make(TermKind::age_squared); }
    static TermSpec bins(AgeScheme s, std::optional<std::string> ref = std::nullopt) {
        return {TermKind::age_bins, s, 5, Control::sex, std::move(ref)};
    }
    static TermSpec period(std::optional<std::string> ref = std::nullopt) {
        return {TermKind::period_factor, AgeScheme::coarse, 5, Control::sex, std::move(ref)};
    }
    static TermSpec cohort(int width = 5, std::optional<std::string> ref = std::nullopt) {
        return {TermKind::cohort_factor, AgeScheme::coarse, width, Control::sex, std::move(ref)};
    }
    static TermSpec factor(Control c, std::optional<std::string> ref = std::nullopt) {
        return {TermKind::control_factor, AgeScheme::coarse, 5, c, std::move(ref)};
    }

    std::string name() const;
};

struct DroppedLevel {
    std::string term;
    std::string level;
    std::string reason;
};

/// Columns contributed by one term, with the level each indicator stands for.
struct TermBlock {
    TermKind kind;
    std::string name;
    Eigen::Index first_col = 0;
    Eigen::Index cols = 0;
    std::vector<std::string> levels;  // one per column for factor terms
    std::string reference;            // empty for non-factor terms
};

struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> column_labels;
    Eigen::VectorXd row_weights;
    Eigen::VectorXd response;
    std::vector<DroppedLevel> dropped_levels;
    std::vector<TermBlock> blocks;
    std::vector<std::string> warnings;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    std::optional<Eigen::Index> column(std::string_view label) const;
    const TermBlock* block(TermKind kind) const;

    /// Column means under the row weights.
    Eigen::VectorXd weighted_column_means() const;

    /// Appends a numeric column (e.g. a simulated mediator) as its own block.
    void append_column(std::string label, const Eigen::VectorXd& column);
};

struct CategoricalColumns {
    Eigen::MatrixXd values;
    std::vector<std::string> labels;
    std::vector<std::string> levels;
    std::string reference;
    std::vector<DroppedLevel> dropped;
};

/// Indicator coding against a reference level over an explicit list of
/// declared levels. Levels with no observations are dropped and recorded.
/// Throws DataError if a value is undeclared or the reference is unobserved.
CategoricalColumns encode_levels(std::string_view term, std::span<const std::string> values,
                                 std::span<const std::string> declared, std::string_view reference,
                                 std::string_view label_prefix);

/// Dummy coding of a control variable. Every record must carry the variable.
CategoricalColumns encode_categorical(std::span<const SurveyRecord> records, Control variable,
                                      std::string_view reference);

/// Assembles terms in declared order. Records missing a control used by a term
/// are dropped listwise first. Response is happiness, row weights are design
/// weights, and age enters uncentered.
DesignMatrix build_design(std::span<const SurveyRecord> records, std::span<const TermSpec> terms);

}  // namespace ushape
