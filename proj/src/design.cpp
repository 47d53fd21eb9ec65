#include "ushape/design.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "ushape/error.hpp"

namespace ushape {

std::string_view to_string(AgeScheme scheme) { return scheme == AgeScheme::coarse ? "coarse" : "fine"; }

std::optional<AgeScheme> age_scheme_from_string(std::string_view name) {
    if (name == "coarse") return AgeScheme::coarse;
    if (name == "fine") return AgeScheme::fine;
    return std::nullopt;
}

std::string AgeBin::label() const {
    return last ? std::to_string(first) + "-" + std::to_string(*last) : std::to_string(first) + "+";
}

double AgeBin::midpoint(int open_width) const {
    const int hi = last ? *last : first + open_width - 1;
    return 0.5 * (first + hi + 1);
}

const std::vector<AgeBin>& age_bin_table(AgeScheme scheme) {
    static const std::vector<AgeBin> coarse{{15, 34}, {35, 59}, {60, 74}, {75, std::nullopt}};
    static const std::vector<AgeBin> fine{{15, 24}, {25, 34}, {35, 44}, {45, 54},
                                          {55, 64}, {65, 74}, {75, 84}, {85, std::nullopt}};
    return scheme == AgeScheme::coarse ? coarse : fine;
}

std::vector<std::string> age_bin_labels(AgeScheme scheme) {
    std::vector<std::string> out;
    for (const auto& b : age_bin_table(scheme)) out.push_back(b.label());
    return out;
}

std::string reference_age_bin(AgeScheme scheme) { return scheme == AgeScheme::coarse ? "35-59" : "35-44"; }

std::string age_bin(int age, AgeScheme scheme) {
    if (age < kMinSurveyAge) throw std::invalid_argument("age " + std::to_string(age) + " is below 15");
    for (const auto& b : age_bin_table(scheme))
        if (age >= b.first && (!b.last || age <= *b.last)) return b.label();
    throw std::logic_error("age bin table does not cover age");
}

std::string TermSpec::name() const {
    switch (kind) {
        case TermKind::intercept: return "intercept";
        case TermKind::age_linear: return "age";
        case TermKind::age_squared: return "age_sq";
        case TermKind::age_bins: return "age_bins(" + std::string(to_string(scheme)) + ")";
        case TermKind::period_factor: return "period";
        case TermKind::cohort_factor: return "cohort(" + std::to_string(cohort_width) + ")";
        case TermKind::control_factor: return std::string(to_string(control));
        case TermKind::covariate: return "covariate";
    }
    return "?";
}

std::optional<Eigen::Index> DesignMatrix::column(std::string_view label) const {
    for (std::size_t j = 0; j < column_labels.size(); ++j)
        if (column_labels[j] == label) return static_cast<Eigen::Index>(j);
    return std::nullopt;
}

const TermBlock* DesignMatrix::block(TermKind kind) const {
    for (const auto& b : blocks)
        if (b.kind == kind) return &b;
    return nullptr;
}

Eigen::VectorXd DesignMatrix::weighted_column_means() const {
    return (values.transpose() * row_weights) / row_weights.sum();
}

void DesignMatrix::append_column(std::string label, const Eigen::VectorXd& column) {
    if (column.size() != rows()) throw std::invalid_argument("appended column has wrong length");
    if (this->column(label)) throw std::invalid_argument("duplicate column label '" + label + "'");
    const Eigen::Index j = cols();
    values.conservativeResize(Eigen::NoChange, j + 1);
    values.col(j) = column;
    blocks.push_back({TermKind::covariate, label, j, 1, {}, {}});
    column_labels.push_back(std::move(label));
}

CategoricalColumns encode_levels(std::string_view term, std::span<const std::string> values,
                                 std::span<const std::string> declared, std::string_view reference,
                                 std::string_view label_prefix) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : values) {
        if (std::find(declared.begin(), declared.end(), v) == declared.end())
            throw DataError(std::string(term) + ": value '" + v + "' is not a declared level");
        ++counts[v];
    }
    if (std::find(declared.begin(), declared.end(), reference) == declared.end())
        throw DataError(std::string(term) + ": reference '" + std::string(reference) + "' is not a declared level");
    if (!counts.count(std::string(reference)))
        throw DataError(std::string(term) + ": reference level '" + std::string(reference) + "' has no observations");

    CategoricalColumns out;
    out.reference = std::string(reference);
    for (const auto& level : declared) {
        if (level == reference) continue;
        if (!counts.count(level)) {
            out.dropped.push_back({std::string(term), level, "no observations"});
            continue;
        }
        out.levels.push_back(level);
        out.labels.push_back(std::string(label_prefix) + level);
    }
    const auto n = static_cast<Eigen::Index>(values.size());
    out.values = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(out.levels.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        auto it = std::find(out.levels.begin(), out.levels.end(), values[static_cast<std::size_t>(i)]);
        if (it != out.levels.end()) out.values(i, it - out.levels.begin()) = 1.0;
    }
    return out;
}

CategoricalColumns encode_categorical(std::span<const SurveyRecord> records, Control variable,
                                      std::string_view reference) {
    std::vector<std::string> values;
    values.reserve(records.size());
    for (const auto& r : records) {
        const auto& v = r.control(variable);
        if (!v) throw DataError(std::string(to_string(variable)) + ": missing value (apply listwise deletion first)");
        values.push_back(*v);
    }
    const auto& declared = declared_levels(variable);
    return encode_levels(to_string(variable), values, declared, reference,
                         std::string(to_string(variable)) + "=");
}

namespace {

void check_terms(std::span<const TermSpec> terms) {
    std::set<std::string> seen;
    int intercepts = 0;
    bool linear = false;
    bool bins = false;
    for (const auto& t : terms) {
        const std::string key = t.kind == TermKind::control_factor ? t.name() : std::to_string(static_cast<int>(t.kind));
        if (!seen.insert(key).second) throw DataError("duplicate term '" + t.name() + "'");
        intercepts += t.kind == TermKind::intercept;
        linear |= t.kind == TermKind::age_linear;
        bins |= t.kind == TermKind::age_bins;
    }
    if (intercepts != 1) throw DataError("a model needs exactly one intercept term");
    if (linear && bins) throw DataError("age_linear and age_bins cannot appear in the same model");
}

std::string modal_level(std::span<const std::string> values, std::span<const std::string> order) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : values) ++counts[v];
    std::string best;
    std::size_t best_count = 0;
    for (const auto& level : order) {
        auto it = counts.find(level);
        if (it != counts.end() && it->second > best_count) {
            best = level;
            best_count = it->second;
        }
    }
    return best;
}

}  // namespace

DesignMatrix build_design(std::span<const SurveyRecord> records, std::span<const TermSpec> terms) {
    check_terms(terms);

    std::vector<const SurveyRecord*> rows;
    rows.reserve(records.size());
    std::size_t deleted = 0;
    for (const auto& r : records) {
        bool complete = true;
        for (const auto& t : terms)
            if (t.kind == TermKind::control_factor && !r.control(t.control)) complete = false;
        if (complete)
            rows.push_back(&r);
        else
            ++deleted;
    }
    if (rows.empty()) throw EmptySampleError("no records left after listwise deletion");

    DesignMatrix dm;
    if (deleted > 0) dm.warnings.push_back(std::to_string(deleted) + " records removed by listwise deletion");

    const auto n = static_cast<Eigen::Index>(rows.size());
    dm.response.resize(n);
    dm.row_weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dm.response(i) = rows[static_cast<std::size_t>(i)]->happiness;
        dm.row_weights(i) = rows[static_cast<std::size_t>(i)]->weight;
    }

    std::vector<Eigen::VectorXd> columns;
    auto add_block = [&](TermKind kind, std::string name, std::vector<std::string> labels,
                         std::vector<std::string> levels, std::string reference, const Eigen::MatrixXd& values) {
        TermBlock block{kind, std::move(name), static_cast<Eigen::Index>(dm.column_labels.size()),
                        static_cast<Eigen::Index>(labels.size()), std::move(levels), std::move(reference)};
        for (Eigen::Index j = 0; j < values.cols(); ++j) columns.push_back(values.col(j));
        for (auto& l : labels) dm.column_labels.push_back(std::move(l));
        dm.blocks.push_back(std::move(block));
    };
    auto add_factor = [&](const TermSpec& t, CategoricalColumns enc) {
        if (enc.labels.empty())
            dm.warnings.push_back(t.name() + " has a single observed level; no columns added");
        for (auto& d : enc.dropped) dm.dropped_levels.push_back(std::move(d));
        add_block(t.kind, t.name(), std::move(enc.labels), std::move(enc.levels), std::move(enc.reference),
                  enc.values);
    };

    for (const auto& t : terms) {
        switch (t.kind) {
            case TermKind::intercept:
                add_block(t.kind, "intercept", {"intercept"}, {}, {}, Eigen::VectorXd::Ones(n));
                break;
            case TermKind::age_linear:
            case TermKind::age_squared: {
                Eigen::VectorXd col(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double a = rows[static_cast<std::size_t>(i)]->age;
                    col(i) = t.kind == TermKind::age_linear ? a : a * a;
                }
                add_block(t.kind, t.name(), {t.name()}, {}, {}, col);
                break;
            }
            case TermKind::age_bins: {
                std::vector<std::string> values;
                for (const auto* r : rows) values.push_back(age_bin(r->age, t.scheme));
                const auto declared = age_bin_labels(t.scheme);
                add_factor(t, encode_levels(t.name(), values, declared, t.reference.value_or(reference_age_bin(t.scheme)),
                                            "bin:"));
                break;
            }
            case TermKind::period_factor: {
                std::vector<std::string> values;
                std::set<int> years;
                for (const auto* r : rows) {
                    values.push_back(std::to_string(r->period_year));
                    years.insert(r->period_year);
                }
                std::vector<std::string> declared;
                for (int y : years) declared.push_back(std::to_string(y));
                add_factor(t, encode_levels(t.name(), values, declared, t.reference.value_or(declared.front()), "period:"));
                break;
            }
            case TermKind::cohort_factor: {
                std::vector<std::string> values;
                int lo = std::numeric_limits<int>::max();
                int hi = std::numeric_limits<int>::min();
                for (const auto* r : rows) {
                    const CohortBin bin = cohort_bin(r->birth_year, t.cohort_width);
                    values.push_back(bin.label());
                    lo = std::min(lo, bin.first);
                    hi = std::max(hi, bin.first);
                }
                std::vector<std::string> declared;
                for (int first = lo; first <= hi; first += t.cohort_width)
                    declared.push_back(CohortBin{first, first + t.cohort_width - 1}.label());
                const std::string ref = t.reference.value_or(modal_level(values, declared));
                add_factor(t, encode_levels(t.name(), values, declared, ref, "cohort:"));
                break;
            }
            case TermKind::control_factor: {
                std::vector<SurveyRecord> subset;
                subset.reserve(rows.size());
                for (const auto* r : rows) subset.push_back(*r);
                add_factor(t, encode_categorical(subset, t.control,
                                                 t.reference.value_or(declared_levels(t.control).front())));
                break;
            }
            case TermKind::covariate:
                throw DataError("covariate columns are appended to a built design, not declared as terms");
        }
    }

    dm.values.resize(n, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) dm.values.col(static_cast<Eigen::Index>(j)) = columns[j];
    return dm;
}

}  // namespace ushape
