#include "ushape/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "ushape/csv.hpp"
#include "ushape/design.hpp"
#include "ushape/error.hpp"
#include "ushape/models.hpp"
#include "ushape/parallel.hpp"
#include "ushape/wls.hpp"

namespace ushape {

std::string_view to_string(AgeShape shape) {
    switch (shape) {
        case AgeShape::flat: return "flat";
        case AgeShape::quadratic: return "quadratic";
        case AgeShape::cubic: return "cubic";
    }
    return "?";
}

std::optional<AgeShape> age_shape_from_string(std::string_view name) {
    for (AgeShape s : {AgeShape::flat, AgeShape::quadratic, AgeShape::cubic})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

double TrueAgeFunction::operator()(double age) const {
    switch (shape) {
        case AgeShape::flat: return intercept;
        case AgeShape::quadratic: return intercept + b1 * age + b2 * age * age;
        case AgeShape::cubic: return intercept + b1 * age + b2 * age * age + b3 * age * age * age;
    }
    return intercept;
}

void DgpConfig::validate() const {
    std::vector<std::string> errors;
    if (n < 1) errors.push_back("n must be >= 1");
    if (age_min < kMinSurveyAge) errors.push_back("age_min must be >= 15");
    if (age_max < age_min) errors.push_back("age_max must be >= age_min");
    if (first_round < 1 || last_round < first_round) errors.push_back("rounds must satisfy 1 <= first_round <= last_round");
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) errors.push_back("noise_sd must be > 0");
    if (cohort_width < 1) errors.push_back("cohort_width must be >= 1");
    if (mediator && (!(mediator->noise_sd >= 0.0) || !std::isfinite(mediator->noise_sd)))
        errors.push_back("mediator noise_sd must be >= 0");
    if (attrition && !(attrition->strength >= 0.0 && attrition->strength <= 1.0))
        errors.push_back("attrition strength must lie in [0, 1]");
    if (!errors.empty()) {
        std::string what = "invalid DGP config:";
        for (const auto& e : errors) what += "\n  - " + e;
        throw DataError(what);
    }
}

double DgpConfig::latent_sd() const {
    const double med = mediator ? mediator->effect * mediator->noise_sd : 0.0;
    return std::sqrt(noise_sd * noise_sd + med * med);
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate) {
    std::uint64_t z = master + (static_cast<std::uint64_t>(replicate) + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double attrition_mean_shift(double strength, double sigma) {
    return 2.0 * strength * sigma / ((2.0 - strength) * std::sqrt(2.0 * std::numbers::pi));
}

GeneratedSample generate(const DgpConfig& config) {
    config.validate();
    std::mt19937_64 engine(config.seed);
    std::uniform_int_distribution<int> age_dist(config.age_min, config.age_max);
    std::uniform_int_distribution<int> round_dist(config.first_round, config.last_round);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    GeneratedSample out;
    out.records.reserve(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        const int age = age_dist(engine);
        const int round = round_dist(engine);
        const double noise = config.noise_sd * normal(engine);
        const double mediator_noise = normal(engine);
        const double u = uniform(engine);

        SurveyRecord rec;
        rec.country = config.country;
        rec.round = round;
        rec.period_year = config.waves.year(round);
        rec.age = age;
        rec.birth_year = rec.period_year - age;
        rec.weight = 1.0;

        double structural = config.truth(age);
        if (auto it = config.cohort_effect.find(cohort_bin(rec.birth_year, config.cohort_width).first);
            it != config.cohort_effect.end())
            structural += it->second;
        if (auto it = config.period_effect.find(round); it != config.period_effect.end()) structural += it->second;

        double latent_noise = noise;
        double mediator = 0.0;
        if (config.mediator) {
            const auto& m = *config.mediator;
            mediator = m.age_slope * age + m.noise_sd * mediator_noise;
            structural += m.direct * age + m.effect * m.age_slope * age;
            latent_noise += m.effect * m.noise_sd * mediator_noise;
        }
        const double latent = structural + latent_noise;

        if (config.attrition && age >= config.attrition->knee && latent_noise < 0.0 &&
            u < config.attrition->strength) {
            ++out.attrited;
            continue;
        }

        rec.happiness = config.clamp ? std::clamp(std::round(latent), 0.0, 10.0) : latent;
        out.records.push_back(std::move(rec));
        out.mediator.push_back(mediator);
        out.structural.push_back(structural);
    }
    return out;
}

DgpConfig default_mediator_config() {
    DgpConfig c;
    c.truth = {AgeShape::flat, 6.0};
    c.mediator = MediatorConfig{};
    return c;
}

DgpConfig default_truncation_config() {
    // Cubic with turning points at 45 (minimum) and 80 (late-life peak):
    // derivative -k (age - 45) (age - 80) with k = 5e-5.
    DgpConfig c;
    constexpr double k = 5e-5;
    c.truth = {AgeShape::cubic, 10.3, -k * 45.0 * 80.0, k * (45.0 + 80.0) / 2.0, -k / 3.0};
    return c;
}

DgpConfig default_attrition_config() {
    // Concave truth peaking in the late 30s and declining through old age.
    DgpConfig c;
    c.truth = {AgeShape::quadratic, 6.5, 0.03, -0.0004, 0.0};
    c.attrition = AttritionConfig{};
    return c;
}

bool SimResult::passed() const {
    return std::all_of(hypotheses.begin(), hypotheses.end(), [](const auto& h) { return h.passed; });
}

double SimResult::mc_standard_error(Eigen::Index column) const {
    return sd(column) / std::sqrt(static_cast<double>(std::max<std::size_t>(reps(), 1)));
}

Eigen::Index SimResult::column(std::string_view name) const {
    for (std::size_t i = 0; i < estimate_names.size(); ++i)
        if (estimate_names[i] == name) return static_cast<Eigen::Index>(i);
    throw std::out_of_range("no estimate '" + std::string(name) + "'");
}

namespace {

template <typename PerReplicate>
SimResult run_replicates(std::string experiment, const DgpConfig& config, const ExperimentOptions& options,
                         std::vector<std::string> names, PerReplicate&& per_replicate) {
    config.validate();
    if (options.reps < 2) throw DataError("experiments need at least 2 replicates");
    SimResult result;
    result.experiment = std::move(experiment);
    result.estimate_names = std::move(names);
    const auto k = static_cast<Eigen::Index>(result.estimate_names.size());
    result.estimates.resize(static_cast<Eigen::Index>(options.reps), k);
    result.seeds.resize(options.reps);
    for (std::size_t r = 0; r < options.reps; ++r) result.seeds[r] = replicate_seed(config.seed, r);

    parallel_for(options.reps, options.threads, [&](std::size_t r) {
        DgpConfig rep = config;
        rep.seed = result.seeds[r];
        const Eigen::VectorXd row = per_replicate(rep);
        result.estimates.row(static_cast<Eigen::Index>(r)) = row.transpose();
    });

    result.mean = result.estimates.colwise().mean().transpose();
    result.sd.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::ArrayXd centered = result.estimates.col(j).array() - result.mean(j);
        result.sd(j) = std::sqrt(centered.square().sum() / static_cast<double>(options.reps - 1));
    }
    return result;
}

Hypothesis centered_on(const SimResult& r, std::string name, Eigen::Index column, double target) {
    Hypothesis h;
    h.name = std::move(name);
    h.observed = r.mean(column);
    h.target = target;
    h.tolerance = 3.0 * r.mc_standard_error(column);
    h.passed = std::abs(h.observed - target) <= h.tolerance + 1e-12;
    h.detail = fmt::format("mean {:.5f} vs target {:.5f} (3 MC SE = {:.5f})", h.observed, target, h.tolerance);
    return h;
}

Hypothesis fraction_at_least(std::string name, double fraction, double required, std::size_t reps) {
    Hypothesis h;
    h.name = std::move(name);
    h.observed = fraction;
    h.target = required;
    h.tolerance = 0.0;
    h.passed = fraction >= required;
    h.detail = fmt::format("{:.1f}% of {} replicates (required >= {:.0f}%)", 100.0 * fraction, reps, 100.0 * required);
    return h;
}

std::vector<TermSpec> linear_terms() { return {TermSpec::intercept(), TermSpec::age(), TermSpec::period()}; }
std::vector<TermSpec> quadratic_terms() {
    return {TermSpec::intercept(), TermSpec::age(), TermSpec::age_squared(), TermSpec::period()};
}

}  // namespace

SimResult experiment_mediator(const DgpConfig& config, const ExperimentOptions& options) {
    if (!config.mediator) throw DataError("mediator experiment needs a mediator in the DGP");
    if (config.truth.shape != AgeShape::flat)
        throw DataError("mediator experiment needs a flat age function so the targets are scalar slopes");
    if (!config.cohort_effect.empty()) throw DataError("mediator experiment assumes no cohort effects");

    const auto terms = linear_terms();
    SimResult result = run_replicates(
        "mediator", config, options, {"age_no_controls", "age_with_mediator"}, [&](const DgpConfig& rep) {
            const GeneratedSample sample = generate(rep);
            DesignMatrix design = build_design(sample.records, terms);
            const FitResult total = fit_wls(design);
            design.append_column("mediator", Eigen::Map<const Eigen::VectorXd>(
                                                 sample.mediator.data(), static_cast<Eigen::Index>(sample.mediator.size())));
            const FitResult direct = fit_wls(design);
            Eigen::VectorXd row(2);
            row << total.coefficient("age"), direct.coefficient("age");
            return row;
        });

    const double total_target = config.mediator->total_effect();
    const double direct_target = config.mediator->direct;
    result.targets = {{"total_effect", total_target}, {"direct_effect", direct_target}};
    result.hypotheses.push_back(centered_on(result, "no-controls estimate centers on the total effect", 0, total_target));
    result.hypotheses.push_back(
        centered_on(result, "mediator-controlled estimate centers on the direct effect", 1, direct_target));
    return result;
}

SimResult experiment_truncation(const DgpConfig& config, const ExperimentOptions& options) {
    const auto terms = quadratic_terms();
    const int cap = options.age_cap;
    SimResult result = run_replicates(
        "truncation", config, options, {"age_full", "age_capped", "age_sq_full", "age_sq_capped"},
        [&](const DgpConfig& rep) {
            const GeneratedSample sample = generate(rep);
            std::vector<SurveyRecord> capped;
            for (const auto& r : sample.records)
                if (r.age <= cap) capped.push_back(r);
            const FitResult full = fit_wls(build_design(sample.records, terms));
            const FitResult trunc = fit_wls(build_design(capped, terms));
            Eigen::VectorXd row(4);
            row << full.coefficient("age"), trunc.coefficient("age"), full.coefficient("age_sq"),
                trunc.coefficient("age_sq");
            return row;
        });

    const auto& e = result.estimates;
    const auto reps = static_cast<double>(result.reps());
    const double sq_larger = (e.col(3).array() > e.col(2).array()).cast<double>().sum() / reps;
    const double both = ((e.col(3).array() > e.col(2).array()) && (e.col(1).array() < e.col(0).array()))
                            .cast<double>()
                            .sum() /
                        reps;
    result.targets = {{"fraction_capped_sq_larger", sq_larger}, {"fraction_capped_sq_larger_and_age_lower", both}};

    switch (config.truth.shape) {
        case AgeShape::cubic:
            result.hypotheses.push_back(
                fraction_at_least("capped age_sq exceeds full-range age_sq", sq_larger, 0.95, result.reps()));
            break;
        case AgeShape::quadratic: {
            // Difference of the two curvature estimates, per replicate.
            SimResult diff = result;
            diff.estimates.conservativeResize(Eigen::NoChange, 5);
            diff.estimates.col(4) = e.col(3) - e.col(2);
            const Eigen::ArrayXd d = diff.estimates.col(4).array();
            diff.mean.conservativeResize(5);
            diff.sd.conservativeResize(5);
            diff.mean(4) = d.mean();
            diff.sd(4) = std::sqrt((d - d.mean()).square().sum() / (reps - 1.0));
            result.targets.emplace_back("age_sq_true", config.truth.b2);
            result.hypotheses.push_back(centered_on(diff, "capped and full-range age_sq agree", 4, 0.0));
            break;
        }
        case AgeShape::flat:
            result.targets.emplace_back("age_sq_true", 0.0);
            result.hypotheses.push_back(centered_on(result, "full-range age_sq centers on 0", 2, 0.0));
            result.hypotheses.push_back(centered_on(result, "capped age_sq centers on 0", 3, 0.0));
            break;
    }
    return result;
}

SimResult experiment_attrition(const DgpConfig& config, const ExperimentOptions& options) {
    if (!config.attrition) throw DataError("attrition experiment needs an attrition mechanism in the DGP");
    const int knee = config.attrition->knee;
    std::vector<std::string> late_bins;
    for (const auto& b : age_bin_table(AgeScheme::fine))
        if (!b.last || *b.last >= knee) late_bins.push_back(b.label());

    std::vector<std::string> names;
    for (const auto& b : late_bins) {
        names.push_back("full:" + b);
        names.push_back("attrited:" + b);
        names.push_back("diff:" + b);
    }

    SimResult result = run_replicates("attrition", config, options, names, [&](const DgpConfig& rep) {
        DgpConfig full_cfg = rep;
        full_cfg.attrition.reset();
        const GeneratedSample full = generate(full_cfg);
        const GeneratedSample kept = generate(rep);
        const AgeCurve full_curve = adjusted_means(full.records, rep.country, AgeScheme::fine);
        const AgeCurve kept_curve = adjusted_means(kept.records, rep.country, AgeScheme::fine);
        Eigen::VectorXd row(static_cast<Eigen::Index>(names.size()));
        Eigen::Index j = 0;
        for (const auto& b : late_bins) {
            const double f = full_curve.level(b).value_or(std::numeric_limits<double>::quiet_NaN());
            const double k = kept_curve.level(b).value_or(std::numeric_limits<double>::quiet_NaN());
            row(j++) = f;
            row(j++) = k;
            row(j++) = k - f;
        }
        return row;
    });

    const double strength = config.attrition->strength;
    result.targets = {{"latent_selection_shift", attrition_mean_shift(strength, config.latent_sd())}};
    const auto reps = result.reps();
    if (strength > 0.0) {
        std::size_t all_positive = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            bool ok = true;
            for (std::size_t b = 0; b < late_bins.size(); ++b)
                ok = ok && result.estimates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(3 * b + 2)) > 0.0;
            all_positive += ok;
        }
        result.hypotheses.push_back(fraction_at_least("attrited late-life adjusted means exceed full-sample means",
                                                      static_cast<double>(all_positive) / static_cast<double>(reps),
                                                      0.95, reps));
    } else {
        for (std::size_t b = 0; b < late_bins.size(); ++b)
            result.hypotheses.push_back(centered_on(result, "no inflation in bin " + late_bins[b],
                                                    static_cast<Eigen::Index>(3 * b + 2), 0.0));
    }
    return result;
}

void write_replicates_csv(std::ostream& out, const SimResult& result) {
    csv::Writer w(out);
    std::vector<std::string> header{"replicate", "seed"};
    header.insert(header.end(), result.estimate_names.begin(), result.estimate_names.end());
    w.header(header);
    for (std::size_t r = 0; r < result.reps(); ++r) {
        w.integer(static_cast<long long>(r)).text(std::to_string(result.seeds[r]));
        for (Eigen::Index j = 0; j < result.estimates.cols(); ++j)
            w.number(result.estimates(static_cast<Eigen::Index>(r), j));
        w.end_row();
    }
}

void write_summary_csv(std::ostream& out, const SimResult& result) {
    csv::Writer w(out);
    w.header({"experiment", "kind", "name", "value", "target", "tolerance", "passed"});
    for (Eigen::Index j = 0; j < result.mean.size(); ++j) {
        w.text(result.experiment).text("mean").text(result.estimate_names[static_cast<std::size_t>(j)]);
        w.number(result.mean(j)).text("").number(result.mc_standard_error(j)).text("").end_row();
    }
    for (const auto& [name, value] : result.targets)
        w.text(result.experiment).text("target").text(name).number(value).text("").text("").text("").end_row();
    for (const auto& h : result.hypotheses) {
        w.text(result.experiment).text("hypothesis").text(h.name).number(h.observed).number(h.target);
        w.number(h.tolerance).boolean(h.passed).end_row();
    }
}

std::string summary_text(const SimResult& result) {
    std::ostringstream out;
    out << "experiment " << result.experiment << " (" << result.reps() << " replicates)\n";
    for (const auto& h : result.hypotheses)
        out << "  [" << (h.passed ? "PASS" : "FAIL") << "] " << h.name << ": " << h.detail << '\n';
    out << (result.passed() ? "PASS" : "FAIL") << '\n';
    return out.str();
}

}  // namespace ushape
