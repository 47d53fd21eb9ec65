#pragma once

// Synthetic data-generating processes and Monte Carlo experiments for three
// bias mechanisms: mediator controls, upper-age truncation, and selective
// attrition of less happy older respondents.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ushape/dataset.hpp"

namespace ushape {

enum class AgeShape { flat, quadratic, cubic };

std::string_view to_string(AgeShape shape);
std::optional<AgeShape> age_shape_from_string(std::string_view name);

/// intercept + b1*age + b2*age^2 + b3*age^3, with unused terms zeroed by shape.
struct TrueAgeFunction {
    AgeShape shape = AgeShape::flat;
    double intercept = 6.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double b3 = 0.0;

    double operator()(double age) const;
};

/// Linear chain age -> mediator -> happiness, plus a direct age slope.
struct MediatorConfig {
    double age_slope = 0.5;  // a
    double effect = 1.0;     // b
    double direct = 0.0;     // direct age -> happiness slope
    double noise_sd = 1.0;

    double total_effect() const { return direct + age_slope * effect; }
};

/// Respondents aged >= knee whose latent happiness falls below its conditional
/// median are dropped with probability `strength`.
struct AttritionConfig {
    int knee = 75;
    double strength = 0.5;
};

struct DgpConfig {
    std::size_t n = 5000;
    std::uint64_t seed = 20220601;
    int age_min = 15;
    int age_max = 90;
    int first_round = 1;
    int last_round = 8;
    WaveMapping waves;
    std::string country = "SIM";
    TrueAgeFunction truth;
    int cohort_width = 5;
    std::map<int, double> cohort_effect;  // bin start year -> additive effect
    std::map<int, double> period_effect;  // round -> additive effect
    std::optional<MediatorConfig> mediator;
    std::optional<AttritionConfig> attrition;
    double noise_sd = 1.0;
    bool clamp = false;  // round and clamp happiness to the 0..10 integer scale

    /// Throws DataError listing every invalid field.
    void validate() const;
    /// Standard deviation of latent happiness around its structural mean.
    double latent_sd() const;
};

struct GeneratedSample {
    std::vector<SurveyRecord> records;
    std::vector<double> mediator;    // parallel to records; zeros without a mediator
    std::vector<double> structural;  // noise-free mean per record
    std::size_t attrited = 0;
};

/// Draw order per respondent is fixed (age, round, noise, mediator noise,
/// attrition uniform) whether or not a mechanism is enabled, so toggling a
/// mechanism never shifts the random stream.
GeneratedSample generate(const DgpConfig& config);

/// Seed of replicate i: SplitMix64 finalizer applied to master + (i + 1) * 0x9E3779B97F4A7C15.
std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate);

/// Raw mean shift of the retained group after attrition at the given strength,
/// for gaussian latent noise: 2 s sigma / ((2 - s) sqrt(2 pi)).
double attrition_mean_shift(double strength, double sigma);

DgpConfig default_mediator_config();
DgpConfig default_truncation_config();
DgpConfig default_attrition_config();

struct ExperimentOptions {
    std::size_t reps = 200;
    unsigned threads = 0;
    int age_cap = 69;
};

struct Hypothesis {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct SimResult {
    std::string experiment;
    std::vector<std::string> estimate_names;
    Eigen::MatrixXd estimates;  // reps x estimates
    std::vector<std::uint64_t> seeds;
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    std::vector<std::pair<std::string, double>> targets;
    std::vector<Hypothesis> hypotheses;

    std::size_t reps() const { return seeds.size(); }
    bool passed() const;
    double mc_standard_error(Eigen::Index column) const;
    Eigen::Index column(std::string_view name) const;
};

/// Fits age + period with and without the mediator per replicate.
SimResult experiment_mediator(const DgpConfig& config, const ExperimentOptions& options = {});
/// Fits the quadratic on the full age range and on age <= age_cap per replicate.
SimResult experiment_truncation(const DgpConfig& config, const ExperimentOptions& options = {});
/// Compares fine-bin adjusted means of the attrited sample with the full sample.
SimResult experiment_attrition(const DgpConfig& config, const ExperimentOptions& options = {});

void write_replicates_csv(std::ostream& out, const SimResult& result);
void write_summary_csv(std::ostream& out, const SimResult& result);
std::string summary_text(const SimResult& result);

}  // namespace ushape
