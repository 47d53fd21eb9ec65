#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ushape/error.hpp"
#include "ushape/models.hpp"
#include "ushape/simulate.hpp"

using namespace ushape;
using testing_helpers::record;

namespace {

// Hand-assembled quadratic fit: intercept, age, age_sq.
ModelFit quadratic_fit(double intercept, double b1, double b2) {
    ModelFit m;
    m.spec = presets::table2();
    m.fit.labels = {"intercept", "age", "age_sq"};
    m.fit.coefficients = Eigen::Vector3d(intercept, b1, b2);
    m.column_means = Eigen::Vector3d(1.0, 45.0, 2300.0);
    m.blocks = {{TermKind::intercept, "intercept", 0, 1, {}, {}},
                {TermKind::age_linear, "age", 1, 1, {}, {}},
                {TermKind::age_squared, "age_sq", 2, 1, {}, {}}};
    return m;
}

std::vector<SurveyRecord> apc_sample(std::size_t n, std::uint64_t seed, double noise_sd) {
    DgpConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.noise_sd = noise_sd;
    cfg.truth = {AgeShape::quadratic, 8.0, -0.05, 0.0005, 0.0};
    cfg.period_effect = {{2, 0.2}, {5, -0.3}, {8, 0.1}};
    cfg.cohort_effect = {{1950, 0.4}, {1980, -0.2}};
    return generate(cfg).records;
}

}  // namespace

TEST_CASE("presets") {
    for (const auto& name : preset_names()) CHECK(preset(name).has_value());
    CHECK_FALSE(preset("nope").has_value());
    const auto m2 = presets::table1_model2();
    CHECK(m2.controls.size() == 4);
    CHECK(m2.age_cap == 69);
    CHECK_FALSE(presets::table2().controls_on());
    CHECK_FALSE(presets::table2().age_cap.has_value());
    CHECK(presets::table3().form == Form::ranges);
    CHECK(presets::table3().cohort_control);
    CHECK(presets::table4().scheme == AgeScheme::fine);
    CHECK(terms_for(presets::table2()).size() == 4);
}

TEST_CASE("predict_curve") {
    SUBCASE("published coefficients") {
        const auto m = quadratic_fit(7.789, -0.02073, 0.00017);
        const auto curve = predict_curve(m, 15, 90);
        CHECK(curve[5].age == 20);
        CHECK(curve[5].value == doctest::Approx(7.4424).epsilon(1e-12));
        const auto low = std::min_element(curve.begin(), curve.end(),
                                          [](auto& a, auto& b) { return a.value < b.value; });
        CHECK(low->age == 61);
        CHECK(0.02073 / (2 * 0.00017) == doctest::Approx(61.0).epsilon(0.001));
    }
    SUBCASE("flat line") {
        for (const auto& p : predict_curve(quadratic_fit(6.5, 0, 0), 15, 40)) CHECK(p.value == 6.5);
    }
    SUBCASE("ranges fit rejected") {
        const auto recs = apc_sample(2000, 5, 1.0);
        CHECK_THROWS_AS(predict_curve(fit_spec(recs, presets::table3(), "SIM"), 15, 90), std::invalid_argument);
    }
    SUBCASE("weighted average over respondents equals mean fitted value") {
        const auto recs = apc_sample(3000, 6, 1.0);
        const auto m = fit_spec(recs, presets::table2(), "SIM");
        const auto curve = predict_curve(m, 15, 90);
        double num = 0, den = 0, fitted = 0;
        for (const auto& r : recs) {
            num += r.weight * curve[static_cast<std::size_t>(r.age - 15)].value;
            den += r.weight;
        }
        for (Eigen::Index j = 0; j < m.column_means.size(); ++j) fitted += m.fit.coefficients(j) * m.column_means(j);
        CHECK(num / den == doctest::Approx(fitted).epsilon(1e-10));
    }
}

TEST_CASE("fit_spec") {
    const auto recs = apc_sample(5000, 7, 1.0);
    SUBCASE("quadratic recovers the configured age curve") {
        const auto m = fit_spec(recs, presets::table2(), "SIM");
        CHECK(m.fit.coefficient("age") == doctest::Approx(-0.05).epsilon(0.15));
        CHECK(m.fit.coefficient("age_sq") == doctest::Approx(0.0005).epsilon(0.15));
        CHECK(m.rounds == 8);
        CHECK(m.column_means.size() == m.fit.coefficients.size());
    }
    SUBCASE("age cap") {
        const auto m = fit_spec(recs, presets::table1_model3(), "SIM");
        std::size_t expect = 0;
        for (const auto& r : recs) expect += r.age <= 69;
        CHECK(m.fit.n_obs == expect);
    }
    SUBCASE("flat truth yields age terms within noise of zero") {
        DgpConfig cfg;
        cfg.n = 5000;
        const auto flat = generate(cfg).records;
        const auto m = fit_spec(flat, presets::table2(), "SIM");
        CHECK(m.fit.t_stat("age") < 4.0);
        CHECK(m.fit.t_stat("age_sq") < 4.0);
    }
    SUBCASE("cohort spec needs more than one round") {
        auto one = recs;
        for (auto& r : one) {
            r.round = 1;
            r.period_year = 2002;
            r.birth_year = 2002 - r.age;
        }
        CHECK_THROWS_AS(fit_spec(one, presets::table3(), "SIM"), DataError);
    }
    SUBCASE("unknown country") {
        CHECK_THROWS_AS(fit_spec(recs, presets::table2(), "XX"), EmptySampleError);
    }
}

TEST_CASE("independent noise control leaves the age slope alone") {
    auto recs = apc_sample(5000, 8, 1.0);
    const auto plain = fit_spec(recs, presets::table2(), "SIM");
    auto design = build_design(recs, terms_for(presets::table2()));
    std::mt19937_64 rng(99);
    std::normal_distribution<double> z(0, 1);
    Eigen::VectorXd noise(design.rows());
    for (auto& v : noise) v = z(rng);
    design.append_column("noise", noise);
    const auto with = fit_design(design, presets::table2(), "SIM");
    const double se = plain.fit.std_errors(*plain.fit.index("age"));
    CHECK(std::abs(with.fit.coefficient("age") - plain.fit.coefficient("age")) < 3 * se);
}

TEST_CASE("adjusted curves") {
    SUBCASE("bin level differences equal coefficient differences") {
        const auto recs = apc_sample(6000, 9, 1.0);
        for (auto scheme : {AgeScheme::coarse, AgeScheme::fine}) {
            const auto m = fit_spec(recs, presets::ranges(scheme), "SIM");
            const auto curve = adjusted_curve(m);
            const auto* bins = m.blocks.data();
            for (const auto& b : m.blocks)
                if (b.kind == TermKind::age_bins) bins = &b;
            auto coef = [&](const std::string& label) {
                if (label == bins->reference) return 0.0;
                return m.fit.coefficient("bin:" + label);
            };
            REQUIRE(curve.bins.size() == age_bin_labels(scheme).size());
            for (std::size_t i = 0; i < curve.bins.size(); ++i)
                for (std::size_t j = 0; j < curve.bins.size(); ++j)
                    CHECK(std::abs((curve.levels[i] - curve.levels[j]) - (coef(curve.bins[i]) - coef(curve.bins[j]))) <
                          1e-10);
            CHECK(curve.depth == doctest::Approx(curve.max - curve.min));
        }
    }
    SUBCASE("no period or cohort effects and bin-constant truth gives raw bin means") {
        std::vector<SurveyRecord> recs;
        const std::vector<double> truth{7.3, 7.1, 7.0, 7.2, 7.25, 7.3, 7.45, 7.4};
        std::mt19937_64 rng(10);
        std::uniform_int_distribution<int> age(15, 95), round(1, 8);
        std::uniform_real_distribution<double> w(0.2, 3.0);
        const auto labels = age_bin_labels(AgeScheme::fine);
        for (int i = 0; i < 4000; ++i) {
            const int a = age(rng);
            const auto bin = std::find(labels.begin(), labels.end(), age_bin(a, AgeScheme::fine)) - labels.begin();
            recs.push_back(record("X", round(rng), a, truth[static_cast<std::size_t>(bin)], w(rng)));
        }
        const auto curve = adjusted_means(recs, "X", AgeScheme::fine);
        for (std::size_t b = 0; b < labels.size(); ++b) {
            double num = 0, den = 0;
            for (const auto& r : recs)
                if (age_bin(r.age, AgeScheme::fine) == labels[b]) {
                    num += r.weight * r.happiness;
                    den += r.weight;
                }
            CHECK(std::abs(*curve.level(labels[b]) - num / den) < 1e-8);
        }
    }
    SUBCASE("empty bin is omitted with a warning") {
        auto recs = apc_sample(3000, 11, 1.0);
        std::erase_if(recs, [](const SurveyRecord& r) { return r.age >= 85; });
        const auto curve = adjusted_means(recs, "SIM", AgeScheme::fine);
        CHECK(curve.bins.size() == 7);
        CHECK_FALSE(curve.level("85+").has_value());
        CHECK_FALSE(curve.warnings.empty());
    }
    SUBCASE("quadratic fit rejected") {
        CHECK_THROWS_AS(adjusted_curve(quadratic_fit(7, 0, 0)), std::invalid_argument);
    }
}

TEST_CASE("batch_fit") {
    auto recs = apc_sample(3000, 12, 1.0);
    for (std::size_t i = 0; i < recs.size(); i += 2) recs[i].country = "B";
    recs.push_back(record("TINY", 1, 30, 5));
    recs.push_back(record("TINY", 2, 50, 6));
    const std::vector<std::string> countries{"SIM", "TINY", "B"};

    const auto rows = batch_fit(recs, presets::table2(), countries, 3);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].ok());
    CHECK_FALSE(rows[1].ok());
    CHECK_FALSE(rows[1].error.empty());
    CHECK(rows[2].ok());

    const auto serial = batch_fit(recs, presets::table2(), countries, 1);
    CHECK((serial[0].model->fit.coefficients.array() == rows[0].model->fit.coefficients.array()).all());
    CHECK((serial[2].model->fit.std_errors.array() == rows[2].model->fit.std_errors.array()).all());

    const std::vector<std::string> single{"B"};
    CHECK(batch_fit(recs, presets::table2(), single).size() == 1);
}

TEST_CASE("additive process without mechanisms is recovered") {
    DgpConfig cfg;
    cfg.n = 20000;
    cfg.seed = 31;
    cfg.truth = {AgeShape::quadratic, 8.0, -0.05, 0.0005, 0.0};
    cfg.period_effect = {{2, 0.2}, {5, -0.3}, {8, 0.1}};
    const auto m = fit_spec(generate(cfg).records, presets::table2(), "SIM");
    for (int round = 2; round <= 8; ++round) {
        const std::string label = "period:" + std::to_string(cfg.waves.year(round));
        const auto it = cfg.period_effect.find(round);
        const double truth = it == cfg.period_effect.end() ? 0.0 : it->second;
        const auto j = *m.fit.index(label);
        CHECK(std::abs(m.fit.coefficients(j) - truth) < 4 * m.fit.std_errors(j));
    }
    for (const char* label : {"age", "age_sq"}) {
        const auto j = *m.fit.index(label);
        const double truth = std::string(label) == "age" ? -0.05 : 0.0005;
        CHECK(std::abs(m.fit.coefficients(j) - truth) < 4 * m.fit.std_errors(j));
    }
    CHECK(std::abs(m.fit.coefficient("intercept") - 8.0) < 4 * m.fit.std_errors(0));
}
