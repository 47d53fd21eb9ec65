#include <doctest.h>

#include <cmath>
#include <set>

#include "ushape/published.hpp"
#include "ushape/shape.hpp"
#include "ushape/simulate.hpp"

using namespace ushape;

namespace {

const std::filesystem::path kFixtures = USHAPE_FIXTURE_DIR;

AgeCurve fine_curve(std::vector<double> levels) {
    AgeCurve c;
    c.country = "X";
    c.bins = age_bin_labels(AgeScheme::fine);
    c.levels = std::move(levels);
    c.update_extrema();
    return c;
}

bool round2_equal(double a, double b) { return std::abs(std::round(a * 100) - std::round(b * 100)) < 0.5; }

}  // namespace

TEST_CASE("rule names") {
    for (auto r : {Rule::quad_t15, Rule::range_t1, Rule::curve_heuristic}) CHECK(rule_from_string(to_string(r)) == r);
    CHECK_FALSE(rule_from_string("t2").has_value());
}

TEST_CASE("detect_quad examples") {
    CHECK(detect_quad("Germany", {-0.02073, 6.10, 0.00017, 5.07}).is_ushape);
    const auto austria = detect_quad("Austria", {-0.00540, 1.05, -0.000004, 0.08});
    CHECK_FALSE(austria.is_ushape);
    CHECK_FALSE(austria.note.empty());
    CHECK_FALSE(detect_quad("Denmark", {0.00027, 0.07, 0.00005, 1.20}).is_ushape);
    // threshold is strict
    CHECK_FALSE(detect_quad("edge", {-1, 1.5, 1, 3}).is_ushape);
    const auto v = detect_quad("Germany", {-0.02073, 6.10, 0.00017, 5.07});
    CHECK(v.value("t_age") == 6.10);
    CHECK(v.value("threshold") == 1.5);
    CHECK_THROWS_AS(v.value("nope"), std::out_of_range);
}

TEST_CASE("detect_ranges examples") {
    CHECK(detect_ranges("Norway", {0.25, 2.93, 0.13, 1.89}).is_ushape);
    CHECK_FALSE(detect_ranges("Germany", {-0.05, 0.62, 0.13, 2.02}).is_ushape);
    CHECK_FALSE(detect_ranges("Luxembourg", {1.18, 1.10, -0.03, 0.09}).is_ushape);
}

TEST_CASE("verdicts are pure functions of their evidence") {
    const auto fixtures2 = published::load_table2(published::resolve(kFixtures, "table2"));
    for (const auto& row : fixtures2) {
        const auto v = detect_quad(row.country, row.fit);
        CHECK(reevaluate(v) == v.is_ushape);
    }
    for (const auto& row : published::load_table3(published::resolve(kFixtures, "table3"))) {
        const auto v = detect_ranges(row.country, row.contrasts);
        CHECK(reevaluate(v) == v.is_ushape);
    }
    const auto c = classify_curve(fine_curve({7.29, 7.17, 7.13, 7.18, 7.19, 7.28, 7.40, 7.38}));
    CHECK(reevaluate(c) == c.is_ushape);
}

TEST_CASE("quadratic fixture gives 23 u-shapes") {
    const auto rows = published::load_table2(published::resolve(kFixtures, "table2"));
    REQUIRE(rows.size() == 30);
    std::vector<ShapeVerdict> verdicts;
    std::set<std::string> failures;
    for (const auto& row : rows) {
        verdicts.push_back(detect_quad(row.country, row.fit));
        if (!verdicts.back().is_ushape) failures.insert(row.country);
    }
    CHECK(failures == std::set<std::string>{"Austria", "Cyprus", "Denmark", "Finland", "Iceland", "Israel", "Italy"});
    CHECK(summary_line(verdicts, Rule::quad_t15) == "23 of 30 countries u-shaped under rule quad_t15");
}

TEST_CASE("range fixture under the literal rule") {
    std::set<std::string> hits;
    for (const auto& row : published::load_table3(published::resolve(kFixtures, "table3")))
        if (detect_ranges(row.country, row.contrasts).is_ushape) hits.insert(row.country);
    CHECK(hits == std::set<std::string>{"Austria", "Switzerland", "Norway", "Poland", "Portugal", "Russia"});
}

TEST_CASE("reduction") {
    const auto age = reduce("age", -0.11463, -0.02073);
    REQUIRE(age.percent);
    CHECK(std::round(*age.percent * 10) / 10 == 81.9);
    const auto sq = reduce("age_sq", 0.00120, 0.00017);
    CHECK(std::round(*sq.percent * 10) / 10 == 85.8);
    CHECK_FALSE(sq.sign_flipped);

    const auto same = reduce("age", 0.3, 0.3);
    CHECK(*same.percent == 0.0);
    CHECK_FALSE(same.sign_flipped);

    // Austria age_sq: positive baseline, negative after
    const auto flip = reduce("age_sq", 0.00050, -0.000004);
    CHECK(*flip.percent > 100.0);
    CHECK(flip.sign_flipped);

    CHECK_FALSE(reduce("x", 0.0, 1.0).percent.has_value());

    for (double k : {-3.0, 0.001, 7.5, 1e6}) {
        const auto scaled = reduce("age", -0.11463 * k, -0.02073 * k);
        CHECK(*scaled.percent == doctest::Approx(*age.percent).epsilon(1e-12));
    }

    FitResult a, b;
    a.labels = b.labels = {"age", "age_sq"};
    a.coefficients = Eigen::Vector2d(-0.11463, 0.00120);
    b.coefficients = Eigen::Vector2d(-0.02073, 0.00017);
    const auto report = reduction(a, b, {"age", "age_sq"});
    CHECK(report.at("age_sq").percent == sq.percent);
    CHECK_THROWS(reduction(a, b, {"cohort"}));
}

TEST_CASE("depth") {
    const auto germany = fine_curve({7.29, 7.17, 7.13, 7.18, 7.19, 7.28, 7.40, 7.38});
    const auto d = depth(germany);
    CHECK(d.max == 7.40);
    CHECK(d.min == 7.13);
    CHECK(round2_equal(d.difference, 0.27));
    CHECK(d.min_bins == std::vector<std::string>{"35-44"});

    CHECK(depth(fine_curve(std::vector<double>(8, 6.0))).difference == 0.0);

    auto shifted = germany;
    for (auto& l : shifted.levels) l += 1.25;
    CHECK(depth(shifted).difference == doctest::Approx(d.difference).epsilon(1e-12));

    AgeCurve one;
    one.bins = {"15-24"};
    one.levels = {7.0};
    CHECK_THROWS_AS(depth(one), std::invalid_argument);
}

TEST_CASE("levels fixture depths") {
    const auto rows = published::load_table4(published::resolve(kFixtures, "table4"));
    REQUIRE(rows.size() == 30);
    for (const auto& row : rows) {
        const auto d = depth(row.curve);
        CHECK(round2_equal(d.max, row.max));
        CHECK(round2_equal(d.min, row.min));
        CHECK(round2_equal(d.difference, row.difference));
        if (row.country == "Turkey") {
            CHECK(round2_equal(d.difference, 2.14));
            CHECK(d.max_bins == std::vector<std::string>{"35-44"});
            CHECK(d.min_bins == std::vector<std::string>{"85+"});
        }
    }
}

TEST_CASE("classify_curve") {
    CHECK(classify_curve(fine_curve({7.29, 7.17, 7.13, 7.18, 7.19, 7.28, 7.40, 7.38})).is_ushape);
    const auto rows = published::load_table4(published::resolve(kFixtures, "table4"));
    for (const auto& row : rows)
        if (row.country == "Turkey") CHECK_FALSE(classify_curve(row.curve).is_ushape);
    CHECK_FALSE(classify_curve(fine_curve({5, 5.5, 6, 6.5, 7, 7.5, 8, 8.5})).is_ushape);
    // a rise below epsilon does not count
    CHECK_FALSE(classify_curve(fine_curve({7.2, 7.1, 7.0, 7.02, 7.04, 7.05, 7.06, 7.08})).is_ushape);
    CurveRule loose;
    loose.rise_epsilon = 0.05;
    CHECK(classify_curve(fine_curve({7.2, 7.1, 7.0, 7.02, 7.04, 7.05, 7.06, 7.08}), loose).is_ushape);
}

TEST_CASE("detectors on fitted models") {
    DgpConfig cfg;
    cfg.n = 8000;
    cfg.truth = {AgeShape::quadratic, 8.0, -0.08, 0.0008, 0.0};
    const auto recs = generate(cfg).records;
    CHECK(detect_quad(fit_spec(recs, presets::table2(), "SIM")).is_ushape);
    CHECK(detect_ranges(fit_spec(recs, presets::table3(), "SIM")).is_ushape);
    CHECK_THROWS(detect_ranges(fit_spec(recs, presets::table4(), "SIM")));

    DgpConfig flat;
    flat.n = 3000;
    const auto v = detect_quad(fit_spec(generate(flat).records, presets::table2(), "SIM"));
    CHECK(summary_line({v}, Rule::quad_t15).starts_with("0 of 1") == !v.is_ushape);
}
