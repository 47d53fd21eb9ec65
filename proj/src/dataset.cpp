#include "ushape/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ushape/csv.hpp"
#include "ushape/error.hpp"

namespace ushape {

namespace {

constexpr std::string_view kCommunityMilitary = "community_military";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        // Accept integral decimals such as "42.0".
        double d = 0;
        auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (e2 != std::errc() || p2 != s.data() + s.size() || s.empty() || d != std::floor(d)) return std::nullopt;
        return static_cast<long long>(d);
    }
    return v;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace

std::string_view to_string(Control control) {
    switch (control) {
        case Control::sex: return "sex";
        case Control::education: return "education";
        case Control::marital: return "marital";
        case Control::labor_status: return "labor_status";
    }
    return "?";
}

std::optional<Control> control_from_string(std::string_view name) {
    for (Control c : kAllControls)
        if (to_string(c) == name) return c;
    return std::nullopt;
}

const std::vector<std::string>& declared_levels(Control control) {
    static const std::vector<std::string> sex{"male", "female"};
    static const std::vector<std::string> education{"less_than_lower_secondary", "lower_secondary",
                                                    "upper_secondary", "post_secondary", "tertiary"};
    static const std::vector<std::string> marital{"married",  "separated",      "divorced",
                                                  "widowed", "never_married", "other"};
    static const std::vector<std::string> labor{"paid_work",  "education",  "unemployed_seeking",
                                                "unemployed_not_seeking", "sick_disabled", "retired",
                                                "housework",  "other"};
    switch (control) {
        case Control::sex: return sex;
        case Control::education: return education;
        case Control::marital: return marital;
        case Control::labor_status: return labor;
    }
    return sex;
}

const std::optional<std::string>& SurveyRecord::control(Control c) const {
    switch (c) {
        case Control::sex: return sex;
        case Control::education: return education;
        case Control::marital: return marital;
        case Control::labor_status: return labor_status;
    }
    return sex;
}

std::optional<std::string>& SurveyRecord::control(Control c) {
    return const_cast<std::optional<std::string>&>(std::as_const(*this).control(c));
}

ColumnSchema ColumnSchema::with_default_controls() {
    ColumnSchema schema;
    for (Control c : kAllControls) schema.controls[c] = std::string(to_string(c));
    return schema;
}

std::size_t LoadReport::total_dropped() const {
    std::size_t total = 0;
    for (const auto& [reason, count] : dropped) total += count;
    return total;
}

std::string LoadReport::summary() const {
    std::ostringstream out;
    out << rows_read << " rows read, " << total_dropped() << " dropped";
    for (const auto& [reason, count] : dropped) out << "; " << count << " dropped: " << reason;
    for (const auto& [what, count] : recoded) out << "; " << count << " recoded: " << what;
    for (const auto& [what, count] : unrecognized) out << "; " << count << " unrecognized: " << what;
    return out.str();
}

LoadResult load_csv(const std::filesystem::path& path, const ColumnSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file '" + path.string() + "'");
    return parse_csv(in, schema);
}

LoadResult parse_csv(std::istream& in, const ColumnSchema& schema) {
    const csv::Table table = csv::read(in);

    const std::size_t country_col = table.require(schema.country);
    const std::size_t age_col = table.require(schema.age);
    const std::size_t happy_col = table.require(schema.happiness);
    const std::size_t weight_col = table.require(schema.weight);

    std::optional<std::size_t> round_col;
    std::optional<std::size_t> year_col;
    if (!schema.period_year.empty()) year_col = table.require(schema.period_year);
    if (!schema.round.empty()) {
        round_col = table.column(schema.round);
        if (!round_col && !year_col) table.require(schema.round);
    }
    if (!round_col && !year_col) throw DataError("neither a round nor a period_year column is mapped");

    std::vector<std::pair<Control, std::size_t>> control_cols;
    for (const auto& [control, header] : schema.controls) {
        if (auto col = table.column(header))
            control_cols.emplace_back(control, *col);
        else if (!schema.controls_optional)
            table.require(header);
    }

    auto is_missing = [&](std::string_view field, const std::string& raw) {
        const std::string value(trim(raw));
        if (schema.missing_tokens.count(value)) return true;
        auto it = schema.field_missing.find(std::string(field));
        return it != schema.field_missing.end() && it->second.count(value) > 0;
    };

    LoadResult result;
    LoadReport& report = result.report;
    auto drop = [&](std::string_view reason) { ++report.dropped[std::string(reason)]; };

    for (const auto& row : table.rows) {
        ++report.rows_read;
        SurveyRecord rec;

        rec.country = std::string(trim(row[country_col]));
        if (rec.country.empty() || is_missing("country", row[country_col])) {
            drop("missing country");
            continue;
        }

        auto age = is_missing("age", row[age_col]) ? std::nullopt : parse_int(row[age_col]);
        if (!age) {
            drop(kDropAge);
            continue;
        }
        if (*age < kMinSurveyAge) {
            drop("age below 15");
            continue;
        }
        rec.age = static_cast<int>(*age);

        if (is_missing("happiness", row[happy_col])) {
            drop("happiness missing");
            continue;
        }
        auto happy = parse_double(row[happy_col]);
        if (!happy || *happy < 0.0 || *happy > 10.0 ||
            (schema.integer_happiness && *happy != std::floor(*happy))) {
            drop(kDropHappinessRange);
            continue;
        }
        rec.happiness = *happy;

        auto weight = is_missing("weight", row[weight_col]) ? std::nullopt : parse_double(row[weight_col]);
        if (!weight || !std::isfinite(*weight)) {
            drop("unparseable weight");
            continue;
        }
        if (*weight <= 0.0) {
            drop(kDropWeight);
            continue;
        }
        rec.weight = *weight;

        std::optional<long long> round;
        if (round_col && !is_missing("round", row[*round_col])) round = parse_int(row[*round_col]);
        if (year_col) {
            auto year = is_missing("period_year", row[*year_col]) ? std::nullopt : parse_int(row[*year_col]);
            if (!year) {
                drop("unparseable period_year");
                continue;
            }
            rec.period_year = static_cast<int>(*year);
            if (round) {
                rec.round = static_cast<int>(*round);
            } else {
                const int offset = rec.period_year - schema.waves.base_year;
                rec.round = schema.waves.step != 0 && offset % schema.waves.step == 0 ? offset / schema.waves.step : 0;
            }
        } else {
            if (!round || *round < 1) {
                drop("unparseable round");
                continue;
            }
            rec.round = static_cast<int>(*round);
            rec.period_year = schema.waves.year(rec.round);
        }
        rec.birth_year = rec.period_year - rec.age;

        for (const auto& [control, col] : control_cols) {
            const std::string field(to_string(control));
            if (is_missing(field, row[col])) continue;
            std::string raw(trim(row[col]));
            std::string label = raw;
            if (auto codes = schema.level_codes.find(control); codes != schema.level_codes.end()) {
                if (auto hit = codes->second.find(raw); hit != codes->second.end()) label = hit->second;
            }
            if (control == Control::labor_status && label == kCommunityMilitary) {
                ++report.recoded["labor_status: community_military -> other"];
                label = "other";
            }
            const auto& levels = declared_levels(control);
            if (std::find(levels.begin(), levels.end(), label) == levels.end()) {
                ++report.unrecognized[field + "=" + raw];
                continue;
            }
            rec.control(control) = std::move(label);
        }

        result.records.push_back(std::move(rec));
    }

    if (result.records.empty()) throw DataError("no valid rows: " + report.summary());
    return result;
}

void FilterSpec::validate() const {
    if (max_age && *max_age < min_age)
        throw DataError("filter max_age " + std::to_string(*max_age) + " is below min_age " + std::to_string(min_age));
}

std::vector<SurveyRecord> apply_filter(std::span<const SurveyRecord> records, const FilterSpec& spec,
                                       FilterReport* report) {
    spec.validate();
    FilterReport local;
    std::vector<SurveyRecord> kept;
    kept.reserve(records.size());
    for (const auto& rec : records) {
        if (spec.countries && !spec.countries->count(rec.country)) {
            ++local.removed_by_country;
            continue;
        }
        if (rec.age < spec.min_age || (spec.max_age && rec.age > *spec.max_age)) {
            ++local.removed_by_age;
            continue;
        }
        bool complete = true;
        for (Control c : spec.listwise) {
            if (!rec.control(c)) {
                ++local.listwise_deleted[c];
                complete = false;
                break;
            }
        }
        if (!complete) continue;
        kept.push_back(rec);
    }
    if (report) *report = local;
    if (kept.empty()) throw EmptySampleError("no records left after filtering");
    return kept;
}

std::string CohortBin::label() const { return std::to_string(first) + "-" + std::to_string(last); }

CohortBin cohort_bin(int birth_year, int width) {
    if (width < 1) throw std::invalid_argument("cohort width must be >= 1");
    int q = birth_year / width;
    if (birth_year % width != 0 && birth_year < 0) --q;
    return {q * width, q * width + width - 1};
}

void write_csv(std::ostream& out, std::span<const SurveyRecord> records) {
    csv::Writer w(out);
    std::vector<std::string> header{"country", "round", "period_year", "age", "happiness", "weight"};
    for (Control c : kAllControls) header.emplace_back(to_string(c));
    w.header(header);
    for (const auto& r : records) {
        w.text(r.country).integer(r.round).integer(r.period_year).integer(r.age).number(r.happiness).number(r.weight);
        for (Control c : kAllControls) w.text(r.control(c).value_or(""));
        w.end_row();
    }
}

std::vector<std::string> countries_in(std::span<const SurveyRecord> records) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : records)
        if (seen.insert(r.country).second) out.push_back(r.country);
    return out;
}

std::size_t distinct_rounds(std::span<const SurveyRecord> records) {
    std::set<int> rounds;
    for (const auto& r : records) rounds.insert(r.period_year);
    return rounds.size();
}

}  // namespace ushape
