#include "ushape/published.hpp"

#include <charconv>

#include "ushape/csv.hpp"
#include "ushape/error.hpp"

namespace ushape::published {

namespace {

double number(const std::string& s, const std::string& what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw DataError("fixture: cannot parse " + what + " value '" + s + "'");
    return v;
}

}  // namespace

std::vector<ModelRow> load_table1(const std::filesystem::path& path) {
    const auto t = csv::read_file(path.string());
    const auto c_model = t.require("model"), c_age = t.require("age"), c_ta = t.require("t_age"),
               c_sq = t.require("age_sq"), c_ts = t.require("t_age_sq"), c_const = t.require("constant");
    std::vector<ModelRow> out;
    for (const auto& r : t.rows) {
        ModelRow row{r[c_model],
                     {number(r[c_age], "age"), number(r[c_ta], "t_age"), number(r[c_sq], "age_sq"),
                      number(r[c_ts], "t_age_sq")},
                     std::nullopt};
        if (!r[c_const].empty()) row.constant = number(r[c_const], "constant");
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<QuadRow> load_table2(const std::filesystem::path& path) {
    const auto t = csv::read_file(path.string());
    const auto c_country = t.require("country"), c_code = t.require("code"), c_age = t.require("age"),
               c_ta = t.require("t_age"), c_sq = t.require("age_sq"), c_ts = t.require("t_age_sq"),
               c_ra = t.require("reduction_age"), c_rs = t.require("reduction_age_sq");
    std::vector<QuadRow> out;
    for (const auto& r : t.rows) {
        out.push_back({r[c_country], r[c_code],
                       {number(r[c_age], "age"), number(r[c_ta], "t_age"), number(r[c_sq], "age_sq"),
                        number(r[c_ts], "t_age_sq")},
                       number(r[c_ra], "reduction_age"), number(r[c_rs], "reduction_age_sq")});
    }
    return out;
}

std::vector<RangeRow> load_table3(const std::filesystem::path& path) {
    const auto t = csv::read_file(path.string());
    const auto c_country = t.require("country"), c_code = t.require("code"), c_y = t.require("bin:15-34"),
               c_ty = t.require("t:15-34"), c_o = t.require("bin:60-74"), c_to = t.require("t:60-74"),
               c_x = t.require("bin:75+"), c_tx = t.require("t:75+");
    std::vector<RangeRow> out;
    for (const auto& r : t.rows) {
        out.push_back({r[c_country], r[c_code],
                       {number(r[c_y], "15-34"), number(r[c_ty], "t 15-34"), number(r[c_o], "60-74"),
                        number(r[c_to], "t 60-74")},
                       number(r[c_x], "75+"), number(r[c_tx], "t 75+")});
    }
    return out;
}

std::vector<LevelsRow> load_table4(const std::filesystem::path& path) {
    const auto t = csv::read_file(path.string());
    const auto c_country = t.require("country"), c_code = t.require("code"), c_max = t.require("max"),
               c_min = t.require("min"), c_diff = t.require("difference");
    const auto bins = age_bin_labels(AgeScheme::fine);
    std::vector<std::size_t> bin_cols;
    for (const auto& b : bins) bin_cols.push_back(t.require(b));
    std::vector<LevelsRow> out;
    for (const auto& r : t.rows) {
        LevelsRow row;
        row.country = r[c_country];
        row.code = r[c_code];
        row.curve.country = r[c_country];
        row.curve.scheme = AgeScheme::fine;
        row.curve.bins = bins;
        for (std::size_t i = 0; i < bins.size(); ++i) row.curve.levels.push_back(number(r[bin_cols[i]], bins[i]));
        row.curve.update_extrema();
        row.max = number(r[c_max], "max");
        row.min = number(r[c_min], "min");
        row.difference = number(r[c_diff], "difference");
        out.push_back(std::move(row));
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& fixture_dir, const std::string& name_or_path) {
    for (const char* name : {"table1", "table2", "table3", "table4"})
        if (name_or_path == name) return fixture_dir / ("published_" + name_or_path + ".csv");
    return name_or_path;
}

}  // namespace ushape::published
