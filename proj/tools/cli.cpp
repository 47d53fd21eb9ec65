#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "ushape/config.hpp"
#include "ushape/csv.hpp"
#include "ushape/dataset.hpp"
#include "ushape/error.hpp"
#include "ushape/models.hpp"
#include "ushape/published.hpp"
#include "ushape/shape.hpp"
#include "ushape/simulate.hpp"
#include "ushape/svg.hpp"

namespace fs = std::filesystem;
using namespace ushape;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct Globals {
    std::string input;
    std::string config;
    std::string out = "out";
    std::vector<std::string> countries;
    std::vector<std::string> formats{"csv", "text"};
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool continuous = false;
};

struct Context {
    Globals g;
    Config cfg;
    std::ostream& log = std::cerr;

    bool wants(std::string_view format) const {
        return std::find(g.formats.begin(), g.formats.end(), format) != g.formats.end();
    }

    // Every output file goes through here, from the calling thread only.
    void write(const fs::path& dir, const std::string& name, const std::string& content) const {
        fs::create_directories(dir);
        const fs::path path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << content;
        if (!out) throw Error("write failed for '" + path.string() + "'");
    }
};

std::string file_stem(std::string_view s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    return out.empty() ? "_" : out;
}

bool selected(const Context& ctx, const std::string& country, const std::string& code = {}) {
    if (ctx.g.countries.empty()) return true;
    for (const auto& c : ctx.g.countries)
        if (c == country || (!code.empty() && c == code)) return true;
    return false;
}

struct Input {
    std::vector<SurveyRecord> records;
    std::vector<std::string> countries;
};

Input load_input(const Context& ctx) {
    if (ctx.g.input.empty()) throw Error("--input is required for this command");
    ColumnSchema base = ColumnSchema::with_default_controls();
    base.controls_optional = true;
    base.integer_happiness = !ctx.g.continuous;
    const ColumnSchema schema = schema_from_config(ctx.cfg, base);

    auto loaded = load_csv(ctx.g.input, schema);
    ctx.log << "input: " << loaded.report.summary() << '\n';

    Input in;
    const auto present = countries_in(loaded.records);
    if (ctx.g.countries.empty()) {
        in.countries = present;
    } else {
        for (const auto& c : ctx.g.countries) {
            if (std::find(present.begin(), present.end(), c) != present.end())
                in.countries.push_back(c);
            else
                ctx.log << "warning: country '" << c << "' not found in input\n";
        }
        if (in.countries.empty()) throw Error("no input records match --countries");
    }
    in.records = std::move(loaded.records);
    return in;
}

std::vector<ModelSpec> specs_for(const Context& ctx, const std::string& name) {
    if (name == "table1")
        return {presets::table1_model2(), presets::table1_model3(), presets::table1_model3_sex(),
                presets::table1_model4()};
    if (name == "config") {
        auto spec = model_from_config(ctx.cfg);
        if (!spec) throw Error("--spec config needs a [model] section in --config");
        return {*spec};
    }
    if (auto spec = preset(name)) return {*spec};
    std::string known = "table1, config";
    for (const auto& n : preset_names()) known += ", " + n;
    throw Error("unknown spec '" + name + "' (known: " + known + ")");
}

// Coefficients shown in text tables: the age terms, plus the constant for quadratics.
std::vector<Eigen::Index> focus_columns(const ModelFit& m) {
    std::vector<Eigen::Index> cols;
    for (const auto& b : m.blocks) {
        const bool show = b.kind == TermKind::age_linear || b.kind == TermKind::age_squared ||
                          b.kind == TermKind::age_bins || b.kind == TermKind::covariate;
        if (show)
            for (Eigen::Index j = b.first_col; j < b.first_col + b.cols; ++j) cols.push_back(j);
    }
    if (m.spec.form == Form::quadratic)
        if (auto i = m.fit.index("intercept")) cols.push_back(*i);
    return cols;
}

std::string fit_csv(const std::vector<BatchRow>& rows) {
    std::ostringstream out;
    csv::Writer w(out);
    w.header({"country", "coefficient", "estimate", "std_error", "t_abs", "n", "rank"});
    for (const auto& row : rows) {
        if (!row.ok()) continue;
        const auto& f = row.model->fit;
        for (std::size_t j = 0; j < f.labels.size(); ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            w.text(row.country).text(f.labels[j]).number(f.coefficients(i)).number(f.std_errors(i));
            w.number(f.t_stats(i)).integer(static_cast<long long>(f.n_obs)).integer(f.rank);
            w.end_row();
        }
    }
    return out.str();
}

std::string fit_text(const ModelSpec& spec, const std::vector<BatchRow>& rows) {
    const int decimals = spec.form == Form::quadratic ? 5 : 2;
    std::string out = fmt::format("{}\n", spec.name);
    for (const auto& row : rows) {
        if (!row.ok()) {
            out += fmt::format("  {:<16} failed: {}\n", row.country, row.error);
            continue;
        }
        const auto& m = *row.model;
        out += fmt::format("  {:<16} n = {}\n", row.country, m.fit.n_obs);
        for (auto j : focus_columns(m)) {
            out += fmt::format("    {:<18} {:>12.{}f}  T {:>6.2f}\n", m.fit.labels[static_cast<std::size_t>(j)],
                               m.fit.coefficients(j), decimals, m.fit.t_stats(j));
        }
        for (const auto& w : m.warnings) out += fmt::format("    warning: {}\n", w);
    }
    return out;
}

std::string reductions_csv(const std::vector<std::pair<std::string, ReductionReport>>& reports) {
    std::ostringstream out;
    csv::Writer w(out);
    w.header({"country", "coefficient", "old", "new", "percent", "sign_flipped"});
    for (const auto& [country, report] : reports) {
        for (const auto& r : report.rows) {
            w.text(country).text(r.label).number(r.old_value).number(r.new_value);
            if (r.percent)
                w.number(*r.percent);
            else
                w.text("");
            w.boolean(r.sign_flipped);
            w.end_row();
        }
    }
    return out.str();
}

int report_failures(const Context& ctx, const std::vector<BatchRow>& rows, std::size_t& ok) {
    ok = 0;
    int failed = 0;
    for (const auto& r : rows) {
        if (r.ok()) {
            ++ok;
            continue;
        }
        ++failed;
        ctx.log << "failed: " << r.country << ": " << r.error << '\n';
    }
    return failed;
}

struct FitOptions {
    std::string spec = "table2";
};

int cmd_fit(const Context& ctx, const FitOptions& opt, const fs::path& dir) {
    const auto specs = specs_for(ctx, opt.spec);
    const Input in = load_input(ctx);
    int failed = 0;
    std::size_t succeeded = 0;

    std::map<std::string, std::vector<BatchRow>> by_spec;
    for (const auto& spec : specs) {
        auto rows = batch_fit(in.records, spec, in.countries, ctx.g.threads);
        std::size_t ok = 0;
        failed += report_failures(ctx, rows, ok);
        succeeded += ok;
        if (ctx.wants("csv")) ctx.write(dir, "fit_" + file_stem(spec.name) + ".csv", fit_csv(rows));
        if (ctx.wants("text")) {
            const auto text = fit_text(spec, rows);
            ctx.write(dir, "fit_" + file_stem(spec.name) + ".txt", text);
            std::cout << text;
        }
        by_spec[spec.name] = std::move(rows);
    }

    // Coefficient shrinkage relative to the controlled, age-capped baseline.
    if (opt.spec == "table2") {
        auto base = batch_fit(in.records, presets::baseline(), in.countries, ctx.g.threads);
        const bool any_base = std::any_of(base.begin(), base.end(), [](const BatchRow& r) { return r.ok(); });
        if (!any_base) {
            ctx.log << "note: baseline model (with controls) could not be fitted for any country; "
                       "reductions skipped\n";
        } else {
            const auto& fits = by_spec.at(specs.front().name);
            std::vector<std::pair<std::string, ReductionReport>> reports;
            for (std::size_t i = 0; i < fits.size(); ++i) {
                if (!fits[i].ok()) continue;
                if (!base[i].ok()) {
                    ctx.log << "failed: " << base[i].country << " baseline: " << base[i].error << '\n';
                    ++failed;
                    continue;
                }
                reports.emplace_back(fits[i].country,
                                     reduction(base[i].model->fit, fits[i].model->fit, {"age", "age_sq"}));
            }
            if (ctx.wants("csv")) ctx.write(dir, "reductions_table2.csv", reductions_csv(reports));
            if (ctx.wants("text")) {
                std::string text = "reduction from baseline (%)\n";
                for (const auto& [country, r] : reports) {
                    auto pct = [](const CoefficientReduction& c) {
                        return c.percent ? fmt::format("{:.1f}", *c.percent) : std::string("n/a");
                    };
                    text += fmt::format("  {:<16} age {:>7}  age_sq {:>7}{}\n", country, pct(r.at("age")),
                                        pct(r.at("age_sq")), r.at("age_sq").sign_flipped ? "  (sign flipped)" : "");
                }
                ctx.write(dir, "reductions_table2.txt", text);
                std::cout << text;
            }
        }
    }
    if (succeeded == 0) throw Error("no country could be fitted");
    return failed ? kExitPartial : kExitOk;
}

struct CurveOptions {
    std::string scheme = "fine";
    bool autoscale = false;
};

int cmd_curves(const Context& ctx, const CurveOptions& opt, const fs::path& dir) {
    const auto scheme = age_scheme_from_string(opt.scheme);
    if (!scheme) throw Error("unknown --scheme '" + opt.scheme + "' (coarse or fine)");
    const Input in = load_input(ctx);
    const auto rows = batch_fit(in.records, presets::ranges(*scheme), in.countries, ctx.g.threads);
    std::size_t ok = 0;
    const int failed = report_failures(ctx, rows, ok);
    if (ok == 0) throw Error("no country could be fitted");

    std::vector<AgeCurve> curves;
    for (const auto& r : rows)
        if (r.ok()) curves.push_back(adjusted_curve(*r.model));

    const auto labels = age_bin_labels(*scheme);
    const std::string name = "curves_" + std::string(to_string(*scheme));
    if (ctx.wants("csv")) {
        for (const auto& c : curves) {
            std::ostringstream out;
            csv::Writer w(out);
            w.header({"bin_label", "adjusted_mean"});
            for (std::size_t i = 0; i < c.bins.size(); ++i) {
                w.text(c.bins[i]).number(c.levels[i]);
                w.end_row();
            }
            ctx.write(dir / "curves", file_stem(c.country) + "_" + std::string(to_string(*scheme)) + ".csv", out.str());
        }
        // Same layout as the bundled levels fixture, so detect --fits can read it back.
        std::ostringstream out;
        csv::Writer w(out);
        std::vector<std::string> header{"country", "code"};
        header.insert(header.end(), labels.begin(), labels.end());
        header.insert(header.end(), {"max", "min", "difference"});
        w.header(header);
        for (const auto& c : curves) {
            w.text(c.country).text(c.country);
            for (const auto& b : labels) w.number(c.level(b).value_or(std::numeric_limits<double>::quiet_NaN()));
            w.number(c.max).number(c.min).number(c.depth);
            w.end_row();
        }
        ctx.write(dir, name + ".csv", out.str());
    }
    if (ctx.wants("text")) {
        std::string text = fmt::format("{:<16}", "country");
        for (const auto& b : labels) text += fmt::format(" {:>6}", b);
        text += fmt::format(" {:>6} {:>6} {:>6}\n", "max", "min", "diff");
        for (const auto& c : curves) {
            text += fmt::format("{:<16}", c.country);
            for (const auto& b : labels) {
                if (auto v = c.level(b))
                    text += fmt::format(" {:>6.2f}", *v);
                else
                    text += fmt::format(" {:>6}", "-");
            }
            text += fmt::format(" {:>6.2f} {:>6.2f} {:>6.2f}\n", c.max, c.min, c.depth);
        }
        ctx.write(dir, name + ".txt", text);
        std::cout << text;
    }
    if (ctx.wants("svg")) {
        std::vector<svg::Series> series;
        for (const auto& c : curves) {
            svg::Series s{c.country, {}};
            for (std::size_t i = 0; i < c.bins.size(); ++i) {
                const auto& table = age_bin_table(*scheme);
                const auto it = std::find_if(table.begin(), table.end(),
                                             [&](const AgeBin& b) { return b.label() == c.bins[i]; });
                s.points.emplace_back(it->midpoint(), c.levels[i]);
            }
            series.push_back(std::move(s));
        }
        svg::ChartOptions chart;
        chart.title = "Adjusted happiness by age range";
        chart.x_label = "age";
        chart.y_label = "adjusted mean";
        if (!opt.autoscale) chart.y_range = std::pair{0.0, 10.0};
        for (const auto& b : age_bin_table(*scheme)) chart.x_ticks.emplace_back(b.midpoint(), b.label());
        ctx.write(dir, name + ".svg", svg::line_chart(series, chart));
    }
    return failed ? kExitPartial : kExitOk;
}

struct DetectOptions {
    std::string rule;
    std::string fixture;
    std::string fits;
    std::optional<double> threshold;
    std::optional<double> rise_epsilon;
};

// Reads a fit CSV written by `fit`: country -> coefficient -> (estimate, t_abs).
std::map<std::string, std::map<std::string, std::pair<double, double>>> read_fit_csv(const std::string& path) {
    const auto t = csv::read_file(path);
    const auto c_country = t.require("country"), c_coef = t.require("coefficient"), c_est = t.require("estimate"),
               c_t = t.require("t_abs");
    std::map<std::string, std::map<std::string, std::pair<double, double>>> out;
    for (const auto& r : t.rows) out[r[c_country]][r[c_coef]] = {std::stod(r[c_est]), std::stod(r[c_t])};
    return out;
}

std::vector<ShapeVerdict> verdicts_from_fits(const Context& ctx, Rule rule, const DetectOptions& opt) {
    std::vector<ShapeVerdict> out;
    const auto fits = read_fit_csv(opt.fits);
    auto get = [&](const std::string& country, const auto& coefs, const std::string& label) {
        auto it = coefs.find(label);
        if (it == coefs.end()) throw DataError("fits file lacks '" + label + "' for " + country);
        return it->second;
    };
    // keep file order for countries
    const auto t = csv::read_file(opt.fits);
    const auto c_country = t.require("country");
    std::vector<std::string> order;
    for (const auto& r : t.rows)
        if (std::find(order.begin(), order.end(), r[c_country]) == order.end()) order.push_back(r[c_country]);
    for (const auto& country : order) {
        if (!selected(ctx, country)) continue;
        const auto& coefs = fits.at(country);
        if (rule == Rule::quad_t15) {
            const auto [a, ta] = get(country, coefs, "age");
            const auto [s, ts] = get(country, coefs, "age_sq");
            out.push_back(detect_quad(country, {a, ta, s, ts}, opt.threshold.value_or(kQuadThreshold)));
        } else {
            const auto [y, ty] = get(country, coefs, "bin:15-34");
            const auto [o, to] = get(country, coefs, "bin:60-74");
            out.push_back(detect_ranges(country, {y, ty, o, to}, opt.threshold.value_or(kRangeThreshold)));
        }
    }
    return out;
}

std::vector<ShapeVerdict> detect_verdicts(const Context& ctx, Rule rule, const DetectOptions& opt) {
    CurveRule curve_rule;
    if (opt.rise_epsilon) curve_rule.rise_epsilon = *opt.rise_epsilon;
    const double quad_t = opt.threshold.value_or(kQuadThreshold);
    const double range_t = opt.threshold.value_or(kRangeThreshold);
    std::vector<ShapeVerdict> out;

    const std::string source = !opt.fixture.empty() ? opt.fixture : opt.fits;
    if (!source.empty()) {
        if (!opt.fits.empty() && rule != Rule::curve_heuristic) return verdicts_from_fits(ctx, rule, opt);
        const auto path = published::resolve(USHAPE_FIXTURE_DIR, source);
        switch (rule) {
            case Rule::quad_t15:
                for (const auto& row : published::load_table2(path))
                    if (selected(ctx, row.country, row.code)) out.push_back(detect_quad(row.country, row.fit, quad_t));
                break;
            case Rule::range_t1:
                for (const auto& row : published::load_table3(path))
                    if (selected(ctx, row.country, row.code))
                        out.push_back(detect_ranges(row.country, row.contrasts, range_t));
                break;
            case Rule::curve_heuristic:
                for (const auto& row : published::load_table4(path))
                    if (selected(ctx, row.country, row.code)) out.push_back(classify_curve(row.curve, curve_rule));
                break;
        }
        return out;
    }

    const Input in = load_input(ctx);
    const ModelSpec spec = rule == Rule::quad_t15   ? presets::table2()
                           : rule == Rule::range_t1 ? presets::table3()
                                                    : presets::table4();
    const auto rows = batch_fit(in.records, spec, in.countries, ctx.g.threads);
    std::size_t ok = 0;
    if (report_failures(ctx, rows, ok) && ok == 0) throw Error("no country could be fitted");
    for (const auto& r : rows) {
        if (!r.ok()) continue;
        switch (rule) {
            case Rule::quad_t15: out.push_back(detect_quad(*r.model, quad_t)); break;
            case Rule::range_t1: out.push_back(detect_ranges(*r.model, range_t)); break;
            case Rule::curve_heuristic: out.push_back(classify_curve(adjusted_curve(*r.model), curve_rule)); break;
        }
    }
    return out;
}

int cmd_detect(const Context& ctx, const DetectOptions& opt, const fs::path& dir, std::string* summary = nullptr) {
    const auto rule = rule_from_string(opt.rule);
    if (!rule) throw Error("unknown rule '" + opt.rule + "' (quad_t15, range_t1, curve_heuristic)");
    if (!opt.fixture.empty() && !opt.fits.empty()) throw Error("use either --fixture or --fits, not both");
    const auto verdicts = detect_verdicts(ctx, *rule, opt);
    if (verdicts.empty()) throw Error("no countries to classify");

    if (ctx.wants("csv")) {
        std::ostringstream out;
        csv::Writer w(out);
        std::vector<std::string> header{"country", "rule", "is_ushape"};
        for (const auto& [name, value] : verdicts.front().evidence) header.push_back(name);
        header.push_back("note");
        w.header(header);
        for (const auto& v : verdicts) {
            w.text(v.country).text(std::string(to_string(v.rule))).boolean(v.is_ushape);
            for (const auto& [name, value] : v.evidence) w.number(value);
            w.text(v.note);
            w.end_row();
        }
        ctx.write(dir, "verdicts_" + opt.rule + ".csv", out.str());
    }
    std::string text = summary_line(verdicts, *rule) + "\n";
    for (const auto& v : verdicts)
        if (ctx.wants("text")) text += fmt::format("  {:<16} {}\n", v.country, v.is_ushape ? "u-shape" : "-");
    if (*rule == Rule::range_t1) {
        for (const auto& v : verdicts) {
            if ((v.country == "Luxembourg" || v.country == "LU") && !v.is_ushape)
                text += fmt::format(
                    "note: {} has a large positive 15-34 contrast but a 60-74 contrast of {:.2f} (T {:.2f}); it is "
                    "not u-shaped under the literal rule, though a reading that ignores the 60-74 requirement "
                    "would count it\n",
                    v.country, v.value("bin:60-74"), v.value("t:60-74"));
        }
    }
    if (ctx.wants("text")) ctx.write(dir, "verdicts_" + opt.rule + ".txt", text);
    std::cout << text;
    if (summary) *summary = summary_line(verdicts, *rule);
    return kExitOk;
}

struct SimOptions {
    std::string experiment = "all";
    std::optional<std::size_t> reps;
    std::optional<std::size_t> n;
    std::optional<int> age_cap;
    bool write_sample = false;
};

int cmd_simulate(const Context& ctx, const SimOptions& opt, const fs::path& dir, std::string* summary = nullptr) {
    std::vector<std::string> which;
    if (opt.experiment == "all")
        which = {"mediator", "truncation", "attrition"};
    else if (opt.experiment == "mediator" || opt.experiment == "truncation" || opt.experiment == "attrition")
        which = {opt.experiment};
    else
        throw Error("unknown experiment '" + opt.experiment + "' (mediator, truncation, attrition, all)");

    bool all_passed = true;
    for (const auto& name : which) {
        DgpConfig cfg = name == "mediator"     ? default_mediator_config()
                        : name == "truncation" ? default_truncation_config()
                                               : default_attrition_config();
        cfg = dgp_from_config(ctx.cfg, cfg);
        if (ctx.g.seed) cfg.seed = *ctx.g.seed;
        if (opt.n) cfg.n = *opt.n;
        cfg.validate();

        ExperimentOptions eo;
        if (opt.reps) eo.reps = *opt.reps;
        if (opt.age_cap) eo.age_cap = *opt.age_cap;
        eo.threads = ctx.g.threads;

        const SimResult res = name == "mediator"     ? experiment_mediator(cfg, eo)
                              : name == "truncation" ? experiment_truncation(cfg, eo)
                                                     : experiment_attrition(cfg, eo);
        all_passed = all_passed && res.passed();

        if (ctx.wants("csv")) {
            std::ostringstream reps, sum;
            write_replicates_csv(reps, res);
            write_summary_csv(sum, res);
            ctx.write(dir, "sim_" + name + "_replicates.csv", reps.str());
            ctx.write(dir, "sim_" + name + "_summary.csv", sum.str());
        }
        const std::string text = summary_text(res);
        if (ctx.wants("text")) ctx.write(dir, "sim_" + name + ".txt", text);
        std::cout << text;
        if (summary) *summary += fmt::format("simulate {}: {}\n", name, res.passed() ? "pass" : "FAIL");
        if (opt.write_sample) {
            std::ostringstream out;
            write_csv(out, generate(cfg).records);
            ctx.write(dir, "sim_" + name + "_sample.csv", out.str());
        }
    }
    return all_passed ? kExitOk : kExitPartial;
}

int cmd_report(const Context& ctx, const SimOptions& sim, const CurveOptions& curves, const fs::path& dir) {
    int code = kExitOk;
    std::string summary;
    auto merge = [&](int c) { code = std::max(code, c); };

    const std::vector<std::pair<std::string, std::string>> fixture_runs{
        {"quad_t15", "table2"}, {"range_t1", "table3"}, {"curve_heuristic", "table4"}};
    // The published tables are checked in full; --countries narrows the data runs only.
    Context all = ctx;
    all.g.countries.clear();
    for (const auto& [rule, table] : fixture_runs) {
        DetectOptions d;
        d.rule = rule;
        d.fixture = table;
        std::string line;
        merge(cmd_detect(all, d, dir / "published", &line));
        summary += "published " + table + ": " + line + "\n";
    }

    if (!ctx.g.input.empty()) {
        for (const char* spec : {"table2", "table3"}) merge(cmd_fit(ctx, {spec}, dir / "fits"));
        merge(cmd_curves(ctx, curves, dir));
        for (const auto& [rule, table] : fixture_runs) {
            DetectOptions d;
            d.rule = rule;
            std::string line;
            merge(cmd_detect(ctx, d, dir / "detect", &line));
            summary += "data: " + line + "\n";
        }
    }

    merge(cmd_simulate(ctx, sim, dir / "simulate", &summary));
    ctx.write(dir, "report.txt", summary);
    std::cout << "\n" << summary;
    return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
    Context ctx;
    CLI::App app{"Age/happiness u-shape toolkit: fits, adjusted curves, shape rules and bias simulations"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "0.1.0");

    auto& g = ctx.g;
    app.add_option("--input", g.input, "survey CSV (see --config for column mapping)");
    app.add_option("--config", g.config, "INI-style config with [columns], [model], [dgp] sections");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--countries", g.countries, "comma-separated country names or codes")->delimiter(',');
    app.add_option("--format", g.formats, "comma-separated output formats: csv, text, svg")
        ->delimiter(',')
        ->check(CLI::IsMember({"csv", "text", "svg"}))
        ->capture_default_str();
    app.add_option("--seed", g.seed, "master random seed (simulate only)");
    app.add_option("--threads", g.threads, "worker threads, 0 = hardware concurrency");
    app.add_flag("--continuous", g.continuous, "accept non-integer happiness values in --input");

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model battery per country");
    fit_cmd->add_option("--spec", fit.spec, "table1, table2, table3, table4, a preset name, or config")
        ->capture_default_str();

    CurveOptions curves;
    auto* curves_cmd = app.add_subcommand("curves", "period/cohort-adjusted happiness by age range");
    curves_cmd->add_option("--scheme", curves.scheme, "coarse or fine")->capture_default_str();
    curves_cmd->add_flag("--autoscale", curves.autoscale, "fit the SVG y-axis to the data instead of 0-10");

    DetectOptions detect;
    auto* detect_cmd = app.add_subcommand("detect", "apply a u-shape rule");
    detect_cmd->add_option("--rule", detect.rule, "quad_t15, range_t1 or curve_heuristic")->required();
    detect_cmd->add_option("--fixture", detect.fixture, "bundled published table (table2/3/4) or a CSV in that layout");
    detect_cmd->add_option("--fits", detect.fits, "fit CSV from `fit`, or combined curve CSV from `curves`");
    detect_cmd->add_option("--threshold", detect.threshold, "override the |T| threshold");
    detect_cmd->add_option("--rise-epsilon", detect.rise_epsilon, "curve_heuristic minimum rise");

    SimOptions sim;
    auto add_sim_options = [&](CLI::App* cmd) {
        cmd->add_option("--reps", sim.reps, "replicates per experiment (default 200)");
        cmd->add_option("--n", sim.n, "respondents per replicate");
        cmd->add_option("--age-cap", sim.age_cap, "truncation experiment upper age (default 69)");
    };
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo bias experiments");
    sim_cmd->add_option("--experiment", sim.experiment, "mediator, truncation, attrition or all")->capture_default_str();
    sim_cmd->add_flag("--write-sample", sim.write_sample, "also write one generated sample per experiment");
    add_sim_options(sim_cmd);

    auto* report_cmd = app.add_subcommand("report", "published-table checks, data battery (with --input), simulations");
    add_sim_options(report_cmd);
    report_cmd->add_option("--scheme", curves.scheme, "age scheme for adjusted curves")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitFatal;
    }

    try {
        if (g.formats.empty()) throw Error("at least one --format is required");
        if (!g.config.empty()) ctx.cfg = Config::load(g.config);
        const fs::path out = g.out;
        if (*fit_cmd) return cmd_fit(ctx, fit, out);
        if (*curves_cmd) return cmd_curves(ctx, curves, out);
        if (*detect_cmd) return cmd_detect(ctx, detect, out);
        if (*sim_cmd) return cmd_simulate(ctx, sim, out);
        if (*report_cmd) return cmd_report(ctx, sim, curves, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFatal;
    }
    return kExitFatal;
}
