#include "ushape/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ushape/error.hpp"

namespace ushape {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (out.empty()) out.push_back("");
    return out;
}

template <typename T>
std::optional<T> parse_number(const std::string& s) {
    T v{};
    const std::string t = trim(s);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool(const std::string& s) {
    const std::string t = trim(s);
    if (t == "on" || t == "true" || t == "yes" || t == "1") return true;
    if (t == "off" || t == "false" || t == "no" || t == "0") return false;
    return std::nullopt;
}

}  // namespace

Config Config::parse(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    Config cfg;
    for (const auto& [name, child] : tree) {
        if (child.empty()) {
            cfg.sections[""][name] = trim(child.data());
            continue;
        }
        auto& section = cfg.sections[name];
        for (const auto& [key, value] : child) section[key] = trim(value.data());
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path.string() + "'");
    return parse(in);
}

const std::map<std::string, std::string>* Config::section(const std::string& name) const {
    auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
}

std::optional<std::string> Config::get(const std::string& section_name, const std::string& key) const {
    if (const auto* s = section(section_name)) {
        if (auto it = s->find(key); it != s->end()) return it->second;
    }
    return std::nullopt;
}

ColumnSchema schema_from_config(const Config& config, ColumnSchema schema) {
    if (const auto* cols = config.section("columns")) {
        for (const auto& [key, value] : *cols) {
            if (key == "country") schema.country = value;
            else if (key == "round") schema.round = value;
            else if (key == "period_year") schema.period_year = value;
            else if (key == "age") schema.age = value;
            else if (key == "happiness") schema.happiness = value;
            else if (key == "weight") schema.weight = value;
            else if (key == "integer_happiness") {
                auto b = parse_bool(value);
                if (!b) throw DataError("config [columns] integer_happiness: expected on/off");
                schema.integer_happiness = *b;
            } else if (key == "optional_controls") {
                auto b = parse_bool(value);
                if (!b) throw DataError("config [columns] optional_controls: expected on/off");
                schema.controls_optional = *b;
            } else if (auto c = control_from_string(key)) {
                if (value.empty() || value == "none")
                    schema.controls.erase(*c);
                else
                    schema.controls[*c] = value;
            } else {
                throw DataError("config [columns]: unknown key '" + key + "'");
            }
        }
    }
    if (const auto* missing = config.section("missing")) {
        for (const auto& [key, value] : *missing) {
            std::set<std::string> tokens;
            for (auto& t : split_list(value)) tokens.insert(t);
            if (key == "default")
                schema.missing_tokens = tokens;
            else
                schema.field_missing[key] = tokens;
        }
    }
    if (const auto* waves = config.section("waves")) {
        for (const auto& [key, value] : *waves) {
            auto v = parse_number<int>(value);
            if (!v) throw DataError("config [waves] " + key + ": expected an integer");
            if (key == "base_year") schema.waves.base_year = *v;
            else if (key == "step") schema.waves.step = *v;
            else throw DataError("config [waves]: unknown key '" + key + "'");
        }
    }
    for (Control c : kAllControls) {
        const std::string name = "levels." + std::string(to_string(c));
        if (const auto* levels = config.section(name)) {
            for (const auto& [raw, label] : *levels) schema.level_codes[c][raw] = label;
        }
    }
    return schema;
}

std::optional<ModelSpec> model_from_config(const Config& config) {
    const auto* model = config.section("model");
    if (!model) return std::nullopt;
    ModelSpec spec;
    spec.name = "custom";
    bool age = false, age_sq = false, bins = false, period = false, intercept = false;
    for (const auto& [key, value] : *model) {
        if (key == "name") {
            spec.name = value;
        } else if (key == "terms") {
            for (const auto& term : split_list(value)) {
                if (term == "intercept") intercept = true;
                else if (term == "age") age = true;
                else if (term == "age_sq") age_sq = true;
                else if (term == "age_bins") bins = true;
                else if (term == "period") period = true;
                else if (term == "cohort") spec.cohort_control = true;
                else if (auto c = control_from_string(term)) spec.controls.push_back(*c);
                else throw DataError("config [model] terms: unknown term '" + term + "'");
            }
        } else if (key == "age_bins") {
            auto s = age_scheme_from_string(value);
            if (!s) throw DataError("config [model] age_bins: expected coarse or fine");
            spec.scheme = *s;
        } else if (key == "cohort_width") {
            auto w = parse_number<int>(value);
            if (!w || *w < 1) throw DataError("config [model] cohort_width: expected a positive integer");
            spec.cohort_width = *w;
        } else if (key == "age_cap") {
            if (value == "none" || value.empty()) {
                spec.age_cap.reset();
            } else {
                auto a = parse_number<int>(value);
                if (!a) throw DataError("config [model] age_cap: expected an integer or none");
                spec.age_cap = *a;
            }
        } else if (key.rfind("reference.", 0) == 0) {
            auto c = control_from_string(key.substr(10));
            if (!c) throw DataError("config [model]: unknown control in '" + key + "'");
            spec.control_reference[*c] = value;
        } else {
            throw DataError("config [model]: unknown key '" + key + "'");
        }
    }
    if (!intercept || !period) throw DataError("config [model] terms must include intercept and period");
    if (bins && (age || age_sq)) throw DataError("config [model]: age_bins cannot be combined with age terms");
    if (bins) {
        spec.form = Form::ranges;
    } else if (age && age_sq) {
        spec.form = Form::quadratic;
    } else {
        throw DataError("config [model]: need either age_bins or both age and age_sq");
    }
    return spec;
}

DgpConfig dgp_from_config(const Config& config, DgpConfig dgp) {
    std::vector<std::string> errors;
    auto number = [&](const std::string& key, const std::string& value, auto& target) {
        using T = std::remove_reference_t<decltype(target)>;
        if (auto v = parse_number<T>(value))
            target = *v;
        else
            errors.push_back(key + ": cannot parse '" + value + "'");
    };
    auto flag = [&](const std::string& key, const std::string& value) -> bool {
        auto b = parse_bool(value);
        if (!b) errors.push_back(key + ": expected on/off");
        return b.value_or(false);
    };

    if (const auto* s = config.section("dgp")) {
        for (const auto& [key, value] : *s) {
            if (key == "n") number(key, value, dgp.n);
            else if (key == "seed") number(key, value, dgp.seed);
            else if (key == "age_min") number(key, value, dgp.age_min);
            else if (key == "age_max") number(key, value, dgp.age_max);
            else if (key == "first_round") number(key, value, dgp.first_round);
            else if (key == "last_round") number(key, value, dgp.last_round);
            else if (key == "country") dgp.country = value;
            else if (key == "truth") {
                if (auto shape = age_shape_from_string(value)) dgp.truth.shape = *shape;
                else errors.push_back("truth: expected flat, quadratic or cubic");
            } else if (key == "intercept") number(key, value, dgp.truth.intercept);
            else if (key == "b1") number(key, value, dgp.truth.b1);
            else if (key == "b2") number(key, value, dgp.truth.b2);
            else if (key == "b3") number(key, value, dgp.truth.b3);
            else if (key == "noise_sd") number(key, value, dgp.noise_sd);
            else if (key == "clamp") dgp.clamp = flag(key, value);
            else if (key == "cohort_width") number(key, value, dgp.cohort_width);
            else if (key == "mediator") {
                if (flag(key, value)) {
                    if (!dgp.mediator) dgp.mediator = MediatorConfig{};
                } else {
                    dgp.mediator.reset();
                }
            } else if (key.rfind("mediator_", 0) == 0) {
                if (!dgp.mediator) dgp.mediator = MediatorConfig{};
                const std::string field = key.substr(9);
                if (field == "age_slope") number(key, value, dgp.mediator->age_slope);
                else if (field == "effect") number(key, value, dgp.mediator->effect);
                else if (field == "direct") number(key, value, dgp.mediator->direct);
                else if (field == "noise_sd") number(key, value, dgp.mediator->noise_sd);
                else errors.push_back(key + ": unknown key");
            } else if (key == "attrition") {
                if (flag(key, value)) {
                    if (!dgp.attrition) dgp.attrition = AttritionConfig{};
                } else {
                    dgp.attrition.reset();
                }
            } else if (key.rfind("attrition_", 0) == 0) {
                if (!dgp.attrition) dgp.attrition = AttritionConfig{};
                const std::string field = key.substr(10);
                if (field == "knee") number(key, value, dgp.attrition->knee);
                else if (field == "strength") number(key, value, dgp.attrition->strength);
                else errors.push_back(key + ": unknown key");
            } else {
                errors.push_back(key + ": unknown key");
            }
        }
    }
    for (const auto& [section, target] :
         {std::pair<std::string, std::map<int, double>*>{"dgp.period_effect", &dgp.period_effect},
          std::pair<std::string, std::map<int, double>*>{"dgp.cohort_effect", &dgp.cohort_effect}}) {
        if (const auto* s = config.section(section)) {
            for (const auto& [key, value] : *s) {
                auto k = parse_number<int>(key);
                auto v = parse_number<double>(value);
                if (!k || !v)
                    errors.push_back(section + " " + key + ": expected integer = number");
                else
                    (*target)[*k] = *v;
            }
        }
    }
    if (!errors.empty()) {
        std::string what = "invalid [dgp] config:";
        for (const auto& e : errors) what += "\n  - " + e;
        throw DataError(what);
    }
    dgp.validate();
    return dgp;
}

}  // namespace ushape
