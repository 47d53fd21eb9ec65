#pragma once

// Plain-text configuration: "key = value" lines grouped under [section]
// headers, ';' or '#' comments. Sections used by the toolkit:
//   [columns] [missing] [waves] [levels.<control>]  input CSV schema
//   [model]                                          custom model terms
//   [dgp] [dgp.period_effect] [dgp.cohort_effect]    simulation settings

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "ushape/dataset.hpp"
#include "ushape/models.hpp"
#include "ushape/simulate.hpp"

namespace ushape {

struct Config {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static Config parse(std::istream& in);
    static Config load(const std::filesystem::path& path);

    const std::map<std::string, std::string>* section(const std::string& name) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
};

/// Overlays [columns], [missing], [waves] and [levels.*] onto `base`.
ColumnSchema schema_from_config(const Config& config, ColumnSchema base = ColumnSchema::with_default_controls());

/// Builds a ModelSpec from [model], if the section exists.
std::optional<ModelSpec> model_from_config(const Config& config);

/// Overlays [dgp] settings onto `base`. Unknown keys and bad values are
/// collected and reported together in one DataError.
DgpConfig dgp_from_config(const Config& config, DgpConfig base);

}  // namespace ushape
