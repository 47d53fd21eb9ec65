#pragma once

// Readers for the bundled CSV files of transcribed published values.

#include <filesystem>
#include <string>
#include <vector>

#include "ushape/models.hpp"
#include "ushape/shape.hpp"

namespace ushape::published {

struct QuadRow {
    std::string country;
    std::string code;
    QuadEvidence fit;
    double reduction_age;
    double reduction_age_sq;
};

struct RangeRow {
    std::string country;
    std::string code;
    RangeEvidence contrasts;
    double beta_oldest;  // 75+
    double t_oldest;
};

struct LevelsRow {
    std::string country;
    std::string code;
    AgeCurve curve;  // fine scheme
    double max;
    double min;
    double difference;
};

struct ModelRow {
    std::string model;
    QuadEvidence fit;
    std::optional<double> constant;
};

std::vector<ModelRow> load_table1(const std::filesystem::path& path);
std::vector<QuadRow> load_table2(const std::filesystem::path& path);
std::vector<RangeRow> load_table3(const std::filesystem::path& path);
std::vector<LevelsRow> load_table4(const std::filesystem::path& path);

/// Resolves "table1".."table4" inside a fixture directory; other names are taken as paths.
std::filesystem::path resolve(const std::filesystem::path& fixture_dir, const std::string& name_or_path);

}  // namespace ushape::published
