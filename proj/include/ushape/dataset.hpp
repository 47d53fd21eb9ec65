#pragma once

// Weighted cross-sectional survey microdata: loading, validation, filtering,
// and derived fields (period year, birth year, cohort bins).

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ushape {

enum class Control { sex, education, marital, labor_status };

inline constexpr std::array<Control, 4> kAllControls{Control::sex, Control::education, Control::marital,
                                                     Control::labor_status};

std::string_view to_string(Control control);
std::optional<Control> control_from_string(std::string_view name);

/// Declared level labels for a control, in canonical order. The first label
/// is the default reference level.
const std::vector<std::string>& declared_levels(Control control);

inline constexpr int kMinSurveyAge = 15;

struct SurveyRecord {
    std::string country;
    int round = 1;
    int period_year = 2002;
    int age = kMinSurveyAge;
    // Integer 0..10 when loaded from survey files; simulated samples may be continuous.
    double happiness = 0.0;
    double weight = 1.0;
    int birth_year = 1987;
    std::optional<std::string> sex;
    std::optional<std::string> education;
    std::optional<std::string> marital;
    std::optional<std::string> labor_status;

    const std::optional<std::string>& control(Control c) const;
    std::optional<std::string>& control(Control c);
};

/// Maps survey rounds onto calendar years: year = base_year + step * round.
struct WaveMapping {
    int base_year = 2000;
    int step = 2;

    int year(int round) const { return base_year + step * round; }
};

/// Logical-field to CSV-header mapping plus missing-value and level recoding rules.
struct ColumnSchema {
    std::string country = "country";
    std::string round = "round";
    std::string period_year;  // when set, read directly instead of deriving from round
    std::string age = "age";
    std::string happiness = "happiness";
    std::string weight = "weight";
    std::map<Control, std::string> controls;

    std::set<std::string> missing_tokens{"", "NA", "NaN", "."};
    // Extra sentinels per logical field ("happiness", "age", "sex", ...).
    std::map<std::string, std::set<std::string>> field_missing;
    // Raw code -> declared level label, per control.
    std::map<Control, std::map<std::string, std::string>> level_codes;

    WaveMapping waves;
    // Survey files carry integer 0..10 responses; turn off to read continuous simulated outcomes.
    bool integer_happiness = true;
    // Skip mapped control columns that the file does not have instead of failing.
    bool controls_optional = false;

    /// Default schema: header names equal the logical field names, all four controls mapped.
    static ColumnSchema with_default_controls();
};

struct LoadReport {
    std::size_t rows_read = 0;
    std::map<std::string, std::size_t> dropped;  // reason -> count
    std::map<std::string, std::size_t> recoded;  // e.g. "labor_status: community_military -> other"
    std::map<std::string, std::size_t> unrecognized;  // control values treated as missing

    std::size_t total_dropped() const;
    std::string summary() const;
};

struct LoadResult {
    std::vector<SurveyRecord> records;
    LoadReport report;
};

inline constexpr std::string_view kDropHappinessRange = "happiness out of range";
inline constexpr std::string_view kDropWeight = "nonpositive weight";
inline constexpr std::string_view kDropAge = "unparseable age";

LoadResult load_csv(const std::filesystem::path& path, const ColumnSchema& schema);
LoadResult parse_csv(std::istream& in, const ColumnSchema& schema);

struct FilterSpec {
    int min_age = kMinSurveyAge;
    std::optional<int> max_age;  // inclusive; 69 encodes "younger than 70"
    std::optional<std::set<std::string>> countries;
    std::set<Control> listwise;

    void validate() const;
};

struct FilterReport {
    std::size_t removed_by_age = 0;
    std::size_t removed_by_country = 0;
    std::map<Control, std::size_t> listwise_deleted;
};

/// Order-preserving filter. Throws EmptySampleError if nothing survives.
std::vector<SurveyRecord> apply_filter(std::span<const SurveyRecord> records, const FilterSpec& spec,
                                       FilterReport* report = nullptr);

struct CohortBin {
    int first = 0;
    int last = 0;

    std::string label() const;
    bool contains(int birth_year) const { return birth_year >= first && birth_year <= last; }
    auto operator<=>(const CohortBin&) const = default;
};

/// Anchors bins at multiples of width: [floor(y / w) * w, floor(y / w) * w + w - 1].
CohortBin cohort_bin(int birth_year, int width = 5);

/// Writes records in the default-schema layout (country, round, period_year,
/// age, happiness, weight, then the four controls); load_csv reads it back with
/// ColumnSchema::with_default_controls().
void write_csv(std::ostream& out, std::span<const SurveyRecord> records);

/// Distinct countries in order of first appearance.
std::vector<std::string> countries_in(std::span<const SurveyRecord> records);

/// Number of distinct survey rounds among a country's records.
std::size_t distinct_rounds(std::span<const SurveyRecord> records);

}  // namespace ushape
