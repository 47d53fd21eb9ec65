#pragma once

// Minimal CSV dialect used for every file the toolkit reads or writes:
// UTF-8, comma delimiter, double-quoted strings, "." decimal point.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ushape::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column, if present.
    std::optional<std::size_t> column(std::string_view name) const;
    /// Index of a header column; throws DataError when absent.
    std::size_t require(std::string_view name) const;
};

/// Splits one record. Handles quoted fields with embedded commas and doubled quotes.
std::vector<std::string> split_line(std::string_view line);

/// Reads a header row followed by records. Blank lines are skipped; a leading
/// UTF-8 byte-order mark is stripped. Rows shorter than the header are padded.
Table read(std::istream& in);
Table read_file(const std::string& path);

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double value);

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    Writer& text(std::string_view value);
    Writer& number(double value);
    Writer& integer(long long value);
    Writer& boolean(bool value);
    void end_row();

    void header(const std::vector<std::string>& names);

private:
    void separator();

    std::ostream& out_;
    bool first_ = true;
};

}  // namespace ushape::csv
