#include "ushape/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "ushape/error.hpp"

namespace ushape::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

std::size_t Table::require(std::string_view name) const {
    if (auto idx = column(name)) return *idx;
    throw DataError("missing column '" + std::string(name) + "'");
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

Table read(std::istream& in) {
    Table table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!have_header && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() < table.header.size()) fields.resize(table.header.size());
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw DataError("CSV input has no header row");
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read(in);
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, end);
}

void Writer::separator() {
    if (!first_) out_ << ',';
    first_ = false;
}

Writer& Writer::text(std::string_view value) {
    separator();
    out_ << '"';
    for (char c : value) {
        if (c == '"') out_ << '"';
        out_ << c;
    }
    out_ << '"';
    return *this;
}

Writer& Writer::number(double value) {
    separator();
    out_ << format_number(value);
    return *this;
}

Writer& Writer::integer(long long value) {
    separator();
    out_ << value;
    return *this;
}

Writer& Writer::boolean(bool value) {
    separator();
    out_ << (value ? "true" : "false");
    return *this;
}

void Writer::end_row() {
    out_ << '\n';
    first_ = true;
}

void Writer::header(const std::vector<std::string>& names) {
    for (const auto& n : names) text(n);
    end_row();
}

}  // namespace ushape::csv
