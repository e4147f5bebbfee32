#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bwl::csv {

/// Number format shared by every emitted table: 17 significant digits.
[[nodiscard]] std::string format_number(double value);

/// Parsed comma-separated table with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name; throws std::out_of_range when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] bool has_column(std::string_view name) const;
    [[nodiscard]] double number(std::size_t row, std::size_t col) const;
};

[[nodiscard]] Table read(std::istream& in);
[[nodiscard]] Table read_file(const std::filesystem::path& path);

/// Writes `content` to `path` in binary mode so that line endings stay LF.
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace bwl::csv
