#ifndef OOP_TABLE_HPP
#define OOP_TABLE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace oop {

/// Empty cells (monostate) serialize as an empty CSV field and JSON null.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    /// Appends a row; throws std::invalid_argument on a width mismatch.
    void add(std::vector<Cell> row);
};

/// Six significant digits, "%.6g"; non-finite values print as nan, inf, -inf.
std::string format_number(double value);

std::string format_cell(const Cell& cell);

/// RFC-4180 text with a header row.
std::string to_csv(const Table& table);

/// Array of objects keyed by column name. Numbers carry the same six
/// significant digits as the CSV form.
std::string to_json(const Table& table);

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

enum class Format { csv, json };

/// Writes <dir>/<table.name>.<ext> for every requested format.
void write_table(const Table& table, const std::filesystem::path& dir, const std::vector<Format>& formats);

}  // namespace oop

#endif  // OOP_TABLE_HPP
