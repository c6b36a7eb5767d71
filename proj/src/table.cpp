#include "oop/table.hpp"

#include "oop/csv.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace oop {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("table '" + name + "': row has " + std::to_string(row.size()) +
                                    " cells, expected " + std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string format_cell(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::monostate>) {
                return {};
            } else if constexpr (std::is_same_v<V, std::int64_t>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<V, double>) {
                return format_number(v);
            } else {
                return v;
            }
        },
        cell);
}

std::string to_csv(const Table& table) {
    std::string out = csv::join(table.columns) + "\n";
    csv::Row fields;
    for (const auto& row : table.rows) {
        fields.clear();
        for (const auto& cell : row) fields.push_back(format_cell(cell));
        out += csv::join(fields) + "\n";
    }
    return out;
}

std::string to_json(const Table& table) {
    using nlohmann::ordered_json;
    ordered_json doc = ordered_json::array();
    for (const auto& row : table.rows) {
        ordered_json obj = ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            const Cell& cell = row[c];
            ordered_json value;
            if (const auto* d = std::get_if<double>(&cell)) {
                // Round through the CSV text so both formats carry the same value.
                if (std::isfinite(*d)) value = std::stod(format_number(*d));
            } else if (const auto* i = std::get_if<std::int64_t>(&cell)) {
                value = *i;
            } else if (const auto* s = std::get_if<std::string>(&cell)) {
                value = *s;
            }
            obj[table.columns[c]] = std::move(value);
        }
        doc.push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot move " + tmp.string() + " into place");
    }
}

void write_table(const Table& table, const std::filesystem::path& dir, const std::vector<Format>& formats) {
    for (Format f : formats) {
        if (f == Format::csv) write_atomic(dir / (table.name + ".csv"), to_csv(table));
        if (f == Format::json) write_atomic(dir / (table.name + ".json"), to_json(table));
    }
}

}  // namespace oop
