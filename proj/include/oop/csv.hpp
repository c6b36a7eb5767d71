#ifndef OOP_CSV_HPP
#define OOP_CSV_HPP

#include <istream>
#include <string>
#include <vector>

namespace oop::csv {

using Row = std::vector<std::string>;

/// Reads RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
/// Blank lines are skipped.
std::vector<Row> read(std::istream& in);

/// Quotes a field if it contains a comma, quote, CR or LF.
std::string escape(const std::string& field);

std::string join(const Row& row);

}  // namespace oop::csv

#endif  // OOP_CSV_HPP
