#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace caufrac::csv {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position of `name`; throws ParseError if absent.
  std::size_t column(const std::string& name) const;
};

/// Splits one line; double quotes group fields containing commas.
std::vector<std::string> split_line(const std::string& line);

/// First non-blank line is the header. Blank lines are skipped; every row
/// must have as many fields as the header (ParseError otherwise).
Table read(std::istream& in);

/// Quotes a field when it contains a comma, quote or space.
std::string escape(const std::string& field);

}  // namespace caufrac::csv
