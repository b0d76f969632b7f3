#include "caufrac/csv.hpp"

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>

#include "caufrac/errors.hpp"

namespace caufrac::csv {

std::size_t Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw ParseError("missing column '" + name + "'");
}

std::vector<std::string> split_line(const std::string& line) {
  using Separator = boost::escaped_list_separator<char>;
  boost::tokenizer<Separator> tokens(line, Separator('\\', ',', '"'));
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(boost::algorithm::trim_copy(t));
  return out;
}

Table read(std::istream& in) {
  Table table;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_line(line);
    } catch (const boost::escaped_list_error& e) {
      throw ParseError("line " + std::to_string(number) + ": " + e.what());
    }
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError("line " + std::to_string(number) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back({number, std::move(fields)});
  }
  if (!have_header) throw ParseError("empty CSV input (no header)");
  return table;
}

std::string escape(const std::string& field) {
  if (field.find_first_of(", \"") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace caufrac::csv
