// CSV output for the experiment harness: a header row, numbers at 9
// significant digits, and fields quoted only when they contain a comma,
// quote, CR or LF (quotes are doubled).
#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace photocount::cli {

struct Empty {};
using Cell = std::variant<Empty, double, std::int64_t, std::string, bool>;

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string render(const Cell& c) {
  struct Visitor {
    std::string operator()(Empty) const { return {}; }
    std::string operator()(double x) const { return format_number(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(const std::string& s) const { return quote_field(s); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  /// Row length must equal the header length.
  void add(std::vector<Cell> row);

  void write(std::ostream& os) const {
    write_line(os, header_);
    for (const auto& row : rows_) {
      std::vector<std::string> fields;
      fields.reserve(row.size());
      for (const auto& c : row) fields.push_back(render(c));
      write_raw(os, fields);
    }
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& fields) {
    std::vector<std::string> quoted;
    for (const auto& f : fields) quoted.push_back(quote_field(f));
    write_raw(os, quoted);
  }
  static void write_raw(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os << ',';
      os << fields[i];
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

inline void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size())
    throw std::logic_error("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                           std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

}  // namespace photocount::cli
