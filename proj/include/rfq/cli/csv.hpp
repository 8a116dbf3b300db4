#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "rfq/error.hpp"

namespace rfq::cli {

/// Shortest decimal that round-trips, independent of the global locale.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string quote_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

using Cell = std::variant<double, long long, std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row) {
    if (row.size() != header_.size())
      fail(ErrorCode::InvalidArgument, "CSV row width differs from header");
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const noexcept { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&](auto&& cells, auto&& render) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out += ',';
        out += render(cells[k]);
      }
      out += "\r\n";
    };
    line(header_, [](const std::string& h) { return quote_field(h); });
    for (const auto& r : rows_)
      line(r, [](const Cell& c) {
        if (auto d = std::get_if<double>(&c)) return format_number(*d);
        if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
        return quote_field(std::get<std::string>(c));
      });
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::InvalidArgument, "cannot open output file", path);
    f << str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace rfq::cli
