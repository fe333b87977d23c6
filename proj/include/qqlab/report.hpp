#ifndef QQLAB_REPORT_HPP_
#define QQLAB_REPORT_HPP_

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "qqlab/check_report.hpp"

namespace qqlab {

inline constexpr std::string_view kVersion = "0.1.0";

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double failed");
  }
  return std::string(buf.data(), res.ptr);
}

/// RFC 4180 field: quoted only when it holds a comma, quote or line break.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  CsvTable &row(const std::vector<std::string> &cells) {
    if (cells.size() != header_.size()) {
      throw std::invalid_argument("CSV row width does not match header");
    }
    rows_.push_back(cells);
    return *this;
  }

  CsvTable &row(const std::vector<double> &cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) {
      s.push_back(format_double(v));
    }
    return row(s);
  }

  std::size_t rows() const { return rows_.size(); }

  void write(std::ostream &os) const {
    write_line(os, header_);
    for (const auto &r : rows_) {
      write_line(os, r);
    }
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

private:
  static void write_line(std::ostream &os, const std::vector<std::string> &r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) {
        os << ',';
      }
      os << csv_field(r[i]);
    }
    os << "\r\n";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline nlohmann::json to_json(const ReportValue &v) {
  if (const auto *d = std::get_if<double>(&v)) {
    if (!std::isfinite(*d)) {
      return format_double(*d);
    }
    return *d;
  }
  return std::get<std::string>(v);
}

inline nlohmann::json to_json(const CheckReport &r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["value"] = to_json(r.value);
  j["reference"] = to_json(r.reference);
  j["tolerance"] = r.tolerance;
  j["relation"] = to_string(r.relation);
  j["pass"] = r.pass;
  j["provenance"] = to_string(r.provenance);
  if (!r.note.empty()) {
    j["note"] = r.note;
  }
  return j;
}

inline nlohmann::json to_json(const std::vector<CheckReport> &reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &r : reports) {
    arr.push_back(to_json(r));
  }
  return arr;
}

/// Serialized form used for every emitted JSON document.
inline std::string dump(const nlohmann::json &j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  f << content;
  if (!f) {
    throw std::runtime_error("write to " + path + " failed");
  }
}

} // namespace qqlab

#endif // QQLAB_REPORT_HPP_
