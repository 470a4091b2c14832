#pragma once

// Canonical JSON: sorted keys, no whitespace, floats at 12 significant digits,
// non-finite floats as the strings "inf", "-inf", "nan".

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entroset/error.hpp"

namespace entroset {

inline constexpr const char* kToolName = "entroset";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s(buf);
  // Keep floats recognisable as such after a round trip.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline void canonical_dump(const nlohmann::json& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // nlohmann::json objects are key-sorted
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(k).dump();
        out += ':';
        canonical_dump(v, out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        canonical_dump(j[i], out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

inline std::string canonical_json(const nlohmann::json& j) {
  std::string s;
  canonical_dump(j, s);
  return s;
}

/// Errors name the path.
inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) throw Error("failed writing '" + path + "'");
}

/// Report envelope with tool version, schema and config echo.
inline nlohmann::json envelope(const std::string& command, const nlohmann::json& config, nlohmann::json result) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"schema", kReportSchema},
          {"command", command},
          {"config", config},
          {"result", std::move(result)}};
}

inline void emit_report(const nlohmann::json& report, const std::string& path) {
  write_text(path, canonical_json(report) + "\n");
}

/// CSV with a header row; cells are written verbatim.
inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return s;
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace entroset
