#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "cwmap/error.hpp"

// Helpers for the text formats (scenes, predictions, configs). Writing is
// done by hand so numbers always carry 17 significant digits and the byte
// layout is stable; parsing goes through nlohmann::json.

namespace cwmap::textio {

inline std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json parse(const std::string& text, const std::string& context) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Err::ParseError, context + ": malformed document");
  return j;
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* key,
                                   const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) fail(Err::ParseError, context + ": missing key '" + key + "'");
  return *it;
}

inline double num_field(const nlohmann::json& j, const char* key,
                        const std::string& context) {
  const auto& f = field(j, key, context);
  if (!f.is_number()) fail(Err::ParseError, context + ": key '" + key + "' not a number");
  return f.get<double>();
}

inline std::string str_field(const nlohmann::json& j, const char* key,
                             const std::string& context) {
  const auto& f = field(j, key, context);
  if (!f.is_string()) fail(Err::ParseError, context + ": key '" + key + "' not a string");
  return f.get<std::string>();
}

}  // namespace cwmap::textio
