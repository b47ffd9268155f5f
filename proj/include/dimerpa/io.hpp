// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Params documents (Hz / dBm at the boundary), dotted-path overrides, CSV output.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dimerpa/types.hpp"
#include "json.hpp"

namespace dimerpa {

inline constexpr const char* version = "1.0.0";
inline constexpr int schema_version = 1;

using json = nlohmann::json;

struct PumpSpec {
  std::optional<double> frequency;  // rad/s; absent -> recentered on the Kerr-shifted modes
  double power_dbm = -200.0;        // set power before the line
  double phase = 0.0;
};

struct Config {
  CircuitParams circuit;
  std::optional<PumpSpec> gain;
  std::optional<PumpSpec> conversion;
  double attenuation_db = 0.0;
};

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::schema, std::string("malformed JSON: ") + e.what());
  }
}

/// key=value with a dotted path; the value is parsed as JSON, falling back to a string.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorCode::invalid_argument, "override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) fail(ErrorCode::schema, "override path crosses a non-object: " + key);
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  (*node)[parts.back()] = value;
}

namespace detail {

inline double get_number(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) fail(ErrorCode::schema, std::string("missing ") + where + "." + key);
  if (!j.at(key).is_number()) fail(ErrorCode::schema, std::string(where) + "." + key + " must be a number");
  return j.at(key).get<double>();
}

inline PumpSpec parse_pump(const json& j, const char* where) {
  if (!j.is_object()) fail(ErrorCode::schema, std::string(where) + " must be an object");
  PumpSpec s;
  s.power_dbm = get_number(j, "P_dBm", where);
  if (j.contains("f_Hz") && !j.at("f_Hz").is_null()) s.frequency = angular(Hz{get_number(j, "f_Hz", where)});
  if (j.contains("phase_rad")) s.phase = get_number(j, "phase_rad", where);
  return s;
}

}  // namespace detail

inline Config parse_config(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::schema, "params document must be an object");
  if (!doc.contains("schema_version")) fail(ErrorCode::schema, "missing schema_version");
  if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != schema_version)
    fail(ErrorCode::schema, "unsupported schema_version");
  if (!doc.contains("circuit")) fail(ErrorCode::schema, "missing circuit");
  const json& c = doc.at("circuit");
  Config cfg;
  cfg.circuit.omega_L = angular(Hz{detail::get_number(c, "f_L_Hz", "circuit")});
  cfg.circuit.omega_R = angular(Hz{detail::get_number(c, "f_R_Hz", "circuit")});
  cfg.circuit.J = angular(Hz{detail::get_number(c, "J_Hz", "circuit")});
  cfg.circuit.kappa = angular(Hz{detail::get_number(c, "kappa_Hz", "circuit")});
  cfg.circuit.gamma = c.contains("gamma_Hz") ? angular(Hz{detail::get_number(c, "gamma_Hz", "circuit")}) : 0.0;
  cfg.circuit.K_L = angular(Hz{detail::get_number(c, "K_L_Hz", "circuit")});
  cfg.circuit.K_R = angular(Hz{detail::get_number(c, "K_R_Hz", "circuit")});
  try {
    cfg.circuit.validate();
  } catch (const Error& e) {
    fail(ErrorCode::schema, e.what());
  }
  if (doc.contains("pumps")) {
    const json& p = doc.at("pumps");
    if (p.contains("gain")) cfg.gain = detail::parse_pump(p.at("gain"), "pumps.gain");
    if (p.contains("conversion")) cfg.conversion = detail::parse_pump(p.at("conversion"), "pumps.conversion");
    if (p.contains("attenuation_dB")) cfg.attenuation_db = detail::get_number(p, "attenuation_dB", "pumps");
  }
  return cfg;
}

inline json to_json(const CircuitParams& p) {
  return json{{"f_L_Hz", to_hz(p.omega_L).value}, {"f_R_Hz", to_hz(p.omega_R).value},
              {"J_Hz", to_hz(p.J).value},         {"kappa_Hz", to_hz(p.kappa).value},
              {"gamma_Hz", to_hz(p.gamma).value}, {"K_L_Hz", to_hz(p.K_L).value},
              {"K_R_Hz", to_hz(p.K_R).value}};
}

/// FNV-1a 64 over the canonical (key-sorted) dump.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const json& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& hash, std::span<const std::string> header)
      : out_(path), columns_(header.size()) {
    if (!out_) fail(ErrorCode::io, "cannot write " + path.string());
    out_ << "# tool=dimerpa " << version << "; config_hash=" << hash << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(std::span<const double> values) {
    require(values.size() == columns_, "CSV row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
  }

  /// Mixed row: pre-formatted cells.
  void row(std::span<const std::string> cells) {
    require(cells.size() == columns_, "CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

inline void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace dimerpa
