#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "so5lab/model.hpp"

namespace so5lab {

enum class OutputFormat { json, csv };

/// Everything a suite run needs. Physical parameters come from here only.
struct RunConfig {
  CouplingConfig couplings;
  std::optional<ThetaMatrix> theta_override;
  /// Unset: each suite picks its own lattice size.
  std::optional<int> L;
  std::vector<Occupation> sectors;
  /// Threshold for spectral comparisons, quantization residuals, the gauge-scan
  /// baseline and the generic Drinfeld relations. Identity checks with a fixed
  /// exactness threshold ignore it.
  double tolerance = 1e-10;
  std::uint64_t seed = 7;
  /// Random draws per suite; unset means the suite default.
  std::optional<int> samples;
  double h = 1.0;
  std::string output;  // empty: stdout
  /// Unset: json for reports, csv for the table-producing commands.
  std::optional<OutputFormat> format;
  bool parallel = false;
  /// "off", "sample" or "exhaustive": generic Drinfeld relations in the yangian suite.
  std::string drinfeld = "off";

  /// Throws InvalidConfig naming the violated invariant.
  void validate() const {
    if (!(tolerance > 0.0)) throw InvalidConfig("tolerance must be > 0, got " + std::to_string(tolerance));
    if (L && *L < 1) throw InvalidConfig("L must be >= 1, got " + std::to_string(*L));
    if (samples && *samples < 0) throw InvalidConfig("samples must be >= 0");
    if (drinfeld != "off" && drinfeld != "sample" && drinfeld != "exhaustive")
      throw InvalidConfig("drinfeld must be off, sample or exhaustive, got '" + drinfeld + "'");
    for (const auto& s : sectors)
      for (int f = 0; f < NUM_FLAVORS; ++f)
        if (s[f] < 0 || (L && s[f] > *L))
          throw InvalidConfig("sector " + s.to_string() + " is not valid for L = " + std::to_string(L.value_or(0)));
    couplings.validate();
  }
};

inline const char* to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

inline OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  throw InvalidConfig("format must be json or csv, got '" + s + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_numbers(const std::string& key, std::string text) {
  for (char& ch : text)
    if (ch == ',') ch = ' ';
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidConfig("key '" + key + "': '" + tok + "' is not a number");
    }
  }
  return out;
}

inline double parse_one(const std::string& key, const std::string& text) {
  const auto v = parse_numbers(key, text);
  if (v.size() != 1) throw InvalidConfig("key '" + key + "' expects one number");
  return v[0];
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_one(key, text);
  if (v != static_cast<double>(static_cast<long long>(v))) throw InvalidConfig("key '" + key + "' expects an integer");
  return static_cast<long long>(v);
}

inline Occupation parse_occupation(const std::string& key, const std::string& text) {
  const auto v = parse_numbers(key, text);
  if (v.size() != NUM_FLAVORS) throw InvalidConfig("key '" + key + "': a sector needs four occupation numbers");
  Occupation o;
  for (int f = 0; f < NUM_FLAVORS; ++f) {
    if (v[f] != static_cast<double>(static_cast<int>(v[f])))
      throw InvalidConfig("key '" + key + "': occupations must be integers");
    o.n[static_cast<std::size_t>(f)] = static_cast<int>(v[f]);
  }
  return o;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidConfig("key '" + key + "' expects true or false");
}

inline ThetaMatrix theta_from_upper_values(const std::string& key, const std::vector<double>& v) {
  if (v.size() != 6) throw InvalidConfig("key '" + key + "' expects six angles theta12 theta13 theta14 theta23 theta24 theta34");
  return ThetaMatrix::from_upper({v[0], v[1], v[2], v[3], v[4], v[5]});
}

inline void apply_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "L") {
    cfg.L = static_cast<int>(parse_integer(key, value));
  } else if (key == "v") {
    cfg.couplings.v = parse_one(key, value);
  } else if (key == "g") {
    cfg.couplings.g = parse_one(key, value);
  } else if (key == "C") {
    const auto v = parse_numbers(key, value);
    if (v.size() != NUM_FLAVORS) throw InvalidConfig("key 'C' expects four numbers");
    for (int f = 0; f < NUM_FLAVORS; ++f) cfg.couplings.C[static_cast<std::size_t>(f)] = v[f];
  } else if (key.size() == 3 && key[0] == 'C' && key[1] >= '1' && key[1] <= '4' && key[2] >= '1' && key[2] <= '4') {
    const int i = key[1] - '0', j = key[2] - '0';
    if (i == j) throw InvalidConfig("C_" + key.substr(1) + " must be zero");
    cfg.couplings.set_pair(i, j, parse_one(key, value));
  } else if (key == "theta") {
    cfg.theta_override = theta_from_upper_values(key, parse_numbers(key, value));
  } else if (key == "sectors") {
    cfg.sectors.clear();
    std::istringstream in(value);
    std::string part;
    while (std::getline(in, part, ';'))
      if (!trim(part).empty()) cfg.sectors.push_back(parse_occupation(key, part));
  } else if (key == "tolerance") {
    cfg.tolerance = parse_one(key, value);
  } else if (key == "seed") {
    const long long s = parse_integer(key, value);
    if (s < 0) throw InvalidConfig("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "samples") {
    cfg.samples = static_cast<int>(parse_integer(key, value));
  } else if (key == "h") {
    cfg.h = parse_one(key, value);
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "format") {
    cfg.format = parse_format(value);
  } else if (key == "parallel") {
    cfg.parallel = parse_bool(key, value);
  } else if (key == "drinfeld") {
    cfg.drinfeld = value;
  } else {
    throw InvalidConfig("unknown key '" + key + "'");
  }
}

}  // namespace detail

/// Parses the key-value format: one `key = value` per line, `#` starts a comment.
/// Lists are whitespace or comma separated; `sectors` separates tuples with `;`.
inline RunConfig parse_key_value(const std::string& text, RunConfig cfg = {}) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
    detail::apply_entry(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

/// JSON variant: the same keys as an object. Lists are arrays, `sectors` is an
/// array of 4-arrays and `theta` is either six upper angles or a 4x4 matrix.
inline RunConfig parse_json_config(const nlohmann::json& j, RunConfig cfg = {}) {
  if (!j.is_object()) throw InvalidConfig("JSON config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "theta" && value.is_array() && !value.empty() && value[0].is_array()) {
      try {
        cfg.theta_override = value.get<ThetaMatrix>();
      } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("key 'theta': ") + e.what());
      }
      continue;
    }
    if (key == "sectors") {
      cfg.sectors.clear();
      for (const auto& s : value) cfg.sectors.push_back(detail::parse_occupation(key, s.dump()));
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_array()) {
      for (const auto& x : value) text += x.dump() + " ";
    } else {
      text = value.dump();
    }
    detail::apply_entry(cfg, key, detail::trim(text));
  }
  return cfg;
}

/// Loads a `.json` file as JSON and anything else as key-value text.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    try {
      return parse_json_config(nlohmann::json::parse(buf.str()));
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidConfig("config '" + path + "': " + e.what());
    }
  }
  return parse_key_value(buf.str());
}

/// Canonical JSON of the physical parameters, used for report digests.
inline nlohmann::ordered_json config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  if (cfg.L) j["L"] = *cfg.L;
  j["v"] = cfg.couplings.v;
  j["g"] = cfg.couplings.g;
  j["C"] = cfg.couplings.C;
  j["Cij"] = cfg.couplings.Cij;
  if (cfg.theta_override) j["theta"] = *cfg.theta_override;
  auto sectors = nlohmann::ordered_json::array();
  for (const auto& s : cfg.sectors) sectors.push_back(s.n);
  j["sectors"] = sectors;
  j["tolerance"] = cfg.tolerance;
  j["seed"] = cfg.seed;
  if (cfg.samples) j["samples"] = *cfg.samples;
  j["h"] = cfg.h;
  return j;
}

}  // namespace so5lab
