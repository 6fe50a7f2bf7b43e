#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace so5lab {

/// Outcome of one identity check: the worst residual plus a labelled breakdown.
struct ViolationReport {
  ViolationReport() = default;
  explicit ViolationReport(std::string name) : check(std::move(name)) {}

  std::string check;
  double max_violation = 0.0;
  std::vector<std::pair<std::string, double>> breakdown;

  void record(std::string label, double value) {
    max_violation = std::max(max_violation, value);
    breakdown.emplace_back(std::move(label), value);
  }
  void absorb(double value) { max_violation = std::max(max_violation, value); }
};

inline void to_json(nlohmann::ordered_json& j, const ViolationReport& r) {
  j = nlohmann::ordered_json{{"check", r.check}, {"max_violation", r.max_violation}};
  auto parts = nlohmann::ordered_json::array();
  for (const auto& [label, value] : r.breakdown) parts.push_back({{"label", label}, {"value", value}});
  j["breakdown"] = std::move(parts);
}

inline constexpr int REPORT_SCHEMA_VERSION = 1;

/// One row of a suite report.
struct CheckRecord {
  std::string suite;
  std::string equation_tag;
  std::string params_digest;
  double max_violation = 0.0;
  double threshold = 0.0;
  bool pass = false;
  /// Free-form findings attached to the record (never affects `pass`).
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

inline void to_json(nlohmann::ordered_json& j, const CheckRecord& r) {
  j = nlohmann::ordered_json{{"suite", r.suite},
                             {"equation_tag", r.equation_tag},
                             {"params_digest", r.params_digest},
                             {"max_violation", r.max_violation},
                             {"threshold", r.threshold},
                             {"pass", r.pass}};
  if (!r.details.empty()) j["details"] = r.details;
}

struct Report {
  std::string suite;
  std::vector<CheckRecord> records;

  [[nodiscard]] bool pass() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
  }
};

inline void to_json(nlohmann::ordered_json& j, const Report& r) {
  j = nlohmann::ordered_json{{"schema_version", REPORT_SCHEMA_VERSION}, {"suite", r.suite}, {"pass", r.pass()}};
  j["records"] = r.records;
}

/// 64-bit FNV-1a digest rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace so5lab
