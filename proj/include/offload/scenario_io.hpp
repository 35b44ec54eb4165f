#pragma once

// The scenario-file schema: a JSON object with the AP population, the gain
// coefficient, and optionally a scheme and a fixed offer. Unknown keys are
// rejected so typos fail loudly.

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "offload/types.hpp"

namespace offload {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioFile {
  std::vector<ApProfile> aps;
  MnoParams params;
  std::optional<Scheme> scheme;
  std::optional<Offer> offer;
};

inline Scheme parse_scheme(std::string_view s) {
  if (s == "spb" || s == "salary-plus-bonus") return Scheme::SalaryPlusBonus;
  if (s == "salary" || s == "salary-only") return Scheme::SalaryOnly;
  if (s == "bonus" || s == "bonus-only") return Scheme::BonusOnly;
  throw ScenarioError("unknown scheme '" + std::string(s) +
                      "' (expected spb|salary|bonus)");
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::string_view where,
                                std::initializer_list<std::string_view> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ScenarioError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

inline double require_number(const nlohmann::json& obj, const std::string& where,
                             const std::string& key) {
  if (!obj.contains(key)) throw ScenarioError(where + ": missing key '" + key + "'");
  if (!obj[key].is_number()) throw ScenarioError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

}  // namespace detail

inline ScenarioFile parse_scenario_file(const nlohmann::json& j) {
  if (!j.is_object()) throw ScenarioError("scenario: expected a JSON object");
  detail::reject_unknown_keys(j, "scenario", {"aps", "gain_coefficient", "scheme", "offer"});

  ScenarioFile file;
  if (!j.contains("aps") || !j["aps"].is_array() || j["aps"].empty())
    throw ScenarioError("scenario.aps: expected a non-empty array");
  int id = 0;
  for (const auto& entry : j["aps"]) {
    const std::string where = "aps[" + std::to_string(id) + "]";
    if (!entry.is_object()) throw ScenarioError(where + ": expected an object");
    detail::reject_unknown_keys(entry, where, {"cost", "quality", "capacity", "penalty"});
    ApProfile ap;
    ap.id = id++;
    ap.cost = detail::require_number(entry, where, "cost");
    ap.quality = detail::require_number(entry, where, "quality");
    ap.capacity = detail::require_number(entry, where, "capacity");
    if (!(ap.cost > 0.0)) throw ScenarioError(where + ".cost: must be > 0");
    if (!(ap.quality > 0.0)) throw ScenarioError(where + ".quality: must be > 0");
    if (!(ap.capacity >= 0.0)) throw ScenarioError(where + ".capacity: must be >= 0");
    if (entry.contains("penalty")) {
      ap.penalty = detail::require_number(entry, where, "penalty");
      if (!(ap.penalty >= 0.0)) throw ScenarioError(where + ".penalty: must be >= 0");
    } else if (ap.capacity > 0.0) {
      ap.penalty = default_penalty(ap.capacity);
    } else {
      throw ScenarioError(where + ": penalty is required when capacity is 0");
    }
    file.aps.push_back(ap);
  }

  file.params.gain_coefficient = detail::require_number(j, "scenario", "gain_coefficient");
  if (!(file.params.gain_coefficient > 0.0))
    throw ScenarioError("scenario.gain_coefficient: must be > 0");

  if (j.contains("scheme")) {
    if (!j["scheme"].is_string()) throw ScenarioError("scenario.scheme: expected a string");
    file.scheme = parse_scheme(j["scheme"].get<std::string>());
  }
  if (j.contains("offer")) {
    const auto& o = j["offer"];
    if (!o.is_object()) throw ScenarioError("scenario.offer: expected an object");
    detail::reject_unknown_keys(o, "offer", {"p", "B"});
    Offer offer;
    offer.salary_rate = detail::require_number(o, "offer", "p");
    offer.bonus = detail::require_number(o, "offer", "B");
    if (!(offer.salary_rate >= 0.0)) throw ScenarioError("offer.p: must be >= 0");
    if (!(offer.bonus >= 0.0)) throw ScenarioError("offer.B: must be >= 0");
    file.offer = offer;
  }
  return file;
}

inline ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  return parse_scenario_file(j);
}

inline nlohmann::ordered_json to_json(const ScenarioFile& file) {
  nlohmann::ordered_json j;
  j["aps"] = nlohmann::ordered_json::array();
  for (const auto& ap : file.aps) {
    j["aps"].push_back({{"cost", ap.cost},
                        {"quality", ap.quality},
                        {"capacity", ap.capacity},
                        {"penalty", ap.penalty}});
  }
  j["gain_coefficient"] = file.params.gain_coefficient;
  if (file.scheme) j["scheme"] = std::string(scheme_name(*file.scheme));
  if (file.offer) j["offer"] = {{"p", file.offer->salary_rate}, {"B", file.offer->bonus}};
  return j;
}

}  // namespace offload
