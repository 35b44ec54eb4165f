#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace offload {

// One WiFi access point offering spare capacity to the operator.
struct ApProfile {
  int id = 0;
  double cost = 1.0;      // operating cost per unit of offloaded data
  double quality = 1.0;   // offloading service quality, in (0, 1]
  double capacity = 0.0;  // spare data volume available for offloading
  double penalty = 0.0;   // per-unit overrun charge (bonus-only scheme)
};

// Terms announced by the operator: a per-unit salary rate and a bonus pool
// split among the participating APs.
struct Offer {
  double salary_rate = 0.0;
  double bonus = 0.0;
};

struct MnoParams {
  double gain_coefficient = 1.0;  // converts the log offloading gain into money
};

enum class Scheme { SalaryPlusBonus, SalaryOnly, BonusOnly };

// Strategy profile: d[i] is the volume AP i offloads, indexed by ApProfile::id.
using Allocation = std::vector<double>;

inline std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::SalaryPlusBonus: return "salary-plus-bonus";
    case Scheme::SalaryOnly: return "salary-only";
    case Scheme::BonusOnly: return "bonus-only";
  }
  return "?";
}

// Default overrun charge when a profile does not specify one: the inverse of
// the offloading limit.
inline double default_penalty(double capacity) { return 1.0 / capacity; }

inline void validate_offer(const Offer& offer) {
  if (!(offer.salary_rate >= 0.0) || !(offer.bonus >= 0.0))
    throw std::invalid_argument("offer: salary rate and bonus must be >= 0");
}

inline void validate_profiles(std::span<const ApProfile> aps) {
  for (std::size_t i = 0; i < aps.size(); ++i) {
    const ApProfile& ap = aps[i];
    if (!(ap.cost > 0.0))
      throw std::invalid_argument("ap " + std::to_string(i) + ": cost must be > 0");
    if (!(ap.quality > 0.0))
      throw std::invalid_argument("ap " + std::to_string(i) + ": quality must be > 0");
    if (!(ap.capacity >= 0.0))
      throw std::invalid_argument("ap " + std::to_string(i) + ": capacity must be >= 0");
    if (!(ap.penalty >= 0.0))
      throw std::invalid_argument("ap " + std::to_string(i) + ": penalty must be >= 0");
  }
}

}  // namespace offload
