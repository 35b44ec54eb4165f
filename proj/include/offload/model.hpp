#pragma once

// Utility functions of the followers (WiFi APs) and the leader (the MNO).
// Everything downstream — best responses, equilibria, leader searches — is
// expressed in terms of these.

#include <cmath>
#include <cstddef>
#include <span>

#include "offload/types.hpp"

namespace offload {

// Total quality-weighted volume, the denominator of the bonus split.
inline double weighted_volume(std::span<const ApProfile> aps, const Allocation& d) {
  double s = 0.0;
  for (std::size_t j = 0; j < aps.size(); ++j) s += aps[j].quality * d[j];
  return s;
}

inline double total_volume(const Allocation& d) {
  double s = 0.0;
  for (double v : d) s += v;
  return s;
}

// Quality-weighted proportional share of the bonus pool. An all-zero profile
// pays nobody (the 0/0 share is defined as 0).
inline double bonus_share(double bonus, std::span<const ApProfile> aps,
                          const Allocation& d, int i) {
  const double denom = weighted_volume(aps, d);
  if (denom <= 0.0) return 0.0;
  return bonus * aps[i].quality * d[i] / denom;
}

// Follower payoff. The bonus-only variant replaces the capacity constraint
// with a per-unit overrun charge; note the charge turns into a reward when
// the AP stays below its limit.
inline double ap_utility(int i, const Allocation& d, const Offer& offer,
                         std::span<const ApProfile> aps, Scheme scheme) {
  const ApProfile& ap = aps[i];
  switch (scheme) {
    case Scheme::SalaryPlusBonus:
      return (offer.salary_rate - ap.cost) * d[i] + bonus_share(offer.bonus, aps, d, i);
    case Scheme::SalaryOnly:
      return (offer.salary_rate - ap.cost) * d[i];
    case Scheme::BonusOnly:
      return bonus_share(offer.bonus, aps, d, i) - ap.cost * d[i] -
             ap.penalty * (d[i] - ap.capacity);
  }
  return 0.0;
}

// Concave offloading gain, zero exactly when nothing is offloaded.
inline double offloading_gain(const Allocation& d) {
  return std::log1p(total_volume(d));
}

// Leader payoff: monetized offloading gain minus the salary bill and the
// bonus pool. The reduced schemes zero out the term they do not use.
inline double mno_utility(const Offer& offer, const Allocation& d,
                          const MnoParams& params, Scheme scheme) {
  const double volume = total_volume(d);
  double u = params.gain_coefficient * std::log1p(volume);
  if (scheme != Scheme::BonusOnly) u -= offer.salary_rate * volume;
  if (scheme != Scheme::SalaryOnly) u -= offer.bonus;
  return u;
}

}  // namespace offload
