#pragma once

// Follower best-response functions: the volume an AP offloads against fixed
// rival volumes, for each incentive scheme.

#include <algorithm>
#include <cmath>
#include <span>

#include "offload/model.hpp"

namespace offload {

// Shorthands of the follower's first-order condition: a is the net marginal
// cost under the salary, z the quality-weighted volume of everyone else.
struct ResponseContext {
  double a = 0.0;
  double z = 0.0;
};

inline ResponseContext response_context(int i, std::span<const ApProfile> aps,
                                        const Allocation& d, const Offer& offer) {
  ResponseContext ctx;
  ctx.a = aps[i].cost - offer.salary_rate;
  for (std::size_t j = 0; j < aps.size(); ++j)
    if (static_cast<int>(j) != i) ctx.z += aps[j].quality * d[j];
  return ctx;
}

// Salary-plus-bonus best response. Three regimes: the pool is too small to
// beat the net cost (stay out), large enough to saturate capacity, or an
// interior stationary point of the concave payoff. With no rival volume the
// share formula collapses and the response is 0 for a > 0.
inline double best_response_spb(int i, const Allocation& others, const Offer& offer,
                                std::span<const ApProfile> aps) {
  const auto [a, z] = response_context(i, aps, others, offer);
  const double w = aps[i].quality;
  const double cap = aps[i].capacity;
  const double bonus = offer.bonus;
  if (a <= 0.0) return cap;  // salary covers the cost; offload everything
  if (bonus * w <= a * z) return 0.0;
  const double edge = z + w * cap;
  if (bonus * w * z >= a * edge * edge) return cap;
  const double interior = std::sqrt(bonus * z / (a * w)) - z / w;
  return std::clamp(interior, 0.0, cap);
}

// Salary-only: a pure threshold on the rate, independent of the rivals.
inline double best_response_salary(int i, const Offer& offer,
                                   std::span<const ApProfile> aps) {
  return offer.salary_rate >= aps[i].cost ? aps[i].capacity : 0.0;
}

// Bonus-only: interior stationary point of the penalized payoff, floored at
// zero. No upper clamp; the overrun charge replaces the capacity constraint.
inline double best_response_bonus(int i, const Allocation& others, double bonus,
                                  std::span<const ApProfile> aps) {
  double z = 0.0;
  for (std::size_t j = 0; j < aps.size(); ++j)
    if (static_cast<int>(j) != i) z += aps[j].quality * others[j];
  if (z <= 0.0 || bonus <= 0.0) return 0.0;
  const double w = aps[i].quality;
  const double k = aps[i].cost + aps[i].penalty;
  return std::max(0.0, std::sqrt(bonus * z / (w * k)) - z / w);
}

inline double best_response(int i, const Allocation& d, const Offer& offer,
                            std::span<const ApProfile> aps, Scheme scheme) {
  switch (scheme) {
    case Scheme::SalaryPlusBonus: return best_response_spb(i, d, offer, aps);
    case Scheme::SalaryOnly: return best_response_salary(i, offer, aps);
    case Scheme::BonusOnly: return best_response_bonus(i, d, offer.bonus, aps);
  }
  return 0.0;
}

}  // namespace offload
