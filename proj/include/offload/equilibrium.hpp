#pragma once

// Follower-side subgame Nash equilibria for every scheme, plus a deviation
// check that certifies a profile as an equilibrium.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "offload/response.hpp"

namespace offload {

enum class NeMethod {
  ClosedFormHomogeneous,
  TwoApCases,
  Iterative,
  Algorithm2,
  Algorithm3,
  SalaryThreshold,
};

inline std::string_view to_string(NeMethod m) {
  switch (m) {
    case NeMethod::ClosedFormHomogeneous: return "closed-form-homogeneous";
    case NeMethod::TwoApCases: return "two-ap-cases";
    case NeMethod::Iterative: return "iterative";
    case NeMethod::Algorithm2: return "algorithm2";
    case NeMethod::Algorithm3: return "algorithm3";
    case NeMethod::SalaryThreshold: return "salary-threshold";
  }
  return "?";
}

// Follower-side outcome at a fixed offer.
struct EquilibriumReport {
  Allocation allocation;
  std::vector<int> active_set;  // indices with a strictly positive volume
  std::vector<double> per_ap_utility;
  bool converged = false;
  int iterations = 0;
  NeMethod method = NeMethod::Iterative;
};

inline EquilibriumReport make_report(Allocation d, const Offer& offer,
                                     std::span<const ApProfile> aps, Scheme scheme,
                                     NeMethod method, bool converged, int iterations) {
  EquilibriumReport r;
  r.allocation = std::move(d);
  r.per_ap_utility.reserve(aps.size());
  for (std::size_t i = 0; i < aps.size(); ++i) {
    r.per_ap_utility.push_back(ap_utility(static_cast<int>(i), r.allocation, offer, aps, scheme));
    if (r.allocation[i] > 0.0) r.active_set.push_back(static_cast<int>(i));
  }
  r.converged = converged;
  r.iterations = iterations;
  r.method = method;
  return r;
}

namespace detail {

inline std::vector<ApProfile> uniform_profiles(int n, double cost, double quality,
                                               double capacity) {
  std::vector<ApProfile> aps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    aps[i] = ApProfile{i, cost, quality, capacity, capacity > 0.0 ? 1.0 / capacity : 0.0};
  return aps;
}

}  // namespace detail

// Symmetric equilibrium when every AP shares the same cost, quality and
// capacity: everyone at capacity once the salary covers the cost, otherwise
// the common interior volume capped at the offloading limit.
inline EquilibriumReport ne_homogeneous(int n, double cost, double quality,
                                        double capacity, const Offer& offer) {
  if (n < 2) throw std::invalid_argument("ne_homogeneous: at least two APs required");
  const double a = cost - offer.salary_rate;
  double d = capacity;
  if (a > 0.0) {
    const double nn = static_cast<double>(n);
    d = (offer.bonus / a < nn * nn * capacity / (nn - 1.0))
            ? offer.bonus * (nn - 1.0) / (a * nn * nn)
            : capacity;
  }
  const auto aps = detail::uniform_profiles(n, cost, quality, capacity);
  return make_report(Allocation(static_cast<std::size_t>(n), d), offer, aps,
                     Scheme::SalaryPlusBonus, NeMethod::ClosedFormHomogeneous, true, 0);
}

// Two heterogeneous APs, salary-plus-bonus: the full case split on the offer.
// Throughout, index 1 is the cheaper AP. All region boundaries are evaluated
// in cross-multiplied form so zero capacities stay well defined.
inline EquilibriumReport ne_two_ap(std::span<const ApProfile> aps, const Offer& offer) {
  if (aps.size() != 2) throw std::invalid_argument("ne_two_ap: exactly two APs required");
  if (aps[0].cost == aps[1].cost)
    throw std::invalid_argument("ne_two_ap: equal costs; use ne_iterative");
  const int lo = aps[0].cost < aps[1].cost ? 0 : 1;
  const int hi = 1 - lo;
  const double c1 = aps[lo].cost, c2 = aps[hi].cost;
  const double w1 = aps[lo].quality, w2 = aps[hi].quality;
  const double t1 = aps[lo].capacity, t2 = aps[hi].capacity;
  const double p = offer.salary_rate;
  const double bonus = offer.bonus;
  const double a1 = c1 - p, a2 = c2 - p;
  const double mixed = w1 * t1 + w2 * t2;

  double d1 = 0.0, d2 = 0.0;
  if (p >= c2) {  // Case I: salary covers both costs
    d1 = t1;
    d2 = t2;
  } else if (p >= c1) {  // Case II: only the cheaper AP is salary-covered
    if (bonus * w2 < a2 * w1 * t1) {
      d1 = t1;
      d2 = 0.0;
    } else if (bonus * w1 * w2 * t1 < a2 * mixed * mixed) {
      d1 = t1;
      d2 = std::sqrt(bonus * w1 * t1 / (w2 * a2)) - w1 * t1 / w2;
    } else {
      d1 = t1;
      d2 = t2;
    }
  } else {  // Cases III/IV: both below cost; who saturates first depends on a_i T_i
    const double s = w1 * a2 + w2 * a1;
    if (a1 * t1 <= a2 * t2) {  // cheaper AP reaches its limit first
      if (bonus * w1 * w2 * a2 < s * s * t1) {
        d1 = bonus * w1 * w2 * a2 / (s * s);
        d2 = bonus * w1 * w2 * a1 / (s * s);
      } else if (bonus * w1 * w2 * t1 < a2 * mixed * mixed) {
        d1 = t1;
        d2 = std::sqrt(bonus * w1 * t1 / (w2 * a2)) - w1 * t1 / w2;
      } else {
        d1 = t1;
        d2 = t2;
      }
    } else {
      if (bonus * w1 * w2 * a1 < s * s * t2) {
        d1 = bonus * w1 * w2 * a2 / (s * s);
        d2 = bonus * w1 * w2 * a1 / (s * s);
      } else if (bonus * w1 * w2 * t2 < a1 * mixed * mixed) {
        d1 = std::sqrt(bonus * w2 * t2 / (w1 * a1)) - w2 * t2 / w1;
        d2 = t2;
      } else {
        d1 = t1;
        d2 = t2;
      }
    }
  }

  Allocation d(2);
  d[lo] = std::clamp(d1, 0.0, t1);
  d[hi] = std::clamp(d2, 0.0, t2);
  return make_report(std::move(d), offer, aps, Scheme::SalaryPlusBonus,
                     NeMethod::TwoApCases, true, 0);
}

struct IterationOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  double damping = 0.5;
  bool aggregate_refine = true;  // pin the fixed point by aggregate bisection
  std::optional<Allocation> initial;  // defaults to everyone at capacity
};

namespace detail {

// Per-AP weighted volume consistent with a total weighted volume W: the
// clamped solution of the AP's stationarity condition given the aggregate.
// a_eff is c-p (salary-plus-bonus) or c+penalty (bonus-only); cap_w is w*T or
// +inf respectively.
inline double consistent_weighted_volume(double a_eff, double quality, double cap_w,
                                         double bonus, double W) {
  if (a_eff <= 0.0) return cap_w;
  const double y = W * (1.0 - a_eff * W / (bonus * quality));
  return std::clamp(y, 0.0, cap_w);
}

// Equilibrium candidate from a 1-D root find on the aggregate weighted
// volume: any W > 0 with sum_i y_i(W) = W yields a profile where every AP
// satisfies its own first-order conditions.
inline std::optional<Allocation> aggregate_solve(std::span<const ApProfile> aps,
                                                 const Offer& offer, Scheme scheme) {
  const std::size_t n = aps.size();
  if (offer.bonus <= 0.0) return std::nullopt;
  std::vector<double> a_eff(n), cap_w(n);
  double w_hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (scheme == Scheme::SalaryPlusBonus) {
      a_eff[i] = aps[i].cost - offer.salary_rate;
      cap_w[i] = aps[i].quality * aps[i].capacity;
      w_hi += cap_w[i];
    } else {
      a_eff[i] = aps[i].cost + aps[i].penalty;
      cap_w[i] = std::numeric_limits<double>::infinity();
      w_hi = std::max(w_hi, offer.bonus * aps[i].quality / a_eff[i]);
    }
  }
  if (!(w_hi > 0.0)) return Allocation(n, 0.0);

  auto excess = [&](double W) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += consistent_weighted_volume(a_eff[i], aps[i].quality, cap_w[i], offer.bonus, W);
    return s - W;
  };

  auto build = [&](double W) {
    Allocation d(n);
    for (std::size_t i = 0; i < n; ++i)
      d[i] = consistent_weighted_volume(a_eff[i], aps[i].quality, cap_w[i], offer.bonus, W) /
             aps[i].quality;
    return d;
  };

  if (excess(w_hi) >= 0.0) return build(w_hi);  // everyone capped
  double lo = w_hi * 1e-12;
  while (lo > 0.0 && excess(lo) <= 0.0) lo *= 1e-6;  // root sits below lo
  if (!(lo > 0.0)) return Allocation(n, 0.0);
  double hi = w_hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-16 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return build(0.5 * (lo + hi));
}

inline double response_residual(const Allocation& d, const Offer& offer,
                                std::span<const ApProfile> aps, Scheme scheme) {
  double r = 0.0;
  for (std::size_t i = 0; i < aps.size(); ++i)
    r = std::max(r, std::abs(best_response(static_cast<int>(i), d, offer, aps, scheme) - d[i]));
  return r;
}

}  // namespace detail

// Damped simultaneous best-response iteration from the all-capacity profile.
// The working damping halves when progress stalls; after the loop an
// aggregate-volume bisection pins the fixed point exactly when it is
// consistent with the iterate. Non-convergence is reported, never thrown.
inline EquilibriumReport ne_iterative(std::span<const ApProfile> aps, const Offer& offer,
                                      Scheme scheme, const IterationOptions& opt = {}) {
  if (aps.size() < 2) throw std::invalid_argument("ne_iterative: at least two APs required");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("ne_iterative: tol must be > 0");
  if (!(opt.damping > 0.0 && opt.damping <= 1.0))
    throw std::invalid_argument("ne_iterative: damping must be in (0, 1]");

  const std::size_t n = aps.size();
  Allocation d;
  if (opt.initial) {
    d = *opt.initial;
    if (d.size() != n) throw std::invalid_argument("ne_iterative: bad initial allocation size");
  } else {
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = aps[i].capacity;  // never all-zero
  }

  Allocation br(n);
  double gamma = opt.damping;
  double residual = std::numeric_limits<double>::infinity();
  double best_residual = residual;
  int stalled = 0;
  int sweeps = 0;
  while (sweeps < opt.max_iter) {
    ++sweeps;
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      br[i] = best_response(static_cast<int>(i), d, offer, aps, scheme);
      residual = std::max(residual, std::abs(br[i] - d[i]));
    }
    if (residual < opt.tol) break;
    for (std::size_t i = 0; i < n; ++i) d[i] += gamma * (br[i] - d[i]);
    if (residual < 0.5 * best_residual) {
      best_residual = residual;
      stalled = 0;
    } else if (++stalled >= 200) {
      gamma = std::max(gamma * 0.5, 1.0 / 1024.0);
      best_residual = residual;
      stalled = 0;
    }
  }
  bool converged = residual < opt.tol;

  if (opt.aggregate_refine && scheme != Scheme::SalaryOnly && offer.bonus > 0.0) {
    if (auto exact = detail::aggregate_solve(aps, offer, scheme)) {
      if (detail::response_residual(*exact, offer, aps, scheme) <= opt.tol) {
        double dist = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          dist = std::max(dist, std::abs((*exact)[i] - d[i]));
          scale = std::max(scale, std::abs((*exact)[i]));
        }
        // Adopt when the iterate was heading to the same fixed point.
        if (!converged || dist <= 1e-3 * (1.0 + scale)) {
          d = std::move(*exact);
          converged = true;
        }
      }
    }
  }

  return make_report(std::move(d), offer, aps, scheme, NeMethod::Iterative, converged, sweeps);
}

// Premium-first admission order of the bonus-only game: sort by
// (cost+penalty)/quality, seed with the best two, then admit while the
// candidate's ratio stays below the set's threshold. The result does not
// depend on the bonus amount.
inline std::vector<int> bonus_active_set(std::span<const ApProfile> aps) {
  const int n = static_cast<int>(aps.size());
  if (n < 2) throw std::invalid_argument("bonus-only scheme: at least two APs required");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](int i) { return (aps[i].cost + aps[i].penalty) / aps[i].quality; };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ratio(a) < ratio(b); });
  std::vector<int> active{order[0], order[1]};
  double sum = ratio(order[0]) + ratio(order[1]);
  for (int k = 2; k < n; ++k) {
    const double r = ratio(order[k]);
    if (!(r < (sum + r) / static_cast<double>(active.size()))) break;
    active.push_back(order[k]);
    sum += r;
  }
  return active;
}

// Slope of each active AP's equilibrium volume in the bonus: d_i = H_i * B.
inline std::vector<double> bonus_allocation_coefficients(std::span<const ApProfile> aps,
                                                         const std::vector<int>& active) {
  const double m = static_cast<double>(active.size());
  double sum = 0.0;
  for (int i : active) sum += (aps[i].cost + aps[i].penalty) / aps[i].quality;
  std::vector<double> h;
  h.reserve(active.size());
  for (int i : active) {
    const double r = (aps[i].cost + aps[i].penalty) / aps[i].quality;
    h.push_back((m - 1.0) / (aps[i].quality * sum) * (1.0 - r * (m - 1.0) / sum));
  }
  return h;
}

// Bonus-only subgame equilibrium: admission order plus the closed-form
// volumes of the active set. A zero pool leaves everyone inactive.
inline EquilibriumReport ne_bonus_only(std::span<const ApProfile> aps, double bonus) {
  if (bonus < 0.0) throw std::invalid_argument("ne_bonus_only: bonus must be >= 0");
  const auto active = bonus_active_set(aps);  // also enforces the two-AP minimum
  Allocation d(aps.size(), 0.0);
  if (bonus > 0.0) {
    const auto h = bonus_allocation_coefficients(aps, active);
    for (std::size_t k = 0; k < active.size(); ++k) d[active[k]] = h[k] * bonus;
  }
  return make_report(std::move(d), Offer{0.0, bonus}, aps, Scheme::BonusOnly,
                     NeMethod::Algorithm2, true, 0);
}

// Single-pass suboptimal follower profile for the salary-plus-bonus scheme:
// salary-covered APs offload at capacity; the rest go through a bonus-style
// admission on a_i/w_i and receive the closed-form volumes, moved to their
// capacity when the formula overshoots. With recompute set, the pass repeats
// on the reduced set until no volume overshoots.
inline EquilibriumReport ne_spb_suboptimal(std::span<const ApProfile> aps,
                                           const Offer& offer, bool recompute = false) {
  const int n = static_cast<int>(aps.size());
  if (n < 1) throw std::invalid_argument("ne_spb_suboptimal: at least one AP required");
  const double p = offer.salary_rate;
  const double bonus = offer.bonus;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return aps[a].cost < aps[b].cost; });

  Allocation d(aps.size(), 0.0);
  std::vector<int> rest;
  double covered_wt = 0.0;  // weighted volume of the salary-covered set
  for (int i : order) {
    if (aps[i].cost < p) {
      d[i] = aps[i].capacity;
      covered_wt += aps[i].quality * aps[i].capacity;
    } else {
      rest.push_back(i);
    }
  }

  if (rest.size() <= 1) {
    if (rest.size() == 1) {
      const int l = rest[0];
      const double a = aps[l].cost - p;
      if (a <= 0.0) {
        d[l] = aps[l].capacity;  // salary exactly covers the cost
      } else if (covered_wt > 0.0 && bonus > 0.0) {
        const double w = aps[l].quality;
        d[l] = std::clamp(std::sqrt(bonus * covered_wt / (a * w)) - covered_wt / w, 0.0,
                          aps[l].capacity);
      }
    }
    return make_report(std::move(d), offer, aps, Scheme::SalaryPlusBonus,
                       NeMethod::Algorithm3, true, 0);
  }

  auto ratio = [&](int i) { return (aps[i].cost - p) / aps[i].quality; };
  std::stable_sort(rest.begin(), rest.end(),
                   [&](int a, int b) { return ratio(a) < ratio(b); });
  std::vector<int> active{rest[0], rest[1]};
  double sum = ratio(rest[0]) + ratio(rest[1]);
  for (std::size_t k = 2; k < rest.size(); ++k) {
    const double r = ratio(rest[k]);
    if (!(r < (sum + r) / static_cast<double>(active.size()))) break;
    active.push_back(rest[k]);
    sum += r;
  }

  while (true) {
    if (sum <= 0.0) {
      // The admitted ratios are all zero: every AP whose cost equals the
      // rate earns nothing at the margin and offloads at capacity.
      for (int i : rest)
        if (ratio(i) <= 0.0) d[i] = aps[i].capacity;
      break;
    }
    const double m = static_cast<double>(active.size());
    std::vector<int> kept;
    bool overshoot = false;
    for (int i : active) {
      const double r = ratio(i);
      const double v = bonus * (m - 1.0) / (aps[i].quality * sum) * (1.0 - r * (m - 1.0) / sum);
      if (v > aps[i].capacity) {
        d[i] = aps[i].capacity;
        overshoot = true;
      } else {
        d[i] = std::max(v, 0.0);
        kept.push_back(i);
      }
    }
    if (!recompute || !overshoot || kept.size() < 2) break;
    sum = 0.0;
    for (int i : kept) sum += ratio(i);
    active = std::move(kept);
  }

  return make_report(std::move(d), offer, aps, Scheme::SalaryPlusBonus,
                     NeMethod::Algorithm3, true, 0);
}

struct VerifyResult {
  bool is_ne = false;
  double max_gain = 0.0;      // largest unilateral improvement found
  int worst_ap = -1;          // AP achieving it, -1 when none improves
  double best_deviation = 0.0;  // the deviating volume achieving max_gain
};

// Deviation scan: for each AP, sweep its own volume over a grid of the
// feasible interval (plus the closed-form best response) with everyone else
// fixed. The profile passes when no deviation gains more than gain_tol.
inline VerifyResult verify_ne(const EquilibriumReport& report, const Offer& offer,
                              std::span<const ApProfile> aps, Scheme scheme,
                              int grid_points = 400, double gain_tol = 1e-6) {
  if (grid_points < 100) throw std::invalid_argument("verify_ne: grid_points must be >= 100");
  VerifyResult res;
  Allocation trial = report.allocation;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    const int ii = static_cast<int>(i);
    double upper = aps[i].capacity;
    if (scheme == Scheme::BonusOnly) {
      // Beyond bonus/(c+penalty) every deviation is dominated by zero.
      const double k = aps[i].cost + aps[i].penalty;
      upper = std::max(10.0 * aps[i].capacity, k > 0.0 ? 1.1 * offer.bonus / k : 0.0);
    }
    const double base = ap_utility(ii, report.allocation, offer, aps, scheme);
    auto probe = [&](double x) {
      trial[i] = x;
      const double gain = ap_utility(ii, trial, offer, aps, scheme) - base;
      if (gain > res.max_gain) {
        res.max_gain = gain;
        res.worst_ap = ii;
        res.best_deviation = x;
      }
    };
    for (int g = 0; g < grid_points; ++g)
      probe(upper * static_cast<double>(g) / static_cast<double>(grid_points - 1));
    probe(std::min(best_response(ii, report.allocation, offer, aps, scheme), upper));
    trial[i] = report.allocation[i];
  }
  res.is_ne = res.max_gain <= gain_tol;
  return res;
}

}  // namespace offload
