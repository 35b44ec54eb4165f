#pragma once

// Leader-side (MNO) optimization: the optimal offer per scheme, via the
// candidate-set search for salary-only, closed forms for homogeneous and
// bonus-only populations, and bounded grid / structured 1-D searches for the
// general salary-plus-bonus case.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "offload/equilibrium.hpp"

namespace offload {

struct SearchPoint {
  Offer offer;
  double utility = 0.0;
  bool skipped = false;  // follower solve did not converge at this cell
};

struct MnoSolution {
  Offer offer;
  double utility = 0.0;
  EquilibriumReport follower_report;
  std::optional<std::vector<SearchPoint>> search_trace;
  int cells_skipped = 0;
};

// Salary-only leader problem. The optimal rate lies in {0} U {c_i}; walk the
// candidates in ascending cost order and stop once the objective goes
// negative (it never recovers past that point). Duplicate costs collapse
// into one candidate so the active set stays consistent.
inline MnoSolution optimal_price_salary_only(std::span<const ApProfile> aps,
                                             const MnoParams& params,
                                             bool early_stop = true) {
  if (aps.empty()) throw std::invalid_argument("optimal_price_salary_only: no APs");
  std::vector<int> order(aps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return aps[a].cost < aps[b].cost; });

  double best_p = 0.0;
  double best_f = 0.0;  // the zero rate recruits nobody and earns exactly zero
  double volume = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double c = aps[order[k]].cost;
    while (k < order.size() && aps[order[k]].cost == c) volume += aps[order[k++]].capacity;
    const double f = params.gain_coefficient * std::log1p(volume) - c * volume;
    if (f > best_f) {
      best_f = f;
      best_p = c;
    } else if (f < 0.0 && early_stop) {
      break;
    }
  }

  MnoSolution sol;
  sol.offer = Offer{best_p, 0.0};
  Allocation d(aps.size());
  for (std::size_t i = 0; i < aps.size(); ++i)
    d[i] = best_response_salary(static_cast<int>(i), sol.offer, aps);
  sol.follower_report = make_report(std::move(d), sol.offer, aps, Scheme::SalaryOnly,
                                    NeMethod::SalaryThreshold, true, 0);
  sol.utility = mno_utility(sol.offer, sol.follower_report.allocation, params,
                            Scheme::SalaryOnly);
  return sol;
}

// Best bonus for a homogeneous population at a fixed rate below cost: the
// interior stationary point of the concave leader objective, clamped to the
// pool that saturates everyone, picked against the saturation value.
inline double optimal_bonus_homogeneous(double p, int n, double cost,
                                        double /*quality*/, double capacity,
                                        const MnoParams& params) {
  if (n < 2) throw std::invalid_argument("optimal_bonus_homogeneous: at least two APs");
  if (!(p >= 0.0)) throw std::invalid_argument("optimal_bonus_homogeneous: p must be >= 0");
  if (p >= cost)
    throw std::invalid_argument(
        "optimal_bonus_homogeneous: requires p < c (at p >= c the best bonus is 0)");
  const double nn = static_cast<double>(n);
  const double a = cost - p;
  const double k = (nn - 1.0) / (a * nn);  // total volume per unit of bonus
  const double cap_bonus = a * nn * nn * capacity / (nn - 1.0);
  const double lambda = params.gain_coefficient;
  const double interior = std::clamp(lambda / (1.0 + p * k) - 1.0 / k, 0.0, cap_bonus);
  const double u_interior = lambda * std::log1p(k * interior) - p * k * interior - interior;
  const double u_cap = lambda * std::log1p(nn * capacity) - p * nn * capacity - cap_bonus;
  return u_cap >= u_interior ? cap_bonus : interior;
}

// Homogeneous leader search: sweep the rate over [0, c] (the endpoint is the
// all-capacity offer with no bonus) and pair each rate with its best bonus.
inline MnoSolution optimal_homogeneous(int n, double cost, double quality,
                                       double capacity, const MnoParams& params,
                                       int p_grid = 101) {
  if (p_grid < 2) throw std::invalid_argument("optimal_homogeneous: p_grid must be >= 2");
  MnoSolution best;
  best.utility = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < p_grid; ++g) {
    const double p = cost * static_cast<double>(g) / static_cast<double>(p_grid - 1);
    Offer offer{p, p < cost ? optimal_bonus_homogeneous(p, n, cost, quality, capacity, params)
                            : 0.0};
    auto rep = ne_homogeneous(n, cost, quality, capacity, offer);
    const double u = mno_utility(offer, rep.allocation, params, Scheme::SalaryPlusBonus);
    if (u > best.utility) {
      best.offer = offer;
      best.utility = u;
      best.follower_report = std::move(rep);
    }
  }
  return best;
}

enum class NeSolverKind { TwoApCases, Iterative, Algorithm3 };

struct GridSearchOptions {
  int p_steps = 101;
  int bonus_steps = 101;
  NeSolverKind solver = NeSolverKind::Iterative;
  int refine_passes = 1;
  bool record_trace = false;
  IterationOptions iteration = {};
};

namespace detail {

inline EquilibriumReport solve_followers(std::span<const ApProfile> aps, const Offer& offer,
                                         NeSolverKind kind, const IterationOptions& it) {
  switch (kind) {
    case NeSolverKind::TwoApCases:
      if (aps.size() == 2 && aps[0].cost != aps[1].cost) return ne_two_ap(aps, offer);
      return ne_iterative(aps, offer, Scheme::SalaryPlusBonus, it);  // equal costs fall back
    case NeSolverKind::Iterative:
      return ne_iterative(aps, offer, Scheme::SalaryPlusBonus, it);
    case NeSolverKind::Algorithm3:
      return ne_spb_suboptimal(aps, offer);
  }
  throw std::logic_error("unknown solver kind");
}

// Bonus beyond which every AP offloads at capacity, given the rate.
inline double bonus_bound(std::span<const ApProfile> aps, double p) {
  double total_wt = 0.0;
  for (const auto& ap : aps) total_wt += ap.quality * ap.capacity;
  double best = 0.0;
  for (const auto& ap : aps) {
    const double denom = ap.quality * (total_wt - ap.quality * ap.capacity);
    if (denom > 0.0) best = std::max(best, std::max(ap.cost - p, 0.0) / denom);
  }
  return best * total_wt * total_wt;
}

}  // namespace detail

// Bounded two-dimensional grid search for the salary-plus-bonus offer: the
// rate is bounded by the largest cost and the bonus by the saturation bound
// at each rate. One refinement pass re-grids the cell around the incumbent.
// Cells whose follower solve does not converge are skipped, never scored.
inline MnoSolution grid_search_spb(std::span<const ApProfile> aps, const MnoParams& params,
                                   const GridSearchOptions& opt = {}) {
  if (aps.size() < 2) throw std::invalid_argument("grid_search_spb: at least two APs");
  if (opt.p_steps < 2 || opt.bonus_steps < 2)
    throw std::invalid_argument("grid_search_spb: at least 2 steps per axis");

  double p_hi = 0.0;
  for (const auto& ap : aps) p_hi = std::max(p_hi, ap.cost);

  MnoSolution best;
  best.utility = -std::numeric_limits<double>::infinity();
  if (opt.record_trace) best.search_trace.emplace();

  auto evaluate = [&](double p, double bonus) {
    const Offer offer{p, bonus};
    auto rep = detail::solve_followers(aps, offer, opt.solver, opt.iteration);
    if (!rep.converged) {
      ++best.cells_skipped;
      if (best.search_trace) best.search_trace->push_back({offer, 0.0, true});
      return;
    }
    const double u = mno_utility(offer, rep.allocation, params, Scheme::SalaryPlusBonus);
    if (best.search_trace) best.search_trace->push_back({offer, u, false});
    if (u > best.utility) {
      best.offer = offer;
      best.utility = u;
      best.follower_report = std::move(rep);
    }
  };

  auto sweep = [&](double p_lo, double p_up, double b_lo, double b_up, bool bound_by_p) {
    for (int gp = 0; gp < opt.p_steps; ++gp) {
      const double p =
          p_lo + (p_up - p_lo) * static_cast<double>(gp) / static_cast<double>(opt.p_steps - 1);
      double lo = b_lo, up = b_up;
      if (bound_by_p) {
        lo = 0.0;
        up = detail::bonus_bound(aps, p);
      }
      if (!(up > lo)) {
        evaluate(p, lo);
        continue;
      }
      for (int gb = 0; gb < opt.bonus_steps; ++gb)
        evaluate(p, lo + (up - lo) * static_cast<double>(gb) /
                         static_cast<double>(opt.bonus_steps - 1));
    }
  };

  sweep(0.0, p_hi, 0.0, 0.0, /*bound_by_p=*/true);

  for (int pass = 0; pass < opt.refine_passes; ++pass) {
    if (!std::isfinite(best.utility)) break;
    const double dp = p_hi / static_cast<double>(opt.p_steps - 1);
    const double db =
        detail::bonus_bound(aps, best.offer.salary_rate) / static_cast<double>(opt.bonus_steps - 1);
    sweep(std::max(0.0, best.offer.salary_rate - dp), std::min(p_hi, best.offer.salary_rate + dp),
          std::max(0.0, best.offer.bonus - db), best.offer.bonus + db, /*bound_by_p=*/false);
  }
  return best;
}

// Bonus-only leader problem: the active set does not depend on the pool, so
// the objective is a one-dimensional concave function of the bonus with a
// closed-form maximizer.
inline MnoSolution optimal_bonus_only(std::span<const ApProfile> aps,
                                      const MnoParams& params) {
  const auto active = bonus_active_set(aps);
  const auto h = bonus_allocation_coefficients(aps, active);
  const double sum_h = std::accumulate(h.begin(), h.end(), 0.0);
  const double bonus = std::max(0.0, params.gain_coefficient - 1.0 / sum_h);
  MnoSolution sol;
  sol.offer = Offer{0.0, bonus};
  sol.follower_report = ne_bonus_only(aps, bonus);
  sol.utility = mno_utility(sol.offer, sol.follower_report.allocation, params,
                            Scheme::BonusOnly);
  return sol;
}

namespace detail {

// Candidate bonuses for the suboptimal salary-plus-bonus leader search at a
// fixed rate. The single-pass follower profile makes the offloaded volume
// piecewise linear (or square-root, in the one-leftover case) in the bonus;
// each piece is concave, so candidates are the piece boundaries plus each
// piece's stationary point.
inline std::vector<double> suboptimal_bonus_candidates(std::span<const ApProfile> aps,
                                                       double p, const MnoParams& params) {
  const double lambda = params.gain_coefficient;
  std::vector<double> cands{0.0};

  std::vector<int> rest;
  double covered_wt = 0.0;
  double covered_volume = 0.0;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    if (aps[i].cost < p) {
      covered_wt += aps[i].quality * aps[i].capacity;
      covered_volume += aps[i].capacity;
    } else {
      rest.push_back(static_cast<int>(i));
    }
  }

  if (rest.size() <= 1) {
    if (rest.empty()) return cands;
    const int l = rest[0];
    const double a = aps[l].cost - p;
    const double w = aps[l].quality;
    const double cap = aps[l].capacity;
    if (a <= 0.0 || covered_wt <= 0.0 || cap <= 0.0) return cands;
    const double b_zero = a * covered_wt / w;  // below this the leftover stays out
    const double edge = w * cap + covered_wt;
    const double b_cap = a * edge * edge / (w * covered_wt);
    cands.push_back(b_cap);
    // Stationary bonus on the interior piece, by bisection on the slope.
    auto slope = [&](double b) {
      const double extra = std::sqrt(b * covered_wt / (a * w)) - covered_wt / w;
      const double volume = covered_volume + extra;
      const double dd = 0.5 * std::sqrt(covered_wt / (a * w * b));
      return (lambda / (1.0 + volume) - p) * dd - 1.0;
    };
    double lo = b_zero * (1.0 + 1e-12) + 1e-300;
    double hi = b_cap;
    if (hi > lo && slope(lo) > 0.0 && slope(hi) < 0.0) {
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
      }
      cands.push_back(0.5 * (lo + hi));
    }
    return cands;
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
  if (sum <= 0.0) return cands;  // whole set at capacity for any bonus

  const double m = static_cast<double>(active.size());
  struct Piece {
    double slope;      // volume per unit of bonus while uncapped
    double threshold;  // bonus at which this AP reaches capacity
    double capacity;
  };
  std::vector<Piece> pieces;
  double total_slope = 0.0;
  for (int i : active) {
    const double g = (m - 1.0) / (aps[i].quality * sum) * (1.0 - ratio(i) * (m - 1.0) / sum);
    if (g <= 0.0) continue;
    pieces.push_back({g, aps[i].capacity / g, aps[i].capacity});
    total_slope += g;
  }
  if (pieces.empty()) return cands;
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& a, const Piece& b) { return a.threshold < b.threshold; });

  double seg_lo = 0.0;
  double base_volume = covered_volume;  // capped volume entering the segment
  double g_seg = total_slope;
  for (std::size_t k = 0; k <= pieces.size(); ++k) {
    const double seg_hi =
        k < pieces.size() ? pieces[k].threshold : std::numeric_limits<double>::infinity();
    if (g_seg > 0.0 && seg_hi > seg_lo) {
      const double stat =
          (lambda * g_seg / (p * g_seg + 1.0) - 1.0 - base_volume) / g_seg;
      if (stat > seg_lo && stat < seg_hi) cands.push_back(stat);
      if (std::isfinite(seg_hi)) cands.push_back(seg_hi);
    }
    if (k < pieces.size()) {
      base_volume += pieces[k].capacity;
      g_seg -= pieces[k].slope;
      seg_lo = pieces[k].threshold;
    }
  }
  return cands;
}

}  // namespace detail

// Suboptimal salary-plus-bonus leader search: sweep the rate over the cost
// range (plus the zero rate), and at each rate evaluate the candidate
// bonuses of the single-pass follower profile. Every candidate is scored
// with the actual profile, so piece-boundary bookkeeping can never misprice
// an offer.
inline MnoSolution optimal_spb_suboptimal(std::span<const ApProfile> aps,
                                          const MnoParams& params, int p_grid = 101) {
  if (aps.empty()) throw std::invalid_argument("optimal_spb_suboptimal: no APs");
  if (p_grid < 2) throw std::invalid_argument("optimal_spb_suboptimal: p_grid must be >= 2");
  double c_lo = std::numeric_limits<double>::infinity();
  double c_hi = 0.0;
  for (const auto& ap : aps) {
    c_lo = std::min(c_lo, ap.cost);
    c_hi = std::max(c_hi, ap.cost);
  }

  // A single distinct cost leaves no cost range to sweep; span [0, c] then,
  // since the best rate generally sits strictly below the common cost.
  std::vector<double> rates{0.0};
  const double rate_lo = c_hi > c_lo ? c_lo : 0.0;
  for (int g = 0; g < p_grid; ++g)
    rates.push_back(rate_lo + (c_hi - rate_lo) * static_cast<double>(g) /
                               static_cast<double>(p_grid - 1));

  MnoSolution best;
  best.utility = -std::numeric_limits<double>::infinity();
  for (double p : rates) {
    for (double b : detail::suboptimal_bonus_candidates(aps, p, params)) {
      if (!(b >= 0.0)) continue;
      const Offer offer{p, b};
      auto rep = ne_spb_suboptimal(aps, offer);
      const double u = mno_utility(offer, rep.allocation, params, Scheme::SalaryPlusBonus);
      if (u > best.utility) {
        best.offer = offer;
        best.utility = u;
        best.follower_report = std::move(rep);
      }
    }
  }
  return best;
}

}  // namespace offload
