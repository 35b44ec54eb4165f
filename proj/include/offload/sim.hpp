#pragma once

// Scenario generation and the Monte-Carlo comparison of the three incentive
// schemes, with deterministic seeding and CSV export.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "offload/leader.hpp"

namespace offload {

enum class CostRegime { Low, High };

inline std::string_view regime_name(CostRegime r) {
  return r == CostRegime::Low ? "low" : "high";
}

struct Scenario {
  std::vector<ApProfile> profiles;
  MnoParams params{1.0};
  std::uint64_t seed = 0;
  CostRegime cost_regime = CostRegime::Low;
};

namespace rnd {

// Stateless seed derivation: one splitmix64 scramble of master + counter.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform in [0, 1) from the engine's raw bits, independent of the standard
// library's distribution implementation.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform on (0, hi]: draw on [0, hi) and reject the exact zero.
inline double uniform_pos(std::mt19937_64& g, double hi) {
  double u;
  do {
    u = uniform01(g);
  } while (u == 0.0);
  return u * hi;
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + uniform01(g) * (hi - lo);
}

}  // namespace rnd

// Random AP population: capacities on (0,5], qualities on (0,1], costs on
// (0,1] (low regime) or [1,10] (high regime), penalty = 1/capacity.
inline Scenario generate_scenario(int n, CostRegime regime, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_scenario: at least two APs");
  Scenario s;
  s.seed = seed;
  s.cost_regime = regime;
  s.profiles.reserve(static_cast<std::size_t>(n));
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    ApProfile ap;
    ap.id = i;
    ap.capacity = rnd::uniform_pos(rng, 5.0);
    ap.quality = rnd::uniform_pos(rng, 1.0);
    ap.cost = regime == CostRegime::Low ? rnd::uniform_pos(rng, 1.0)
                                        : rnd::uniform_range(rng, 1.0, 10.0);
    ap.penalty = default_penalty(ap.capacity);
    s.profiles.push_back(ap);
  }
  return s;
}

// Aggregated Monte-Carlo statistics for one (scheme, regime, gain) cell.
struct ComparisonCell {
  Scheme scheme = Scheme::SalaryOnly;
  CostRegime regime = CostRegime::Low;
  double gain_coefficient = 0.0;
  double mean_active_aps = 0.0;
  double mean_mno_utility = 0.0;
  double mean_offloaded_data = 0.0;
  double ci_halfwidth_utility = 0.0;
  int runs_ok = 0;
  int runs_skipped = 0;
};

struct ComparisonReport {
  std::vector<CostRegime> regimes;
  std::vector<double> gain_values;
  int runs = 0;
  std::vector<ComparisonCell> cells;  // regime-major, then gain, then scheme
};

struct ComparisonOptions {
  int threads = 1;
  int p_grid = 101;            // rate grid of the salary-plus-bonus leader search
  std::string trace_path;      // optional JSON-lines per-run trace
};

namespace detail {

inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

struct SchemeOutcome {
  bool ok = false;
  double active = 0.0;
  double utility = 0.0;
  double volume = 0.0;
  Offer offer;
  std::vector<int> active_set;
};

inline void append_json_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace detail

inline constexpr std::array<Scheme, 3> kComparisonSchemes{
    Scheme::SalaryOnly, Scheme::BonusOnly, Scheme::SalaryPlusBonus};

// Monte-Carlo comparison: for each (regime, run) one scenario is generated
// from a counter-derived seed and solved under every gain value and scheme,
// so results are independent of thread scheduling. Non-converged solves are
// excluded from the means and counted per cell.
inline ComparisonReport run_comparison(int n, std::vector<CostRegime> regimes,
                                       std::vector<double> gain_values, int runs,
                                       std::uint64_t master_seed,
                                       const ComparisonOptions& opt = {}) {
  if (runs < 1) throw std::invalid_argument("run_comparison: runs must be >= 1");
  if (gain_values.empty()) throw std::invalid_argument("run_comparison: no gain values");
  if (regimes.empty()) throw std::invalid_argument("run_comparison: no regimes");

  const std::size_t n_gains = gain_values.size();
  const std::size_t slots = regimes.size() * static_cast<std::size_t>(runs);
  const std::size_t per_slot = n_gains * kComparisonSchemes.size();
  std::vector<detail::SchemeOutcome> outcomes(slots * per_slot);
  std::vector<std::string> traces(opt.trace_path.empty() ? 0 : slots);

  auto solve_slot = [&](std::size_t slot) {
    const std::size_t regime_idx = slot / static_cast<std::size_t>(runs);
    const CostRegime regime = regimes[regime_idx];
    const std::uint64_t seed = rnd::mix_seed(master_seed, slot);
    const Scenario scen = generate_scenario(n, regime, seed);
    std::string* trace = traces.empty() ? nullptr : &traces[slot];
    for (std::size_t gi = 0; gi < n_gains; ++gi) {
      const MnoParams params{gain_values[gi]};
      for (std::size_t si = 0; si < kComparisonSchemes.size(); ++si) {
        const Scheme scheme = kComparisonSchemes[si];
        MnoSolution sol;
        switch (scheme) {
          case Scheme::SalaryOnly:
            sol = optimal_price_salary_only(scen.profiles, params);
            break;
          case Scheme::BonusOnly:
            sol = optimal_bonus_only(scen.profiles, params);
            break;
          case Scheme::SalaryPlusBonus:
            sol = optimal_spb_suboptimal(scen.profiles, params, opt.p_grid);
            break;
        }
        detail::SchemeOutcome& out = outcomes[slot * per_slot + gi * kComparisonSchemes.size() + si];
        out.ok = sol.follower_report.converged;
        out.active = static_cast<double>(sol.follower_report.active_set.size());
        out.utility = sol.utility;
        out.volume = total_volume(sol.follower_report.allocation);
        out.offer = sol.offer;
        if (trace) out.active_set = sol.follower_report.active_set;
        if (trace) {
          *trace += "{\"seed\":" + std::to_string(seed) + ",\"regime\":\"";
          *trace += regime_name(regime);
          *trace += "\",\"gain\":";
          detail::append_json_number(*trace, gain_values[gi]);
          *trace += ",\"scheme\":\"";
          *trace += scheme_name(scheme);
          *trace += "\",\"offer\":{\"p\":";
          detail::append_json_number(*trace, sol.offer.salary_rate);
          *trace += ",\"B\":";
          detail::append_json_number(*trace, sol.offer.bonus);
          *trace += "},\"active_set\":[";
          for (std::size_t k = 0; k < out.active_set.size(); ++k) {
            if (k) *trace += ',';
            *trace += std::to_string(out.active_set[k]);
          }
          *trace += "],\"utility\":";
          detail::append_json_number(*trace, sol.utility);
          *trace += "}\n";
        }
      }
    }
  };

  const int threads = std::clamp(opt.threads, 1, static_cast<int>(slots));
  if (threads <= 1) {
    for (std::size_t slot = 0; slot < slots; ++slot) solve_slot(slot);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t slot = next.fetch_add(1); slot < slots; slot = next.fetch_add(1))
          solve_slot(slot);
      });
    for (auto& th : pool) th.join();
  }

  if (!opt.trace_path.empty()) {
    std::ofstream out(opt.trace_path, std::ios::binary);
    if (!out) throw std::runtime_error("run_comparison: cannot open trace file " + opt.trace_path);
    for (const auto& t : traces) out << t;
    if (!out) throw std::runtime_error("run_comparison: write failed on " + opt.trace_path);
  }

  ComparisonReport report;
  report.regimes = std::move(regimes);
  report.gain_values = std::move(gain_values);
  report.runs = runs;
  std::vector<double> actives, utilities, volumes;
  for (std::size_t regime_idx = 0; regime_idx < report.regimes.size(); ++regime_idx) {
    for (std::size_t gi = 0; gi < n_gains; ++gi) {
      for (std::size_t si = 0; si < kComparisonSchemes.size(); ++si) {
        ComparisonCell cell;
        cell.scheme = kComparisonSchemes[si];
        cell.regime = report.regimes[regime_idx];
        cell.gain_coefficient = report.gain_values[gi];
        actives.clear();
        utilities.clear();
        volumes.clear();
        for (int run = 0; run < runs; ++run) {
          const std::size_t slot = regime_idx * static_cast<std::size_t>(runs) + run;
          const auto& out = outcomes[slot * per_slot + gi * kComparisonSchemes.size() + si];
          if (!out.ok) {
            ++cell.runs_skipped;
            continue;
          }
          actives.push_back(out.active);
          utilities.push_back(out.utility);
          volumes.push_back(out.volume);
        }
        cell.runs_ok = static_cast<int>(utilities.size());
        if (cell.runs_ok > 0) {
          const double inv = 1.0 / cell.runs_ok;
          cell.mean_active_aps = detail::pairwise_sum(actives) * inv;
          cell.mean_mno_utility = detail::pairwise_sum(utilities) * inv;
          cell.mean_offloaded_data = detail::pairwise_sum(volumes) * inv;
          if (cell.runs_ok > 1) {
            std::vector<double> sq(utilities.size());
            for (std::size_t k = 0; k < utilities.size(); ++k) {
              const double dev = utilities[k] - cell.mean_mno_utility;
              sq[k] = dev * dev;
            }
            const double var = detail::pairwise_sum(sq) / (cell.runs_ok - 1);
            cell.ci_halfwidth_utility = 1.96 * std::sqrt(var * inv);
          }
        }
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

inline std::string to_csv(const ComparisonReport& report) {
  std::string out =
      "scheme,cost_regime,gain_coefficient,mean_active_aps,mean_mno_utility,"
      "mean_offloaded_data,ci_halfwidth_utility,runs_ok,runs_skipped\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
  };
  for (const auto& cell : report.cells) {
    out += scheme_name(cell.scheme);
    out += ',';
    out += regime_name(cell.regime);
    out += ',';
    num(cell.gain_coefficient);
    out += ',';
    num(cell.mean_active_aps);
    out += ',';
    num(cell.mean_mno_utility);
    out += ',';
    num(cell.mean_offloaded_data);
    out += ',';
    num(cell.ci_halfwidth_utility);
    out += ',';
    out += std::to_string(cell.runs_ok);
    out += ',';
    out += std::to_string(cell.runs_skipped);
    out += '\n';
  }
  return out;
}

inline void export_csv(const ComparisonReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path);
  out << to_csv(report);
  if (!out) throw std::runtime_error("export_csv: write failed on " + path);
}

}  // namespace offload
