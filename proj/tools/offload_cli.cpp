// Command-line front end: single solves, fixed-offer equilibria, Monte-Carlo
// scheme comparisons, and equilibrium verification.
//
// Exit codes: 0 success, 1 input error, 2 solver non-convergence,
// 3 verification failure.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "offload/offload.hpp"
#include "offload/scenario_io.hpp"

namespace {

using namespace offload;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNonConvergence = 2;
constexpr int kExitNotEquilibrium = 3;

Offer parse_offer_inline(const std::string& text) {
  // accepted: "p=2,B=10" (either order) or "2,10"
  double p = -1.0, b = -1.0;
  std::stringstream ss(text);
  std::string part;
  bool named = text.find('=') != std::string::npos;
  int position = 0;
  while (std::getline(ss, part, ',')) {
    std::size_t eq = part.find('=');
    try {
      if (named) {
        if (eq == std::string::npos) throw ScenarioError("offer: expected key=value");
        const std::string key = part.substr(0, eq);
        const double value = std::stod(part.substr(eq + 1));
        if (key == "p" || key == "P")
          p = value;
        else if (key == "B" || key == "b")
          b = value;
        else
          throw ScenarioError("offer: unknown key '" + key + "'");
      } else {
        (position == 0 ? p : b) = std::stod(part);
        ++position;
      }
    } catch (const std::invalid_argument&) {
      throw ScenarioError("offer: cannot parse '" + part + "'");
    }
  }
  if (p < 0.0 || b < 0.0)
    throw ScenarioError("offer: need p >= 0 and B >= 0, e.g. --offer p=2,B=10");
  return Offer{p, b};
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::invalid_argument&) {
      throw ScenarioError("cannot parse number '" + part + "'");
    }
  }
  return out;
}

bool all_same_profile(const std::vector<ApProfile>& aps) {
  for (const auto& ap : aps)
    if (ap.cost != aps[0].cost || ap.quality != aps[0].quality ||
        ap.capacity != aps[0].capacity)
      return false;
  return true;
}

nlohmann::ordered_json report_to_json(const EquilibriumReport& rep) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(rep.method));
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["allocation"] = rep.allocation;
  j["active_set"] = rep.active_set;
  j["per_ap_utility"] = rep.per_ap_utility;
  return j;
}

void print_report_table(std::ostream& os, const ScenarioFile& file, const Offer& offer,
                        const EquilibriumReport& rep, double leader_utility, Scheme scheme) {
  os << std::fixed << std::setprecision(4);
  os << "scheme        " << scheme_name(scheme) << "\n";
  os << "method        " << to_string(rep.method)
     << (rep.converged ? "" : "  (NOT converged)") << "\n";
  os << "offer         p = " << offer.salary_rate << "   B = " << offer.bonus << "\n";
  os << "mno utility   " << leader_utility << "\n";
  os << "active aps    " << rep.active_set.size() << " of " << file.aps.size() << "\n";
  os << "  ap      cost   quality  capacity    volume   utility\n";
  for (std::size_t i = 0; i < file.aps.size(); ++i) {
    const auto& ap = file.aps[i];
    os << "  " << std::setw(2) << i << std::setw(10) << ap.cost << std::setw(10) << ap.quality
       << std::setw(10) << ap.capacity << std::setw(10) << rep.allocation[i] << std::setw(10)
       << rep.per_ap_utility[i] << "\n";
  }
}

struct SolveArgs {
  std::string scenario_path;
  std::string scheme_flag;
  std::string solver_flag = "auto";
  std::string offer_flag;
  std::string grid_flag;
  std::string out_path;
  double tol = 1e-8;
  int max_iter = 10000;
  double damping = 0.5;
  int p_grid = 101;
  bool no_fallback = false;
  bool no_early_stop = false;
  bool as_json = false;
};

int run_solve(const SolveArgs& args) {
  const ScenarioFile file = load_scenario_file(args.scenario_path);
  validate_profiles(file.aps);

  Scheme scheme = Scheme::SalaryPlusBonus;
  if (!args.scheme_flag.empty())
    scheme = parse_scheme(args.scheme_flag);
  else if (file.scheme)
    scheme = *file.scheme;

  IterationOptions iter;
  iter.tol = args.tol;
  iter.max_iter = args.max_iter;
  iter.damping = args.damping;
  iter.aggregate_refine = !args.no_fallback;

  GridSearchOptions grid;
  grid.iteration = iter;
  if (!args.grid_flag.empty()) {
    const std::size_t x = args.grid_flag.find('x');
    if (x == std::string::npos) throw ScenarioError("--grid: expected PxQ, e.g. 101x101");
    grid.p_steps = std::stoi(args.grid_flag.substr(0, x));
    grid.bonus_steps = std::stoi(args.grid_flag.substr(x + 1));
  }

  std::optional<Offer> fixed = file.offer;
  if (!args.offer_flag.empty()) fixed = parse_offer_inline(args.offer_flag);

  Offer offer;
  EquilibriumReport rep;
  double utility = 0.0;

  if (fixed) {
    // Fixed-offer mode: solve the follower subgame only.
    offer = *fixed;
    switch (scheme) {
      case Scheme::SalaryOnly: {
        Allocation d(file.aps.size());
        for (std::size_t i = 0; i < d.size(); ++i)
          d[i] = best_response_salary(static_cast<int>(i), offer, file.aps);
        rep = make_report(std::move(d), offer, file.aps, scheme, NeMethod::SalaryThreshold,
                          true, 0);
        break;
      }
      case Scheme::BonusOnly:
        rep = ne_bonus_only(file.aps, offer.bonus);
        break;
      case Scheme::SalaryPlusBonus:
        if (args.solver_flag == "cases") {
          rep = ne_two_ap(file.aps, offer);
        } else if (args.solver_flag == "iterative") {
          rep = ne_iterative(file.aps, offer, scheme, iter);
        } else if (args.solver_flag == "algo3") {
          rep = ne_spb_suboptimal(file.aps, offer);
        } else if (all_same_profile(file.aps) && file.aps.size() >= 2) {
          rep = ne_homogeneous(static_cast<int>(file.aps.size()), file.aps[0].cost,
                               file.aps[0].quality, file.aps[0].capacity, offer);
        } else if (file.aps.size() == 2 && file.aps[0].cost != file.aps[1].cost) {
          rep = ne_two_ap(file.aps, offer);
        } else {
          rep = ne_spb_suboptimal(file.aps, offer);
        }
        break;
    }
    utility = mno_utility(offer, rep.allocation, file.params, scheme);
  } else {
    MnoSolution sol;
    switch (scheme) {
      case Scheme::SalaryOnly:
        sol = optimal_price_salary_only(file.aps, file.params, !args.no_early_stop);
        break;
      case Scheme::BonusOnly:
        sol = optimal_bonus_only(file.aps, file.params);
        break;
      case Scheme::SalaryPlusBonus:
        if (args.solver_flag == "cases") {
          grid.solver = NeSolverKind::TwoApCases;
          sol = grid_search_spb(file.aps, file.params, grid);
        } else if (args.solver_flag == "iterative") {
          grid.solver = NeSolverKind::Iterative;
          sol = grid_search_spb(file.aps, file.params, grid);
        } else if (args.solver_flag == "algo3") {
          sol = optimal_spb_suboptimal(file.aps, file.params, args.p_grid);
        } else if (args.solver_flag == "auto") {
          if (all_same_profile(file.aps) && file.aps.size() >= 2) {
            sol = optimal_homogeneous(static_cast<int>(file.aps.size()), file.aps[0].cost,
                                      file.aps[0].quality, file.aps[0].capacity, file.params,
                                      args.p_grid);
          } else if (file.aps.size() == 2 && file.aps[0].cost != file.aps[1].cost) {
            grid.solver = NeSolverKind::TwoApCases;
            sol = grid_search_spb(file.aps, file.params, grid);
          } else {
            sol = optimal_spb_suboptimal(file.aps, file.params, args.p_grid);
          }
        } else {
          throw ScenarioError("--ne-solver: expected auto|cases|iterative|algo3");
        }
        break;
    }
    offer = sol.offer;
    rep = std::move(sol.follower_report);
    utility = sol.utility;
  }

  std::ostream* os = &std::cout;
  std::ofstream out_file;
  if (!args.out_path.empty()) {
    out_file.open(args.out_path, std::ios::binary);
    if (!out_file) throw ScenarioError("cannot open output file: " + args.out_path);
    os = &out_file;
  }

  if (args.as_json) {
    ScenarioFile echo = file;
    echo.scheme = scheme;
    echo.offer = offer;
    nlohmann::ordered_json j;
    j["scenario"] = to_json(echo);
    j["solution"] = {{"scheme", std::string(scheme_name(scheme))},
                     {"offer", {{"p", offer.salary_rate}, {"B", offer.bonus}}},
                     {"utility", utility}};
    j["solution"]["equilibrium"] = report_to_json(rep);
    *os << j.dump(2) << "\n";
  } else {
    print_report_table(*os, file, offer, rep, utility, scheme);
  }
  return rep.converged ? kExitOk : kExitNonConvergence;
}

struct CompareArgs {
  int n = 100;
  int runs = 100;
  std::uint64_t seed = 1;
  std::string regimes = "low,high";
  std::string gains = "10,20,30,40,50";
  std::string out_path = "comparison.csv";
  std::string trace_path;
  int threads = 1;
  int p_grid = 101;
};

int run_compare(const CompareArgs& args) {
  std::vector<CostRegime> regimes;
  std::stringstream ss(args.regimes);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "low")
      regimes.push_back(CostRegime::Low);
    else if (part == "high")
      regimes.push_back(CostRegime::High);
    else
      throw ScenarioError("--regimes: expected a comma list of low|high");
  }
  const std::vector<double> gains = parse_double_list(args.gains);

  ComparisonOptions opt;
  opt.threads = args.threads;
  opt.p_grid = args.p_grid;
  opt.trace_path = args.trace_path;
  const ComparisonReport report = run_comparison(args.n, regimes, gains, args.runs,
                                                 args.seed, opt);
  export_csv(report, args.out_path);

  std::cout << std::fixed << std::setprecision(4);
  std::cout << "scheme              regime  gain      active     utility     volume\n";
  for (const auto& cell : report.cells) {
    std::cout << "  " << std::left << std::setw(18) << scheme_name(cell.scheme) << std::setw(8)
              << regime_name(cell.regime) << std::right << std::setw(6) << cell.gain_coefficient
              << std::setw(12) << cell.mean_active_aps << std::setw(12) << cell.mean_mno_utility
              << std::setw(11) << cell.mean_offloaded_data << "\n";
  }
  std::cout << "written: " << args.out_path << "\n";
  return kExitOk;
}

struct VerifyArgs {
  std::string scenario_path;
  std::string allocation_flag;
  std::string offer_flag;
  std::string scheme_flag;
  int grid_points = 400;
};

int run_verify(const VerifyArgs& args) {
  const ScenarioFile file = load_scenario_file(args.scenario_path);
  validate_profiles(file.aps);

  Scheme scheme = Scheme::SalaryPlusBonus;
  if (!args.scheme_flag.empty())
    scheme = parse_scheme(args.scheme_flag);
  else if (file.scheme)
    scheme = *file.scheme;

  std::optional<Offer> offer = file.offer;
  if (!args.offer_flag.empty()) offer = parse_offer_inline(args.offer_flag);
  if (!offer) throw ScenarioError("verify: an offer is required (--offer or the file's offer)");

  const std::vector<double> d = parse_double_list(args.allocation_flag);
  if (d.size() != file.aps.size())
    throw ScenarioError("verify: allocation has " + std::to_string(d.size()) +
                        " entries but the scenario has " + std::to_string(file.aps.size()) +
                        " APs");
  for (double v : d)
    if (!(v >= 0.0)) throw ScenarioError("verify: allocation entries must be >= 0");

  const auto rep = make_report(Allocation(d), *offer, file.aps, scheme,
                               NeMethod::Iterative, true, 0);
  const auto res = verify_ne(rep, *offer, file.aps, scheme, args.grid_points);
  std::cout << std::fixed << std::setprecision(4);
  if (res.is_ne) {
    std::cout << "equilibrium: yes (max deviation gain " << std::scientific
              << std::setprecision(3) << res.max_gain << ")\n";
    return kExitOk;
  }
  std::cout << "equilibrium: no\n";
  std::cout << "ap " << res.worst_ap << " can gain " << res.max_gain
            << " by moving to volume " << res.best_deviation << "\n";
  return kExitNotEquilibrium;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg data-offloading incentive solver"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "solve a scenario (leader offer or fixed offer)");
  solve->add_option("scenario", solve_args.scenario_path, "scenario JSON file")->required();
  solve->add_option("--scheme", solve_args.scheme_flag, "spb|salary|bonus");
  solve->add_option("--ne-solver", solve_args.solver_flag, "auto|cases|iterative|algo3");
  solve->add_option("--offer", solve_args.offer_flag, "fixed offer, e.g. p=2,B=10");
  solve->add_option("--grid", solve_args.grid_flag, "grid steps PxQ for the 2-D search");
  solve->add_option("--p-grid", solve_args.p_grid, "rate grid of the suboptimal search");
  solve->add_option("--tol", solve_args.tol, "iterative solver tolerance");
  solve->add_option("--max-iter", solve_args.max_iter, "iterative solver sweep limit");
  solve->add_option("--damping", solve_args.damping, "iterative solver damping");
  solve->add_flag("--no-fallback", solve_args.no_fallback,
                  "disable the aggregate refinement of the iterative solver");
  solve->add_flag("--no-early-stop", solve_args.no_early_stop,
                  "exhaust every salary candidate instead of stopping early");
  solve->add_flag("--json", solve_args.as_json, "emit JSON instead of a table");
  solve->add_option("--out", solve_args.out_path, "write the report to a file");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Monte-Carlo comparison of the three schemes");
  compare->add_option("--n", compare_args.n, "APs per scenario");
  compare->add_option("--runs", compare_args.runs, "scenarios per regime");
  compare->add_option("--seed", compare_args.seed, "master seed");
  compare->add_option("--regimes", compare_args.regimes, "comma list of low|high");
  compare->add_option("--gains", compare_args.gains, "comma list of gain coefficients");
  compare->add_option("--out", compare_args.out_path, "CSV output path");
  compare->add_option("--trace", compare_args.trace_path, "JSON-lines per-run trace path");
  compare->add_option("--threads", compare_args.threads, "worker threads");
  compare->add_option("--p-grid", compare_args.p_grid, "rate grid of the suboptimal search");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "check an allocation for unilateral deviations");
  verify->add_option("scenario", verify_args.scenario_path, "scenario JSON file")->required();
  verify->add_option("--allocation", verify_args.allocation_flag, "comma list of volumes")
      ->required();
  verify->add_option("--offer", verify_args.offer_flag, "offer, e.g. p=2,B=10");
  verify->add_option("--scheme", verify_args.scheme_flag, "spb|salary|bonus");
  verify->add_option("--grid-points", verify_args.grid_points, "deviation grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (solve->parsed()) return run_solve(solve_args);
    if (compare->parsed()) return run_compare(compare_args);
    if (verify->parsed()) return run_verify(verify_args);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
