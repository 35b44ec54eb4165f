#include <catch2/catch_amalgamated.hpp>

#include "support/test_util.hpp"

using namespace offload;
using Catch::Approx;

namespace {

// Two-AP setup with prescribed shorthands a = c - p and z = w_other * d_other.
struct TwoAp {
  std::vector<ApProfile> aps;
  Allocation d;
  Offer offer;
};

TwoAp make_two_ap(double a, double w, double z, double bonus, double cap) {
  TwoAp t;
  const double p = 1.0;
  t.aps = {{0, p + a, w, cap, 0.0}, {1, 5.0, 1.0, 10.0, 0.0}};
  t.d = {0.0, z};  // rival quality 1, so z is just its volume
  t.offer = {p, bonus};
  return t;
}

}  // namespace

TEST_CASE("spb response: salary at or above cost means full capacity") {
  std::vector<ApProfile> aps{{0, 2, 0.5, 5, 0}, {1, 4, 0.5, 5, 0}};
  Allocation d{0, 3};
  CHECK(best_response_spb(0, d, Offer{3, 0}, aps) == 5.0);
  CHECK(best_response_spb(0, d, Offer{3, 100}, aps) == 5.0);
}

TEST_CASE("spb response: interior stationary point") {
  auto t = make_two_ap(1.0, 1.0, 1.0, 4.0, 5.0);
  const double br = best_response_spb(0, t.d, t.offer, t.aps);
  CHECK(br == Approx(1.0).epsilon(1e-12));
  const auto oracle =
      testutil::grid_best_response(0, t.d, t.offer, t.aps, Scheme::SalaryPlusBonus, 0.0, 5.0, 20001);
  CHECK(std::abs(br - oracle.arg) < 5.0 / 20000 + 1e-6);
}

TEST_CASE("spb response: pool too small to enter") {
  auto t = make_two_ap(1.0, 1.0, 1.0, 0.5, 5.0);
  CHECK(best_response_spb(0, t.d, t.offer, t.aps) == 0.0);
  const auto oracle =
      testutil::grid_best_response(0, t.d, t.offer, t.aps, Scheme::SalaryPlusBonus, 0.0, 5.0, 20001);
  CHECK(oracle.arg == 0.0);
}

TEST_CASE("spb response: no rival volume keeps the formula at zero") {
  auto t = make_two_ap(1.0, 1.0, 0.0, 10.0, 5.0);
  CHECK(best_response_spb(0, t.d, t.offer, t.aps) == 0.0);
}

TEST_CASE("salary response: threshold on the rate") {
  std::vector<ApProfile> aps{{0, 2, 1, 3, 0}};
  CHECK(best_response_salary(0, Offer{1, 0}, aps) == 0.0);
  CHECK(best_response_salary(0, Offer{2, 0}, aps) == 3.0);  // boundary included
  CHECK(best_response_salary(0, Offer{5, 0}, aps) == 3.0);
}

TEST_CASE("bonus response: examples") {
  SECTION("no rival volume") {
    std::vector<ApProfile> aps{{0, 0.5, 1, 5, 0.5}, {1, 0.5, 1, 5, 0.5}};
    CHECK(best_response_bonus(0, {0, 0}, 25.0, aps) == 0.0);
  }
  SECTION("interior point") {
    std::vector<ApProfile> aps{{0, 0.5, 1, 5, 0.5}, {1, 0.5, 1, 5, 0.5}};
    Allocation d{0, 1};
    const double br = best_response_bonus(0, d, 9.0, aps);
    CHECK(br == Approx(2.0).epsilon(1e-12));
    const auto oracle =
        testutil::grid_best_response(0, d, Offer{0, 9}, aps, Scheme::BonusOnly, 0.0, 50.0, 200001);
    CHECK(std::abs(br - oracle.arg) < 50.0 / 200000 + 1e-6);
  }
  SECTION("negative stationary point floors at zero") {
    std::vector<ApProfile> aps{{0, 3, 1, 5, 1}, {1, 0.5, 1, 5, 0.5}};
    Allocation d{0, 4};
    CHECK(best_response_bonus(0, d, 1.0, aps) == 0.0);
  }
}

TEST_CASE("responses match the grid oracle on random instances") {
  std::mt19937_64 g(42);
  const int points = 10000;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + int(testutil::u01(g) * 4);
    auto aps = testutil::random_profiles(g, n);
    Allocation d(aps.size());
    for (std::size_t j = 0; j < aps.size(); ++j)
      d[j] = testutil::upos(g, aps[j].capacity);  // rivals strictly positive
    const double p = testutil::u01(g) * 12.0;
    const double cap = aps[0].capacity;
    {
      const Offer offer{p, testutil::u01(g) * 50.0};
      const double br = best_response_spb(0, d, offer, aps);
      const auto oracle = testutil::grid_best_response(0, d, offer, aps,
                                                       Scheme::SalaryPlusBonus, 0.0, cap, points);
      REQUIRE(std::abs(br - oracle.arg) < cap / (points - 1) + 1e-6);
      Allocation trial = d;
      trial[0] = br;
      REQUIRE(ap_utility(0, trial, offer, aps, Scheme::SalaryPlusBonus) >=
              oracle.value - 1e-8);
    }
    {
      const Offer offer{p, 0.0};
      const double br = best_response_salary(0, offer, aps);
      const auto oracle = testutil::grid_best_response(0, d, offer, aps, Scheme::SalaryOnly,
                                                       0.0, cap, points);
      REQUIRE(std::abs(br - oracle.arg) < cap / (points - 1) + 1e-6);
    }
    {
      // keep the stationary point inside the pinned [0, 10T] oracle window
      const double k = aps[0].cost + aps[0].penalty;
      const double bonus = testutil::upos(g, 36.0 * k * cap);
      const double br = best_response_bonus(0, d, bonus, aps);
      const auto oracle = testutil::grid_best_response(0, d, Offer{0, bonus}, aps,
                                                       Scheme::BonusOnly, 0.0, 10.0 * cap, points);
      REQUIRE(std::abs(br - oracle.arg) < 10.0 * cap / (points - 1) + 1e-6);
      Allocation trial = d;
      trial[0] = br;
      REQUIRE(ap_utility(0, trial, Offer{0, bonus}, aps, Scheme::BonusOnly) >=
              oracle.value - 1e-8);
    }
  }
}

TEST_CASE("spb response with no bonus degenerates to the salary threshold") {
  std::mt19937_64 g(7);
  for (int rep = 0; rep < 200; ++rep) {
    auto aps = testutil::random_profiles(g, 3);
    Allocation d(aps.size());
    for (std::size_t j = 0; j < aps.size(); ++j) d[j] = testutil::upos(g, aps[j].capacity);
    const Offer offer{testutil::u01(g) * 12.0, 0.0};
    CHECK(best_response_spb(0, d, offer, aps) == best_response_salary(0, offer, aps));
  }
}

TEST_CASE("spb response is nondecreasing in the bonus") {
  std::mt19937_64 g(8);
  for (int rep = 0; rep < 200; ++rep) {
    auto aps = testutil::random_profiles(g, 3);
    Allocation d(aps.size());
    for (std::size_t j = 0; j < aps.size(); ++j) d[j] = testutil::upos(g, aps[j].capacity);
    const double p = std::max(0.0, aps[0].cost - testutil::upos(g, aps[0].cost));  // a > 0
    const double b1 = testutil::u01(g) * 40.0;
    const double b2 = b1 + testutil::u01(g) * 40.0;
    CHECK(best_response_spb(0, d, Offer{p, b2}, aps) >=
          best_response_spb(0, d, Offer{p, b1}, aps) - 1e-12);
  }
}
