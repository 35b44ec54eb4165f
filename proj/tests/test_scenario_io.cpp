#include <catch2/catch_amalgamated.hpp>

#include "offload/scenario_io.hpp"

using namespace offload;
using nlohmann::json;
using Catch::Approx;

TEST_CASE("scenario file: minimal document with defaults") {
  const auto file = parse_scenario_file(json::parse(R"({
    "aps": [{"cost": 2, "quality": 0.5, "capacity": 4}],
    "gain_coefficient": 10
  })"));
  REQUIRE(file.aps.size() == 1);
  CHECK(file.aps[0].id == 0);
  CHECK(file.aps[0].penalty == Approx(0.25));  // 1 / capacity
  CHECK(file.params.gain_coefficient == 10.0);
  CHECK_FALSE(file.scheme.has_value());
  CHECK_FALSE(file.offer.has_value());
}

TEST_CASE("scenario file: full document") {
  const auto file = parse_scenario_file(json::parse(R"({
    "aps": [{"cost": 2, "quality": 0.5, "capacity": 4, "penalty": 1.5},
            {"cost": 3, "quality": 0.9, "capacity": 2}],
    "gain_coefficient": 25,
    "scheme": "bonus-only",
    "offer": {"p": 1.5, "B": 12}
  })"));
  CHECK(file.aps[0].penalty == 1.5);
  CHECK(file.aps[1].penalty == 0.5);
  REQUIRE(file.scheme.has_value());
  CHECK(*file.scheme == Scheme::BonusOnly);
  REQUIRE(file.offer.has_value());
  CHECK(file.offer->salary_rate == 1.5);
  CHECK(file.offer->bonus == 12.0);
}

TEST_CASE("scenario file: unknown keys are rejected") {
  CHECK_THROWS_AS(parse_scenario_file(json::parse(
                      R"({"aps": [{"cost":1,"quality":1,"capacity":1}],
                          "gain_coefficient": 1, "extra": true})")),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario_file(json::parse(
                      R"({"aps": [{"cost":1,"quality":1,"capacity":1,"speed":9}],
                          "gain_coefficient": 1})")),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario_file(json::parse(
                      R"({"aps": [{"cost":1,"quality":1,"capacity":1}],
                          "gain_coefficient": 1, "offer": {"p":1,"B":1,"tip":1}})")),
                  ScenarioError);
}

TEST_CASE("scenario file: invalid values are rejected with the field named") {
  auto expect_error = [](const char* doc, const char* needle) {
    try {
      parse_scenario_file(json::parse(doc));
      FAIL("expected a ScenarioError");
    } catch (const ScenarioError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error(R"({"aps": [{"cost":0,"quality":1,"capacity":1}], "gain_coefficient":1})",
               "cost");
  expect_error(R"({"aps": [{"cost":1,"quality":0,"capacity":1}], "gain_coefficient":1})",
               "quality");
  expect_error(R"({"aps": [{"cost":1,"quality":1,"capacity":-2}], "gain_coefficient":1})",
               "capacity");
  expect_error(R"({"aps": [{"cost":1,"quality":1,"capacity":0}], "gain_coefficient":1})",
               "penalty");
  expect_error(R"({"aps": [{"cost":1,"quality":1,"capacity":1}], "gain_coefficient":0})",
               "gain_coefficient");
  expect_error(R"({"aps": [], "gain_coefficient":1})", "aps");
  expect_error(R"({"aps": [{"quality":1,"capacity":1}], "gain_coefficient":1})", "cost");
  expect_error(R"({"aps": [{"cost":1,"quality":1,"capacity":1}], "gain_coefficient":1,
                   "offer": {"p": 1}})",
               "B");
}

TEST_CASE("scheme names parse in both spellings") {
  CHECK(parse_scheme("spb") == Scheme::SalaryPlusBonus);
  CHECK(parse_scheme("salary-plus-bonus") == Scheme::SalaryPlusBonus);
  CHECK(parse_scheme("salary") == Scheme::SalaryOnly);
  CHECK(parse_scheme("salary-only") == Scheme::SalaryOnly);
  CHECK(parse_scheme("bonus") == Scheme::BonusOnly);
  CHECK(parse_scheme("bonus-only") == Scheme::BonusOnly);
  CHECK_THROWS_AS(parse_scheme("tips"), ScenarioError);
}

TEST_CASE("scenario file round-trips through its JSON form") {
  const char* doc = R"({
    "aps": [{"cost": 2, "quality": 0.5, "capacity": 4},
            {"cost": 3.25, "quality": 0.9, "capacity": 2, "penalty": 0.125}],
    "gain_coefficient": 25,
    "scheme": "spb",
    "offer": {"p": 1.5, "B": 12}
  })";
  const auto first = parse_scenario_file(json::parse(doc));
  const auto second = parse_scenario_file(json::parse(to_json(first).dump()));
  REQUIRE(second.aps.size() == first.aps.size());
  for (std::size_t i = 0; i < first.aps.size(); ++i) {
    CHECK(second.aps[i].cost == first.aps[i].cost);
    CHECK(second.aps[i].quality == first.aps[i].quality);
    CHECK(second.aps[i].capacity == first.aps[i].capacity);
    CHECK(second.aps[i].penalty == first.aps[i].penalty);
  }
  CHECK(second.params.gain_coefficient == first.params.gain_coefficient);
  CHECK(second.scheme == first.scheme);
  REQUIRE(second.offer.has_value());
  CHECK(second.offer->salary_rate == first.offer->salary_rate);
  CHECK(second.offer->bonus == first.offer->bonus);
}
