#include "doctest.h"

#include <set>
#include <tuple>

#include "sruner/evaluator.hpp"
#include "support.hpp"

using namespace sruner;

namespace {

LabelRegistry four_dataset_registry() {
  return LabelRegistry({{"BC5", {"Chemical", "Disease"}},
                        {"NCBI", std::vector<std::string>{"Disease"}},
                        {"BC4", std::vector<std::string>{"Chemical"}},
                        {"BC2", std::vector<std::string>{"Gene"}}});
}

// Gold BC5 Chemical X, Disease Y and Z.
EvalItem four_dataset_item() {
  EvalItem item;
  item.gold = {{0, 0, "Chemical"}, {3, 4, "Disease"}, {6, 6, "Disease"}};
  item.predicted = {{0, 0, "BC5_Chemical"}, {2, 4, "BC5_Disease"}, {3, 4, "NCBI_Disease"},
                    {8, 8, "BC4_Chemical"}, {0, 0, "BC4_Chemical"}, {9, 10, "BC2_Gene"}};
  return item;
}

// Set algebra over (start, end, type) triples after a label filter.
MatchCounts oracle(const std::vector<EvalItem>& items, const std::string& source, const LabelRegistry& reg,
                   Scenario scenario) {
  const auto& own = reg.types_of(source);
  MatchCounts c;
  for (const auto& item : items) {
    std::set<std::tuple<int, int, std::string>> p, g;
    for (const auto& m : item.predicted) {
      const auto dash = m.type.find('_');
      const std::string ds = m.type.substr(0, dash), ty = m.type.substr(dash + 1);
      const bool own_type = std::find(own.begin(), own.end(), ty) != own.end();
      if (scenario == Scenario::disjoint ? ds == source : own_type) p.insert({m.start, m.end, ty});
    }
    for (const auto& m : item.gold) g.insert({m.start, m.end, m.type});
    for (const auto& k : p) (g.count(k) ? c.tp : c.fp) += 1;
    for (const auto& k : g) c.fn += p.count(k) ? 0 : 1;
  }
  return c;
}

}  // namespace

TEST_CASE("four-dataset evaluation fixture") {
  LabelRegistry reg = four_dataset_registry();
  std::vector<EvalItem> items{four_dataset_item()};
  EvalReport d = evaluate_disjoint(items, "BC5", reg);
  CHECK(d.total == MatchCounts{1, 1, 2});
  EvalReport m = evaluate_merged(items, "BC5", reg);
  CHECK(m.total == MatchCounts{2, 2, 1});
  CHECK(m.per_type.at("Chemical") == MatchCounts{1, 1, 0});
  CHECK(m.per_type.at("Disease") == MatchCounts{1, 1, 1});
  CHECK(d.scenario == Scenario::disjoint);
  CHECK(m.to_json()["micro"]["tp"] == 2);
}

TEST_CASE("perfect predictions") {
  LabelRegistry reg({{"D", {"A", "B"}}});
  EvalItem item{{{0, 1, "D_A"}, {1, 1, "D_B"}}, {{0, 1, "A"}, {1, 1, "B"}}};
  std::vector<EvalItem> items{item};
  for (Scenario s : {Scenario::disjoint, Scenario::merged}) {
    EvalReport r = evaluate(s, items, "D", reg);
    CHECK(r.total.fp == 0);
    CHECK(r.total.fn == 0);
    CHECK(r.total.f1() == 1.0);
  }
}

TEST_CASE("metric arithmetic") {
  MatchCounts none;
  CHECK(none.f1() == 0.0);
  CHECK(none.precision() == 0.0);
  MatchCounts c{3, 1, 2};
  CHECK(c.precision() == doctest::Approx(0.75));
  CHECK(c.recall() == doctest::Approx(0.6));
  CHECK(c.f1() == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(parse_scenario("merged") == Scenario::merged);
  CHECK_THROWS(parse_scenario("joint"));
}

TEST_CASE("random cases agree with set algebra") {
  LabelRegistry reg({{"P", {"A", "B"}}, {"Q", {"B", "C"}}});
  const std::vector<std::string> labels{"P_A", "P_B", "Q_B", "Q_C"};
  const std::vector<std::string> gold_types{"A", "B"};
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<EvalItem> items(1 + rng() % 3);
    for (auto& item : items) {
      int np = static_cast<int>(rng() % 6), ng = static_cast<int>(rng() % 4);
      for (int i = 0; i < np; ++i) {
        int a = static_cast<int>(rng() % 4);
        item.predicted.push_back({a, a + static_cast<int>(rng() % 2), labels[rng() % labels.size()]});
      }
      for (int i = 0; i < ng; ++i) {
        int a = static_cast<int>(rng() % 4);
        Mention m{a, a + static_cast<int>(rng() % 2), gold_types[rng() % 2]};
        if (std::find(item.gold.begin(), item.gold.end(), m) == item.gold.end()) item.gold.push_back(m);
      }
    }
    for (Scenario s : {Scenario::disjoint, Scenario::merged}) {
      EvalReport r = evaluate(s, items, "P", reg);
      REQUIRE(r.total == oracle(items, "P", reg, s));
      MatchCounts summed;
      for (const auto& [t, c] : r.per_type) summed += c;
      REQUIRE(summed == r.total);
      // Order independence.
      auto shuffled = items;
      for (auto& item : shuffled) std::shuffle(item.predicted.begin(), item.predicted.end(), rng);
      REQUIRE(evaluate(s, shuffled, "P", reg).total == r.total);
    }
  }
}

TEST_CASE("single dataset: merged equals disjoint") {
  LabelRegistry reg({{"D", {"A", "B"}}});
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    EvalItem item;
    for (int i = 0; i < 4; ++i) {
      int a = static_cast<int>(rng() % 3);
      item.predicted.push_back({a, a, rng() % 2 ? "D_A" : "D_B"});
      if (rng() % 2) item.gold.push_back({a, a + 1, rng() % 2 ? "A" : "B"});
    }
    std::sort(item.gold.begin(), item.gold.end());
    item.gold.erase(std::unique(item.gold.begin(), item.gold.end()), item.gold.end());
    std::vector<EvalItem> items{item};
    CHECK(evaluate_disjoint(items, "D", reg).total == evaluate_merged(items, "D", reg).total);
  }
}

TEST_CASE("table rendering") {
  LabelRegistry reg = four_dataset_registry();
  std::vector<EvalItem> items{four_dataset_item()};
  std::string table = evaluate_merged(items, "BC5", reg).to_table();
  CHECK(table.find("Chemical") != std::string::npos);
  CHECK(table.find("micro") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
}
