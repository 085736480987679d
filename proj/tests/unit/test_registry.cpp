#include "doctest.h"

#include "sruner/registry.hpp"

using namespace sruner;

TEST_CASE("disjoint union labels and merge map") {
  LabelRegistry reg({{"BC5", {"Chemical", "Disease"}}, {"NCBI", std::vector<std::string>{"Disease"}}});
  CHECK(reg.disjoint_labels() == std::vector<std::string>{"BC5_Chemical", "BC5_Disease", "NCBI_Disease"});
  CHECK(reg.merged_types() == std::vector<std::string>{"Chemical", "Disease"});
  for (const auto& l : reg.disjoint_labels()) {
    auto parts = LabelRegistry::split_label(l);
    REQUIRE(parts);
    CHECK(LabelRegistry::disjoint_label(parts->first, parts->second) == l);
  }
  CHECK(LabelRegistry::merged_type("NCBI_Disease") == "Disease");
  CHECK(LabelRegistry::merged_type("Plain") == "Plain");
  CHECK(reg.vocabulary().size() == 8);
}

TEST_CASE("task columns") {
  LabelRegistry reg({{"BC5", {"Chemical", "Disease"}}, {"NCBI", std::vector<std::string>{"Disease"}}});
  CHECK(reg.task_columns("NCBI") == std::vector<bool>{true, true, false, false, false, false, true, true});
  CHECK(reg.task_columns("BC5") == std::vector<bool>{true, true, true, true, true, true, false, false});
  CHECK_THROWS_AS(reg.task_columns("BC2"), RegistryError);
}

TEST_CASE("registry validation") {
  CHECK_THROWS_AS(LabelRegistry({{"BC_5", std::vector<std::string>{"A"}}}), RegistryError);
  CHECK_THROWS_AS(LabelRegistry({{"A", std::vector<std::string>{"X"}}, {"A", std::vector<std::string>{"Y"}}}), RegistryError);
  CHECK_THROWS_AS(LabelRegistry({{"A", {"X", "X"}}}), RegistryError);
  CHECK_THROWS_AS(LabelRegistry({{"", std::vector<std::string>{"X"}}}), RegistryError);
  // A type may contain '_': only the first one separates the dataset.
  LabelRegistry ok({{"A", std::vector<std::string>{"cell_line"}}});
  CHECK(LabelRegistry::merged_type(ok.disjoint_labels()[0]) == "cell_line");
}

TEST_CASE("registry json round trip") {
  LabelRegistry reg({{"BC5", {"Chemical", "Disease"}}, {"NCBI", std::vector<std::string>{"Disease"}}});
  CHECK(LabelRegistry::from_json(reg.to_json()) == reg);
}
