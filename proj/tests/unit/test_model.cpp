#include "doctest.h"

#include "sruner/model.hpp"
#include "support.hpp"

using namespace sruner;

namespace {

std::unique_ptr<NerModel> small_model(std::uint64_t seed) {
  EncoderConfig ec;
  ec.dim = 8;
  SruConfig sc;
  sc.half_context = 5;
  GeneratorConfig gc;
  return std::make_unique<NerModel>(ec, sc, gc, LabelRegistry({{"A", std::vector<std::string>{"X"}}, {"B", {"X", "Y"}}}), seed);
}

}  // namespace

TEST_CASE("checkpoint round trip reproduces predictions") {
  auto model = small_model(3);
  const std::string path = (test_support::scratch_dir("ckpt") / "m.json").string();
  model->save(path);
  auto back = NerModel::load(path);
  CHECK(back->registry() == model->registry());
  auto a = model->snapshot(), b = back->snapshot();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  Sentence s{{"one", "two", "three"}, std::nullopt};
  CHECK(model->predict(s).probabilities == back->predict(s).probabilities);
  CHECK(model->predict(s).decoded.plain() == back->predict(s).decoded.plain());
}

TEST_CASE("checkpoint errors") {
  auto model = small_model(1);
  nlohmann::json j = model->to_json();
  nlohmann::json wrong = j;
  wrong["format"] = "other";
  CHECK_THROWS_AS(NerModel::from_json(wrong), CheckpointError);
  nlohmann::json truncated = j;
  truncated.erase("parameters");
  CHECK_THROWS_AS(NerModel::from_json(truncated), CheckpointError);
  CHECK_THROWS_AS(NerModel::load("/nonexistent/model.json"), CheckpointError);
}

TEST_CASE("seeds decide the initial weights") {
  auto a = small_model(1)->snapshot();
  auto b = small_model(1)->snapshot();
  auto c = small_model(2)->snapshot();
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    if (a[i].size() > 0 && !(a[i] == c[i])) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("predictions are disjoint-union labels") {
  auto model = small_model(4);
  Prediction p = model->predict(Sentence{{"a", "b", "c", "d"}, std::nullopt});
  CHECK(p.probabilities.cols() == model->vocabulary().size());
  for (const auto& sm : p.decoded.mentions) {
    CHECK(LabelRegistry::split_label(sm.mention.type).has_value());
    CHECK(sm.score >= 0.0);
    CHECK(sm.score <= 1.0);
  }
}

TEST_CASE("merged scenario strips prefixes and keeps the best copy") {
  std::vector<ScoredMention> d{{{0, 1, "A_X"}, 0.6}, {{0, 1, "B_X"}, 0.9}, {{2, 2, "B_Y"}, 0.7}};
  auto merged = scenario_mentions(d, Scenario::merged);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].mention == Mention{0, 1, "X"});
  CHECK(merged[0].score == 0.9);
  CHECK(merged[1].mention == Mention{2, 2, "Y"});
  CHECK(scenario_mentions(d, Scenario::disjoint).size() == 3);
}
