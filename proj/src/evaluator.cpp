#include "sruner/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <tuple>

namespace sruner {

std::string to_string(Scenario s) { return s == Scenario::disjoint ? "disjoint" : "merged"; }

Scenario parse_scenario(const std::string& s) {
  if (s == "disjoint") return Scenario::disjoint;
  if (s == "merged") return Scenario::merged;
  throw std::invalid_argument("unknown scenario '" + s + "' (expected disjoint or merged)");
}

double MatchCounts::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }

double MatchCounts::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }

double MatchCounts::f1() const {
  double p = precision();
  double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

namespace {

using Key = std::tuple<int, int, std::string>;

Key key_of(const Mention& m, std::string type) { return {m.start, m.end, std::move(type)}; }

// `keep` maps a predicted label to the type it is scored under, or
// returns false to discard it.
template <typename Keep>
EvalReport score(Scenario scenario, std::span<const EvalItem> items, const std::string& source,
                 const LabelRegistry& registry, Keep keep) {
  EvalReport r;
  r.scenario = scenario;
  r.source_dataset = source;
  for (const auto& t : registry.types_of(source)) r.per_type[t];
  for (const EvalItem& item : items) {
    std::set<Key> pred;
    for (const Mention& m : item.predicted) {
      std::string type;
      if (keep(m.type, type)) pred.insert(key_of(m, std::move(type)));
    }
    std::set<Key> gold;
    for (const Mention& m : item.gold) gold.insert(key_of(m, m.type));
    for (const Key& k : pred) {
      if (gold.count(k)) {
        ++r.per_type[std::get<2>(k)].tp;
      } else {
        ++r.per_type[std::get<2>(k)].fp;
      }
    }
    for (const Key& k : gold) {
      if (!pred.count(k)) ++r.per_type[std::get<2>(k)].fn;
    }
  }
  for (const auto& [type, c] : r.per_type) r.total += c;
  return r;
}

}  // namespace

EvalReport evaluate_disjoint(std::span<const EvalItem> items, const std::string& source_dataset,
                             const LabelRegistry& registry) {
  return score(Scenario::disjoint, items, source_dataset, registry, [&](const std::string& label, std::string& type) {
    auto parts = LabelRegistry::split_label(label);
    if (!parts || parts->first != source_dataset) return false;
    type = parts->second;
    return true;
  });
}

EvalReport evaluate_merged(std::span<const EvalItem> items, const std::string& source_dataset,
                           const LabelRegistry& registry) {
  const auto& own = registry.types_of(source_dataset);
  return score(Scenario::merged, items, source_dataset, registry, [&](const std::string& label, std::string& type) {
    type = LabelRegistry::merged_type(label);
    return std::find(own.begin(), own.end(), type) != own.end();
  });
}

EvalReport evaluate(Scenario scenario, std::span<const EvalItem> items, const std::string& source_dataset,
                    const LabelRegistry& registry) {
  return scenario == Scenario::disjoint ? evaluate_disjoint(items, source_dataset, registry)
                                        : evaluate_merged(items, source_dataset, registry);
}

namespace {

nlohmann::json counts_json(const MatchCounts& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"precision", c.precision()},
          {"recall", c.recall()},
          {"f1", c.f1()}};
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [type, c] : per_type) types[type] = counts_json(c);
  return {{"scenario", to_string(scenario)}, {"source_dataset", source_dataset}, {"per_type", types},
          {"micro", counts_json(total)}};
}

std::string EvalReport::to_table() const {
  std::size_t width = 5;
  for (const auto& [type, c] : per_type) width = std::max(width, type.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %7s %7s %7s %9s %9s %9s\n", static_cast<int>(width), "type", "tp", "fp", "fn",
                "precision", "recall", "f1");
  out += buf;
  auto line = [&](const std::string& name, const MatchCounts& c) {
    std::snprintf(buf, sizeof buf, "%-*s %7ld %7ld %7ld %9.2f %9.2f %9.2f\n", static_cast<int>(width), name.c_str(),
                  c.tp, c.fp, c.fn, 100.0 * c.precision(), 100.0 * c.recall(), 100.0 * c.f1());
    out += buf;
  };
  for (const auto& [type, c] : per_type) line(type, c);
  line("micro", total);
  return out;
}

}  // namespace sruner
