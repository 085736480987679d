#ifndef SRUNER_EVALUATOR_HPP_
#define SRUNER_EVALUATOR_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "sruner/action_codec.hpp"
#include "sruner/registry.hpp"

namespace sruner {

enum class Scenario { disjoint, merged };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& s);

struct MatchCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double precision() const;
  double recall() const;
  // 2PR / (P + R), 0 when P + R = 0.
  double f1() const;

  MatchCounts& operator+=(const MatchCounts& o);
  bool operator==(const MatchCounts&) const = default;
};

struct EvalReport {
  Scenario scenario = Scenario::disjoint;
  std::string source_dataset;
  std::map<std::string, MatchCounts> per_type;  // keyed by the source dataset's type names
  MatchCounts total;

  nlohmann::json to_json() const;
  // Aligned text table, one line per type plus a micro-average line.
  std::string to_table() const;
};

// One sentence: predictions over disjoint-union labels (e.g.
// "BC5_Chemical") and gold over the source dataset's own types.
struct EvalItem {
  std::vector<Mention> predicted;
  std::vector<Mention> gold;
};

// Keeps predictions whose label belongs to the source dataset, then
// exact (start, end, type) matching.
EvalReport evaluate_disjoint(std::span<const EvalItem> items, const std::string& source_dataset,
                             const LabelRegistry& registry);

// Strips dataset prefixes, drops types the source dataset does not
// annotate, collapses duplicates, then exact matching.
EvalReport evaluate_merged(std::span<const EvalItem> items, const std::string& source_dataset,
                           const LabelRegistry& registry);

EvalReport evaluate(Scenario scenario, std::span<const EvalItem> items, const std::string& source_dataset,
                    const LabelRegistry& registry);

}  // namespace sruner

#endif  // SRUNER_EVALUATOR_HPP_
