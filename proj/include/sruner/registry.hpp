#ifndef SRUNER_REGISTRY_HPP_
#define SRUNER_REGISTRY_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sruner/action_codec.hpp"

namespace sruner {

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetTypes {
  std::string dataset;
  std::vector<std::string> types;
};

// Disjoint union of per-dataset entity types. Type e of dataset D is
// trained under the label "D_e"; merging drops the "D_" prefix. Dataset
// names therefore must not contain '_'.
class LabelRegistry {
 public:
  LabelRegistry() = default;
  explicit LabelRegistry(std::vector<DatasetTypes> datasets);

  const std::vector<DatasetTypes>& datasets() const { return datasets_; }
  bool has_dataset(const std::string& dataset) const;
  const std::vector<std::string>& types_of(const std::string& dataset) const;

  static std::string disjoint_label(const std::string& dataset, const std::string& type);
  // (dataset, type) for a prefixed label, nullopt when there is no '_'.
  static std::optional<std::pair<std::string, std::string>> split_label(const std::string& label);
  static std::string merged_type(const std::string& label);

  // All disjoint labels, dataset order then type order.
  std::vector<std::string> disjoint_labels() const;
  // Union of unprefixed types in first-seen order.
  std::vector<std::string> merged_types() const;
  ActionVocabulary vocabulary() const;

  // Per action column of vocabulary(): true for SH, EOA and the TR/RE
  // columns of the dataset's own types.
  std::vector<bool> task_columns(const std::string& dataset) const;

  nlohmann::json to_json() const;
  static LabelRegistry from_json(const nlohmann::json& j);

  bool operator==(const LabelRegistry& o) const;

 private:
  std::vector<DatasetTypes> datasets_;
};

void validate_dataset_name(const std::string& name);

}  // namespace sruner

#endif  // SRUNER_REGISTRY_HPP_
