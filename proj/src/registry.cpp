#include "sruner/registry.hpp"

#include <algorithm>
#include <set>

namespace sruner {

void validate_dataset_name(const std::string& name) {
  if (name.empty()) throw RegistryError("empty dataset name");
  for (char c : name) {
    if (c == '_' || c == ' ' || c == '\t' || c == '\n') {
      throw RegistryError("dataset name '" + name + "' must not contain '_' or whitespace");
    }
  }
}

LabelRegistry::LabelRegistry(std::vector<DatasetTypes> datasets) : datasets_(std::move(datasets)) {
  std::set<std::string> names;
  for (const auto& d : datasets_) {
    validate_dataset_name(d.dataset);
    if (!names.insert(d.dataset).second) throw RegistryError("duplicate dataset '" + d.dataset + "'");
    std::set<std::string> seen;
    for (const auto& t : d.types) {
      if (t.empty()) throw RegistryError("empty entity type in dataset '" + d.dataset + "'");
      if (!seen.insert(t).second) throw RegistryError("duplicate type '" + t + "' in dataset '" + d.dataset + "'");
    }
  }
}

bool LabelRegistry::has_dataset(const std::string& dataset) const {
  return std::any_of(datasets_.begin(), datasets_.end(), [&](const auto& d) { return d.dataset == dataset; });
}

const std::vector<std::string>& LabelRegistry::types_of(const std::string& dataset) const {
  for (const auto& d : datasets_) {
    if (d.dataset == dataset) return d.types;
  }
  throw RegistryError("unknown dataset '" + dataset + "'");
}

std::string LabelRegistry::disjoint_label(const std::string& dataset, const std::string& type) {
  return dataset + "_" + type;
}

std::optional<std::pair<std::string, std::string>> LabelRegistry::split_label(const std::string& label) {
  auto pos = label.find('_');
  if (pos == std::string::npos || pos == 0 || pos + 1 == label.size()) return std::nullopt;
  return std::make_pair(label.substr(0, pos), label.substr(pos + 1));
}

std::string LabelRegistry::merged_type(const std::string& label) {
  auto parts = split_label(label);
  return parts ? parts->second : label;
}

std::vector<std::string> LabelRegistry::disjoint_labels() const {
  std::vector<std::string> out;
  for (const auto& d : datasets_) {
    for (const auto& t : d.types) out.push_back(disjoint_label(d.dataset, t));
  }
  return out;
}

std::vector<std::string> LabelRegistry::merged_types() const {
  std::vector<std::string> out;
  for (const auto& d : datasets_) {
    for (const auto& t : d.types) {
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
  }
  return out;
}

ActionVocabulary LabelRegistry::vocabulary() const { return ActionVocabulary(disjoint_labels()); }

std::vector<bool> LabelRegistry::task_columns(const std::string& dataset) const {
  const auto& own = types_of(dataset);
  ActionVocabulary vocab = vocabulary();
  std::vector<bool> cols(static_cast<std::size_t>(vocab.size()), false);
  cols[ActionVocabulary::kShift] = true;
  cols[ActionVocabulary::kEnd] = true;
  for (const auto& t : own) {
    int label = vocab.label_index(disjoint_label(dataset, t));
    cols[static_cast<std::size_t>(ActionVocabulary::transition_index(label))] = true;
    cols[static_cast<std::size_t>(ActionVocabulary::reduce_index(label))] = true;
  }
  return cols;
}

nlohmann::json LabelRegistry::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : datasets_) arr.push_back({{"dataset", d.dataset}, {"types", d.types}});
  return arr;
}

LabelRegistry LabelRegistry::from_json(const nlohmann::json& j) {
  std::vector<DatasetTypes> ds;
  for (const auto& d : j) ds.push_back({d.at("dataset").get<std::string>(), d.at("types").get<std::vector<std::string>>()});
  return LabelRegistry(std::move(ds));
}

bool LabelRegistry::operator==(const LabelRegistry& o) const {
  if (datasets_.size() != o.datasets_.size()) return false;
  for (std::size_t i = 0; i < datasets_.size(); ++i) {
    if (datasets_[i].dataset != o.datasets_[i].dataset || datasets_[i].types != o.datasets_[i].types) return false;
  }
  return true;
}

}  // namespace sruner
