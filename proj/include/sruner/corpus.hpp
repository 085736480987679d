#ifndef SRUNER_CORPUS_HPP_
#define SRUNER_CORPUS_HPP_

#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sruner/action_codec.hpp"

namespace sruner {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnnotatedSentence {
  Sentence sentence;
  std::vector<Mention> mentions;
  // Filled for predictions only, parallel to mentions.
  std::vector<double> scores;
};

using Split = std::vector<AnnotatedSentence>;

struct DatasetSpec {
  std::string name;
  Split train;
  Split dev;
  Split test;
  std::vector<std::string> types;

  // Throws CorpusError when a mention type is not declared.
  void validate() const;
};

struct LoadResult {
  Split sentences;
  std::vector<std::string> types;     // in first-seen order
  std::vector<std::string> warnings;  // e.g. unencodable crossing spans
};

// `token<TAB>tag` lines, blank line between sentences. Tags are O, B-X or
// I-X; an I-X that does not continue an X run opens a new mention.
LoadResult read_bio(std::istream& in, const std::string& origin = "<stream>");
LoadResult read_bio_file(const std::string& path);
void write_bio(std::ostream& out, const Split& sentences);

// One JSON object per line: {"tokens": [...], "mentions": [{"start", "end",
// "type"}, ...]} with inclusive token spans. Optional "dataset" and, for
// predictions, a per-mention "score".
LoadResult read_nested(std::istream& in, const std::string& origin = "<stream>");
LoadResult read_nested_file(const std::string& path);
void write_nested(std::ostream& out, const Split& sentences);
void write_nested_file(const std::string& path, const Split& sentences);

// Dispatches on format "bio" or "nested".
LoadResult read_corpus_file(const std::string& path, const std::string& format);

// Randomly halves train and dev sentences (first half gets the extra one
// when odd); each half keeps only mentions of its own type set. The halves
// carry no test split.
std::pair<DatasetSpec, DatasetSpec> synthetic_split(const DatasetSpec& dataset,
                                                    const std::set<std::string>& types_a,
                                                    const std::set<std::string>& types_b, std::uint64_t seed,
                                                    const std::string& name_a, const std::string& name_b);

struct StatRow {
  std::string dataset;
  std::string split;
  std::string type;
  long count = 0;
};

// One row per (split, type) with at least one mention, splits in
// train/dev/test order and types in declared order.
std::vector<StatRow> corpus_stats(const DatasetSpec& dataset);
std::string stats_csv(const std::vector<StatRow>& rows);

}  // namespace sruner

#endif  // SRUNER_CORPUS_HPP_
