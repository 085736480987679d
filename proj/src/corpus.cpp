#include "sruner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace sruner {

void DatasetSpec::validate() const {
  for (const Split* split : {&train, &dev, &test}) {
    for (const auto& s : *split) {
      for (const auto& m : s.mentions) {
        if (std::find(types.begin(), types.end(), m.type) == types.end()) {
          throw CorpusError("dataset '" + name + "': mention type '" + m.type + "' is not declared");
        }
      }
    }
  }
}

namespace {

void note_type(std::vector<std::string>& types, const std::string& t) {
  if (std::find(types.begin(), types.end(), t) == types.end()) types.push_back(t);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string where(const std::string& origin, long line_no) { return origin + ":" + std::to_string(line_no); }

// Crossing same-type pairs cannot be encoded as actions; they are kept for
// evaluation and reported.
void check_encodable(const AnnotatedSentence& s, const std::string& at, std::vector<std::string>& warnings) {
  for (std::size_t i = 0; i < s.mentions.size(); ++i) {
    for (std::size_t j = 0; j < s.mentions.size(); ++j) {
      const Mention& a = s.mentions[i];
      const Mention& b = s.mentions[j];
      if (i != j && a.type == b.type && a.start < b.start && b.start <= a.end && a.end < b.end) {
        warnings.push_back(at + ": crossing " + a.type + " spans [" + std::to_string(a.start) + "," +
                           std::to_string(a.end) + "] and [" + std::to_string(b.start) + "," +
                           std::to_string(b.end) + "] cannot be encoded");
      }
    }
  }
}

}  // namespace

LoadResult read_bio(std::istream& in, const std::string& origin) {
  LoadResult out;
  AnnotatedSentence cur;
  std::string open_type;  // type of the run ending at the previous token
  long line_no = 0;

  auto flush = [&]() {
    if (!cur.sentence.tokens.empty()) out.sentences.push_back(std::move(cur));
    cur = AnnotatedSentence{};
    open_type.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw CorpusError(where(origin, line_no) + ": expected token<TAB>tag");
    std::string token = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (token.empty()) throw CorpusError(where(origin, line_no) + ": empty token");
    const int pos = cur.sentence.size();
    cur.sentence.tokens.push_back(token);
    if (tag == "O") {
      open_type.clear();
      continue;
    }
    if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') {
      throw CorpusError(where(origin, line_no) + ": malformed tag '" + tag + "'");
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'I' && open_type == type) {
      cur.mentions.back().end = pos;
    } else {
      cur.mentions.push_back({pos, pos, type});
      note_type(out.types, type);
    }
    open_type = type;
  }
  flush();
  return out;
}

LoadResult read_bio_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus '" + path + "'");
  return read_bio(in, path);
}

void write_bio(std::ostream& out, const Split& sentences) {
  for (const auto& s : sentences) {
    std::vector<std::string> tags(s.sentence.tokens.size(), "O");
    for (const Mention& m : s.mentions) {
      for (int i = m.start; i <= m.end; ++i) {
        if (tags[static_cast<std::size_t>(i)] != "O") {
          throw CorpusError("overlapping mentions cannot be written as BIO");
        }
        tags[static_cast<std::size_t>(i)] = (i == m.start ? "B-" : "I-") + m.type;
      }
    }
    for (std::size_t i = 0; i < tags.size(); ++i) out << s.sentence.tokens[i] << '\t' << tags[i] << '\n';
    out << '\n';
  }
}

LoadResult read_nested(std::istream& in, const std::string& origin) {
  LoadResult out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string at = where(origin, line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(at + ": " + e.what());
    }
    AnnotatedSentence s;
    try {
      s.sentence.tokens = j.at("tokens").get<std::vector<std::string>>();
      if (j.contains("dataset") && !j["dataset"].is_null()) s.sentence.source_dataset = j["dataset"].get<std::string>();
      bool scored = false;
      for (const auto& m : j.value("mentions", nlohmann::json::array())) {
        Mention mention{m.at("start").get<int>(), m.at("end").get<int>(), m.at("type").get<std::string>()};
        s.mentions.push_back(mention);
        if (m.contains("score")) {
          scored = true;
          s.scores.push_back(m["score"].get<double>());
        }
      }
      if (scored && s.scores.size() != s.mentions.size()) throw CorpusError(at + ": score missing on some mentions");
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(at + ": " + e.what());
    }
    if (s.sentence.tokens.empty()) throw CorpusError(at + ": sentence has no tokens");
    std::set<std::tuple<int, int, std::string>> seen;
    for (const Mention& m : s.mentions) {
      if (m.start < 0 || m.end < m.start || m.end >= s.sentence.size()) {
        throw CorpusError(at + ": span [" + std::to_string(m.start) + "," + std::to_string(m.end) + "] out of range");
      }
      if (!seen.emplace(m.start, m.end, m.type).second) {
        throw CorpusError(at + ": duplicate mention " + m.type + "[" + std::to_string(m.start) + "," +
                          std::to_string(m.end) + "]");
      }
      note_type(out.types, m.type);
    }
    check_encodable(s, at, out.warnings);
    out.sentences.push_back(std::move(s));
  }
  return out;
}

LoadResult read_nested_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus '" + path + "'");
  return read_nested(in, path);
}

void write_nested(std::ostream& out, const Split& sentences) {
  for (const auto& s : sentences) {
    nlohmann::ordered_json j;
    j["tokens"] = s.sentence.tokens;
    nlohmann::ordered_json ms = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.mentions.size(); ++i) {
      const Mention& m = s.mentions[i];
      nlohmann::ordered_json mj{{"start", m.start}, {"end", m.end}, {"type", m.type}};
      if (i < s.scores.size()) mj["score"] = s.scores[i];
      ms.push_back(std::move(mj));
    }
    j["mentions"] = std::move(ms);
    if (s.sentence.source_dataset) j["dataset"] = *s.sentence.source_dataset;
    out << j.dump() << '\n';
  }
}

void write_nested_file(const std::string& path, const Split& sentences) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write '" + path + "'");
  write_nested(out, sentences);
}

LoadResult read_corpus_file(const std::string& path, const std::string& format) {
  if (format == "bio") return read_bio_file(path);
  if (format == "nested") return read_nested_file(path);
  throw CorpusError("unknown corpus format '" + format + "' (expected bio or nested)");
}

namespace {

void split_half(const Split& in, const std::set<std::string>& types_a, const std::set<std::string>& types_b,
                std::mt19937_64& rng, Split& a, Split& b) {
  std::vector<std::size_t> order(in.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t first = (in.size() + 1) / 2;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool to_a = k < first;
    AnnotatedSentence s = in[order[k]];
    const auto& keep = to_a ? types_a : types_b;
    std::vector<Mention> kept;
    for (const auto& m : s.mentions) {
      if (keep.count(m.type)) kept.push_back(m);
    }
    s.mentions = std::move(kept);
    s.scores.clear();
    (to_a ? a : b).push_back(std::move(s));
  }
}

}  // namespace

std::pair<DatasetSpec, DatasetSpec> synthetic_split(const DatasetSpec& dataset,
                                                    const std::set<std::string>& types_a,
                                                    const std::set<std::string>& types_b, std::uint64_t seed,
                                                    const std::string& name_a, const std::string& name_b) {
  if (types_a.empty() || types_b.empty()) throw CorpusError("synthetic_split: empty type partition side");
  for (const auto& t : types_a) {
    if (types_b.count(t)) throw CorpusError("synthetic_split: type '" + t + "' is on both sides");
  }
  for (const auto* side : {&types_a, &types_b}) {
    for (const auto& t : *side) {
      if (std::find(dataset.types.begin(), dataset.types.end(), t) == dataset.types.end()) {
        throw CorpusError("synthetic_split: type '" + t + "' is not declared by '" + dataset.name + "'");
      }
    }
  }
  DatasetSpec a;
  DatasetSpec b;
  a.name = name_a;
  b.name = name_b;
  for (const auto& t : dataset.types) {
    if (types_a.count(t)) a.types.push_back(t);
    if (types_b.count(t)) b.types.push_back(t);
  }
  std::mt19937_64 rng(seed);
  split_half(dataset.train, types_a, types_b, rng, a.train, b.train);
  split_half(dataset.dev, types_a, types_b, rng, a.dev, b.dev);
  for (auto* half : {&a, &b}) {
    for (auto* split : {&half->train, &half->dev}) {
      for (auto& s : *split) s.sentence.source_dataset = half->name;
    }
  }
  return {std::move(a), std::move(b)};
}

std::vector<StatRow> corpus_stats(const DatasetSpec& dataset) {
  std::vector<StatRow> rows;
  const std::pair<const char*, const Split*> splits[] = {
      {"train", &dataset.train}, {"dev", &dataset.dev}, {"test", &dataset.test}};
  std::vector<std::string> order = dataset.types;
  for (const auto& [name, split] : splits) {
    for (const auto& s : *split) {
      for (const auto& m : s.mentions) note_type(order, m.type);
    }
  }
  for (const auto& [name, split] : splits) {
    std::map<std::string, long> counts;
    for (const auto& s : *split) {
      for (const auto& m : s.mentions) ++counts[m.type];
    }
    for (const auto& t : order) {
      auto it = counts.find(t);
      if (it != counts.end()) rows.push_back({dataset.name, name, t, it->second});
    }
  }
  return rows;
}

std::string stats_csv(const std::vector<StatRow>& rows) {
  std::ostringstream out;
  out << "dataset,split,type,count\n";
  for (const auto& r : rows) out << r.dataset << ',' << r.split << ',' << r.type << ',' << r.count << '\n';
  return out.str();
}

}  // namespace sruner
