#include "sruner/encoder.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "sruner/hashing.hpp"

namespace sruner {

std::vector<std::string> utf8_code_points(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
    } else if (c >= 0xE0) {
      len = 3;
    } else if (c >= 0xC0) {
      len = 2;
    }
    if (i + len > s.size()) len = 1;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

Var pool_subwords(Var subword_rows, const SubwordSequence& pieces) {
  std::vector<std::vector<int>> groups;
  groups.reserve(pieces.word_pieces.size() + 2);
  groups.push_back({pieces.cls_position()});
  for (const auto& w : pieces.word_pieces) groups.push_back(w);
  groups.push_back({pieces.sep_position()});
  return group_max_rows(subword_rows, groups);
}

EncodedSentence encode_sentence(Tape& tape, const Sentence& sentence, EncoderAdapter& encoder,
                                const ForwardContext& ctx) {
  if (sentence.tokens.empty()) throw EncoderError("cannot encode an empty sentence");
  SubwordSequence pieces = encoder.tokenize(sentence.tokens);
  if (static_cast<int>(pieces.ids.size()) > encoder.max_subwords()) {
    throw EncoderError("sentence has " + std::to_string(pieces.ids.size()) + " subwords, encoder window is " +
                       std::to_string(encoder.max_subwords()));
  }
  Var rows = encoder.forward(tape, pieces, ctx);
  EncodedSentence out;
  out.matrix = pool_subwords(rows, pieces);
  out.n_tokens = sentence.size();
  if (!out.matrix.value().allFinite()) throw EncoderError("encoder produced non-finite values");
  return out;
}

Matrix encode_sentence_values(const Sentence& sentence, EncoderAdapter& encoder) {
  Tape tape(false);
  ForwardContext ctx;
  return encode_sentence(tape, sentence, encoder, ctx).matrix.value();
}

namespace {

Matrix gaussian(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

Matrix sinusoidal_positions(Index n, Index d) {
  Matrix p(n, d);
  for (Index pos = 0; pos < n; ++pos) {
    for (Index j = 0; j < d; ++j) {
      double freq = std::pow(10000.0, -static_cast<double>(2 * (j / 2)) / static_cast<double>(d));
      p(pos, j) = (j % 2 == 0) ? std::sin(static_cast<double>(pos) * freq) : std::cos(static_cast<double>(pos) * freq);
    }
  }
  return p;
}

}  // namespace

ToyEncoder::ToyEncoder(std::uint64_t seed, int d_enc, int max_subwords, int buckets)
    : seed_(seed), d_(d_enc), max_subwords_(max_subwords), buckets_(buckets) {
  if (d_enc < 2) throw EncoderError("toy encoder needs d_enc >= 2");
  if (buckets < 3) throw EncoderError("toy encoder needs at least 3 buckets");
  Matrix table(buckets, d_enc);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int b = 0; b < buckets; ++b) {
    // Each row depends only on (seed, bucket).
    std::mt19937_64 row_rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(b + 1)));
    for (int j = 0; j < d_enc; ++j) table(b, j) = unit(row_rng);
  }
  std::mt19937_64 rng(seed * 0x2545F4914F6CDD1DULL + 17);
  double s = 1.0 / std::sqrt(static_cast<double>(d_enc));
  table_ = Parameter("encoder.table", std::move(table));
  query_ = Parameter("encoder.query", gaussian(d_enc, d_enc, s, rng));
  key_ = Parameter("encoder.key", gaussian(d_enc, d_enc, s, rng));
  value_ = Parameter("encoder.value", gaussian(d_enc, d_enc, s, rng));
}

int ToyEncoder::bucket_of(const std::string& piece) const {
  // Buckets 0 and 1 are reserved for CLS and SEP.
  return 2 + static_cast<int>(fnv1a64(piece) % static_cast<std::uint64_t>(buckets_ - 2));
}

SubwordSequence ToyEncoder::tokenize(const std::vector<std::string>& words) const {
  SubwordSequence out;
  out.ids.push_back(0);
  for (const std::string& w : words) {
    std::vector<int> positions;
    auto cps = utf8_code_points(w);
    if (cps.empty()) cps.push_back("");
    for (std::size_t i = 0; i < cps.size(); i += kPieceChars) {
      std::string piece = i == 0 ? "" : "##";
      for (std::size_t k = i; k < std::min(cps.size(), i + kPieceChars); ++k) piece += cps[k];
      positions.push_back(static_cast<int>(out.ids.size()));
      out.ids.push_back(bucket_of(piece));
    }
    out.word_pieces.push_back(std::move(positions));
  }
  out.ids.push_back(1);
  return out;
}

Var ToyEncoder::forward(Tape& tape, const SubwordSequence& pieces, const ForwardContext&) {
  const auto n = static_cast<Index>(pieces.ids.size());
  Var x = add(tape.gather(table_, pieces.ids), tape.constant(sinusoidal_positions(n, d_)));
  Var q = matmul(x, tape.param(query_));
  Var k = matmul(x, tape.param(key_));
  Var v = matmul(x, tape.param(value_));
  Var attn = softmax_rows(scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(d_))));
  return add(x, matmul(attn, v));
}

nlohmann::json ToyEncoder::describe() const {
  return {{"kind", "toy"}, {"seed", seed_}, {"d_enc", d_}, {"max_subwords", max_subwords_}, {"buckets", buckets_}};
}

PretrainedEncoder::PretrainedEncoder(std::vector<std::string> pieces, Matrix vectors, std::string name,
                                     int max_subwords)
    : pieces_(std::move(pieces)), name_(std::move(name)), max_subwords_(max_subwords) {
  if (static_cast<Index>(pieces_.size()) != vectors.rows()) throw EncoderError("piece/vector count mismatch");
  for (std::size_t i = 0; i < pieces_.size(); ++i) index_.emplace(pieces_[i], static_cast<int>(i));
  cls_ = id_of("[CLS]");
  sep_ = id_of("[SEP]");
  unk_ = id_of("[UNK]");
  if (cls_ < 0 || sep_ < 0 || unk_ < 0) throw EncoderError("pretrained vocabulary must define [CLS], [SEP], [UNK]");
  table_ = Parameter("encoder.table", std::move(vectors));
}

std::unique_ptr<PretrainedEncoder> PretrainedEncoder::load(const std::string& path, int max_subwords) {
  std::ifstream in(path);
  if (!in) throw EncoderError("cannot open pretrained embeddings '" + path + "'");
  std::vector<std::string> pieces;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string piece;
    ls >> piece;
    std::vector<double> v;
    double x = 0.0;
    while (ls >> x) v.push_back(x);
    // word2vec text files start with a "<count> <dim>" header.
    if (pieces.empty() && rows.empty() && v.size() == 1) continue;
    if (!rows.empty() && v.size() != rows.front().size()) {
      throw EncoderError("ragged embedding row for '" + piece + "' in " + path);
    }
    pieces.push_back(piece);
    rows.push_back(std::move(v));
  }
  if (rows.empty() || rows.front().empty()) throw EncoderError("no embeddings in " + path);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return std::make_unique<PretrainedEncoder>(std::move(pieces), std::move(m), path, max_subwords);
}

int PretrainedEncoder::id_of(const std::string& piece) const {
  auto it = index_.find(piece);
  return it == index_.end() ? -1 : it->second;
}

SubwordSequence PretrainedEncoder::tokenize(const std::vector<std::string>& words) const {
  SubwordSequence out;
  out.ids.push_back(cls_);
  for (const std::string& w : words) {
    auto cps = utf8_code_points(w);
    std::vector<int> ids;
    std::size_t start = 0;
    bool bad = cps.empty();
    while (start < cps.size() && !bad) {
      std::size_t end = cps.size();
      int found = -1;
      while (end > start) {
        std::string sub = start > 0 ? "##" : "";
        for (std::size_t k = start; k < end; ++k) sub += cps[k];
        found = id_of(sub);
        if (found >= 0) break;
        --end;
      }
      if (found < 0) {
        bad = true;
        break;
      }
      ids.push_back(found);
      start = end;
    }
    if (bad) ids.assign(1, unk_);
    std::vector<int> positions;
    for (int id : ids) {
      positions.push_back(static_cast<int>(out.ids.size()));
      out.ids.push_back(id);
    }
    out.word_pieces.push_back(std::move(positions));
  }
  out.ids.push_back(sep_);
  return out;
}

Var PretrainedEncoder::forward(Tape& tape, const SubwordSequence& pieces, const ForwardContext&) {
  return tape.gather(table_, pieces.ids);
}

nlohmann::json PretrainedEncoder::describe() const {
  return {{"kind", "pretrained"}, {"name", name_}, {"max_subwords", max_subwords_}, {"pieces", pieces_}};
}

}  // namespace sruner
