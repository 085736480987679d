#ifndef SRUNER_ENCODER_HPP_
#define SRUNER_ENCODER_HPP_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "sruner/action_codec.hpp"
#include "sruner/autograd.hpp"

namespace sruner {

class EncoderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subword view of a word list. ids[0] is the CLS piece and ids.back()
// the SEP piece; word_pieces[i] lists the positions in ids of word i.
struct SubwordSequence {
  std::vector<int> ids;
  std::vector<std::vector<int>> word_pieces;

  int cls_position() const { return 0; }
  int sep_position() const { return static_cast<int>(ids.size()) - 1; }
};

// What the generator needs from an encoder: subword tokenization, a
// forward pass to one embedding row per subword, and its parameters.
class EncoderAdapter {
 public:
  virtual ~EncoderAdapter() = default;

  virtual std::string kind() const = 0;
  virtual int dim() const = 0;
  // Upper bound on subword count including CLS and SEP.
  virtual int max_subwords() const = 0;

  virtual SubwordSequence tokenize(const std::vector<std::string>& words) const = 0;
  virtual Var forward(Tape& tape, const SubwordSequence& pieces, const ForwardContext& ctx) = 0;

  virtual std::vector<Parameter*> parameters() = 0;
  // Everything beyond parameter values needed to rebuild the encoder.
  virtual nlohmann::json describe() const = 0;
};

// (N+2) x d_enc rows: CLS, one row per word, SEP.
struct EncodedSentence {
  Var matrix;
  int n_tokens = 0;

  int dim() const { return static_cast<int>(matrix.cols()); }
};

// Word row k is the coordinatewise max over the rows of its subwords.
Var pool_subwords(Var subword_rows, const SubwordSequence& pieces);

// Throws EncoderError when the sentence is empty or its subword count
// exceeds the encoder window.
EncodedSentence encode_sentence(Tape& tape, const Sentence& sentence, EncoderAdapter& encoder,
                                const ForwardContext& ctx);

// Plain-value convenience for inference and tests.
Matrix encode_sentence_values(const Sentence& sentence, EncoderAdapter& encoder);

// Hashed subword lookup table followed by one residual self-attention
// layer. Subwords are chunks of up to kPieceChars code points; chunks
// after the first carry a "##" marker before hashing.
class ToyEncoder : public EncoderAdapter {
 public:
  static constexpr int kBuckets = 2048;
  static constexpr int kPieceChars = 3;

  ToyEncoder(std::uint64_t seed, int d_enc, int max_subwords = 405, int buckets = kBuckets);

  std::string kind() const override { return "toy"; }
  int dim() const override { return d_; }
  int max_subwords() const override { return max_subwords_; }

  SubwordSequence tokenize(const std::vector<std::string>& words) const override;
  Var forward(Tape& tape, const SubwordSequence& pieces, const ForwardContext& ctx) override;
  std::vector<Parameter*> parameters() override { return {&table_, &query_, &key_, &value_}; }
  nlohmann::json describe() const override;

  Parameter& table() { return table_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int bucket_of(const std::string& piece) const;

  std::uint64_t seed_;
  int d_;
  int max_subwords_;
  int buckets_;
  Parameter table_;
  Parameter query_;
  Parameter key_;
  Parameter value_;
};

// Pretrained subword embeddings read from a text file of lines
// `<piece> <v1> ... <vd>` (word2vec/GloVe layout). Tokenization is
// greedy longest-match WordPiece with "##" continuation pieces; the file
// must define [CLS], [SEP] and [UNK].
class PretrainedEncoder : public EncoderAdapter {
 public:
  static std::unique_ptr<PretrainedEncoder> load(const std::string& path, int max_subwords = 405);
  PretrainedEncoder(std::vector<std::string> pieces, Matrix vectors, std::string name, int max_subwords);

  std::string kind() const override { return "pretrained"; }
  int dim() const override { return static_cast<int>(table_.value().cols()); }
  int max_subwords() const override { return max_subwords_; }

  SubwordSequence tokenize(const std::vector<std::string>& words) const override;
  Var forward(Tape& tape, const SubwordSequence& pieces, const ForwardContext& ctx) override;
  std::vector<Parameter*> parameters() override { return {&table_}; }
  nlohmann::json describe() const override;

  const std::vector<std::string>& pieces() const { return pieces_; }

 private:
  int id_of(const std::string& piece) const;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
  std::string name_;
  int max_subwords_;
  int cls_ = -1;
  int sep_ = -1;
  int unk_ = -1;
  Parameter table_;
};

// Splits a UTF-8 string into code points; invalid bytes become single
// units.
std::vector<std::string> utf8_code_points(const std::string& s);

}  // namespace sruner

#endif  // SRUNER_ENCODER_HPP_
