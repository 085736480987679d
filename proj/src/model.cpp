#include "sruner/model.hpp"

#include <fstream>
#include <map>
#include <random>

namespace sruner {

namespace {

constexpr const char* kFormat = "sru-ner-checkpoint";
constexpr int kVersion = 1;

std::unique_ptr<EncoderAdapter> make_encoder(const EncoderConfig& c, std::uint64_t seed) {
  if (c.kind == "toy") return std::make_unique<ToyEncoder>(seed, c.dim, c.max_subwords);
  if (c.kind == "pretrained") return PretrainedEncoder::load(c.path, c.max_subwords);
  throw EncoderError("unknown encoder kind '" + c.kind + "'");
}

nlohmann::json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols) throw CheckpointError("tensor size does not match its shape");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

}  // namespace

NerModel::NerModel(const EncoderConfig& encoder, const SruConfig& sru, const GeneratorConfig& generator,
                   LabelRegistry registry, std::uint64_t seed)
    : encoder_config_(encoder),
      sru_config_(sru),
      generator_config_(generator),
      registry_(std::move(registry)),
      vocab_(registry_.vocabulary()) {
  encoder_ = make_encoder(encoder, seed);
  std::mt19937_64 rng(seed ^ 0x5eed5eed5eedULL);
  sru_ = SruParams(encoder_->dim(), vocab_.size(), sru, rng);
  generator_ = GeneratorParams(encoder_->dim(), vocab_.size(), generator, rng);
}

std::vector<Parameter*> NerModel::encoder_parameters() { return encoder_->parameters(); }

std::vector<Parameter*> NerModel::head_parameters() {
  std::vector<Parameter*> out = sru_.parameters();
  for (Parameter* p : generator_.parameters()) out.push_back(p);
  return out;
}

std::vector<Parameter*> NerModel::parameters() {
  std::vector<Parameter*> out = encoder_parameters();
  for (Parameter* p : head_parameters()) out.push_back(p);
  return out;
}

Var NerModel::sample_loss(Tape& tape, const AnnotatedSentence& sample, const ForwardContext& ctx,
                          GoldActionMatrix* augmented) {
  GoldActionMatrix gold = build_gold_matrix(sample.sentence, sample.mentions, registry_);
  EncodedSentence encoded = encode_sentence(tape, sample.sentence, *encoder_, ctx);
  Generation g = generate(encoded, generator_, sru_, GenerationMode::training, &gold, ctx);
  Var loss = sruner::sample_loss(g.logits, g.gold);
  if (augmented != nullptr) *augmented = std::move(g.gold);
  return loss;
}

Prediction NerModel::predict(const Sentence& sentence) {
  Tape tape(false);
  ForwardContext ctx;
  EncodedSentence encoded = encode_sentence(tape, sentence, *encoder_, ctx);
  Generation g = generate(encoded, generator_, sru_, GenerationMode::inference, nullptr, ctx);
  Prediction out;
  out.probabilities = g.logits.value().unaryExpr([](double x) { return sigmoid(x); });
  out.decoded = decode_probabilities(out.probabilities, sentence, vocab_);
  out.truncated = g.truncated;
  return out;
}

std::vector<Matrix> NerModel::snapshot() const {
  std::vector<Matrix> out;
  for (Parameter* p : const_cast<NerModel*>(this)->parameters()) out.push_back(p->value());
  return out;
}

void NerModel::restore(const std::vector<Matrix>& values) {
  auto params = parameters();
  if (params.size() != values.size()) throw std::invalid_argument("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = values[i];
}

nlohmann::json NerModel::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  for (Parameter* p : const_cast<NerModel*>(this)->parameters()) params[p->name()] = matrix_json(p->value());
  RunConfig shape;
  shape.encoder = encoder_config_;
  shape.sru = sru_config_;
  shape.generator = generator_config_;
  const nlohmann::json cfg = shape.to_json();
  return {{"format", kFormat},
          {"version", kVersion},
          {"config", {{"encoder", cfg["encoder"]}, {"sru", cfg["sru"]}, {"generator", cfg["generator"]}}},
          {"registry", registry_.to_json()},
          {"encoder", encoder_->describe()},
          {"parameters", params}};
}

std::unique_ptr<NerModel> NerModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw CheckpointError("not a checkpoint archive");
    if (j.at("version").get<int>() != kVersion) throw CheckpointError("unsupported checkpoint version");
    RunConfig cfg = RunConfig::from_json(j.at("config"));
    std::unique_ptr<NerModel> m(new NerModel());
    m->encoder_config_ = cfg.encoder;
    m->sru_config_ = cfg.sru;
    m->generator_config_ = cfg.generator;
    m->registry_ = LabelRegistry::from_json(j.at("registry"));
    m->vocab_ = m->registry_.vocabulary();

    const auto& enc = j.at("encoder");
    const auto& params = j.at("parameters");
    const std::string kind = enc.at("kind").get<std::string>();
    if (kind == "toy") {
      m->encoder_ = std::make_unique<ToyEncoder>(enc.at("seed").get<std::uint64_t>(), enc.at("d_enc").get<int>(),
                                                 enc.at("max_subwords").get<int>(), enc.at("buckets").get<int>());
    } else if (kind == "pretrained") {
      Matrix table = matrix_from_json(params.at("encoder.table"));
      m->encoder_ = std::make_unique<PretrainedEncoder>(enc.at("pieces").get<std::vector<std::string>>(),
                                                        std::move(table), enc.at("name").get<std::string>(),
                                                        enc.at("max_subwords").get<int>());
    } else {
      throw CheckpointError("unknown encoder kind '" + kind + "'");
    }
    std::mt19937_64 rng(0);
    m->sru_ = SruParams(m->encoder_->dim(), m->vocab_.size(), cfg.sru, rng);
    m->generator_ = GeneratorParams(m->encoder_->dim(), m->vocab_.size(), cfg.generator, rng);

    for (Parameter* p : m->parameters()) {
      if (!params.contains(p->name())) throw CheckpointError("checkpoint lacks tensor '" + p->name() + "'");
      Matrix v = matrix_from_json(params[p->name()]);
      if (v.rows() != p->value().rows() || v.cols() != p->value().cols()) {
        throw CheckpointError("tensor '" + p->name() + "' has the wrong shape");
      }
      p->value() = std::move(v);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void NerModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  out << to_json().dump() << '\n';
  if (!out) throw CheckpointError("failed writing checkpoint '" + path + "'");
}

std::unique_ptr<NerModel> NerModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  return from_json(j);
}

std::vector<ScoredMention> scenario_mentions(const std::vector<ScoredMention>& disjoint, Scenario scenario) {
  if (scenario == Scenario::disjoint) return disjoint;
  std::map<Mention, double> best;
  for (const auto& sm : disjoint) {
    Mention m = sm.mention;
    m.type = LabelRegistry::merged_type(m.type);
    auto [it, fresh] = best.emplace(m, sm.score);
    if (!fresh) it->second = std::max(it->second, sm.score);
  }
  std::vector<ScoredMention> out;
  for (const auto& [m, score] : best) out.push_back({m, score});
  return out;
}

}  // namespace sruner
