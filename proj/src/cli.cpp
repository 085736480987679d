#include "sruner/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "sruner/hashing.hpp"
#include "sruner/model.hpp"
#include "sruner/trainer.hpp"

namespace sruner {

namespace fs = std::filesystem;

CliError::CliError(std::string kind, std::string message, std::string path, int exit_code)
    : std::runtime_error(std::move(message)), kind_(std::move(kind)), path_(std::move(path)), exit_code_(exit_code) {}

nlohmann::json CliError::to_json() const {
  nlohmann::json j{{"error", kind_}, {"message", what()}};
  if (!path_.empty()) j["path"] = path_;
  return j;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require_file(const std::string& path, const char* kind = "corpus_not_found") {
  if (!fs::is_regular_file(path)) throw CliError(kind, "no such file: " + path, path);
}

LoadResult read_input(const std::string& path, const std::string& format) {
  require_file(path);
  try {
    return read_corpus_file(path, format);
  } catch (const CorpusError& e) {
    throw CliError("corpus_error", e.what(), path);
  }
}

// Writes to `path`, or to `out` when path is empty or "-".
template <typename F>
void with_output(const std::string& path, std::ostream& out, F write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream f(path);
  if (!f) throw CliError("io_error", "cannot write " + path, path);
  write(f);
}

std::unique_ptr<NerModel> load_model(const std::string& path) {
  require_file(path, "checkpoint_not_found");
  try {
    return NerModel::load(path);
  } catch (const CheckpointError& e) {
    throw CliError("checkpoint_error", e.what(), path);
  }
}

// ---- train ----------------------------------------------------------------

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed, std::ostream& out,
              std::ostream& err) {
  require_file(config_path, "config_not_found");
  RunConfig cfg;
  try {
    cfg = RunConfig::load(config_path);
  } catch (const ConfigError& e) {
    throw CliError("config_error", e.what(), config_path);
  }
  if (seed) cfg.train.seed = *seed;
  if (const char* env = std::getenv("SRU_NER_RUN_DIR"); env != nullptr && *env != '\0') cfg.run_dir = env;
  if (cfg.corpora.empty()) throw CliError("config_error", "config lists no corpora", config_path);

  const std::string started = utc_now();
  std::vector<std::string> warnings;
  std::vector<DatasetSpec> datasets = load_corpora(cfg, &warnings);

  std::unique_ptr<NerModel> model;
  try {
    model = std::make_unique<NerModel>(cfg.encoder, cfg.sru, cfg.generator, registry_for(datasets), cfg.train.seed);
  } catch (const RegistryError& e) {
    throw CliError("config_error", e.what(), config_path);
  } catch (const EncoderError& e) {
    throw CliError("encoder_error", e.what(), cfg.encoder.path);
  }

  fs::create_directories(cfg.run_dir);
  const std::string metrics_path = (fs::path(cfg.run_dir) / "metrics.csv").string();
  const std::string checkpoint_path = (fs::path(cfg.run_dir) / "model.ckpt.json").string();
  std::ofstream metrics(metrics_path);
  if (!metrics) throw CliError("io_error", "cannot write " + metrics_path, metrics_path);
  metrics << metrics_csv_header() << '\n';

  TrainResult result;
  try {
    result = train(*model, datasets, cfg.train, [&](const EpochMetrics& m) {
      const std::string line = metrics_csv_line(m);
      metrics << line << '\n' << std::flush;
      err << line << '\n';
    });
  } catch (const TrainingError& e) {
    throw CliError("training_error", e.what(), "", 3);
  }
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  model->save(checkpoint_path);

  nlohmann::json fingerprints = nlohmann::json::array();
  for (const auto& c : cfg.corpora) {
    for (const auto& [split, path] : {std::pair{"train", c.train}, {"dev", c.dev}, {"test", c.test}}) {
      if (!path.empty()) {
        fingerprints.push_back({{"dataset", c.name}, {"split", split}, {"path", path}, {"fnv1a64", file_fingerprint(path)}});
      }
    }
  }
  nlohmann::json manifest{{"config", cfg.to_json()},
                          {"seed", cfg.train.seed},
                          {"corpora", fingerprints},
                          {"checkpoint", checkpoint_path},
                          {"metrics", metrics_path},
                          {"started_at", started},
                          {"finished_at", utc_now()},
                          {"epochs_run", result.epochs_run},
                          {"best_epoch", result.best_epoch},
                          {"best_dev_f1", result.best_f1},
                          {"warnings", warnings.size()}};
  const std::string manifest_path = (fs::path(cfg.run_dir) / "manifest.json").string();
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';

  out << nlohmann::json{{"run_dir", cfg.run_dir},
                        {"checkpoint", checkpoint_path},
                        {"manifest", manifest_path},
                        {"best_epoch", result.best_epoch},
                        {"best_dev_f1", result.best_f1}}
             .dump()
      << '\n';
  return 0;
}

// ---- predict --------------------------------------------------------------

int cmd_predict(const std::string& checkpoint, const std::string& input, const std::string& format,
                const std::string& output, const std::string& scenario_name, const std::string& dataset,
                std::ostream& out, std::ostream& err) {
  const Scenario scenario = parse_scenario(scenario_name);
  auto model = load_model(checkpoint);
  std::vector<std::string> keep_types;
  if (!dataset.empty()) {
    if (!model->registry().has_dataset(dataset)) {
      throw CliError("vocabulary_mismatch", "checkpoint has no dataset '" + dataset + "'", checkpoint);
    }
    keep_types = model->registry().types_of(dataset);
  }
  LoadResult in = read_input(input, format);

  Split annotated;
  annotated.reserve(in.sentences.size());
  for (std::size_t i = 0; i < in.sentences.size(); ++i) {
    AnnotatedSentence a;
    a.sentence = in.sentences[i].sentence;
    std::vector<ScoredMention> found;
    try {
      found = model->predict(a.sentence).decoded.mentions;
    } catch (const EncoderError& e) {
      err << "warning: sentence " << i << " not annotated: " << e.what() << '\n';
    }
    if (!dataset.empty()) {
      std::vector<ScoredMention> kept;
      for (const auto& sm : found) {
        auto parts = LabelRegistry::split_label(sm.mention.type);
        if (parts && parts->first == dataset) kept.push_back(sm);
        else if (parts && scenario == Scenario::merged &&
                 std::find(keep_types.begin(), keep_types.end(), parts->second) != keep_types.end()) {
          kept.push_back(sm);
        }
      }
      found = std::move(kept);
    }
    for (const auto& sm : scenario_mentions(found, scenario)) {
      a.mentions.push_back(sm.mention);
      a.scores.push_back(sm.score);
    }
    annotated.push_back(std::move(a));
  }
  with_output(output, out, [&](std::ostream& o) { write_nested(o, annotated); });
  return 0;
}

// ---- evaluate -------------------------------------------------------------

int cmd_evaluate(const std::string& pred_path, const std::string& gold_path, const std::string& gold_format,
                 const std::string& source, const std::string& scenario_name, const std::string& extra_types,
                 std::optional<double> min_f1, bool table, const std::string& output, std::ostream& out,
                 std::ostream& err) {
  const Scenario scenario = parse_scenario(scenario_name);
  try {
    validate_dataset_name(source);
  } catch (const RegistryError& e) {
    throw CliError("usage", e.what());
  }
  LoadResult pred = read_input(pred_path, "nested");
  LoadResult gold = read_input(gold_path, gold_format);
  if (pred.sentences.size() != gold.sentences.size()) {
    throw CliError("corpus_mismatch",
                   "prediction file has " + std::to_string(pred.sentences.size()) + " sentences, gold has " +
                       std::to_string(gold.sentences.size()),
                   pred_path);
  }

  std::vector<std::string> source_types = gold.types;
  for (const auto& t : split_list(extra_types)) {
    if (std::find(source_types.begin(), source_types.end(), t) == source_types.end()) source_types.push_back(t);
  }
  LabelRegistry registry({{source, source_types}});

  std::vector<EvalItem> items;
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& p = pred.sentences[i];
    const auto& g = gold.sentences[i];
    if (p.sentence.tokens != g.sentence.tokens) {
      throw CliError("corpus_mismatch", "tokens of sentence " + std::to_string(i) + " differ", pred_path);
    }
    EvalItem item;
    item.gold = g.mentions;
    for (Mention m : p.mentions) {
      auto parts = LabelRegistry::split_label(m.type);
      const bool own_prefixed = parts && parts->first == source;
      const bool bare_source =
          !own_prefixed && std::find(source_types.begin(), source_types.end(), m.type) != source_types.end();
      if (bare_source) {
        // Already merged output: only meaningful without dataset prefixes.
        if (scenario == Scenario::disjoint) {
          throw CliError("label_error", "unprefixed label '" + m.type + "' in disjoint evaluation", pred_path);
        }
        m.type = LabelRegistry::disjoint_label(source, m.type);
      } else if (!parts) {
        throw CliError("label_error", "label '" + m.type + "' has no dataset prefix", pred_path);
      }
      item.predicted.push_back(std::move(m));
    }
    items.push_back(std::move(item));
  }

  const EvalReport report = evaluate(scenario, items, source, registry);
  const std::string json_text = report.to_json().dump(2) + "\n";
  if (!output.empty()) with_output(output, out, [&](std::ostream& o) { o << json_text; });
  if (table) {
    out << report.to_table();
  } else if (output.empty()) {
    out << json_text;
  }
  if (min_f1 && report.total.f1() < *min_f1) {
    err << nlohmann::json{{"error", "below_min_f1"}, {"f1", report.total.f1()}, {"min_f1", *min_f1}}.dump() << '\n';
    return 1;
  }
  return 0;
}

// ---- encode-actions -------------------------------------------------------

int cmd_encode(const std::string& input, const std::string& format, const std::string& types, std::ostream& out) {
  LoadResult in = read_input(input, format);
  std::vector<std::string> labels = split_list(types);
  if (labels.empty()) labels = in.types;
  ActionVocabulary vocab(labels);
  for (std::size_t i = 0; i < in.sentences.size(); ++i) {
    try {
      const auto& s = in.sentences[i];
      out << format_actions(encode_mentions(s.sentence, s.mentions, vocab), vocab) << '\n';
    } catch (const CodecError& e) {
      throw CliError("codec_error", "sentence " + std::to_string(i) + ": " + e.what(), input);
    }
  }
  return 0;
}

// ---- split ----------------------------------------------------------------

int cmd_split(const std::string& train_path, const std::string& dev_path, const std::string& format,
              const std::string& types_a, const std::string& types_b, const std::string& name_a,
              const std::string& name_b, const std::string& out_dir, std::uint64_t seed, std::ostream& out) {
  DatasetSpec full;
  full.name = "source";
  LoadResult train = read_input(train_path, format);
  full.train = std::move(train.sentences);
  full.types = train.types;
  if (!dev_path.empty()) {
    LoadResult dev = read_input(dev_path, format);
    full.dev = std::move(dev.sentences);
    for (const auto& t : dev.types) {
      if (std::find(full.types.begin(), full.types.end(), t) == full.types.end()) full.types.push_back(t);
    }
  }
  const auto list_a = split_list(types_a);
  const auto list_b = split_list(types_b);
  std::pair<DatasetSpec, DatasetSpec> halves;
  try {
    validate_dataset_name(name_a);
    validate_dataset_name(name_b);
    halves = synthetic_split(full, {list_a.begin(), list_a.end()}, {list_b.begin(), list_b.end()}, seed, name_a, name_b);
  } catch (const std::exception& e) {
    throw CliError("usage", e.what());
  }
  fs::create_directories(out_dir);
  nlohmann::json summary = nlohmann::json::array();
  for (const DatasetSpec* half : {&halves.first, &halves.second}) {
    for (const auto& [split, sentences] : {std::pair{"train", &half->train}, {"dev", &half->dev}}) {
      if (split == std::string("dev") && dev_path.empty()) continue;
      const std::string path = (fs::path(out_dir) / (half->name + "." + split + ".jsonl")).string();
      write_nested_file(path, *sentences);
      summary.push_back({{"dataset", half->name}, {"split", split}, {"path", path}, {"sentences", sentences->size()}});
    }
  }
  out << summary.dump() << '\n';
  return 0;
}

// ---- stats ----------------------------------------------------------------

int cmd_stats(const std::string& config_path, const std::string& name, const std::string& format,
              const std::string& train, const std::string& dev, const std::string& test, std::ostream& out) {
  std::vector<DatasetSpec> datasets;
  if (!config_path.empty()) {
    require_file(config_path, "config_not_found");
    try {
      datasets = load_corpora(RunConfig::load(config_path));
    } catch (const ConfigError& e) {
      throw CliError("config_error", e.what(), config_path);
    }
  } else {
    DatasetSpec d;
    d.name = name;
    for (const auto& [path, into] : {std::pair{train, &d.train}, {dev, &d.dev}, {test, &d.test}}) {
      if (path.empty()) continue;
      LoadResult r = read_input(path, format);
      *into = std::move(r.sentences);
      for (const auto& t : r.types) {
        if (std::find(d.types.begin(), d.types.end(), t) == d.types.end()) d.types.push_back(t);
      }
    }
    datasets.push_back(std::move(d));
  }
  std::vector<StatRow> rows;
  for (const auto& d : datasets) {
    auto r = corpus_stats(d);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  out << stats_csv(rows);
  return 0;
}

}  // namespace

std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("corpus_not_found", "no such file: " + path, path);
  std::uint64_t h = fnv1a64("");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

std::vector<DatasetSpec> load_corpora(const RunConfig& config, std::vector<std::string>* warnings) {
  std::vector<DatasetSpec> out;
  for (const auto& c : config.corpora) {
    try {
      validate_dataset_name(c.name);
    } catch (const RegistryError& e) {
      throw CliError("config_error", e.what());
    }
    DatasetSpec d;
    d.name = c.name;
    std::vector<std::string> seen;
    for (const auto& [path, into] : {std::pair{c.train, &d.train}, {c.dev, &d.dev}, {c.test, &d.test}}) {
      if (path.empty()) continue;
      LoadResult r = read_input(path, c.format);
      *into = std::move(r.sentences);
      for (auto& s : *into) s.sentence.source_dataset = c.name;
      for (const auto& t : r.types) {
        if (std::find(seen.begin(), seen.end(), t) == seen.end()) seen.push_back(t);
      }
      if (warnings != nullptr) warnings->insert(warnings->end(), r.warnings.begin(), r.warnings.end());
    }
    d.types = c.types.empty() ? seen : c.types;
    try {
      d.validate();
    } catch (const CorpusError& e) {
      throw CliError("corpus_error", e.what(), c.train);
    }
    out.push_back(std::move(d));
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transition-based nested named-entity recognizer", "sru_ner"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train a model from a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  train->add_option("--config", config_path, "Run config (JSON)")->required();
  train->add_option("--seed", seed, "Overrides train.seed");

  auto* predict = app.add_subcommand("predict", "Annotate a corpus with a trained checkpoint");
  std::string checkpoint, input, input_format = "nested", output, scenario = "disjoint", dataset;
  predict->add_option("--checkpoint", checkpoint, "Checkpoint file written by train")->required();
  predict->add_option("--input", input, "Corpus to annotate")->required();
  predict->add_option("--format", input_format, "nested or bio")->capture_default_str();
  predict->add_option("--output", output, "Output file (default stdout)");
  predict->add_option("--scenario", scenario, "disjoint or merged")->capture_default_str();
  predict->add_option("--dataset", dataset, "Keep only this dataset's entity types");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold mentions");
  std::string pred_path, gold_path, gold_format = "nested", source, extra_types, report_path;
  std::optional<double> min_f1;
  bool table = false;
  evaluate_cmd->add_option("--pred", pred_path, "Predictions (nested records)")->required();
  evaluate_cmd->add_option("--gold", gold_path, "Gold corpus")->required();
  evaluate_cmd->add_option("--gold-format", gold_format, "nested or bio")->capture_default_str();
  evaluate_cmd->add_option("--source-dataset", source, "Dataset the gold file belongs to")->required();
  evaluate_cmd->add_option("--scenario", scenario, "disjoint or merged")->capture_default_str();
  evaluate_cmd->add_option("--types", extra_types, "Extra source types, comma separated");
  evaluate_cmd->add_option("--min-f1", min_f1, "Exit 1 when micro-F1 is below this value");
  evaluate_cmd->add_option("--output", report_path, "Also write the JSON report here");
  evaluate_cmd->add_flag("--table", table, "Print an aligned table instead of JSON");

  auto* encode = app.add_subcommand("encode-actions", "Print the canonical action sequence of each sentence");
  std::string types;
  encode->add_option("--input", input, "Corpus to encode")->required();
  encode->add_option("--format", input_format, "nested or bio")->capture_default_str();
  encode->add_option("--types", types, "Label order, comma separated (default: first seen)");

  auto* split = app.add_subcommand("split", "Split a corpus into two partially annotated halves");
  std::string train_path, dev_path, types_a, types_b, name_a = "A", name_b = "B", out_dir = ".";
  std::uint64_t split_seed = 42;
  split->add_option("--train", train_path, "Training split to divide")->required();
  split->add_option("--dev", dev_path, "Dev split, divided the same way");
  split->add_option("--format", input_format, "nested or bio")->capture_default_str();
  split->add_option("--types-a", types_a, "Types kept by the first half, comma separated")->required();
  split->add_option("--types-b", types_b, "Types kept by the second half, comma separated")->required();
  split->add_option("--name-a", name_a, "Dataset name of the first half")->capture_default_str();
  split->add_option("--name-b", name_b, "Dataset name of the second half")->capture_default_str();
  split->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Per-split, per-type mention counts as CSV");
  std::string stats_name = "corpus", test_path;
  stats->add_option("--config", config_path, "Count every corpus of a run config");
  stats->add_option("--name", stats_name, "Corpus name in the CSV")->capture_default_str();
  stats->add_option("--format", input_format, "nested or bio")->capture_default_str();
  stats->add_option("--train", train_path, "Training split");
  stats->add_option("--dev", dev_path, "Dev split");
  stats->add_option("--test", test_path, "Test split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*train) return cmd_train(config_path, seed, out, err);
    if (*predict) return cmd_predict(checkpoint, input, input_format, output, scenario, dataset, out, err);
    if (*evaluate_cmd) {
      return cmd_evaluate(pred_path, gold_path, gold_format, source, scenario, extra_types, min_f1, table,
                          report_path, out, err);
    }
    if (*encode) return cmd_encode(input, input_format, types, out);
    if (*split) {
      return cmd_split(train_path, dev_path, input_format, types_a, types_b, name_a, name_b, out_dir, split_seed, out);
    }
    if (*stats) {
      if (config_path.empty() && train_path.empty() && dev_path.empty() && test_path.empty()) {
        throw CliError("usage", "stats needs --config or at least one of --train/--dev/--test");
      }
      return cmd_stats(config_path, stats_name, input_format, train_path, dev_path, test_path, out);
    }
  } catch (const CliError& e) {
    err << e.to_json().dump() << '\n';
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    err << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"sru_ner"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sruner
