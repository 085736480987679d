#ifndef SRUNER_CLI_HPP_
#define SRUNER_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "sruner/config.hpp"
#include "sruner/corpus.hpp"

namespace sruner {

// Failure carrying the one-line JSON error and the process exit code.
class CliError : public std::runtime_error {
 public:
  CliError(std::string kind, std::string message, std::string path = "", int exit_code = 2);

  const std::string& kind() const { return kind_; }
  const std::string& path() const { return path_; }
  int exit_code() const { return exit_code_; }
  nlohmann::json to_json() const;

 private:
  std::string kind_;
  std::string path_;
  int exit_code_;
};

// Reads every corpus named by the config. Throws CliError
// "corpus_not_found" naming the first missing path.
std::vector<DatasetSpec> load_corpora(const RunConfig& config, std::vector<std::string>* warnings = nullptr);

// FNV-1a of the file bytes as 16 hex digits.
std::string file_fingerprint(const std::string& path);

// Subcommands: train, predict, evaluate, encode-actions, split, stats.
// Returns the process exit code: 0 success, 1 failed --min-f1 gate, 2
// usage/config/corpus errors (one JSON line on `err`).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sruner

#endif  // SRUNER_CLI_HPP_
