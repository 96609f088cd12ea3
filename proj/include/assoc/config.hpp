#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace assoc {

// Flat `key = value` file. Values are integers, floats, true/false, quoted
// strings or bracketed lists of numbers. `#` starts a comment outside quotes.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& content, const std::string& origin = "<config>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& raw() const { return values_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;  // strings kept unquoted
  std::map<std::string, bool> quoted_;
};

struct PipelineConfig {
  // inputs
  std::string input;
  std::string lexicon;
  std::string gold;
  std::string corpus_frequency;
  std::string ldt;
  std::string judgments;
  std::vector<std::string> norms;  // name=path
  std::string out = "out";

  // external clients
  bool wiki_enabled = false;
  std::string wiki_base_url = "https://de.wikipedia.org";
  bool llm_enabled = false;
  std::string llm_url = "http://localhost:11434/v1/chat/completions";
  std::string llm_model = "gpt-oss:120b";
  std::string llm_api_key;  // environment only, never hashed or written
  std::string cache_dir;
  std::int64_t max_in_flight = 4;
  std::int64_t retry_attempts = 3;
  std::int64_t retry_backoff_ms = 500;
  std::int64_t timeout_ms = 10000;

  // balance
  std::int64_t min_trials_per_cue = 55;
  std::int64_t sample_size = 55;
  std::uint64_t seed = 0;

  // matrix
  std::int64_t min_response_frequency = 1;
  std::int64_t svd_k = 300;
  std::int64_t svd_oversampling = 10;
  std::int64_t svd_power_iterations = 4;

  // random walk
  double rw_alpha = 0.75;
  std::int64_t rw_steps = 0;  // 0: derived from alpha
  bool rw_closed_form = false;

  // graph
  std::string distance = "inverse_weight";

  // evaluation
  std::vector<double> lambda_grid;  // empty: default grid
  std::int64_t bootstrap = 1000;
  std::int64_t folds = 10;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::int64_t min_overlap = 50;

  // Overlays every key present in `file`. Unknown keys are a ConfigError.
  void apply(const KeyValueFile& file);
  // Secrets from the environment.
  void apply_environment();

  // Sorted `key = value` listing of every setting except secrets and the
  // output directory; the config hash is the SHA-256 of this text.
  std::string canonical() const;
  std::string hash() const;
};

}  // namespace assoc
