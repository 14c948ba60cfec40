// End-to-end orchestration: configuration, staged execution and the
// artifact directory it produces.
//
// Artifact layout (all JSON unless noted):
//   manifest.json            config echo, per-slice counts, stage list
//   corpus.jsonl             normalized documents in input order
//   lexicon.txt              copy of the lexicon used
//   vocabulary.json
//   slices/slices.json
//   events/t{i}.json         event tree of slice i
//   models/{relation,action,recognizer}.json, models/evaluation.json
//   bundles/{event id}.json  extraction output per event and sub-event
//   networks/{event id}.json canonical network JSON
//   stages/{stage}.done      resume markers

#ifndef EVNET_PIPELINE_H_
#define EVNET_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace evnet {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path lexicon;
  std::filesystem::path gazetteer;
  std::filesystem::path annotations;
  std::filesystem::path triggers;
  std::filesystem::path output = "artifacts";
  bool strict_ingest = false;

  int step_months = 5;
  double prune_ratio = 0.05;
  int min_freq = 10;

  int topics = 25;
  int lda_iterations = 1000;
  uint64_t lda_seed = 1;
  double lda_alpha = -1;  // <= 0 means 50 / topics
  double lda_beta = 0.1;
  int min_docs = 10;
  int top_words = 100;

  std::string recognizer = "gazetteer";  // gazetteer | annotations | model
  int min_chars = 2;
  int max_chars = 6;
  int max_entities = 10;

  double l2 = 1e-3;
  int train_iterations = 200;
  int folds = 5;
  uint64_t cv_seed = 1;

  std::string action_type = "Conflict";
  double action_threshold = 0.995;
  int min_cooccur = 12;
  double weight_threshold = 0;  // relation mentions below this are dropped

  bool resume = false;

  // Sets one key from its text form. Throws ConfigError on an unknown key
  // or an unparsable value. Relative paths resolve against `base`.
  void set(const std::string& key, const std::string& value,
           const std::filesystem::path& base = {});
  // Throws ConfigError naming the first field out of range or the first
  // missing input needed by the stages up to `last_stage`.
  void validate(const std::string& last_stage = "build") const;
  nlohmann::json to_json() const;
};

// Flat "key = value" lines; '#' starts a comment. Relative paths are taken
// from the config file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base = {});

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error("stage " + stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> kStages = {
      "ingest", "vocabulary", "slice", "detect", "train", "extract", "build"};
  return kStages;
}

struct PipelineReport {
  std::vector<std::string> ran;
  std::vector<std::string> resumed;  // skipped thanks to a matching marker
};

using ProgressFn = std::function<void(const std::string&)>;

// Validates the config, then runs every stage in order, persisting each
// stage's output under config.output. With config.resume, a stage whose
// marker matches the current config is loaded instead of recomputed, up to
// the first stage that has to run. Throws StageError on failure.
PipelineReport run_pipeline(const PipelineConfig& config, const ProgressFn& progress = {});

// Runs stages up to and including `last`.
PipelineReport run_pipeline_until(const PipelineConfig& config, const std::string& last,
                                  const ProgressFn& progress = {});

}  // namespace evnet

#endif  // EVNET_PIPELINE_H_
