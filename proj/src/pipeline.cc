#include "evnet/pipeline.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "evnet/analyze.h"
#include "evnet/corpus.h"
#include "evnet/eventdetect.h"
#include "evnet/extract.h"
#include "evnet/learn.h"
#include "evnet/netmodel.h"

namespace evnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j, int indent = 2) {
  write_text(path, j.dump(indent) + "\n");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) { return json::parse(read_text(path)); }

// Everything the stages hand to one another.
struct Context {
  const PipelineConfig& cfg;
  fs::path out;
  DocumentStore store;
  std::vector<IngestIssue> issues;
  Lexicon lexicon;
  Vocabulary vocab;
  std::vector<TimeSlice> slices;
  std::vector<std::vector<DocumentEvent>> events;  // per slice
  std::optional<AnnotationSet> annotations;
  std::optional<Classifier> relation;
  std::optional<Classifier> action;
  std::optional<json> recognizer;
  json evaluation = json::object();
  std::vector<ExtractionBundle> bundles;  // every event, tree order

  explicit Context(const PipelineConfig& c) : cfg(c), out(c.output) {}

  const AnnotationSet& annotation_set() {
    if (!annotations) {
      annotations = cfg.annotations.empty() ? AnnotationSet{}
                                            : load_annotations(cfg.annotations);
    }
    return *annotations;
  }
};

void collect(const DocumentEvent& ev, std::vector<const DocumentEvent*>& out) {
  out.push_back(&ev);
  for (const auto& c : ev.children) collect(c, out);
}

std::vector<const DocumentEvent*> all_events(const Context& ctx) {
  std::vector<const DocumentEvent*> out;
  for (const auto& slice : ctx.events) {
    for (const auto& ev : slice) collect(ev, out);
  }
  return out;
}

fs::path event_file(const Context& ctx, int slice) {
  return ctx.out / "events" / ("t" + std::to_string(slice) + ".json");
}

// ---------------------------------------------------------------------------
// Stages. Each has a run and a load half; load reads what run persisted.

void run_ingest(Context& ctx) {
  auto result = ingest_documents(ctx.cfg.corpus, ctx.cfg.strict_ingest);
  if (result.store.empty()) throw std::runtime_error("no valid documents in corpus");
  ctx.store = std::move(result.store);
  ctx.issues = std::move(result.issues);
  ctx.lexicon = Lexicon::load(ctx.cfg.lexicon);
  if (ctx.lexicon.empty()) throw std::runtime_error("empty lexicon");

  std::string docs;
  for (const auto& d : ctx.store.documents()) docs += document_to_json(d).dump() + "\n";
  write_text(ctx.out / "corpus.jsonl", docs);
  write_text(ctx.out / "lexicon.txt", read_text(ctx.cfg.lexicon));
  json issues = json::array();
  for (const auto& i : ctx.issues) issues.push_back({{"line", i.line}, {"message", i.message}});
  write_json(ctx.out / "ingest_issues.json", issues);
}

void load_ingest(Context& ctx) {
  ctx.store = ingest_documents(ctx.out / "corpus.jsonl", true).store;
  ctx.lexicon = Lexicon::load(ctx.out / "lexicon.txt");
  for (const auto& i : read_json(ctx.out / "ingest_issues.json")) {
    ctx.issues.push_back({i.at("line").get<size_t>(), i.at("message").get<std::string>()});
  }
}

void run_vocabulary(Context& ctx) {
  ctx.vocab = build_vocabulary(ctx.store, ctx.lexicon,
                               {ctx.cfg.prune_ratio, ctx.cfg.min_freq});
  if (ctx.vocab.empty()) throw std::runtime_error("vocabulary is empty after pruning");
  write_json(ctx.out / "vocabulary.json", ctx.vocab.to_json());
}

void load_vocabulary(Context& ctx) {
  ctx.vocab = Vocabulary::from_json(read_json(ctx.out / "vocabulary.json"));
}

void run_slice(Context& ctx) {
  ctx.slices = partition_by_time(ctx.store, ctx.cfg.step_months);
  json j = json::array();
  for (const auto& s : ctx.slices) j.push_back(slice_to_json(s));
  write_json(ctx.out / "slices" / "slices.json", j);
}

void load_slice(Context& ctx) {
  for (const auto& s : read_json(ctx.out / "slices" / "slices.json")) {
    ctx.slices.push_back(slice_from_json(s));
  }
}

void run_detect(Context& ctx) {
  HierarchyOptions opts;
  opts.lda.topics = ctx.cfg.topics;
  opts.lda.alpha = ctx.cfg.lda_alpha;
  opts.lda.beta = ctx.cfg.lda_beta;
  opts.lda.iterations = ctx.cfg.lda_iterations;
  opts.lda.seed = ctx.cfg.lda_seed;
  opts.min_docs = ctx.cfg.min_docs;
  opts.label_words = ctx.cfg.top_words;

  ctx.events.assign(ctx.slices.size(), {});
  for (const auto& slice : ctx.slices) {
    std::vector<SliceDocument> docs;
    for (const auto& id : slice.members) {
      const Document* d = ctx.store.find(id);
      if (!d) throw std::runtime_error("slice member missing from corpus: " + id);
      docs.push_back({id, tokenize_omni_word(d->text, ctx.lexicon)});
    }
    if (!docs.empty()) {
      ctx.events[slice.index] = detect_hierarchical(docs, ctx.vocab, slice.index, opts);
    }
    json j = {{"slice", slice.index}, {"events", json::array()}};
    for (const auto& ev : ctx.events[slice.index]) j["events"].push_back(event_to_json(ev));
    write_json(event_file(ctx, slice.index), j);
  }
}

void load_detect(Context& ctx) {
  ctx.events.assign(ctx.slices.size(), {});
  for (const auto& slice : ctx.slices) {
    const json j = read_json(event_file(ctx, slice.index));
    for (const auto& e : j.at("events")) {
      ctx.events[slice.index].push_back(event_from_json(e));
    }
  }
}

json prf_json(const PRF& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f_score", p.f_score},
          {"tp", p.true_positives}, {"fp", p.false_positives},
          {"fn", p.false_negatives}};
}

void run_train(Context& ctx) {
  const auto models = ctx.out / "models";
  fs::remove_all(models);
  fs::create_directories(models);
  TrainOptions train;
  train.l2 = ctx.cfg.l2;
  train.max_iterations = ctx.cfg.train_iterations;
  ctx.evaluation = json::object();
  if (ctx.cfg.annotations.empty()) {
    write_json(models / "evaluation.json", ctx.evaluation);
    return;
  }
  const AnnotationSet& ann = ctx.annotation_set();

  const auto rel = relation_instances(ctx.store, ann, ctx.lexicon,
                                     {static_cast<size_t>(ctx.cfg.max_entities)});
  std::set<std::string> rel_classes;
  for (const auto& i : rel) rel_classes.insert(i.label);
  if (rel_classes.size() >= 2) {
    ctx.relation = train_maxent(rel, train);
    write_json(models / "relation.json", ctx.relation->to_json());
  }
  ctx.evaluation["relation"] = {{"instances", rel.size()},
                                {"classes", std::vector<std::string>(rel_classes.begin(),
                                                                     rel_classes.end())}};

  if (!ctx.cfg.triggers.empty()) {
    const Lexicon triggers = Lexicon::load(ctx.cfg.triggers);
    const auto act = action_instances(ctx.store, ann, ctx.cfg.action_type, triggers,
                                      ctx.lexicon);
    const bool has_pos = std::any_of(act.begin(), act.end(), [&](const Instance& i) {
      return i.label == ctx.cfg.action_type;
    });
    const bool has_neg = std::any_of(act.begin(), act.end(), [&](const Instance& i) {
      return i.label != ctx.cfg.action_type;
    });
    json eval = {{"instances", act.size()}, {"positive_class", ctx.cfg.action_type}};
    if (has_pos && has_neg) {
      ctx.action = train_maxent(act, train);
      ctx.action->set_threshold(ctx.cfg.action_threshold);
      write_json(models / "action.json", ctx.action->to_json());
      CvOptions cv;
      cv.folds = ctx.cfg.folds;
      cv.seed = ctx.cfg.cv_seed;
      cv.train = train;
      const auto scores = cross_validate_scores(act, ctx.cfg.action_type, cv);
      eval["folds"] = ctx.cfg.folds;
      eval["at_0.5"] = prf_json(evaluate_at(scores, 0.5));
      eval["at_threshold"] = prf_json(evaluate_at(scores, ctx.cfg.action_threshold));
      eval["threshold"] = ctx.cfg.action_threshold;
      eval["warnings"] = scores.warnings;
    }
    ctx.evaluation["action"] = eval;
  }

  if (ctx.cfg.recognizer == "model") {
    const auto examples = recognizer_examples(ctx.store, ann);
    const LengthBounds bounds{static_cast<size_t>(ctx.cfg.min_chars),
                              static_cast<size_t>(ctx.cfg.max_chars)};
    ctx.recognizer = TrainedRecognizer::train(examples, ctx.lexicon, train, bounds).to_json();
    write_json(models / "recognizer.json", *ctx.recognizer);
  }
  write_json(models / "evaluation.json", ctx.evaluation);
}

void load_train(Context& ctx) {
  const auto models = ctx.out / "models";
  if (fs::exists(models / "relation.json")) {
    ctx.relation = Classifier::from_json(read_json(models / "relation.json"));
  }
  if (fs::exists(models / "action.json")) {
    ctx.action = Classifier::from_json(read_json(models / "action.json"));
  }
  if (fs::exists(models / "recognizer.json")) {
    ctx.recognizer = read_json(models / "recognizer.json");
  }
  ctx.evaluation = read_json(models / "evaluation.json");
}

std::unique_ptr<EntityRecognizer> make_recognizer(Context& ctx) {
  const LengthBounds bounds{static_cast<size_t>(ctx.cfg.min_chars),
                            static_cast<size_t>(ctx.cfg.max_chars)};
  if (ctx.cfg.recognizer == "gazetteer") {
    return std::make_unique<GazetteerRecognizer>(
        GazetteerRecognizer::load(ctx.cfg.gazetteer, bounds));
  }
  if (ctx.cfg.recognizer == "annotations") {
    return std::make_unique<AnnotationRecognizer>(ctx.annotation_set(), bounds);
  }
  if (!ctx.recognizer) throw std::runtime_error("no trained recognizer model");
  return std::make_unique<TrainedRecognizer>(
      TrainedRecognizer::from_json(*ctx.recognizer, ctx.lexicon));
}

// Runs f(i) for i in [0, n) on a few threads; rethrows the lowest-index
// failure so errors are reported deterministically.
template <typename F>
void parallel_for(size_t n, F f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t threads =
      std::min<size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void add_subtree(const DocumentEvent& ev, const ExtractionBundle& parent,
                 std::vector<ExtractionBundle>& out) {
  for (const auto& child : ev.children) {
    out.push_back(subset_bundle(parent, child.id, child.members));
    add_subtree(child, out.back(), out);
  }
}

void run_extract(Context& ctx) {
  const auto recognizer = make_recognizer(ctx);
  std::vector<const DocumentEvent*> tops;
  for (const auto& slice : ctx.events) {
    for (const auto& ev : slice) tops.push_back(&ev);
  }
  ExtractOptions opts;
  opts.relations.max_entities = static_cast<size_t>(ctx.cfg.max_entities);
  const Classifier* rel = ctx.relation ? &*ctx.relation : nullptr;
  std::vector<ExtractionBundle> top_bundles(tops.size());
  parallel_for(tops.size(), [&](size_t i) {
    top_bundles[i] = extract_event(*tops[i], ctx.store, *recognizer, rel, ctx.lexicon, opts);
  });

  ctx.bundles.clear();
  for (size_t i = 0; i < tops.size(); ++i) {
    ctx.bundles.push_back(std::move(top_bundles[i]));
    const ExtractionBundle parent = ctx.bundles.back();
    add_subtree(*tops[i], parent, ctx.bundles);
  }
  fs::remove_all(ctx.out / "bundles");
  for (const auto& b : ctx.bundles) {
    write_json(ctx.out / "bundles" / (b.event_id + ".json"), bundle_to_json(b), -1);
  }
}

void load_extract(Context& ctx) {
  for (const DocumentEvent* ev : all_events(ctx)) {
    ctx.bundles.push_back(
        bundle_from_json(read_json(ctx.out / "bundles" / (ev->id + ".json"))));
  }
}

void run_build(Context& ctx) {
  fs::remove_all(ctx.out / "networks");
  for (const auto& b : ctx.bundles) {
    ExtractionBundle kept = b;
    std::erase_if(kept.relations, [&](const RelationMention& r) {
      return r.weight < ctx.cfg.weight_threshold;
    });
    const EventNetwork net = build_event_network(kept);
    write_json(ctx.out / "networks" / (b.event_id + ".json"), network_to_json(net));
  }
}

void load_build(Context&) {}

void write_manifest(const Context& ctx, const std::vector<std::string>& completed) {
  json slices = json::array();
  for (const auto& s : ctx.slices) {
    json entry = slice_to_json(s);
    entry.erase("members");
    entry["documents"] = s.members.size();
    if (static_cast<size_t>(s.index) < ctx.events.size()) {
      const auto& evs = ctx.events[s.index];
      entry["events"] = evs.size();
      entry["total_events"] = count_events(evs);
    }
    slices.push_back(entry);
  }
  json m = {{"config", ctx.cfg.to_json()},
            {"documents", ctx.store.size()},
            {"ingest_issues", ctx.issues.size()},
            {"vocabulary", ctx.vocab.size()},
            {"slices", slices},
            {"stages", completed},
            {"models",
             {{"relation", ctx.relation.has_value()},
              {"action", ctx.action.has_value()},
              {"recognizer", ctx.recognizer.has_value()}}}};
  if (!ctx.evaluation.empty()) m["evaluation"] = ctx.evaluation;
  write_json(ctx.out / "manifest.json", m);
}

struct Stage {
  const char* name;
  void (*run)(Context&);
  void (*load)(Context&);
};

const Stage kStages[] = {
    {"ingest", run_ingest, load_ingest},     {"vocabulary", run_vocabulary, load_vocabulary},
    {"slice", run_slice, load_slice},        {"detect", run_detect, load_detect},
    {"train", run_train, load_train},        {"extract", run_extract, load_extract},
    {"build", run_build, load_build},
};

// Config keys each stage reads, besides those of earlier stages.
const std::vector<std::vector<std::string>> kStageKeys = {
    {"corpus", "lexicon", "strict_ingest"},
    {"prune_ratio", "min_freq"},
    {"step_months"},
    {"topics", "lda_iterations", "lda_seed", "lda_alpha", "lda_beta", "min_docs",
     "top_words"},
    {"annotations", "triggers", "recognizer", "min_chars", "max_chars", "max_entities",
     "l2", "train_iterations", "folds", "cv_seed", "action_type", "action_threshold"},
    {"gazetteer"},
    {"weight_threshold"},
};

const std::set<std::string> kPathKeys = {"corpus", "lexicon", "annotations", "triggers",
                                         "gazetteer"};

// Marker content for stage i: its inputs' config values, plus size and mtime
// of input files so edits in place invalidate the stage.
std::string fingerprint(const PipelineConfig& cfg, size_t stage) {
  const json all = cfg.to_json();
  json j = json::object();
  for (size_t s = 0; s <= stage; ++s) {
    for (const auto& key : kStageKeys[s]) {
      j[key] = all.at(key);
      const std::string path = all.at(key).is_string() ? all.at(key).get<std::string>() : "";
      if (kPathKeys.count(key) && !path.empty()) {
        std::error_code ec;
        const auto size = fs::file_size(path, ec);
        const auto time = fs::last_write_time(path, ec);
        j[key + "@"] = {ec ? 0 : size, ec ? 0 : time.time_since_epoch().count()};
      }
    }
  }
  return j.dump();
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value,
                         const fs::path& base) {
  auto as_int = [&] { return parse_number<int>(key, value); };
  auto as_double = [&] { return parse_number<double>(key, value); };
  if (key == "corpus") corpus = resolve(base, value);
  else if (key == "lexicon") lexicon = resolve(base, value);
  else if (key == "gazetteer") gazetteer = resolve(base, value);
  else if (key == "annotations") annotations = resolve(base, value);
  else if (key == "triggers") triggers = resolve(base, value);
  else if (key == "output") output = resolve(base, value);
  else if (key == "strict_ingest") strict_ingest = parse_bool(key, value);
  else if (key == "step_months") step_months = as_int();
  else if (key == "prune_ratio") prune_ratio = as_double();
  else if (key == "min_freq") min_freq = as_int();
  else if (key == "topics") topics = as_int();
  else if (key == "lda_iterations") lda_iterations = as_int();
  else if (key == "lda_seed") lda_seed = parse_number<uint64_t>(key, value);
  else if (key == "lda_alpha") lda_alpha = as_double();
  else if (key == "lda_beta") lda_beta = as_double();
  else if (key == "min_docs") min_docs = as_int();
  else if (key == "top_words") top_words = as_int();
  else if (key == "recognizer") recognizer = value;
  else if (key == "min_chars") min_chars = as_int();
  else if (key == "max_chars") max_chars = as_int();
  else if (key == "max_entities") max_entities = as_int();
  else if (key == "l2") l2 = as_double();
  else if (key == "train_iterations") train_iterations = as_int();
  else if (key == "folds") folds = as_int();
  else if (key == "cv_seed") cv_seed = parse_number<uint64_t>(key, value);
  else if (key == "action_type") action_type = value;
  else if (key == "action_threshold") action_threshold = as_double();
  else if (key == "min_cooccur") min_cooccur = as_int();
  else if (key == "weight_threshold") weight_threshold = as_double();
  else if (key == "resume") resume = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void PipelineConfig::validate(const std::string& last_stage) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const auto& names = pipeline_stages();
  const auto last = std::find(names.begin(), names.end(), last_stage);
  require(last != names.end(), "unknown stage '" + last_stage + "'");
  auto runs = [&](const char* stage) {
    return std::find(names.begin(), last + 1, stage) != last + 1;
  };
  require(!corpus.empty(), "corpus path is required");
  require(!lexicon.empty(), "lexicon path is required");
  require(!output.empty(), "output path is required");
  require(step_months >= 1, "step_months must be >= 1");
  require(prune_ratio >= 0 && prune_ratio < 0.5, "prune_ratio must lie in [0, 0.5)");
  require(min_freq >= 0, "min_freq must be >= 0");
  require(topics >= 1, "topics must be >= 1");
  require(lda_iterations >= 1, "lda_iterations must be >= 1");
  require(lda_beta > 0, "lda_beta must be > 0");
  require(min_docs >= 1, "min_docs must be >= 1");
  require(top_words >= 1, "top_words must be >= 1");
  require(recognizer == "gazetteer" || recognizer == "annotations" || recognizer == "model",
          "recognizer must be gazetteer, annotations or model");
  require(!runs("extract") || recognizer != "gazetteer" || !gazetteer.empty(),
          "recognizer=gazetteer needs a gazetteer path");
  require(!runs("train") || recognizer == "gazetteer" || !annotations.empty(),
          "recognizer=" + recognizer + " needs an annotations path");
  require(min_chars >= 1 && max_chars >= min_chars,
          "character bounds must satisfy 1 <= min_chars <= max_chars");
  require(max_entities >= 2, "max_entities must be >= 2");
  require(l2 >= 0, "l2 must be >= 0");
  require(train_iterations >= 1, "train_iterations must be >= 1");
  require(folds >= 2, "folds must be >= 2");
  require(action_threshold >= 0.5 && action_threshold <= 1,
          "action_threshold must lie in [0.5, 1]");
  require(min_cooccur >= 1, "min_cooccur must be >= 1");
  require(weight_threshold >= 0 && weight_threshold <= 1,
          "weight_threshold must lie in [0, 1]");
}

json PipelineConfig::to_json() const {
  return {{"corpus", corpus.string()},
          {"lexicon", lexicon.string()},
          {"gazetteer", gazetteer.string()},
          {"annotations", annotations.string()},
          {"triggers", triggers.string()},
          {"output", output.string()},
          {"strict_ingest", strict_ingest},
          {"step_months", step_months},
          {"prune_ratio", prune_ratio},
          {"min_freq", min_freq},
          {"topics", topics},
          {"lda_iterations", lda_iterations},
          {"lda_seed", lda_seed},
          {"lda_alpha", lda_alpha > 0 ? lda_alpha : 50.0 / topics},
          {"lda_beta", lda_beta},
          {"min_docs", min_docs},
          {"top_words", top_words},
          {"recognizer", recognizer},
          {"min_chars", min_chars},
          {"max_chars", max_chars},
          {"max_entities", max_entities},
          {"l2", l2},
          {"train_iterations", train_iterations},
          {"folds", folds},
          {"cv_seed", cv_seed},
          {"action_type", action_type},
          {"action_threshold", action_threshold},
          {"min_cooccur", min_cooccur},
          {"weight_threshold", weight_threshold},
          {"resume", resume}};
}

PipelineConfig parse_config(std::istream& in, const fs::path& base) {
  PipelineConfig cfg;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)), base);
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

PipelineReport run_pipeline_until(const PipelineConfig& config, const std::string& last,
                                  const ProgressFn& progress) {
  config.validate(last);
  const auto& names = pipeline_stages();
  const auto stop = std::find(names.begin(), names.end(), last);
  const size_t count = static_cast<size_t>(stop - names.begin()) + 1;

  Context ctx(config);
  PipelineReport report;
  bool reuse = config.resume;
  std::vector<std::string> completed;
  for (size_t i = 0; i < count; ++i) {
    const Stage& stage = kStages[i];
    const fs::path marker = ctx.out / "stages" / (std::string(stage.name) + ".done");
    const std::string print = fingerprint(config, i);
    try {
      if (reuse && fs::exists(marker) && read_text(marker) == print) {
        stage.load(ctx);
        report.resumed.push_back(stage.name);
        if (progress) progress(std::string(stage.name) + " (resumed)");
      } else {
        reuse = false;
        fs::remove(marker);
        if (progress) progress(stage.name);
        stage.run(ctx);
        write_text(marker, print);
        report.ran.push_back(stage.name);
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage.name, e.what());
    }
    completed.push_back(stage.name);
  }
  // Markers of later stages describe outputs this run may have invalidated.
  if (!report.ran.empty()) {
    for (size_t i = count; i < names.size(); ++i) {
      fs::remove(ctx.out / "stages" / (names[i] + ".done"));
    }
  }
  try {
    write_manifest(ctx, completed);
  } catch (const std::exception& e) {
    throw StageError("manifest", e.what());
  }
  return report;
}

PipelineReport run_pipeline(const PipelineConfig& config, const ProgressFn& progress) {
  return run_pipeline_until(config, pipeline_stages().back(), progress);
}

}  // namespace evnet
