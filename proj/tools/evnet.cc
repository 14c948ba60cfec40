// evnet command line: pipeline stages, analyses, export and the HTTP service.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "evnet/netmodel.h"
#include "evnet/pipeline.h"
#include "evnet/query.h"
#include "evnet/service.h"
#include "evnet/synthetic.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Options shared by every pipeline stage command.
struct StageArgs {
  std::string config;
  std::string output;
  std::vector<std::string> sets;  // key=value
  bool resume = true;
  bool quiet = false;
  std::map<std::string, std::string> overrides;  // filled by stage flags
};

void add_stage_options(CLI::App* cmd, StageArgs& args) {
  cmd->add_option("-c,--config", args.config, "Pipeline config file");
  cmd->add_option("-o,--output", args.output, "Artifact directory");
  cmd->add_option("--set", args.sets, "Override a config key (key=value)");
  cmd->add_flag("--resume,!--no-resume", args.resume,
                "Reuse outputs of earlier stages when the config matches");
  cmd->add_flag("-q,--quiet", args.quiet, "No progress output");
}

// Registers a flag that overrides config key `key`.
void add_override(CLI::App* cmd, StageArgs& args, const std::string& flag,
                  const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&args, key](const std::string& v) { args.overrides[key] = v; }, help);
}

evnet::PipelineConfig make_config(const StageArgs& args, bool resume) {
  evnet::PipelineConfig cfg;
  if (!args.config.empty()) cfg = evnet::load_config(args.config);
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw evnet::ConfigError("--set expects key=value: " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : args.overrides) cfg.set(k, v);
  if (!args.output.empty()) cfg.output = args.output;
  cfg.resume = resume;
  return cfg;
}

json run_stages(const StageArgs& args, const std::string& last) {
  const auto cfg = make_config(args, args.resume);
  auto progress = [&](const std::string& stage) {
    if (!args.quiet) std::cerr << "evnet: " << stage << "\n";
  };
  evnet::run_pipeline_until(cfg, last, progress);
  std::ifstream in(cfg.output / "manifest.json");
  return json::parse(in);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// Writes an analysis result as JSON, or as a network file format.
void emit_network(const json& result, const std::string& format, const std::string& out) {
  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  if (format == "json") {
    os << result.dump(2) << "\n";
    return;
  }
  auto fmt = evnet::parse_export_format(format);
  if (!fmt) throw std::invalid_argument("unknown format '" + format + "'");
  evnet::write_network(evnet::network_from_json(result), *fmt, os);
}

std::atomic<evnet::Service*> g_service{nullptr};

void on_signal(int) {
  if (auto* s = g_service.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event network construction and analysis"};
  app.require_subcommand(1);

  // Pipeline stages -------------------------------------------------------
  StageArgs run_args, ingest_args, detect_args, train_args, extract_args, build_args;

  auto* run = app.add_subcommand("run", "Run every pipeline stage");
  add_stage_options(run, run_args);
  run_args.resume = false;

  auto* ingest = app.add_subcommand("ingest", "Ingest the corpus and build the vocabulary");
  add_stage_options(ingest, ingest_args);
  add_override(ingest, ingest_args, "--input", "corpus", "Corpus JSONL");
  add_override(ingest, ingest_args, "--lexicon", "lexicon", "Lexicon, one entry per line");
  add_override(ingest, ingest_args, "--step-months", "step_months", "Slice width in months");

  auto* detect = app.add_subcommand("detect", "Detect events and sub-events per slice");
  add_stage_options(detect, detect_args);
  std::string detect_slices = "all";
  detect->add_option("--slices", detect_slices, "Slices to report: all or a comma list");
  add_override(detect, detect_args, "--topics", "topics", "Topics per slice");
  add_override(detect, detect_args, "--seed", "lda_seed", "Sampler seed");
  add_override(detect, detect_args, "--iterations", "lda_iterations", "Gibbs sweeps");

  auto* train = app.add_subcommand("train", "Train relation and action classifiers");
  add_stage_options(train, train_args);
  std::string train_task = "action";
  train->add_option("--task", train_task, "Task to report")
      ->check(CLI::IsMember({"action", "relation"}));
  add_override(train, train_args, "--folds", "folds", "Cross-validation folds");
  add_override(train, train_args, "--threshold", "action_threshold", "Action threshold");

  auto* extract = app.add_subcommand("extract", "Extract entities and relations per event");
  add_stage_options(extract, extract_args);
  std::string extract_event;
  extract->add_option("--event", extract_event, "Print the bundle of this event");
  add_override(extract, extract_args, "--recognizer", "recognizer",
               "gazetteer, annotations or model");

  auto* build = app.add_subcommand("build", "Build event networks");
  add_stage_options(build, build_args);
  add_override(build, build_args, "--weight-threshold", "weight_threshold",
               "Drop relation mentions below this weight");

  // Analyses ----------------------------------------------------------------
  std::string artifacts_dir = "artifacts", event_id, format = "json", out_path;
  evnet::QueryParams params;
  auto* analyze = app.add_subcommand("analyze", "Analyze an event network");
  analyze->require_subcommand(1);
  analyze->fallthrough();
  analyze->add_option("-a,--artifacts", artifacts_dir, "Artifact directory");
  analyze->add_option("-e,--event", event_id, "Event id");
  analyze->add_option("-f,--format", format, "json, pajek, graphml or dot");
  analyze->add_option("--out", out_path, "Output file (default stdout)");
  auto param_option = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                          const std::string& help) {
    return cmd->add_option_function<std::string>(
        flag, [&params, key](const std::string& v) { params[key] = v; }, help);
  };
  auto* filter = analyze->add_subcommand("filter", "Keep vertices and edges by predicate");
  param_option(filter, "--vtype", "vtype", "Vertex types, comma separated");
  param_option(filter, "--etype", "etype", "Edge types, comma separated");
  param_option(filter, "--name", "name", "Vertex names, comma separated");
  param_option(filter, "--min-weight", "min_weight", "Minimum vertex weight");
  param_option(filter, "--min-edge-weight", "min_edge_weight", "Minimum edge weight");
  param_option(filter, "--from", "from", "Occurrences on or after YYYY-MM-DD");
  param_option(filter, "--to", "to", "Occurrences before YYYY-MM-DD");
  auto* plt = analyze->add_subcommand("plt", "Person-location-time track");
  param_option(plt, "--person", "person", "Person name")->required();
  auto* action = analyze->add_subcommand("action", "Entity co-occurrence in action sentences");
  param_option(action, "--threshold", "threshold", "Decision threshold in [0.5, 1]");
  param_option(action, "--min-cooccur", "min_cooccur", "Minimum co-occurrence count");
  param_option(action, "--type", "type", "Action class");
  auto* path = analyze->add_subcommand("path", "Shortest path between two entities");
  param_option(path, "--from", "from", "Source name")->required();
  param_option(path, "--to", "to", "Target name")->required();
  auto* ego = analyze->add_subcommand("ego", "Neighborhood of an entity");
  param_option(ego, "--center", "center", "Center name")->required();
  param_option(ego, "--radius", "radius", "Hops (default 1)");

  auto* exp = app.add_subcommand("export", "Write an event network in a file format");
  exp->add_option("-a,--artifacts", artifacts_dir, "Artifact directory");
  exp->add_option("-e,--event", event_id, "Event id")->required();
  exp->add_option("-f,--format", format, "json, pajek, graphml or dot")->required();
  exp->add_option("--out", out_path, "Output file (default <event>.<ext>)");

  // Service -----------------------------------------------------------------
  std::string host = "127.0.0.1", cors = "*";
  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "Serve artifacts over HTTP (read-only)");
  serve->add_option("-a,--artifacts", artifacts_dir, "Artifact directory");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (default EVNET_PORT or 8080)");
  serve->add_option("--cors-origin", cors, "Allowed browser origin");

  // Fixtures ----------------------------------------------------------------
  std::string gen_out;
  std::string gen_kind = "corpus";
  int gen_size = 200;
  uint64_t gen_seed = 7;
  double gen_noise = 0.2;
  auto* generate = app.add_subcommand("generate", "Write deterministic synthetic data");
  generate->add_option("--kind", gen_kind, "corpus or actions")
      ->check(CLI::IsMember({"corpus", "actions"}));
  generate->add_option("--out", gen_out, "Directory (corpus) or file (actions)")->required();
  generate->add_option("--size", gen_size, "Documents or instances");
  generate->add_option("--seed", gen_seed, "Seed");
  generate->add_option("--noise", gen_noise, "Label noise (actions)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = make_config(run_args, run_args.resume);
      evnet::run_pipeline(cfg, [&](const std::string& s) {
        if (!run_args.quiet) std::cerr << "evnet: " << s << "\n";
      });
      std::cout << (cfg.output / "manifest.json").string() << "\n";
    } else if (*ingest) {
      const json m = run_stages(ingest_args, "vocabulary");
      print({{"documents", m["documents"]},
             {"ingest_issues", m["ingest_issues"]},
             {"vocabulary", m["vocabulary"]}});
    } else if (*detect) {
      const json m = run_stages(detect_args, "detect");
      std::set<int> wanted;
      if (detect_slices != "all") {
        std::stringstream ss(detect_slices);
        for (std::string item; std::getline(ss, item, ',');) wanted.insert(std::stoi(item));
      }
      json slices = json::array();
      for (const auto& s : m["slices"]) {
        if (wanted.empty() || wanted.count(s["index"].get<int>())) slices.push_back(s);
      }
      print(slices);
    } else if (*train) {
      const json m = run_stages(train_args, "train");
      print(m.value("evaluation", json::object()).value(train_task, json::object()));
    } else if (*extract) {
      const json m = run_stages(extract_args, "extract");
      if (!extract_event.empty()) {
        const fs::path dir = m["config"]["output"].get<std::string>();
        const fs::path file = dir / "bundles" / (extract_event + ".json");
        if (!fs::exists(file)) throw std::out_of_range("no event '" + extract_event + "'");
        print(read_json_file(file));
      }
    } else if (*build) {
      const json m = run_stages(build_args, "build");
      print(m["slices"]);
    } else if (*analyze) {
      const auto artifacts = evnet::Artifacts::load(artifacts_dir);
      json result;
      if (*plt && event_id.empty()) {
        result = evnet::run_global_plt(artifacts, params);
      } else {
        if (event_id.empty()) throw std::invalid_argument("--event is required");
        const std::string kind = analyze->get_subcommands().front()->get_name();
        result = evnet::run_analysis(artifacts, event_id, kind, params);
      }
      emit_network(result, format, out_path);
    } else if (*exp) {
      const auto artifacts = evnet::Artifacts::load(artifacts_dir);
      const json net = evnet::event_network(artifacts, event_id);
      if (out_path.empty()) {
        const auto fmt = evnet::parse_export_format(format);
        if (!fmt) throw std::invalid_argument("unknown format '" + format + "'");
        out_path = event_id + std::string(evnet::file_extension(*fmt));
      }
      emit_network(net, format == "net" ? "pajek" : format, out_path);
      std::cout << out_path << "\n";
    } else if (*serve) {
      const auto artifacts = evnet::Artifacts::load(artifacts_dir);
      evnet::Service service(artifacts, cors);
      const int p = port ? *port : evnet::service_port_from_env();
      if (!service.bind(host, p)) throw std::runtime_error("cannot bind " + host + ":" +
                                                           std::to_string(p));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "evnet: serving " << artifacts_dir << " on http://" << host << ":" << p
                << "\n";
      service.listen_after_bind();
      g_service = nullptr;
    } else if (*generate) {
      if (gen_kind == "corpus") {
        evnet::SyntheticCorpusOptions opts;
        opts.documents = gen_size;
        opts.seed = gen_seed;
        evnet::write_synthetic_corpus(evnet::make_synthetic_corpus(opts), gen_out);
      } else {
        evnet::write_instances(evnet::make_action_dataset(gen_size, gen_noise, gen_seed),
                               gen_out);
      }
    }
  } catch (const evnet::ApiError& e) {
    std::cerr << "evnet: " << e.code_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const evnet::ConfigError& e) {
    std::cerr << "evnet: config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "evnet: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
