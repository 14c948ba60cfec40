#include "evnet/query.h"

#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "evnet/analyze.h"

namespace evnet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view ApiError::code_name() const {
  switch (code_) {
    case Code::kNotFound: return "not_found";
    case Code::kBadRequest: return "bad_request";
    case Code::kInternal: return "internal";
  }
  return "internal";
}

int ApiError::http_status() const {
  switch (code_) {
    case Code::kNotFound: return 404;
    case Code::kBadRequest: return 400;
    case Code::kInternal: return 500;
  }
  return 500;
}

json ApiError::to_json() const {
  return {{"error", {{"code", code_name()}, {"message", what()}}}};
}

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void index_tree(const DocumentEvent& ev, std::map<std::string, const DocumentEvent*>& out) {
  out[ev.id] = &ev;
  for (const auto& c : ev.children) index_tree(c, out);
}

ApiError bad_request(const std::string& message) {
  return ApiError(ApiError::Code::kBadRequest, message);
}

ApiError not_found(const std::string& message) {
  return ApiError(ApiError::Code::kNotFound, message);
}

void check_keys(const QueryParams& params, std::initializer_list<std::string_view> allowed,
                const std::string& kind) {
  for (const auto& [key, value] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw bad_request("unknown parameter '" + key + "' for " + kind);
    }
  }
}

const std::string* param(const QueryParams& params, const std::string& key) {
  auto it = params.find(key);
  return it == params.end() ? nullptr : &it->second;
}

const std::string& required(const QueryParams& params, const std::string& key) {
  const std::string* v = param(params, key);
  if (!v || v->empty()) throw bad_request("missing parameter '" + key + "'");
  return *v;
}

template <typename T>
T number(const std::string& key, const std::string& text) {
  T out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw bad_request("parameter '" + key + "': not a number: '" + text + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw bad_request("parameter '" + key + "' must be finite");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "YYYY-MM-DD" or a full timestamp.
Timestamp date_param(const std::string& key, const std::string& text) {
  auto ts = parse_timestamp(text.size() == 10 ? text + "T00:00:00Z" : text);
  if (!ts) throw bad_request("parameter '" + key + "': expected YYYY-MM-DD, got '" + text + "'");
  return *ts;
}

json with_analysis(const EventNetwork& net, json analysis) {
  json out = network_to_json(net);
  out["analysis"] = std::move(analysis);
  return out;
}

json filter_analysis(const EventNetwork& net, const QueryParams& params) {
  check_keys(params, {"vtype", "etype", "name", "min_weight", "min_edge_weight", "from", "to"},
             "filter");
  Predicate vp(FrameKind::kVertex), ep(FrameKind::kEdge);
  json echo = json::object();
  if (const auto* v = param(params, "vtype")) {
    std::set<std::string> types;
    for (const auto& t : split_list(*v)) {
      if (!parse_entity_type(t)) throw bad_request("unknown vertex type '" + t + "'");
      types.insert(t);
    }
    vp.where(TypeIn{types});
    echo["vtype"] = types;
  }
  if (const auto* v = param(params, "etype")) {
    std::set<std::string> types;
    for (const auto& t : split_list(*v)) {
      if (!parse_relation_type(t)) throw bad_request("unknown edge type '" + t + "'");
      types.insert(t);
    }
    ep.where(TypeIn{types});
    echo["etype"] = types;
  }
  if (const auto* v = param(params, "name")) {
    const auto names = split_list(*v);
    std::set<std::string> set(names.begin(), names.end());
    vp.where(NameIn{set});
    echo["name"] = set;
  }
  if (const auto* v = param(params, "min_weight")) {
    const double w = number<double>("min_weight", *v);
    vp.where(MinWeight{w});
    echo["min_weight"] = w;
  }
  if (const auto* v = param(params, "min_edge_weight")) {
    const double w = number<double>("min_edge_weight", *v);
    ep.where(MinWeight{w});
    echo["min_edge_weight"] = w;
  }
  const std::string* from = param(params, "from");
  const std::string* to = param(params, "to");
  if (from || to) {
    OccursWithin window{Timestamp::min(), Timestamp::max()};
    if (from) {
      window.from = date_param("from", *from);
      echo["from"] = *from;
    }
    if (to) {
      window.to = date_param("to", *to);
      echo["to"] = *to;
    }
    if (window.to <= window.from) throw bad_request("'to' must be after 'from'");
    vp.where(window);
    ep.where(window);
  }
  return with_analysis(filter_network(net, vp, ep),
                       {{"kind", "filter"}, {"parameters", echo}});
}

json plt_result(std::span<const EventNetwork> nets, const QueryParams& params,
                const std::string& scope) {
  check_keys(params, {"person"}, "plt");
  const std::string& person = required(params, "person");
  const EventNetwork net = plt_analysis(nets, person);
  return with_analysis(net, {{"kind", "plt"},
                             {"event", scope},
                             {"parameters", {{"person", person}}},
                             {"phys_mentions", net.edges.size()}});
}

json action_result(const Artifacts& a, const std::string& event_id,
                   const QueryParams& params) {
  check_keys(params, {"threshold", "min_cooccur", "type"}, "action");
  const Classifier* clf = a.action_model();
  if (!clf) throw not_found("artifacts contain no action model");
  const ExtractionBundle* bundle = a.bundle(event_id);
  if (!bundle) throw not_found("no extraction bundle for event '" + event_id + "'");
  ActionOptions opts;
  opts.positive_class = a.action_type();
  opts.threshold = a.action_threshold();
  opts.min_cooccur = a.min_cooccur();
  if (const auto* v = param(params, "type")) opts.positive_class = *v;
  if (!clf->class_index(opts.positive_class)) {
    throw bad_request("action model has no class '" + opts.positive_class + "'");
  }
  if (const auto* v = param(params, "threshold")) {
    opts.threshold = number<double>("threshold", *v);
    if (opts.threshold < 0.5 || opts.threshold > 1) {
      throw bad_request("threshold must lie in [0.5, 1]");
    }
  }
  if (const auto* v = param(params, "min_cooccur")) {
    opts.min_cooccur = number<int>("min_cooccur", *v);
    if (opts.min_cooccur < 1) throw bad_request("min_cooccur must be >= 1");
  }
  const ActionResult r = action_analysis(*bundle, *clf, a.lexicon(), opts);
  return with_analysis(r.graph, {{"kind", "action"},
                                 {"event", event_id},
                                 {"parameters",
                                  {{"type", opts.positive_class},
                                   {"threshold", opts.threshold},
                                   {"min_cooccur", opts.min_cooccur}}},
                                 {"candidate_sentences", r.candidate_sentences},
                                 {"accepted_sentences", r.accepted_sentences},
                                 {"cooccurring_entities", r.cooccurring_entities}});
}

json path_result(const EventNetwork& net, const QueryParams& params) {
  check_keys(params, {"from", "to"}, "path");
  const std::string& from = required(params, "from");
  const std::string& to = required(params, "to");
  const PathResult p = shortest_path(net, from, to);
  std::string status = "found";
  if (p.status == PathResult::Status::kNoPath) status = "no_path";
  if (p.status == PathResult::Status::kVertexNotFound) status = "vertex_not_found";
  json analysis = {{"kind", "path"},
                   {"parameters", {{"from", from}, {"to", to}}},
                   {"status", status}};
  if (p.status == PathResult::Status::kFound) analysis["hops"] = p.hops();
  return with_analysis(path_network(net, p), analysis);
}

json ego_result(const EventNetwork& net, const QueryParams& params) {
  check_keys(params, {"center", "radius"}, "ego");
  const std::string& center = required(params, "center");
  int radius = 1;
  if (const auto* v = param(params, "radius")) radius = number<int>("radius", *v);
  if (radius < 1) throw bad_request("radius must be >= 1");
  return with_analysis(ego_network(net, center, radius),
                       {{"kind", "ego"},
                        {"parameters", {{"center", center}, {"radius", radius}}}});
}

}  // namespace

Artifacts Artifacts::load(const fs::path& dir) {
  Artifacts a;
  a.dir_ = dir;
  a.manifest_ = read_json(dir / "manifest.json");
  const auto& stages = a.manifest_.at("stages");
  if (std::find(stages.begin(), stages.end(), "build") == stages.end()) {
    throw std::runtime_error(dir.string() + " is not a complete pipeline run");
  }
  const json& cfg = a.manifest_.at("config");
  a.action_threshold_ = cfg.value("action_threshold", kStrictThreshold);
  a.min_cooccur_ = cfg.value("min_cooccur", 12);
  a.action_type_ = cfg.value("action_type", std::string("Conflict"));

  for (const auto& s : read_json(dir / "slices" / "slices.json")) {
    a.slices_.push_back(slice_from_json(s));
  }
  a.events_.resize(a.slices_.size());
  for (size_t i = 0; i < a.slices_.size(); ++i) {
    const json j = read_json(dir / "events" / ("t" + std::to_string(i) + ".json"));
    for (const auto& e : j.at("events")) a.events_[i].push_back(event_from_json(e));
  }
  for (const auto& slice : a.events_) {
    for (const auto& ev : slice) index_tree(ev, a.event_index_);
  }
  for (const auto& [id, ev] : a.event_index_) {
    a.networks_.emplace(id, network_from_json(read_json(dir / "networks" / (id + ".json"))));
    a.bundles_.emplace(id, bundle_from_json(read_json(dir / "bundles" / (id + ".json"))));
  }
  if (fs::exists(dir / "models" / "action.json")) {
    a.action_ = Classifier::from_json(read_json(dir / "models" / "action.json"));
  }
  a.lexicon_ = Lexicon::load(dir / "lexicon.txt");
  return a;
}

const DocumentEvent* Artifacts::find_event(const std::string& id) const {
  auto it = event_index_.find(id);
  return it == event_index_.end() ? nullptr : it->second;
}

const EventNetwork* Artifacts::network(const std::string& id) const {
  auto it = networks_.find(id);
  return it == networks_.end() ? nullptr : &it->second;
}

const ExtractionBundle* Artifacts::bundle(const std::string& id) const {
  auto it = bundles_.find(id);
  return it == bundles_.end() ? nullptr : &it->second;
}

std::vector<EventNetwork> Artifacts::top_level_networks() const {
  std::vector<EventNetwork> out;
  for (const auto& slice : events_) {
    for (const auto& ev : slice) out.push_back(networks_.at(ev.id));
  }
  return out;
}

json list_slices(const Artifacts& a) {
  json out = json::array();
  for (const auto& s : a.slices()) {
    out.push_back({{"index", s.index},
                   {"start", format_timestamp(s.start)},
                   {"end", format_timestamp(s.end)},
                   {"documents", s.members.size()},
                   {"events", a.events(s.index).size()}});
  }
  return out;
}

json slice_events(const Artifacts& a, const std::string& index) {
  size_t i = 0;
  auto [ptr, ec] = std::from_chars(index.data(), index.data() + index.size(), i);
  if (ec != std::errc() || ptr != index.data() + index.size()) {
    throw bad_request("slice index must be a non-negative integer");
  }
  if (i >= a.slices().size()) throw not_found("no slice " + index);
  json out = {{"slice", i}, {"events", json::array()}};
  for (const auto& ev : a.events(i)) out["events"].push_back(event_to_json(ev));
  return out;
}

json event_json(const Artifacts& a, const std::string& id) {
  const DocumentEvent* ev = a.find_event(id);
  if (!ev) throw not_found("no event '" + id + "'");
  return event_to_json(*ev);
}

json event_network(const Artifacts& a, const std::string& id) {
  const EventNetwork* net = a.network(id);
  if (!net) throw not_found("no event '" + id + "'");
  return network_to_json(*net);
}

json run_analysis(const Artifacts& a, const std::string& event_id, const std::string& kind,
                  const QueryParams& params) {
  const EventNetwork* net = a.network(event_id);
  if (!net) throw not_found("no event '" + event_id + "'");
  json out;
  if (kind == "filter") {
    out = filter_analysis(*net, params);
  } else if (kind == "plt") {
    return plt_result(std::span(net, 1), params, event_id);
  } else if (kind == "action") {
    return action_result(a, event_id, params);
  } else if (kind == "path") {
    out = path_result(*net, params);
  } else if (kind == "ego") {
    out = ego_result(*net, params);
  } else {
    throw not_found("unknown analysis '" + kind + "'");
  }
  out["analysis"]["event"] = event_id;
  return out;
}

json run_global_plt(const Artifacts& a, const QueryParams& params) {
  const auto nets = a.top_level_networks();
  return plt_result(nets, params, "all");
}

}  // namespace evnet
