#include "evnet/analyze.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace evnet {

// ---------------------------------------------------------------------------
// Information filtering

namespace {

bool info_occurs_within(const nlohmann::json& info, const OccursWithin& window) {
  if (!info.is_object() || !info.contains("occurrences")) return false;
  for (const auto& o : info["occurrences"]) {
    if (!o.is_object() || !o.contains("timestamp") || !o["timestamp"].is_string()) {
      continue;
    }
    auto ts = parse_timestamp(o["timestamp"].get<std::string>());
    if (ts && *ts >= window.from && *ts < window.to) return true;
  }
  return false;
}

template <typename Frame>
bool clause_holds(const Clause& clause, const Frame& frame, const std::string* name) {
  return std::visit(
      [&](const auto& c) -> bool {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, TypeIn>) {
          return c.types.count(std::string(to_string(frame.type))) > 0;
        } else if constexpr (std::is_same_v<C, NameIn>) {
          return name && c.names.count(*name) > 0;
        } else if constexpr (std::is_same_v<C, MinWeight>) {
          return frame.weight >= c.threshold;
        } else if constexpr (std::is_same_v<C, HasInfo>) {
          return frame.info.is_object() && frame.info.contains(c.key);
        } else if constexpr (std::is_same_v<C, InfoEquals>) {
          return frame.info.is_object() && frame.info.contains(c.key) &&
                 frame.info[c.key] == c.value;
        } else {
          return info_occurs_within(frame.info, c);
        }
      },
      clause);
}

}  // namespace

bool Predicate::operator()(const VertexFrame& v) const {
  return std::all_of(clauses_.begin(), clauses_.end(),
                     [&](const Clause& c) { return clause_holds(c, v, &v.name); });
}

bool Predicate::operator()(const EdgeFrame& e) const {
  return std::all_of(clauses_.begin(), clauses_.end(),
                     [&](const Clause& c) { return clause_holds(c, e, nullptr); });
}

EventNetwork filter_network(const EventNetwork& net, const Predicate& vp,
                            const Predicate& ep) {
  EventNetwork out;
  out.event_id = net.event_id;
  out.provenance = net.provenance;
  std::set<int> kept;
  for (const auto& v : net.vertices) {
    if (vp(v)) {
      kept.insert(v.key);
      out.vertices.push_back(v);
    }
  }
  for (const auto& e : net.edges) {
    if (kept.count(e.v1) && kept.count(e.v2) && ep(e)) out.edges.push_back(e);
  }
  return out;
}

EventNetwork induced_subgraph(const EventNetwork& net, const std::set<int>& keys) {
  EventNetwork out;
  out.event_id = net.event_id;
  out.provenance = net.provenance;
  for (const auto& v : net.vertices) {
    if (keys.count(v.key)) out.vertices.push_back(v);
  }
  for (const auto& e : net.edges) {
    if (keys.count(e.v1) && keys.count(e.v2)) out.edges.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PLT analysis

std::vector<PhysMention> select_phys_mentions(std::span<const EventNetwork> nets,
                                              const std::string& person) {
  std::vector<PhysMention> out;
  for (const auto& net : nets) {
    const auto idx = key_index(net);
    for (const auto& e : net.edges) {
      if (e.type != RelationType::kPhys) continue;
      const VertexFrame& a = net.vertices[idx.at(e.v1)];
      const VertexFrame& b = net.vertices[idx.at(e.v2)];
      const VertexFrame* loc = nullptr;
      if (a.type == EntityType::kPer && a.name == person && b.type == EntityType::kLoc) {
        loc = &b;
      } else if (b.type == EntityType::kPer && b.name == person &&
                 a.type == EntityType::kLoc) {
        loc = &a;
      }
      if (!loc || !e.info.is_object() || !e.info.contains("occurrences")) continue;
      for (const auto& o : e.info["occurrences"]) {
        if (!o.contains("timestamp") || !o["timestamp"].is_string()) continue;
        auto ts = parse_timestamp(o["timestamp"].get<std::string>());
        if (!ts) continue;
        out.push_back({net.event_id, format_date(*ts), loc->name, loc->weight,
                       o.value("weight", e.weight), o.value("doc", std::string()),
                       o.value("sentence", 0)});
      }
    }
  }
  return out;
}

EventNetwork plt_analysis(std::span<const EventNetwork> nets, const std::string& person) {
  if (person.empty()) throw std::invalid_argument("person must be non-empty");
  EventNetwork out;
  out.event_id = "plt:" + person;
  for (size_t i = 0; i < nets.size(); ++i) {
    out.provenance += (i ? "," : "") + nets[i].event_id;
  }
  std::map<std::pair<EntityType, std::string>, int> keys;
  auto vertex_for = [&](EntityType type, const std::string& name, double weight) {
    auto [it, inserted] =
        keys.emplace(std::make_pair(type, name), static_cast<int>(out.vertices.size()));
    if (inserted) {
      out.vertices.push_back({it->second, name, type, weight, nlohmann::json::object()});
    } else {
      auto& v = out.vertices[it->second];
      v.weight = std::max(v.weight, weight);
    }
    return it->second;
  };
  for (const auto& m : select_phys_mentions(nets, person)) {
    const int t = vertex_for(EntityType::kTime, m.date, 1.0);
    const int l = vertex_for(EntityType::kLoc, m.location, m.location_weight);
    out.edges.push_back({RelationType::kPhys, t, l, m.weight,
                         {{"event", m.event_id},
                          {"doc", m.doc_id},
                          {"sentence", m.sentence},
                          {"person", person}}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Action analysis

std::map<EntityPair, int> count_cooccurrences(
    std::span<const std::vector<EntityKey>> sentences) {
  std::map<EntityPair, int> counts;
  for (const auto& entities : sentences) {
    std::set<EntityKey> distinct(entities.begin(), entities.end());
    for (auto i = distinct.begin(); i != distinct.end(); ++i) {
      for (auto j = std::next(i); j != distinct.end(); ++j) ++counts[{*i, *j}];
    }
  }
  return counts;
}

FeatureBag sentence_features(const std::string& text, const Lexicon& lexicon) {
  FeatureBag f;
  for (const auto& [term, n] : tokenize_omni_word(text, lexicon)) f[term] = n;
  return f;
}

ActionResult action_analysis(const ExtractionBundle& bundle,
                             const Classifier& action_clf, const Lexicon& lexicon,
                             const ActionOptions& options) {
  if (options.min_cooccur < 1) throw std::invalid_argument("min_cooccur must be >= 1");
  std::map<SentenceRef, std::vector<EntityKey>> by_sentence;
  for (const auto& m : bundle.mentions) {
    by_sentence[{m.doc_id, m.sentence_index}].emplace_back(m.surface, m.etype);
  }
  ActionResult result;
  std::vector<std::vector<EntityKey>> accepted;
  std::vector<SentenceRef> accepted_refs;
  for (const auto& s : bundle.sentences) {
    auto it = by_sentence.find({s.doc_id, s.index});
    if (it == by_sentence.end()) continue;
    std::set<EntityKey> distinct(it->second.begin(), it->second.end());
    if (distinct.size() < 2) continue;
    ++result.candidate_sentences;
    if (decide(action_clf, sentence_features(s.text, lexicon), options.positive_class,
               options.threshold)) {
      accepted.push_back(it->second);
      accepted_refs.emplace_back(s.doc_id, s.index);
    }
  }
  result.accepted_sentences = accepted.size();

  const auto counts = count_cooccurrences(accepted);
  std::set<EntityKey> cooccurring;
  for (const auto& [pair, n] : counts) {
    cooccurring.insert(pair.first);
    cooccurring.insert(pair.second);
  }
  result.cooccurring_entities = cooccurring.size();

  // Vertex weight: strongest mention evidence in the bundle.
  std::map<EntityKey, double> best_weight;
  for (const auto& m : bundle.mentions) {
    auto& w = best_weight[{m.surface, m.etype}];
    w = std::max(w, m.weight);
  }

  EventNetwork& net = result.graph;
  net.event_id = bundle.event_id;
  net.provenance = bundle.event_id + ":action:" + options.positive_class;
  std::map<EntityKey, int> keys;
  auto vertex_for = [&](const EntityKey& k) {
    auto [it, inserted] = keys.emplace(k, static_cast<int>(net.vertices.size()));
    if (inserted) {
      net.vertices.push_back({it->second, k.first, k.second, best_weight[k],
                              nlohmann::json::object()});
    }
    return it->second;
  };
  for (const auto& [pair, n] : counts) {
    if (n < options.min_cooccur) continue;
    nlohmann::json sentences = nlohmann::json::array();
    for (size_t i = 0; i < accepted.size(); ++i) {
      const auto& ents = accepted[i];
      if (std::find(ents.begin(), ents.end(), pair.first) != ents.end() &&
          std::find(ents.begin(), ents.end(), pair.second) != ents.end()) {
        sentences.push_back({{"doc", accepted_refs[i].first},
                             {"sentence", accepted_refs[i].second}});
      }
    }
    const int a = vertex_for(pair.first);
    const int b = vertex_for(pair.second);
    net.edges.push_back({RelationType::kCoOccur, a, b, static_cast<double>(n),
                         {{"count", n}, {"sentences", sentences}}});
  }
  return result;
}

std::vector<Instance> generate_action_negatives(std::span<const Sentence> sentences,
                                                const std::set<SentenceRef>& annotated,
                                                const Lexicon& triggers,
                                                const Lexicon& feature_lexicon,
                                                const std::string& negative_label) {
  if (triggers.empty()) throw std::invalid_argument("empty trigger lexicon");
  std::vector<Instance> out;
  for (const auto& s : sentences) {
    if (annotated.count({s.doc_id, s.index})) continue;
    if (tokenize_omni_word(s.text, triggers).empty()) continue;
    out.push_back({sentence_features(s.text, feature_lexicon), negative_label});
  }
  return out;
}

std::vector<Instance> action_instances(const DocumentStore& store,
                                       const AnnotationSet& annotations,
                                       const std::string& action_type,
                                       const Lexicon& triggers,
                                       const Lexicon& feature_lexicon) {
  std::vector<Instance> positives;
  std::vector<Sentence> all;
  std::set<SentenceRef> annotated;
  for (const auto& [doc_id, a] : annotations) {
    const Document* doc = store.find(doc_id);
    if (!doc) continue;
    auto sentences = split_sentences(*doc);
    std::set<int> marked;
    for (const auto& act : a.actions) {
      // Every annotated event mention is excluded from the negatives.
      annotated.insert({doc_id, act.sentence});
      if (act.type == action_type) marked.insert(act.sentence);
    }
    for (const auto& s : sentences) {
      if (marked.count(s.index)) {
        positives.push_back({sentence_features(s.text, feature_lexicon), action_type});
      }
    }
    all.insert(all.end(), sentences.begin(), sentences.end());
  }
  auto negatives = generate_action_negatives(all, annotated, triggers, feature_lexicon);
  positives.insert(positives.end(), negatives.begin(), negatives.end());
  return positives;
}

// ---------------------------------------------------------------------------
// Social-network queries

namespace {

struct Adjacency {
  // Per vertex position: (neighbor position, edge index), sorted by neighbor
  // key then edge index.
  std::vector<std::vector<std::pair<size_t, size_t>>> out;
};

Adjacency adjacency(const EventNetwork& net) {
  const auto idx = key_index(net);
  Adjacency adj;
  adj.out.resize(net.vertices.size());
  for (size_t i = 0; i < net.edges.size(); ++i) {
    const size_t a = idx.at(net.edges[i].v1);
    const size_t b = idx.at(net.edges[i].v2);
    adj.out[a].emplace_back(b, i);
    adj.out[b].emplace_back(a, i);
  }
  for (auto& list : adj.out) {
    std::sort(list.begin(), list.end(), [&](const auto& x, const auto& y) {
      const int kx = net.vertices[x.first].key, ky = net.vertices[y.first].key;
      if (kx != ky) return kx < ky;
      return x.second < y.second;
    });
  }
  return adj;
}

std::vector<size_t> positions_named(const EventNetwork& net, const std::string& name) {
  std::vector<size_t> out;
  for (size_t i = 0; i < net.vertices.size(); ++i) {
    if (net.vertices[i].name == name) out.push_back(i);
  }
  return out;
}

constexpr size_t kUnreached = std::numeric_limits<size_t>::max();

std::vector<size_t> bfs_distances(const Adjacency& adj, std::span<const size_t> seeds,
                                  size_t limit = kUnreached) {
  std::vector<size_t> dist(adj.out.size(), kUnreached);
  std::deque<size_t> queue;
  for (size_t s : seeds) {
    if (dist[s] == kUnreached) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const size_t u = queue.front();
    queue.pop_front();
    if (dist[u] >= limit) continue;
    for (const auto& [v, e] : adj.out[u]) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

PathResult shortest_path(const EventNetwork& net, const std::string& from,
                         const std::string& to) {
  PathResult result;
  const auto sources = positions_named(net, from);
  const auto targets = positions_named(net, to);
  if (sources.empty() || targets.empty()) {
    result.status = PathResult::Status::kVertexNotFound;
    return result;
  }
  const Adjacency adj = adjacency(net);
  const auto to_target = bfs_distances(adj, targets);

  size_t start = kUnreached;
  for (size_t s : sources) {
    if (to_target[s] == kUnreached) continue;
    if (start == kUnreached || to_target[s] < to_target[start] ||
        (to_target[s] == to_target[start] && net.vertices[s].key < net.vertices[start].key)) {
      start = s;
    }
  }
  if (start == kUnreached) {
    result.status = PathResult::Status::kNoPath;
    return result;
  }
  // Walk down the distance field taking the smallest key at each step.
  result.status = PathResult::Status::kFound;
  size_t cur = start;
  result.vertices.push_back(net.vertices[cur].key);
  while (to_target[cur] > 0) {
    for (const auto& [v, e] : adj.out[cur]) {
      if (to_target[v] + 1 == to_target[cur]) {
        result.edges.push_back(e);
        result.vertices.push_back(net.vertices[v].key);
        cur = v;
        break;
      }
    }
  }
  return result;
}

EventNetwork path_network(const EventNetwork& net, const PathResult& path) {
  EventNetwork out;
  out.event_id = net.event_id;
  out.provenance = net.provenance;
  for (int key : path.vertices) {
    if (const VertexFrame* v = net.vertex(key)) out.vertices.push_back(*v);
  }
  for (size_t e : path.edges) out.edges.push_back(net.edges.at(e));
  return out;
}

EventNetwork ego_network(const EventNetwork& net, const std::string& center, int radius) {
  if (radius < 1) throw std::invalid_argument("radius must be >= 1");
  const auto seeds = positions_named(net, center);
  std::set<int> keys;
  if (!seeds.empty()) {
    const auto dist = bfs_distances(adjacency(net), seeds, static_cast<size_t>(radius));
    for (size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] <= static_cast<size_t>(radius)) keys.insert(net.vertices[i].key);
    }
  }
  EventNetwork out = induced_subgraph(net, keys);
  return out;
}

}  // namespace evnet
