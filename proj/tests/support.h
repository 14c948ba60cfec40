// Shared generators and brute-force oracles for the test binaries. The
// oracles are written the slow, obvious way on purpose; they must not call
// into the code they check.

#ifndef EVNET_TESTS_SUPPORT_H_
#define EVNET_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "evnet/analyze.h"
#include "evnet/corpus.h"
#include "evnet/netmodel.h"
#include "evnet/utf8.h"

namespace testing {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(uint64_t seed) : engine(seed) {}
  size_t below(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(engine); }
  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
  double uniform() { return std::uniform_real_distribution<double>(0, 1)(engine); }
  bool chance(double p) { return uniform() < p; }
};

// Small alphabet so random lexicon entries actually occur in random text.
inline const std::u32string& test_alphabet() {
  static const std::u32string kAlphabet = U"加沙北部袭击毛泽东井冈山ab";
  return kAlphabet;
}

inline std::string random_text(Rng& rng, size_t max_len) {
  std::u32string s;
  const size_t n = rng.below(max_len + 1);
  for (size_t i = 0; i < n; ++i) s += test_alphabet()[rng.below(test_alphabet().size())];
  return evnet::utf8::encode(s);
}

inline std::vector<std::string> random_lexicon(Rng& rng, size_t max_entries,
                                               size_t max_len = 4) {
  std::set<std::string> out;
  const size_t n = 1 + rng.below(max_entries);
  while (out.size() < n) {
    std::u32string s;
    const size_t len = 1 + rng.below(max_len);
    for (size_t i = 0; i < len; ++i) s += test_alphabet()[rng.below(test_alphabet().size())];
    out.insert(evnet::utf8::encode(s));
  }
  return {out.begin(), out.end()};
}

// Every (start, end) substring of the text, looked up in a plain set.
inline evnet::TermCounts brute_force_omni(const std::string& text,
                                          const std::vector<std::string>& entries) {
  const std::set<std::string> lexicon(entries.begin(), entries.end());
  const std::u32string chars = evnet::utf8::decode(text);
  evnet::TermCounts out;
  for (size_t i = 0; i < chars.size(); ++i) {
    for (size_t j = i + 1; j <= chars.size(); ++j) {
      const std::string sub = evnet::utf8::encode(chars.substr(i, j - i));
      if (lexicon.count(sub)) ++out[sub];
    }
  }
  return out;
}

inline const std::vector<std::string>& entity_names() {
  static const std::vector<std::string> kNames = {"毛泽东", "井冈山", "延安", "北京",
                                                  "卡尔扎伊", "阿富汗", "美军", "哈马斯"};
  return kNames;
}

// Random network with occurrence info on every frame. Vertex keys are a
// shuffled, gappy set so nothing relies on keys being positions.
inline evnet::EventNetwork random_network(Rng& rng, int max_vertices = 8,
                                          int max_edges = 14) {
  using namespace evnet;
  EventNetwork net;
  net.event_id = "t" + std::to_string(rng.below(10)) + "e" + std::to_string(rng.below(25));
  net.provenance = "random";
  const int n = rng.between(0, max_vertices);
  std::vector<int> keys(n);
  for (int i = 0; i < n; ++i) keys[i] = i * 3 + static_cast<int>(rng.below(3));
  std::shuffle(keys.begin(), keys.end(), rng.engine);
  auto occurrence = [&]() {
    const int month = rng.between(1, 12);
    char ts[32];
    std::snprintf(ts, sizeof ts, "2008-%02d-%02dT10:00:00Z", month, rng.between(1, 28));
    return nlohmann::json{{"doc", "d" + std::to_string(rng.below(6))},
                          {"sentence", rng.between(0, 5)},
                          {"timestamp", ts},
                          {"weight", 0.5}};
  };
  for (int i = 0; i < n; ++i) {
    VertexFrame v;
    v.key = keys[i];
    v.name = entity_names()[rng.below(entity_names().size())];
    v.type = static_cast<EntityType>(rng.below(3));
    v.weight = std::round(rng.uniform() * 100) / 100;
    v.info = {{"count", 1}, {"occurrences", nlohmann::json::array({occurrence()})}};
    net.vertices.push_back(std::move(v));
  }
  if (n >= 2) {
    const int m = rng.between(0, max_edges);
    for (int i = 0; i < m; ++i) {
      const size_t a = rng.below(n);
      size_t b = rng.below(n);
      if (a == b) continue;
      EdgeFrame e;
      e.type = static_cast<RelationType>(rng.below(5));
      e.v1 = keys[a];
      e.v2 = keys[b];
      e.weight = std::round(rng.uniform() * 100) / 100;
      nlohmann::json occ = nlohmann::json::array();
      for (int k = rng.between(1, 3); k > 0; --k) occ.push_back(occurrence());
      e.info = {{"count", occ.size()}, {"occurrences", occ}};
      net.edges.push_back(std::move(e));
    }
  }
  return net;
}

// Minimum hop count between any vertex named `from` and any named `to` by
// enumerating every simple path. -1 when there is none.
inline int exhaustive_hops(const evnet::EventNetwork& net, const std::string& from,
                           const std::string& to) {
  const size_t n = net.vertices.size();
  std::vector<std::vector<size_t>> adj(n);
  for (const auto& e : net.edges) {
    size_t a = 0, b = 0;
    for (size_t i = 0; i < n; ++i) {
      if (net.vertices[i].key == e.v1) a = i;
      if (net.vertices[i].key == e.v2) b = i;
    }
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  int best = -1;
  std::vector<bool> on_path(n, false);
  std::function<void(size_t, int)> dfs = [&](size_t u, int depth) {
    if (net.vertices[u].name == to && (best < 0 || depth < best)) best = depth;
    for (size_t v : adj[u]) {
      if (on_path[v]) continue;
      on_path[v] = true;
      dfs(v, depth + 1);
      on_path[v] = false;
    }
  };
  for (size_t s = 0; s < n; ++s) {
    if (net.vertices[s].name != from) continue;
    on_path[s] = true;
    dfs(s, 0);
    on_path[s] = false;
  }
  return best;
}

// Lexicographically smallest key sequence among all shortest simple paths,
// found by enumerating every simple path. Empty when there is none.
inline std::vector<int> exhaustive_best_path(const evnet::EventNetwork& net,
                                             const std::string& from,
                                             const std::string& to) {
  const size_t n = net.vertices.size();
  std::vector<std::set<size_t>> adj(n);
  for (const auto& e : net.edges) {
    size_t a = 0, b = 0;
    for (size_t i = 0; i < n; ++i) {
      if (net.vertices[i].key == e.v1) a = i;
      if (net.vertices[i].key == e.v2) b = i;
    }
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::vector<int> best;
  std::vector<int> path;
  std::vector<bool> on_path(n, false);
  std::function<void(size_t)> dfs = [&](size_t u) {
    path.push_back(net.vertices[u].key);
    if (net.vertices[u].name == to) {
      if (best.empty() || path.size() < best.size() ||
          (path.size() == best.size() && path < best)) {
        best = path;
      }
    }
    for (size_t v : adj[u]) {
      if (on_path[v]) continue;
      on_path[v] = true;
      dfs(v);
      on_path[v] = false;
    }
    path.pop_back();
  };
  for (size_t s = 0; s < n; ++s) {
    if (net.vertices[s].name != from) continue;
    on_path[s] = true;
    dfs(s);
    on_path[s] = false;
  }
  return best;
}

// Pair counts by explicit double loop over each sentence's distinct entities.
inline std::map<evnet::EntityPair, int> brute_cooccurrence(
    const std::vector<std::vector<evnet::EntityKey>>& sentences) {
  std::map<evnet::EntityPair, int> out;
  for (const auto& s : sentences) {
    std::vector<evnet::EntityKey> distinct;
    for (const auto& e : s) {
      if (std::find(distinct.begin(), distinct.end(), e) == distinct.end()) {
        distinct.push_back(e);
      }
    }
    for (size_t i = 0; i < distinct.size(); ++i) {
      for (size_t j = 0; j < distinct.size(); ++j) {
        if (distinct[i] < distinct[j]) ++out[{distinct[i], distinct[j]}];
      }
    }
  }
  return out;
}

// Filter spec checked by hand-written loops rather than Predicate.
struct FilterSpec {
  std::set<std::string> vertex_types;  // empty: any
  std::set<std::string> names;         // empty: any
  double min_vertex_weight = 0;
  std::set<std::string> edge_types;
  double min_edge_weight = 0;
};

inline FilterSpec random_filter(Rng& rng) {
  FilterSpec f;
  for (auto t : {"PER", "ORG", "LOC"}) {
    if (rng.chance(0.4)) f.vertex_types.insert(t);
  }
  for (const auto& n : entity_names()) {
    if (rng.chance(0.15)) f.names.insert(n);
  }
  if (rng.chance(0.5)) f.min_vertex_weight = std::round(rng.uniform() * 100) / 100;
  for (auto t : {"PER-SOC", "GEN-AFF", "ORG-AFF", "PART-WHOLE", "PHYS"}) {
    if (rng.chance(0.4)) f.edge_types.insert(t);
  }
  if (rng.chance(0.5)) f.min_edge_weight = std::round(rng.uniform() * 100) / 100;
  return f;
}

// Expected (vertex keys, edge indices) of a filter.
inline std::pair<std::vector<int>, std::vector<size_t>> brute_filter(
    const evnet::EventNetwork& net, const FilterSpec& f) {
  std::vector<int> keys;
  for (const auto& v : net.vertices) {
    const std::string type(evnet::to_string(v.type));
    if (!f.vertex_types.empty() && !f.vertex_types.count(type)) continue;
    if (!f.names.empty() && !f.names.count(v.name)) continue;
    if (v.weight < f.min_vertex_weight) continue;
    keys.push_back(v.key);
  }
  std::vector<size_t> edges;
  for (size_t i = 0; i < net.edges.size(); ++i) {
    const auto& e = net.edges[i];
    const std::string type(evnet::to_string(e.type));
    if (!f.edge_types.empty() && !f.edge_types.count(type)) continue;
    if (e.weight < f.min_edge_weight) continue;
    if (std::find(keys.begin(), keys.end(), e.v1) == keys.end()) continue;
    if (std::find(keys.begin(), keys.end(), e.v2) == keys.end()) continue;
    edges.push_back(i);
  }
  return {keys, edges};
}

inline evnet::Predicate vertex_predicate(const FilterSpec& f) {
  evnet::Predicate p(evnet::FrameKind::kVertex);
  if (!f.vertex_types.empty()) p.where(evnet::TypeIn{f.vertex_types});
  if (!f.names.empty()) p.where(evnet::NameIn{f.names});
  p.where(evnet::MinWeight{f.min_vertex_weight});
  return p;
}

inline evnet::Predicate edge_predicate(const FilterSpec& f) {
  evnet::Predicate p(evnet::FrameKind::kEdge);
  if (!f.edge_types.empty()) p.where(evnet::TypeIn{f.edge_types});
  p.where(evnet::MinWeight{f.min_edge_weight});
  return p;
}

// (date, location) for every PHYS occurrence linking a PER named `person`
// to a LOC, read straight off the edge frames.
inline std::multiset<std::pair<std::string, std::string>> brute_plt(
    const std::vector<evnet::EventNetwork>& nets, const std::string& person) {
  std::multiset<std::pair<std::string, std::string>> out;
  for (const auto& net : nets) {
    for (const auto& e : net.edges) {
      if (e.type != evnet::RelationType::kPhys) continue;
      const evnet::VertexFrame* a = nullptr;
      const evnet::VertexFrame* b = nullptr;
      for (const auto& v : net.vertices) {
        if (v.key == e.v1) a = &v;
        if (v.key == e.v2) b = &v;
      }
      const evnet::VertexFrame* loc = nullptr;
      if (a->type == evnet::EntityType::kPer && a->name == person &&
          b->type == evnet::EntityType::kLoc) {
        loc = b;
      } else if (b->type == evnet::EntityType::kPer && b->name == person &&
                 a->type == evnet::EntityType::kLoc) {
        loc = a;
      }
      if (!loc) continue;
      for (const auto& o : e.info["occurrences"]) {
        out.insert({o["timestamp"].get<std::string>().substr(0, 10), loc->name});
      }
    }
  }
  return out;
}

// Random bundle for action analysis: sentences that may carry the trigger
// "袭击", each with a few (possibly repeated) entity mentions.
inline evnet::ExtractionBundle random_action_bundle(Rng& rng, int max_sentences = 30,
                                                    size_t pool = 5) {
  using namespace evnet;
  ExtractionBundle b;
  b.event_id = "t0e00";
  const int n = rng.between(0, max_sentences);
  for (int i = 0; i < n; ++i) {
    const std::string doc = "d" + std::to_string(i % 4);
    const int index = i / 4;
    const bool trigger = rng.chance(0.6);
    b.sentences.push_back({doc, index, trigger ? "他们袭击了" : "他们会谈了", 0, 5});
    for (int k = rng.between(0, 4); k > 0; --k) {
      EntityMention m;
      const size_t which = rng.below(pool);
      m.surface = entity_names()[which];
      m.etype = static_cast<EntityType>(which % 3);
      m.doc_id = doc;
      m.sentence_index = index;
      m.weight = 0.5 + 0.5 * rng.uniform();
      b.mentions.push_back(m);
    }
  }
  return b;
}

// A classifier that fires on "袭击" with posterior ~1 and sits at 0.5
// otherwise, so the accepted set is known without running it.
inline evnet::Classifier trigger_classifier() {
  std::vector<std::unordered_map<std::string, double>> w(2);
  w[0]["袭击"] = 30.0;
  return evnet::Classifier({"Conflict", "NONE"}, w, {0.0, 0.0}, 0.0, 0);
}

// Minimal Pajek reader for what the exporter may legally emit: a *Vertices
// header with count, one `index "label"` line per vertex with indices
// 1..n in order, an *Edges header, and `i j weight` lines with valid
// indices. Returns false with a reason on any deviation.
struct PajekGraph {
  std::vector<std::string> labels;
  std::vector<std::tuple<int, int, double>> edges;
};

inline bool parse_pajek(const std::string& text, PajekGraph& g, std::string& why) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("*Vertices ", 0) != 0) {
    why = "missing *Vertices header";
    return false;
  }
  const int n = std::stoi(line.substr(10));
  for (int i = 1; i <= n; ++i) {
    if (!std::getline(in, line)) {
      why = "truncated vertex list";
      return false;
    }
    const auto sp = line.find(' ');
    if (sp == std::string::npos || std::stoi(line.substr(0, sp)) != i) {
      why = "bad vertex index on line: " + line;
      return false;
    }
    const std::string rest = line.substr(sp + 1);
    if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"' ||
        rest.substr(1, rest.size() - 2).find('"') != std::string::npos) {
      why = "bad vertex label: " + line;
      return false;
    }
    g.labels.push_back(rest.substr(1, rest.size() - 2));
  }
  if (!std::getline(in, line) || line != "*Edges") {
    why = "missing *Edges header";
    return false;
  }
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int a = 0, b = 0;
    double w = 0;
    std::string extra;
    if (!(ls >> a >> b >> w) || (ls >> extra) || a < 1 || b < 1 || a > n || b > n) {
      why = "bad edge line: " + line;
      return false;
    }
    g.edges.emplace_back(a, b, w);
  }
  return true;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("evnet_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testing

#endif  // EVNET_TESTS_SUPPORT_H_
