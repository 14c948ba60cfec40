#include "doctest.h"
#include "evnet/analyze.h"
#include "support.h"

using namespace evnet;

namespace {

VertexFrame vertex(int key, const std::string& name, EntityType t, double w = 1.0) {
  return {key, name, t, w, nlohmann::json::object()};
}

EdgeFrame edge(RelationType t, int a, int b, double w = 1.0,
               nlohmann::json info = nlohmann::json::object()) {
  return {t, a, b, w, std::move(info)};
}

std::vector<int> keys_of(const EventNetwork& net) {
  std::vector<int> out;
  for (const auto& v : net.vertices) out.push_back(v.key);
  return out;
}

EntityMention mention(const std::string& surface, EntityType t, const std::string& doc,
                      int sentence) {
  EntityMention m;
  m.surface = surface;
  m.etype = t;
  m.doc_id = doc;
  m.sentence_index = sentence;
  return m;
}

// A line 0-1-2-3 plus a detour 0-4-3 and an isolated 5.
EventNetwork graph() {
  EventNetwork net;
  net.event_id = "g";
  net.vertices = {vertex(0, "A", EntityType::kPer), vertex(1, "B", EntityType::kPer),
                  vertex(2, "C", EntityType::kOrg), vertex(3, "D", EntityType::kLoc),
                  vertex(4, "E", EntityType::kLoc), vertex(5, "F", EntityType::kPer)};
  net.edges = {edge(RelationType::kPerSoc, 0, 1), edge(RelationType::kOrgAff, 1, 2),
               edge(RelationType::kPhys, 2, 3), edge(RelationType::kPhys, 0, 4),
               edge(RelationType::kPhys, 4, 3)};
  return net;
}

}  // namespace

TEST_CASE("filter keeps PER vertices and PER-SOC edges among them") {
  EventNetwork net;
  net.vertices = {vertex(10, "毛泽东", EntityType::kPer), vertex(11, "延安", EntityType::kLoc),
                  vertex(12, "周恩来", EntityType::kPer), vertex(13, "朱德", EntityType::kPer)};
  net.edges = {edge(RelationType::kPerSoc, 10, 12), edge(RelationType::kPhys, 10, 11),
               edge(RelationType::kPerSoc, 12, 11), edge(RelationType::kGenAff, 12, 13)};
  auto out = filter_network(net, Predicate(FrameKind::kVertex, {TypeIn{{"PER"}}}),
                            Predicate(FrameKind::kEdge, {TypeIn{{"PER-SOC"}}}));
  CHECK(keys_of(out) == std::vector<int>{10, 12, 13});
  REQUIRE(out.edges.size() == 1);
  CHECK(out.edges[0] == net.edges[0]);
  CHECK(filter_network(out, Predicate(FrameKind::kVertex, {TypeIn{{"PER"}}}),
                       Predicate(FrameKind::kEdge, {TypeIn{{"PER-SOC"}}})) == out);
}

TEST_CASE("filter matches the hand-written oracle and is idempotent") {
  testing::Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    auto net = testing::random_network(rng);
    auto spec = testing::random_filter(rng);
    auto out = filter_network(net, testing::vertex_predicate(spec), testing::edge_predicate(spec));
    auto [keys, edges] = testing::brute_filter(net, spec);
    CHECK(keys_of(out) == keys);
    REQUIRE(out.edges.size() == edges.size());
    for (size_t e = 0; e < edges.size(); ++e) CHECK(out.edges[e] == net.edges[edges[e]]);
    CHECK_NOTHROW(out.validate());
    CHECK(filter_network(out, testing::vertex_predicate(spec),
                         testing::edge_predicate(spec)) == out);
  }
}

TEST_CASE("info clauses") {
  auto v = vertex(1, "x", EntityType::kPer);
  v.info = {{"count", 2},
            {"occurrences", {{{"timestamp", "2008-05-03T00:00:00Z"}}, {{"timestamp", nullptr}}}}};
  auto in = [&](const char* from, const char* to) {
    return Predicate(FrameKind::kVertex,
                     {OccursWithin{*parse_timestamp(from), *parse_timestamp(to)}})(v);
  };
  CHECK(in("2008-05-01T00:00:00Z", "2008-06-01T00:00:00Z"));
  CHECK_FALSE(in("2008-05-04T00:00:00Z", "2008-06-01T00:00:00Z"));
  CHECK_FALSE(in("2008-04-01T00:00:00Z", "2008-05-03T00:00:00Z"));
  CHECK(Predicate(FrameKind::kVertex, {HasInfo{"count"}})(v));
  CHECK_FALSE(Predicate(FrameKind::kVertex, {HasInfo{"missing"}})(v));
  CHECK(Predicate(FrameKind::kVertex, {InfoEquals{"count", 2}})(v));
  CHECK_FALSE(Predicate(FrameKind::kVertex, {InfoEquals{"missing", 2}})(v));
  CHECK_FALSE(Predicate(FrameKind::kEdge, {NameIn{{"x"}}})(edge(RelationType::kPhys, 1, 2)));
  CHECK(Predicate::always(FrameKind::kEdge)(edge(RelationType::kPhys, 1, 2)));
}

TEST_CASE("plt turns PHYS mentions into TIME--LOC edges") {
  // Two documents: the person is in 延安 and 井冈山 on one date and in
  // 延安 again on another; a PER--PER PHYS edge is skipped.
  ExtractionBundle b;
  b.event_id = "t1e00";
  b.doc_timestamps = {{"d1", *parse_timestamp("1937-01-13T09:00:00Z")},
                      {"d2", *parse_timestamp("1947-03-18T20:00:00Z")}};
  auto mao = [](const char* doc, int s) { return mention("毛泽东", EntityType::kPer, doc, s); };
  auto loc = [](const char* n, const char* doc, int s) {
    return mention(n, EntityType::kLoc, doc, s);
  };
  b.mentions = {mao("d1", 0), loc("延安", "d1", 0), loc("井冈山", "d1", 1), mao("d2", 0),
                loc("延安", "d2", 0), mention("朱德", EntityType::kPer, "d2", 1)};
  b.relations = {{RelationType::kPhys, mao("d1", 0), loc("延安", "d1", 0), 0.9, "d1", 0},
                 {RelationType::kPhys, loc("井冈山", "d1", 1), mao("d1", 1), 0.8, "d1", 1},
                 {RelationType::kPhys, mao("d2", 0), loc("延安", "d2", 0), 0.7, "d2", 0},
                 {RelationType::kPhys, mao("d2", 1),
                  mention("朱德", EntityType::kPer, "d2", 1), 0.6, "d2", 1},
                 {RelationType::kPerSoc, mao("d2", 1),
                  mention("朱德", EntityType::kPer, "d2", 1), 0.6, "d2", 1}};
  std::vector<EventNetwork> nets{build_event_network(b)};
  auto plt = plt_analysis(nets, "毛泽东");
  CHECK(plt.event_id == "plt:毛泽东");
  std::multiset<std::pair<std::string, std::string>> got;
  for (const auto& e : plt.edges) {
    const auto* t = plt.vertex(e.v1);
    const auto* l = plt.vertex(e.v2);
    CHECK(t->type == EntityType::kTime);
    CHECK(l->type == EntityType::kLoc);
    CHECK(e.type == RelationType::kPhys);
    CHECK(e.info["person"] == "毛泽东");
    got.insert({t->name, l->name});
  }
  CHECK(got == std::multiset<std::pair<std::string, std::string>>{
                   {"1937-01-13", "延安"}, {"1937-01-13", "井冈山"}, {"1947-03-18", "延安"}});
  CHECK(plt.vertices.size() == 4);
  for (const auto& v : plt.vertices) CHECK(v.name != "毛泽东");
  CHECK_NOTHROW(plt.validate());
  CHECK(plt_analysis(nets, "nobody").vertices.empty());
  CHECK_THROWS_AS(plt_analysis(nets, ""), std::invalid_argument);
}

TEST_CASE("plt matches the edge-occurrence oracle") {
  testing::Rng rng(37);
  for (int i = 0; i < 150; ++i) {
    std::vector<EventNetwork> nets;
    for (int k = rng.between(1, 3); k > 0; --k) nets.push_back(testing::random_network(rng));
    const auto& person = testing::entity_names()[rng.below(4)];
    auto plt = plt_analysis(nets, person);
    std::multiset<std::pair<std::string, std::string>> got;
    std::set<std::pair<EntityType, std::string>> seen;
    for (const auto& v : plt.vertices) {
      CHECK(seen.insert({v.type, v.name}).second);
      CHECK((v.type == EntityType::kTime || v.type == EntityType::kLoc));
    }
    for (const auto& e : plt.edges) {
      const auto* t = plt.vertex(e.v1);
      const auto* l = plt.vertex(e.v2);
      REQUIRE(t);
      REQUIRE(l);
      CHECK(t->type == EntityType::kTime);
      CHECK(l->type == EntityType::kLoc);
      got.insert({t->name, l->name});
    }
    CHECK(got == testing::brute_plt(nets, person));
    CHECK_NOTHROW(plt.validate());
  }
}

TEST_CASE("co-occurrence counts match the double loop") {
  testing::Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::vector<EntityKey>> sentences(rng.below(12));
    for (auto& s : sentences) {
      for (int k = rng.between(0, 5); k > 0; --k) {
        const size_t which = rng.below(5);
        s.emplace_back(testing::entity_names()[which], static_cast<EntityType>(which % 3));
      }
    }
    CHECK(count_cooccurrences(sentences) == testing::brute_cooccurrence(sentences));
  }
}

TEST_CASE("action analysis keeps pairs seen at least min_cooccur times") {
  // 美军/塔利班 co-occur in 12 accepted sentences, 美军/喀布尔 in 11; a
  // non-trigger sentence and a one-entity sentence do not count.
  ExtractionBundle b;
  b.event_id = "t3e01";
  auto add = [&](const std::string& text, std::vector<std::pair<const char*, EntityType>> ents) {
    const int index = static_cast<int>(b.sentences.size());
    b.sentences.push_back({"d", index, text, 0, 0});
    for (auto [n, t] : ents) b.mentions.push_back(mention(n, t, "d", index));
  };
  for (int i = 0; i < 12; ++i) {
    if (i < 11) {
      add("美军袭击塔利班于喀布尔", {{"美军", EntityType::kOrg},
                                    {"塔利班", EntityType::kOrg},
                                    {"喀布尔", EntityType::kLoc}});
    } else {
      add("美军袭击塔利班", {{"美军", EntityType::kOrg}, {"塔利班", EntityType::kOrg}});
    }
  }
  add("美军会谈喀布尔", {{"美军", EntityType::kOrg}, {"喀布尔", EntityType::kLoc}});
  add("美军袭击美军", {{"美军", EntityType::kOrg}, {"美军", EntityType::kOrg}});
  auto clf = testing::trigger_classifier();
  Lexicon lex({"袭击"});
  auto r = action_analysis(b, clf, lex);
  CHECK(r.candidate_sentences == 13);
  CHECK(r.accepted_sentences == 12);
  CHECK(r.cooccurring_entities == 3);
  REQUIRE(r.graph.edges.size() == 1);
  const auto& e = r.graph.edges[0];
  CHECK(e.type == RelationType::kCoOccur);
  CHECK(e.weight == 12);
  CHECK(e.info["sentences"].size() == 12);
  std::set<std::string> names{r.graph.vertex(e.v1)->name, r.graph.vertex(e.v2)->name};
  CHECK(names == std::set<std::string>{"美军", "塔利班"});
  CHECK(r.graph.vertices.size() == 2);

  ActionOptions loose;
  loose.min_cooccur = 11;
  CHECK(action_analysis(b, clf, lex, loose).graph.edges.size() == 3);
  loose.min_cooccur = 0;
  CHECK_THROWS_AS(action_analysis(b, clf, lex, loose), std::invalid_argument);
}

TEST_CASE("action analysis agrees with brute-force counting") {
  testing::Rng rng(43);
  auto clf = testing::trigger_classifier();
  Lexicon lex({"袭击"});
  for (int i = 0; i < 150; ++i) {
    auto bundle = testing::random_action_bundle(rng);
    ActionOptions opt;
    opt.min_cooccur = rng.between(1, 4);
    auto r = action_analysis(bundle, clf, lex, opt);
    std::vector<std::vector<EntityKey>> accepted;
    for (const auto& s : bundle.sentences) {
      std::vector<EntityKey> ents;
      for (const auto& m : bundle.mentions) {
        if (m.doc_id == s.doc_id && m.sentence_index == s.index) {
          ents.emplace_back(m.surface, m.etype);
        }
      }
      if (std::set<EntityKey>(ents.begin(), ents.end()).size() < 2) continue;
      if (s.text.find("袭击") != std::string::npos) accepted.push_back(ents);
    }
    CHECK(r.accepted_sentences == accepted.size());
    std::map<EntityPair, int> expected;
    for (const auto& [pair, n] : testing::brute_cooccurrence(accepted)) {
      if (n >= opt.min_cooccur) expected[pair] = n;
    }
    std::map<EntityPair, int> got;
    for (const auto& e : r.graph.edges) {
      const auto* a = r.graph.vertex(e.v1);
      const auto* b = r.graph.vertex(e.v2);
      EntityKey ka{a->name, a->type}, kb{b->name, b->type};
      got[{std::min(ka, kb), std::max(ka, kb)}] = static_cast<int>(e.weight);
      CHECK(e.weight >= opt.min_cooccur);
    }
    CHECK(got == expected);
    CHECK_NOTHROW(r.graph.validate());
  }
}

TEST_CASE("action negatives are unannotated trigger sentences") {
  std::vector<Sentence> ss = {{"d", 0, "美军袭击", 0, 4},
                              {"d", 1, "美军轰炸", 5, 9},
                              {"d", 2, "会谈", 10, 12},
                              {"e", 0, "攻击", 0, 2}};
  Lexicon triggers({"袭击", "轰炸", "攻击"});
  auto negs = generate_action_negatives(ss, {{"d", 0}}, triggers, Lexicon({"美军", "轰炸", "攻击"}));
  REQUIRE(negs.size() == 2);
  CHECK(negs[0].label == "NONE");
  CHECK(negs[0].features == FeatureBag{{"美军", 1}, {"轰炸", 1}});
  CHECK(negs[1].features == FeatureBag{{"攻击", 1}});
  CHECK_THROWS_AS(generate_action_negatives(ss, {}, Lexicon(), triggers),
                  std::invalid_argument);
}

TEST_CASE("action instances pair annotated positives with trigger negatives") {
  DocumentStore store;
  store.add({"d", "美军袭击塔利班。美军攻击喀布尔。会谈", *parse_timestamp("2009-01-01T00:00:00Z"), ""});
  AnnotationSet set;
  set["d"].doc_id = "d";
  set["d"].actions = {{0, "Conflict"}};
  auto inst = action_instances(store, set, "Conflict", Lexicon({"袭击", "攻击"}),
                               Lexicon({"袭击", "攻击", "美军"}));
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].label == "Conflict");
  CHECK(inst[0].features.count("袭击"));
  CHECK(inst[1].label == "NONE");
  CHECK(inst[1].features.count("攻击"));
}

TEST_CASE("shortest path statuses and tie-breaking") {
  auto net = graph();
  auto p = shortest_path(net, "A", "D");
  CHECK(p.status == PathResult::Status::kFound);
  CHECK(p.vertices == std::vector<int>{0, 4, 3});
  CHECK(p.hops() == 2);
  CHECK(p.edges == std::vector<size_t>{3, 4});
  auto self = shortest_path(net, "B", "B");
  CHECK(self.status == PathResult::Status::kFound);
  CHECK(self.hops() == 0);
  CHECK(shortest_path(net, "A", "F").status == PathResult::Status::kNoPath);
  CHECK(shortest_path(net, "A", "Z").status == PathResult::Status::kVertexNotFound);
  CHECK(shortest_path(net, "Z", "A").status == PathResult::Status::kVertexNotFound);
  auto sub = path_network(net, p);
  CHECK(keys_of(sub) == std::vector<int>{0, 4, 3});
  CHECK(sub.edges.size() == 2);
  CHECK_NOTHROW(sub.validate());
}

TEST_CASE("shortest path matches exhaustive enumeration") {
  testing::Rng rng(47);
  for (int i = 0; i < 400; ++i) {
    auto net = testing::random_network(rng, 7, 12);
    const auto& names = testing::entity_names();
    const auto& from = names[rng.below(names.size())];
    const auto& to = names[rng.below(names.size())];
    auto p = shortest_path(net, from, to);
    const int hops = testing::exhaustive_hops(net, from, to);
    bool from_exists = false, to_exists = false;
    for (const auto& v : net.vertices) {
      from_exists |= v.name == from;
      to_exists |= v.name == to;
    }
    if (!from_exists || !to_exists) {
      CHECK(p.status == PathResult::Status::kVertexNotFound);
    } else if (hops < 0) {
      CHECK(p.status == PathResult::Status::kNoPath);
    } else {
      REQUIRE(p.status == PathResult::Status::kFound);
      CHECK(static_cast<int>(p.hops()) == hops);
      CHECK(p.vertices == testing::exhaustive_best_path(net, from, to));
      for (size_t k = 0; k < p.edges.size(); ++k) {
        const auto& e = net.edges[p.edges[k]];
        std::set<int> ends{e.v1, e.v2};
        CHECK(ends == std::set<int>{p.vertices[k], p.vertices[k + 1]});
      }
    }
  }
}

TEST_CASE("ego network") {
  auto net = graph();
  CHECK(keys_of(ego_network(net, "A", 1)) == std::vector<int>{0, 1, 4});
  auto two = ego_network(net, "A", 2);
  CHECK(keys_of(two) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(two.edges.size() == 5);
  CHECK(keys_of(ego_network(net, "F", 3)) == std::vector<int>{5});
  CHECK(ego_network(net, "Z", 1).vertices.empty());
  CHECK_THROWS_AS(ego_network(net, "A", 0), std::invalid_argument);
}

TEST_CASE("ego network equals the hop-distance oracle") {
  testing::Rng rng(53);
  for (int i = 0; i < 200; ++i) {
    auto net = testing::random_network(rng);
    const auto& center = testing::entity_names()[rng.below(testing::entity_names().size())];
    const int radius = rng.between(1, 3);
    auto ego = ego_network(net, center, radius);
    std::vector<int> expected;
    for (const auto& v : net.vertices) {
      int best = -1;
      for (const auto& c : net.vertices) {
        if (c.name != center) continue;
        EventNetwork probe = net;
        // Distance from this center vertex: rename so the oracle sees one source.
        for (auto& pv : probe.vertices) pv.name = pv.key == c.key ? "#src" : "#";
        for (auto& pv : probe.vertices) {
          if (pv.key == v.key) pv.name = pv.key == c.key ? "#src" : "#dst";
        }
        const int h = v.key == c.key ? 0 : testing::exhaustive_hops(probe, "#src", "#dst");
        if (h >= 0 && (best < 0 || h < best)) best = h;
      }
      if (best >= 0 && best <= radius) expected.push_back(v.key);
    }
    CHECK(keys_of(ego) == expected);
  }
}
