#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "evnet/netmodel.h"
#include "support.h"

using namespace evnet;
namespace pt = boost::property_tree;

namespace {

EntityMention mention(const std::string& surface, EntityType t, const std::string& doc,
                      int sentence, size_t start, double weight = 1.0) {
  EntityMention m;
  m.surface = surface;
  m.etype = t;
  m.doc_id = doc;
  m.sentence_index = sentence;
  m.start = start;
  m.end = start + evnet::utf8::length(surface);
  m.weight = weight;
  return m;
}

ExtractionBundle fixture() {
  ExtractionBundle b;
  b.event_id = "t2e05";
  b.doc_timestamps = {{"d1", *parse_timestamp("2008-03-01T00:00:00Z")},
                      {"d2", *parse_timestamp("2008-04-01T00:00:00Z")}};
  auto mao1 = mention("毛泽东", EntityType::kPer, "d1", 0, 0, 0.6);
  auto yan = mention("延安", EntityType::kLoc, "d1", 0, 4);
  auto mao2 = mention("毛泽东", EntityType::kPer, "d2", 1, 2, 0.9);
  auto mao_org = mention("毛泽东", EntityType::kOrg, "d2", 2, 0, 0.3);
  auto yan2 = mention("延安", EntityType::kLoc, "d2", 1, 6);
  b.mentions = {mao1, yan, mao2, mao_org, yan2};
  b.relations = {{RelationType::kPhys, mao1, yan, 0.7, "d1", 0},
                 {RelationType::kPhys, yan2, mao2, 0.8, "d2", 1},
                 {RelationType::kPerSoc, mao2, yan2, 0.55, "d2", 1},
                 {RelationType::kPhys, mao1, mao2, 0.9, "d1", 0}};
  return b;
}

std::string render(const EventNetwork& net, ExportFormat f) {
  std::ostringstream out;
  write_network(net, f, out);
  return out.str();
}

}  // namespace

TEST_CASE("merge by name and type") {
  auto net = build_event_network(fixture());
  CHECK(net.event_id == "t2e05");
  REQUIRE(net.vertices.size() == 3);
  CHECK(net.vertices[0].name == "毛泽东");
  CHECK(net.vertices[0].type == EntityType::kPer);
  CHECK(net.vertices[0].key == 0);
  CHECK(net.vertices[0].weight == 0.9);
  CHECK(net.vertices[0].info["count"] == 2);
  CHECK(net.vertices[0].info["occurrences"][1]["timestamp"] == "2008-04-01T00:00:00Z");
  CHECK(net.vertices[1].name == "延安");
  CHECK(net.vertices[1].info["count"] == 2);
  CHECK(net.vertices[2].type == EntityType::kOrg);
  CHECK(net.vertices[2].weight == 0.3);
  // The self-relation collapses to a self-loop and is dropped; PHYS in
  // either direction is one edge.
  REQUIRE(net.edges.size() == 2);
  CHECK(net.edges[0].type == RelationType::kPhys);
  CHECK(net.edges[0].weight == 0.8);
  CHECK(net.edges[0].info["count"] == 2);
  CHECK(net.edges[1].type == RelationType::kPerSoc);
  CHECK(net.edges[1].info["occurrences"][0]["doc"] == "d2");
  CHECK_NOTHROW(net.validate());
  CHECK(build_event_network(ExtractionBundle{}).vertices.empty());
}

TEST_CASE("validate names the offending frame") {
  EventNetwork net;
  net.vertices = {{1, "a", EntityType::kPer, 0.5, {}}, {1, "b", EntityType::kLoc, 0.5, {}}};
  CHECK_THROWS_WITH_AS(net.validate(), doctest::Contains("duplicate vertex key 1"),
                       NetworkError);
  net.vertices[1].key = 2;
  net.vertices[1].weight = 1.5;
  CHECK_THROWS_WITH_AS(net.validate(), doctest::Contains("vertex 2"), NetworkError);
  net.vertices[1].weight = 1;
  net.edges = {{RelationType::kPhys, 1, 3, 0.5, {}}};
  CHECK_THROWS_WITH_AS(net.validate(), doctest::Contains("missing vertex"), NetworkError);
  net.edges = {{RelationType::kPhys, 2, 2, 0.5, {}}};
  CHECK_THROWS_WITH_AS(net.validate(), doctest::Contains("self-loop"), NetworkError);
  net.edges = {{RelationType::kCoOccur, 1, 2, 14, {}}};
  CHECK_NOTHROW(net.validate());
  net.edges[0].weight = -1;
  CHECK_THROWS_AS(net.validate(), NetworkError);
}

TEST_CASE("json round trip on random networks") {
  testing::Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    auto net = testing::random_network(rng);
    auto j = network_to_json(net);
    auto back = network_from_json(nlohmann::json::parse(j.dump(2)));
    CHECK(back == net);
    CHECK(network_to_json(back) == j);
  }
}

TEST_CASE("network_from_json rejects invalid documents") {
  auto j = network_to_json(build_event_network(fixture()));
  auto bad = j;
  bad["edges"][0]["v2"] = 99;
  CHECK_THROWS_AS(network_from_json(bad), NetworkError);
  bad = j;
  bad["vertices"][0]["type"] = "ALIEN";
  CHECK_THROWS_AS(network_from_json(bad), NetworkError);
  bad = j;
  bad.erase("vertices");
  CHECK_THROWS_AS(network_from_json(bad), NetworkError);
}

TEST_CASE("pajek output parses and matches the network") {
  testing::Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    auto net = testing::random_network(rng);
    testing::PajekGraph g;
    std::string why;
    REQUIRE_MESSAGE(testing::parse_pajek(render(net, ExportFormat::kPajek), g, why), why);
    REQUIRE(g.labels.size() == net.vertices.size());
    for (size_t v = 0; v < net.vertices.size(); ++v) CHECK(g.labels[v] == net.vertices[v].name);
    REQUIRE(g.edges.size() == net.edges.size());
    for (size_t e = 0; e < net.edges.size(); ++e) {
      CHECK(net.vertices[std::get<0>(g.edges[e]) - 1].key == net.edges[e].v1);
      CHECK(net.vertices[std::get<1>(g.edges[e]) - 1].key == net.edges[e].v2);
      CHECK(std::get<2>(g.edges[e]) == net.edges[e].weight);
    }
  }
}

TEST_CASE("pajek replaces quotes it cannot escape") {
  EventNetwork net;
  net.vertices = {{0, "say \"hi\"\nnow", EntityType::kPer, 1, {}}};
  const auto text = render(net, ExportFormat::kPajek);
  CHECK(text == "*Vertices 1\n1 \"say 'hi' now\"\n*Edges\n");
  testing::PajekGraph g;
  std::string why;
  CHECK(testing::parse_pajek(text, g, why));
}

TEST_CASE("graphml output is well-formed and complete") {
  testing::Rng rng(29);
  for (int i = 0; i < 60; ++i) {
    auto net = testing::random_network(rng);
    if (i == 0) net.vertices.push_back({999, "a<&>\"'b", EntityType::kOrg, 0.25, {}});
    std::istringstream in(render(net, ExportFormat::kGraphML));
    pt::ptree tree;
    REQUIRE_NOTHROW(pt::read_xml(in, tree));
    const auto& graph = tree.get_child("graphml.graph");
    CHECK(graph.get<std::string>("<xmlattr>.edgedefault") == "undirected");
    std::vector<std::string> names;
    size_t edges = 0;
    for (const auto& [tag, node] : graph) {
      if (tag == "node") {
        for (const auto& [dtag, data] : node) {
          if (dtag == "data" && data.get<std::string>("<xmlattr>.key") == "name") {
            names.push_back(data.data());
          }
        }
      } else if (tag == "edge") {
        const auto src = node.get<std::string>("<xmlattr>.source");
        CHECK(net.vertex(std::stoi(src.substr(1))) != nullptr);
        ++edges;
      }
    }
    REQUIRE(names.size() == net.vertices.size());
    for (size_t v = 0; v < names.size(); ++v) CHECK(names[v] == net.vertices[v].name);
    CHECK(edges == net.edges.size());
  }
}

TEST_CASE("dot output declares every vertex and edge") {
  auto net = build_event_network(fixture());
  net.vertices[1].name = "quote\"back\\slash";
  const auto text = render(net, ExportFormat::kDot);
  CHECK(text.rfind("graph \"t2e05\" {\n", 0) == 0);
  CHECK(text.find("label=\"quote\\\"back\\\\slash\"") != std::string::npos);
  std::regex edge_line("  n(\\d+) -- n(\\d+) \\[label=\"[A-Z-]+\", etype=\"[A-Z-]+\", weight=[0-9.e-]+\\];");
  std::smatch m;
  size_t edges = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (std::regex_match(line, m, edge_line)) ++edges;
  }
  CHECK(edges == net.edges.size());
  CHECK(text.substr(text.size() - 2) == "}\n");
}

TEST_CASE("export and import through files") {
  auto dir = testing::temp_dir("net");
  auto net = build_event_network(fixture());
  export_network(net, ExportFormat::kJson, dir / "n.json");
  CHECK(import_network(dir / "n.json") == net);
  CHECK(testing::slurp(dir / "n.json") == network_to_json(net).dump(2) + "\n");
  CHECK_THROWS_AS(export_network(net, ExportFormat::kDot, dir / "no" / "such" / "x.dot"),
                  std::runtime_error);
  std::ofstream(dir / "bad.json") << "{not json";
  CHECK_THROWS_AS(import_network(dir / "bad.json"), NetworkError);
  CHECK_THROWS_AS(import_network(dir / "absent.json"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("export format names") {
  CHECK(parse_export_format("pajek") == ExportFormat::kPajek);
  CHECK(parse_export_format("net") == ExportFormat::kPajek);
  CHECK(parse_export_format("graphml") == ExportFormat::kGraphML);
  CHECK(parse_export_format("dot") == ExportFormat::kDot);
  CHECK(parse_export_format("json") == ExportFormat::kJson);
  CHECK_FALSE(parse_export_format("gexf"));
  CHECK(file_extension(ExportFormat::kGraphML) == ".graphml");
}
