#include "evnet/netmodel.h"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

namespace evnet {

namespace {

std::string number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

// Pajek labels have no escape mechanism.
std::string pajek_label(std::string_view s) {
  std::string out;
  for (char c : s) out += (c == '"' ? '\'' : (c == '\n' ? ' ' : c));
  return out;
}

nlohmann::json occurrence(const std::string& doc_id, int sentence,
                          const ExtractionBundle& bundle, double weight) {
  nlohmann::json o = {{"doc", doc_id}, {"sentence", sentence}, {"weight", weight}};
  auto ts = bundle.doc_timestamps.find(doc_id);
  o["timestamp"] = ts == bundle.doc_timestamps.end()
                       ? nlohmann::json(nullptr)
                       : nlohmann::json(format_timestamp(ts->second));
  return o;
}

}  // namespace

std::optional<size_t> EventNetwork::index_of(int key) const {
  for (size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].key == key) return i;
  }
  return std::nullopt;
}

const VertexFrame* EventNetwork::vertex(int key) const {
  auto i = index_of(key);
  return i ? &vertices[*i] : nullptr;
}

std::unordered_map<int, size_t> key_index(const EventNetwork& net) {
  std::unordered_map<int, size_t> idx;
  for (size_t i = 0; i < net.vertices.size(); ++i) idx.emplace(net.vertices[i].key, i);
  return idx;
}

void EventNetwork::validate() const {
  std::set<int> keys;
  for (const auto& v : vertices) {
    if (!keys.insert(v.key).second) {
      throw NetworkError("duplicate vertex key " + std::to_string(v.key));
    }
    if (!(v.weight >= 0.0 && v.weight <= 1.0)) {
      throw NetworkError("vertex " + std::to_string(v.key) + " weight " +
                         number(v.weight) + " outside [0, 1]");
    }
  }
  for (size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const std::string name = "edge " + std::to_string(i) + " (" +
                             std::to_string(e.v1) + " -- " + std::to_string(e.v2) + ")";
    if (!keys.count(e.v1) || !keys.count(e.v2)) {
      throw NetworkError(name + " references a missing vertex");
    }
    if (e.v1 == e.v2) throw NetworkError(name + " is a self-loop");
    if (!(e.weight >= 0.0)) throw NetworkError(name + " has a negative weight");
  }
}

EventNetwork build_event_network(const ExtractionBundle& bundle) {
  EventNetwork net;
  net.event_id = bundle.event_id;
  net.provenance = bundle.event_id;

  std::map<std::pair<std::string, EntityType>, int> vertex_keys;
  auto vertex_for = [&](const EntityMention& m) {
    auto [it, inserted] = vertex_keys.emplace(std::make_pair(m.surface, m.etype),
                                              static_cast<int>(net.vertices.size()));
    if (inserted) {
      VertexFrame v;
      v.key = it->second;
      v.name = m.surface;
      v.type = m.etype;
      v.weight = 0.0;
      v.info = {{"count", 0}, {"occurrences", nlohmann::json::array()}};
      net.vertices.push_back(std::move(v));
    }
    return it->second;
  };

  for (const auto& m : bundle.mentions) {
    VertexFrame& v = net.vertices[vertex_for(m)];
    v.weight = std::max(v.weight, m.weight);
    auto o = occurrence(m.doc_id, m.sentence_index, bundle, m.weight);
    o["start"] = m.start;
    o["end"] = m.end;
    v.info["occurrences"].push_back(std::move(o));
    v.info["count"] = v.info["count"].get<int>() + 1;
  }

  std::map<std::tuple<RelationType, int, int>, size_t> edge_index;
  for (const auto& r : bundle.relations) {
    const int k1 = vertex_for(r.arg1);
    const int k2 = vertex_for(r.arg2);
    if (k1 == k2) continue;
    auto [it, inserted] = edge_index.emplace(
        std::make_tuple(r.rtype, std::min(k1, k2), std::max(k1, k2)), net.edges.size());
    if (inserted) {
      EdgeFrame e;
      e.type = r.rtype;
      e.v1 = k1;
      e.v2 = k2;
      e.weight = 0.0;
      e.info = {{"count", 0}, {"occurrences", nlohmann::json::array()}};
      net.edges.push_back(std::move(e));
    }
    EdgeFrame& e = net.edges[it->second];
    e.weight = std::max(e.weight, r.weight);
    e.info["occurrences"].push_back(occurrence(r.doc_id, r.sentence_index, bundle, r.weight));
    e.info["count"] = e.info["count"].get<int>() + 1;
  }
  return net;
}

std::optional<ExportFormat> parse_export_format(std::string_view name) {
  if (name == "pajek" || name == "net") return ExportFormat::kPajek;
  if (name == "graphml") return ExportFormat::kGraphML;
  if (name == "dot") return ExportFormat::kDot;
  if (name == "json") return ExportFormat::kJson;
  return std::nullopt;
}

std::string_view file_extension(ExportFormat format) {
  switch (format) {
    case ExportFormat::kPajek: return ".net";
    case ExportFormat::kGraphML: return ".graphml";
    case ExportFormat::kDot: return ".dot";
    case ExportFormat::kJson: return ".json";
  }
  return "";
}

nlohmann::json network_to_json(const EventNetwork& net) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const auto& v : net.vertices) {
    vertices.push_back({{"key", v.key},
                        {"name", v.name},
                        {"type", to_string(v.type)},
                        {"weight", v.weight},
                        {"info", v.info}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : net.edges) {
    edges.push_back({{"type", to_string(e.type)},
                     {"v1", e.v1},
                     {"v2", e.v2},
                     {"weight", e.weight},
                     {"info", e.info}});
  }
  return {{"event_id", net.event_id},
          {"provenance", net.provenance},
          {"vertices", vertices},
          {"edges", edges}};
}

EventNetwork network_from_json(const nlohmann::json& j) {
  EventNetwork net;
  try {
    net.event_id = j.value("event_id", std::string());
    net.provenance = j.value("provenance", std::string());
    for (const auto& jv : j.at("vertices")) {
      VertexFrame v;
      v.key = jv.at("key").get<int>();
      v.name = jv.at("name").get<std::string>();
      auto t = parse_entity_type(jv.at("type").get<std::string>());
      if (!t) throw NetworkError("vertex " + std::to_string(v.key) + " has unknown type");
      v.type = *t;
      v.weight = jv.at("weight").get<double>();
      v.info = jv.value("info", nlohmann::json::object());
      net.vertices.push_back(std::move(v));
    }
    for (const auto& je : j.at("edges")) {
      EdgeFrame e;
      auto t = parse_relation_type(je.at("type").get<std::string>());
      if (!t) throw NetworkError("edge has unknown type");
      e.type = *t;
      e.v1 = je.at("v1").get<int>();
      e.v2 = je.at("v2").get<int>();
      e.weight = je.at("weight").get<double>();
      e.info = je.value("info", nlohmann::json::object());
      net.edges.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("malformed network JSON: ") + e.what());
  }
  net.validate();
  return net;
}

void write_pajek(const EventNetwork& net, std::ostream& out) {
  const auto idx = key_index(net);
  out << "*Vertices " << net.vertices.size() << "\n";
  for (size_t i = 0; i < net.vertices.size(); ++i) {
    out << (i + 1) << " \"" << pajek_label(net.vertices[i].name) << "\"\n";
  }
  out << "*Edges\n";
  for (const auto& e : net.edges) {
    out << idx.at(e.v1) + 1 << " " << idx.at(e.v2) + 1 << " " << number(e.weight)
        << "\n";
  }
}

void write_graphml(const EventNetwork& net, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
         "    xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
         "    xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
         "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
         "  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
         "  <key id=\"vtype\" for=\"node\" attr.name=\"vtype\" attr.type=\"string\"/>\n"
         "  <key id=\"vweight\" for=\"node\" attr.name=\"weight\" attr.type=\"double\"/>\n"
         "  <key id=\"etype\" for=\"edge\" attr.name=\"etype\" attr.type=\"string\"/>\n"
         "  <key id=\"eweight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
  out << "  <graph id=\"" << xml_escape(net.event_id.empty() ? "G" : net.event_id)
      << "\" edgedefault=\"undirected\">\n";
  for (const auto& v : net.vertices) {
    out << "    <node id=\"n" << v.key << "\">"
        << "<data key=\"name\">" << xml_escape(v.name) << "</data>"
        << "<data key=\"vtype\">" << to_string(v.type) << "</data>"
        << "<data key=\"vweight\">" << number(v.weight) << "</data></node>\n";
  }
  for (size_t i = 0; i < net.edges.size(); ++i) {
    const auto& e = net.edges[i];
    out << "    <edge id=\"e" << i << "\" source=\"n" << e.v1 << "\" target=\"n"
        << e.v2 << "\">"
        << "<data key=\"etype\">" << to_string(e.type) << "</data>"
        << "<data key=\"eweight\">" << number(e.weight) << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(const EventNetwork& net, std::ostream& out) {
  out << "graph " << dot_quote(net.event_id.empty() ? "G" : net.event_id) << " {\n";
  for (const auto& v : net.vertices) {
    out << "  n" << v.key << " [label=" << dot_quote(v.name)
        << ", vtype=" << dot_quote(to_string(v.type)) << ", weight=" << number(v.weight)
        << "];\n";
  }
  for (const auto& e : net.edges) {
    out << "  n" << e.v1 << " -- n" << e.v2 << " [label=" << dot_quote(to_string(e.type))
        << ", etype=" << dot_quote(to_string(e.type)) << ", weight=" << number(e.weight)
        << "];\n";
  }
  out << "}\n";
}

void write_network(const EventNetwork& net, ExportFormat format, std::ostream& out) {
  switch (format) {
    case ExportFormat::kPajek: write_pajek(net, out); break;
    case ExportFormat::kGraphML: write_graphml(net, out); break;
    case ExportFormat::kDot: write_dot(net, out); break;
    case ExportFormat::kJson: out << network_to_json(net).dump(2) << "\n"; break;
  }
}

void export_network(const EventNetwork& net, ExportFormat format,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_network(net, format, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

EventNetwork import_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError(path.string() + ": " + e.what());
  }
  return network_from_json(j);
}

}  // namespace evnet
