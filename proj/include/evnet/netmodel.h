// Frame-based event networks: vertex and edge frames with open info slots,
// merge construction from extraction bundles, and file formats.

#ifndef EVNET_NETMODEL_H_
#define EVNET_NETMODEL_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "evnet/extract.h"
#include "evnet/types.h"
#include "json.hpp"

namespace evnet {

struct VertexFrame {
  int key = 0;
  std::string name;
  EntityType type = EntityType::kPer;
  double weight = 1.0;  // likelihood that `name` is of `type`, in [0, 1]
  nlohmann::json info = nlohmann::json::object();

  bool operator==(const VertexFrame&) const = default;
};

// Undirected; v1 and v2 are vertex keys.
struct EdgeFrame {
  RelationType type = RelationType::kPhys;
  int v1 = 0;
  int v2 = 0;
  double weight = 1.0;  // probability, or a count for CO-OCCUR edges
  nlohmann::json info = nlohmann::json::object();

  bool operator==(const EdgeFrame&) const = default;
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EventNetwork {
  std::string event_id;
  std::string provenance;
  std::vector<VertexFrame> vertices;
  std::vector<EdgeFrame> edges;

  bool operator==(const EventNetwork&) const = default;

  // Position of the vertex with `key` in `vertices`.
  std::optional<size_t> index_of(int key) const;
  const VertexFrame* vertex(int key) const;

  // Checks key uniqueness, vertex weights, edge endpoints and self-loops.
  // Throws NetworkError naming the offending frame.
  void validate() const;
};

// key -> position in net.vertices
std::unordered_map<int, size_t> key_index(const EventNetwork& net);

// Merges mentions by (surface, type) and relations by (type, endpoints).
// Vertex and edge weights take the maximum; info slots keep every occurrence
// (document, sentence, timestamp) plus a count. Keys are dense from 0 in
// first-seen order.
EventNetwork build_event_network(const ExtractionBundle& bundle);

enum class ExportFormat { kPajek, kGraphML, kDot, kJson };
std::optional<ExportFormat> parse_export_format(std::string_view name);
std::string_view file_extension(ExportFormat format);

nlohmann::json network_to_json(const EventNetwork& net);
// Validates all invariants; throws NetworkError on violation.
EventNetwork network_from_json(const nlohmann::json& j);

void write_pajek(const EventNetwork& net, std::ostream& out);
void write_graphml(const EventNetwork& net, std::ostream& out);
void write_dot(const EventNetwork& net, std::ostream& out);
void write_network(const EventNetwork& net, ExportFormat format, std::ostream& out);

// Throws std::runtime_error if the path cannot be written.
void export_network(const EventNetwork& net, ExportFormat format,
                    const std::filesystem::path& path);
EventNetwork import_network(const std::filesystem::path& path);

}  // namespace evnet

#endif  // EVNET_NETMODEL_H_
