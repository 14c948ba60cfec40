// Read-only access to a pipeline artifact directory, and the analysis
// entry point shared by the CLI and the HTTP service.

#ifndef EVNET_QUERY_H_
#define EVNET_QUERY_H_

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evnet/corpus.h"
#include "evnet/eventdetect.h"
#include "evnet/extract.h"
#include "evnet/learn.h"
#include "evnet/netmodel.h"
#include "json.hpp"

namespace evnet {

class ApiError : public std::runtime_error {
 public:
  enum class Code { kNotFound, kBadRequest, kInternal };

  ApiError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Code code() const { return code_; }
  std::string_view code_name() const;
  int http_status() const;
  // {"error": {"code": "...", "message": "..."}}
  nlohmann::json to_json() const;

 private:
  Code code_;
};

// Everything loaded eagerly; immutable afterwards, so concurrent readers
// need no locking.
class Artifacts {
 public:
  // Throws std::runtime_error when the directory is not a complete run.
  static Artifacts load(const std::filesystem::path& dir);

  Artifacts(Artifacts&&) = default;
  Artifacts& operator=(Artifacts&&) = default;
  Artifacts(const Artifacts&) = delete;
  Artifacts& operator=(const Artifacts&) = delete;

  const std::filesystem::path& dir() const { return dir_; }
  const nlohmann::json& manifest() const { return manifest_; }
  const std::vector<TimeSlice>& slices() const { return slices_; }
  // Top-level events of a slice (sub-events nested).
  const std::vector<DocumentEvent>& events(size_t slice) const { return events_.at(slice); }
  const DocumentEvent* find_event(const std::string& id) const;
  const EventNetwork* network(const std::string& id) const;
  const ExtractionBundle* bundle(const std::string& id) const;
  // Networks of top-level events, in slice order.
  std::vector<EventNetwork> top_level_networks() const;
  const Classifier* action_model() const { return action_ ? &*action_ : nullptr; }
  const Lexicon& lexicon() const { return lexicon_; }

  // Defaults for analyses, taken from the run's config.
  double action_threshold() const { return action_threshold_; }
  int min_cooccur() const { return min_cooccur_; }
  const std::string& action_type() const { return action_type_; }

 private:
  Artifacts() = default;

  std::filesystem::path dir_;
  nlohmann::json manifest_;
  std::vector<TimeSlice> slices_;
  std::vector<std::vector<DocumentEvent>> events_;
  std::map<std::string, const DocumentEvent*> event_index_;
  std::map<std::string, EventNetwork> networks_;
  std::map<std::string, ExtractionBundle> bundles_;
  std::optional<Classifier> action_;
  Lexicon lexicon_;
  double action_threshold_ = kStrictThreshold;
  int min_cooccur_ = 12;
  std::string action_type_ = "Conflict";
};

using QueryParams = std::map<std::string, std::string>;

// [{index, start, end, documents, events}]
nlohmann::json list_slices(const Artifacts& artifacts);
// {"slice": i, "events": [event tree with top words]}
nlohmann::json slice_events(const Artifacts& artifacts, const std::string& index);
nlohmann::json event_json(const Artifacts& artifacts, const std::string& id);
nlohmann::json event_network(const Artifacts& artifacts, const std::string& id);

// kind: filter | plt | action | path | ego. Returns canonical network JSON
// plus an "analysis" object echoing the kind, event and resolved
// parameters. Unknown parameters are rejected.
//   filter: vtype, etype (comma lists), name (comma list), min_weight,
//           min_edge_weight, from, to (dates; occurrences in [from, to))
//   plt:    person
//   action: threshold, min_cooccur, type
//   path:   from, to
//   ego:    center, radius (default 1)
nlohmann::json run_analysis(const Artifacts& artifacts, const std::string& event_id,
                            const std::string& kind, const QueryParams& params);

// PLT over the top-level networks of every event.
nlohmann::json run_global_plt(const Artifacts& artifacts, const QueryParams& params);

}  // namespace evnet

#endif  // EVNET_QUERY_H_
