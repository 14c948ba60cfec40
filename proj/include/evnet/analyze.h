// Event-network analyses: information filtering, person-location-time
// tracking, action co-occurrence, and social-network queries.

#ifndef EVNET_ANALYZE_H_
#define EVNET_ANALYZE_H_

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evnet/corpus.h"
#include "evnet/extract.h"
#include "evnet/learn.h"
#include "evnet/netmodel.h"

namespace evnet {

// ---------------------------------------------------------------------------
// Information filtering

enum class FrameKind { kVertex, kEdge };

struct TypeIn {
  std::set<std::string> types;  // "PER", "PER-SOC", ...
};
struct NameIn {
  std::set<std::string> names;  // vertices only; false on edges
};
struct MinWeight {
  double threshold = 0;
};
struct HasInfo {
  std::string key;
};
struct InfoEquals {
  std::string key;
  nlohmann::json value;
};
// Some occurrence in info["occurrences"] has a timestamp in [from, to).
struct OccursWithin {
  Timestamp from;
  Timestamp to;
};

using Clause = std::variant<TypeIn, NameIn, MinWeight, HasInfo, InfoEquals, OccursWithin>;

// Conjunction of clauses. Clauses on info keys a frame lacks are false.
class Predicate {
 public:
  explicit Predicate(FrameKind target, std::vector<Clause> clauses = {})
      : target_(target), clauses_(std::move(clauses)) {}

  static Predicate always(FrameKind target) { return Predicate(target); }

  Predicate& where(Clause clause) {
    clauses_.push_back(std::move(clause));
    return *this;
  }

  FrameKind target() const { return target_; }
  const std::vector<Clause>& clauses() const { return clauses_; }

  bool operator()(const VertexFrame& v) const;
  bool operator()(const EdgeFrame& e) const;

 private:
  FrameKind target_;
  std::vector<Clause> clauses_;
};

// V' = vertices satisfying vp; E' = edges satisfying ep whose endpoints are
// both in V'. Keys are preserved.
EventNetwork filter_network(const EventNetwork& net, const Predicate& vp,
                            const Predicate& ep);

// Subgraph induced by a key set, keeping input order.
EventNetwork induced_subgraph(const EventNetwork& net, const std::set<int>& keys);

// ---------------------------------------------------------------------------
// PLT analysis

// One PHYS relation mention linking the person to a location.
struct PhysMention {
  std::string event_id;
  std::string date;  // YYYY-MM-DD of the source document
  std::string location;
  double location_weight = 1.0;
  double weight = 1.0;
  std::string doc_id;
  int sentence = 0;
};

// PHYS mentions with a PER vertex named `person` on one side and a LOC
// vertex on the other, read from edge occurrences.
std::vector<PhysMention> select_phys_mentions(std::span<const EventNetwork> nets,
                                              const std::string& person);

// Replaces the person by TIME vertices named by document date; identical
// dates and identical locations merge. One TIME--LOC edge per PHYS mention.
EventNetwork plt_analysis(std::span<const EventNetwork> nets, const std::string& person);

// ---------------------------------------------------------------------------
// Action analysis

using EntityKey = std::pair<std::string, EntityType>;
using EntityPair = std::pair<EntityKey, EntityKey>;  // first < second

// One increment per sentence per unordered pair of distinct entities.
std::map<EntityPair, int> count_cooccurrences(
    std::span<const std::vector<EntityKey>> sentences);

struct ActionOptions {
  std::string positive_class = "Conflict";
  double threshold = kStrictThreshold;
  int min_cooccur = 12;
};

struct ActionResult {
  EventNetwork graph;
  size_t candidate_sentences = 0;  // sentences with >= 2 distinct entities
  size_t accepted_sentences = 0;
  size_t cooccurring_entities = 0;  // before pruning
};

FeatureBag sentence_features(const std::string& text, const Lexicon& lexicon);

// Classifies every candidate sentence of the bundle; counts entity pairs in
// accepted ones; keeps CO-OCCUR edges with count >= min_cooccur.
ActionResult action_analysis(const ExtractionBundle& bundle,
                             const Classifier& action_clf, const Lexicon& lexicon,
                             const ActionOptions& options = {});

using SentenceRef = std::pair<std::string, int>;  // (doc id, sentence index)

// Hard negatives: unannotated sentences containing a trigger term.
// Throws std::invalid_argument if the trigger lexicon is empty.
std::vector<Instance> generate_action_negatives(std::span<const Sentence> sentences,
                                                const std::set<SentenceRef>& annotated,
                                                const Lexicon& triggers,
                                                const Lexicon& feature_lexicon,
                                                const std::string& negative_label = "NONE");

// Positives are sentences annotated with `action_type`; negatives come from
// generate_action_negatives over every sentence of the annotated documents.
std::vector<Instance> action_instances(const DocumentStore& store,
                                       const AnnotationSet& annotations,
                                       const std::string& action_type,
                                       const Lexicon& triggers,
                                       const Lexicon& feature_lexicon);

// ---------------------------------------------------------------------------
// Social-network queries

struct PathResult {
  enum class Status { kFound, kNoPath, kVertexNotFound };
  Status status = Status::kVertexNotFound;
  std::vector<int> vertices;  // keys, source first
  std::vector<size_t> edges;  // indices into net.edges
  size_t hops() const { return edges.size(); }
};

// Unweighted shortest path between any vertex named `from` and any named
// `to`; among equally short paths the lexicographically smallest key
// sequence wins.
PathResult shortest_path(const EventNetwork& net, const std::string& from,
                         const std::string& to);

// The path's vertices and edges as a network.
EventNetwork path_network(const EventNetwork& net, const PathResult& path);

// Subgraph induced by vertices within `radius` hops of any vertex named
// `center`. Empty if the center is absent. Throws for radius < 1.
EventNetwork ego_network(const EventNetwork& net, const std::string& center,
                         int radius);

}  // namespace evnet

#endif  // EVNET_ANALYZE_H_
