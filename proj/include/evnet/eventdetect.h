// Document event detection: collapsed Gibbs LDA per time slice, nearest
// centroid assignment against the word-topic distributions, and one level
// of sub-event refinement.

#ifndef EVNET_EVENTDETECT_H_
#define EVNET_EVENTDETECT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evnet/corpus.h"
#include "json.hpp"

namespace evnet {

struct LdaOptions {
  int topics = 25;
  double alpha = -1.0;  // <= 0 selects 50 / topics
  double beta = 0.1;
  int iterations = 1000;
  uint64_t seed = 1;

  double effective_alpha() const { return alpha > 0 ? alpha : 50.0 / topics; }
};

struct TopicModel {
  int topics = 0;
  double alpha = 0;
  double beta = 0;
  int iterations = 0;
  uint64_t seed = 0;
  // phi[k][w]: word distribution of topic k over the vocabulary.
  std::vector<std::vector<double>> phi;
  // theta[d][k]: topic distribution of document d.
  std::vector<std::vector<double>> theta;
};

// Fits LDA by collapsed Gibbs sampling. Terms outside `vocab` are ignored.
// Throws std::invalid_argument("empty term matrix") when no document has an
// in-vocabulary token.
TopicModel fit_lda(std::span<const TermCounts> docs, const Vocabulary& vocab,
                   const LdaOptions& options = {});

struct WeightedWord {
  std::string word;
  double weight = 0;
};

enum class EventLevel { kEvent, kSubEvent };

struct DocumentEvent {
  std::string id;  // "t3e07" for events, "t3e07s12" for sub-events
  int topic = 0;
  EventLevel level = EventLevel::kEvent;
  std::vector<std::string> members;
  std::vector<WeightedWord> top_words;
  std::vector<DocumentEvent> children;
};

// A document of a slice with its Omni-word terms.
struct SliceDocument {
  std::string id;
  TermCounts terms;
};

// L1-normalized term-frequency vector of a document over the vocabulary.
// All zeros when the document has no in-vocabulary term.
std::vector<double> document_vector(const TermCounts& terms,
                                    const Vocabulary& vocab);

// Index of the phi row nearest to `doc_vector` (Euclidean, lowest index on
// ties) and the distance to it.
std::pair<int, double> nearest_topic(std::span<const double> doc_vector,
                                     const TopicModel& model);

// Assigns each document to the topic whose phi row is nearest in Euclidean
// distance to the document's L1-normalized term-frequency vector. Ties go to
// the lowest topic index. Empty events are dropped. Events are labelled
// with their topic's top `label_words` words.
std::vector<DocumentEvent> assign_events(std::span<const SliceDocument> docs,
                                         const TopicModel& model,
                                         const Vocabulary& vocab,
                                         const std::string& id_prefix,
                                         EventLevel level = EventLevel::kEvent,
                                         int label_words = 100);

// The n most probable words of a topic, descending, ties by codepoint order.
// n larger than the vocabulary yields the whole vocabulary.
// Throws std::invalid_argument for n <= 0.
std::vector<WeightedWord> top_words(const TopicModel& model, int topic,
                                    const Vocabulary& vocab, int n = 100);

struct HierarchyOptions {
  LdaOptions lda;
  int min_docs = 10;  // events smaller than this are not refined
  int label_words = 100;
};

// Top-level events for a slice plus sub-events for every event with at least
// min_docs members. A sub-event fit that fails leaves its branch childless;
// a failing top-level fit throws.
std::vector<DocumentEvent> detect_hierarchical(std::span<const SliceDocument> docs,
                                               const Vocabulary& vocab,
                                               int slice_index,
                                               const HierarchyOptions& options = {});

// Total number of events and sub-events in a forest.
size_t count_events(std::span<const DocumentEvent> events);

// Finds an event anywhere in a forest by id.
const DocumentEvent* find_event(std::span<const DocumentEvent> events,
                                std::string_view id);

nlohmann::json event_to_json(const DocumentEvent& event);
DocumentEvent event_from_json(const nlohmann::json& j);

}  // namespace evnet

#endif  // EVNET_EVENTDETECT_H_
