// Per-event entity-mention recognition and relation-mention classification.

#ifndef EVNET_EXTRACT_H_
#define EVNET_EXTRACT_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evnet/corpus.h"
#include "evnet/eventdetect.h"
#include "evnet/learn.h"
#include "evnet/types.h"
#include "json.hpp"

namespace evnet {

// Character offsets are Unicode scalar values.
struct Sentence {
  std::string doc_id;
  int index = 0;
  std::string text;
  size_t begin = 0;  // offset of the first character in the document
  size_t end = 0;    // one past the last character
};

// Splits on 。！？!?. and newline. Delimiters belong to no sentence; empty
// pieces are dropped.
std::vector<Sentence> split_sentences(const Document& doc);

struct EntityMention {
  std::string surface;
  EntityType etype = EntityType::kPer;
  double weight = 1.0;
  std::string doc_id;
  int sentence_index = 0;
  size_t start = 0;  // within the sentence
  size_t end = 0;
};

struct RelationMention {
  RelationType rtype = RelationType::kPhys;
  EntityMention arg1;
  EntityMention arg2;
  double weight = 1.0;
  std::string doc_id;
  int sentence_index = 0;
};

struct LengthBounds {
  size_t min_chars = 2;
  size_t max_chars = 6;
};

// Boundary-assembling recognizer: detect begin/end boundaries, assemble
// every begin < end pair into a candidate, assess each candidate. The
// length filter is applied to every implementation.
class EntityRecognizer {
 public:
  struct Boundaries {
    std::vector<size_t> begins;
    std::vector<size_t> ends;
  };
  struct Candidate {
    size_t start = 0;
    size_t end = 0;
  };
  struct Assessment {
    EntityType etype;
    double score;
  };

  explicit EntityRecognizer(LengthBounds bounds = {}) : bounds_(bounds) {}
  virtual ~EntityRecognizer() = default;

  std::vector<EntityMention> recognize(const Sentence& sentence) const;
  const LengthBounds& bounds() const { return bounds_; }

 protected:
  virtual Boundaries detect(const Sentence& sentence,
                            const std::u32string& chars) const = 0;
  virtual std::vector<Candidate> assemble(const Boundaries& boundaries) const;
  virtual std::optional<Assessment> assess(const Sentence& sentence,
                                           const std::u32string& chars,
                                           const Candidate& candidate) const = 0;
  // Final selection among assessed mentions; the default keeps all.
  virtual std::vector<EntityMention> select(std::vector<EntityMention> mentions) const;

  // Longest span assembled from boundaries.
  virtual size_t max_span() const { return bounds_.max_chars; }

 private:
  LengthBounds bounds_;
};

// Dictionary-backed recognizer. Overlapping hits resolve to the longest,
// then leftmost, match.
class GazetteerRecognizer : public EntityRecognizer {
 public:
  GazetteerRecognizer(std::map<std::string, EntityType> entries,
                      LengthBounds bounds = {});
  // Tab-separated "surface<TAB>TYPE" lines.
  static GazetteerRecognizer load(const std::filesystem::path& path,
                                  LengthBounds bounds = {});

 protected:
  Boundaries detect(const Sentence& sentence,
                    const std::u32string& chars) const override;
  std::optional<Assessment> assess(const Sentence& sentence,
                                   const std::u32string& chars,
                                   const Candidate& candidate) const override;
  std::vector<EntityMention> select(std::vector<EntityMention> mentions) const override;
  size_t max_span() const override { return longest_; }

 private:
  std::map<std::u32string, EntityType> entries_;
  size_t longest_ = 0;
};

// Pre-annotated mention; offsets are document-level characters.
struct AnnotatedMention {
  std::string surface;
  EntityType etype = EntityType::kPer;
  size_t start = 0;
  size_t end = 0;
  double weight = 1.0;
};

// Relation annotation referencing mentions by index.
struct AnnotatedRelation {
  RelationType rtype = RelationType::kPhys;
  size_t arg1 = 0;
  size_t arg2 = 0;
  int sentence = 0;
};

// Action (event-mention) annotation on a sentence.
struct AnnotatedAction {
  int sentence = 0;
  std::string type;
};

struct DocumentAnnotations {
  std::string doc_id;
  std::vector<AnnotatedMention> mentions;
  std::vector<AnnotatedRelation> relations;
  std::vector<AnnotatedAction> actions;
};

using AnnotationSet = std::map<std::string, DocumentAnnotations>;

// JSONL: {"doc_id", "mentions":[{surface,etype,start,end}],
//         "relations":[{rtype,arg1_idx,arg2_idx,sentence}],
//         "actions":[{sentence,type}]}; "actions" is optional.
AnnotationSet load_annotations(const std::filesystem::path& path);
AnnotationSet parse_annotations(std::istream& in);
nlohmann::json annotations_to_json(const DocumentAnnotations& a);

// Reproduces provided annotations (after the length filter).
class AnnotationRecognizer : public EntityRecognizer {
 public:
  explicit AnnotationRecognizer(const AnnotationSet& annotations,
                                LengthBounds bounds = {});

 protected:
  Boundaries detect(const Sentence& sentence,
                    const std::u32string& chars) const override;
  std::optional<Assessment> assess(const Sentence& sentence,
                                   const std::u32string& chars,
                                   const Candidate& candidate) const override;
  size_t max_span() const override { return longest_; }

 private:
  // doc_id -> mentions keyed by document-level (start, end)
  std::map<std::string, std::map<std::pair<size_t, size_t>, AnnotatedMention>> by_doc_;
  size_t longest_ = 0;
};

// Boundary and candidate classifiers learned from annotated sentences.
// Features are character contexts around boundaries and Omni-word terms of
// the candidate; this feature set is our own.
class TrainedRecognizer : public EntityRecognizer {
 public:
  TrainedRecognizer(Classifier begin_model, Classifier end_model,
                    Classifier type_model, Lexicon lexicon, LengthBounds bounds = {},
                    double boundary_threshold = 0.5);

  struct Example {
    Sentence sentence;
    std::vector<AnnotatedMention> mentions;  // sentence-level offsets
  };
  static TrainedRecognizer train(std::span<const Example> examples,
                                 const Lexicon& lexicon,
                                 const TrainOptions& options = {},
                                 LengthBounds bounds = {});

  nlohmann::json to_json() const;
  static TrainedRecognizer from_json(const nlohmann::json& j, Lexicon lexicon);

  static FeatureBag begin_features(const std::u32string& chars, size_t pos);
  static FeatureBag end_features(const std::u32string& chars, size_t pos);
  static FeatureBag candidate_features(const std::u32string& chars, size_t start,
                                       size_t end, const Lexicon& lexicon);

 protected:
  Boundaries detect(const Sentence& sentence,
                    const std::u32string& chars) const override;
  std::optional<Assessment> assess(const Sentence& sentence,
                                   const std::u32string& chars,
                                   const Candidate& candidate) const override;
  std::vector<EntityMention> select(std::vector<EntityMention> mentions) const override;

 private:
  Classifier begin_model_;
  Classifier end_model_;
  Classifier type_model_;
  Lexicon lexicon_;
  double boundary_threshold_;
};

// Omni-word features of the span covering two mentions, tagged by region:
// "A1:" inside the first argument, "B:" between them, "A2:" inside the
// second. Arguments are ordered by position.
FeatureBag relation_features(const Sentence& sentence, const EntityMention& a,
                             const EntityMention& b, const Lexicon& lexicon);

// Unordered mention pairs to classify; none when the sentence has more than
// max_entities mentions.
std::vector<std::pair<size_t, size_t>> candidate_pairs(
    std::span<const EntityMention> mentions, size_t max_entities = 10);

struct RelationOptions {
  size_t max_entities = 10;
};

// Classifies every candidate pair and keeps non-NONE predictions, weighted by
// the predicted class probability.
std::vector<RelationMention> extract_relations(const Sentence& sentence,
                                               std::span<const EntityMention> mentions,
                                               const Classifier& clf,
                                               const Lexicon& lexicon,
                                               const RelationOptions& options = {});

// Relation training instances from annotations: annotated pairs carry their
// relation type, all other co-sentence pairs are NONE.
std::vector<Instance> relation_instances(const DocumentStore& store,
                                         const AnnotationSet& annotations,
                                         const Lexicon& lexicon,
                                         const RelationOptions& options = {});

// Sentence-level training examples for TrainedRecognizer.
std::vector<TrainedRecognizer::Example> recognizer_examples(
    const DocumentStore& store, const AnnotationSet& annotations);

// Everything extracted from one event's documents.
struct ExtractionBundle {
  std::string event_id;
  std::map<std::string, Timestamp> doc_timestamps;
  std::vector<Sentence> sentences;
  std::vector<EntityMention> mentions;
  std::vector<RelationMention> relations;
};

struct ExtractOptions {
  RelationOptions relations;
};

// Runs recognition and relation extraction over every sentence of the
// event's member documents. rel_clf may be null (entities only).
// Throws std::out_of_range naming a member id missing from the store.
ExtractionBundle extract_event(const DocumentEvent& event, const DocumentStore& store,
                               const EntityRecognizer& recognizer,
                               const Classifier* rel_clf, const Lexicon& lexicon,
                               const ExtractOptions& options = {});

// Restricts a bundle to a subset of its documents.
ExtractionBundle subset_bundle(const ExtractionBundle& bundle,
                               const std::string& event_id,
                               std::span<const std::string> doc_ids);

nlohmann::json bundle_to_json(const ExtractionBundle& bundle);
ExtractionBundle bundle_from_json(const nlohmann::json& j);

}  // namespace evnet

#endif  // EVNET_EXTRACT_H_
