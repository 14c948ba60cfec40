// Deterministic synthetic data: a small annotated news corpus for the
// pipeline, planted-topic term bags for LDA checks, and a noisy two-class
// sentence dataset for action classification.

#ifndef EVNET_SYNTHETIC_H_
#define EVNET_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "evnet/corpus.h"
#include "evnet/extract.h"
#include "evnet/learn.h"
#include "evnet/types.h"

namespace evnet {

struct SyntheticCorpusOptions {
  int documents = 200;
  uint64_t seed = 7;
  int first_year = 2006;
  int first_month = 11;
  int months = 50;  // Nov 2006 .. Dec 2010
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  std::vector<int> theme;  // planted theme per document
  std::vector<std::string> lexicon;
  std::map<std::string, EntityType> gazetteer;
  std::vector<std::string> triggers;
  AnnotationSet annotations;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusOptions& options = {});

// Writes corpus.jsonl, lexicon.txt, gazetteer.tsv, triggers.txt,
// annotations.jsonl and a pipeline.conf pointing at them.
void write_synthetic_corpus(const SyntheticCorpus& corpus,
                            const std::filesystem::path& dir);

struct PlantedTopics {
  std::vector<SliceDocument> docs;
  std::vector<int> labels;
  Vocabulary vocab;
};

// Each topic owns a disjoint block of words; a document draws `purity` of
// its tokens from its topic's block and the rest uniformly from all words.
PlantedTopics make_planted_topics(int topics, int docs, int words_per_topic,
                                  int doc_length, double purity, uint64_t seed);

// Two-class bag-of-features data. Some positives carry unambiguous cue
// features; the rest of both classes share weak cues, and labels in that
// ambiguous region are flipped with probability `label_noise`.
std::vector<Instance> make_action_dataset(int size, double label_noise, uint64_t seed,
                                          const std::string& positive = "Conflict",
                                          const std::string& negative = "NONE");

void write_instances(const std::vector<Instance>& instances,
                     const std::filesystem::path& path);
std::vector<Instance> read_instances(const std::filesystem::path& path);

// Assignment purity of clusters against planted labels.
double cluster_purity(const std::vector<std::vector<std::string>>& clusters,
                      const std::map<std::string, int>& labels);

}  // namespace evnet

#endif  // EVNET_SYNTHETIC_H_
