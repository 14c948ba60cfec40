// Document ingestion, Omni-word tokenization, vocabulary construction and
// time slicing.

#ifndef EVNET_CORPUS_H_
#define EVNET_CORPUS_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

namespace evnet {

using Timestamp = std::chrono::sys_seconds;

// Parses "YYYY-MM-DDTHH:MM:SSZ". Returns nullopt for anything else,
// including calendar-invalid dates.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);
// "YYYY-MM-DD", the day-precision form used for TIME vertices.
std::string format_date(Timestamp ts);

struct Document {
  std::string id;
  std::string text;
  Timestamp timestamp;
  std::string source;
};

class DocumentStore {
 public:
  // Throws std::invalid_argument if the id is already present.
  void add(Document doc);

  const Document* find(std::string_view id) const;
  const std::vector<Document>& documents() const { return docs_; }
  size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, size_t> by_id_;
};

struct IngestIssue {
  size_t line = 0;  // 1-based
  std::string message;
};

class IngestError : public std::runtime_error {
 public:
  IngestError(size_t line, const std::string& message);
  size_t line() const { return line_; }

 private:
  size_t line_;
};

struct IngestResult {
  DocumentStore store;
  std::vector<IngestIssue> issues;
};

// Reads JSONL records {"id","text","timestamp","source"}. Malformed lines
// are reported and skipped; in strict mode the first one throws IngestError.
IngestResult ingest_documents(std::istream& in, bool strict = false);
IngestResult ingest_documents(const std::filesystem::path& path,
                              bool strict = false);

nlohmann::json document_to_json(const Document& doc);

class Lexicon {
 public:
  Lexicon() = default;
  // Throws std::invalid_argument on an empty entry.
  explicit Lexicon(const std::vector<std::string>& entries);

  // One entry per line; blank lines and surrounding whitespace ignored.
  static Lexicon load(const std::filesystem::path& path);

  bool contains(std::u32string_view entry) const;
  bool contains(std::string_view entry) const;
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Longest entry, in characters.
  size_t max_entry_len() const { return max_len_; }

 private:
  struct Hash {
    using is_transparent = void;
    size_t operator()(std::u32string_view s) const {
      return std::hash<std::u32string_view>{}(s);
    }
  };
  std::unordered_set<std::u32string, Hash, std::equal_to<>> entries_;
  size_t max_len_ = 0;
};

// Term multiset. Ordered so iteration is deterministic.
using TermCounts = std::map<std::string, int>;

// Every substring of `text` (up to the lexicon's longest entry) that is a
// lexicon entry, counted with multiplicity. Overlapping matches all count.
TermCounts tokenize_omni_word(std::string_view text, const Lexicon& lexicon);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<int64_t> freq);

  size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::string& term(size_t i) const { return terms_[i]; }
  int64_t frequency(size_t i) const { return freq_[i]; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::optional<size_t> find(std::string_view term) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> terms_;
  std::vector<int64_t> freq_;
  std::unordered_map<std::string, size_t> index_;
};

struct VocabularyOptions {
  double prune_ratio = 0.05;  // removed from each end of the frequency ranking
  int64_t min_freq = 10;
};

// Rank-prunes distinct terms: the top and bottom floor(n * prune_ratio)
// terms by frequency go first, then anything under min_freq. Surviving
// terms are ordered by descending frequency, ties by codepoint order.
Vocabulary build_vocabulary(const TermCounts& corpus_freq,
                            const VocabularyOptions& options = {});
// Throws std::invalid_argument("empty corpus") for an empty store.
Vocabulary build_vocabulary(const DocumentStore& store, const Lexicon& lexicon,
                            const VocabularyOptions& options = {});

struct TimeSlice {
  int index = 0;
  Timestamp start;
  Timestamp end;  // exclusive
  std::vector<std::string> members;
};

// Slices begin at the first day of the earliest document's month and advance
// by step_months calendar months until the latest document is covered.
// Empty intermediate slices are kept so the slices tile the span.
std::vector<TimeSlice> partition_by_time(const DocumentStore& store,
                                         int step_months = 5);

nlohmann::json slice_to_json(const TimeSlice& slice);
TimeSlice slice_from_json(const nlohmann::json& j);

}  // namespace evnet

#endif  // EVNET_CORPUS_H_
