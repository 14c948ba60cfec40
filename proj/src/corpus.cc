#include "evnet/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>

#include "evnet/utf8.h"

namespace evnet {

namespace chr = std::chrono;

namespace {

bool parse_digits(std::string_view text, size_t pos, size_t count, int* out) {
  int value = 0;
  for (size_t i = pos; i < pos + count; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
    value = value * 10 + (text[i] - '0');
  }
  *out = value;
  return true;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' ||
      text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z')
    return std::nullopt;
  int y, mo, d, h, mi, s;
  if (!parse_digits(text, 0, 4, &y) || !parse_digits(text, 5, 2, &mo) ||
      !parse_digits(text, 8, 2, &d) || !parse_digits(text, 11, 2, &h) ||
      !parse_digits(text, 14, 2, &mi) || !parse_digits(text, 17, 2, &s))
    return std::nullopt;
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return Timestamp{chr::sys_days{ymd}} + chr::hours{h} + chr::minutes{mi} +
         chr::seconds{s};
}

std::string format_timestamp(Timestamp ts) {
  const auto day = chr::floor<chr::days>(ts);
  const chr::year_month_day ymd{day};
  const chr::hh_mm_ss hms{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_date(Timestamp ts) {
  return format_timestamp(ts).substr(0, 10);
}

void DocumentStore::add(Document doc) {
  if (by_id_.count(doc.id)) {
    throw std::invalid_argument("duplicate document id: " + doc.id);
  }
  by_id_.emplace(doc.id, docs_.size());
  docs_.push_back(std::move(doc));
}

const Document* DocumentStore::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

IngestError::IngestError(size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line) {}

IngestResult ingest_documents(std::istream& in, bool strict) {
  IngestResult result;
  std::string line;
  size_t lineno = 0;
  auto reject = [&](const std::string& message) {
    if (strict) throw IngestError(lineno, message);
    result.issues.push_back({lineno, message});
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      reject(std::string("malformed JSON: ") + e.what());
      continue;
    }
    if (!rec.is_object()) {
      reject("record is not an object");
      continue;
    }
    std::string missing;
    for (const char* field : {"id", "text", "timestamp"}) {
      if (!rec.contains(field) || !rec[field].is_string()) {
        missing = field;
        break;
      }
    }
    if (!missing.empty()) {
      reject("missing or non-string field '" + missing + "'");
      continue;
    }
    auto ts = parse_timestamp(rec["timestamp"].get<std::string>());
    if (!ts) {
      reject("unparseable timestamp '" + rec["timestamp"].get<std::string>() +
             "'");
      continue;
    }
    Document doc{rec["id"].get<std::string>(), rec["text"].get<std::string>(),
                 *ts, rec.value("source", std::string())};
    if (doc.id.empty()) {
      reject("empty id");
      continue;
    }
    if (result.store.find(doc.id)) {
      reject("duplicate id '" + doc.id + "'");
      continue;
    }
    result.store.add(std::move(doc));
  }
  return result;
}

IngestResult ingest_documents(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ingest_documents(in, strict);
}

nlohmann::json document_to_json(const Document& doc) {
  return {{"id", doc.id},
          {"text", doc.text},
          {"timestamp", format_timestamp(doc.timestamp)},
          {"source", doc.source}};
}

Lexicon::Lexicon(const std::vector<std::string>& entries) {
  for (const auto& e : entries) {
    std::u32string chars = utf8::decode(e);
    if (chars.empty()) throw std::invalid_argument("empty lexicon entry");
    max_len_ = std::max(max_len_, chars.size());
    entries_.insert(std::move(chars));
  }
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) entries.emplace_back(t);
  }
  return Lexicon(entries);
}

bool Lexicon::contains(std::u32string_view entry) const {
  return entries_.find(entry) != entries_.end();
}

bool Lexicon::contains(std::string_view entry) const {
  return contains(std::u32string_view(utf8::decode(entry)));
}

TermCounts tokenize_omni_word(std::string_view text, const Lexicon& lexicon) {
  TermCounts terms;
  if (lexicon.empty()) return terms;
  const std::u32string chars = utf8::decode(text);
  const std::u32string_view view(chars);
  const size_t window = lexicon.max_entry_len();
  for (size_t i = 0; i < view.size(); ++i) {
    const size_t longest = std::min(window, view.size() - i);
    for (size_t len = 1; len <= longest; ++len) {
      auto candidate = view.substr(i, len);
      if (lexicon.contains(candidate)) ++terms[utf8::encode(candidate)];
    }
  }
  return terms;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<int64_t> freq)
    : terms_(std::move(terms)), freq_(std::move(freq)) {
  if (terms_.size() != freq_.size()) {
    throw std::invalid_argument("vocabulary terms/frequency size mismatch");
  }
  for (size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) {
      throw std::invalid_argument("duplicate vocabulary term: " + terms_[i]);
    }
  }
}

std::optional<size_t> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (size_t i = 0; i < terms_.size(); ++i) {
    terms.push_back({{"term", terms_[i]}, {"freq", freq_[i]}});
  }
  return {{"terms", terms}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  std::vector<std::string> terms;
  std::vector<int64_t> freq;
  for (const auto& t : j.at("terms")) {
    terms.push_back(t.at("term").get<std::string>());
    freq.push_back(t.at("freq").get<int64_t>());
  }
  return Vocabulary(std::move(terms), std::move(freq));
}

Vocabulary build_vocabulary(const TermCounts& corpus_freq,
                            const VocabularyOptions& options) {
  if (options.prune_ratio < 0.0 || options.prune_ratio >= 0.5) {
    throw std::invalid_argument("prune_ratio must be in [0, 0.5)");
  }
  std::vector<std::pair<std::string, int64_t>> ranked(corpus_freq.begin(),
                                                      corpus_freq.end());
  // UTF-8 byte order equals codepoint order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  const auto cut = static_cast<size_t>(
      std::floor(static_cast<double>(ranked.size()) * options.prune_ratio + 1e-9));
  std::vector<std::string> terms;
  std::vector<int64_t> freq;
  for (size_t i = cut; i + cut < ranked.size(); ++i) {
    if (ranked[i].second < options.min_freq) continue;
    terms.push_back(ranked[i].first);
    freq.push_back(ranked[i].second);
  }
  return Vocabulary(std::move(terms), std::move(freq));
}

Vocabulary build_vocabulary(const DocumentStore& store, const Lexicon& lexicon,
                            const VocabularyOptions& options) {
  if (store.empty()) throw std::invalid_argument("empty corpus");
  TermCounts total;
  for (const auto& doc : store.documents()) {
    for (const auto& [term, n] : tokenize_omni_word(doc.text, lexicon)) {
      total[term] += n;
    }
  }
  return build_vocabulary(total, options);
}

std::vector<TimeSlice> partition_by_time(const DocumentStore& store,
                                         int step_months) {
  if (step_months < 1) throw std::invalid_argument("step_months must be >= 1");
  if (store.empty()) throw std::invalid_argument("empty corpus");
  auto month_of = [](Timestamp ts) {
    const chr::year_month_day ymd{chr::floor<chr::days>(ts)};
    return ymd.year() / ymd.month();
  };
  const auto& docs = store.documents();
  auto [lo, hi] = std::minmax_element(
      docs.begin(), docs.end(),
      [](const Document& a, const Document& b) { return a.timestamp < b.timestamp; });
  const chr::year_month first = month_of(lo->timestamp);
  const chr::year_month last = month_of(hi->timestamp);
  const int span = static_cast<int>((last - first).count());
  const int count = span / step_months + 1;

  std::vector<TimeSlice> slices(count);
  for (int k = 0; k < count; ++k) {
    auto begin_month = first + chr::months{k * step_months};
    auto end_month = first + chr::months{(k + 1) * step_months};
    slices[k].index = k;
    slices[k].start = Timestamp{chr::sys_days{begin_month / 1}};
    slices[k].end = Timestamp{chr::sys_days{end_month / 1}};
  }
  for (const auto& doc : docs) {
    const int offset = static_cast<int>((month_of(doc.timestamp) - first).count());
    slices[offset / step_months].members.push_back(doc.id);
  }
  return slices;
}

nlohmann::json slice_to_json(const TimeSlice& slice) {
  return {{"index", slice.index},
          {"start", format_timestamp(slice.start)},
          {"end", format_timestamp(slice.end)},
          {"members", slice.members}};
}

TimeSlice slice_from_json(const nlohmann::json& j) {
  TimeSlice s;
  s.index = j.at("index").get<int>();
  auto start = parse_timestamp(j.at("start").get<std::string>());
  auto end = parse_timestamp(j.at("end").get<std::string>());
  if (!start || !end) throw std::runtime_error("bad slice timestamps");
  s.start = *start;
  s.end = *end;
  s.members = j.at("members").get<std::vector<std::string>>();
  return s;
}

}  // namespace evnet
