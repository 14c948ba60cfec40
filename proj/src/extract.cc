#include "evnet/extract.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <tuple>

#include "evnet/utf8.h"

namespace evnet {

namespace {

bool is_terminator(char32_t c) {
  switch (c) {
    case U'。': case U'！': case U'？': case U'!': case U'?': case U'.':
    case U'\n':
      return true;
    default:
      return false;
  }
}

std::u32string_view slice(const std::u32string& chars, size_t start, size_t end) {
  return std::u32string_view(chars).substr(start, end - start);
}

std::string char_at(const std::u32string& chars, long pos) {
  if (pos < 0) return "^";
  if (pos >= static_cast<long>(chars.size())) return "$";
  return utf8::encode(std::u32string_view(chars).substr(pos, 1));
}

// Resolves overlaps greedily in the given priority order.
std::vector<EntityMention> non_overlapping(std::vector<EntityMention> ranked) {
  std::vector<EntityMention> kept;
  for (auto& m : ranked) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return m.start < k.end && k.start < m.end;
    });
    if (!clash) kept.push_back(std::move(m));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  return kept;
}

using MentionKey = std::tuple<std::string, int, size_t, size_t, EntityType>;

MentionKey key_of(const EntityMention& m) {
  return {m.doc_id, m.sentence_index, m.start, m.end, m.etype};
}

nlohmann::json mention_to_json(const EntityMention& m) {
  return {{"surface", m.surface},       {"etype", to_string(m.etype)},
          {"weight", m.weight},         {"doc_id", m.doc_id},
          {"sentence", m.sentence_index}, {"start", m.start},
          {"end", m.end}};
}

EntityMention mention_from_json(const nlohmann::json& j) {
  EntityMention m;
  m.surface = j.at("surface").get<std::string>();
  auto t = parse_entity_type(j.at("etype").get<std::string>());
  if (!t) throw std::runtime_error("unknown entity type in bundle");
  m.etype = *t;
  m.weight = j.at("weight").get<double>();
  m.doc_id = j.at("doc_id").get<std::string>();
  m.sentence_index = j.at("sentence").get<int>();
  m.start = j.at("start").get<size_t>();
  m.end = j.at("end").get<size_t>();
  return m;
}

}  // namespace

std::vector<Sentence> split_sentences(const Document& doc) {
  const std::u32string chars = utf8::decode(doc.text);
  std::vector<Sentence> out;
  size_t start = 0;
  auto flush = [&](size_t end) {
    if (end > start) {
      Sentence s;
      s.doc_id = doc.id;
      s.index = static_cast<int>(out.size());
      s.text = utf8::encode(slice(chars, start, end));
      s.begin = start;
      s.end = end;
      out.push_back(std::move(s));
    }
  };
  for (size_t i = 0; i < chars.size(); ++i) {
    if (is_terminator(chars[i])) {
      flush(i);
      start = i + 1;
    }
  }
  flush(chars.size());
  return out;
}

// ---------------------------------------------------------------------------
// EntityRecognizer

std::vector<EntityMention> EntityRecognizer::recognize(const Sentence& sentence) const {
  const std::u32string chars = utf8::decode(sentence.text);
  const Boundaries boundaries = detect(sentence, chars);
  std::vector<EntityMention> mentions;
  for (const Candidate& c : assemble(boundaries)) {
    if (c.end <= c.start || c.end > chars.size()) continue;
    const size_t len = c.end - c.start;
    if (len < bounds_.min_chars || len > bounds_.max_chars) continue;
    auto verdict = assess(sentence, chars, c);
    if (!verdict) continue;
    EntityMention m;
    m.surface = utf8::encode(slice(chars, c.start, c.end));
    m.etype = verdict->etype;
    m.weight = verdict->score;
    m.doc_id = sentence.doc_id;
    m.sentence_index = sentence.index;
    m.start = c.start;
    m.end = c.end;
    mentions.push_back(std::move(m));
  }
  mentions = select(std::move(mentions));
  std::sort(mentions.begin(), mentions.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start, a.end, a.etype) < std::tie(b.start, b.end, b.etype);
  });
  return mentions;
}

std::vector<EntityRecognizer::Candidate> EntityRecognizer::assemble(
    const Boundaries& boundaries) const {
  std::vector<size_t> begins = boundaries.begins;
  std::vector<size_t> ends = boundaries.ends;
  std::sort(begins.begin(), begins.end());
  begins.erase(std::unique(begins.begin(), begins.end()), begins.end());
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  const size_t span = max_span();
  std::vector<Candidate> out;
  for (size_t b : begins) {
    for (auto it = std::upper_bound(ends.begin(), ends.end(), b);
         it != ends.end() && *it - b <= span; ++it) {
      out.push_back({b, *it});
    }
  }
  return out;
}

std::vector<EntityMention> EntityRecognizer::select(
    std::vector<EntityMention> mentions) const {
  return mentions;
}

// ---------------------------------------------------------------------------
// GazetteerRecognizer

GazetteerRecognizer::GazetteerRecognizer(std::map<std::string, EntityType> entries,
                                         LengthBounds bounds)
    : EntityRecognizer(bounds) {
  for (const auto& [surface, type] : entries) {
    auto chars = utf8::decode(surface);
    if (chars.empty()) throw std::invalid_argument("empty gazetteer entry");
    if (type == EntityType::kTime) {
      throw std::invalid_argument("gazetteer entries must be PER, ORG or LOC");
    }
    longest_ = std::max(longest_, chars.size());
    entries_.emplace(std::move(chars), type);
  }
}

GazetteerRecognizer GazetteerRecognizer::load(const std::filesystem::path& path,
                                              LengthBounds bounds) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gazetteer " + path.string());
  std::map<std::string, EntityType> entries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    auto type = tab == std::string::npos
                    ? std::nullopt
                    : parse_entity_type(std::string_view(line).substr(tab + 1));
    if (!type || *type == EntityType::kTime) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'surface<TAB>PER|ORG|LOC'");
    }
    entries.emplace(line.substr(0, tab), *type);
  }
  return GazetteerRecognizer(std::move(entries), bounds);
}

EntityRecognizer::Boundaries GazetteerRecognizer::detect(
    const Sentence&, const std::u32string& chars) const {
  Boundaries b;
  for (size_t i = 0; i < chars.size(); ++i) {
    const size_t longest = std::min(longest_, chars.size() - i);
    for (size_t len = 1; len <= longest; ++len) {
      if (entries_.count(std::u32string(slice(chars, i, i + len)))) {
        b.begins.push_back(i);
        b.ends.push_back(i + len);
      }
    }
  }
  return b;
}

std::optional<EntityRecognizer::Assessment> GazetteerRecognizer::assess(
    const Sentence&, const std::u32string& chars, const Candidate& c) const {
  auto it = entries_.find(std::u32string(slice(chars, c.start, c.end)));
  if (it == entries_.end()) return std::nullopt;
  return Assessment{it->second, 1.0};
}

std::vector<EntityMention> GazetteerRecognizer::select(
    std::vector<EntityMention> mentions) const {
  std::stable_sort(mentions.begin(), mentions.end(), [](const auto& a, const auto& b) {
    const size_t la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    return a.start < b.start;
  });
  return non_overlapping(std::move(mentions));
}

// ---------------------------------------------------------------------------
// Annotations

AnnotationSet parse_annotations(std::istream& in) {
  AnnotationSet out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DocumentAnnotations a;
      a.doc_id = j.at("doc_id").get<std::string>();
      for (const auto& m : j.value("mentions", nlohmann::json::array())) {
        AnnotatedMention am;
        am.surface = m.at("surface").get<std::string>();
        auto t = parse_entity_type(m.at("etype").get<std::string>());
        if (!t || *t == EntityType::kTime) throw std::runtime_error("bad etype");
        am.etype = *t;
        am.start = m.at("start").get<size_t>();
        am.end = m.at("end").get<size_t>();
        am.weight = m.value("weight", 1.0);
        a.mentions.push_back(std::move(am));
      }
      for (const auto& r : j.value("relations", nlohmann::json::array())) {
        AnnotatedRelation ar;
        auto t = parse_relation_type(r.at("rtype").get<std::string>());
        if (!t || *t == RelationType::kCoOccur) throw std::runtime_error("bad rtype");
        ar.rtype = *t;
        ar.arg1 = r.at("arg1_idx").get<size_t>();
        ar.arg2 = r.at("arg2_idx").get<size_t>();
        ar.sentence = r.at("sentence").get<int>();
        if (ar.arg1 >= a.mentions.size() || ar.arg2 >= a.mentions.size() ||
            ar.arg1 == ar.arg2) {
          throw std::runtime_error("relation argument index out of range");
        }
        a.relations.push_back(ar);
      }
      for (const auto& act : j.value("actions", nlohmann::json::array())) {
        a.actions.push_back({act.at("sentence").get<int>(),
                             act.at("type").get<std::string>()});
      }
      out[a.doc_id] = std::move(a);
    } catch (const std::exception& e) {
      throw std::runtime_error("annotations line " + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  return out;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotations " + path.string());
  return parse_annotations(in);
}

nlohmann::json annotations_to_json(const DocumentAnnotations& a) {
  nlohmann::json mentions = nlohmann::json::array();
  for (const auto& m : a.mentions) {
    mentions.push_back({{"surface", m.surface},
                        {"etype", to_string(m.etype)},
                        {"start", m.start},
                        {"end", m.end}});
  }
  nlohmann::json relations = nlohmann::json::array();
  for (const auto& r : a.relations) {
    relations.push_back({{"rtype", to_string(r.rtype)},
                         {"arg1_idx", r.arg1},
                         {"arg2_idx", r.arg2},
                         {"sentence", r.sentence}});
  }
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& act : a.actions) {
    actions.push_back({{"sentence", act.sentence}, {"type", act.type}});
  }
  return {{"doc_id", a.doc_id},
          {"mentions", mentions},
          {"relations", relations},
          {"actions", actions}};
}

AnnotationRecognizer::AnnotationRecognizer(const AnnotationSet& annotations,
                                           LengthBounds bounds)
    : EntityRecognizer(bounds) {
  for (const auto& [doc_id, a] : annotations) {
    auto& spans = by_doc_[doc_id];
    for (const auto& m : a.mentions) {
      if (m.end <= m.start) continue;
      longest_ = std::max(longest_, m.end - m.start);
      spans.emplace(std::make_pair(m.start, m.end), m);
    }
  }
}

EntityRecognizer::Boundaries AnnotationRecognizer::detect(
    const Sentence& sentence, const std::u32string&) const {
  Boundaries b;
  auto it = by_doc_.find(sentence.doc_id);
  if (it == by_doc_.end()) return b;
  for (const auto& [span, m] : it->second) {
    if (span.first >= sentence.begin && span.second <= sentence.end) {
      b.begins.push_back(span.first - sentence.begin);
      b.ends.push_back(span.second - sentence.begin);
    }
  }
  return b;
}

std::optional<EntityRecognizer::Assessment> AnnotationRecognizer::assess(
    const Sentence& sentence, const std::u32string&, const Candidate& c) const {
  auto it = by_doc_.find(sentence.doc_id);
  if (it == by_doc_.end()) return std::nullopt;
  auto hit = it->second.find({c.start + sentence.begin, c.end + sentence.begin});
  if (hit == it->second.end()) return std::nullopt;
  return Assessment{hit->second.etype, hit->second.weight};
}

// ---------------------------------------------------------------------------
// TrainedRecognizer

namespace {
constexpr std::string_view kBoundary = "B";
constexpr std::string_view kOutside = "O";
constexpr std::string_view kNoEntity = "NONE";
}  // namespace

TrainedRecognizer::TrainedRecognizer(Classifier begin_model, Classifier end_model,
                                     Classifier type_model, Lexicon lexicon,
                                     LengthBounds bounds, double boundary_threshold)
    : EntityRecognizer(bounds),
      begin_model_(std::move(begin_model)),
      end_model_(std::move(end_model)),
      type_model_(std::move(type_model)),
      lexicon_(std::move(lexicon)),
      boundary_threshold_(boundary_threshold) {}

FeatureBag TrainedRecognizer::begin_features(const std::u32string& chars, size_t pos) {
  const long p = static_cast<long>(pos);
  const std::string prev = char_at(chars, p - 1);
  const std::string cur = char_at(chars, p);
  const std::string next = char_at(chars, p + 1);
  return {{"c-1=" + prev, 1.0},
          {"c0=" + cur, 1.0},
          {"c+1=" + next, 1.0},
          {"c-1,0=" + prev + cur, 1.0},
          {"c0,1=" + cur + next, 1.0}};
}

FeatureBag TrainedRecognizer::end_features(const std::u32string& chars, size_t pos) {
  // pos is exclusive: the last character of the span sits at pos - 1.
  const long p = static_cast<long>(pos);
  const std::string last = char_at(chars, p - 1);
  const std::string before = char_at(chars, p - 2);
  const std::string after = char_at(chars, p);
  return {{"l-1=" + before, 1.0},
          {"l0=" + last, 1.0},
          {"l+1=" + after, 1.0},
          {"l-1,0=" + before + last, 1.0},
          {"l0,1=" + last + after, 1.0}};
}

FeatureBag TrainedRecognizer::candidate_features(const std::u32string& chars,
                                                 size_t start, size_t end,
                                                 const Lexicon& lexicon) {
  const auto s = static_cast<long>(start), e = static_cast<long>(end);
  FeatureBag f;
  f["len=" + std::to_string(end - start)] = 1.0;
  f["first=" + char_at(chars, s)] = 1.0;
  f["last=" + char_at(chars, e - 1)] = 1.0;
  f["left=" + char_at(chars, s - 1)] = 1.0;
  f["right=" + char_at(chars, e)] = 1.0;
  f["span=" + utf8::encode(slice(chars, start, end))] = 1.0;
  for (const auto& [term, n] :
       tokenize_omni_word(utf8::encode(slice(chars, start, end)), lexicon)) {
    f["w=" + term] += n;
  }
  return f;
}

TrainedRecognizer TrainedRecognizer::train(std::span<const Example> examples,
                                           const Lexicon& lexicon,
                                           const TrainOptions& options,
                                           LengthBounds bounds) {
  std::vector<Instance> begins, ends, types;
  for (const auto& ex : examples) {
    const std::u32string chars = utf8::decode(ex.sentence.text);
    std::set<size_t> gold_begin, gold_end;
    std::set<std::pair<size_t, size_t>> gold_spans;
    for (const auto& m : ex.mentions) {
      gold_begin.insert(m.start);
      gold_end.insert(m.end);
      gold_spans.insert({m.start, m.end});
      types.push_back({candidate_features(chars, m.start, m.end, lexicon),
                       std::string(to_string(m.etype))});
    }
    for (size_t i = 0; i < chars.size(); ++i) {
      begins.push_back({begin_features(chars, i),
                        std::string(gold_begin.count(i) ? kBoundary : kOutside)});
      ends.push_back({end_features(chars, i + 1),
                      std::string(gold_end.count(i + 1) ? kBoundary : kOutside)});
    }
    // Mis-assembled boundary pairs are the candidate classifier's negatives.
    for (size_t b : gold_begin) {
      for (size_t e : gold_end) {
        if (e <= b || e - b > bounds.max_chars || gold_spans.count({b, e})) continue;
        types.push_back({candidate_features(chars, b, e, lexicon),
                         std::string(kNoEntity)});
      }
    }
  }
  auto fit = [&](const std::vector<Instance>& data, const char* what) {
    try {
      return train_maxent(data, options);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument(std::string("cannot train ") + what +
                                  " model: need at least two classes");
    }
  };
  return TrainedRecognizer(fit(begins, "begin-boundary"), fit(ends, "end-boundary"),
                           fit(types, "candidate"), lexicon, bounds);
}

nlohmann::json TrainedRecognizer::to_json() const {
  return {{"begin", begin_model_.to_json()},
          {"end", end_model_.to_json()},
          {"type", type_model_.to_json()},
          {"boundary_threshold", boundary_threshold_},
          {"min_chars", bounds().min_chars},
          {"max_chars", bounds().max_chars}};
}

TrainedRecognizer TrainedRecognizer::from_json(const nlohmann::json& j, Lexicon lexicon) {
  LengthBounds bounds{j.value("min_chars", size_t{2}), j.value("max_chars", size_t{6})};
  return TrainedRecognizer(Classifier::from_json(j.at("begin")),
                           Classifier::from_json(j.at("end")),
                           Classifier::from_json(j.at("type")), std::move(lexicon),
                           bounds, j.value("boundary_threshold", 0.5));
}

EntityRecognizer::Boundaries TrainedRecognizer::detect(
    const Sentence&, const std::u32string& chars) const {
  Boundaries b;
  const size_t bpos = *begin_model_.class_index(kBoundary);
  const size_t epos = *end_model_.class_index(kBoundary);
  for (size_t i = 0; i < chars.size(); ++i) {
    if (predict(begin_model_, begin_features(chars, i))[bpos] >= boundary_threshold_) {
      b.begins.push_back(i);
    }
    if (predict(end_model_, end_features(chars, i + 1))[epos] >= boundary_threshold_) {
      b.ends.push_back(i + 1);
    }
  }
  return b;
}

std::optional<EntityRecognizer::Assessment> TrainedRecognizer::assess(
    const Sentence&, const std::u32string& chars, const Candidate& c) const {
  const auto probs =
      predict(type_model_, candidate_features(chars, c.start, c.end, lexicon_));
  const size_t best = static_cast<size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
  auto type = parse_entity_type(type_model_.classes()[best]);
  if (!type) return std::nullopt;
  return Assessment{*type, probs[best]};
}

std::vector<EntityMention> TrainedRecognizer::select(
    std::vector<EntityMention> mentions) const {
  std::stable_sort(mentions.begin(), mentions.end(), [](const auto& a, const auto& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    const size_t la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    return a.start < b.start;
  });
  return non_overlapping(std::move(mentions));
}

std::vector<TrainedRecognizer::Example> recognizer_examples(
    const DocumentStore& store, const AnnotationSet& annotations) {
  std::vector<TrainedRecognizer::Example> out;
  for (const auto& [doc_id, a] : annotations) {
    const Document* doc = store.find(doc_id);
    if (!doc) continue;
    for (const auto& s : split_sentences(*doc)) {
      TrainedRecognizer::Example ex{s, {}};
      for (const auto& m : a.mentions) {
        if (m.start >= s.begin && m.end <= s.end && m.end > m.start) {
          AnnotatedMention local = m;
          local.start -= s.begin;
          local.end -= s.begin;
          ex.mentions.push_back(std::move(local));
        }
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relations

FeatureBag relation_features(const Sentence& sentence, const EntityMention& a,
                             const EntityMention& b, const Lexicon& lexicon) {
  const bool a_first = std::tie(a.start, a.end) <= std::tie(b.start, b.end);
  const EntityMention& first = a_first ? a : b;
  const EntityMention& second = a_first ? b : a;
  const std::u32string chars = utf8::decode(sentence.text);
  auto region = [&](size_t s, size_t e) {
    e = std::min(e, chars.size());
    return s < e ? utf8::encode(slice(chars, s, e)) : std::string();
  };
  FeatureBag f;
  auto add = [&](const char* prefix, const std::string& text) {
    for (const auto& [term, n] : tokenize_omni_word(text, lexicon)) {
      f[prefix + term] += n;
    }
  };
  add("A1:", region(first.start, first.end));
  if (first.end < second.start) add("B:", region(first.end, second.start));
  add("A2:", region(second.start, second.end));
  return f;
}

std::vector<std::pair<size_t, size_t>> candidate_pairs(
    std::span<const EntityMention> mentions, size_t max_entities) {
  std::vector<std::pair<size_t, size_t>> pairs;
  if (mentions.size() > max_entities) return pairs;
  for (size_t i = 0; i < mentions.size(); ++i) {
    for (size_t j = i + 1; j < mentions.size(); ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

std::vector<RelationMention> extract_relations(const Sentence& sentence,
                                               std::span<const EntityMention> mentions,
                                               const Classifier& clf,
                                               const Lexicon& lexicon,
                                               const RelationOptions& options) {
  std::vector<RelationMention> out;
  for (auto [i, j] : candidate_pairs(mentions, options.max_entities)) {
    const auto probs =
        predict(clf, relation_features(sentence, mentions[i], mentions[j], lexicon));
    const size_t best = static_cast<size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    auto type = parse_relation_type(clf.classes()[best]);
    if (!type || *type == RelationType::kCoOccur) continue;
    RelationMention r;
    r.rtype = *type;
    r.arg1 = mentions[i];
    r.arg2 = mentions[j];
    r.weight = probs[best];
    r.doc_id = sentence.doc_id;
    r.sentence_index = sentence.index;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Instance> relation_instances(const DocumentStore& store,
                                         const AnnotationSet& annotations,
                                         const Lexicon& lexicon,
                                         const RelationOptions& options) {
  std::vector<Instance> out;
  for (const auto& [doc_id, a] : annotations) {
    const Document* doc = store.find(doc_id);
    if (!doc) continue;
    std::map<std::pair<size_t, size_t>, RelationType> gold;
    for (const auto& r : a.relations) {
      gold[{std::min(r.arg1, r.arg2), std::max(r.arg1, r.arg2)}] = r.rtype;
    }
    for (const auto& s : split_sentences(*doc)) {
      std::vector<size_t> ids;
      std::vector<EntityMention> local;
      for (size_t k = 0; k < a.mentions.size(); ++k) {
        const auto& m = a.mentions[k];
        if (m.start >= s.begin && m.end <= s.end && m.end > m.start) {
          ids.push_back(k);
          local.push_back({m.surface, m.etype, m.weight, doc_id, s.index,
                           m.start - s.begin, m.end - s.begin});
        }
      }
      for (auto [i, j] : candidate_pairs(local, options.max_entities)) {
        auto it = gold.find({std::min(ids[i], ids[j]), std::max(ids[i], ids[j])});
        out.push_back({relation_features(s, local[i], local[j], lexicon),
                       it == gold.end() ? std::string(kNoRelation)
                                        : std::string(to_string(it->second))});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundles

ExtractionBundle extract_event(const DocumentEvent& event, const DocumentStore& store,
                               const EntityRecognizer& recognizer,
                               const Classifier* rel_clf, const Lexicon& lexicon,
                               const ExtractOptions& options) {
  ExtractionBundle bundle;
  bundle.event_id = event.id;
  for (const auto& id : event.members) {
    const Document* doc = store.find(id);
    if (!doc) throw std::out_of_range("event " + event.id + " references missing document " + id);
    bundle.doc_timestamps[id] = doc->timestamp;
    for (auto& s : split_sentences(*doc)) {
      auto mentions = recognizer.recognize(s);
      if (rel_clf) {
        auto rels = extract_relations(s, mentions, *rel_clf, lexicon, options.relations);
        bundle.relations.insert(bundle.relations.end(),
                                std::make_move_iterator(rels.begin()),
                                std::make_move_iterator(rels.end()));
      }
      bundle.mentions.insert(bundle.mentions.end(),
                             std::make_move_iterator(mentions.begin()),
                             std::make_move_iterator(mentions.end()));
      bundle.sentences.push_back(std::move(s));
    }
  }
  return bundle;
}

ExtractionBundle subset_bundle(const ExtractionBundle& bundle,
                               const std::string& event_id,
                               std::span<const std::string> doc_ids) {
  const std::set<std::string> keep(doc_ids.begin(), doc_ids.end());
  ExtractionBundle out;
  out.event_id = event_id;
  for (const auto& [id, ts] : bundle.doc_timestamps) {
    if (keep.count(id)) out.doc_timestamps.emplace(id, ts);
  }
  for (const auto& s : bundle.sentences) {
    if (keep.count(s.doc_id)) out.sentences.push_back(s);
  }
  for (const auto& m : bundle.mentions) {
    if (keep.count(m.doc_id)) out.mentions.push_back(m);
  }
  for (const auto& r : bundle.relations) {
    if (keep.count(r.doc_id)) out.relations.push_back(r);
  }
  return out;
}

nlohmann::json bundle_to_json(const ExtractionBundle& bundle) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& [id, ts] : bundle.doc_timestamps) {
    docs.push_back({{"id", id}, {"timestamp", format_timestamp(ts)}});
  }
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : bundle.sentences) {
    sentences.push_back({{"doc_id", s.doc_id},
                         {"index", s.index},
                         {"text", s.text},
                         {"begin", s.begin},
                         {"end", s.end}});
  }
  std::map<MentionKey, size_t> index;
  nlohmann::json mentions = nlohmann::json::array();
  for (size_t i = 0; i < bundle.mentions.size(); ++i) {
    index.emplace(key_of(bundle.mentions[i]), i);
    mentions.push_back(mention_to_json(bundle.mentions[i]));
  }
  nlohmann::json relations = nlohmann::json::array();
  for (const auto& r : bundle.relations) {
    auto a1 = index.find(key_of(r.arg1));
    auto a2 = index.find(key_of(r.arg2));
    nlohmann::json jr = {{"rtype", to_string(r.rtype)},
                         {"weight", r.weight},
                         {"doc_id", r.doc_id},
                         {"sentence", r.sentence_index}};
    // Arguments are stored by index when they are bundle mentions.
    if (a1 != index.end()) jr["arg1"] = a1->second; else jr["arg1"] = mention_to_json(r.arg1);
    if (a2 != index.end()) jr["arg2"] = a2->second; else jr["arg2"] = mention_to_json(r.arg2);
    relations.push_back(std::move(jr));
  }
  return {{"event_id", bundle.event_id},
          {"documents", docs},
          {"sentences", sentences},
          {"mentions", mentions},
          {"relations", relations}};
}

ExtractionBundle bundle_from_json(const nlohmann::json& j) {
  ExtractionBundle b;
  b.event_id = j.at("event_id").get<std::string>();
  for (const auto& d : j.at("documents")) {
    auto ts = parse_timestamp(d.at("timestamp").get<std::string>());
    if (!ts) throw std::runtime_error("bad timestamp in bundle");
    b.doc_timestamps.emplace(d.at("id").get<std::string>(), *ts);
  }
  for (const auto& s : j.at("sentences")) {
    b.sentences.push_back({s.at("doc_id").get<std::string>(), s.at("index").get<int>(),
                           s.at("text").get<std::string>(), s.at("begin").get<size_t>(),
                           s.at("end").get<size_t>()});
  }
  for (const auto& m : j.at("mentions")) b.mentions.push_back(mention_from_json(m));
  auto arg = [&](const nlohmann::json& a) {
    if (a.is_number_unsigned() || a.is_number_integer()) {
      return b.mentions.at(a.get<size_t>());
    }
    return mention_from_json(a);
  };
  for (const auto& r : j.at("relations")) {
    RelationMention rm;
    auto t = parse_relation_type(r.at("rtype").get<std::string>());
    if (!t) throw std::runtime_error("unknown relation type in bundle");
    rm.rtype = *t;
    rm.arg1 = arg(r.at("arg1"));
    rm.arg2 = arg(r.at("arg2"));
    rm.weight = r.at("weight").get<double>();
    rm.doc_id = r.at("doc_id").get<std::string>();
    rm.sentence_index = r.at("sentence").get<int>();
    b.relations.push_back(std::move(rm));
  }
  return b;
}

}  // namespace evnet
