#include "evnet/eventdetect.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>

namespace evnet {

namespace {

// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string two_digit(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", n);
  return buf;
}

void normalize(std::vector<double>& row) {
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& x : row) x /= sum;
}

}  // namespace

TopicModel fit_lda(std::span<const TermCounts> docs, const Vocabulary& vocab,
                   const LdaOptions& options) {
  if (options.topics < 1) throw std::invalid_argument("topics must be >= 1");
  if (options.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (options.beta <= 0) throw std::invalid_argument("beta must be > 0");
  const int K = options.topics;
  const size_t V = vocab.size();
  const double alpha = options.effective_alpha();
  const double beta = options.beta;

  // Token stream per document, in term order.
  std::vector<std::vector<int>> words(docs.size());
  size_t total_tokens = 0;
  for (size_t d = 0; d < docs.size(); ++d) {
    for (const auto& [term, n] : docs[d]) {
      if (auto w = vocab.find(term)) {
        words[d].insert(words[d].end(), n, static_cast<int>(*w));
      }
    }
    total_tokens += words[d].size();
  }
  if (total_tokens == 0) throw std::invalid_argument("empty term matrix");

  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<int>> z(docs.size());
  std::vector<int> word_topic(V * K, 0);  // [w * K + k]
  std::vector<int> topic_total(K, 0);
  std::vector<std::vector<int>> doc_topic(docs.size(), std::vector<int>(K, 0));

  for (size_t d = 0; d < docs.size(); ++d) {
    z[d].resize(words[d].size());
    for (size_t i = 0; i < words[d].size(); ++i) {
      const int k = std::min(K - 1, static_cast<int>(uniform01(rng) * K));
      z[d][i] = k;
      ++word_topic[words[d][i] * K + k];
      ++topic_total[k];
      ++doc_topic[d][k];
    }
  }

  const double v_beta = static_cast<double>(V) * beta;
  std::vector<double> cumulative(K);
  for (int iter = 0; iter < options.iterations; ++iter) {
    for (size_t d = 0; d < docs.size(); ++d) {
      for (size_t i = 0; i < words[d].size(); ++i) {
        const int w = words[d][i];
        int k = z[d][i];
        --word_topic[w * K + k];
        --topic_total[k];
        --doc_topic[d][k];

        double acc = 0;
        for (int t = 0; t < K; ++t) {
          acc += (word_topic[w * K + t] + beta) / (topic_total[t] + v_beta) *
                 (doc_topic[d][t] + alpha);
          cumulative[t] = acc;
        }
        const double u = uniform01(rng) * acc;
        k = static_cast<int>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin());
        if (k >= K) k = K - 1;

        z[d][i] = k;
        ++word_topic[w * K + k];
        ++topic_total[k];
        ++doc_topic[d][k];
      }
    }
  }

  TopicModel model;
  model.topics = K;
  model.alpha = alpha;
  model.beta = beta;
  model.iterations = options.iterations;
  model.seed = options.seed;
  model.phi.assign(K, std::vector<double>(V));
  for (int k = 0; k < K; ++k) {
    for (size_t w = 0; w < V; ++w) {
      model.phi[k][w] = (word_topic[w * K + k] + beta) / (topic_total[k] + v_beta);
    }
    normalize(model.phi[k]);
  }
  model.theta.assign(docs.size(), std::vector<double>(K));
  for (size_t d = 0; d < docs.size(); ++d) {
    const double denom = static_cast<double>(words[d].size()) + K * alpha;
    for (int k = 0; k < K; ++k) {
      model.theta[d][k] = (doc_topic[d][k] + alpha) / denom;
    }
    normalize(model.theta[d]);
  }
  return model;
}

std::vector<double> document_vector(const TermCounts& terms,
                                    const Vocabulary& vocab) {
  std::vector<double> v(vocab.size(), 0.0);
  double total = 0;
  for (const auto& [term, n] : terms) {
    if (auto w = vocab.find(term)) {
      v[*w] += n;
      total += n;
    }
  }
  if (total > 0) {
    for (double& x : v) x /= total;
  }
  return v;
}

std::pair<int, double> nearest_topic(std::span<const double> doc_vector,
                                     const TopicModel& model) {
  int best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.topics; ++k) {
    const auto& phi = model.phi[k];
    if (phi.size() != doc_vector.size()) {
      throw std::invalid_argument("model and document vector sizes differ");
    }
    double sq = 0;
    for (size_t w = 0; w < phi.size(); ++w) {
      const double diff = doc_vector[w] - phi[w];
      sq += diff * diff;
    }
    if (sq < best_sq) {
      best_sq = sq;
      best = k;
    }
  }
  return {best, std::sqrt(best_sq)};
}

std::vector<WeightedWord> top_words(const TopicModel& model, int topic,
                                    const Vocabulary& vocab, int n) {
  if (n <= 0) throw std::invalid_argument("n must be positive");
  if (topic < 0 || topic >= model.topics) {
    throw std::out_of_range("topic index out of range");
  }
  const auto& phi = model.phi[topic];
  std::vector<size_t> order(phi.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t take = std::min(order.size(), static_cast<size_t>(n));
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](size_t a, size_t b) {
                      if (phi[a] != phi[b]) return phi[a] > phi[b];
                      return vocab.term(a) < vocab.term(b);
                    });
  std::vector<WeightedWord> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    out.push_back({vocab.term(order[i]), phi[order[i]]});
  }
  return out;
}

std::vector<DocumentEvent> assign_events(std::span<const SliceDocument> docs,
                                         const TopicModel& model,
                                         const Vocabulary& vocab,
                                         const std::string& id_prefix,
                                         EventLevel level, int label_words) {
  std::vector<std::vector<std::string>> members(model.topics);
  for (const auto& doc : docs) {
    const auto vec = document_vector(doc.terms, vocab);
    members[nearest_topic(vec, model).first].push_back(doc.id);
  }
  const char marker = level == EventLevel::kEvent ? 'e' : 's';
  std::vector<DocumentEvent> events;
  for (int k = 0; k < model.topics; ++k) {
    if (members[k].empty()) continue;
    DocumentEvent ev;
    ev.id = id_prefix + marker + two_digit(k);
    ev.topic = k;
    ev.level = level;
    ev.members = std::move(members[k]);
    if (!vocab.empty()) ev.top_words = top_words(model, k, vocab, label_words);
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<DocumentEvent> detect_hierarchical(std::span<const SliceDocument> docs,
                                               const Vocabulary& vocab,
                                               int slice_index,
                                               const HierarchyOptions& options) {
  if (docs.empty()) throw std::invalid_argument("empty slice");
  const TopicModel top = fit_lda(
      [&] {
        std::vector<TermCounts> terms;
        for (const auto& d : docs) terms.push_back(d.terms);
        return terms;
      }(),
      vocab, options.lda);
  std::vector<DocumentEvent> events =
      assign_events(docs, top, vocab, "t" + std::to_string(slice_index),
                    EventLevel::kEvent, options.label_words);

  std::unordered_map<std::string, const SliceDocument*> by_id;
  for (const auto& d : docs) by_id.emplace(d.id, &d);

  // Sub-event fits are independent; each branch gets its own derived seed.
  std::vector<std::future<std::vector<DocumentEvent>>> pending(events.size());
  for (size_t i = 0; i < events.size(); ++i) {
    const DocumentEvent& ev = events[i];
    if (static_cast<int>(ev.members.size()) < options.min_docs) continue;
    pending[i] = std::async(std::launch::async, [&, i] {
      const DocumentEvent& parent = events[i];
      std::vector<SliceDocument> sub_docs;
      std::vector<TermCounts> sub_terms;
      for (const auto& id : parent.members) {
        sub_docs.push_back(*by_id.at(id));
        sub_terms.push_back(by_id.at(id)->terms);
      }
      LdaOptions lda = options.lda;
      lda.seed = mix_seed(options.lda.seed, static_cast<uint64_t>(parent.topic));
      try {
        const TopicModel sub = fit_lda(sub_terms, vocab, lda);
        return assign_events(sub_docs, sub, vocab, parent.id,
                             EventLevel::kSubEvent, options.label_words);
      } catch (const std::invalid_argument&) {
        return std::vector<DocumentEvent>{};
      }
    });
  }
  for (size_t i = 0; i < events.size(); ++i) {
    if (pending[i].valid()) events[i].children = pending[i].get();
  }
  return events;
}

size_t count_events(std::span<const DocumentEvent> events) {
  size_t n = 0;
  for (const auto& e : events) n += 1 + count_events(e.children);
  return n;
}

const DocumentEvent* find_event(std::span<const DocumentEvent> events,
                                std::string_view id) {
  for (const auto& e : events) {
    if (e.id == id) return &e;
    if (id.substr(0, e.id.size()) == e.id) {
      if (const auto* hit = find_event(e.children, id)) return hit;
    }
  }
  return nullptr;
}

nlohmann::json event_to_json(const DocumentEvent& event) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : event.top_words) {
    words.push_back({{"word", w.word}, {"weight", w.weight}});
  }
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : event.children) children.push_back(event_to_json(c));
  return {{"id", event.id},
          {"topic", event.topic},
          {"level", event.level == EventLevel::kEvent ? "event" : "sub-event"},
          {"members", event.members},
          {"top_words", words},
          {"children", children}};
}

DocumentEvent event_from_json(const nlohmann::json& j) {
  DocumentEvent ev;
  ev.id = j.at("id").get<std::string>();
  ev.topic = j.value("topic", 0);
  ev.level = j.value("level", std::string("event")) == "sub-event"
                 ? EventLevel::kSubEvent
                 : EventLevel::kEvent;
  ev.members = j.at("members").get<std::vector<std::string>>();
  for (const auto& w : j.at("top_words")) {
    ev.top_words.push_back({w.at("word").get<std::string>(),
                            w.at("weight").get<double>()});
  }
  for (const auto& c : j.at("children")) ev.children.push_back(event_from_json(c));
  return ev;
}

}  // namespace evnet
