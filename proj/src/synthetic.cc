#include "evnet/synthetic.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "evnet/utf8.h"

namespace evnet {

namespace {

struct Theme {
  std::vector<std::string> words;
  std::vector<std::string> people;
  std::vector<std::string> places;
  std::vector<std::string> orgs;
};

const std::vector<Theme>& themes() {
  static const std::vector<Theme> kThemes = {
      {{"北约", "发言人", "防御", "部队", "导弹", "士兵", "武器", "战争", "军事",
        "安全", "边境", "司令"},
       {"卡尔扎伊", "国务卿", "盖茨"},
       {"阿富汗", "喀布尔", "加沙北部", "伊拉克"},
       {"美军", "哈马斯", "塔利班"}},
      {{"经济", "市场", "银行", "投资", "贸易", "增长", "企业", "价格", "金融",
        "出口", "消费", "税收"},
       {"温家宝", "伯南克"},
       {"上海", "纽约", "广州"},
       {"世界银行", "央行", "商务部"}},
      {{"比赛", "冠军", "球队", "球员", "奥运", "教练", "联赛", "体育", "决赛",
        "进球", "训练", "观众"},
       {"刘翔", "姚明"},
       {"北京", "伦敦"},
       {"国际奥委会", "火箭队"}},
      {{"历史", "革命", "纪念", "会议", "人民", "同志", "思想", "主席", "文化",
        "故居", "参观", "老区"},
       {"毛泽东", "周恩来", "朱德"},
       {"井冈山", "延安", "韶山", "遵义"},
       {"红军", "中共中央"}},
  };
  return kThemes;
}

const std::vector<std::string> kCueWords = {"考察", "视察", "访问", "讲话", "抵达",
                                            "会见", "会谈", "担任", "负责人", "位于",
                                            "分别", "提到", "发动", "发生", "谴责",
                                            "事件", "分析", "根源", "谈论"};
const std::vector<std::string> kTriggers = {"袭击", "攻击", "冲突", "轰炸", "抗议"};

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  size_t below(size_t n) { return std::min(n - 1, static_cast<size_t>(uniform() * n)); }
  int between(int lo, int hi) { return lo + static_cast<int>(below(hi - lo + 1)); }
  bool chance(double p) { return uniform() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

 private:
  std::mt19937_64 engine_;
};

// Builds one document, tracking character offsets of annotated mentions.
class DocBuilder {
 public:
  explicit DocBuilder(std::string id) { ann_.doc_id = std::move(id); }

  void text(const std::string& s) { text_ += utf8::decode(s); }

  size_t entity(const std::string& surface, EntityType type) {
    const size_t start = text_.size();
    text(surface);
    ann_.mentions.push_back({surface, type, start, text_.size(), 1.0});
    return ann_.mentions.size() - 1;
  }

  void relation(RelationType type, size_t a, size_t b) {
    ann_.relations.push_back({type, a, b, sentence_});
  }

  void action(const std::string& type) { ann_.actions.push_back({sentence_, type}); }

  void end_sentence() {
    text_ += U'。';
    ++sentence_;
  }

  std::string str() const { return utf8::encode(text_); }
  DocumentAnnotations& annotations() { return ann_; }

 private:
  std::u32string text_;
  DocumentAnnotations ann_;
  int sentence_ = 0;
};

void filler(DocBuilder& b, const Theme& t, Rng& rng) {
  const int n = rng.between(3, 5);
  for (int i = 0; i < n; ++i) {
    if (i) b.text(rng.chance(0.5) ? "的" : "和");
    const Theme& src = rng.chance(0.1) ? rng.pick(themes()) : t;
    b.text(rng.pick(src.words));
  }
  b.end_sentence();
}

const std::string& other(const std::vector<std::string>& pool, const std::string& not_this,
                         Rng& rng) {
  for (int tries = 0; tries < 8; ++tries) {
    const auto& c = rng.pick(pool);
    if (c != not_this) return c;
  }
  return pool.front() == not_this ? pool.back() : pool.front();
}

void relation_sentence(DocBuilder& b, const Theme& t, Rng& rng) {
  const auto per = EntityType::kPer, loc = EntityType::kLoc, org = EntityType::kOrg;
  switch (rng.below(6)) {
    case 0: {  // PHYS
      const size_t p = b.entity(rng.pick(t.people), per);
      b.text(rng.chance(0.5) ? "在" : "抵达");
      const size_t l = b.entity(rng.pick(t.places), loc);
      b.text(rng.pick(std::vector<std::string>{"考察", "视察", "访问", "讲话"}));
      b.text(rng.pick(t.words));
      b.relation(RelationType::kPhys, p, l);
      break;
    }
    case 1: {  // PER-SOC
      const std::string& first = rng.pick(t.people);
      const size_t p = b.entity(first, per);
      b.text(rng.chance(0.5) ? "会见了" : "与");
      const size_t q = b.entity(other(t.people, first, rng), per);
      b.text("会谈" + rng.pick(t.words));
      b.relation(RelationType::kPerSoc, p, q);
      break;
    }
    case 2: {  // ORG-AFF
      const size_t p = b.entity(rng.pick(t.people), per);
      b.text("担任");
      const size_t o = b.entity(rng.pick(t.orgs), org);
      b.text("负责人");
      b.relation(RelationType::kOrgAff, p, o);
      break;
    }
    case 3: {  // PART-WHOLE
      const std::string& first = rng.pick(t.places);
      const size_t a = b.entity(first, loc);
      b.text("位于");
      const size_t c = b.entity(other(t.places, first, rng), loc);
      b.text(rng.pick(t.words));
      b.relation(RelationType::kPartWhole, a, c);
      break;
    }
    case 4: {  // GEN-AFF
      const size_t p = b.entity(rng.pick(t.people), per);
      b.text("是");
      const size_t l = b.entity(rng.pick(t.places), loc);
      b.text("人");
      b.relation(RelationType::kGenAff, p, l);
      break;
    }
    default: {  // co-mentioned, unrelated
      b.entity(rng.pick(t.people), per);
      b.text("和");
      b.entity(rng.pick(t.orgs), org);
      b.text("分别提到" + rng.pick(t.words));
      break;
    }
  }
  b.end_sentence();
}

void conflict_sentence(DocBuilder& b, const Theme& t, Rng& rng) {
  const auto loc = EntityType::kLoc, org = EntityType::kOrg;
  const std::string& first = rng.pick(t.orgs);
  b.entity(first, org);
  if (rng.chance(0.5)) {
    b.text("在");
    b.entity(rng.pick(t.places), loc);
    b.text(rng.chance(0.5) ? "发动袭击" : "轰炸");
    b.entity(other(t.orgs, first, rng), org);
  } else {
    b.text("与");
    b.entity(other(t.orgs, first, rng), org);
    b.text("在");
    b.entity(rng.pick(t.places), loc);
    b.text(rng.chance(0.5) ? "发生冲突" : "相互攻击");
  }
  b.action("Conflict");
  b.end_sentence();
}

// Mentions a trigger without describing an attack.
void trigger_negative(DocBuilder& b, const Theme& t, Rng& rng) {
  if (rng.chance(0.5)) {
    b.entity(rng.pick(t.people), EntityType::kPer);
    b.text("在");
    b.entity(rng.pick(t.places), EntityType::kLoc);
    b.text("谈论" + rng.pick(kTriggers) + "的" + rng.pick(t.words));
  } else {
    b.text("分析" + rng.pick(kTriggers) + "事件的根源和" + rng.pick(t.words));
  }
  b.end_sentence();
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusOptions& options) {
  Rng rng(options.seed);
  SyntheticCorpus out;
  std::set<std::string> lexicon(kCueWords.begin(), kCueWords.end());
  lexicon.insert(kTriggers.begin(), kTriggers.end());
  lexicon.insert("在");
  for (const auto& t : themes()) {
    lexicon.insert(t.words.begin(), t.words.end());
    for (const auto& p : t.people) out.gazetteer[p] = EntityType::kPer;
    for (const auto& p : t.places) out.gazetteer[p] = EntityType::kLoc;
    for (const auto& o : t.orgs) out.gazetteer[o] = EntityType::kOrg;
  }
  for (const auto& [name, type] : out.gazetteer) lexicon.insert(name);
  out.lexicon.assign(lexicon.begin(), lexicon.end());
  out.triggers = kTriggers;

  for (int d = 0; d < options.documents; ++d) {
    char id[32];
    std::snprintf(id, sizeof id, "doc%04d", d);
    const int theme_index = static_cast<int>(rng.below(themes().size()));
    const Theme& t = themes()[theme_index];
    DocBuilder b(id);
    const double conflict_rate = theme_index == 0 ? 0.35 : 0.05;
    const int sentences = rng.between(5, 8);
    for (int s = 0; s < sentences; ++s) {
      const double u = rng.uniform();
      if (u < conflict_rate) {
        conflict_sentence(b, t, rng);
      } else if (u < conflict_rate + 0.1) {
        trigger_negative(b, t, rng);
      } else if (u < conflict_rate + 0.5) {
        relation_sentence(b, t, rng);
      } else {
        filler(b, t, rng);
      }
    }
    int offset = static_cast<int>(rng.below(options.months));
    if (d == 0) offset = 0;
    if (d == 1) offset = options.months - 1;
    const int month0 = options.first_month - 1 + offset;
    const int year = options.first_year + month0 / 12;
    const int month = month0 % 12 + 1;
    char ts[32];
    std::snprintf(ts, sizeof ts, "%04d-%02d-%02dT%02d:%02d:00Z", year, month,
                  rng.between(1, 28), rng.between(0, 23), rng.between(0, 59));
    out.documents.push_back({id, b.str(), *parse_timestamp(ts),
                             theme_index == 0 ? "military-desk" : "news-desk"});
    out.theme.push_back(theme_index);
    out.annotations[id] = std::move(b.annotations());
  }
  return out;
}

void write_synthetic_corpus(const SyntheticCorpus& corpus,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("corpus.jsonl");
    for (const auto& d : corpus.documents) out << document_to_json(d).dump() << "\n";
  }
  {
    auto out = open("lexicon.txt");
    for (const auto& w : corpus.lexicon) out << w << "\n";
  }
  {
    auto out = open("gazetteer.tsv");
    for (const auto& [name, type] : corpus.gazetteer) {
      out << name << "\t" << to_string(type) << "\n";
    }
  }
  {
    auto out = open("triggers.txt");
    for (const auto& w : corpus.triggers) out << w << "\n";
  }
  {
    auto out = open("annotations.jsonl");
    for (const auto& [id, a] : corpus.annotations) {
      out << annotations_to_json(a).dump() << "\n";
    }
  }
  {
    auto out = open("pipeline.conf");
    out << "# Synthetic fixture; paths are relative to this file.\n"
           "corpus = corpus.jsonl\n"
           "lexicon = lexicon.txt\n"
           "gazetteer = gazetteer.tsv\n"
           "annotations = annotations.jsonl\n"
           "triggers = triggers.txt\n"
           "recognizer = gazetteer\n"
           "step_months = 5\n"
           "topics = 4\n"
           "lda_iterations = 300\n"
           "lda_seed = 11\n"
           "min_docs = 5\n"
           "min_cooccur = 2\n";
  }
}

PlantedTopics make_planted_topics(int topics, int docs, int words_per_topic,
                                  int doc_length, double purity, uint64_t seed) {
  Rng rng(seed);
  PlantedTopics out;
  auto word = [](int topic, int j) {
    return "k" + std::to_string(topic) + "w" + std::to_string(j);
  };
  TermCounts total;
  for (int d = 0; d < docs; ++d) {
    const int label = d % topics;
    SliceDocument doc;
    doc.id = "p" + std::to_string(d);
    for (int i = 0; i < doc_length; ++i) {
      const int topic = rng.chance(purity) ? label : static_cast<int>(rng.below(topics));
      ++doc.terms[word(topic, static_cast<int>(rng.below(words_per_topic)))];
    }
    for (const auto& [w, n] : doc.terms) total[w] += n;
    out.docs.push_back(std::move(doc));
    out.labels.push_back(label);
  }
  out.vocab = build_vocabulary(total, {0.0, 0});
  return out;
}

std::vector<Instance> make_action_dataset(int size, double label_noise, uint64_t seed,
                                          const std::string& positive,
                                          const std::string& negative) {
  static const std::vector<std::string> kStrong = {"袭击", "轰炸", "交火", "枪击", "爆炸"};
  static const std::vector<std::string> kWeak = {"冲突", "紧张", "部队", "抗议",
                                                 "安全", "边境", "对峙", "警告"};
  static const std::vector<std::string> kNeutral = {
      "经济", "市场", "银行", "投资", "贸易", "增长", "企业", "价格", "比赛", "冠军",
      "球队", "教练", "历史", "文化", "会议", "人民", "科学", "研究", "技术", "专家",
      "发言人", "表示", "今天", "记者", "报道", "政府", "官员", "地区", "国家", "问题"};
  Rng rng(seed);
  std::vector<Instance> out;
  auto draw = [&](FeatureBag& f, const std::vector<std::string>& pool, int lo, int hi) {
    const int n = rng.between(lo, hi);
    for (int i = 0; i < n; ++i) f[rng.pick(pool)] += 1.0;
  };
  for (int i = 0; i < size; ++i) {
    Instance inst;
    const bool is_positive = rng.chance(0.5);
    bool ambiguous = false;
    if (is_positive) {
      if (rng.chance(0.4)) {
        draw(inst.features, kStrong, 2, 3);
        draw(inst.features, kWeak, 0, 2);
        draw(inst.features, kNeutral, 2, 4);
      } else {
        ambiguous = true;
        draw(inst.features, kWeak, 1, 3);
        draw(inst.features, kNeutral, 2, 5);
      }
    } else if (rng.chance(0.6)) {
      draw(inst.features, kNeutral, 3, 6);
    } else {
      ambiguous = true;
      draw(inst.features, kWeak, 1, 3);
      draw(inst.features, kNeutral, 2, 5);
    }
    bool label = is_positive;
    if (ambiguous && rng.chance(label_noise)) label = !label;
    inst.label = label ? positive : negative;
    out.push_back(std::move(inst));
  }
  return out;
}

void write_instances(const std::vector<Instance>& instances,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& inst : instances) {
    out << nlohmann::json{{"label", inst.label}, {"features", inst.features}}.dump()
        << "\n";
  }
}

std::vector<Instance> read_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Instance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    out.push_back({j.at("features").get<FeatureBag>(), j.at("label").get<std::string>()});
  }
  return out;
}

double cluster_purity(const std::vector<std::vector<std::string>>& clusters,
                      const std::map<std::string, int>& labels) {
  size_t total = 0, majority = 0;
  for (const auto& members : clusters) {
    std::map<int, size_t> counts;
    for (const auto& id : members) ++counts[labels.at(id)];
    size_t best = 0;
    for (const auto& [label, n] : counts) best = std::max(best, n);
    majority += best;
    total += members.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(majority) / static_cast<double>(total);
}

}  // namespace evnet
