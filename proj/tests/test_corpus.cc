#include <sstream>

#include "doctest.h"
#include "evnet/corpus.h"
#include "evnet/utf8.h"
#include "support.h"

using namespace evnet;

namespace {

Timestamp ts(const char* text) { return *parse_timestamp(text); }

DocumentStore store_of(std::vector<std::pair<std::string, std::string>> id_time) {
  DocumentStore store;
  for (auto& [id, t] : id_time) store.add({id, "x", ts(t.c_str()), "s"});
  return store;
}

}  // namespace

TEST_CASE("utf8 counts scalar values and round-trips") {
  const std::string s = "加沙北部a\xF0\x9F\x98\x80";
  CHECK(utf8::length(s) == 6);
  CHECK(utf8::encode(utf8::decode(s)) == s);
  CHECK(utf8::substr(s, 2, 4) == "北部");
  // One replacement per undecodable byte.
  CHECK(utf8::decode("\xE5\x8A") == U"\uFFFD\uFFFD");
  CHECK(utf8::decode("a\x80" "b") == U"a\uFFFDb");
}

TEST_CASE("timestamps parse strictly") {
  CHECK(parse_timestamp("2009-02-28T23:59:59Z").has_value());
  CHECK(format_timestamp(ts("2009-02-28T23:59:59Z")) == "2009-02-28T23:59:59Z");
  CHECK(format_date(ts("2009-02-28T23:59:59Z")) == "2009-02-28");
  CHECK_FALSE(parse_timestamp("2009-02-30T00:00:00Z"));
  CHECK_FALSE(parse_timestamp("2009-02-28 00:00:00Z"));
  CHECK_FALSE(parse_timestamp("2009-02-28T00:00:00"));
  CHECK_FALSE(parse_timestamp("2009-02-28T24:00:00Z"));
  CHECK_FALSE(parse_timestamp(""));
}

TEST_CASE("ingest skips malformed lines and reports them") {
  std::istringstream in(
      R"({"id":"a","text":"加沙","timestamp":"2008-01-01T00:00:00Z","source":"x"})" "\n"
      "not json\n"
      R"({"id":"b","text":"t","timestamp":"2008-13-01T00:00:00Z","source":"x"})" "\n"
      "\n"
      R"({"id":"a","text":"dup","timestamp":"2008-01-01T00:00:00Z","source":"x"})" "\n"
      R"({"id":"c","timestamp":"2008-01-01T00:00:00Z","source":"x"})" "\n"
      R"({"id":"d","text":"ok","timestamp":"2008-02-01T00:00:00Z","source":"y"})" "\n");
  auto result = ingest_documents(in);
  REQUIRE(result.store.size() == 2);
  CHECK(result.store.find("a")->text == "加沙");
  CHECK(result.store.find("d")->source == "y");
  std::vector<size_t> lines;
  for (const auto& issue : result.issues) lines.push_back(issue.line);
  CHECK(lines == std::vector<size_t>{2, 3, 5, 6});
}

TEST_CASE("strict ingest throws at the first bad line") {
  std::istringstream in(
      R"({"id":"a","text":"x","timestamp":"2008-01-01T00:00:00Z","source":"x"})" "\n"
      R"({"id":"b","text":"x","timestamp":"yesterday","source":"x"})" "\n");
  try {
    ingest_documents(in, true);
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("document store rejects duplicate ids") {
  DocumentStore store;
  store.add({"a", "x", ts("2008-01-01T00:00:00Z"), ""});
  CHECK_THROWS_AS(store.add({"a", "y", ts("2008-01-01T00:00:00Z"), ""}),
                  std::invalid_argument);
  CHECK(store.find("b") == nullptr);
}

TEST_CASE("lexicon") {
  CHECK_THROWS_AS(Lexicon({"加沙", ""}), std::invalid_argument);
  Lexicon lex({"加沙", "加沙北部", "a"});
  CHECK(lex.size() == 3);
  CHECK(lex.max_entry_len() == 4);
  CHECK(lex.contains(std::string_view("加沙北部")));
  CHECK_FALSE(lex.contains(std::string_view("北部")));
}

TEST_CASE("omni-word keeps every overlapping lexicon substring") {
  Lexicon lex({"加沙", "沙北", "北部", "加沙北部", "部"});
  auto terms = tokenize_omni_word("加沙北部加沙", lex);
  CHECK(terms == TermCounts{{"加沙", 2}, {"沙北", 1}, {"北部", 1}, {"加沙北部", 1}, {"部", 1}});
  CHECK(tokenize_omni_word("", lex).empty());
  CHECK(tokenize_omni_word("加沙", Lexicon()).empty());
}

TEST_CASE("omni-word matches the substring oracle on random inputs") {
  testing::Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto entries = testing::random_lexicon(rng, 20);
    const auto text = testing::random_text(rng, 30);
    INFO("text: " << text);
    CHECK(tokenize_omni_word(text, Lexicon(entries)) ==
          testing::brute_force_omni(text, entries));
  }
}

TEST_CASE("vocabulary prunes by rank, then by frequency") {
  // 20 distinct terms: floor(20 * 0.05) = 1 removed from each end.
  TermCounts freq;
  for (int i = 0; i < 20; ++i) freq["w" + std::to_string(100 + i)] = 5 + i;
  auto vocab = build_vocabulary(freq, {0.05, 10});
  // Ranking is w119 (24) .. w100 (5). Top w119 and bottom w100 go; then
  // anything under 10 (w101..w104) goes.
  REQUIRE(vocab.size() == 14);
  CHECK(vocab.term(0) == "w118");
  CHECK(vocab.term(13) == "w105");
  CHECK_FALSE(vocab.find("w119"));
  CHECK_FALSE(vocab.find("w104"));
  for (size_t i = 1; i < vocab.size(); ++i) {
    CHECK(vocab.frequency(i - 1) >= vocab.frequency(i));
  }
}

TEST_CASE("vocabulary breaks frequency ties by codepoint and round-trips") {
  TermCounts freq{{"北部", 12}, {"加沙", 12}, {"a", 12}, {"袭击", 30}};
  auto vocab = build_vocabulary(freq, {0.0, 10});
  CHECK(vocab.terms() == std::vector<std::string>{"袭击", "a", "加沙", "北部"});
  auto back = Vocabulary::from_json(vocab.to_json());
  CHECK(back.terms() == vocab.terms());
  CHECK(back.frequency(0) == 30);
  CHECK_THROWS_AS(build_vocabulary(DocumentStore(), Lexicon({"a"})), std::invalid_argument);
  CHECK_THROWS_AS(build_vocabulary(freq, {0.5, 0}), std::invalid_argument);
}

TEST_CASE("vocabulary from a store counts over all documents") {
  DocumentStore store;
  store.add({"a", "加沙北部", ts("2008-01-01T00:00:00Z"), ""});
  store.add({"b", "加沙", ts("2008-01-02T00:00:00Z"), ""});
  auto vocab = build_vocabulary(store, Lexicon({"加沙", "北部"}), {0.0, 1});
  CHECK(vocab.terms() == std::vector<std::string>{"加沙", "北部"});
  CHECK(vocab.frequency(0) == 2);
}

TEST_CASE("time slices tile calendar months from the earliest document") {
  auto store = store_of({{"late", "2010-12-31T23:00:00Z"},
                         {"early", "2006-11-15T00:00:00Z"},
                         {"mid", "2007-04-01T00:00:00Z"}});
  auto slices = partition_by_time(store, 5);
  REQUIRE(slices.size() == 10);
  CHECK(format_timestamp(slices[0].start) == "2006-11-01T00:00:00Z");
  CHECK(format_timestamp(slices[0].end) == "2007-04-01T00:00:00Z");
  CHECK(format_timestamp(slices[9].end) == "2011-01-01T00:00:00Z");
  CHECK(slices[0].members == std::vector<std::string>{"early"});
  CHECK(slices[1].members == std::vector<std::string>{"mid"});
  CHECK(slices[5].members.empty());
  CHECK(slices[9].members == std::vector<std::string>{"late"});
  for (size_t i = 1; i < slices.size(); ++i) {
    CHECK(slices[i].start == slices[i - 1].end);
    CHECK(slices[i].index == static_cast<int>(i));
  }
  auto back = slice_from_json(slice_to_json(slices[1]));
  CHECK(back.start == slices[1].start);
  CHECK(back.members == slices[1].members);
}

TEST_CASE("time slice edge cases") {
  auto one = store_of({{"a", "2008-03-31T23:59:59Z"}});
  auto slices = partition_by_time(one, 1);
  REQUIRE(slices.size() == 1);
  CHECK(format_timestamp(slices[0].end) == "2008-04-01T00:00:00Z");
  CHECK_THROWS_AS(partition_by_time(one, 0), std::invalid_argument);
  CHECK_THROWS_AS(partition_by_time(DocumentStore(), 5), std::invalid_argument);
  // Every document lands in the slice whose span contains it.
  testing::Rng rng(5);
  DocumentStore store;
  for (int i = 0; i < 60; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:00:00Z", rng.between(2005, 2009),
                  rng.between(1, 12), rng.between(1, 28), rng.between(0, 23));
    store.add({"d" + std::to_string(i), "x", ts(buf), ""});
  }
  for (int step : {1, 3, 5, 7}) {
    size_t total = 0;
    for (const auto& s : partition_by_time(store, step)) {
      total += s.members.size();
      for (const auto& id : s.members) {
        const auto t = store.find(id)->timestamp;
        CHECK(t >= s.start);
        CHECK(t < s.end);
      }
    }
    CHECK(total == store.size());
  }
}
