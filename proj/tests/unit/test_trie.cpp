#include <algorithm>
#include <set>

#include "callmask/trie.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace callmask;

namespace {

Trie make(std::initializer_list<const char*> words) {
  Trie t;
  for (auto w : words) t.insert(w);
  return t;
}

bool naive_is_prefix(const std::set<std::string>& words, std::string_view p) {
  return std::any_of(words.begin(), words.end(), [&](const std::string& w) { return w.starts_with(p); });
}

}  // namespace

TEST_CASE("insert and is_prefix") {
  auto t = make({"send_email", "send_sms"});
  CHECK(t.is_prefix("send_"));
  CHECK(t.is_prefix("send_email"));
  CHECK_FALSE(t.is_prefix("send_emails"));
  CHECK_FALSE(t.is_prefix("x"));
  CHECK(t.is_prefix(""));
  CHECK(t.contains("send_sms"));
  CHECK_FALSE(t.contains("send_"));
}

TEST_CASE("empty trie has no prefixes, not even the empty one") {
  Trie t;
  CHECK(t.empty());
  CHECK_FALSE(t.is_prefix(""));
  CHECK(t.search("").empty());
  CHECK(t.get_all_prefixes().empty());
}

TEST_CASE("empty word is rejected; duplicate insert is idempotent") {
  Trie t;
  CHECK(error_of([&] { t.insert(""); }) == ErrorCode::EmptyWord);
  t.insert("abc");
  t.insert("abc");
  CHECK(t.word_count() == 1);
  CHECK(t.get_all_prefixes() == std::vector<std::string>{"a", "ab", "abc"});
}

TEST_CASE("search returns completions in lexicographic order") {
  auto t = make({"US", "UK", "UA", "CA"});
  CHECK(t.search("U") == std::vector<std::string>{"UA", "UK", "US"});
  CHECK(t.search("U", false) == std::vector<std::string>{"A", "K", "S"});
  CHECK(t.search("Z").empty());
  CHECK(t.search("") == std::vector<std::string>{"CA", "UA", "UK", "US"});
}

TEST_CASE("get_all_prefixes is a pre-order listing of distinct prefixes") {
  auto t = make({"ab", "ac", "b"});
  CHECK(t.get_all_prefixes() == std::vector<std::string>{"a", "ab", "ac", "b"});
}

TEST_CASE("word that is a prefix of another") {
  auto t = make({"get", "get_weather"});
  CHECK(t.contains("get"));
  CHECK(t.search("get") == std::vector<std::string>{"get", "get_weather"});
  auto c = t.root_cursor();
  for (char ch : std::string("get")) CHECK(c.advance(ch));
  CHECK(c.at_word());
  CHECK(c.has_children());
  CHECK_FALSE(c.advance('x'));
  CHECK_FALSE(c.valid());
  CHECK_FALSE(c.advance('_'));
}

TEST_CASE("probe visits at most |prefix| + 1 nodes") {
  auto t = make({"alpha", "alps", "beta"});
  CHECK(t.probe("alp").nodes_visited == 4);
  CHECK(t.probe("alp").found);
  auto miss = t.probe("alx");
  CHECK_FALSE(miss.found);
  CHECK(miss.nodes_visited <= 4);
  CHECK(t.depth() == 5);
}

TEST_CASE("PrefixSet membership") {
  std::vector<std::string> words{"send_emil", "no_relevant_function"};
  auto set = PrefixSet::build(words);
  CHECK(set.contains_prefix("send_e"));
  CHECK(set.contains_prefix("send_emil"));
  CHECK_FALSE(set.contains_prefix("send_ema"));
  CHECK_FALSE(set.contains_prefix(""));
  CHECK(set.contains_word("send_emil"));
  CHECK_FALSE(set.contains_word("send_"));
  std::vector<std::string> bad{"ok", ""};
  CHECK(error_of([&] { PrefixSet::build(bad); }) == ErrorCode::EmptyWord);
}

TEST_CASE("property: trie, prefix set and list filter agree") {
  std::mt19937_64 rng(7);
  for (int set_index = 0; set_index < 30; ++set_index) {
    std::set<std::string> words;
    for (int i = 0; i < 20; ++i) words.insert(random_word(rng, "abc_", 6));
    Trie t;
    for (const auto& w : words) t.insert(w);
    std::vector<std::string> list(words.begin(), words.end());
    auto ps = PrefixSet::build(list);
    for (int q = 0; q < 200; ++q) {
      auto query = random_word(rng, "abc_", 7);
      bool expected = naive_is_prefix(words, query);
      CHECK(t.is_prefix(query) == expected);
      CHECK(ps.contains_prefix(query) == expected);
      CHECK(t.contains(query) == words.count(query) > 0);
      auto probe = t.probe(query);
      CHECK(probe.nodes_visited <= query.size() + 1);
      std::vector<std::string> completions;
      for (const auto& w : words)
        if (w.starts_with(query)) completions.push_back(w);
      CHECK(t.search(query) == completions);
    }
  }
}
