#include "callmask/trie.hpp"

#include <algorithm>

#include "callmask/error.hpp"

namespace callmask {

bool Trie::Cursor::advance(char ch) {
  if (node_ == nullptr) return false;
  auto it = node_->children.find(static_cast<unsigned char>(ch));
  node_ = it == node_->children.end() ? nullptr : it->second.get();
  return node_ != nullptr;
}

Trie::Trie() : root_(std::make_unique<Node>()) {}

void Trie::insert(std::string_view word) {
  if (word.empty()) throw Error(ErrorCode::EmptyWord, "cannot insert an empty word");
  Node* node = root_.get();
  for (char ch : word) {
    auto& child = node->children[static_cast<unsigned char>(ch)];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
  }
  if (!node->end_of_word) {
    node->end_of_word = true;
    ++word_count_;
    depth_ = std::max(depth_, word.size());
  }
}

Trie::Probe Trie::probe(std::string_view prefix) const {
  Probe result;
  const Node* node = root_.get();
  result.nodes_visited = 1;
  if (word_count_ == 0) return result;
  for (char ch : prefix) {
    auto it = node->children.find(static_cast<unsigned char>(ch));
    if (it == node->children.end()) return result;
    node = it->second.get();
    ++result.nodes_visited;
  }
  result.found = true;
  return result;
}

bool Trie::is_prefix(std::string_view prefix) const { return probe(prefix).found; }

bool Trie::contains(std::string_view word) const {
  Cursor cursor = root_cursor();
  for (char ch : word) {
    if (!cursor.advance(ch)) return false;
  }
  return cursor.at_word();
}

namespace {

void collect_words(const Trie::Node& node, std::string& current, std::vector<std::string>& out) {
  if (node.end_of_word) out.push_back(current);
  for (const auto& [ch, child] : node.children) {
    current.push_back(static_cast<char>(ch));
    collect_words(*child, current, out);
    current.pop_back();
  }
}

void collect_prefixes(const Trie::Node& node, std::string& current, std::vector<std::string>& out) {
  for (const auto& [ch, child] : node.children) {
    current.push_back(static_cast<char>(ch));
    out.push_back(current);
    collect_prefixes(*child, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<std::string> Trie::search(std::string_view prefix, bool include_prefix) const {
  const Node* node = root_.get();
  for (char ch : prefix) {
    auto it = node->children.find(static_cast<unsigned char>(ch));
    if (it == node->children.end()) return {};
    node = it->second.get();
  }
  std::vector<std::string> words;
  std::string current = include_prefix ? std::string(prefix) : std::string();
  collect_words(*node, current, words);
  return words;
}

std::vector<std::string> Trie::get_all_prefixes() const {
  std::vector<std::string> prefixes;
  std::string current;
  collect_prefixes(*root_, current, prefixes);
  return prefixes;
}

PrefixSet PrefixSet::build(std::span<const std::string> words) {
  PrefixSet set;
  for (const auto& word : words) {
    if (word.empty()) throw Error(ErrorCode::EmptyWord, "prefix set words must be non-empty");
    for (std::size_t len = 1; len <= word.size(); ++len) set.prefixes_.emplace(word.substr(0, len));
    set.words_.insert(word);
  }
  return set;
}

bool PrefixSet::contains_prefix(std::string_view prefix) const {
  return prefixes_.find(prefix) != prefixes_.end();
}

bool PrefixSet::contains_word(std::string_view word) const {
  return words_.find(word) != words_.end();
}

}  // namespace callmask
