#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace callmask {

/// Character trie over enumerable values (function names, quoted enum
/// members). Children are kept in byte order, so every listing it produces
/// is lexicographic and stable across runs.
///
/// Building is single-writer. Once built, all const members are safe to call
/// from any number of threads.
class Trie {
 public:
  struct Node {
    std::map<unsigned char, std::unique_ptr<Node>> children;
    bool end_of_word = false;
  };

  /// Result of walking a prefix, with the number of nodes touched (root included).
  struct Probe {
    bool found = false;
    std::size_t nodes_visited = 0;
  };

  /// Lightweight position inside a trie; invalid once it falls off the tree.
  class Cursor {
   public:
    Cursor() = default;
    explicit Cursor(const Node* node) : node_(node) {}

    bool advance(char ch);
    bool valid() const { return node_ != nullptr; }
    bool at_word() const { return node_ != nullptr && node_->end_of_word; }
    bool has_children() const { return node_ != nullptr && !node_->children.empty(); }

   private:
    const Node* node_ = nullptr;
  };

  Trie();
  Trie(const Trie&) = delete;
  Trie& operator=(const Trie&) = delete;
  Trie(Trie&&) noexcept = default;
  Trie& operator=(Trie&&) noexcept = default;

  /// Throws Error(EmptyWord) on "". Inserting an existing word is a no-op.
  void insert(std::string_view word);

  /// True iff `prefix` begins some inserted word. The empty prefix is a
  /// prefix of everything, except in an empty trie where it is false.
  bool is_prefix(std::string_view prefix) const;
  Probe probe(std::string_view prefix) const;

  bool contains(std::string_view word) const;

  /// Inserted words starting with `prefix`, in lexicographic order. With
  /// include_prefix == false the prefix is stripped from every result.
  std::vector<std::string> search(std::string_view prefix, bool include_prefix = true) const;

  /// Every distinct non-empty prefix of every inserted word (pre-order DFS).
  std::vector<std::string> get_all_prefixes() const;

  Cursor root_cursor() const { return Cursor(root_.get()); }

  bool empty() const { return word_count_ == 0; }
  std::size_t word_count() const { return word_count_; }
  /// Length of the longest inserted word.
  std::size_t depth() const { return depth_; }

 private:
  std::unique_ptr<Node> root_;
  std::size_t word_count_ = 0;
  std::size_t depth_ = 0;
};

/// Hash table of every prefix of a word set: constant-time prefix membership.
class PrefixSet {
 public:
  /// Throws Error(EmptyWord) if any word is empty.
  static PrefixSet build(std::span<const std::string> words);

  /// Same convention as Trie::is_prefix, except that "" is never a member.
  bool contains_prefix(std::string_view prefix) const;
  bool contains_word(std::string_view word) const;

  std::size_t prefix_count() const { return prefixes_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  using Set = std::unordered_set<std::string, Hash, std::equal_to<>>;

  Set prefixes_;
  Set words_;
};

}  // namespace callmask
