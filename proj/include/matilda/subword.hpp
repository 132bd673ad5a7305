#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "matilda/corpus_io.hpp"

namespace matilda {

// Marks the last symbol of a word inside merge tables.
inline constexpr std::string_view kEndOfWord = "</w>";
inline constexpr std::string_view kDefaultSeparator = "@@";

struct Merge {
  std::string left;
  std::string right;

  auto operator<=>(const Merge&) const = default;
};

struct MergeTable {
  std::vector<Merge> merges;  // priority order, earlier applies first
  std::string separator{kDefaultSeparator};

  bool operator==(const MergeTable&) const = default;
};

// Atomic symbols that are never split or learned from: "UNK", every
// "<mtl:...>" task token, plus any extra tokens registered by the caller.
class ReservedSymbols {
 public:
  ReservedSymbols() = default;
  explicit ReservedSymbols(std::unordered_set<std::string> extra) : extra_(std::move(extra)) {}

  bool contains(std::string_view token) const;
  void add(std::string token) { extra_.insert(std::move(token)); }

 private:
  std::unordered_set<std::string> extra_;
};

// Learns up to `num_merges` merges by repeatedly merging the most frequent
// adjacent symbol pair inside words. Ties go to the lexicographically
// smallest (left, right). Stops early once no pair occurs at least twice.
// Throws DataError if the corpus has no (non-reserved) token.
MergeTable learn_bpe(std::span<const TokenSeq> lines, std::size_t num_merges,
                     const ReservedSymbols& reserved = {});

// Applies a merge table to whole sentences. Immutable after construction and
// safe to share between threads.
class BpeEncoder {
 public:
  explicit BpeEncoder(MergeTable table, ReservedSymbols reserved = {});

  TokenSeq apply(std::span<const std::string> seq) const;

  // Subwords of one word, separator suffixes included.
  std::vector<std::string> segment(std::string_view word) const;

  const MergeTable& table() const { return table_; }
  const ReservedSymbols& reserved() const { return reserved_; }

 private:
  struct PairHash {
    std::size_t operator()(const std::pair<std::string, std::string>& p) const;
  };

  MergeTable table_;
  ReservedSymbols reserved_;
  std::unordered_map<std::pair<std::string, std::string>, std::size_t, PairHash> rank_;
};

TokenSeq apply_bpe(std::span<const std::string> seq, const MergeTable& table);

// Glues every maximal run of separator-suffixed subwords to the following
// plain subword. Throws DataError on a dangling continuation at the end.
TokenSeq undo_bpe(std::span<const std::string> seq,
                  std::string_view separator = kDefaultSeparator);

// "LEFT RIGHT" per line, priority order.
void write_merge_table(std::ostream& out, const MergeTable& table);
MergeTable read_merge_table(const std::filesystem::path& path);
MergeTable read_merge_table(std::istream& in);

}  // namespace matilda
