#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matilda/corpus_io.hpp"

namespace matilda {

struct Link {
  std::size_t src = 0;
  std::size_t tgt = 0;

  auto operator<=>(const Link&) const = default;
};

// Word alignment of one sentence pair. Links are kept sorted and unique and
// always lie inside [0, src_len) x [0, tgt_len).
class AlignmentSet {
 public:
  AlignmentSet() = default;
  // Throws DataError on an out-of-range link; duplicates are collapsed.
  AlignmentSet(std::size_t src_len, std::size_t tgt_len, std::vector<Link> links = {});

  std::size_t src_len() const { return src_len_; }
  std::size_t tgt_len() const { return tgt_len_; }
  const std::vector<Link>& links() const { return links_; }
  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }

  // Swaps the roles of source and target.
  AlignmentSet transposed() const;

  bool operator==(const AlignmentSet&) const = default;

 private:
  std::size_t src_len_ = 0;
  std::size_t tgt_len_ = 0;
  std::vector<Link> links_;
};

// Alignments keyed by pair_id.
using AlignmentTable = std::map<std::size_t, AlignmentSet>;

// Parses space-separated "i-j" items, 0-based. Throws DataError naming the
// offending item.
AlignmentSet parse_pharaoh(std::string_view line, std::size_t src_len, std::size_t tgt_len);

std::string format_pharaoh(const AlignmentSet& alignment);

// Intersection of a source-to-target alignment with a target-to-source one
// that was already transposed into (s, t) orientation, pruned to strict
// one-to-one: any index still linked more than once loses all its links.
AlignmentSet intersect(const AlignmentSet& a_st, const AlignmentSet& a_ts);

// Partial map target index -> source index. Throws DataError if some target
// index carries more than one link.
std::vector<std::optional<std::size_t>> target_to_source(const AlignmentSet& a_st);

struct LexiconEntry {
  std::string source;
  std::string target;
  std::size_t count = 0;

  bool operator==(const LexiconEntry&) const = default;
};

// Source word -> most frequently aligned target word.
class BilingualLexicon {
 public:
  BilingualLexicon() = default;
  // Entries must have distinct sources and positive counts.
  explicit BilingualLexicon(std::vector<LexiconEntry> entries);

  // Sorted by source word (byte order); this is the indexable entry list.
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  const LexiconEntry* find(std::string_view source) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<LexiconEntry> entries_;
};

// Counts (source word, target word) link occurrences over one-to-one
// alignments and keeps the argmax target per source word; count ties go to
// the lexicographically smallest target. Throws DataError for an alignment
// whose pair_id is absent from `pairs` or whose lengths disagree with it.
BilingualLexicon build_lexicon(std::span<const ParallelPair> pairs,
                               const AlignmentTable& one_to_one);

// TSV "source<TAB>target<TAB>count".
void write_lexicon(std::ostream& out, const BilingualLexicon& lexicon);
BilingualLexicon read_lexicon(const std::filesystem::path& path);
BilingualLexicon read_lexicon(std::istream& in);

// Reads a Pharaoh file that is line-parallel with the unfiltered corpus:
// line k holds the alignment of pair_id k. Only ids present in `pairs` are
// parsed. With `target_to_source_file`, items are "t-s" and the result is
// returned in (s, t) orientation.
AlignmentTable read_alignment_file(const std::filesystem::path& path,
                                   std::span<const ParallelPair> pairs,
                                   bool target_to_source_file = false);

}  // namespace matilda
