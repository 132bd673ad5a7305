#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace matilda {

// Ordered list of non-empty tokens without internal whitespace.
using TokenSeq = std::vector<std::string>;

enum class Origin { parallel, back_translated };

std::string_view origin_name(Origin origin);

struct ParallelPair {
  std::size_t pair_id = 0;  // 0-based line number in the unfiltered files
  TokenSeq src;
  TokenSeq tgt;
  Origin origin = Origin::parallel;

  bool operator==(const ParallelPair&) const = default;
};

inline constexpr std::size_t kDefaultMinTokens = 5;
inline constexpr std::size_t kDefaultMaxTokens = 100;

// Splits on runs of ASCII whitespace.
TokenSeq split_tokens(std::string_view line);

// Joins with single spaces.
std::string join_tokens(std::span<const std::string> tokens);

// Line k of each side becomes the pair with pair_id k. Throws DataError on a
// line-count mismatch, an empty line, or invalid UTF-8.
std::vector<ParallelPair> read_parallel(const std::filesystem::path& src_path,
                                        const std::filesystem::path& tgt_path,
                                        Origin origin = Origin::parallel);

std::vector<ParallelPair> read_parallel(std::span<const std::string> src_lines,
                                        std::span<const std::string> tgt_lines,
                                        Origin origin = Origin::parallel,
                                        std::string_view src_name = "source",
                                        std::string_view tgt_name = "target");

// Keeps a pair iff both sides have length in [min_tokens, max_tokens].
// Order and pair ids are preserved.
std::vector<ParallelPair> filter_pairs(std::span<const ParallelPair> pairs,
                                       std::size_t min_tokens = kDefaultMinTokens,
                                       std::size_t max_tokens = kDefaultMaxTokens);

void write_side(std::ostream& out, std::span<const ParallelPair> pairs, bool source_side);

}  // namespace matilda
