#include "matilda/corpus_io.hpp"

#include <ostream>
#include <stdexcept>

#include "matilda/errors.hpp"
#include "matilda/io.hpp"
#include "matilda/unicode.hpp"

namespace matilda {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

std::string_view origin_name(Origin origin) {
  return origin == Origin::parallel ? "parallel" : "bt";
}

TokenSeq split_tokens(std::string_view line) {
  TokenSeq tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<ParallelPair> read_parallel(std::span<const std::string> src_lines,
                                        std::span<const std::string> tgt_lines,
                                        Origin origin, std::string_view src_name,
                                        std::string_view tgt_name) {
  if (src_lines.size() != tgt_lines.size()) {
    throw DataError("line-count mismatch: " + std::string(src_name) + " has " +
                    std::to_string(src_lines.size()) + " lines, " + std::string(tgt_name) +
                    " has " + std::to_string(tgt_lines.size()));
  }
  std::vector<ParallelPair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t k = 0; k < src_lines.size(); ++k) {
    ParallelPair pair{k, split_tokens(src_lines[k]), split_tokens(tgt_lines[k]), origin};
    auto check = [k](const std::string& line, const TokenSeq& tokens, std::string_view name) {
      if (tokens.empty())
        throw DataError("empty line " + std::to_string(k) + " in " + std::string(name));
      if (!unicode::is_valid_utf8(line))
        throw DataError("invalid UTF-8 at line " + std::to_string(k) + " in " + std::string(name));
    };
    check(src_lines[k], pair.src, src_name);
    check(tgt_lines[k], pair.tgt, tgt_name);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<ParallelPair> read_parallel(const std::filesystem::path& src_path,
                                        const std::filesystem::path& tgt_path,
                                        Origin origin) {
  const auto src_lines = read_lines(src_path);
  const auto tgt_lines = read_lines(tgt_path);
  return read_parallel(src_lines, tgt_lines, origin, src_path.string(), tgt_path.string());
}

std::vector<ParallelPair> filter_pairs(std::span<const ParallelPair> pairs,
                                       std::size_t min_tokens, std::size_t max_tokens) {
  if (min_tokens < 1 || max_tokens < min_tokens)
    throw std::invalid_argument("filter bounds require 1 <= min_tokens <= max_tokens");
  auto in_range = [&](const TokenSeq& side) {
    return side.size() >= min_tokens && side.size() <= max_tokens;
  };
  std::vector<ParallelPair> kept;
  for (const auto& pair : pairs)
    if (in_range(pair.src) && in_range(pair.tgt)) kept.push_back(pair);
  return kept;
}

void write_side(std::ostream& out, std::span<const ParallelPair> pairs, bool source_side) {
  for (const auto& pair : pairs) out << join_tokens(source_side ? pair.src : pair.tgt) << '\n';
}

}  // namespace matilda
