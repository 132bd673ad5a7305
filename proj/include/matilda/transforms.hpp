#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "matilda/alignment.hpp"
#include "matilda/corpus_io.hpp"
#include "matilda/random_stream.hpp"

namespace matilda {

// Which task produced a sample. The numeric values are part of the stream
// derivation key and must stay stable.
enum class Task : std::uint8_t {
  original = 0,
  swap = 1,
  unk = 2,
  source = 3,
  reverse = 4,
  mono = 5,
  replace = 6,
};

inline constexpr Task kAllTransforms[] = {Task::swap,    Task::unk,  Task::source,
                                          Task::reverse, Task::mono, Task::replace};

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);

// True for the transformations controlled by alpha.
bool uses_alpha(Task task);
// True for the transformations that consume random draws.
bool is_random(Task task);
bool needs_alignment(Task task);

inline constexpr std::string_view kUnkToken = "UNK";

// Exact loss weight num/den.
struct Rational {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational operator+(const Rational& other) const;
  bool operator==(const Rational& other) const;
};

struct AugmentedSample {
  Task task = Task::original;
  TokenSeq src;      // without task token
  TokenSeq tgt_ctx;  // decoder input context
  TokenSeq tgt_lbl;  // expected output
  Rational weight;
  std::size_t pair_id = 0;
  std::uint64_t epoch = 0;
  Origin origin = Origin::parallel;
  bool bt_tagged = false;

  bool operator==(const AugmentedSample&) const = default;
};

// floor(alpha * m), robust to the representation error of decimal alphas.
std::size_t affected_count(double alpha, std::size_t m);

AugmentedSample original_sample(const ParallelPair& pair);

// floor(floor(alpha*m)/2) disjoint swaps; the swapped positions are one
// sample_distinct draw read as consecutive pairs.
AugmentedSample t_swap(const ParallelPair& pair, double alpha, RandomStream& rng);

// floor(alpha*m) distinct context positions become UNK; labels stay intact.
AugmentedSample t_unk(const ParallelPair& pair, double alpha, RandomStream& rng);

AugmentedSample t_source(const ParallelPair& pair);
AugmentedSample t_reverse(const ParallelPair& pair);

// Stable sort of target tokens by aligned source index. Unaligned targets
// inherit the key of the nearest preceding aligned target (-1 at the start).
AugmentedSample t_mono(const ParallelPair& pair, const AlignmentSet& a_st);

// min(floor(alpha*m), |links|) one-to-one links are drawn without
// replacement; each draws a lexicon entry uniformly (with replacement across
// links) and both linked words are overwritten by that entry.
AugmentedSample t_replace(const ParallelPair& pair, const AlignmentSet& one_to_one,
                          const BilingualLexicon& lexicon, double alpha, RandomStream& rng);

}  // namespace matilda
