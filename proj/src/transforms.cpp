#include "matilda/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "matilda/errors.hpp"

namespace matilda {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0, 1]");
}

AugmentedSample with_target(const ParallelPair& pair, Task task, TokenSeq tgt) {
  AugmentedSample sample;
  sample.task = task;
  sample.src = pair.src;
  sample.tgt_ctx = tgt;
  sample.tgt_lbl = std::move(tgt);
  sample.pair_id = pair.pair_id;
  sample.origin = pair.origin;
  return sample;
}

}  // namespace

std::string_view task_name(Task task) {
  switch (task) {
    case Task::original: return "orig";
    case Task::swap: return "swap";
    case Task::unk: return "unk";
    case Task::source: return "source";
    case Task::reverse: return "reverse";
    case Task::mono: return "mono";
    case Task::replace: return "replace";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  for (auto task : {Task::original, Task::swap, Task::unk, Task::source, Task::reverse,
                    Task::mono, Task::replace})
    if (task_name(task) == name) return task;
  return std::nullopt;
}

bool uses_alpha(Task task) {
  return task == Task::swap || task == Task::unk || task == Task::replace;
}

bool is_random(Task task) { return uses_alpha(task); }

bool needs_alignment(Task task) { return task == Task::mono || task == Task::replace; }

Rational Rational::operator+(const Rational& other) const {
  const auto n = num * other.den + other.num * den;
  const auto d = den * other.den;
  const auto g = std::gcd(n, d);
  return {n / g, d / g};
}

bool Rational::operator==(const Rational& other) const {
  return num * other.den == other.num * den;
}

std::size_t affected_count(double alpha, std::size_t m) {
  check_alpha(alpha);
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(m) + 1e-9));
}

AugmentedSample original_sample(const ParallelPair& pair) {
  return with_target(pair, Task::original, pair.tgt);
}

AugmentedSample t_swap(const ParallelPair& pair, double alpha, RandomStream& rng) {
  const std::size_t m = pair.tgt.size();
  const std::size_t swaps = affected_count(alpha, m) / 2;
  TokenSeq tgt = pair.tgt;
  if (swaps > 0) {
    const auto positions = rng.sample_distinct(m, 2 * swaps);
    for (std::size_t i = 0; i < swaps; ++i)
      std::swap(tgt[positions[2 * i]], tgt[positions[2 * i + 1]]);
  }
  return with_target(pair, Task::swap, std::move(tgt));
}

AugmentedSample t_unk(const ParallelPair& pair, double alpha, RandomStream& rng) {
  const std::size_t m = pair.tgt.size();
  const std::size_t count = affected_count(alpha, m);
  auto sample = with_target(pair, Task::unk, pair.tgt);
  if (count > 0)
    for (auto pos : rng.sample_distinct(m, count)) sample.tgt_ctx[pos] = kUnkToken;
  return sample;
}

AugmentedSample t_source(const ParallelPair& pair) {
  return with_target(pair, Task::source, pair.src);
}

AugmentedSample t_reverse(const ParallelPair& pair) {
  return with_target(pair, Task::reverse, TokenSeq(pair.tgt.rbegin(), pair.tgt.rend()));
}

AugmentedSample t_mono(const ParallelPair& pair, const AlignmentSet& a_st) {
  if (a_st.src_len() != pair.src.size() || a_st.tgt_len() != pair.tgt.size())
    throw DataError("alignment lengths disagree with pair_id " + std::to_string(pair.pair_id));
  const auto aligned = target_to_source(a_st);
  const std::size_t m = pair.tgt.size();

  std::vector<long long> key(m);
  long long carry = -1;
  for (std::size_t t = 0; t < m; ++t) {
    if (aligned[t]) carry = static_cast<long long>(*aligned[t]);
    key[t] = carry;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  TokenSeq tgt;
  tgt.reserve(m);
  for (auto t : order) tgt.push_back(pair.tgt[t]);
  return with_target(pair, Task::mono, std::move(tgt));
}

AugmentedSample t_replace(const ParallelPair& pair, const AlignmentSet& one_to_one,
                          const BilingualLexicon& lexicon, double alpha, RandomStream& rng) {
  if (one_to_one.src_len() != pair.src.size() || one_to_one.tgt_len() != pair.tgt.size())
    throw DataError("alignment lengths disagree with pair_id " + std::to_string(pair.pair_id));
  const std::size_t n = std::min(affected_count(alpha, pair.tgt.size()), one_to_one.size());
  auto sample = with_target(pair, Task::replace, pair.tgt);
  if (n == 0) return sample;
  if (lexicon.empty())
    throw DataError("replace needs a non-empty lexicon (pair_id " +
                    std::to_string(pair.pair_id) + ")");

  const auto& links = one_to_one.links();
  const auto& entries = lexicon.entries();
  for (auto choice : rng.sample_distinct(links.size(), n)) {
    const auto& entry = entries[rng.below(entries.size())];
    const auto& link = links[choice];
    sample.src[link.src] = entry.source;
    sample.tgt_ctx[link.tgt] = entry.target;
    sample.tgt_lbl[link.tgt] = entry.target;
  }
  return sample;
}

}  // namespace matilda
