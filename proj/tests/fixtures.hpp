#pragma once

// Shared fixtures: the German-English reference pair and a scripted random
// stream that replays predetermined draws.

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

#include "matilda/alignment.hpp"
#include "matilda/corpus_io.hpp"
#include "matilda/random_stream.hpp"

namespace fixture {

inline matilda::ParallelPair reference_pair() {
  return {0,
          {"Es", "gibt", "andere", "Möglichkeiten", ",", "die", "Pyramide", "zu", "durchbrechen", "."},
          {"There", "'s", "other", "ways", "of", "breaking", "the", "pyramid", "."},
          matilda::Origin::parallel};
}

// Source-to-target links; "," stays unaligned.
inline matilda::AlignmentSet reference_alignment() {
  return matilda::AlignmentSet(
      10, 9, {{0, 1}, {1, 0}, {2, 2}, {3, 3}, {5, 6}, {6, 7}, {7, 4}, {8, 5}, {9, 8}});
}

inline matilda::BilingualLexicon reference_lexicon() {
  return matilda::BilingualLexicon({{"aufzurüsten", "arming", 1},
                                    {"kalt", "cold", 1},
                                    {"Schach", "chess", 1},
                                    {"Spezialwissen", "specialties", 1}});
}

// Replays scripted answers. sample_distinct returns the next scripted draw
// verbatim (checking n and k); below returns the next scripted integer.
class ScriptedStream final : public matilda::RandomStream {
 public:
  ScriptedStream(std::vector<std::vector<std::size_t>> samples, std::vector<std::size_t> ints)
      : samples_(samples.begin(), samples.end()), ints_(ints.begin(), ints.end()) {}

  std::size_t below(std::size_t n) override {
    if (ints_.empty()) throw std::logic_error("script exhausted");
    const auto v = ints_.front();
    ints_.pop_front();
    if (v >= n) throw std::logic_error("scripted value out of range");
    return v;
  }

  std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k) override {
    if (samples_.empty()) throw std::logic_error("script exhausted");
    auto v = samples_.front();
    samples_.pop_front();
    if (v.size() != k) throw std::logic_error("scripted sample has wrong size");
    for (auto x : v)
      if (x >= n) throw std::logic_error("scripted index out of range");
    return v;
  }

  bool exhausted() const { return samples_.empty() && ints_.empty(); }

 private:
  std::deque<std::vector<std::size_t>> samples_;
  std::deque<std::size_t> ints_;
};

}  // namespace fixture
