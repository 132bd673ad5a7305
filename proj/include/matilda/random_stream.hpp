#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace matilda {

// Source of the random decisions taken by the transformations. Tests inject
// scripted implementations; production code uses SeededStream.
class RandomStream {
 public:
  virtual ~RandomStream() = default;

  // Uniform integer in [0, n). n must be positive.
  virtual std::size_t below(std::size_t n) = 0;

  // k distinct indices from [0, n), in draw order. Requires k <= n.
  virtual std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k);
};

// xoshiro256** with Lemire's bounded draws. Uses only fixed-width integer
// arithmetic, so a given state yields the same sequence on every platform.
class SeededStream final : public RandomStream {
 public:
  explicit SeededStream(std::array<std::uint64_t, 4> state);
  // Convenience seeding through splitmix64.
  explicit SeededStream(std::uint64_t seed);

  std::uint64_t next();
  std::size_t below(std::size_t n) override;

 private:
  std::array<std::uint64_t, 4> s_;
};

// Bijective 64-bit finalizer (splitmix64 output function).
std::uint64_t mix64(std::uint64_t x);

}  // namespace matilda
