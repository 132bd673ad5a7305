#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "matilda/corpus_io.hpp"
#include "matilda/errors.hpp"

using namespace matilda;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("matilda_corpus_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

ParallelPair pair_of(std::size_t id, std::size_t src_len, std::size_t tgt_len) {
  ParallelPair p{id, TokenSeq(src_len, "x"), TokenSeq(tgt_len, "y"), Origin::parallel};
  return p;
}

}  // namespace

TEST_CASE("read_parallel splits each line pair") {
  const auto src = write_temp("a.src", "a b\n");
  const auto tgt = write_temp("a.tgt", "c\n");
  const auto pairs = read_parallel(src, tgt);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].pair_id == 0);
  CHECK(pairs[0].src == TokenSeq{"a", "b"});
  CHECK(pairs[0].tgt == TokenSeq{"c"});
  CHECK(pairs[0].origin == Origin::parallel);
}

TEST_CASE("read_parallel rejects a line-count mismatch naming both counts") {
  const auto src = write_temp("b.src", "a\nb\nc\n");
  const auto tgt = write_temp("b.tgt", "a\nb\n");
  try {
    read_parallel(src, tgt);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("3 lines") != std::string::npos);
    CHECK(what.find("2") != std::string::npos);
  }
}

TEST_CASE("read_parallel rejects an empty line and names it") {
  const auto src = write_temp("c.src", "x\n");
  const auto tgt = write_temp("c.tgt", "\n");
  try {
    read_parallel(src, tgt);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("empty line 0") != std::string::npos);
  }
}

TEST_CASE("read_parallel rejects invalid UTF-8") {
  const std::vector<std::string> src{"ok", "bad\xff"};
  const std::vector<std::string> tgt{"ok", "fine"};
  CHECK_THROWS_AS(read_parallel(src, tgt), DataError);
}

TEST_CASE("split_tokens collapses runs of whitespace") {
  CHECK(split_tokens("  a \t b  c ") == TokenSeq{"a", "b", "c"});
  CHECK(split_tokens("   ").empty());
}

TEST_CASE("filter_pairs applies inclusive length bounds on both sides") {
  const std::vector<ParallelPair> pairs{pair_of(0, 4, 6), pair_of(1, 5, 5), pair_of(2, 6, 101),
                                        pair_of(3, 100, 100)};
  const auto kept = filter_pairs(pairs);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].pair_id == 1);
  CHECK(kept[1].pair_id == 3);
  CHECK(filter_pairs(pairs, 200, 300).empty());
  CHECK_THROWS_AS(filter_pairs(pairs, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(filter_pairs(pairs, 10, 5), std::invalid_argument);
}

TEST_CASE("filter_pairs is idempotent") {
  std::mt19937_64 rng(11);
  std::vector<ParallelPair> pairs;
  for (std::size_t i = 0; i < 300; ++i) {
    auto p = gen::distinct_pair(rng, i, 1, 12);
    pairs.push_back(std::move(p));
  }
  for (auto [lo, hi] : {std::pair{1, 12}, {5, 8}, {3, 3}}) {
    const auto once = filter_pairs(pairs, lo, hi);
    CHECK(filter_pairs(once, lo, hi) == once);
  }
}

TEST_CASE("read then re-serialize gives a whitespace-normalized copy") {
  std::mt19937_64 rng(5);
  std::ostringstream src_raw, tgt_raw, src_norm, tgt_norm;
  for (int i = 0; i < 50; ++i) {
    const auto s = gen::sentence(rng, 1, 8);
    const auto t = gen::sentence(rng, 1, 8);
    for (const auto& w : s) src_raw << "  " << w << "\t";
    src_raw << "\n";
    for (const auto& w : t) tgt_raw << w << "   ";
    tgt_raw << "\r\n";
    src_norm << join_tokens(s) << "\n";
    tgt_norm << join_tokens(t) << "\n";
  }
  const auto pairs = read_parallel(write_temp("n.src", src_raw.str()), write_temp("n.tgt", tgt_raw.str()));
  std::ostringstream src_out, tgt_out;
  write_side(src_out, pairs, true);
  write_side(tgt_out, pairs, false);
  CHECK(src_out.str() == src_norm.str());
  CHECK(tgt_out.str() == tgt_norm.str());
}
