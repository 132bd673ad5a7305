#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "matilda/analysis.hpp"
#include "matilda/errors.hpp"
#include "oracles.hpp"

using namespace matilda;
using namespace matilda::analysis;

namespace {

PerturbationDump dump_of(std::vector<std::vector<double>> p_src,
                         std::vector<std::vector<double>> p_tgt, std::size_t id = 0) {
  PerturbationDump d;
  d.sentence_id = id;
  d.tokens = TokenSeq(p_src.size(), "w");
  d.p_src = std::move(p_src);
  d.p_tgt = std::move(p_tgt);
  return d;
}

}  // namespace

TEST_CASE("contribution_variance examples") {
  const std::vector<double> a{0.4, 0.6}, b{0.0, 1.0}, c{0.3, 0.3, 0.3};
  CHECK(contribution_variance(a) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(contribution_variance(b) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(contribution_variance(c) == 0.0);
  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(contribution_variance(one), std::invalid_argument);
}

TEST_CASE("contribution_variance agrees with the two-pass formula") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> xs(2 + rng() % 80);
    for (auto& x : xs) x = p(rng);
    CHECK(std::fabs(contribution_variance(xs) - oracle::two_pass_variance(xs)) <= 1e-12);
    CHECK(contribution_variance(xs) >= 0.0);
    CHECK(contribution_variance(xs) <= 0.25 + 1e-15);
  }
}

TEST_CASE("relative_source_contribution") {
  CHECK(*relative_source_contribution(0.01, 0.03) == doctest::Approx(0.25));
  CHECK(*relative_source_contribution(0.0, 0.02) == 0.0);
  CHECK(*relative_source_contribution(0.02, 0.0) == 1.0);
  CHECK_FALSE(relative_source_contribution(0.0, 0.0).has_value());
  CHECK_THROWS_AS(relative_source_contribution(-0.1, 0.2), std::invalid_argument);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.25);
  for (int i = 0; i < 1000; ++i) {
    const double s = u(rng), t = u(rng);
    const double a = *relative_source_contribution(s, t);
    const double b = *relative_source_contribution(t, s);
    CHECK(a + b == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("token and corpus relative source contribution") {
  // Token 0: var_src 0.01, var_tgt 0.03 -> 0.25. Token 1: both constant -> skipped.
  const auto d1 = dump_of({{0.4, 0.6}, {0.5, 0.5}}, {{0.2, 0.2 + 0.2 * std::sqrt(3.0)}, {0.5, 0.5}});
  const auto csr = token_csr(d1);
  REQUIRE(csr.size() == 2);
  CHECK(*csr[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK_FALSE(csr[1].has_value());

  std::vector<PerturbationDump> pair{
      dump_of({{0.0, 1.0}}, {{0.5 - 0.5 * std::sqrt(3.0 / 7.0), 0.5 + 0.5 * std::sqrt(3.0 / 7.0)}}),
      dump_of({{0.0, 1.0}}, {{0.5 - 0.5 * std::sqrt(1.0 / 3.0), 0.5 + 0.5 * std::sqrt(1.0 / 3.0)}})};
  // var_src 0.25; var_tgt 0.25*3/7 and 0.25/3 give 0.7 and 0.75.
  const auto ms = corpus_mean_csr(pair);
  CHECK(ms.mean == doctest::Approx(72.5).epsilon(1e-9));
  CHECK(ms.std == doctest::Approx(2.5).epsilon(1e-9));

  std::vector<PerturbationDump> skipped{dump_of({{0.5, 0.5}}, {{0.5, 0.5}})};
  CHECK_THROWS_AS(corpus_mean_csr(skipped), DataError);
}

TEST_CASE("corpus mean of 0.5 and 0.7 is 60 plus or minus 10 percent") {
  // var_src 0.25 each; var_tgt 0.25 and 0.25*3/7.
  std::vector<PerturbationDump> dumps{
      dump_of({{0.0, 1.0}, {0.0, 1.0}},
              {{0.0, 1.0}, {0.5 - 0.5 * std::sqrt(3.0 / 7.0), 0.5 + 0.5 * std::sqrt(3.0 / 7.0)}})};
  const auto ms = corpus_mean_csr(dumps);
  CHECK(ms.mean == doctest::Approx(60.0).epsilon(1e-9));
  CHECK(ms.std == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("dump validation") {
  CHECK_THROWS_AS(dump_of({{0.1}}, {{0.2}}).validate(), DataError);
  CHECK_THROWS_AS(dump_of({{0.1, 0.2}}, {{0.2, 1.5}}).validate(), DataError);
  CHECK_THROWS_AS(dump_of({{0.1, 0.2}}, {{0.2, 0.3, 0.4}}).validate(), DataError);
  auto bad = dump_of({{0.1, 0.2}}, {{0.2, 0.3}});
  bad.tokens.push_back("extra");
  CHECK_THROWS_AS(bad.validate(), DataError);
  CHECK_NOTHROW(dump_of({{0.1, 0.2}}, {{0.2, 0.3}}).validate());
}

TEST_CASE("position_points") {
  std::vector<PerturbationDump> dumps{
      dump_of({{0.0, 1.0}, {0.0, 1.0}, {0.5, 0.5}}, {{0.0, 1.0}, {0.5, 0.5}, {0.5, 0.5}}),
      dump_of({{0.0, 1.0}}, {{0.0, 1.0}})};
  const auto pts = position_points(dumps);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == 0.0);
  CHECK(pts[0].y == doctest::Approx(0.5));
  CHECK(pts[1].x == 0.5);
  CHECK(pts[1].y == 1.0);
}

TEST_CASE("fit_polynomial recovers exact polynomials") {
  std::vector<CurvePoint> flat, line;
  for (int i = 0; i <= 20; ++i) {
    flat.push_back({i / 20.0, 0.7});
    line.push_back({i / 20.0, i / 20.0});
  }
  const auto c0 = fit_polynomial(flat, 6);
  for (double x : {0.0, 0.3, 0.77, 1.0}) CHECK(c0(x) == doctest::Approx(0.7).epsilon(1e-9));
  const auto c1 = fit_polynomial(line, 6);
  for (double x : {0.0, 0.3, 0.77, 1.0}) CHECK(c1(x) == doctest::Approx(x).epsilon(1e-9));
  CHECK(c1.degree() == 6);
  CHECK(c1.sample_count == 21);
}

TEST_CASE("fit_polynomial matches the normal equations and is a least-squares minimum") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CurvePoint> pts;
    std::vector<std::pair<double, double>> raw;
    for (int i = 0; i < 60; ++i) {
      const double x = u(rng), y = u(rng);
      pts.push_back({x, y});
      raw.emplace_back(x, y);
    }
    const int degree = 3;
    const auto curve = fit_polynomial(pts, degree);
    const auto expected = oracle::normal_equations_fit(raw, degree);
    for (int k = 0; k <= degree; ++k)
      CHECK(curve.coefficients[static_cast<std::size_t>(k)] ==
            doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-6));
    const double rss = residual_sum_of_squares(curve, pts);
    for (std::size_t k = 0; k < curve.coefficients.size(); ++k)
      for (double eps : {-1e-4, 1e-4}) {
        auto moved = curve;
        moved.coefficients[k] += eps;
        CHECK(residual_sum_of_squares(moved, pts) > rss);
      }
  }
}

TEST_CASE("fit_polynomial errors") {
  std::vector<CurvePoint> few{{0.0, 1.0}, {1.0, 2.0}};
  CHECK_THROWS_AS(fit_polynomial(few, 2), DataError);
  std::vector<CurvePoint> same_x;
  for (int i = 0; i < 10; ++i) same_x.push_back({0.5, i * 0.1});
  try {
    fit_polynomial(same_x, 3);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("rank") != std::string::npos);
    CHECK(std::string(e.what()).find("condition") != std::string::npos);
  }
  std::vector<PerturbationDump> tiny{dump_of({{0.0, 1.0}, {0.0, 1.0}}, {{0.0, 1.0}, {0.0, 1.0}})};
  CHECK_THROWS_AS(position_curve(tiny, 1), DataError);
}

TEST_CASE("cosine") {
  const std::vector<double> x{1, 0}, y{0, 1}, z{-2, 0}, w{3, 0}, zero{0, 0};
  CHECK(cosine(x, w) == doctest::Approx(1.0));
  CHECK(cosine(x, y) == doctest::Approx(0.0));
  CHECK(cosine(x, z) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(cosine(x, zero), std::invalid_argument);
  const std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(cosine(x, three), std::invalid_argument);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> u(16), v(16), su(16);
    for (auto& e : u) e = g(rng);
    for (auto& e : v) e = g(rng);
    const double scale = 0.1 + std::fabs(g(rng)) * 10;
    for (std::size_t k = 0; k < 16; ++k) su[k] = u[k] * scale;
    CHECK(cosine(su, v) == doctest::Approx(cosine(u, v)).epsilon(1e-12));
    CHECK(std::fabs(cosine(u, v)) <= 1.0);
  }
}

TEST_CASE("kde") {
  const std::vector<double> at_zero{0.0};
  const std::vector<double> grid{0.0, 1.0, -1.0};
  const auto f = kde(at_zero, kDefaultBandwidth, grid);
  CHECK(f[0] == doctest::Approx(6.6490).epsilon(1e-4));
  CHECK(f[0] == doctest::Approx(oracle::gaussian_kernel_peak(0.06)).epsilon(1e-12));
  CHECK(f[1] < 1e-12);
  CHECK(f[1] == f[2]);

  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.2, 0.1);
  std::vector<double> samples(300);
  for (auto& s : samples) s = g(rng);
  const auto fine = linear_grid(-2.0, 2.0, 4001);
  const auto density = kde(samples, kDefaultBandwidth, fine);
  CHECK(oracle::trapezoid(fine, density) == doctest::Approx(1.0).epsilon(1e-6));
  for (double d : density) CHECK(d >= 0.0);

  std::vector<double> mirrored(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) mirrored[i] = -samples[i];
  const auto md = kde(mirrored, kDefaultBandwidth, fine);
  for (std::size_t i = 0; i < fine.size(); i += 97)
    CHECK(md[i] == doctest::Approx(density[fine.size() - 1 - i]).epsilon(1e-9));

  CHECK_THROWS_AS(kde({}, 0.06, grid), std::invalid_argument);
  CHECK_THROWS_AS(kde(at_zero, 0.0, grid), std::invalid_argument);
}

TEST_CASE("linear_grid") {
  const auto g = linear_grid(-1.0, 1.0, 401);
  REQUIRE(g.size() == 401);
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);
  CHECK(g[200] == doctest::Approx(0.0));
  CHECK_THROWS_AS(linear_grid(1.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("perturbation_sigma") {
  CHECK(perturbation_sigma(10.0, 0.01) == doctest::Approx(0.1));
  CHECK(perturbation_sigma(0.0, 0.01) == 0.0);
  CHECK_THROWS_AS(perturbation_sigma(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(perturbation_sigma(-1.0, 0.01), std::invalid_argument);
}

TEST_CASE("readers") {
  std::istringstream good(
      R"({"id":4,"tokens":["a","b"],"p_src":[[0.1,0.2],[0.3,0.4]],"p_tgt":[[0.5,0.6],[0.7,0.8]]})"
      "\n\n");
  const auto dumps = read_dumps(good);
  REQUIRE(dumps.size() == 1);
  CHECK(dumps[0].sentence_id == 4);
  CHECK(dumps[0].perturbations() == 2);
  CHECK(dumps[0].p_tgt[1][0] == 0.7);

  std::istringstream bad("{\"id\":1,\"tokens\":[\"a\"],\"p_src\":[[0.1,0.2]],\"p_tgt\":[[0.5,0.6]]}\n{oops\n");
  try {
    read_dumps(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).rfind("line 2", 0) == 0);
  }

  std::istringstream sims("{\"id\":0,\"hyp\":[1,0],\"ref\":[1,1]}\n");
  const auto records = read_similarities(sims);
  REQUIRE(records.size() == 1);
  CHECK(cosine(records[0].hyp_embedding, records[0].ref_embedding) ==
        doctest::Approx(std::sqrt(0.5)));
  std::istringstream zero("{\"id\":0,\"hyp\":[0,0],\"ref\":[1,1]}\n");
  CHECK_THROWS_AS(read_similarities(zero), DataError);
  std::istringstream mismatch("{\"id\":0,\"hyp\":[1],\"ref\":[1,1]}\n");
  CHECK_THROWS_AS(read_similarities(mismatch), DataError);
}

TEST_CASE("output formats") {
  PositionCurve curve{{0.5, 0.25}, 12};
  CHECK(curve_to_json(curve) == R"({"degree":1,"coefficients":[0.5,0.25],"n":12})");
  std::ostringstream out;
  const std::vector<double> grid{-1.0, 0.5}, dens{0.0, 2.25};
  write_kde_tsv(out, grid, dens);
  CHECK(out.str() == "-1\t0\n0.5\t2.25\n");
}
