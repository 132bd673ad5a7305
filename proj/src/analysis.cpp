#include "matilda/analysis.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "matilda/errors.hpp"
#include "matilda/io.hpp"

namespace matilda::analysis {
namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      compensation_ += (sum_ - t) + x;
    else
      compensation_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

std::string format_double(double value) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

std::vector<std::vector<double>> read_matrix(const nlohmann::json& node, const char* key) {
  if (!node.contains(key) || !node[key].is_array())
    throw DataError(std::string("missing array \"") + key + "\"");
  return node[key].get<std::vector<std::vector<double>>>();
}

template <typename Parse>
auto read_jsonl(std::istream& in, Parse parse) {
  std::vector<decltype(parse(nlohmann::json{}))> records;
  const auto lines = read_lines(in);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].find_first_not_of(" \t") == std::string::npos) continue;
    try {
      records.push_back(parse(nlohmann::json::parse(lines[n])));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(n + 1) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace

void PerturbationDump::validate() const {
  const std::size_t m = tokens.size();
  if (p_src.size() != m || p_tgt.size() != m)
    throw DataError("sentence " + std::to_string(sentence_id) + ": " + std::to_string(m) +
                    " tokens but " + std::to_string(p_src.size()) + "/" +
                    std::to_string(p_tgt.size()) + " probability rows");
  const std::size_t n = perturbations();
  if (m > 0 && n < 2)
    throw DataError("sentence " + std::to_string(sentence_id) + ": need N >= 2 perturbations");
  for (const auto* matrix : {&p_src, &p_tgt}) {
    for (const auto& row : *matrix) {
      if (row.size() != n)
        throw DataError("sentence " + std::to_string(sentence_id) + ": ragged probability rows");
      for (double p : row)
        if (!(p >= 0.0 && p <= 1.0))
          throw DataError("sentence " + std::to_string(sentence_id) +
                          ": probability outside [0,1]");
    }
  }
}

double PositionCurve::operator()(double x) const {
  double y = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) y = y * x + *it;
  return y;
}

double contribution_variance(std::span<const double> probs) {
  if (probs.size() < 2) throw std::invalid_argument("variance needs at least two values");
  // Welford's update; numerically stable in one pass.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double p : probs) {
    ++n;
    const double delta = p - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (p - mean);
  }
  return m2 / static_cast<double>(n);
}

std::optional<double> relative_source_contribution(double c_s, double c_t) {
  if (c_s < 0.0 || c_t < 0.0) throw std::invalid_argument("contributions must be non-negative");
  const double total = c_s + c_t;
  if (total == 0.0) return std::nullopt;
  return c_s / total;
}

std::vector<std::optional<double>> token_csr(const PerturbationDump& dump) {
  dump.validate();
  std::vector<std::optional<double>> out;
  out.reserve(dump.tokens.size());
  for (std::size_t j = 0; j < dump.tokens.size(); ++j)
    out.push_back(relative_source_contribution(contribution_variance(dump.p_src[j]),
                                               contribution_variance(dump.p_tgt[j])));
  return out;
}

MeanStd corpus_mean_csr(std::span<const PerturbationDump> dumps) {
  std::vector<double> values;
  for (const auto& dump : dumps)
    for (const auto& csr : token_csr(dump))
      if (csr) values.push_back(*csr);
  if (values.empty()) throw DataError("no token with a defined relative source contribution");

  CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / static_cast<double>(values.size());
  CompensatedSum squares;
  for (double v : values) squares.add((v - mean) * (v - mean));
  const double var = squares.value() / static_cast<double>(values.size());
  return {100.0 * mean, 100.0 * std::sqrt(var)};
}

std::vector<CurvePoint> position_points(std::span<const PerturbationDump> dumps) {
  std::vector<CurvePoint> points;
  for (const auto& dump : dumps) {
    const std::size_t m = dump.tokens.size();
    if (m < 2) continue;
    const auto csr = token_csr(dump);
    for (std::size_t j = 0; j < m; ++j)
      if (csr[j])
        points.push_back({static_cast<double>(j) / static_cast<double>(m - 1), *csr[j]});
  }
  return points;
}

PositionCurve fit_polynomial(std::span<const CurvePoint> points, int degree) {
  if (degree < 0) throw std::invalid_argument("degree must be non-negative");
  const auto cols = static_cast<Eigen::Index>(degree + 1);
  const auto rows = static_cast<Eigen::Index>(points.size());
  if (rows < cols)
    throw DataError("need at least " + std::to_string(cols) + " points for degree " +
                    std::to_string(degree) + ", got " + std::to_string(rows));

  Eigen::MatrixXd vandermonde(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double power = 1.0;
    for (Eigen::Index k = 0; k < cols; ++k) {
      vandermonde(i, k) = power;
      power *= points[static_cast<std::size_t>(i)].x;
    }
    y(i) = points[static_cast<std::size_t>(i)].y;
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vandermonde);
  if (qr.rank() < cols) {
    const auto& r = qr.matrixQR();
    const double smallest = std::abs(r(cols - 1, cols - 1));
    const double condition = smallest > 0.0 ? std::abs(r(0, 0)) / smallest
                                             : std::numeric_limits<double>::infinity();
    throw DataError("rank-deficient least-squares system (rank " + std::to_string(qr.rank()) +
                    " of " + std::to_string(cols) + ", condition estimate " +
                    format_double(condition) + ")");
  }
  const Eigen::VectorXd solution = qr.solve(y);
  PositionCurve curve;
  curve.coefficients.assign(solution.data(), solution.data() + solution.size());
  curve.sample_count = points.size();
  return curve;
}

PositionCurve position_curve(std::span<const PerturbationDump> dumps, int degree) {
  const auto points = position_points(dumps);
  if (degree < 0) throw std::invalid_argument("degree must be non-negative");
  if (points.size() <= static_cast<std::size_t>(degree) + 1)
    throw DataError("need more than " + std::to_string(degree + 1) +
                    " (position, C_SR) points, got " + std::to_string(points.size()));
  return fit_polynomial(points, degree);
}

double residual_sum_of_squares(const PositionCurve& curve, std::span<const CurvePoint> points) {
  CompensatedSum sum;
  for (const auto& p : points) {
    const double r = curve(p.x) - p.y;
    sum.add(r * r);
  }
  return sum.value();
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::vector<double> kde(std::span<const double> samples, double bandwidth,
                        std::span<const double> grid) {
  if (samples.empty()) throw std::invalid_argument("kde: no samples");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> density;
  density.reserve(grid.size());
  for (double x : grid) {
    double sum = 0.0;
    for (double s : samples) {
      const double z = (x - s) / bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    density.push_back(norm * sum);
  }
  return density;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("grid needs hi > lo and >= 2 points");
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

double perturbation_sigma(double embedding_norm, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (embedding_norm < 0.0) throw std::invalid_argument("embedding norm must be non-negative");
  return lambda * embedding_norm;
}

std::vector<PerturbationDump> read_dumps(std::istream& in) {
  return read_jsonl(in, [](const nlohmann::json& node) {
    PerturbationDump dump;
    dump.sentence_id = node.at("id").get<std::size_t>();
    dump.tokens = node.at("tokens").get<TokenSeq>();
    dump.p_src = read_matrix(node, "p_src");
    dump.p_tgt = read_matrix(node, "p_tgt");
    dump.validate();
    return dump;
  });
}

std::vector<PerturbationDump> read_dumps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_dumps(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<SimilarityRecord> read_similarities(std::istream& in) {
  return read_jsonl(in, [](const nlohmann::json& node) {
    SimilarityRecord record;
    record.sentence_id = node.at("id").get<std::size_t>();
    record.hyp_embedding = node.at("hyp").get<std::vector<double>>();
    record.ref_embedding = node.at("ref").get<std::vector<double>>();
    if (record.hyp_embedding.size() != record.ref_embedding.size())
      throw DataError("hyp and ref embeddings differ in dimension");
    for (const auto* v : {&record.hyp_embedding, &record.ref_embedding}) {
      bool nonzero = false;
      for (double x : *v) {
        if (!std::isfinite(x)) throw DataError("non-finite embedding value");
        nonzero = nonzero || x != 0.0;
      }
      if (!nonzero) throw DataError("zero embedding vector");
    }
    return record;
  });
}

std::vector<SimilarityRecord> read_similarities(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_similarities(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string curve_to_json(const PositionCurve& curve) {
  nlohmann::ordered_json out;
  out["degree"] = curve.degree();
  out["coefficients"] = curve.coefficients;
  out["n"] = curve.sample_count;
  return out.dump();
}

void write_kde_tsv(std::ostream& out, std::span<const double> grid,
                   std::span<const double> densities) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << format_double(grid[i]) << '\t' << format_double(densities[i]) << '\n';
}

}  // namespace matilda::analysis
