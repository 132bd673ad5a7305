#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matilda/corpus_io.hpp"

namespace matilda::analysis {

inline constexpr std::size_t kDefaultPerturbations = 50;
inline constexpr double kDefaultLambda = 0.01;
inline constexpr double kDefaultBandwidth = 0.06;
inline constexpr int kDefaultDegree = 6;

// Token probabilities of one teacher-forced reference under N source-side and
// N target-prefix perturbations. Row j of each matrix belongs to token j.
struct PerturbationDump {
  std::size_t sentence_id = 0;
  TokenSeq tokens;
  std::vector<std::vector<double>> p_src;
  std::vector<std::vector<double>> p_tgt;

  std::size_t perturbations() const { return p_src.empty() ? 0 : p_src.front().size(); }

  // Throws DataError on mismatched shapes, N < 2 or a probability outside [0,1].
  void validate() const;
};

struct SimilarityRecord {
  std::size_t sentence_id = 0;
  std::vector<double> hyp_embedding;
  std::vector<double> ref_embedding;
};

// Degree-d polynomial, coefficients in ascending powers.
struct PositionCurve {
  std::vector<double> coefficients;
  std::size_t sample_count = 0;

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  double operator()(double x) const;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Population variance (1/N) sum (p_n - mean)^2. Throws std::invalid_argument
// for fewer than two values.
double contribution_variance(std::span<const double> probs);

// c_s / (c_s + c_t); nullopt when both are zero (the token is skipped).
// Throws std::invalid_argument on negative input.
std::optional<double> relative_source_contribution(double c_s, double c_t);

// Relative source contribution of every token, nullopt for skipped tokens.
std::vector<std::optional<double>> token_csr(const PerturbationDump& dump);

// Mean and population standard deviation of the relative source
// contribution over all non-skipped tokens, in percent. Throws DataError
// when no token remains.
MeanStd corpus_mean_csr(std::span<const PerturbationDump> dumps);

struct CurvePoint {
  double x;
  double y;
};

// (relative position, C_SR) points; position j of an m-token sentence maps to
// j/(m-1). Single-token sentences and skipped tokens contribute nothing.
std::vector<CurvePoint> position_points(std::span<const PerturbationDump> dumps);

// Least-squares polynomial through at least degree+1 points, solved by
// column-pivoting Householder QR on the Vandermonde matrix. Throws DataError
// if the system is rank deficient.
PositionCurve fit_polynomial(std::span<const CurvePoint> points, int degree);

// Fit of position_points; requires more than degree+1 points.
PositionCurve position_curve(std::span<const PerturbationDump> dumps,
                             int degree = kDefaultDegree);

double residual_sum_of_squares(const PositionCurve& curve, std::span<const CurvePoint> points);

// u.v / (|u||v|). Throws std::invalid_argument on zero vectors or
// mismatched dimensions.
double cosine(std::span<const double> u, std::span<const double> v);

// Gaussian kernel density estimate evaluated on `grid`.
std::vector<double> kde(std::span<const double> samples, double bandwidth,
                        std::span<const double> grid);

// Evenly spaced grid of `points` values over [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

// Noise scale for perturbing an embedding of the given norm: lambda * norm.
double perturbation_sigma(double embedding_norm, double lambda);

// JSON Lines readers; errors carry the 1-based line number.
std::vector<PerturbationDump> read_dumps(std::istream& in);
std::vector<PerturbationDump> read_dumps(const std::filesystem::path& path);
std::vector<SimilarityRecord> read_similarities(std::istream& in);
std::vector<SimilarityRecord> read_similarities(const std::filesystem::path& path);

// {"degree":d,"coefficients":[...],"n":count}
std::string curve_to_json(const PositionCurve& curve);
// "x<TAB>density" lines.
void write_kde_tsv(std::ostream& out, std::span<const double> grid,
                   std::span<const double> densities);

}  // namespace matilda::analysis
