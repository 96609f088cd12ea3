#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assoc/matrix.hpp"

namespace assoc {

struct CorrelationResult {
  double r = 0.0;
  std::int64_t n = 0;
  double ci_lo = -1.0;  // 95% interval via Fisher z
  double ci_hi = 1.0;
};

// Product-moment correlation. Requires equal lengths >= 3, finite values and
// nonzero variance in both.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

struct SteigerResult {
  double z = 0.0;
  double p = 1.0;  // two-sided
  double r12 = 0.0, r13 = 0.0, r23 = 0.0;
  std::int64_t n = 0;
};

// Test of rho12 == rho13 for correlations sharing variable 1, using the
// Fisher-z difference with the pooled-r covariance correction.
SteigerResult steiger_z(double r12, double r13, double r23, std::int64_t n);

// Standard normal CDF.
double normal_cdf(double z);

struct LogFrequency {
  std::vector<std::string> words;
  std::vector<double> log10_counts;
};

// log10 of raw counts; words with count < 1 are left out.
LogFrequency log10_frequency(const FrequencyVector& totals);

struct RelatednessJudgment {
  std::string word1, word2;
  double rating = 0.0;
};

struct RelatednessResult {
  CorrelationResult correlation;
  std::int64_t n_pairs = 0;
  std::int64_t n_covered = 0;
  double coverage() const { return n_pairs ? static_cast<double>(n_covered) / static_cast<double>(n_pairs) : 0.0; }
};

using PairScorer = std::function<std::optional<double>(const std::string&, const std::string&)>;

// Pairs the scorer cannot score are dropped and counted.
RelatednessResult relatedness_eval(const std::vector<RelatednessJudgment>& judgments, const PairScorer& scorer);

// Cosine of embedding rows; empty when either word is absent.
PairScorer embedding_scorer(const Embedding& embedding);
PairScorer similarity_scorer(const SimilarityMatrix& similarity);

struct RidgeModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

// Minimizes |y - X b - c|^2 + lambda |b|^2 with the intercept unpenalized,
// through the regularized normal equations of the centered problem.
RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

// Coefficient of determination against the mean of `truth`.
double r_squared(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted);

// 25 points, 1e-4 ... 1e4, log-spaced.
std::vector<double> default_lambda_grid();

struct RidgeEvalOptions {
  std::vector<double> lambda_grid = default_lambda_grid();
  int folds = 10;
  int bootstrap_resamples = 1000;
  double test_fraction = 0.2;
  std::int64_t min_overlap = 50;
};

struct RidgeEvalResult {
  double r2_test = 0.0;
  double ci_lo = 0.0;  // bootstrap percentile interval, widened to contain r2_test
  double ci_hi = 0.0;
  double lambda_selected = 0.0;
  std::vector<double> fold_r2;  // at the selected lambda
  double mean_cv_r2 = 0.0;
  std::int64_t n_overlap = 0;
  std::int64_t n_train = 0;
  std::int64_t n_test = 0;
};

// 80/20 split by split_seed; lambda picked by k-fold CV inside the training
// part; refit on all training rows; R^2 on the held-out rows; bootstrap over
// test (truth, prediction) pairs. Standardization statistics come from
// training rows only.
RidgeEvalResult ridge_cv_eval(const Embedding& embedding, const std::map<std::string, double>& norms,
                              std::uint64_t split_seed, const RidgeEvalOptions& options = {});

struct LdtGroupResult {
  std::string group;
  std::int64_t n = 0;
  CorrelationResult assoc_freq;   // RT vs log10 association frequency
  CorrelationResult corpus_freq;  // RT vs log10 corpus frequency
  double r_between = 0.0;         // between the two frequency measures
  SteigerResult steiger;
  double relative_gain = 0.0;     // |r_assoc| / |r_corpus| - 1
};

struct LdtRow {
  std::string word;
  double mean_rt = 0.0;
  std::string group;
};

// Per group: words present in both frequency sources with count >= 1.
std::vector<LdtGroupResult> ldt_analysis(const std::vector<LdtRow>& ldt, const FrequencyVector& assoc_freq,
                                         const FrequencyVector& corpus_freq);

// TSV readers. A first line that does not parse as data is taken as a header.
std::map<std::string, double> read_norms(const std::filesystem::path& path);
std::vector<RelatednessJudgment> read_judgments(const std::filesystem::path& path);
std::vector<LdtRow> read_ldt(const std::filesystem::path& path);

}  // namespace assoc
