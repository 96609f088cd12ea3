#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "assoc/ingest.hpp"

namespace assoc {

using SparseCounts = Eigen::SparseMatrix<std::int64_t, Eigen::RowMajor>;
using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Cue x response-type counts. Rows and columns are sorted by label (byte order).
struct CueResponseMatrix {
  std::vector<std::string> cue_labels;
  std::vector<std::string> response_labels;
  SparseCounts counts;

  std::int64_t total() const { return counts.sum(); }
};

// Same shape as a count matrix, real-valued (e.g. after PPMI).
struct WeightedMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  SparseReal values;
};

struct FrequencyVector {
  std::vector<std::string> response_labels;
  std::vector<std::int64_t> totals;
};

struct Embedding {
  std::vector<std::string> row_labels;
  Eigen::MatrixXd values;  // rows x dims

  Eigen::Index dims() const { return values.cols(); }
  // Row index by label, or -1.
  Eigen::Index find(const std::string& label) const;
};

struct SimilarityMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;  // symmetric, entries in [-1, 1]
};

// One row per cue, one column per response type whose total frequency is at
// least `min_response_frequency`. Markered and empty slots contribute nothing.
CueResponseMatrix build_count_matrix(const std::vector<TrialRecord>& trials, std::int64_t min_response_frequency = 1);

FrequencyVector frequency_vector(const CueResponseMatrix& matrix);

// cell(c,r) = max(0, log2(n(c,r) N / (rowsum(c) colsum(r)))); zero cells stay
// structurally zero. Throws DataError when the grand total is zero.
WeightedMatrix ppmi_transform(const CueResponseMatrix& matrix);
SparseReal ppmi(const SparseReal& counts);
Eigen::MatrixXd ppmi(const Eigen::MatrixXd& counts);

struct SvdOptions {
  int oversampling = 10;
  int power_iterations = 4;
  std::uint64_t seed = 0;
};

struct SvdResult {
  Eigen::MatrixXd u;                // rows x k, orthonormal columns
  Eigen::VectorXd singular_values;  // k, non-increasing
  Eigen::MatrixXd v;                // cols x k
};

// Randomized range finder with subspace iteration, followed by an exact SVD
// of the projected matrix. Each left singular vector is sign-flipped so that
// its largest-magnitude entry is positive (first such entry on ties).
SvdResult randomized_svd(const SparseReal& matrix, int k, const SvdOptions& options = {});

struct TruncatedSvd {
  Embedding embedding;  // U_k * Sigma_k
  Eigen::VectorXd singular_values;
};

TruncatedSvd truncated_svd(const WeightedMatrix& matrix, int k = 300, const SvdOptions& options = {});

// dot(a,b) / (|a||b|); 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

// Cosine similarity between all rows; diagonal 1 for nonzero rows.
SimilarityMatrix cosine_matrix(const std::vector<std::string>& labels, const Eigen::MatrixXd& rows);

Embedding l2_normalize(const Embedding& embedding);
bool is_l2_normalized(const Embedding& embedding, double tol = 1e-9);

// Rows for labels present in both (in e1 order), columns e1 then e2. Both
// inputs must be L2-normalized.
Embedding concat_embeddings(const Embedding& e1, const Embedding& e2);

// word2vec text format: header "n k", then "word v1 ... vk". Duplicate words:
// the last occurrence wins and a warning is appended.
Embedding load_external_embedding(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
Embedding read_embedding(std::istream& in, std::vector<std::string>* warnings = nullptr);
void write_embedding(std::ostream& out, const Embedding& embedding);
void write_embedding(const std::filesystem::path& path, const Embedding& embedding);

// Sparse triplets "row<TAB>col<TAB>value", row-major order.
void write_triplets(std::ostream& out, const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                    const SparseReal& values);
void write_triplets(std::ostream& out, const CueResponseMatrix& matrix);
CueResponseMatrix read_count_triplets(std::istream& in);
CueResponseMatrix read_count_triplets(const std::filesystem::path& path);

void write_frequency(std::ostream& out, const FrequencyVector& freq);
// Two-column TSV "word<TAB>count"; a header line starting with "word" is skipped.
FrequencyVector read_frequency(const std::filesystem::path& path);

}  // namespace assoc
