#include "assoc/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "assoc/error.hpp"
#include "assoc/rng.hpp"
#include "assoc/text.hpp"

namespace assoc {

Eigen::Index Embedding::find(const std::string& label) const {
  const auto it = std::find(row_labels.begin(), row_labels.end(), label);
  return it == row_labels.end() ? -1 : static_cast<Eigen::Index>(it - row_labels.begin());
}

namespace {

std::vector<std::string> sorted_keys(const std::unordered_map<std::string, std::int64_t>& m) {
  std::vector<std::string> keys;
  keys.reserve(m.size());
  for (const auto& [k, _] : m) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::unordered_map<std::string, Eigen::Index> index_of(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, Eigen::Index> idx;
  idx.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) idx.emplace(labels[i], static_cast<Eigen::Index>(i));
  return idx;
}

}  // namespace

CueResponseMatrix build_count_matrix(const std::vector<TrialRecord>& trials, std::int64_t min_response_frequency) {
  if (trials.empty()) throw DataError("build_count_matrix: no trials");
  std::unordered_map<std::string, std::int64_t> cue_trials, response_totals;
  for (const auto& t : trials) {
    ++cue_trials[t.cue];
    for (const auto& slot : t.responses)
      if (slot.is_response() && !slot.raw_text.empty()) ++response_totals[slot.raw_text];
  }
  for (auto it = response_totals.begin(); it != response_totals.end();) {
    if (it->second < min_response_frequency)
      it = response_totals.erase(it);
    else
      ++it;
  }

  CueResponseMatrix m;
  m.cue_labels = sorted_keys(cue_trials);
  m.response_labels = sorted_keys(response_totals);
  const auto row_idx = index_of(m.cue_labels);
  const auto col_idx = index_of(m.response_labels);

  std::vector<Eigen::Triplet<std::int64_t>> triplets;
  for (const auto& t : trials) {
    const auto r = row_idx.at(t.cue);
    for (const auto& slot : t.responses) {
      if (!slot.is_response() || slot.raw_text.empty()) continue;
      const auto it = col_idx.find(slot.raw_text);
      if (it != col_idx.end()) triplets.emplace_back(r, it->second, 1);
    }
  }
  m.counts.resize(static_cast<Eigen::Index>(m.cue_labels.size()), static_cast<Eigen::Index>(m.response_labels.size()));
  m.counts.setFromTriplets(triplets.begin(), triplets.end());  // duplicates are summed
  m.counts.makeCompressed();
  return m;
}

FrequencyVector frequency_vector(const CueResponseMatrix& matrix) {
  FrequencyVector f;
  f.response_labels = matrix.response_labels;
  f.totals.assign(matrix.response_labels.size(), 0);
  for (Eigen::Index r = 0; r < matrix.counts.outerSize(); ++r)
    for (SparseCounts::InnerIterator it(matrix.counts, r); it; ++it) f.totals[static_cast<std::size_t>(it.col())] += it.value();
  return f;
}

SparseReal ppmi(const SparseReal& counts) {
  const Eigen::VectorXd row_sums = counts * Eigen::VectorXd::Ones(counts.cols());
  const Eigen::RowVectorXd col_sums = Eigen::RowVectorXd::Ones(counts.rows()) * counts;
  const double total = row_sums.sum();
  if (!(total > 0.0)) throw DataError("ppmi: matrix has zero total");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(counts.nonZeros()));
  for (Eigen::Index r = 0; r < counts.outerSize(); ++r) {
    for (SparseReal::InnerIterator it(counts, r); it; ++it) {
      if (it.value() <= 0.0) continue;
      const double pmi = std::log2((it.value() * total) / (row_sums[r] * col_sums[it.col()]));
      if (pmi > 0.0) triplets.emplace_back(r, it.col(), pmi);
    }
  }
  SparseReal out(counts.rows(), counts.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

Eigen::MatrixXd ppmi(const Eigen::MatrixXd& counts) {
  const Eigen::VectorXd row_sums = counts.rowwise().sum();
  const Eigen::RowVectorXd col_sums = counts.colwise().sum();
  const double total = row_sums.sum();
  if (!(total > 0.0)) throw DataError("ppmi: matrix has zero total");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
  for (Eigen::Index c = 0; c < counts.cols(); ++c) {
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
      const double v = counts(r, c);
      if (v <= 0.0) continue;
      const double pmi = std::log2((v * total) / (row_sums[r] * col_sums[c]));
      if (pmi > 0.0) out(r, c) = pmi;
    }
  }
  return out;
}

WeightedMatrix ppmi_transform(const CueResponseMatrix& matrix) {
  return {matrix.cue_labels, matrix.response_labels, ppmi(SparseReal(matrix.counts.cast<double>()))};
}

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

SvdResult randomized_svd(const SparseReal& a, int k, const SvdOptions& options) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (k < 1 || k > std::min(m, n))
    throw ConfigError("svd: k=" + std::to_string(k) + " outside [1, " + std::to_string(std::min(m, n)) + "]");
  const Eigen::Index l = std::min<Eigen::Index>(k + options.oversampling, std::min(m, n));

  Rng rng(derive_seed(options.seed, "svd-test-matrix"));
  Eigen::MatrixXd omega(n, l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = rng.normal();

  const SparseReal at = a.transpose();
  Eigen::MatrixXd q = orthonormal_basis(a * omega);
  for (int it = 0; it < options.power_iterations; ++it) {
    const Eigen::MatrixXd z = orthonormal_basis(at * q);
    q = orthonormal_basis(a * z);
  }

  // B^T = A^T Q is n x l; its SVD gives B = Ub S Vb^T with roles swapped.
  const Eigen::MatrixXd bt = at * q;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdResult out;
  out.singular_values = svd.singularValues().head(k);
  out.u = q * svd.matrixV().leftCols(k);
  out.v = svd.matrixU().leftCols(k);

  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(out.u(i, j)) > best) {
        best = std::abs(out.u(i, j));
        arg = i;
      }
    }
    if (out.u(arg, j) < 0.0) {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
  return out;
}

TruncatedSvd truncated_svd(const WeightedMatrix& matrix, int k, const SvdOptions& options) {
  auto svd = randomized_svd(matrix.values, k, options);
  TruncatedSvd out;
  out.embedding.row_labels = matrix.row_labels;
  out.embedding.values = svd.u * svd.singular_values.asDiagonal();
  out.singular_values = std::move(svd.singular_values);
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DataError("cosine_similarity: length mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  return cosine_similarity(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                           std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

SimilarityMatrix cosine_matrix(const std::vector<std::string>& labels, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd unit = rows;
  std::vector<bool> nonzero(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    nonzero[static_cast<std::size_t>(i)] = norm > 0.0;
    if (norm > 0.0) unit.row(i) /= norm;
  }
  Eigen::MatrixXd s = unit * unit.transpose();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    s(i, i) = nonzero[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    for (Eigen::Index j = i + 1; j < s.cols(); ++j) {
      const double v = std::clamp(s(i, j), -1.0, 1.0);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return {labels, std::move(s)};
}

Embedding l2_normalize(const Embedding& embedding) {
  Embedding out = embedding;
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    const double norm = out.values.row(i).norm();
    if (norm > 0.0) out.values.row(i) /= norm;
  }
  return out;
}

bool is_l2_normalized(const Embedding& embedding, double tol) {
  for (Eigen::Index i = 0; i < embedding.values.rows(); ++i) {
    const double norm = embedding.values.row(i).norm();
    if (norm != 0.0 && std::abs(norm - 1.0) > tol) return false;
  }
  return true;
}

Embedding concat_embeddings(const Embedding& e1, const Embedding& e2) {
  if (!is_l2_normalized(e1) || !is_l2_normalized(e2))
    throw DataError("concat_embeddings: inputs must be L2-normalized");
  const auto idx2 = index_of(e2.row_labels);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (std::size_t i = 0; i < e1.row_labels.size(); ++i) {
    const auto it = idx2.find(e1.row_labels[i]);
    if (it != idx2.end()) pairs.emplace_back(static_cast<Eigen::Index>(i), it->second);
  }
  if (pairs.empty()) throw DataError("concat_embeddings: no shared labels");
  Embedding out;
  out.values.resize(static_cast<Eigen::Index>(pairs.size()), e1.dims() + e2.dims());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    out.row_labels.push_back(e1.row_labels[static_cast<std::size_t>(pairs[r].first)]);
    out.values.row(row).head(e1.dims()) = e1.values.row(pairs[r].first);
    out.values.row(row).tail(e2.dims()) = e2.values.row(pairs[r].second);
  }
  return out;
}

namespace {

bool parse_double(std::string_view s, double& v) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(v);
}

bool parse_int(std::string_view s, std::int64_t& v) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

Embedding read_embedding(std::istream& in, std::vector<std::string>* warnings) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw DataError("embedding: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto head = fields(line);
  std::int64_t n = 0, k = 0;
  if (head.size() != 2 || !parse_int(head[0], n) || !parse_int(head[1], k) || n < 0 || k < 1)
    throw DataError("embedding line 1: header must be 'n k'");

  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = fields(line);
    if (static_cast<std::int64_t>(f.size()) != k + 1)
      throw DataError("embedding line " + std::to_string(lineno) + ": expected " + std::to_string(k) +
                      " values, found " + std::to_string(static_cast<std::int64_t>(f.size()) - 1));
    std::vector<double> row(static_cast<std::size_t>(k));
    for (std::int64_t j = 0; j < k; ++j)
      if (!parse_double(f[static_cast<std::size_t>(j + 1)], row[static_cast<std::size_t>(j)]))
        throw DataError("embedding line " + std::to_string(lineno) + ": bad value '" +
                        std::string(f[static_cast<std::size_t>(j + 1)]) + "'");
    std::string word(f[0]);
    if (auto it = seen.find(word); it != seen.end()) {
      if (warnings) warnings->push_back("duplicate word '" + word + "' at line " + std::to_string(lineno) + "; last wins");
      rows[it->second] = std::move(row);
    } else {
      seen.emplace(word, labels.size());
      labels.push_back(std::move(word));
      rows.push_back(std::move(row));
    }
  }
  Embedding e;
  e.row_labels = std::move(labels);
  e.values.resize(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::int64_t j = 0; j < k; ++j) e.values(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  if (warnings && static_cast<std::int64_t>(rows.size()) + static_cast<std::int64_t>(warnings->size()) < n)
    warnings->push_back("header declares " + std::to_string(n) + " rows, read " + std::to_string(rows.size()));
  return e;
}

Embedding load_external_embedding(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding " + path.string());
  return read_embedding(in, warnings);
}

void write_embedding(std::ostream& out, const Embedding& e) {
  out << e.values.rows() << ' ' << e.values.cols() << '\n';
  for (Eigen::Index i = 0; i < e.values.rows(); ++i) {
    out << e.row_labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < e.values.cols(); ++j) out << ' ' << text::format_double(e.values(i, j));
    out << '\n';
  }
}

void write_embedding(const std::filesystem::path& path, const Embedding& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_embedding(out, e);
}

void write_triplets(std::ostream& out, const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                    const SparseReal& values) {
  for (Eigen::Index r = 0; r < values.outerSize(); ++r)
    for (SparseReal::InnerIterator it(values, r); it; ++it)
      out << rows[static_cast<std::size_t>(r)] << '\t' << cols[static_cast<std::size_t>(it.col())] << '\t'
          << text::format_double(it.value()) << '\n';
}

void write_triplets(std::ostream& out, const CueResponseMatrix& m) {
  for (Eigen::Index r = 0; r < m.counts.outerSize(); ++r)
    for (SparseCounts::InnerIterator it(m.counts, r); it; ++it)
      out << m.cue_labels[static_cast<std::size_t>(r)] << '\t' << m.response_labels[static_cast<std::size_t>(it.col())]
          << '\t' << it.value() << '\n';
}

CueResponseMatrix read_count_triplets(std::istream& in) {
  std::vector<std::tuple<std::string, std::string, std::int64_t>> entries;
  std::unordered_map<std::string, std::int64_t> rows, cols;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = text::split(line, '\t');
    std::int64_t v = 0;
    if (cells.size() != 3 || !parse_int(cells[2], v) || v < 0)
      throw DataError("triplets line " + std::to_string(lineno) + ": expected row<TAB>col<TAB>count");
    rows.emplace(cells[0], 0);
    cols.emplace(cells[1], 0);
    entries.emplace_back(cells[0], cells[1], v);
  }
  CueResponseMatrix m;
  m.cue_labels = sorted_keys(rows);
  m.response_labels = sorted_keys(cols);
  const auto ri = index_of(m.cue_labels);
  const auto ci = index_of(m.response_labels);
  std::vector<Eigen::Triplet<std::int64_t>> triplets;
  for (const auto& [r, c, v] : entries) triplets.emplace_back(ri.at(r), ci.at(c), v);
  m.counts.resize(static_cast<Eigen::Index>(m.cue_labels.size()), static_cast<Eigen::Index>(m.response_labels.size()));
  m.counts.setFromTriplets(triplets.begin(), triplets.end());
  m.counts.prune(std::int64_t{0}, 0);
  m.counts.makeCompressed();
  return m;
}

CueResponseMatrix read_count_triplets(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open count matrix " + path.string());
  return read_count_triplets(in);
}

void write_frequency(std::ostream& out, const FrequencyVector& freq) {
  out << "word\tcount\n";
  for (std::size_t i = 0; i < freq.totals.size(); ++i) out << freq.response_labels[i] << '\t' << freq.totals[i] << '\n';
}

FrequencyVector read_frequency(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open frequency file " + path.string());
  FrequencyVector f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = text::split(line, '\t');
    std::int64_t v = 0;
    if (cells.size() < 2 || !parse_int(cells[1], v)) {
      double d = 0;
      if (cells.size() >= 2 && parse_double(cells[1], d) && d >= 0 && d == std::floor(d)) {
        v = static_cast<std::int64_t>(d);
      } else if (lineno == 1) {
        continue;  // header
      } else {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>count");
      }
    }
    f.response_labels.push_back(cells[0]);
    f.totals.push_back(v);
  }
  return f;
}

}  // namespace assoc
