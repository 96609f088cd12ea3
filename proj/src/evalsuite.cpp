#include "assoc/evalsuite.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "assoc/error.hpp"
#include "assoc/rng.hpp"
#include "assoc/text.hpp"

namespace assoc {

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DataError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 3) throw DataError("pearson: need at least 3 observations, got " + std::to_string(x.size()));
  const auto n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("pearson: non-finite value");
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: zero variance");

  CorrelationResult res;
  res.n = static_cast<std::int64_t>(n);
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(res.r) == 1.0) {
    res.ci_lo = res.ci_hi = res.r;
  } else if (n > 3) {
    const double z = std::atanh(res.r);
    const double se = 1.0 / std::sqrt(static_cast<double>(n) - 3.0);
    res.ci_lo = std::tanh(z - 1.96 * se);
    res.ci_hi = std::tanh(z + 1.96 * se);
  }
  return res;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

SteigerResult steiger_z(double r12, double r13, double r23, std::int64_t n) {
  for (double r : {r12, r13, r23})
    if (!(r > -1.0 && r < 1.0)) throw DataError("steiger_z: correlations must lie in (-1, 1)");
  if (n < 4) throw DataError("steiger_z: n must be >= 4");
  SteigerResult out{0.0, 1.0, r12, r13, r23, n};
  if (r12 == r13) return out;
  const double rbar = 0.5 * (r12 + r13);
  const double rbar2 = rbar * rbar;
  // Covariance of the two Fisher z values under H0, with pooled r.
  const double psi = r23 * (1.0 - 2.0 * rbar2) - 0.5 * rbar2 * (1.0 - 2.0 * rbar2 - r23 * r23);
  const double c = psi / ((1.0 - rbar2) * (1.0 - rbar2));
  out.z = (std::atanh(r12) - std::atanh(r13)) * std::sqrt(static_cast<double>(n) - 3.0) / std::sqrt(2.0 - 2.0 * c);
  out.p = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

LogFrequency log10_frequency(const FrequencyVector& totals) {
  LogFrequency out;
  for (std::size_t i = 0; i < totals.totals.size(); ++i) {
    if (totals.totals[i] < 1) continue;
    out.words.push_back(totals.response_labels[i]);
    out.log10_counts.push_back(std::log10(static_cast<double>(totals.totals[i])));
  }
  return out;
}

RelatednessResult relatedness_eval(const std::vector<RelatednessJudgment>& judgments, const PairScorer& scorer) {
  RelatednessResult res;
  res.n_pairs = static_cast<std::int64_t>(judgments.size());
  std::vector<double> human, model;
  for (const auto& j : judgments) {
    const auto s = scorer(j.word1, j.word2);
    if (!s) continue;
    human.push_back(j.rating);
    model.push_back(*s);
  }
  res.n_covered = static_cast<std::int64_t>(human.size());
  if (res.n_covered < 3)
    throw DataError("relatedness_eval: only " + std::to_string(res.n_covered) + " of " + std::to_string(res.n_pairs) +
                    " pairs covered");
  res.correlation = pearson(human, model);
  return res;
}

namespace {

std::unordered_map<std::string, Eigen::Index> row_index(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, Eigen::Index> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) idx.emplace(labels[i], static_cast<Eigen::Index>(i));
  return idx;
}

}  // namespace

PairScorer embedding_scorer(const Embedding& embedding) {
  auto idx = std::make_shared<std::unordered_map<std::string, Eigen::Index>>(row_index(embedding.row_labels));
  return [idx, &embedding](const std::string& a, const std::string& b) -> std::optional<double> {
    const auto ia = idx->find(a), ib = idx->find(b);
    if (ia == idx->end() || ib == idx->end()) return std::nullopt;
    return cosine_similarity(Eigen::VectorXd(embedding.values.row(ia->second).transpose()),
                             Eigen::VectorXd(embedding.values.row(ib->second).transpose()));
  };
}

PairScorer similarity_scorer(const SimilarityMatrix& similarity) {
  auto idx = std::make_shared<std::unordered_map<std::string, Eigen::Index>>(row_index(similarity.labels));
  return [idx, &similarity](const std::string& a, const std::string& b) -> std::optional<double> {
    const auto ia = idx->find(a), ib = idx->find(b);
    if (ia == idx->end() || ib == idx->end()) return std::nullopt;
    return similarity.values(ia->second, ib->second);
  };
}

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& x) const {
  return (x * coefficients).array() + intercept;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (x.rows() != y.size()) throw DataError("ridge_fit: X has " + std::to_string(x.rows()) + " rows, y has " + std::to_string(y.size()));
  if (!(lambda > 0.0)) throw ConfigError("ridge_fit: lambda must be positive");
  if (x.rows() == 0) throw DataError("ridge_fit: no rows");
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  RidgeModel m;
  m.coefficients = gram.ldlt().solve(xc.transpose() * yc);
  m.intercept = y_mean - x_mean.dot(m.coefficients);
  return m;
}

double r_squared(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted) {
  const double mean = truth.mean();
  const double sst = (truth.array() - mean).square().sum();
  const double sse = (truth - predicted).squaredNorm();
  if (sst == 0.0) return sse == 0.0 ? 1.0 : 0.0;
  return 1.0 - sse / sst;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 25; ++i) grid.push_back(std::pow(10.0, -4.0 + 8.0 * i / 24.0));
  return grid;
}

namespace {

struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale.resize(x.cols());
    const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double sd = std::sqrt((x.col(j).array() - s.mean[j]).square().sum() / denom);
      s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean).array().rowwise() / scale.array();
  }
};

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  return out;
}

// Ridge predictions on `x_val` for every lambda of the grid, from one
// eigendecomposition of the (primal or dual) Gram matrix of the centered
// training rows.
std::vector<Eigen::VectorXd> ridge_path(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                                        const Eigen::MatrixXd& x_val, const std::vector<double>& grid) {
  const Eigen::RowVectorXd x_mean = x_train.colwise().mean();
  const double y_mean = y_train.mean();
  const Eigen::MatrixXd xc = x_train.rowwise() - x_mean;
  const Eigen::VectorXd yc = y_train.array() - y_mean;
  const Eigen::MatrixXd xv = x_val.rowwise() - x_mean;
  std::vector<Eigen::VectorXd> preds;
  if (xc.cols() <= xc.rows()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xc.transpose() * xc);
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * (xc.transpose() * yc);
    const Eigen::MatrixXd xv_rot = xv * eig.eigenvectors();
    for (double lambda : grid) {
      const Eigen::VectorXd w = proj.array() / (eig.eigenvalues().array().max(0.0) + lambda);
      preds.push_back((xv_rot * w).array() + y_mean);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xc * xc.transpose());
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * yc;
    const Eigen::MatrixXd kv_rot = (xv * xc.transpose()) * eig.eigenvectors();
    for (double lambda : grid) {
      const Eigen::VectorXd a = proj.array() / (eig.eigenvalues().array().max(0.0) + lambda);
      preds.push_back((kv_rot * a).array() + y_mean);
    }
  }
  return preds;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

RidgeEvalResult ridge_cv_eval(const Embedding& embedding, const std::map<std::string, double>& norms,
                              std::uint64_t split_seed, const RidgeEvalOptions& options) {
  if (options.lambda_grid.empty()) throw ConfigError("ridge_cv_eval: empty lambda grid");
  if (options.folds < 2) throw ConfigError("ridge_cv_eval: need at least 2 folds");
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) throw ConfigError("ridge_cv_eval: test_fraction outside (0, 1)");

  std::vector<Eigen::Index> rows;
  std::vector<double> targets;
  for (std::size_t i = 0; i < embedding.row_labels.size(); ++i) {
    const auto it = norms.find(embedding.row_labels[i]);
    if (it == norms.end()) continue;
    rows.push_back(static_cast<Eigen::Index>(i));
    targets.push_back(it->second);
  }
  RidgeEvalResult res;
  res.n_overlap = static_cast<std::int64_t>(rows.size());
  if (res.n_overlap < options.min_overlap)
    throw DataError("ridge_cv_eval: only " + std::to_string(res.n_overlap) + " words overlap (need " +
                    std::to_string(options.min_overlap) + ")");
  const Eigen::MatrixXd x_all = take_rows(embedding.values, rows);
  const Eigen::VectorXd y_all = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));

  // Split.
  std::vector<Eigen::Index> order(rows.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng split_rng(derive_seed(split_seed, "split"));
  split_rng.shuffle(order);
  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(options.test_fraction * static_cast<double>(rows.size()))), 1, rows.size() - 1);
  std::vector<Eigen::Index> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<Eigen::Index> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  res.n_train = static_cast<std::int64_t>(train.size());
  res.n_test = static_cast<std::int64_t>(test.size());

  const Eigen::MatrixXd x_train_raw = take_rows(x_all, train);
  const Eigen::VectorXd y_train = take(y_all, train);

  // Cross-validated lambda selection inside the training part.
  const auto folds = static_cast<std::size_t>(std::min<std::int64_t>(options.folds, res.n_train));
  std::vector<Eigen::Index> fold_order(train.size());
  std::iota(fold_order.begin(), fold_order.end(), Eigen::Index{0});
  Rng fold_rng(derive_seed(split_seed, "folds"));
  fold_rng.shuffle(fold_order);
  std::vector<std::vector<double>> fold_scores(options.lambda_grid.size(), std::vector<double>(folds, 0.0));
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> fit_rows, val_rows;
    for (std::size_t i = 0; i < fold_order.size(); ++i) (i % folds == f ? val_rows : fit_rows).push_back(fold_order[i]);
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(val_rows.begin(), val_rows.end());
    const Eigen::MatrixXd x_fit_raw = take_rows(x_train_raw, fit_rows);
    const auto scaler = Standardizer::fit(x_fit_raw);
    const auto preds = ridge_path(scaler.apply(x_fit_raw), take(y_train, fit_rows),
                                  scaler.apply(take_rows(x_train_raw, val_rows)), options.lambda_grid);
    const Eigen::VectorXd y_val = take(y_train, val_rows);
    for (std::size_t l = 0; l < preds.size(); ++l) fold_scores[l][f] = r_squared(y_val, preds[l]);
  }
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < options.lambda_grid.size(); ++l) {
    const double mean = std::accumulate(fold_scores[l].begin(), fold_scores[l].end(), 0.0) / static_cast<double>(folds);
    if (mean >= best_score) {
      best_score = mean;
      best = l;
    }
  }
  res.lambda_selected = options.lambda_grid[best];
  res.fold_r2 = fold_scores[best];
  res.mean_cv_r2 = best_score;

  // Refit on the whole training part, score the held-out part.
  const auto scaler = Standardizer::fit(x_train_raw);
  const auto model = ridge_fit(scaler.apply(x_train_raw), y_train, res.lambda_selected);
  const Eigen::VectorXd y_test = take(y_all, test);
  const Eigen::VectorXd pred = model.predict(scaler.apply(take_rows(x_all, test)));
  res.r2_test = r_squared(y_test, pred);

  res.ci_lo = res.ci_hi = res.r2_test;
  if (options.bootstrap_resamples > 0) {
    Rng boot_rng(derive_seed(split_seed, "bootstrap"));
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(options.bootstrap_resamples));
    Eigen::VectorXd yt(y_test.size()), yp(y_test.size());
    for (int b = 0; b < options.bootstrap_resamples; ++b) {
      for (Eigen::Index i = 0; i < y_test.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(boot_rng.below(static_cast<std::uint64_t>(y_test.size())));
        yt[i] = y_test[j];
        yp[i] = pred[j];
      }
      stats.push_back(r_squared(yt, yp));
    }
    res.ci_lo = std::min(percentile(stats, 0.025), res.r2_test);
    res.ci_hi = std::max(percentile(stats, 0.975), res.r2_test);
  }
  return res;
}

std::vector<LdtGroupResult> ldt_analysis(const std::vector<LdtRow>& ldt, const FrequencyVector& assoc_freq,
                                         const FrequencyVector& corpus_freq) {
  std::unordered_map<std::string, std::int64_t> assoc, corpus;
  for (std::size_t i = 0; i < assoc_freq.totals.size(); ++i) assoc[assoc_freq.response_labels[i]] += assoc_freq.totals[i];
  for (std::size_t i = 0; i < corpus_freq.totals.size(); ++i) corpus[corpus_freq.response_labels[i]] += corpus_freq.totals[i];

  std::vector<std::string> groups;
  for (const auto& row : ldt)
    if (std::find(groups.begin(), groups.end(), row.group) == groups.end()) groups.push_back(row.group);

  std::vector<LdtGroupResult> out;
  for (const auto& group : groups) {
    std::vector<double> rt, fa, fc;
    for (const auto& row : ldt) {
      if (row.group != group) continue;
      const auto a = assoc.find(row.word);
      const auto c = corpus.find(row.word);
      if (a == assoc.end() || c == corpus.end() || a->second < 1 || c->second < 1) continue;
      rt.push_back(row.mean_rt);
      fa.push_back(std::log10(static_cast<double>(a->second)));
      fc.push_back(std::log10(static_cast<double>(c->second)));
    }
    LdtGroupResult g;
    g.group = group;
    g.n = static_cast<std::int64_t>(rt.size());
    g.assoc_freq = pearson(rt, fa);
    g.corpus_freq = pearson(rt, fc);
    g.r_between = pearson(fa, fc).r;
    g.steiger = steiger_z(g.assoc_freq.r, g.corpus_freq.r, g.r_between, g.n);
    g.relative_gain = std::abs(g.assoc_freq.r) / std::abs(g.corpus_freq.r) - 1.0;
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

bool to_double(const std::string& s, double& v) {
  const auto t = text::trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  return ec == std::errc{} && ptr == t.data() + t.size() && std::isfinite(v);
}

template <typename OnRow>
void read_tsv(const std::filesystem::path& path, std::size_t columns, std::size_t numeric_col, OnRow&& on_row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = text::split(line, '\t');
    double v = 0;
    if (cells.size() < columns || !to_double(cells[numeric_col], v)) {
      if (lineno == 1) continue;
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    on_row(cells, v);
  }
}

}  // namespace

std::map<std::string, double> read_norms(const std::filesystem::path& path) {
  std::map<std::string, double> out;
  read_tsv(path, 2, 1, [&](const std::vector<std::string>& c, double v) { out[c[0]] = v; });
  return out;
}

std::vector<RelatednessJudgment> read_judgments(const std::filesystem::path& path) {
  std::vector<RelatednessJudgment> out;
  read_tsv(path, 3, 2, [&](const std::vector<std::string>& c, double v) { out.push_back({c[0], c[1], v}); });
  return out;
}

std::vector<LdtRow> read_ldt(const std::filesystem::path& path) {
  std::vector<LdtRow> out;
  read_tsv(path, 3, 1, [&](const std::vector<std::string>& c, double v) { out.push_back({c[0], v, c[2]}); });
  return out;
}

}  // namespace assoc
