#include "assoc/semnet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "assoc/error.hpp"
#include "assoc/parallel.hpp"
#include "assoc/rng.hpp"
#include "assoc/text.hpp"

namespace assoc {

SemanticGraph::SemanticGraph(std::vector<std::string> labels, std::vector<Edge> edges) : labels_(std::move(labels)) {
  const auto n = static_cast<std::int64_t>(labels_.size());
  if (n > std::numeric_limits<std::int32_t>::max()) throw DataError("graph: too many nodes");
  for (const auto& e : edges) {
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) throw DataError("graph: edge endpoint out of range");
    if (e.weight <= 0) throw DataError("graph: edge weights must be positive");
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.source, a.target) < std::tie(b.source, b.target); });
  offsets_.assign(labels_.size() + 1, 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!targets_.empty() && i > 0 && edges[i].source == edges[i - 1].source && edges[i].target == edges[i - 1].target) {
      weights_.back() += edges[i].weight;
      continue;
    }
    targets_.push_back(edges[i].target);
    weights_.push_back(edges[i].weight);
    ++offsets_[static_cast<std::size_t>(edges[i].source) + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

std::vector<Edge> SemanticGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(targets_.size());
  for (std::size_t s = 0; s < n_nodes(); ++s)
    for (auto e = out_begin(s); e < out_end(s); ++e)
      out.push_back({static_cast<std::int32_t>(s), targets_[e], weights_[e]});
  return out;
}

std::int64_t SemanticGraph::total_weight() const {
  return std::accumulate(weights_.begin(), weights_.end(), std::int64_t{0});
}

std::optional<std::int64_t> SemanticGraph::weight(std::size_t source, std::size_t target) const {
  const auto b = targets_.begin() + static_cast<std::ptrdiff_t>(out_begin(source));
  const auto e = targets_.begin() + static_cast<std::ptrdiff_t>(out_end(source));
  const auto it = std::lower_bound(b, e, static_cast<std::int32_t>(target));
  if (it == e || *it != static_cast<std::int32_t>(target)) return std::nullopt;
  return weights_[static_cast<std::size_t>(it - targets_.begin())];
}

SemanticGraph SemanticGraph::induced_subgraph(const std::vector<std::int32_t>& nodes) const {
  std::vector<std::int32_t> remap(n_nodes(), -1);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    remap[static_cast<std::size_t>(nodes[i])] = static_cast<std::int32_t>(i);
    labels.push_back(labels_[static_cast<std::size_t>(nodes[i])]);
  }
  std::vector<Edge> edges;
  for (auto s : nodes)
    for (auto e = out_begin(static_cast<std::size_t>(s)); e < out_end(static_cast<std::size_t>(s)); ++e)
      if (remap[static_cast<std::size_t>(targets_[e])] >= 0)
        edges.push_back({remap[static_cast<std::size_t>(s)], remap[static_cast<std::size_t>(targets_[e])], weights_[e]});
  return SemanticGraph(std::move(labels), std::move(edges));
}

Eigen::MatrixXd SemanticGraph::dense_weights() const {
  const auto n = static_cast<Eigen::Index>(n_nodes());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < n_nodes(); ++s)
    for (auto e = out_begin(s); e < out_end(s); ++e)
      w(static_cast<Eigen::Index>(s), targets_[e]) = static_cast<double>(weights_[e]);
  return w;
}

SemanticGraph build_graph(const CueResponseMatrix& matrix) {
  std::unordered_map<std::string, std::int32_t> cue_index;
  for (std::size_t i = 0; i < matrix.cue_labels.size(); ++i)
    cue_index.emplace(matrix.cue_labels[i], static_cast<std::int32_t>(i));
  // Column -> node, or -1 for responses that are not cues.
  std::vector<std::int32_t> col_node(matrix.response_labels.size(), -1);
  for (std::size_t c = 0; c < matrix.response_labels.size(); ++c)
    if (auto it = cue_index.find(matrix.response_labels[c]); it != cue_index.end()) col_node[c] = it->second;

  std::vector<Edge> edges;
  for (Eigen::Index r = 0; r < matrix.counts.outerSize(); ++r)
    for (SparseCounts::InnerIterator it(matrix.counts, r); it; ++it) {
      const auto target = col_node[static_cast<std::size_t>(it.col())];
      if (target >= 0 && it.value() > 0) edges.push_back({static_cast<std::int32_t>(r), target, it.value()});
    }
  return SemanticGraph(matrix.cue_labels, std::move(edges));
}

namespace {

// Sum and count of shortest-path distances from `source` to every other
// reachable node.
std::pair<double, std::int64_t> single_source(const SemanticGraph& g, std::size_t source, DistanceConvention conv,
                                              std::vector<double>& dist) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::fill(dist.begin(), dist.end(), kInf);
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, static_cast<std::int32_t>(source));
  const auto& targets = g.targets();
  const auto& weights = g.weights();
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (auto e = g.out_begin(static_cast<std::size_t>(u)); e < g.out_end(static_cast<std::size_t>(u)); ++e) {
      const auto v = static_cast<std::size_t>(targets[e]);
      const double w = static_cast<double>(weights[e]);
      const double nd = d + (conv == DistanceConvention::inverse_weight ? 1.0 / w : w);
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, static_cast<std::int32_t>(v));
      }
    }
  }
  double sum = 0.0;
  std::int64_t reached = 0;
  for (std::size_t t = 0; t < dist.size(); ++t) {
    if (t == source || dist[t] == kInf) continue;
    sum += dist[t];
    ++reached;
  }
  return {sum, reached};
}

}  // namespace

std::vector<double> local_clustering(const SemanticGraph& g) {
  const std::size_t n = g.n_nodes();
  // Undirected neighbor lists with multiplicity s_ij = a_ij + a_ji, no self-loops.
  std::vector<std::vector<std::pair<std::int32_t, int>>> nbr(n);
  {
    std::vector<std::map<std::int32_t, int>> acc(n);
    for (std::size_t s = 0; s < n; ++s)
      for (auto e = g.out_begin(s); e < g.out_end(s); ++e) {
        const auto t = g.targets()[e];
        if (static_cast<std::size_t>(t) == s) continue;
        ++acc[s][t];
        ++acc[static_cast<std::size_t>(t)][static_cast<std::int32_t>(s)];
      }
    for (std::size_t i = 0; i < n; ++i) nbr[i].assign(acc[i].begin(), acc[i].end());
  }

  std::vector<double> cc(n, 0.0);
  std::vector<int> mark(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t d_tot = 0, d_bi = 0;
    for (const auto& [j, s] : nbr[i]) {
      mark[static_cast<std::size_t>(j)] = s;
      d_tot += s;
      if (s == 2) ++d_bi;
    }
    std::int64_t closed = 0;
    for (const auto& [j, s_ij] : nbr[i])
      for (const auto& [h, s_jh] : nbr[static_cast<std::size_t>(j)]) closed += s_ij * s_jh * mark[static_cast<std::size_t>(h)];
    for (const auto& [j, _] : nbr[i]) mark[static_cast<std::size_t>(j)] = 0;
    const std::int64_t denom = 2 * (d_tot * (d_tot - 1) - 2 * d_bi);
    if (denom > 0) cc[i] = static_cast<double>(closed) / static_cast<double>(denom);
  }
  return cc;
}

NetworkMetrics network_metrics(const SemanticGraph& g, const MetricOptions& options) {
  if (g.n_nodes() == 0) throw DataError("network_metrics: empty graph");
  NetworkMetrics m;
  const std::size_t n = g.n_nodes();
  m.n_nodes = static_cast<std::int64_t>(n);
  m.n_edges = static_cast<std::int64_t>(g.n_edges());
  m.average_strength = 2.0 * static_cast<double>(g.total_weight()) / static_cast<double>(n);

  std::vector<double> sums(n, 0.0);
  std::vector<std::int64_t> counts(n, 0);
  const std::size_t workers = options.workers ? options.workers : default_workers();
  const std::size_t chunks = std::min(n, workers * 8);
  parallel_for(chunks, workers, [&](std::size_t c) {
    std::vector<double> dist(n);
    for (std::size_t s = c; s < n; s += chunks) std::tie(sums[s], counts[s]) = single_source(g, s, options.distance, dist);
  });
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    total += sums[s];
    m.reachable_pairs += counts[s];
  }
  m.unreachable_pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) - m.reachable_pairs;
  m.aspl_weighted_directed = m.reachable_pairs ? total / static_cast<double>(m.reachable_pairs) : 0.0;

  const auto cc = local_clustering(g);
  double cc_sum = 0.0;
  for (double c : cc) cc_sum += c;
  m.avg_cc_unweighted_directed = cc_sum / static_cast<double>(n);
  return m;
}

SemanticGraph random_baseline_graph(const SemanticGraph& g, std::uint64_t seed) {
  const auto n = static_cast<std::uint64_t>(g.n_nodes());
  const std::uint64_t possible = n > 1 ? n * (n - 1) : 0;
  const std::uint64_t m = std::min<std::uint64_t>(g.n_edges(), possible);
  Rng rng(derive_seed(seed, "random-baseline"));

  std::vector<std::uint64_t> codes;
  if (2 * m > possible) {
    codes.resize(possible);
    std::iota(codes.begin(), codes.end(), std::uint64_t{0});
    for (std::uint64_t i = 0; i < m; ++i) std::swap(codes[i], codes[i + rng.below(possible - i)]);
    codes.resize(m);
  } else {
    std::unordered_set<std::uint64_t> taken;
    taken.reserve(m * 2);
    while (codes.size() < m) {
      const auto c = rng.below(possible);
      if (taken.insert(c).second) codes.push_back(c);
    }
  }

  auto weights = g.weights();
  rng.shuffle(weights);
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto s = codes[i] / (n - 1);
    auto t = codes[i] % (n - 1);
    if (t >= s) ++t;
    edges.push_back({static_cast<std::int32_t>(s), static_cast<std::int32_t>(t), weights[i]});
  }
  return SemanticGraph(g.labels(), std::move(edges));
}

NetworkMetrics baseline_random(const SemanticGraph& g, std::uint64_t seed, const MetricOptions& options) {
  return network_metrics(random_baseline_graph(g, seed), options);
}

SemanticGraph lattice_baseline_graph(const SemanticGraph& g) {
  const auto n = static_cast<std::int64_t>(g.n_nodes());
  const auto m = static_cast<std::int64_t>(g.n_edges());
  std::vector<Edge> edges;
  if (n > 1 && m > 0) {
    const std::int64_t k = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::llround(static_cast<double>(m) / static_cast<double>(n))), 1, n - 1);
    auto weights = g.weights();
    std::sort(weights.begin(), weights.end(), std::greater<>());
    std::int64_t dealt = 0;
    for (std::int64_t r = 1; r <= k; ++r)
      for (std::int64_t i = 0; i < n; ++i)
        edges.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>((i + r) % n),
                         weights[static_cast<std::size_t>(dealt++ % m)]});
  }
  return SemanticGraph(g.labels(), std::move(edges));
}

NetworkMetrics baseline_lattice(const SemanticGraph& g, const MetricOptions& options) {
  return network_metrics(lattice_baseline_graph(g), options);
}

std::vector<std::int32_t> scc_labels(const SemanticGraph& g) {
  // Iterative Tarjan.
  const std::size_t n = g.n_nodes();
  std::vector<std::int32_t> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::int32_t> stack;
  std::vector<std::pair<std::int32_t, std::size_t>> call;  // node, next edge offset
  std::int32_t counter = 0, n_comp = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.emplace_back(static_cast<std::int32_t>(root), g.out_begin(root));
    index[root] = low[root] = counter++;
    stack.push_back(static_cast<std::int32_t>(root));
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, e] = call.back();
      const auto vi = static_cast<std::size_t>(v);
      if (e < g.out_end(vi)) {
        const auto w = static_cast<std::size_t>(g.targets()[e++]);
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(static_cast<std::int32_t>(w));
          on_stack[w] = true;
          call.emplace_back(static_cast<std::int32_t>(w), g.out_begin(w));
        } else if (on_stack[w]) {
          low[vi] = std::min(low[vi], index[w]);
        }
        continue;
      }
      if (low[vi] == index[vi]) {
        while (true) {
          const auto w = static_cast<std::size_t>(stack.back());
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = n_comp;
          if (w == vi) break;
        }
        ++n_comp;
      }
      const auto finished = vi;
      call.pop_back();
      if (!call.empty()) {
        const auto parent = static_cast<std::size_t>(call.back().first);
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

SemanticGraph strongly_connected_component(const SemanticGraph& g) {
  if (g.n_nodes() == 0) return g;
  const auto comp = scc_labels(g);
  std::unordered_map<std::int32_t, std::int64_t> size;
  std::unordered_map<std::int32_t, std::size_t> first;
  for (std::size_t i = 0; i < comp.size(); ++i) {
    ++size[comp[i]];
    first.try_emplace(comp[i], i);
  }
  std::int32_t best = comp[0];
  for (const auto& [c, s] : size)
    if (s > size[best] || (s == size[best] && first[c] < first[best])) best = c;
  std::vector<std::int32_t> nodes;
  for (std::size_t i = 0; i < comp.size(); ++i)
    if (comp[i] == best) nodes.push_back(static_cast<std::int32_t>(i));
  if (nodes.size() == g.n_nodes()) return g;
  return g.induced_subgraph(nodes);
}

int RandomWalkParams::steps() const {
  if (max_steps) return *max_steps;
  if (alpha <= 0.0) return 1;
  return static_cast<int>(std::floor(std::log(1e-12) / std::log(alpha))) + 1;
}

Eigen::MatrixXd random_walk_matrix(const SemanticGraph& g, const RandomWalkParams& params) {
  if (!(params.alpha >= 0.0 && params.alpha < 1.0))
    throw ConfigError("random walk: alpha must lie in [0, 1), got " + text::format_double(params.alpha));
  if (!params.closed_form && params.steps() < 1) throw ConfigError("random walk: max_steps must be >= 1");
  if (g.n_nodes() == 0 || g.n_edges() == 0) throw DataError("random walk: graph has no edges");

  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& e : g.edges()) triplets.emplace_back(e.source, e.target, static_cast<double>(e.weight));
  SparseReal w(n, n);
  w.setFromTriplets(triplets.begin(), triplets.end());
  SparseReal p = ppmi(w);
  for (Eigen::Index r = 0; r < p.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseReal::InnerIterator it(p, r); it; ++it) sum += it.value();
    if (sum > 0.0)
      for (SparseReal::InnerIterator it(p, r); it; ++it) it.valueRef() /= sum;
  }

  const Eigen::MatrixXd p_dense = Eigen::MatrixXd(p);
  if (params.alpha == 0.0) return p_dense;
  if (params.closed_form) {
    Eigen::MatrixXd lhs = -params.alpha * p_dense;
    lhs.diagonal().array() += 1.0;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(lhs).solve(p_dense);
  }
  // G = P + alpha P^2 + ... + alpha^(K-1) P^K
  Eigen::MatrixXd term = p_dense;
  Eigen::MatrixXd g_acc = p_dense;
  double scale = 1.0;
  for (int k = 2; k <= params.steps(); ++k) {
    term = p * term;
    scale *= params.alpha;
    g_acc += scale * term;
  }
  return g_acc;
}

SimilarityMatrix random_walk_relatedness(const SemanticGraph& graph, const RandomWalkParams& params) {
  const auto scc = strongly_connected_component(graph);
  const auto g = random_walk_matrix(scc, params);
  return cosine_matrix(scc.labels(), ppmi(g));
}

std::vector<TrialRecord> match_dataset(const std::vector<TrialRecord>& trials, std::int64_t n_cues,
                                       std::int64_t n_trials_per_cue, std::uint64_t seed) {
  if (n_cues < 1 || n_trials_per_cue < 1) throw ConfigError("match: n_cues and n_trials_per_cue must be >= 1");
  std::unordered_map<std::string, std::int64_t> response_freq;
  std::map<std::string, std::vector<std::size_t>> by_cue;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    by_cue[trials[i].cue].push_back(i);
    for (const auto& slot : trials[i].responses)
      if (slot.is_response()) ++response_freq[slot.raw_text];
  }
  std::vector<std::pair<std::int64_t, std::string>> eligible;
  for (const auto& [cue, idx] : by_cue) {
    if (static_cast<std::int64_t>(idx.size()) < n_trials_per_cue) continue;
    const auto it = response_freq.find(cue);
    eligible.emplace_back(it == response_freq.end() ? 0 : it->second, cue);
  }
  if (static_cast<std::int64_t>(eligible.size()) < n_cues)
    throw DataError("match: requested " + std::to_string(n_cues) + " cues with >= " + std::to_string(n_trials_per_cue) +
                    " trials, only " + std::to_string(eligible.size()) + " available (shortfall " +
                    std::to_string(n_cues - static_cast<std::int64_t>(eligible.size())) + ")");
  std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  std::vector<bool> keep(trials.size(), false);
  for (std::int64_t c = 0; c < n_cues; ++c) {
    const auto& cue = eligible[static_cast<std::size_t>(c)].second;
    const auto& idx = by_cue[cue];
    Rng rng(derive_seed(seed, cue));
    for (auto j : rng.sample_indices(idx.size(), static_cast<std::size_t>(n_trials_per_cue))) keep[idx[j]] = true;
  }
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < trials.size(); ++i)
    if (keep[i]) out.push_back(trials[i]);
  return out;
}

void write_edges(std::ostream& out, const SemanticGraph& g) {
  for (const auto& e : g.edges())
    out << g.labels()[static_cast<std::size_t>(e.source)] << '\t' << g.labels()[static_cast<std::size_t>(e.target)]
        << '\t' << e.weight << '\n';
}

SemanticGraph read_edges(std::istream& in) {
  std::vector<std::tuple<std::string, std::string, std::int64_t>> raw;
  std::map<std::string, std::int32_t> nodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = text::split(line, '\t');
    std::int64_t w = 0;
    if (cells.size() != 3 ||
        std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), w).ptr != cells[2].data() + cells[2].size() ||
        w <= 0)
      throw DataError("edge list line " + std::to_string(lineno) + ": expected source<TAB>target<TAB>positive weight");
    nodes.emplace(cells[0], 0);
    nodes.emplace(cells[1], 0);
    raw.emplace_back(cells[0], cells[1], w);
  }
  std::vector<std::string> labels;
  for (auto& [label, idx] : nodes) {
    idx = static_cast<std::int32_t>(labels.size());
    labels.push_back(label);
  }
  std::vector<Edge> edges;
  for (const auto& [s, t, w] : raw) edges.push_back({nodes.at(s), nodes.at(t), w});
  return SemanticGraph(std::move(labels), std::move(edges));
}

SemanticGraph read_edges(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open edge list " + path.string());
  return read_edges(in);
}

}  // namespace assoc
