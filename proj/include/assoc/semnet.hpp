#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "assoc/ingest.hpp"
#include "assoc/matrix.hpp"

namespace assoc {

struct Edge {
  std::int32_t source = 0;
  std::int32_t target = 0;
  std::int64_t weight = 0;
  bool operator==(const Edge&) const = default;
};

// Directed weighted cue-cue graph in compressed adjacency form. Edges of a
// source are sorted by target; there is at most one edge per ordered pair.
class SemanticGraph {
 public:
  SemanticGraph() = default;
  // Parallel edges are merged by summing weights. Weights must be positive.
  SemanticGraph(std::vector<std::string> labels, std::vector<Edge> edges);

  std::size_t n_nodes() const { return labels_.size(); }
  std::size_t n_edges() const { return targets_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Out-neighbors of `node` as [begin, end) offsets into targets()/weights().
  std::size_t out_begin(std::size_t node) const { return offsets_[node]; }
  std::size_t out_end(std::size_t node) const { return offsets_[node + 1]; }
  const std::vector<std::int32_t>& targets() const { return targets_; }
  const std::vector<std::int64_t>& weights() const { return weights_; }

  std::vector<Edge> edges() const;
  std::int64_t total_weight() const;
  std::optional<std::int64_t> weight(std::size_t source, std::size_t target) const;

  SemanticGraph induced_subgraph(const std::vector<std::int32_t>& nodes) const;

  // Row-major dense weight matrix.
  Eigen::MatrixXd dense_weights() const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::int32_t> targets_;
  std::vector<std::int64_t> weights_;
};

// Edge c -> c' with weight n(c, c') for every response type c' that is also a cue.
SemanticGraph build_graph(const CueResponseMatrix& matrix);

enum class DistanceConvention {
  inverse_weight,  // distance = 1 / weight
  weight,          // distance = weight
};

struct NetworkMetrics {
  std::int64_t n_nodes = 0;
  std::int64_t n_edges = 0;
  double average_strength = 0.0;  // mean of in-strength + out-strength
  double aspl_weighted_directed = 0.0;
  std::int64_t reachable_pairs = 0;  // ordered pairs (s != t) with a path
  std::int64_t unreachable_pairs = 0;
  double avg_cc_unweighted_directed = 0.0;
};

struct MetricOptions {
  DistanceConvention distance = DistanceConvention::inverse_weight;
  std::size_t workers = 0;  // 0: hardware concurrency
};

// ASPL averages over reachable ordered pairs. Clustering is the directed
// all-triangle coefficient (A + A^T)^3_ii / (2 [d_tot (d_tot - 1) - 2 d_bi]),
// self-loops ignored, nodes with an empty denominator contributing 0.
NetworkMetrics network_metrics(const SemanticGraph& graph, const MetricOptions& options = {});

std::vector<double> local_clustering(const SemanticGraph& graph);

// Uniform random directed graph with the node and edge count of `graph`
// (no self-loops) and a random permutation of its weights.
SemanticGraph random_baseline_graph(const SemanticGraph& graph, std::uint64_t seed);
NetworkMetrics baseline_random(const SemanticGraph& graph, std::uint64_t seed, const MetricOptions& options = {});

// Directed ring lattice: node i links to its round(m/n) clockwise successors.
// Weights sorted in descending order are dealt round-robin, successor rank
// by successor rank, cycling if the lattice has more edges than the graph.
SemanticGraph lattice_baseline_graph(const SemanticGraph& graph);
NetworkMetrics baseline_lattice(const SemanticGraph& graph, const MetricOptions& options = {});

// Largest strongly connected component; ties go to the component holding
// the lowest node index. Node order is preserved.
SemanticGraph strongly_connected_component(const SemanticGraph& graph);
std::vector<std::int32_t> scc_labels(const SemanticGraph& graph);

struct RandomWalkParams {
  double alpha = 0.75;
  std::optional<int> max_steps;  // default: smallest K with alpha^K < 1e-12
  bool closed_form = false;

  int steps() const;
};

// PPMI-weight the component's adjacency, row-normalize to P, accumulate
// G = sum_{k=1..K} alpha^(k-1) P^k (or (I - alpha P)^-1 P), apply PPMI to G,
// then take row cosines.
SimilarityMatrix random_walk_relatedness(const SemanticGraph& graph, const RandomWalkParams& params);

// The inference matrix G before the final PPMI, over the graph as given.
Eigen::MatrixXd random_walk_matrix(const SemanticGraph& graph, const RandomWalkParams& params);

// Picks the n_cues cues most frequent among all responses of `trials`
// (ties by label) that have at least n_trials_per_cue trials, and samples
// that many trials of each.
std::vector<TrialRecord> match_dataset(const std::vector<TrialRecord>& trials, std::int64_t n_cues,
                                       std::int64_t n_trials_per_cue, std::uint64_t seed);

void write_edges(std::ostream& out, const SemanticGraph& graph);
SemanticGraph read_edges(std::istream& in);
SemanticGraph read_edges(const std::filesystem::path& path);

}  // namespace assoc
