#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "assoc/error.hpp"
#include "assoc/rng.hpp"
#include "assoc/semnet.hpp"
#include "oracles.hpp"

using namespace assoc;

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("n" + std::to_string(i));
  return v;
}

SemanticGraph graph(std::size_t n, std::vector<Edge> edges) { return SemanticGraph(names(n), std::move(edges)); }

SemanticGraph random_graph(Rng& rng, std::size_t n, double density) {
  std::vector<Edge> edges;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < n; ++t)
      if (s != t && rng.uniform() < density)
        edges.push_back({static_cast<std::int32_t>(s), static_cast<std::int32_t>(t), static_cast<std::int64_t>(1 + rng.below(9))});
  return graph(n, edges);
}

TrialRecord trial(const std::string& cue, std::array<const char*, 3> r, const std::string& pid = "p") {
  TrialRecord t;
  t.participant_id = pid;
  t.cue = cue;
  for (std::size_t k = 0; k < 3; ++k) {
    t.responses[k].position = static_cast<Position>(k);
    if (r[k]) t.responses[k] = {r[k], Marker::response, static_cast<Position>(k)};
  }
  return t;
}

}  // namespace

TEST_SUITE("semnet") {
  TEST_CASE("graph construction keeps only cue responses") {
    const auto m = build_count_matrix({trial("A", {"B", "x", nullptr}), trial("A", {"B", nullptr, nullptr}),
                                       trial("A", {"B", nullptr, nullptr}), trial("B", {"y", nullptr, nullptr})});
    const auto g = build_graph(m);
    CHECK(g.n_nodes() == 2);
    REQUIRE(g.n_edges() == 1);
    CHECK(g.edges()[0] == Edge{0, 1, 3});
    const auto none = build_graph(build_count_matrix({trial("A", {"x", nullptr, nullptr})}));
    CHECK(none.n_edges() == 0);
  }

  TEST_CASE("parallel edges merge and invalid weights are rejected") {
    const auto g = graph(2, {{0, 1, 2}, {0, 1, 3}});
    CHECK(g.n_edges() == 1);
    CHECK(g.weight(0, 1) == 5);
    CHECK_FALSE(g.weight(1, 0).has_value());
    CHECK_THROWS(graph(2, {{0, 1, 0}}));
    CHECK_THROWS(graph(2, {{0, 2, 1}}));
  }

  TEST_CASE("hand-computed metric anchors") {
    const auto cycle = network_metrics(graph(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}}));
    CHECK(cycle.aspl_weighted_directed == doctest::Approx(1.5));
    CHECK(cycle.n_edges == 3);
    CHECK(cycle.average_strength == doctest::Approx(2.0));

    std::vector<Edge> triad;
    for (int s = 0; s < 3; ++s)
      for (int t = 0; t < 3; ++t)
        if (s != t) triad.push_back({s, t, 1});
    CHECK(network_metrics(graph(3, triad)).avg_cc_unweighted_directed == doctest::Approx(1.0));

    std::vector<Edge> ring;
    for (int i = 0; i < 6; ++i) ring.push_back({i, (i + 1) % 6, 1});
    CHECK(network_metrics(graph(6, ring)).aspl_weighted_directed == doctest::Approx(3.0));
    CHECK_THROWS_AS(network_metrics(SemanticGraph{}), DataError);
  }

  TEST_CASE("metrics match brute-force oracles on random graphs") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
      const auto g = random_graph(rng, 5 + rng.below(20), 0.05 + 0.3 * rng.uniform());
      if (g.n_edges() == 0) continue;
      const Eigen::MatrixXd w = g.dense_weights();
      for (bool inverse : {true, false}) {
        MetricOptions opt;
        opt.distance = inverse ? DistanceConvention::inverse_weight : DistanceConvention::weight;
        const auto m = network_metrics(g, opt);
        const auto ref = oracle::all_pairs(w, inverse);
        CHECK(m.reachable_pairs == ref.reachable);
        CHECK(std::abs(m.aspl_weighted_directed - ref.aspl) <= 1e-12 * std::max(1.0, ref.aspl));
      }
      const auto cc = local_clustering(g);
      const auto ref_cc = oracle::clustering(w);
      for (std::size_t i = 0; i < cc.size(); ++i) CHECK(std::abs(cc[i] - ref_cc[i]) <= 1e-12);
    }
  }

  TEST_CASE("scaling weights rescales distances inversely") {
    Rng rng(5);
    const auto g = random_graph(rng, 12, 0.3);
    auto edges = g.edges();
    for (auto& e : edges) e.weight *= 3;
    const auto scaled = SemanticGraph(g.labels(), edges);
    const auto a = network_metrics(g), b = network_metrics(scaled);
    CHECK(b.aspl_weighted_directed == doctest::Approx(a.aspl_weighted_directed / 3.0).epsilon(1e-12));
    CHECK(b.avg_cc_unweighted_directed == a.avg_cc_unweighted_directed);
    CHECK(b.average_strength == doctest::Approx(3.0 * a.average_strength));
  }

  TEST_CASE("random baseline") {
    Rng rng(9);
    const auto g = random_graph(rng, 30, 0.1);
    const auto r = random_baseline_graph(g, 4);
    CHECK(r.n_nodes() == g.n_nodes());
    CHECK(r.n_edges() == g.n_edges());
    CHECK(r.total_weight() == g.total_weight());
    for (const auto& e : r.edges()) CHECK(e.source != e.target);
    CHECK(random_baseline_graph(g, 4).edges() == r.edges());
    CHECK(baseline_random(g, 4).aspl_weighted_directed == baseline_random(g, 4).aspl_weighted_directed);

    std::vector<Edge> complete;
    for (int s = 0; s < 10; ++s)
      for (int t = 0; t < 10; ++t)
        if (s != t) complete.push_back({s, t, 1 + s});
    for (std::uint64_t seed : {1, 2, 3})
      CHECK(baseline_random(graph(10, complete), seed).avg_cc_unweighted_directed == doctest::Approx(1.0));
  }

  TEST_CASE("lattice baseline") {
    std::vector<Edge> ring;
    for (int i = 0; i < 6; ++i) ring.push_back({i, (i + 3) % 6, 1});
    const auto lat = lattice_baseline_graph(graph(6, ring));
    CHECK(lat.n_edges() == 6);
    CHECK(network_metrics(lat).aspl_weighted_directed == doctest::Approx(3.0));

    std::vector<Edge> complete;
    for (int s = 0; s < 5; ++s)
      for (int t = 0; t < 5; ++t)
        if (s != t) complete.push_back({s, t, 1});
    CHECK(baseline_lattice(graph(5, complete)).aspl_weighted_directed == doctest::Approx(1.0));

    Rng rng(2);
    const auto g = random_graph(rng, 20, 0.2);
    const auto l = lattice_baseline_graph(g);
    CHECK(l.n_nodes() == g.n_nodes());
    for (std::size_t i = 0; i < l.n_nodes(); ++i) CHECK(l.out_end(i) - l.out_begin(i) == l.out_end(0) - l.out_begin(0));
  }

  TEST_CASE("strongly connected components") {
    const auto dangling = strongly_connected_component(graph(3, {{0, 1, 1}, {1, 0, 1}, {1, 2, 1}}));
    CHECK(dangling.n_nodes() == 2);
    CHECK(dangling.labels() == std::vector<std::string>{"n0", "n1"});

    std::vector<Edge> complete;
    for (int s = 0; s < 4; ++s)
      for (int t = 0; t < 4; ++t)
        if (s != t) complete.push_back({s, t, 2});
    const auto full = graph(4, complete);
    CHECK(strongly_connected_component(full).edges() == full.edges());
    CHECK(strongly_connected_component(graph(3, {{0, 1, 1}, {1, 2, 1}})).n_nodes() == 1);

    Rng rng(8);
    const auto g = random_graph(rng, 25, 0.08);
    const auto scc = strongly_connected_component(g);
    CHECK(strongly_connected_component(scc).n_nodes() == scc.n_nodes());
    CHECK(network_metrics(scc).unreachable_pairs == 0);
  }

  TEST_CASE("random walk: alpha zero collapses to one step") {
    Rng rng(6);
    const auto g = strongly_connected_component(random_graph(rng, 10, 0.4));
    RandomWalkParams p;
    p.alpha = 0.0;
    const auto s = random_walk_relatedness(g, p);
    const Eigen::MatrixXd one_step = oracle::row_normalize(oracle::ppmi(g.dense_weights()));
    const Eigen::MatrixXd ref = oracle::row_cosines(oracle::ppmi(one_step));
    CHECK((s.values - ref).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("random walk: dense power oracle and closed form") {
    const auto cycle = graph(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
    RandomWalkParams p;
    p.alpha = 0.5;
    p.max_steps = 10;
    const Eigen::MatrixXd got = random_walk_matrix(cycle, p);
    const Eigen::MatrixXd pm = oracle::row_normalize(oracle::ppmi(cycle.dense_weights()));
    CHECK((got - oracle::walk_series(pm, 0.5, 10)).cwiseAbs().maxCoeff() <= 1e-10);

    Rng rng(12);
    const auto g = strongly_connected_component(random_graph(rng, 15, 0.3));
    RandomWalkParams series;
    RandomWalkParams closed;
    closed.closed_form = true;
    CHECK(std::pow(series.alpha, series.steps()) < 1e-12);
    CHECK((random_walk_matrix(g, series) - random_walk_matrix(g, closed)).cwiseAbs().maxCoeff() <= 1e-8);
  }

  TEST_CASE("random walk similarity is symmetric") {
    const auto s = random_walk_relatedness(graph(2, {{0, 1, 3}, {1, 0, 3}}), {});
    CHECK(s.values(0, 1) == s.values(1, 0));
    RandomWalkParams bad;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(random_walk_matrix(graph(2, {{0, 1, 1}}), bad), ConfigError);
  }

  TEST_CASE("matching picks the most frequent cues") {
    std::vector<TrialRecord> trials;
    // Response frequencies: c0 appears 5x, c1 4x, c2 3x ... as responses.
    for (int c = 0; c < 10; ++c)
      for (int k = 0; k < 4; ++k) trials.push_back(trial("c" + std::to_string(c), {"x", nullptr, nullptr}, "p" + std::to_string(k)));
    const char* ranked[] = {"c3", "c7", "c1"};
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 5 - r; ++k) trials.push_back(trial("c9", {ranked[r], nullptr, nullptr}, "q" + std::to_string(k)));
    const auto m = match_dataset(trials, 3, 4, 1);
    std::set<std::string> cues;
    for (const auto& t : m) cues.insert(t.cue);
    CHECK(cues == std::set<std::string>{"c1", "c3", "c7"});
    CHECK(m.size() == 12);
    CHECK_THROWS_AS(match_dataset(trials, 11, 4, 1), DataError);
  }

  TEST_CASE("edge list round trip") {
    Rng rng(14);
    const auto g = random_graph(rng, 12, 0.3);
    std::ostringstream out;
    write_edges(out, g);
    std::istringstream in(out.str());
    const auto back = read_edges(in);
    std::ostringstream again;
    write_edges(again, back);
    auto lines = [](const std::string& s) {
      std::multiset<std::string> l;
      std::istringstream is(s);
      for (std::string x; std::getline(is, x);) l.insert(x);
      return l;
    };
    CHECK(lines(again.str()) == lines(out.str()));
    std::istringstream bad("a\tb\t0\n");
    CHECK_THROWS_AS(read_edges(bad), DataError);
  }

  TEST_CASE("20-node fixture matches the golden metrics") {
    const auto g = read_edges(std::filesystem::path(ASSOC_TEST_DATA) / "graph20.tsv");
    std::ifstream in(std::filesystem::path(ASSOC_TEST_DATA) / "graph20_metrics.json");
    const auto golden = nlohmann::json::parse(in);
    const auto m = network_metrics(g);
    CHECK(m.n_nodes == golden["n_nodes"].get<std::int64_t>());
    CHECK(m.n_edges == golden["n_edges"].get<std::int64_t>());
    CHECK(m.reachable_pairs == golden["reachable_pairs"].get<std::int64_t>());
    CHECK(m.average_strength == doctest::Approx(golden["average_strength"].get<double>()).epsilon(1e-12));
    CHECK(m.aspl_weighted_directed == doctest::Approx(golden["aspl_weighted_directed"].get<double>()).epsilon(1e-12));
    CHECK(m.avg_cc_unweighted_directed == doctest::Approx(golden["avg_cc_unweighted_directed"].get<double>()).epsilon(1e-12));
  }
}
