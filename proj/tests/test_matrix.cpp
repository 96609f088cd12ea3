#include <doctest.h>

#include <cmath>
#include <sstream>

#include "assoc/error.hpp"
#include "assoc/matrix.hpp"
#include "assoc/rng.hpp"
#include "oracles.hpp"

using namespace assoc;

namespace {

TrialRecord trial(const std::string& cue, std::array<const char*, 3> r) {
  TrialRecord t;
  t.participant_id = "p";
  t.cue = cue;
  for (std::size_t k = 0; k < 3; ++k) {
    t.responses[k].position = static_cast<Position>(k);
    if (r[k]) t.responses[k] = {r[k], Marker::response, static_cast<Position>(k)};
  }
  return t;
}

SparseReal sparse(const Eigen::MatrixXd& d) { return d.sparseView(); }

Embedding embedding(std::vector<std::string> labels, Eigen::MatrixXd values) { return {std::move(labels), std::move(values)}; }

}  // namespace

TEST_SUITE("matrix") {
  TEST_CASE("count matrix from two trials") {
    const auto m = build_count_matrix({trial("Kälte", {"Winter", "Nässe", "Eis"}), trial("Kälte", {"Winter", "Schnee", nullptr})});
    REQUIRE(m.cue_labels == std::vector<std::string>{"Kälte"});
    REQUIRE(m.response_labels == std::vector<std::string>{"Eis", "Nässe", "Schnee", "Winter"});
    CHECK(m.counts.coeff(0, 3) == 2);
    CHECK(m.counts.coeff(0, 0) == 1);
    CHECK(m.counts.coeff(0, 1) == 1);
    CHECK(m.counts.coeff(0, 2) == 1);
    CHECK(m.total() == 5);
    CHECK_THROWS_AS(build_count_matrix({}), DataError);
  }

  TEST_CASE("frequency threshold drops rare response types") {
    const auto m = build_count_matrix({trial("a", {"x", "y", nullptr}), trial("b", {"x", nullptr, nullptr})}, 2);
    CHECK(m.response_labels == std::vector<std::string>{"x"});
    CHECK(m.cue_labels.size() == 2);
  }

  TEST_CASE("frequency vector") {
    CueResponseMatrix m;
    m.cue_labels = {"a", "b"};
    m.response_labels = {"x", "y"};
    Eigen::MatrixXd d(2, 2);
    d << 2, 0, 1, 3;
    m.counts = d.cast<std::int64_t>().sparseView();
    CHECK(frequency_vector(m).totals == std::vector<std::int64_t>{3, 3});
  }

  TEST_CASE("ppmi hand examples") {
    Eigen::MatrixXd d(2, 2);
    d << 2, 0, 0, 2;
    const Eigen::MatrixXd p = ppmi(d);
    CHECK(p(0, 0) == doctest::Approx(1.0));
    CHECK(p(0, 1) == 0.0);
    CHECK(p(1, 1) == doctest::Approx(1.0));
    CHECK(ppmi(Eigen::MatrixXd::Constant(3, 4, 5.0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(ppmi(Eigen::MatrixXd::Zero(2, 2)), DataError);
  }

  TEST_CASE("sparse ppmi equals the dense oracle") {
    Rng rng(42);
    for (int rep = 0; rep < 20; ++rep) {
      const auto d = oracle::random_counts(rng, 8, 8);
      if (d.sum() == 0.0) continue;
      const Eigen::MatrixXd s = Eigen::MatrixXd(ppmi(sparse(d)));
      CHECK((s - oracle::ppmi(d)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((ppmi(d) - oracle::ppmi(d)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("svd of the identity") {
    const auto r = randomized_svd(sparse(Eigen::MatrixXd::Identity(5, 5)), 5);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(r.singular_values[i] == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("svd recovers a rank-one matrix") {
    Rng rng(7);
    Eigen::VectorXd u(12), v(9);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    const Eigen::MatrixXd m = u * v.transpose();
    const auto r = randomized_svd(sparse(m), 1);
    const Eigen::MatrixXd rec = r.u * r.singular_values.asDiagonal() * r.v.transpose();
    CHECK((rec - m).norm() <= 1e-8);
  }

  TEST_CASE("svd of random 20x30 matches the dense oracle") {
    Rng rng(11);
    Eigen::MatrixXd m(20, 30);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    const auto r = randomized_svd(sparse(m), 20);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.transpose() * m);
    Eigen::VectorXd ev = eig.eigenvalues().reverse().head(20).cwiseMax(0.0).cwiseSqrt();
    CHECK((r.singular_values - ev).cwiseAbs().maxCoeff() <= 1e-8);
    const Eigen::MatrixXd rec = r.u * r.singular_values.asDiagonal() * r.v.transpose();
    CHECK((rec - m).norm() <= 1e-8);
    CHECK((r.u.transpose() * r.u - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("svd is deterministic and sign-canonical") {
    Rng rng(13);
    const auto d = oracle::random_counts(rng, 15, 25, 0.3);
    const auto a = randomized_svd(sparse(d), 5, {10, 4, 99});
    const auto b = randomized_svd(sparse(d), 5, {10, 4, 99});
    CHECK(a.u == b.u);
    CHECK(a.singular_values == b.singular_values);
    for (Eigen::Index j = 0; j < a.u.cols(); ++j) {
      Eigen::Index idx = 0;
      a.u.col(j).cwiseAbs().maxCoeff(&idx);
      CHECK(a.u(idx, j) > 0.0);
    }
    CHECK_THROWS_AS(randomized_svd(sparse(d), 0), ConfigError);
    CHECK_THROWS_AS(randomized_svd(sparse(d), 16), ConfigError);
  }

  TEST_CASE("cosine similarity") {
    const std::vector<double> a{1, 2, 3}, x{1, 0}, y{0, 1}, xy{1, 1}, z{0, 0};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(x, y) == 0.0);
    CHECK(cosine_similarity(x, xy) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(cosine_similarity(x, z) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(a, x), DataError);
  }

  TEST_CASE("cosine matrix invariants") {
    Rng rng(17);
    Eigen::MatrixXd rows(6, 4);
    for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = rng.normal();
    rows.row(5).setZero();
    const auto s = cosine_matrix({"a", "b", "c", "d", "e", "f"}, rows);
    CHECK((s.values - s.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.values.maxCoeff() <= 1.0);
    CHECK(s.values.minCoeff() >= -1.0);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(s.values(i, i) == 1.0);
    CHECK(s.values(5, 5) == 0.0);
  }

  TEST_CASE("l2 normalization") {
    Eigen::MatrixXd v(3, 2);
    v << 3, 4, 0, 0, 1, 0;
    const auto n = l2_normalize(embedding({"a", "b", "c"}, v));
    CHECK(n.values(0, 0) == doctest::Approx(0.6));
    CHECK(n.values(0, 1) == doctest::Approx(0.8));
    CHECK(n.values.row(1).norm() == 0.0);
    CHECK(n.values.row(2) == v.row(2));
    CHECK(l2_normalize(n).values == n.values);
  }

  TEST_CASE("concatenation") {
    Eigen::MatrixXd a(2, 3), b(2, 3);
    a << 1, 0, 0, 0, 1, 0;
    b << 0, 0, 1, 0, 1, 0;
    const auto c = concat_embeddings(embedding({"x", "y"}, a), embedding({"y", "z"}, b));
    CHECK(c.row_labels == std::vector<std::string>{"y"});
    CHECK(c.dims() == 6);
    CHECK(c.values.row(0).norm() == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(concat_embeddings(embedding({"x"}, a.topRows(1)), embedding({"q"}, b.topRows(1))), DataError);
    Eigen::MatrixXd big = Eigen::MatrixXd::Constant(1, 3, 2.0);
    CHECK_THROWS(concat_embeddings(embedding({"x"}, big), embedding({"x"}, big)));
  }

  TEST_CASE("embedding text format") {
    std::istringstream two("2 3\nHaus 1 2 3\nBaum 4 5 6\n");
    const auto e = read_embedding(two);
    CHECK(e.row_labels == std::vector<std::string>{"Haus", "Baum"});
    CHECK(e.values(1, 2) == 6.0);
    std::ostringstream out;
    write_embedding(out, e);
    std::istringstream back(out.str());
    const auto e2 = read_embedding(back);
    CHECK(e2.values == e.values);
    CHECK(e2.row_labels == e.row_labels);

    std::istringstream bad("2 3\nHaus 1 2\nBaum 4 5 6\n");
    CHECK_THROWS_AS(read_embedding(bad), DataError);

    std::istringstream dup("2 2\nHaus 1 2\nHaus 3 4\n");
    std::vector<std::string> warnings;
    const auto d = read_embedding(dup, &warnings);
    CHECK(d.row_labels.size() == 1);
    CHECK(d.values(0, 0) == 3.0);
    CHECK(warnings.size() == 1);
  }

  TEST_CASE("count triplets round trip") {
    const auto m = build_count_matrix({trial("Kälte", {"Winter", "Nässe", "Eis"}), trial("Haus", {"Dach", "Winter", nullptr})});
    std::ostringstream out;
    write_triplets(out, m);
    std::istringstream in(out.str());
    const auto r = read_count_triplets(in);
    CHECK(r.cue_labels == m.cue_labels);
    CHECK(r.response_labels == m.response_labels);
    CHECK(Eigen::MatrixXd(r.counts.cast<double>()) == Eigen::MatrixXd(m.counts.cast<double>()));
  }
}
