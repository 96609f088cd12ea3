#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = ASSOC_TEST_DATA;

struct Run {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("assocnorms-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const auto err = fs::temp_directory_path() / ("assocnorms-cli-stderr-" + std::to_string(::getpid()));
  const std::string cmd = std::string("\"") + ASSOCNORMS_BIN + "\" " + args + " 2>\"" + err.string() + "\" >/dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("balance is byte-identical for the same seed") {
    const auto a = scratch("bal-a"), b = scratch("bal-b"), c = scratch("bal-c");
    const auto in = q(kData / "trials_small.tsv");
    REQUIRE(run("--out " + q(a) + " --seed 7 balance --input " + in + " --min-trials 5 --sample-size 5").code == 0);
    REQUIRE(run("--out " + q(b) + " --seed 7 balance --input " + in + " --min-trials 5 --sample-size 5").code == 0);
    REQUIRE(run("--out " + q(c) + " --seed 8 balance --input " + in + " --min-trials 5 --sample-size 5").code == 0);
    CHECK(slurp(a / "trials.balanced.tsv") == slurp(b / "trials.balanced.tsv"));
    CHECK(slurp(a / "balance.manifest.json") == slurp(b / "balance.manifest.json"));
    CHECK(slurp(a / "trials.balanced.tsv") != slurp(c / "trials.balanced.tsv"));
    const auto m = json::parse(slurp(a / "balance.manifest.json"));
    CHECK(m["seed"] == 7);
    CHECK(m["schema"] == "assocnorms-manifest/1");
    CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);
  }

  TEST_CASE("graph metrics match the networkx golden file") {
    const auto out = scratch("graph20");
    REQUIRE(run("--out " + q(out) + " graph --edges " + q(kData / "graph20.tsv") + " --metrics").code == 0);
    const auto got = json::parse(slurp(out / "metrics.json"))["graph"];
    const auto want = json::parse(slurp(kData / "graph20_metrics.json"));
    for (const auto& key : {"n_nodes", "n_edges", "reachable_pairs", "unreachable_pairs"}) CHECK(got[key] == want[key]);
    for (const auto& key : {"aspl_weighted_directed", "average_strength", "avg_cc_unweighted_directed"})
      CHECK(std::abs(got[key].get<double>() - want[key].get<double>()) <= 1e-9);
  }

  TEST_CASE("missing upstream artifact is a config error naming it") {
    const auto out = scratch("ldt");
    const auto r = run("--out " + q(out) + " eval-ldt --corpus-frequency x.tsv --ldt y.tsv");
    CHECK(r.code == 2);
    const auto e = json::parse(r.err);
    CHECK(e["exit_code"] == 2);
    CHECK(e["message"].get<std::string>().find("frequency.tsv") != std::string::npos);
  }

  TEST_CASE("exit codes") {
    const auto out = scratch("codes");
    CHECK(run("--out " + q(out) + " ingest").code == 2);
    CHECK(run("--out " + q(out) + " nosuchcommand").code == 2);
    const auto bad = out.string() + "-bad.tsv";
    std::ofstream(bad) << "participant_id\tcue\n";
    CHECK(run("--out " + q(out) + " ingest --input " + q(bad)).code == 3);
    fs::create_directories(out);
    std::ofstream(out / ".assocnorms.lock") << "";
    CHECK(run("--out " + q(out) + " ingest --input " + q(kData / "trials_small.tsv")).code == 2);
  }

  TEST_CASE("stages compose through their artifacts") {
    const auto out = scratch("pipe");
    const auto o = "--out " + q(out) + " --seed 3 ";
    REQUIRE(run(o + "ingest --input " + q(kData / "trials_small.tsv")).code == 0);
    REQUIRE(run(o + "filter --input " + q(out / "trials.tsv") + " --lexicon " + q(kData / "lexicon_small.txt")).code == 0);
    REQUIRE(run(o + "whitelist --no-wiki --no-llm --input " + q(out / "trials.filtered.tsv") + " --lexicon " +
                q(kData / "lexicon_small.txt"))
                .code == 0);
    REQUIRE(run(o + "balance --min-trials 5 --sample-size 5 --input " + q(out / "trials.normalized.tsv")).code == 0);
    REQUIRE(run(o + "stats --input " + q(out / "trials.balanced.tsv")).code == 0);
    REQUIRE(run(o + "matrix --transform raw --input " + q(out / "trials.balanced.tsv")).code == 0);
    REQUIRE(run(o + "graph --metrics --baselines --counts " + q(out / "counts.tsv")).code == 0);
    REQUIRE(run(o + "matrix --transform svd --k 3 --input " + q(out / "trials.balanced.tsv")).code == 0);
    for (const auto* f : {"trials.tsv", "filter_report.json", "whitelist_report.json", "stats.json", "frequency.tsv",
                          "counts.tsv", "edges.tsv", "metrics.json", "embedding.svd.txt", "matrix.manifest.json"})
      CHECK_MESSAGE(fs::exists(out / f), f);
    const auto filter = json::parse(slurp(out / "filter_report.json"));
    CHECK(filter["total_participants"] == 12);
    const auto metrics = json::parse(slurp(out / "metrics.json"));
    CHECK(metrics["graph"]["n_nodes"].get<int>() > 0);
    CHECK(metrics.contains("random"));
    REQUIRE(run(o + "report").code == 0);
    const auto table = slurp(out / "network_metrics.csv");
    CHECK(table.rfind("network,graph,nodes,edges,average_strength,aspl,avg_cc\n", 0) == 0);
    CHECK(table.find("network,lattice,") != std::string::npos);
    CHECK_FALSE(fs::exists(out / ".assocnorms.lock"));
  }
}
