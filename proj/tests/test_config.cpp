#include <doctest.h>

#include "assoc/config.hpp"
#include "assoc/error.hpp"

using namespace assoc;

TEST_SUITE("config") {
  TEST_CASE("key value parsing") {
    const auto f = KeyValueFile::parse(
        "# pipeline\n"
        "seed = 7\n"
        "rw.alpha = 0.5   # decay\n"
        "lexicon = \"data/lex#1.txt\"\n"
        "llm.enabled = true\n"
        "eval.lambda_grid = [0.1, 1, 10]\n");
    CHECK(f.get_int("seed") == 7);
    CHECK(f.get_double("rw.alpha") == 0.5);
    CHECK(f.get_string("lexicon") == "data/lex#1.txt");
    CHECK(f.get_bool("llm.enabled") == true);
    CHECK(f.get_doubles("eval.lambda_grid") == std::vector<double>{0.1, 1, 10});
    CHECK_FALSE(f.get_int("missing").has_value());
    CHECK_THROWS_AS(f.get_int("lexicon"), ConfigError);
    CHECK_THROWS_AS(f.get_string("seed"), ConfigError);
  }

  TEST_CASE("malformed files are config errors") {
    CHECK_THROWS_AS(KeyValueFile::parse("seed 7\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse("seed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse("x = \"open\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse("bad key = 1\n"), ConfigError);
  }

  TEST_CASE("pipeline config overlay, unknown keys, hashing") {
    PipelineConfig c;
    const auto base_hash = c.hash();
    c.apply(KeyValueFile::parse("balance.sample_size = 40\nseed = 3\ngraph.distance = \"weight\"\n"));
    CHECK(c.sample_size == 40);
    CHECK(c.seed == 3);
    CHECK(c.distance == "weight");
    CHECK(c.hash() != base_hash);
    PipelineConfig d;
    d.apply(KeyValueFile::parse("seed = 3\nbalance.sample_size = 40\ngraph.distance = \"weight\"\n"));
    CHECK(d.hash() == c.hash());
    d.out = "elsewhere";
    d.llm_api_key = "secret";
    CHECK(d.hash() == c.hash());
    CHECK(d.canonical().find("secret") == std::string::npos);
    CHECK_THROWS_AS(c.apply(KeyValueFile::parse("sede = 3\n")), ConfigError);
    CHECK_THROWS_AS(c.apply(KeyValueFile::parse("graph.distance = \"hops\"\n")), ConfigError);
    CHECK_THROWS_AS(c.apply(KeyValueFile::parse("seed = -1\n")), ConfigError);
  }
}
