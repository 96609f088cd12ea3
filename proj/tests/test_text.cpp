#include <doctest.h>

#include <set>

#include "assoc/rng.hpp"
#include "assoc/text.hpp"

using namespace assoc;

TEST_SUITE("text") {
  TEST_CASE("clean_text strips punctuation and collapses whitespace") {
    CHECK(text::clean_text("  Nässe!! ") == "Nässe");
    CHECK(text::clean_text("Winter") == "Winter");
    CHECK(text::clean_text("a\t b") == "a b");
    CHECK(text::clean_text("\"Haus\"") == "Haus");
    CHECK(text::clean_text("Rock'n'Roll") == "Rock'n'Roll");
    CHECK(text::clean_text("E-Mail  ") == "E-Mail");
    CHECK(text::clean_text("...") == "");
    CHECK(text::clean_text("") == "");
  }

  TEST_CASE("clean_text is idempotent") {
    for (const char* s : {"  Nässe!! ", "a\t b", "Straße,", "x  y   z", "ÄÖÜ?!", "日本 語"}) {
      const auto once = text::clean_text(s);
      CHECK(text::clean_text(once) == once);
    }
  }

  TEST_CASE("case mapping covers German letters") {
    CHECK(text::lowercase("ÄÖÜ STRASSE") == "äöü strasse");
    CHECK(text::capitalize("äpfel") == "Äpfel");
    CHECK(text::capitalize("HAUS") == "Haus");
    CHECK(text::lowercase("ẞ") == "ß");
  }

  TEST_CASE("utf8 round trip") {
    const std::string s = "Grüße, ñ, Ω, Я, 語";
    CHECK(text::encode_utf8(text::decode_utf8(s)) == s);
  }

  TEST_CASE("split keeps empty fields") {
    CHECK(text::split("a\t\tb", '\t') == std::vector<std::string>{"a", "", "b"});
    CHECK(text::split("", '\t') == std::vector<std::string>{""});
  }

  TEST_CASE("format_double round trips") {
    for (double v : {0.1, 1.0 / 3.0, 197.38, 1e-300, -2.5}) CHECK(std::stod(text::format_double(v)) == v);
  }
}

TEST_SUITE("rng") {
  TEST_CASE("streams are reproducible and tag-separated") {
    Rng a(derive_seed(7, "cue")), b(derive_seed(7, "cue")), c(derive_seed(7, "other"));
    bool differs = false;
    for (int i = 0; i < 10; ++i) {
      const auto x = a.next();
      CHECK(x == b.next());
      differs |= x != c.next();
    }
    CHECK(differs);
  }

  TEST_CASE("below stays in range and hits every value") {
    Rng r(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const auto v = r.below(7);
      REQUIRE(v < 7);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
  }

  TEST_CASE("uniform in [0,1) and normal has plausible moments") {
    Rng r(3);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      const double z = r.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
  }

  TEST_CASE("sample_indices returns sorted distinct indices") {
    Rng r(5);
    const auto s = r.sample_indices(57, 55);
    REQUIRE(s.size() == 55);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i - 1] < s[i]);
    CHECK(s.back() < 57);
    CHECK(r.sample_indices(10, 10).size() == 10);
  }
}
