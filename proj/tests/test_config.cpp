#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "detkey/config.hpp"

using namespace detkey;
using config::ConfigError;
using config::ExperimentConfig;
using config::parse_config;

namespace {

// expects ConfigError and hands it to the caller for location checks
ConfigError capture(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError");
  return ConfigError(0, 0, "unreachable");
}

}  // namespace

TEST_CASE("full config parses") {
  const ExperimentConfig c = parse_config(
      "# experiment\n"
      "scheme = mixed\n"
      "n_a = 5\n"
      "n_b = 4\n"
      "n_1 = 2\n"
      "n_2 = 3\n"
      "eve_mode = static-identity\n"
      "coherence = never\n"
      "rounds = 3\n"
      "seed = 12345678901234567890\n"
      "enum_cap = 20\n"
      "gaussian.p = 2.5\n"
      "gaussian.sigma_k_sq = 0.5\n"
      "gaussian.sigma_z_sq = 4\n"
      "gaussian.samples = 5000\n"
      "gaussian.rel_tol = 1e-7\n");
  CHECK(c.scheme == proto::Scheme::Mixed);
  CHECK(c.n_a == 5);
  CHECK(c.n_b == 4);
  CHECK(c.n_1 == 2);
  CHECK(c.n_2 == 3);
  CHECK(c.eve_mode == channel::EveMode::StaticIdentity);
  CHECK(c.coherence == channel::Coherence::Never);
  CHECK(c.rounds == 3);
  CHECK(c.seed == 12345678901234567890ULL);
  CHECK(c.enum_cap == 20);
  CHECK(c.gauss.params.p == 2.5);
  CHECK(c.gauss.params.sigma_k_sq == 0.5);
  CHECK(c.gauss.params.sigma_z_sq == 4.0);
  CHECK(c.gauss.samples == 5000);
  CHECK(c.gauss.rel_tol == 1e-7);
  const channel::ChannelTopology t = c.topology();
  CHECK(t.min_legit() == 4);
  CHECK(t.min_eve() == 2);
}

TEST_CASE("defaults") {
  const ExperimentConfig c = parse_config("n_a = 3\nn_b = 3\n");
  CHECK(c.scheme == proto::Scheme::Product);
  CHECK(c.eve_mode == channel::EveMode::StaticIdentity);
  CHECK(c.coherence == channel::Coherence::EveryRound);
  CHECK(c.rounds == 1);
  CHECK(c.seed == 1);
  CHECK(c.enum_cap == 24);
  CHECK(!c.n_1.has_value());
  CHECK(c.gauss.params.p == 1.0);
  CHECK(c.gauss.samples == 1'000'000);
  CHECK(c.gauss.rel_tol == 1e-6);
}

TEST_CASE("comments, blank lines, and spacing are tolerated") {
  const ExperimentConfig c = parse_config(
      "\n"
      "   # leading comment\n"
      "\tn_a\t=\t7   # trailing comment\n"
      "n_b=2\n"
      "   \n");
  CHECK(c.n_a == 7);
  CHECK(c.n_b == 2);
}

TEST_CASE("empty input is a valid empty config") {
  const ExperimentConfig c = parse_config("");
  CHECK(c.rounds == 1);
  CHECK_THROWS_AS(c.topology(), ConfigError);
}

TEST_CASE("error locations are 1-based line and column") {
  SUBCASE("unknown key") {
    const ConfigError e = capture("n_a = 3\n  bogus = 1\n");
    CHECK(e.line == 2);
    CHECK(e.col == 3);
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
  }
  SUBCASE("bad integer value") {
    const ConfigError e = capture("n_a = banana\n");
    CHECK(e.line == 1);
    CHECK(e.col == 7);
  }
  SUBCASE("trailing junk after number") {
    const ConfigError e = capture("n_a = 3x\n");
    CHECK(e.line == 1);
    CHECK(e.col == 7);
  }
  SUBCASE("missing equals") {
    const ConfigError e = capture("scheme pilot\n");
    CHECK(e.line == 1);
    CHECK(e.col == 1);
  }
  SUBCASE("missing value") {
    const ConfigError e = capture("n_a =\n");
    CHECK(e.line == 1);
  }
  SUBCASE("duplicate key") {
    const ConfigError e = capture("n_a = 3\nn_a = 4\n");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
  SUBCASE("bad enum value") {
    const ConfigError e = capture("scheme = parity\n");
    CHECK(e.line == 1);
    CHECK(e.col == 10);
    CHECK(std::string(e.what()).find("pilot|product|mixed") !=
          std::string::npos);
  }
  SUBCASE("topology violation points at the eve dimension") {
    const ConfigError e = capture("n_a = 4\nn_b = 4\nn_1 = 5\nn_2 = 2\n");
    CHECK(e.line == 3);
    CHECK(e.col == 1);
  }
}

TEST_CASE("range checks") {
  CHECK_THROWS_AS(parse_config("rounds = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("enum_cap = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("gaussian.samples = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_a = 0\nn_b = 1\nn_1 = 1\nn_2 = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("seed = -5\n"), ConfigError);
}

TEST_CASE("eve mode and coherence spellings") {
  CHECK(parse_config("eve_mode = random-gain\n").eve_mode ==
        channel::EveMode::RandomGain);
  CHECK(parse_config("coherence = every-round\n").coherence ==
        channel::Coherence::EveryRound);
  CHECK_THROWS_AS(parse_config("eve_mode = random\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("coherence = always\n"), ConfigError);
}

TEST_CASE("missing dimension named in topology error") {
  const ExperimentConfig c = parse_config("n_a = 3\nn_b = 3\nn_1 = 1\n");
  try {
    c.topology();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 0);
    CHECK(std::string(e.what()).find("n_2") != std::string::npos);
  }
}

TEST_CASE("load_config reads files and reports unreadable paths") {
  const char* path = "test_config_tmp.txt";
  {
    std::ofstream out(path);
    out << "n_a = 6\nn_b = 6\nn_1 = 2\nn_2 = 2\n";
  }
  const ExperimentConfig c = config::load_config(path);
  CHECK(c.n_a == 6);
  std::remove(path);
  CHECK_THROWS_AS(config::load_config("does_not_exist.cfg"), ConfigError);
}
