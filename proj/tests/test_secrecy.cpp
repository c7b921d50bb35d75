#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "detkey/secrecy.hpp"

using namespace detkey;
using channel::ChannelTopology;
using channel::Coherence;
using channel::EveMode;
using proto::Scheme;
using secrecy::AuditOptions;
using secrecy::JointDistribution;
using secrecy::Which;

namespace {

JointDistribution manual_dist(int bits,
                              std::map<std::pair<std::string, std::string>,
                                       std::uint64_t> cells) {
  JointDistribution d;
  d.enumerated_bits = bits;
  d.total_weight = std::uint64_t{1} << bits;
  d.cells = std::move(cells);
  return d;
}

}  // namespace

// ===== Entropy and mutual information on hand-built tables =====

TEST_CASE("entropy of uniform and degenerate tables") {
  auto uniform = manual_dist(3, {{{"a", "e"}, 1}, {{"b", "e"}, 1}, {{"c", "e"}, 1},
                                 {{"d", "e"}, 1}, {{"f", "e"}, 1}, {{"g", "e"}, 1},
                                 {{"h", "e"}, 1}, {{"i", "e"}, 1}});
  CHECK(secrecy::entropy(uniform, Which::Key) == 3.0);
  CHECK(secrecy::entropy(uniform, Which::Eve) == 0.0);
  CHECK(secrecy::entropy(uniform, Which::Joint) == 3.0);

  auto atom = manual_dist(4, {{{"k", "e"}, 16}});
  CHECK(secrecy::entropy(atom, Which::Key) == 0.0);
  CHECK(secrecy::entropy(atom, Which::Joint) == 0.0);

  // {1/2, 1/4, 1/4} -> 1.5 bits
  auto skew = manual_dist(2, {{{"a", "e"}, 2}, {{"b", "e"}, 1}, {{"c", "e"}, 1}});
  CHECK(secrecy::entropy(skew, Which::Key) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("mutual information integer test") {
  // independent uniform key and eve
  auto indep = manual_dist(2, {{{"k0", "e0"}, 1}, {{"k0", "e1"}, 1},
                               {{"k1", "e0"}, 1}, {{"k1", "e1"}, 1}});
  auto mi = secrecy::mutual_information(indep);
  CHECK(mi.exactly_zero);
  CHECK(mi.bits == 0.0);

  // eve is a copy of the key: I = H(Key) = 1
  auto copy = manual_dist(1, {{{"k0", "k0"}, 1}, {{"k1", "k1"}, 1}});
  auto mi2 = secrecy::mutual_information(copy);
  CHECK_FALSE(mi2.exactly_zero);
  CHECK(mi2.bits == doctest::Approx(1.0).epsilon(1e-12));

  // independent but non-uniform marginals
  auto skew = manual_dist(3, {{{"a", "x"}, 3}, {{"a", "y"}, 3},
                              {{"b", "x"}, 1}, {{"b", "y"}, 1}});
  CHECK(secrecy::mutual_information(skew).exactly_zero);
}

// ===== Enumeration =====

TEST_CASE("two-free-bit product world enumerates four rows") {
  ChannelTopology topo(2, 2, 1, 1);
  auto d = secrecy::enumerate_joint(Scheme::Product, topo, 1, Coherence::EveryRound);
  CHECK(d.enumerated_bits == 2);
  CHECK(d.total_weight == 4);
  // key [1,a^b] uniform over two values, eve view constant [1][1]
  auto km = d.key_marginal();
  REQUIRE(km.size() == 2);
  for (const auto& [k, c] : km) CHECK(c == 2);
  CHECK(d.eve_marginal().size() == 1);
  CHECK(secrecy::mutual_information(d).exactly_zero);
  CHECK(secrecy::entropy(d, Which::Key) == 1.0);
}

TEST_CASE("pilot enumeration reads the fine bits") {
  ChannelTopology topo(3, 3, 1, 1);
  auto d = secrecy::enumerate_joint(Scheme::Pilot, topo, 1, Coherence::EveryRound);
  CHECK(d.enumerated_bits == 2);
  auto km = d.key_marginal();
  REQUIRE(km.size() == 4);
  for (const auto& [k, c] : km) CHECK(c == 1);
  CHECK(secrecy::entropy(d, Which::Key) == 2.0);
  CHECK(secrecy::mutual_information(d).exactly_zero);
}

TEST_CASE("degenerate single-level pilot has a single cell") {
  ChannelTopology topo(1, 1, 1, 1);
  auto d = secrecy::enumerate_joint(Scheme::Pilot, topo, 1, Coherence::EveryRound);
  CHECK(d.enumerated_bits == 0);
  CHECK(d.total_weight == 1);
  CHECK(d.cells.size() == 1);
  CHECK(secrecy::entropy(d, Which::Joint) == 0.0);
}

TEST_CASE("full product key leaks, the secure slice does not") {
  ChannelTopology topo(4, 4, 2, 2);
  auto full = secrecy::enumerate_joint(Scheme::Product, topo, 1, Coherence::EveryRound);
  CHECK(full.enumerated_bits == 6);
  auto mi_full = secrecy::mutual_information(full);
  CHECK_FALSE(mi_full.exactly_zero);
  CHECK(mi_full.bits > 0.0);

  auto sec = secrecy::enumerate_joint(Scheme::Product, topo, 1,
                                      Coherence::EveryRound, {}, true);
  auto mi_sec = secrecy::mutual_information(sec);
  CHECK(mi_sec.exactly_zero);
  CHECK(secrecy::entropy(sec, Which::Key) == 2.0);

  CHECK_THROWS_AS(secrecy::enumerate_joint(Scheme::Pilot, topo, 1,
                                           Coherence::EveryRound, {}, true),
                  std::invalid_argument);
}

TEST_CASE("enumeration cap is enforced with the required size") {
  ChannelTopology topo(5, 5, 1, 1);
  AuditOptions opts;
  opts.enum_cap = 10;
  try {
    secrecy::enumerate_joint(Scheme::Product, topo, 3, Coherence::EveryRound, opts);
    FAIL("expected EnumCapExceeded");
  } catch (const secrecy::EnumCapExceeded& e) {
    CHECK(e.required_bits == 24);
    CHECK(e.cap == 10);
  }
}

TEST_CASE("joint entropy never exceeds the marginal sum") {
  for (auto scheme : {Scheme::Pilot, Scheme::Product}) {
    for (auto mode : {EveMode::StaticIdentity, EveMode::RandomGain}) {
      ChannelTopology topo(4, 3, 2, 2, mode);
      auto d = secrecy::enumerate_joint(scheme, topo, 2, Coherence::EveryRound);
      CHECK(secrecy::entropy(d, Which::Joint) <=
            secrecy::entropy(d, Which::Key) + secrecy::entropy(d, Which::Eve) + 1e-12);
    }
  }
}

// ===== Audit =====

TEST_CASE("static-everywhere audit reproduces the secure rate formula") {
  ChannelTopology topo(4, 4, 2, 2);
  auto rep = secrecy::audit(Scheme::Product, topo, 1, Coherence::EveryRound);
  CHECK(rep.key_len_bits == 4);
  CHECK(rep.enumerated_bits == 6);
  CHECK(rep.mismatch_prob == 0.0);
  CHECK(rep.leakage_is_exactly_zero);
  CHECK(rep.leakage_bits == 0.0);
  REQUIRE(rep.r_sd.has_value());
  CHECK(*rep.r_sd == 1.0);
  // the full key is uniform over the eight leading-one words: the forced
  // leading bit carries no entropy
  CHECK(rep.key_entropy_bits == 3.0);
  CHECK(rep.r_d == 1.5);
}

TEST_CASE("secure rate formula holds across a small static grid") {
  for (int n_a = 1; n_a <= 4; ++n_a)
    for (int n_b = 1; n_b <= 4; ++n_b)
      for (int n_1 = 1; n_1 <= std::min(n_a, n_b); ++n_1)
        for (int n_2 = 1; n_2 <= std::min(n_a, n_b); ++n_2) {
          ChannelTopology topo(n_a, n_b, n_1, n_2);
          auto rep = secrecy::audit(Scheme::Product, topo, 1, Coherence::EveryRound);
          REQUIRE(rep.mismatch_prob == 0.0);
          REQUIRE(rep.leakage_is_exactly_zero);
          REQUIRE(rep.r_sd.has_value());
          const double want = 0.5 * (std::min(n_a, n_b) - std::min(n_1, n_2));
          REQUIRE(*rep.r_sd == want);
        }
}

TEST_CASE("pilot leakage against an independently gained eavesdropper is zero") {
  ChannelTopology topo(4, 3, 2, 2, EveMode::RandomGain);
  auto rep = secrecy::audit(Scheme::Pilot, topo, 1, Coherence::EveryRound);
  CHECK(rep.leakage_is_exactly_zero);
  CHECK(rep.mismatch_prob == 0.0);
  // full key secure: r_sd echoes r_d
  REQUIRE(rep.r_sd.has_value());
  CHECK(*rep.r_sd == rep.r_d);
  // key = [1, two fine bits]: entropy 2 over 2 uses
  CHECK(rep.key_entropy_bits == 2.0);
  CHECK(rep.r_d == 1.0);
}

TEST_CASE("mixed audit certifies zero leakage and private entropy") {
  ChannelTopology topo(3, 3, 2, 2);
  auto rep = secrecy::audit(Scheme::Mixed, topo, 1, Coherence::EveryRound);
  CHECK(rep.enumerated_bits == 4);
  CHECK(rep.leakage_is_exactly_zero);
  CHECK(rep.mismatch_prob == 0.0);
  CHECK(rep.key_entropy_bits >= 1.0);  // at least the private bits per round
  REQUIRE(rep.r_sd.has_value());
  CHECK(*rep.r_sd == rep.r_d);
}

TEST_CASE("frozen coherence starves pilot entropy") {
  ChannelTopology topo(4, 4, 1, 1);
  auto one = secrecy::audit(Scheme::Pilot, topo, 1, Coherence::Never);
  auto two = secrecy::audit(Scheme::Pilot, topo, 2, Coherence::Never);
  CHECK(one.r_d == doctest::Approx(1.5));
  CHECK(two.r_d == doctest::Approx(0.75));
  CHECK(two.key_entropy_bits == one.key_entropy_bits);

  // resampled gains keep the rate
  auto fresh = secrecy::audit(Scheme::Pilot, topo, 2, Coherence::EveryRound);
  CHECK(fresh.r_d == doctest::Approx(1.5));
}

TEST_CASE("audit is identical for any worker count") {
  ChannelTopology topo(3, 3, 2, 2, EveMode::RandomGain);
  AuditOptions one;
  AuditOptions many;
  many.workers = 7;
  auto a = secrecy::audit(Scheme::Product, topo, 2, Coherence::EveryRound, one);
  auto b = secrecy::audit(Scheme::Product, topo, 2, Coherence::EveryRound, many);
  CHECK(secrecy::to_json(a) == secrecy::to_json(b));

  auto da = secrecy::enumerate_joint(Scheme::Product, topo, 2, Coherence::EveryRound, one);
  auto db = secrecy::enumerate_joint(Scheme::Product, topo, 2, Coherence::EveryRound, many);
  CHECK(da.cells == db.cells);
}

// ===== Entropy chain identity =====

TEST_CASE("chain identity holds with exact certificates") {
  for (int n : {2, 3, 4}) {
    ChannelTopology topo(n, n, n, n);
    auto rep = secrecy::entropy_chain_check(topo);
    CHECK(rep.distributions_match);
    CHECK(rep.lhs == doctest::Approx(rep.rhs).epsilon(1e-12));
  }
  // two levels: hand enumeration gives key bit = fine xor input xor input,
  // independent of the inputs, so both sides are 0
  ChannelTopology two(2, 2, 2, 2);
  auto rep2 = secrecy::entropy_chain_check(two);
  CHECK(rep2.lhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep2.rhs == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("chain check degenerate and error cases") {
  ChannelTopology one(1, 1, 1, 1);
  auto rep = secrecy::entropy_chain_check(one);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs == 0.0);
  CHECK(rep.distributions_match);

  ChannelTopology uneven(3, 3, 2, 2);
  CHECK_THROWS_AS(secrecy::entropy_chain_check(uneven), std::invalid_argument);
  ChannelTopology rg(3, 3, 3, 3, EveMode::RandomGain);
  CHECK_THROWS_AS(secrecy::entropy_chain_check(rg), std::invalid_argument);
}

// ===== Serialization =====

TEST_CASE("report serializes with fixed field order") {
  ChannelTopology topo(4, 4, 2, 2);
  auto rep = secrecy::audit(Scheme::Product, topo, 1, Coherence::EveryRound);
  const std::string j = secrecy::to_json(rep);
  CHECK(j.find("\"key_len_bits\": 4") != std::string::npos);
  CHECK(j.find("\"leakage_is_exactly_zero\": true") != std::string::npos);
  CHECK(j.find("\"leakage_bits\": 0.0") != std::string::npos);
  CHECK(j.find("\"r_sd\": 1.0") != std::string::npos);
  CHECK(j.find("key_len_bits") < j.find("key_entropy_bits"));
  CHECK(j.find("key_entropy_bits") < j.find("leakage_bits"));
  CHECK(j.find("mismatch_prob") < j.find("\"r_d\""));
  CHECK(j.find("\"r_d\"") < j.find("\"r_sd\""));
  CHECK(j.find("\"r_sd\"") < j.find("enumerated_bits"));

  const std::string csv = secrecy::to_csv_row(rep);
  CHECK(csv == "1.5,1,3,0,0");

  // absent r_sd leaves an empty column
  secrecy::SecrecyReport bare;
  bare.r_d = 0.5;
  CHECK(secrecy::to_csv_row(bare) == "0.5,,0,0,0");
}
