#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "detkey/channel.hpp"

using namespace detkey;
using channel::ChannelTopology;
using channel::Coherence;
using channel::EveMode;
using gf2::BitVec;
using gf2::LtToeplitz;

// ===== SNR mapping =====

TEST_CASE("snr_to_levels matches the ceiling rule") {
  CHECK(channel::snr_to_levels(64.0) == 3);
  CHECK(channel::snr_to_levels(1.0) == 0);
  CHECK(channel::snr_to_levels(100.0) == 4);
  CHECK(channel::snr_to_levels(0.25) == 0);

  // complex model doubles the resolution
  CHECK(channel::snr_to_levels(64.0, true) == 6);
  CHECK(channel::snr_to_levels(100.0, true) == 7);

  // exact on powers of 4, monotone elsewhere
  for (int k = 0; k <= 20; ++k)
    CHECK(channel::snr_to_levels(std::ldexp(1.0, 2 * k)) == k);
  int prev = 0;
  for (double snr = 0.5; snr < 1e6; snr *= 1.37) {
    const int n = channel::snr_to_levels(snr);
    CHECK(n >= prev);
    prev = n;
  }
  CHECK_THROWS_AS(channel::snr_to_levels(0.0), std::invalid_argument);
  CHECK_THROWS_AS(channel::snr_to_levels(-3.0), std::invalid_argument);
}

// ===== Gain quantization =====

TEST_CASE("quantize_gain splits coarse and fine parts") {
  auto g = channel::quantize_gain(5.5, 3);
  CHECK(g.coarse_levels == 2);
  CHECK(g.fine_bits == BitVec::from_bits({0, 1}));
  CHECK(g.full_column() == BitVec::from_bits({1, 0, 1}));

  auto one = channel::quantize_gain(1.0, 4);
  CHECK(one.coarse_levels == 0);
  CHECK(one.fine_bits == BitVec(3));

  for (int k = 0; k <= 6; ++k) {
    auto pk = channel::quantize_gain(std::ldexp(1.0, k), 8);
    CHECK(pk.coarse_levels == k);
    CHECK(pk.fine_bits == BitVec(7));
  }

  CHECK_THROWS_AS(channel::quantize_gain(0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(channel::quantize_gain(2.0, 0), std::invalid_argument);
}

TEST_CASE("quantize_gain round trip stays within resolution") {
  for (int levels : {1, 2, 4, 7}) {
    for (double h = 1.0; h < std::ldexp(1.0, levels + 1); h += 0.0917) {
      auto g = channel::quantize_gain(h, levels);
      const double back = g.reconstruct();
      const double tol = std::ldexp(1.0, g.coarse_levels - (levels - 1));
      CHECK(back <= h);
      CHECK(h - back < tol);
    }
  }
  // capping saturates instead of wrapping
  auto sat = channel::quantize_gain(100.0, 3);
  CHECK(sat.coarse_levels == 3);
  CHECK(sat.fine_bits == BitVec::from_bits({1, 1}));
}

// ===== Topology =====

TEST_CASE("topology validates level counts") {
  ChannelTopology t(4, 6, 2, 3);
  CHECK(t.min_legit() == 4);
  CHECK(t.min_eve() == 2);
  CHECK(t.eve_mode == EveMode::StaticIdentity);

  CHECK_THROWS_AS(ChannelTopology(0, 4, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ChannelTopology(4, 4, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ChannelTopology(4, 6, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(ChannelTopology(6, 4, 1, 5), std::invalid_argument);
}

// ===== Gain sampling =====

TEST_CASE("sampling is deterministic in (seed, round)") {
  ChannelTopology topo(6, 4, 3, 2, EveMode::RandomGain);
  auto a = channel::sample_round_gains(topo, 42, 7);
  auto b = channel::sample_round_gains(topo, 42, 7);
  CHECK(a.fine == b.fine);
  CHECK(a.k_matrix == b.k_matrix);
  CHECK(a.k_prime_matrix == b.k_prime_matrix);
  CHECK(a.eve1 == b.eve1);
  CHECK(a.eve2 == b.eve2);

  auto c = channel::sample_round_gains(topo, 42, 8);
  const bool same = a.k_matrix == c.k_matrix && a.k_prime_matrix == c.k_prime_matrix;
  CHECK_FALSE(same);
}

TEST_CASE("reciprocity holds in every sampled round") {
  ChannelTopology topo(7, 5, 2, 4, EveMode::RandomGain);
  const int m = topo.min_legit();
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto g = channel::sample_round_gains(topo, 9, r);
    CHECK(gf2::truncate(g.k_matrix.first_col(), m) ==
          gf2::truncate(g.k_prime_matrix.first_col(), m));
    CHECK(g.fine.size() == m - 1);
    CHECK(g.k_matrix.first_col().bit(0) == 1);
    CHECK(g.k_prime_matrix.first_col().bit(0) == 1);
  }
}

TEST_CASE("static identity mode pins the eavesdropper gains") {
  ChannelTopology topo(5, 5, 3, 2, EveMode::StaticIdentity);
  for (std::uint64_t r = 0; r < 50; ++r) {
    auto g = channel::sample_round_gains(topo, 123, r);
    CHECK(g.eve1 == LtToeplitz::identity(3));
    CHECK(g.eve2 == LtToeplitz::identity(2));
  }
}

TEST_CASE("fine bits are unbiased") {
  ChannelTopology topo(2, 2, 1, 1);
  long ones = 0;
  const int rounds = 100000;
  for (int r = 0; r < rounds; ++r)
    ones += channel::sample_round_gains(topo, 5, static_cast<std::uint64_t>(r)).fine.bit(0);
  const double mean = static_cast<double>(ones) / rounds;
  CHECK(mean > 0.49);
  CHECK(mean < 0.51);
}

TEST_CASE("coherence controls resampling") {
  ChannelTopology topo(5, 5, 2, 2, EveMode::RandomGain);
  auto frozen = channel::sample_gains(topo, 77, 20, Coherence::Never);
  REQUIRE(frozen.size() == 20);
  for (const auto& g : frozen) CHECK(g.k_matrix == frozen[0].k_matrix);

  auto moving = channel::sample_gains(topo, 77, 20, Coherence::EveryRound);
  int distinct = 0;
  for (const auto& g : moving)
    if (!(g.k_matrix == moving[0].k_matrix)) ++distinct;
  CHECK(distinct > 0);
}

TEST_CASE("make_round_gains enforces reciprocity and sizes") {
  ChannelTopology topo(4, 3, 2, 2);
  auto g = channel::make_round_gains(topo, BitVec::from_bits({1, 0, 1}),
                                     BitVec::from_bits({1, 0}),
                                     BitVec::from_bits({1}), BitVec::from_bits({0}));
  CHECK(g.k_matrix.first_col() == BitVec::from_bits({1, 1, 0, 1}));
  CHECK(g.k_prime_matrix.first_col() == BitVec::from_bits({1, 1, 0}));
  CHECK(g.fine == BitVec::from_bits({1, 0}));

  CHECK_THROWS_AS(channel::make_round_gains(topo, BitVec::from_bits({1, 0, 1}),
                                            BitVec::from_bits({0, 0}),
                                            BitVec::from_bits({1}),
                                            BitVec::from_bits({0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(channel::make_round_gains(topo, BitVec::from_bits({1, 0}),
                                            BitVec::from_bits({1, 0}),
                                            BitVec::from_bits({1}),
                                            BitVec::from_bits({0})),
                  std::invalid_argument);

  auto id = channel::all_identity_gains(topo);
  CHECK(id.k_matrix == LtToeplitz::identity(4));
  CHECK(id.k_prime_matrix == LtToeplitz::identity(3));
  CHECK(id.eve1 == LtToeplitz::identity(2));
  CHECK(id.eve2 == LtToeplitz::identity(2));
}

// ===== Channel application =====

TEST_CASE("apply_channel is the Toeplitz product") {
  BitVec x = BitVec::from_string("1011");
  CHECK(channel::apply_channel(LtToeplitz::identity(4), x) == x);
  CHECK(channel::apply_channel(gf2::t_lt(BitVec::from_bits({1, 1})),
                               BitVec::from_bits({1, 0})) ==
        BitVec::from_bits({1, 1}));
  // pilot input reads out the first column
  auto t = gf2::t_lt(BitVec::from_string("1101"));
  CHECK(channel::apply_channel(t, BitVec::e1(4)) == t.first_col());
}

TEST_CASE("eve_observe truncates then applies her gain") {
  CHECK(channel::eve_observe(BitVec::from_bits({1, 0, 1, 1}), LtToeplitz::identity(2)) ==
        BitVec::from_bits({1, 0}));
  BitVec x = BitVec::from_string("10110");
  CHECK(channel::eve_observe(x, LtToeplitz::identity(5)) == x);
  CHECK(channel::eve_observe(BitVec::from_string("1011"), gf2::t_lt(BitVec::from_bits({1, 1}))) ==
        BitVec::from_bits({1, 1}));
  CHECK_THROWS_AS(channel::eve_observe(BitVec::from_bits({1}), LtToeplitz::identity(2)),
                  std::invalid_argument);
}

TEST_CASE("eve's view ignores levels below her cutoff") {
  for (int dim = 1; dim <= 3; ++dim) {
    auto eve = gf2::t_lt(BitVec::from_string(dim == 1 ? "1" : dim == 2 ? "11" : "101"));
    const int n = 5;
    for (unsigned hi = 0; hi < (1u << dim); ++hi) {
      BitVec base(n);
      for (int i = 0; i < dim; ++i) base.set_bit(i, static_cast<int>((hi >> i) & 1));
      const BitVec seen = channel::eve_observe(base, eve);
      for (unsigned lo = 0; lo < (1u << (n - dim)); ++lo) {
        BitVec x = base;
        for (int i = dim; i < n; ++i) x.set_bit(i, static_cast<int>((lo >> (i - dim)) & 1));
        REQUIRE(channel::eve_observe(x, eve) == seen);
      }
    }
  }
}
