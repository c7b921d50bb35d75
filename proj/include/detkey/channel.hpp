#pragma once

#include <cstdint>
#include <vector>

#include "detkey/gf2.hpp"

// Deterministic channel layer: gains split into a coarse part 2^N and a fine
// part h-hat in [1,2); the channel acts on bit levels as a lower-triangular
// Toeplitz product and the eavesdropper sees a truncated word.

namespace detkey::channel {

enum class EveMode { StaticIdentity, RandomGain };
enum class Coherence { EveryRound, Never };

// Quantized channel gain: magnitude 2^coarse_levels * (1.f_1 f_2 ...), the
// leading 1 of the fine gain is implied and never stored. full_column() has
// length fine_bits.size() + 1; on the sampling path that equals
// coarse_levels, a saturating quantizer request may differ.
struct GainRealization {
  int coarse_levels = 0;
  gf2::BitVec fine_bits;

  gf2::BitVec full_column() const;
  double reconstruct() const;  // 2^coarse_levels * (1 + sum f_i 2^-i)
};

struct ChannelTopology {
  int n_a;  // Alice -> Bob levels
  int n_b;  // Bob -> Alice levels
  int n_1;  // Alice -> Eve levels
  int n_2;  // Bob -> Eve levels
  EveMode eve_mode = EveMode::StaticIdentity;

  ChannelTopology(int na, int nb, int n1, int n2,
                  EveMode mode = EveMode::StaticIdentity);

  int min_legit() const { return n_a < n_b ? n_a : n_b; }
  int min_eve() const { return n_1 < n_2 ? n_1 : n_2; }
};

// One coherence interval's worth of gain matrices. K (dim n_a) and K' (dim
// n_b) share the top min(n_a,n_b) column entries: reciprocity holds in the
// fine gain only, the coarse gains may differ.
struct RoundGains {
  gf2::BitVec fine;  // shared fine bits, length min(n_a,n_b)-1
  gf2::LtToeplitz k_matrix;
  gf2::LtToeplitz k_prime_matrix;
  gf2::LtToeplitz eve1;
  gf2::LtToeplitz eve2;
};

// Smallest nonnegative N with 4^N >= snr (real-valued model) or with
// 2^N >= snr (complex model).
int snr_to_levels(double snr, bool complex_model = false);

GainRealization quantize_gain(double h, int levels);

// Build gain matrices from explicit fine-bit vectors (lengths n_a-1, n_b-1,
// n_1-1, n_2-1). The shared prefixes of fine_a and fine_b must agree.
RoundGains make_round_gains(const ChannelTopology& topo,
                            const gf2::BitVec& fine_a,
                            const gf2::BitVec& fine_b,
                            const gf2::BitVec& fine_e1,
                            const gf2::BitVec& fine_e2);

// All-identity gains (every fine bit zero); the static degenerate world.
RoundGains all_identity_gains(const ChannelTopology& topo);

// Deterministic per (seed, round); Eve gains follow topo.eve_mode.
RoundGains sample_round_gains(const ChannelTopology& topo, std::uint64_t seed,
                              std::uint64_t round);

// Gains for n_rounds rounds; Coherence::Never samples once and reuses.
std::vector<RoundGains> sample_gains(const ChannelTopology& topo,
                                     std::uint64_t seed, int n_rounds,
                                     Coherence coherence);

gf2::BitVec apply_channel(const gf2::LtToeplitz& gain, const gf2::BitVec& x);

// Eve's view: her gain applied to the top eve_gain.dim levels of x.
gf2::BitVec eve_observe(const gf2::BitVec& x, const gf2::LtToeplitz& eve_gain);

}  // namespace detkey::channel
