#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detkey/channel.hpp"
#include "detkey/gf2.hpp"

// Key-generation schemes over the deterministic channel. One round is two
// channel uses (Alice transmits on the odd use, Bob on the even use); all
// rates divide by two accordingly. Per-round keys are concatenated, there is
// no reconciliation and no public discussion.

namespace detkey::proto {

enum class Scheme { Pilot, Product, Mixed };

struct RoundRecord {
  channel::RoundGains gains;
  gf2::BitVec x_a, x_b;          // transmitted words
  gf2::BitVec y_a, y_b;          // received words (y_b = K x_a, y_a = K' x_b)
  gf2::BitVec y_e_odd, y_e_even; // Eve's view of each use
};

struct Transcript {
  std::vector<RoundRecord> rounds;
  std::uint64_t seed_a = 0;
  std::uint64_t seed_b = 0;
};

struct KeyPair {
  gf2::BitVec s_a;
  gf2::BitVec s_b;
  int bits_per_round = 0;
};

struct RoundOutcome {
  RoundRecord record;
  gf2::BitVec key_a, key_b;  // per-round keys, length min(n_a, n_b)
};

// Single-round kernels. The run_* drivers loop over these; the secrecy
// auditor calls them directly with enumerated inputs and gains.
RoundOutcome pilot_round(const channel::ChannelTopology& topo,
                         const channel::RoundGains& gains);
// x_a, x_b must have leading bit 1 and dims n_a, n_b.
RoundOutcome product_round(const channel::ChannelTopology& topo,
                           const channel::RoundGains& gains,
                           const gf2::BitVec& x_a, const gf2::BitVec& x_b);
// priv_a, priv_b are the private payloads, lengths n_a-n_1 and n_b-n_2; the
// transmitted words are [1, 0^(n_1-1), priv_a] and [1, 0^(n_2-1), priv_b].
RoundOutcome mixed_round(const channel::ChannelTopology& topo,
                         const channel::RoundGains& gains,
                         const gf2::BitVec& priv_a, const gf2::BitVec& priv_b);

std::pair<Transcript, KeyPair> run_pilot(const channel::ChannelTopology& topo,
                                         const std::vector<channel::RoundGains>& gains,
                                         int n_rounds);
std::pair<Transcript, KeyPair> run_product(const channel::ChannelTopology& topo,
                                           const std::vector<channel::RoundGains>& gains,
                                           int n_rounds, std::uint64_t seed_a,
                                           std::uint64_t seed_b);
// Requires eve_mode = StaticIdentity and at least one private level.
std::pair<Transcript, KeyPair> run_mixed(const channel::ChannelTopology& topo,
                                         const std::vector<channel::RoundGains>& gains,
                                         int n_rounds, std::uint64_t seed_a,
                                         std::uint64_t seed_b);

// Bits of a per-round product key strictly below level min(n_1, n_2); empty
// when the eavesdropper reaches every shared level.
gf2::BitVec extract_secure_key(const gf2::BitVec& key_round,
                               const channel::ChannelTopology& topo);

struct RateReport {
  double nominal_r_d = 0.0;         // key bits per channel use
  std::optional<double> exact_r_d;  // measured-entropy rate, when supplied
  std::optional<double> r_sd;       // secure-extraction rate, when defined
};

RateReport rate_report(const KeyPair& kp, int n_channel_uses,
                       std::optional<double> measured_entropy_bits = {},
                       std::optional<int> secure_key_bits = {});

// Line-oriented transcript record, one round per line, fields in order:
// round index, fine bits, x_a, x_b, y_a, y_b, y_e_odd, y_e_even, each word
// in the BitVec "len:hex" encoding.
struct ParsedRound {
  int index = 0;
  gf2::BitVec fine, x_a, x_b, y_a, y_b, y_e_odd, y_e_even;
};

std::string transcript_to_text(const Transcript& t);
std::vector<ParsedRound> transcript_from_text(const std::string& text);

// Replay audit: inputs carry their leading one, both parties derive the same
// per-round key, and the recorded observations are consistent with some
// reciprocal gain pair whose shared fine bits match the recorded ones.
// Throws std::runtime_error naming the first offending round.
void check_transcript(const std::vector<ParsedRound>& rounds);

}  // namespace detkey::proto
