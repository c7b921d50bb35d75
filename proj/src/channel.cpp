#include "detkey/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "detkey/rng.hpp"

namespace detkey::channel {

namespace {

// purpose lanes for the counter RNG
constexpr std::uint64_t kLaneShared = 1;
constexpr std::uint64_t kLaneExtraA = 2;
constexpr std::uint64_t kLaneExtraB = 3;
constexpr std::uint64_t kLaneEve1 = 4;
constexpr std::uint64_t kLaneEve2 = 5;

gf2::BitVec with_leading_one(const gf2::BitVec& fine) {
  return gf2::BitVec::from_bits({1}).concat(fine);
}

}  // namespace

gf2::BitVec GainRealization::full_column() const {
  return with_leading_one(fine_bits);
}

double GainRealization::reconstruct() const {
  double frac = 1.0;
  for (int i = 0; i < fine_bits.size(); ++i)
    if (fine_bits.bit(i)) frac += std::ldexp(1.0, -(i + 1));
  return std::ldexp(frac, coarse_levels);
}

ChannelTopology::ChannelTopology(int na, int nb, int n1, int n2, EveMode mode)
    : n_a(na), n_b(nb), n_1(n1), n_2(n2), eve_mode(mode) {
  if (na < 1 || nb < 1 || n1 < 1 || n2 < 1)
    throw std::invalid_argument("ChannelTopology: all level counts must be >= 1");
  const int m = na < nb ? na : nb;
  if (n1 > m || n2 > m)
    throw std::invalid_argument(
        "ChannelTopology: eavesdropper levels must not exceed min(n_a, n_b)");
}

int snr_to_levels(double snr, bool complex_model) {
  if (!(snr > 0.0)) throw std::invalid_argument("snr_to_levels: snr must be > 0");
  const int step = complex_model ? 1 : 2;
  int n = 0;
  while (std::ldexp(1.0, step * n) < snr) ++n;
  return n;
}

GainRealization quantize_gain(double h, int levels) {
  if (levels < 1) throw std::invalid_argument("quantize_gain: levels must be >= 1");
  if (!(h >= 1.0)) throw std::invalid_argument("quantize_gain: h must be >= 1");

  int coarse = static_cast<int>(std::floor(std::log2(h)));
  // log2 can land one off near exact powers of two
  while (std::ldexp(1.0, coarse + 1) <= h) ++coarse;
  while (std::ldexp(1.0, coarse) > h) --coarse;
  if (coarse > levels) coarse = levels;

  GainRealization g;
  g.coarse_levels = coarse;
  g.fine_bits = gf2::BitVec(levels - 1);
  double hat = h / std::ldexp(1.0, coarse);
  if (hat >= 2.0) {
    // capping the coarse part pushed the fine gain out of [1,2); saturate
    for (int i = 0; i < levels - 1; ++i) g.fine_bits.set_bit(i, 1);
    return g;
  }
  double frac = hat - 1.0;
  for (int i = 0; i < levels - 1; ++i) {
    frac *= 2.0;
    if (frac >= 1.0) {
      g.fine_bits.set_bit(i, 1);
      frac -= 1.0;
    }
  }
  return g;
}

RoundGains make_round_gains(const ChannelTopology& topo,
                            const gf2::BitVec& fine_a,
                            const gf2::BitVec& fine_b,
                            const gf2::BitVec& fine_e1,
                            const gf2::BitVec& fine_e2) {
  if (fine_a.size() != topo.n_a - 1 || fine_b.size() != topo.n_b - 1 ||
      fine_e1.size() != topo.n_1 - 1 || fine_e2.size() != topo.n_2 - 1)
    throw std::invalid_argument("make_round_gains: fine-bit length mismatch");
  const int shared = topo.min_legit() - 1;
  for (int i = 0; i < shared; ++i)
    if (fine_a.bit(i) != fine_b.bit(i))
      throw std::invalid_argument("make_round_gains: reciprocity violated");
  return RoundGains{
      fine_a.subrange(0, shared),
      gf2::t_lt(with_leading_one(fine_a)),
      gf2::t_lt(with_leading_one(fine_b)),
      gf2::t_lt(with_leading_one(fine_e1)),
      gf2::t_lt(with_leading_one(fine_e2)),
  };
}

RoundGains all_identity_gains(const ChannelTopology& topo) {
  return make_round_gains(topo, gf2::BitVec(topo.n_a - 1),
                          gf2::BitVec(topo.n_b - 1), gf2::BitVec(topo.n_1 - 1),
                          gf2::BitVec(topo.n_2 - 1));
}

RoundGains sample_round_gains(const ChannelTopology& topo, std::uint64_t seed,
                              std::uint64_t round) {
  const int m = topo.min_legit();
  gf2::BitVec fine_a(topo.n_a - 1);
  gf2::BitVec fine_b(topo.n_b - 1);
  for (int i = 0; i < m - 1; ++i) {
    const int b = rng::counter_bit(seed, kLaneShared, round, static_cast<std::uint64_t>(i));
    fine_a.set_bit(i, b);
    fine_b.set_bit(i, b);
  }
  for (int i = m - 1; i < topo.n_a - 1; ++i)
    fine_a.set_bit(i, rng::counter_bit(seed, kLaneExtraA, round, static_cast<std::uint64_t>(i)));
  for (int i = m - 1; i < topo.n_b - 1; ++i)
    fine_b.set_bit(i, rng::counter_bit(seed, kLaneExtraB, round, static_cast<std::uint64_t>(i)));

  gf2::BitVec fine_e1(topo.n_1 - 1);
  gf2::BitVec fine_e2(topo.n_2 - 1);
  if (topo.eve_mode == EveMode::RandomGain) {
    for (int i = 0; i < topo.n_1 - 1; ++i)
      fine_e1.set_bit(i, rng::counter_bit(seed, kLaneEve1, round, static_cast<std::uint64_t>(i)));
    for (int i = 0; i < topo.n_2 - 1; ++i)
      fine_e2.set_bit(i, rng::counter_bit(seed, kLaneEve2, round, static_cast<std::uint64_t>(i)));
  }
  return make_round_gains(topo, fine_a, fine_b, fine_e1, fine_e2);
}

std::vector<RoundGains> sample_gains(const ChannelTopology& topo,
                                     std::uint64_t seed, int n_rounds,
                                     Coherence coherence) {
  if (n_rounds < 0) throw std::invalid_argument("sample_gains: negative round count");
  std::vector<RoundGains> out;
  out.reserve(static_cast<size_t>(n_rounds));
  for (int r = 0; r < n_rounds; ++r) {
    const std::uint64_t idx = coherence == Coherence::Never ? 0 : static_cast<std::uint64_t>(r);
    out.push_back(sample_round_gains(topo, seed, idx));
  }
  return out;
}

gf2::BitVec apply_channel(const gf2::LtToeplitz& gain, const gf2::BitVec& x) {
  return gf2::mat_vec(gain, x);
}

gf2::BitVec eve_observe(const gf2::BitVec& x, const gf2::LtToeplitz& eve_gain) {
  if (eve_gain.dim() > x.size())
    throw std::invalid_argument("eve_observe: eavesdropper dim exceeds input length");
  return gf2::mat_vec(eve_gain, gf2::truncate(x, eve_gain.dim()));
}

}  // namespace detkey::channel
