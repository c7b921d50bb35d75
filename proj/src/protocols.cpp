#include "detkey/protocols.hpp"

#include <sstream>
#include <stdexcept>

#include "detkey/rng.hpp"

namespace detkey::proto {

namespace {

constexpr std::uint64_t kLaneInputA = 6;
constexpr std::uint64_t kLaneInputB = 7;

void require_gain_dims(const channel::ChannelTopology& topo,
                       const channel::RoundGains& g) {
  if (g.k_matrix.dim() != topo.n_a || g.k_prime_matrix.dim() != topo.n_b ||
      g.eve1.dim() != topo.n_1 || g.eve2.dim() != topo.n_2)
    throw std::invalid_argument("round gains do not match the topology");
}

RoundOutcome finish_round(const channel::ChannelTopology& topo,
                          const channel::RoundGains& gains, gf2::BitVec x_a,
                          gf2::BitVec x_b) {
  RoundOutcome out{RoundRecord{gains, std::move(x_a), std::move(x_b),
                               gf2::BitVec(), gf2::BitVec(), gf2::BitVec(),
                               gf2::BitVec()},
                   gf2::BitVec(), gf2::BitVec()};
  RoundRecord& r = out.record;
  r.y_b = channel::apply_channel(gains.k_matrix, r.x_a);
  r.y_a = channel::apply_channel(gains.k_prime_matrix, r.x_b);
  r.y_e_odd = channel::eve_observe(r.x_a, gains.eve1);
  r.y_e_even = channel::eve_observe(r.x_b, gains.eve2);
  const int m = topo.min_legit();
  out.key_a = gf2::mat_vec(gf2::t_lt(gf2::truncate(r.x_a, m)),
                           gf2::truncate(r.y_a, m));
  out.key_b = gf2::mat_vec(gf2::t_lt(gf2::truncate(r.x_b, m)),
                           gf2::truncate(r.y_b, m));
  return out;
}

void append_rounds(Transcript& t, KeyPair& kp, RoundOutcome&& ro) {
  kp.s_a = kp.s_a.concat(ro.key_a);
  kp.s_b = kp.s_b.concat(ro.key_b);
  t.rounds.push_back(std::move(ro.record));
}

void require_round_count(const std::vector<channel::RoundGains>& gains,
                         int n_rounds) {
  if (n_rounds < 1) throw std::invalid_argument("round count must be >= 1");
  if (static_cast<int>(gains.size()) != n_rounds)
    throw std::invalid_argument("gains_per_round length must equal round count");
}

gf2::BitVec sample_leading_one_word(int len, std::uint64_t seed,
                                    std::uint64_t lane, std::uint64_t round) {
  gf2::BitVec x(len);
  x.set_bit(0, 1);
  for (int i = 1; i < len; ++i)
    x.set_bit(i, rng::counter_bit(seed, lane, round, static_cast<std::uint64_t>(i)));
  return x;
}

}  // namespace

RoundOutcome pilot_round(const channel::ChannelTopology& topo,
                         const channel::RoundGains& gains) {
  require_gain_dims(topo, gains);
  // with x = e_1 the product-form key reduces to the received word itself,
  // cut to the shared window
  return finish_round(topo, gains, gf2::BitVec::e1(topo.n_a),
                      gf2::BitVec::e1(topo.n_b));
}

RoundOutcome product_round(const channel::ChannelTopology& topo,
                           const channel::RoundGains& gains,
                           const gf2::BitVec& x_a, const gf2::BitVec& x_b) {
  require_gain_dims(topo, gains);
  if (x_a.size() != topo.n_a || x_b.size() != topo.n_b)
    throw std::invalid_argument("product_round: input length mismatch");
  if (!x_a.leading_one() || !x_b.leading_one())
    throw std::invalid_argument("product_round: inputs must have leading bit 1");
  return finish_round(topo, gains, x_a, x_b);
}

RoundOutcome mixed_round(const channel::ChannelTopology& topo,
                         const channel::RoundGains& gains,
                         const gf2::BitVec& priv_a, const gf2::BitVec& priv_b) {
  require_gain_dims(topo, gains);
  if (topo.eve_mode != channel::EveMode::StaticIdentity)
    throw std::invalid_argument("mixed_round: requires the static-identity eavesdropper");
  if (priv_a.size() != topo.n_a - topo.n_1 || priv_b.size() != topo.n_b - topo.n_2)
    throw std::invalid_argument("mixed_round: private payload length mismatch");
  if (priv_a.empty() && priv_b.empty())
    throw std::invalid_argument("mixed_round: no private levels");
  const gf2::BitVec x_a =
      gf2::BitVec::e1(topo.n_1).concat(priv_a);
  const gf2::BitVec x_b =
      gf2::BitVec::e1(topo.n_2).concat(priv_b);
  return finish_round(topo, gains, x_a, x_b);
}

std::pair<Transcript, KeyPair> run_pilot(const channel::ChannelTopology& topo,
                                         const std::vector<channel::RoundGains>& gains,
                                         int n_rounds) {
  require_round_count(gains, n_rounds);
  Transcript t;
  KeyPair kp;
  kp.bits_per_round = topo.min_legit();
  for (int r = 0; r < n_rounds; ++r)
    append_rounds(t, kp, pilot_round(topo, gains[r]));
  return {std::move(t), std::move(kp)};
}

std::pair<Transcript, KeyPair> run_product(const channel::ChannelTopology& topo,
                                           const std::vector<channel::RoundGains>& gains,
                                           int n_rounds, std::uint64_t seed_a,
                                           std::uint64_t seed_b) {
  require_round_count(gains, n_rounds);
  Transcript t;
  t.seed_a = seed_a;
  t.seed_b = seed_b;
  KeyPair kp;
  kp.bits_per_round = topo.min_legit();
  for (int r = 0; r < n_rounds; ++r) {
    const auto rr = static_cast<std::uint64_t>(r);
    append_rounds(t, kp,
                  product_round(topo, gains[r],
                                sample_leading_one_word(topo.n_a, seed_a, kLaneInputA, rr),
                                sample_leading_one_word(topo.n_b, seed_b, kLaneInputB, rr)));
  }
  return {std::move(t), std::move(kp)};
}

std::pair<Transcript, KeyPair> run_mixed(const channel::ChannelTopology& topo,
                                         const std::vector<channel::RoundGains>& gains,
                                         int n_rounds, std::uint64_t seed_a,
                                         std::uint64_t seed_b) {
  require_round_count(gains, n_rounds);
  Transcript t;
  t.seed_a = seed_a;
  t.seed_b = seed_b;
  KeyPair kp;
  kp.bits_per_round = topo.min_legit();
  for (int r = 0; r < n_rounds; ++r) {
    const auto rr = static_cast<std::uint64_t>(r);
    gf2::BitVec priv_a(topo.n_a - topo.n_1);
    for (int i = 0; i < priv_a.size(); ++i)
      priv_a.set_bit(i, rng::counter_bit(seed_a, kLaneInputA, rr, static_cast<std::uint64_t>(i)));
    gf2::BitVec priv_b(topo.n_b - topo.n_2);
    for (int i = 0; i < priv_b.size(); ++i)
      priv_b.set_bit(i, rng::counter_bit(seed_b, kLaneInputB, rr, static_cast<std::uint64_t>(i)));
    append_rounds(t, kp, mixed_round(topo, gains[r], priv_a, priv_b));
  }
  return {std::move(t), std::move(kp)};
}

gf2::BitVec extract_secure_key(const gf2::BitVec& key_round,
                               const channel::ChannelTopology& topo) {
  const int m = topo.min_legit();
  const int e = topo.min_eve();
  if (key_round.size() != m)
    throw std::invalid_argument("extract_secure_key: key length must be min(n_a, n_b)");
  return key_round.subrange(e, m - e);
}

RateReport rate_report(const KeyPair& kp, int n_channel_uses,
                       std::optional<double> measured_entropy_bits,
                       std::optional<int> secure_key_bits) {
  if (n_channel_uses < 1)
    throw std::invalid_argument("rate_report: channel uses must be >= 1");
  if (!(kp.s_a == kp.s_b))
    throw std::invalid_argument("rate_report: key disagreement");
  RateReport rep;
  rep.nominal_r_d = static_cast<double>(kp.s_a.size()) / n_channel_uses;
  if (measured_entropy_bits)
    rep.exact_r_d = *measured_entropy_bits / n_channel_uses;
  if (secure_key_bits)
    rep.r_sd = static_cast<double>(*secure_key_bits) / n_channel_uses;
  return rep;
}

std::string transcript_to_text(const Transcript& t) {
  std::ostringstream out;
  for (size_t i = 0; i < t.rounds.size(); ++i) {
    const RoundRecord& r = t.rounds[i];
    out << i << ' ' << r.gains.fine.to_hex() << ' ' << r.x_a.to_hex() << ' '
        << r.x_b.to_hex() << ' ' << r.y_a.to_hex() << ' ' << r.y_b.to_hex()
        << ' ' << r.y_e_odd.to_hex() << ' ' << r.y_e_even.to_hex() << '\n';
  }
  return out.str();
}

std::vector<ParsedRound> transcript_from_text(const std::string& text) {
  std::vector<ParsedRound> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    ParsedRound r;
    std::string tok[8];
    for (int i = 0; i < 8; ++i)
      if (!(fields >> tok[i]))
        throw std::invalid_argument("transcript line " + std::to_string(line_no) +
                                    ": expected 8 fields");
    std::string extra;
    if (fields >> extra)
      throw std::invalid_argument("transcript line " + std::to_string(line_no) +
                                  ": trailing fields");
    try {
      r.index = std::stoi(tok[0]);
      r.fine = gf2::BitVec::from_hex(tok[1]);
      r.x_a = gf2::BitVec::from_hex(tok[2]);
      r.x_b = gf2::BitVec::from_hex(tok[3]);
      r.y_a = gf2::BitVec::from_hex(tok[4]);
      r.y_b = gf2::BitVec::from_hex(tok[5]);
      r.y_e_odd = gf2::BitVec::from_hex(tok[6]);
      r.y_e_even = gf2::BitVec::from_hex(tok[7]);
    } catch (const std::exception& e) {
      throw std::invalid_argument("transcript line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void check_transcript(const std::vector<ParsedRound>& rounds) {
  for (size_t i = 0; i < rounds.size(); ++i) {
    const ParsedRound& r = rounds[i];
    const std::string where = "transcript round " + std::to_string(i);
    if (r.index != static_cast<int>(i))
      throw std::runtime_error(where + ": round index out of sequence");
    if (r.x_a.empty() || r.x_b.empty() || !r.x_a.leading_one() || !r.x_b.leading_one())
      throw std::runtime_error(where + ": transmitted word missing leading one");
    if (r.y_b.size() != r.x_a.size() || r.y_a.size() != r.x_b.size())
      throw std::runtime_error(where + ": observation length mismatch");
    if (r.y_e_odd.size() > r.x_a.size() || r.y_e_even.size() > r.x_b.size())
      throw std::runtime_error(where + ": eavesdropper view too long");

    const int m = r.x_a.size() < r.x_b.size() ? r.x_a.size() : r.x_b.size();
    const gf2::BitVec key_a = gf2::mat_vec(gf2::t_lt(gf2::truncate(r.x_a, m)),
                                           gf2::truncate(r.y_a, m));
    const gf2::BitVec key_b = gf2::mat_vec(gf2::t_lt(gf2::truncate(r.x_b, m)),
                                           gf2::truncate(r.y_b, m));
    if (!(key_a == key_b)) throw std::runtime_error(where + ": key disagreement");

    // recover the gain columns implied by the observations and re-check
    // reciprocity plus the recorded shared fine bits
    const gf2::BitVec k_col =
        gf2::mat_vec(gf2::invert(gf2::t_lt(r.x_a)), r.y_b);
    const gf2::BitVec k_prime_col =
        gf2::mat_vec(gf2::invert(gf2::t_lt(r.x_b)), r.y_a);
    if (!k_col.leading_one() || !k_prime_col.leading_one())
      throw std::runtime_error(where + ": implied gain missing leading one");
    if (!(gf2::truncate(k_col, m) == gf2::truncate(k_prime_col, m)))
      throw std::runtime_error(where + ": implied gains violate reciprocity");
    if (r.fine.size() != m - 1 ||
        !(gf2::BitVec::from_bits({1}).concat(r.fine) == gf2::truncate(k_col, m)))
      throw std::runtime_error(where + ": fine bits disagree with observations");
  }
}

}  // namespace detkey::proto
