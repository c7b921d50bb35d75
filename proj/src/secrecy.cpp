#include "detkey/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include <json.hpp>

#include "detkey/numfmt.hpp"

namespace detkey::secrecy {

namespace {

using channel::ChannelTopology;
using channel::Coherence;
using channel::EveMode;

int bit_of(std::uint64_t v, int idx) {
  return static_cast<int>((v >> idx) & 1u);
}

// Bit layout of one enumerated assignment: first the gain segments (one per
// gain sample; a single sample serves every round under Coherence::Never),
// each holding the shared fine bits and then the eavesdropper fine bits,
// followed by the per-round input segments.
struct Layout {
  proto::Scheme scheme;
  ChannelTopology topo;
  int rounds;
  Coherence coherence;
  bool legit_random;
  bool eve_random;
  int shared_bits;   // per gain sample
  int eve_bits;      // per gain sample
  int gain_stride;
  int gain_samples;
  int in_a_bits, in_b_bits;  // per round
  int total_bits;

  int gain_base(int sample) const { return sample * gain_stride; }
  int input_base(int round) const {
    return gain_samples * gain_stride + round * (in_a_bits + in_b_bits);
  }
  int sample_for_round(int r) const {
    return coherence == Coherence::Never ? 0 : r;
  }
};

Layout make_layout(proto::Scheme scheme, const ChannelTopology& topo,
                   int rounds, Coherence coherence,
                   bool force_random_gains = false) {
  if (rounds < 1)
    throw std::invalid_argument("enumeration: round count must be >= 1");
  if (scheme == proto::Scheme::Mixed) {
    if (topo.eve_mode != EveMode::StaticIdentity)
      throw std::invalid_argument(
          "enumeration: mixed signalling requires the static-identity eavesdropper");
    if (topo.n_a == topo.n_1 && topo.n_b == topo.n_2)
      throw std::invalid_argument("enumeration: mixed signalling has no private levels");
  }

  Layout L{scheme, topo, rounds, coherence,
           /*legit_random=*/false, /*eve_random=*/false,
           0, 0, 0, 0, 0, 0, 0};
  L.legit_random =
      force_random_gains || !(scheme == proto::Scheme::Product &&
                              topo.eve_mode == EveMode::StaticIdentity);
  L.eve_random = topo.eve_mode == EveMode::RandomGain;
  L.shared_bits = L.legit_random ? topo.min_legit() - 1 : 0;
  L.eve_bits = L.eve_random ? (topo.n_1 - 1) + (topo.n_2 - 1) : 0;
  L.gain_stride = L.shared_bits + L.eve_bits;
  L.gain_samples = coherence == Coherence::Never ? 1 : rounds;
  switch (scheme) {
    case proto::Scheme::Pilot:
      break;
    case proto::Scheme::Product:
      L.in_a_bits = topo.n_a - 1;
      L.in_b_bits = topo.n_b - 1;
      break;
    case proto::Scheme::Mixed:
      L.in_a_bits = topo.n_a - topo.n_1;
      L.in_b_bits = topo.n_b - topo.n_2;
      break;
  }
  L.total_bits =
      L.gain_samples * L.gain_stride + rounds * (L.in_a_bits + L.in_b_bits);
  return L;
}

channel::RoundGains gains_for(const Layout& L, std::uint64_t v, int round) {
  const ChannelTopology& topo = L.topo;
  gf2::BitVec fine_a(topo.n_a - 1);
  gf2::BitVec fine_b(topo.n_b - 1);
  gf2::BitVec fine_e1(topo.n_1 - 1);
  gf2::BitVec fine_e2(topo.n_2 - 1);
  const int base = L.gain_base(L.sample_for_round(round));
  // fine bits beyond the shared window never reach key, eavesdropper view or
  // mismatch test, so they are pinned to zero instead of enumerated
  for (int i = 0; i < L.shared_bits; ++i) {
    const int b = bit_of(v, base + i);
    fine_a.set_bit(i, b);
    fine_b.set_bit(i, b);
  }
  if (L.eve_random) {
    int eb = base + L.shared_bits;
    for (int i = 0; i < topo.n_1 - 1; ++i) fine_e1.set_bit(i, bit_of(v, eb + i));
    eb += topo.n_1 - 1;
    for (int i = 0; i < topo.n_2 - 1; ++i) fine_e2.set_bit(i, bit_of(v, eb + i));
  }
  return channel::make_round_gains(topo, fine_a, fine_b, fine_e1, fine_e2);
}

proto::RoundOutcome round_for(const Layout& L, std::uint64_t v, int round) {
  const ChannelTopology& topo = L.topo;
  const channel::RoundGains gains = gains_for(L, v, round);
  const int ib = L.input_base(round);
  switch (L.scheme) {
    case proto::Scheme::Pilot:
      return proto::pilot_round(topo, gains);
    case proto::Scheme::Product: {
      gf2::BitVec x_a(topo.n_a);
      x_a.set_bit(0, 1);
      for (int i = 1; i < topo.n_a; ++i) x_a.set_bit(i, bit_of(v, ib + i - 1));
      gf2::BitVec x_b(topo.n_b);
      x_b.set_bit(0, 1);
      for (int i = 1; i < topo.n_b; ++i)
        x_b.set_bit(i, bit_of(v, ib + L.in_a_bits + i - 1));
      return proto::product_round(topo, gains, x_a, x_b);
    }
    case proto::Scheme::Mixed: {
      gf2::BitVec priv_a(L.in_a_bits);
      for (int i = 0; i < L.in_a_bits; ++i) priv_a.set_bit(i, bit_of(v, ib + i));
      gf2::BitVec priv_b(L.in_b_bits);
      for (int i = 0; i < L.in_b_bits; ++i)
        priv_b.set_bit(i, bit_of(v, ib + L.in_a_bits + i));
      return proto::mixed_round(topo, gains, priv_a, priv_b);
    }
  }
  throw std::logic_error("unreachable scheme");
}

using CellMap = std::map<std::pair<std::string, std::string>, std::uint64_t>;

struct Tally {
  CellMap full;
  CellMap secure;
  std::uint64_t mismatch = 0;
};

void run_range(const Layout& L, std::uint64_t lo, std::uint64_t hi,
               bool want_secure, Tally& t) {
  for (std::uint64_t v = lo; v < hi; ++v) {
    gf2::BitVec key, eve, secure;
    bool mismatch = false;
    for (int r = 0; r < L.rounds; ++r) {
      const proto::RoundOutcome ro = round_for(L, v, r);
      mismatch = mismatch || !(ro.key_a == ro.key_b);
      key = key.concat(ro.key_a);
      eve = eve.concat(ro.record.y_e_odd).concat(ro.record.y_e_even);
      if (want_secure)
        secure = secure.concat(proto::extract_secure_key(ro.key_a, L.topo));
    }
    const std::string eve_hex = eve.to_hex();
    ++t.full[{key.to_hex(), eve_hex}];
    if (want_secure) ++t.secure[{secure.to_hex(), eve_hex}];
    if (mismatch) ++t.mismatch;
  }
}

void merge_into(Tally& into, const Tally& part) {
  for (const auto& [cell, c] : part.full) into.full[cell] += c;
  for (const auto& [cell, c] : part.secure) into.secure[cell] += c;
  into.mismatch += part.mismatch;
}

Tally enumerate_all(const Layout& L, const AuditOptions& opts,
                    bool want_secure) {
  if (L.total_bits > opts.enum_cap || L.total_bits > 62)
    throw EnumCapExceeded(L.total_bits, opts.enum_cap);
  const std::uint64_t total = std::uint64_t{1} << L.total_bits;
  int workers = opts.workers < 1 ? 1 : opts.workers;
  if (static_cast<std::uint64_t>(workers) > total)
    workers = static_cast<int>(total);
  if (workers == 1) {
    Tally t;
    run_range(L, 0, total, want_secure, t);
    return t;
  }
  std::vector<Tally> parts(static_cast<size_t>(workers));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  const std::uint64_t chunk = total / workers;
  const std::uint64_t rem = total % workers;
  std::uint64_t lo = 0;
  for (int w = 0; w < workers; ++w) {
    const std::uint64_t hi =
        lo + chunk + (static_cast<std::uint64_t>(w) < rem ? 1 : 0);
    threads.emplace_back(run_range, std::cref(L), lo, hi, want_secure,
                         std::ref(parts[static_cast<size_t>(w)]));
    lo = hi;
  }
  for (auto& th : threads) th.join();
  Tally merged;
  for (const auto& p : parts) merge_into(merged, p);
  return merged;
}

JointDistribution from_cells(int bits, CellMap cells) {
  JointDistribution d;
  d.enumerated_bits = bits;
  d.total_weight = std::uint64_t{1} << bits;
  d.cells = std::move(cells);
  std::uint64_t sum = 0;
  for (const auto& [cell, c] : d.cells) sum += c;
  if (sum != d.total_weight)
    throw std::logic_error("enumeration count does not sum to 2^B");
  return d;
}

double entropy_of_counts(const std::map<std::string, std::uint64_t>& counts,
                         std::uint64_t total) {
  double sum = 0.0;
  for (const auto& [value, c] : counts)
    sum += static_cast<double>(c) * std::log2(static_cast<double>(c));
  return std::log2(static_cast<double>(total)) -
         sum / static_cast<double>(total);
}

bool is_extraction_case(proto::Scheme scheme, const ChannelTopology& topo) {
  return scheme == proto::Scheme::Product &&
         topo.eve_mode == EveMode::StaticIdentity;
}

}  // namespace

EnumCapExceeded::EnumCapExceeded(int required, int cap_limit)
    : std::runtime_error("enumeration needs " + std::to_string(required) +
                         " free bits, cap is " + std::to_string(cap_limit)),
      required_bits(required),
      cap(cap_limit) {}

std::map<std::string, std::uint64_t> JointDistribution::key_marginal() const {
  std::map<std::string, std::uint64_t> m;
  for (const auto& [cell, c] : cells) m[cell.first] += c;
  return m;
}

std::map<std::string, std::uint64_t> JointDistribution::eve_marginal() const {
  std::map<std::string, std::uint64_t> m;
  for (const auto& [cell, c] : cells) m[cell.second] += c;
  return m;
}

double entropy(const JointDistribution& dist, Which which) {
  if (dist.total_weight == 0)
    throw std::invalid_argument("entropy: empty distribution");
  if (which == Which::Key) return entropy_of_counts(dist.key_marginal(), dist.total_weight);
  if (which == Which::Eve) return entropy_of_counts(dist.eve_marginal(), dist.total_weight);
  double sum = 0.0;
  for (const auto& [cell, c] : dist.cells)
    sum += static_cast<double>(c) * std::log2(static_cast<double>(c));
  return std::log2(static_cast<double>(dist.total_weight)) -
         sum / static_cast<double>(dist.total_weight);
}

MutualInformation mutual_information(const JointDistribution& dist) {
  if (dist.total_weight == 0)
    throw std::invalid_argument("mutual_information: empty distribution");
  const auto key_m = dist.key_marginal();
  const auto eve_m = dist.eve_marginal();
  // checking the identity on occupied cells suffices: if every occupied cell
  // satisfies it, the total mass 2^B forces every (s,e) pair to be occupied
  bool exactly_zero = true;
  for (const auto& [cell, c] : dist.cells) {
    const auto lhs = static_cast<unsigned __int128>(c) * dist.total_weight;
    const auto rhs = static_cast<unsigned __int128>(key_m.at(cell.first)) *
                     eve_m.at(cell.second);
    if (lhs != rhs) {
      exactly_zero = false;
      break;
    }
  }
  MutualInformation mi;
  mi.exactly_zero = exactly_zero;
  if (exactly_zero) return mi;  // bits stays exactly 0.0
  const double h_key = entropy_of_counts(key_m, dist.total_weight);
  const double h_eve = entropy_of_counts(eve_m, dist.total_weight);
  const double h_joint = entropy(dist, Which::Joint);
  mi.bits = std::max(0.0, h_key + h_eve - h_joint);
  return mi;
}

JointDistribution enumerate_joint(proto::Scheme scheme,
                                  const ChannelTopology& topo, int n_rounds,
                                  Coherence coherence,
                                  const AuditOptions& opts,
                                  bool secure_slice) {
  if (secure_slice && !is_extraction_case(scheme, topo))
    throw std::invalid_argument(
        "secure slice is defined only for product signalling with the "
        "static-identity eavesdropper");
  const Layout L = make_layout(scheme, topo, n_rounds, coherence);
  Tally t = enumerate_all(L, opts, secure_slice);
  return from_cells(L.total_bits,
                    secure_slice ? std::move(t.secure) : std::move(t.full));
}

SecrecyReport audit(proto::Scheme scheme, const ChannelTopology& topo,
                    int n_rounds, Coherence coherence,
                    const AuditOptions& opts) {
  const Layout L = make_layout(scheme, topo, n_rounds, coherence);
  const bool extraction = is_extraction_case(scheme, topo);
  Tally t = enumerate_all(L, opts, extraction);

  SecrecyReport rep;
  rep.enumerated_bits = L.total_bits;
  rep.key_len_bits = topo.min_legit() * n_rounds;

  const JointDistribution full = from_cells(L.total_bits, std::move(t.full));
  rep.key_entropy_bits = entropy(full, Which::Key);
  rep.mismatch_prob =
      static_cast<double>(t.mismatch) / static_cast<double>(full.total_weight);
  rep.r_d = rep.key_entropy_bits / (2.0 * n_rounds);

  if (extraction) {
    const JointDistribution sec = from_cells(L.total_bits, std::move(t.secure));
    const MutualInformation mi = mutual_information(sec);
    rep.leakage_bits = mi.bits;
    rep.leakage_is_exactly_zero = mi.exactly_zero;
    if (mi.exactly_zero)
      rep.r_sd = entropy(sec, Which::Key) / (2.0 * n_rounds);
  } else {
    const MutualInformation mi = mutual_information(full);
    rep.leakage_bits = mi.bits;
    rep.leakage_is_exactly_zero = mi.exactly_zero;
    if (mi.exactly_zero) rep.r_sd = rep.r_d;
  }
  return rep;
}

ChainReport entropy_chain_check(const ChannelTopology& topo,
                                const AuditOptions& opts) {
  if (!(topo.n_a == topo.n_b && topo.n_b == topo.n_1 && topo.n_1 == topo.n_2))
    throw std::invalid_argument(
        "entropy_chain_check: all four level counts must be equal");
  if (topo.eve_mode != EveMode::StaticIdentity)
    throw std::invalid_argument(
        "entropy_chain_check: requires the static-identity eavesdropper");
  // product signalling with the gain genuinely random, one round
  const Layout L = make_layout(proto::Scheme::Product, topo, 1,
                               Coherence::EveryRound,
                               /*force_random_gains=*/true);
  if (L.total_bits > opts.enum_cap || L.total_bits > 62)
    throw EnumCapExceeded(L.total_bits, opts.enum_cap);
  const std::uint64_t total = std::uint64_t{1} << L.total_bits;
  const int n = topo.n_a;

  std::map<std::pair<std::string, std::string>, std::uint64_t> joint_in_key;
  std::map<std::string, std::uint64_t> k_tally;
  std::map<std::string, std::uint64_t> w_tally;
  for (std::uint64_t v = 0; v < total; ++v) {
    const proto::RoundOutcome ro = round_for(L, v, 0);
    const gf2::BitVec k_col = ro.record.gains.k_matrix.first_col();
    // independent route for the right side: push the gain column through
    // both input matrices instead of reading the key off the observation
    const gf2::BitVec w = gf2::mat_vec(
        gf2::t_lt(ro.record.x_b),
        gf2::mat_vec(gf2::t_lt(ro.record.x_a), k_col));
    const std::string in_hex = ro.record.x_a.concat(ro.record.x_b).to_hex();
    ++joint_in_key[{in_hex, ro.key_a.to_hex()}];
    ++k_tally[k_col.to_hex()];
    ++w_tally[w.to_hex()];
  }

  std::map<std::string, std::uint64_t> in_m, key_m;
  for (const auto& [cell, c] : joint_in_key) {
    in_m[cell.first] += c;
    key_m[cell.second] += c;
  }
  double h_joint = 0.0;
  {
    double sum = 0.0;
    for (const auto& [cell, c] : joint_in_key)
      sum += static_cast<double>(c) * std::log2(static_cast<double>(c));
    h_joint = std::log2(static_cast<double>(total)) -
              sum / static_cast<double>(total);
  }

  ChainReport rep;
  rep.lhs = entropy_of_counts(in_m, total) + entropy_of_counts(key_m, total) -
            h_joint;
  rep.rhs = entropy_of_counts(w_tally, total) - entropy_of_counts(k_tally, total);

  // integer certificate that lhs == rhs: (a) the key tally equals the
  // pushed-column tally, (b) within every input slice the key counts,
  // rescaled to the full weight, are a permutation of the gain-column counts
  bool match = key_m == w_tally;
  std::vector<std::uint64_t> k_counts;
  k_counts.reserve(k_tally.size());
  for (const auto& [value, c] : k_tally) k_counts.push_back(c);
  std::sort(k_counts.begin(), k_counts.end());
  const std::uint64_t in_free = static_cast<std::uint64_t>(n - 1) * 2;
  const std::uint64_t slice_total = total >> in_free;
  for (auto it = joint_in_key.begin(); match && it != joint_in_key.end();) {
    const std::string& slice = it->first.first;
    std::vector<std::uint64_t> counts;
    std::uint64_t seen = 0;
    while (it != joint_in_key.end() && it->first.first == slice) {
      counts.push_back(it->second * (total / slice_total));
      seen += it->second;
      ++it;
    }
    std::sort(counts.begin(), counts.end());
    if (seen != slice_total || counts != k_counts) match = false;
  }
  rep.distributions_match = match;
  return rep;
}

std::string to_json(const SecrecyReport& r) {
  nlohmann::ordered_json j;
  j["key_len_bits"] = r.key_len_bits;
  j["key_entropy_bits"] = r.key_entropy_bits;
  j["leakage_bits"] = r.leakage_bits;
  j["leakage_is_exactly_zero"] = r.leakage_is_exactly_zero;
  j["mismatch_prob"] = r.mismatch_prob;
  j["r_d"] = r.r_d;
  if (r.r_sd)
    j["r_sd"] = *r.r_sd;
  else
    j["r_sd"] = nullptr;
  j["enumerated_bits"] = r.enumerated_bits;
  return j.dump(2);
}

std::string to_csv_row(const SecrecyReport& r) {
  std::string row = num_g12(r.r_d);
  row += ',';
  if (r.r_sd) row += num_g12(*r.r_sd);
  row += ',';
  row += num_g12(r.key_entropy_bits);
  row += ',';
  row += num_g12(r.leakage_bits);
  row += ',';
  row += num_g12(r.mismatch_prob);
  return row;
}

}  // namespace detkey::secrecy
