#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "detkey/channel.hpp"
#include "detkey/protocols.hpp"

// Exact secrecy audit by exhaustive enumeration. Every free random bit of a
// run (fine gain bits, eavesdropper gain bits, input bits) is enumerated, so
// the joint distribution of key and eavesdropper view is a table of integer
// counts over 2^B assignments and all secrecy statements are certified with
// integer arithmetic, never with a floating-point threshold.
//
// Product signalling with the static-identity eavesdropper is the fully
// static world: the legitimate gains are pinned to identity as well, and the
// key randomness comes from the inputs alone. All other scheme/eve-mode
// combinations enumerate the fine gain bits.

namespace detkey::secrecy {

struct EnumCapExceeded : std::runtime_error {
  int required_bits;
  int cap;
  EnumCapExceeded(int required, int cap_limit);
};

struct AuditOptions {
  int enum_cap = 24;  // max free bits B; 2^B protocol evaluations
  int workers = 1;    // result is bit-identical for any worker count
};

// Dyadic joint distribution of (key value, eavesdropper view), both encoded
// as BitVec "len:hex" strings. Counts sum to exactly 2^enumerated_bits.
struct JointDistribution {
  int enumerated_bits = 0;
  std::uint64_t total_weight = 0;
  std::map<std::pair<std::string, std::string>, std::uint64_t> cells;

  std::map<std::string, std::uint64_t> key_marginal() const;
  std::map<std::string, std::uint64_t> eve_marginal() const;
};

enum class Which { Key, Eve, Joint };

double entropy(const JointDistribution& dist, Which which);

struct MutualInformation {
  double bits = 0.0;
  // decided by the integer identity count(s,e)*2^B == count(s)*count(e)
  bool exactly_zero = false;
};

MutualInformation mutual_information(const JointDistribution& dist);

// Tally (key, eve view) over all 2^B free-bit assignments. With secure_slice
// the key column holds extract_secure_key of each per-round key instead;
// that view exists only for product signalling with the static-identity
// eavesdropper.
JointDistribution enumerate_joint(proto::Scheme scheme,
                                  const channel::ChannelTopology& topo,
                                  int n_rounds, channel::Coherence coherence,
                                  const AuditOptions& opts = {},
                                  bool secure_slice = false);

struct SecrecyReport {
  int key_len_bits = 0;
  double key_entropy_bits = 0.0;
  double leakage_bits = 0.0;
  bool leakage_is_exactly_zero = false;
  double mismatch_prob = 0.0;
  double r_d = 0.0;               // key entropy per channel use
  std::optional<double> r_sd;     // present once leakage is certified zero
  int enumerated_bits = 0;
};

// Leakage is measured on the extracted secure key when extraction applies
// (product + static identity) and on the full key otherwise. r_sd is the
// per-use entropy of whichever key the zero-leakage certificate covers.
SecrecyReport audit(proto::Scheme scheme, const channel::ChannelTopology& topo,
                    int n_rounds, channel::Coherence coherence,
                    const AuditOptions& opts = {});

// The three-line chain identity for product signalling with all four level
// counts equal: I(inputs; key) on the left, H(X_B X_A k) - H(k) on the
// right, the right side computed through an independent route (gain column
// pushed through both input matrices). distributions_match certifies, in
// integer arithmetic, that (a) within every input slice the key counts are a
// scaled permutation of the gain-column counts and (b) the key tally equals
// the pushed-column tally; it implies lhs == rhs without float tolerance.
struct ChainReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool distributions_match = false;
};

ChainReport entropy_chain_check(const channel::ChannelTopology& topo,
                                const AuditOptions& opts = {});

// Flat JSON object with the exact report field names; r_sd is null when
// absent. Key order is fixed so equal reports serialize byte-identically.
std::string to_json(const SecrecyReport& r);

// "r_d,r_sd,key_entropy,leakage,mismatch" with %.12g numbers; r_sd empty
// when absent.
std::string to_csv_row(const SecrecyReport& r);

}  // namespace detkey::secrecy
