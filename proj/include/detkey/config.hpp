#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "detkey/channel.hpp"
#include "detkey/gaussian.hpp"
#include "detkey/protocols.hpp"

// Flat "key = value" experiment configs with # comments. Unknown and
// duplicate keys are rejected; topology constraints are checked as soon as
// all four dimensions are known, so a bad config never reaches a run.

namespace detkey::config {

// line/col are 1-based byte positions; line 0 means the error has no single
// location (missing key, unreadable file).
struct ConfigError : std::runtime_error {
  int line = 0;
  int col = 0;
  ConfigError(int line_, int col_, const std::string& msg);
};

struct GaussianBlock {
  gaussian::GaussianParams params;      // gaussian.p, .sigma_k_sq, .sigma_z_sq
  std::uint64_t samples = 1'000'000;    // gaussian.samples
  double rel_tol = 1e-6;                // gaussian.rel_tol
};

struct ExperimentConfig {
  proto::Scheme scheme = proto::Scheme::Product;
  std::optional<int> n_a, n_b, n_1, n_2;
  channel::EveMode eve_mode = channel::EveMode::StaticIdentity;
  channel::Coherence coherence = channel::Coherence::EveryRound;
  int rounds = 1;
  std::uint64_t seed = 1;
  int enum_cap = 24;
  GaussianBlock gauss;

  // Requires all four dimensions; missing ones raise ConfigError, topology
  // violations raise std::invalid_argument from the constructor.
  channel::ChannelTopology topology() const;
};

// Accepted keys: scheme (pilot|product|mixed), n_a, n_b, n_1, n_2,
// eve_mode (static-identity|random-gain), coherence (every-round|never),
// rounds, seed, enum_cap, gaussian.p, gaussian.sigma_k_sq,
// gaussian.sigma_z_sq, gaussian.samples, gaussian.rel_tol.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

}  // namespace detkey::config
