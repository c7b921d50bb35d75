#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "detkey/config.hpp"
#include "detkey/gaussian.hpp"
#include "detkey/numfmt.hpp"
#include "detkey/protocols.hpp"
#include "detkey/secrecy.hpp"

using detkey::num_g12;
namespace channel = detkey::channel;
namespace config = detkey::config;
namespace gaussian = detkey::gaussian;
namespace proto = detkey::proto;
namespace secrecy = detkey::secrecy;

namespace {

// ===== Small formatting helpers =====

const char* scheme_name(proto::Scheme s) {
  switch (s) {
    case proto::Scheme::Pilot: return "pilot";
    case proto::Scheme::Product: return "product";
    case proto::Scheme::Mixed: return "mixed";
  }
  return "?";
}

const char* eve_mode_name(channel::EveMode m) {
  return m == channel::EveMode::StaticIdentity ? "static-identity"
                                               : "random-gain";
}

const char* coherence_name(channel::Coherence c) {
  return c == channel::Coherence::EveryRound ? "every-round" : "never";
}

void apply_env_cap(config::ExperimentConfig& cfg) {
  const char* s = std::getenv("DETKEY_ENUM_CAP");
  if (!s) return;
  int v = 0;
  const char* last = s + std::string_view(s).size();
  const auto res = std::from_chars(s, last, v);
  if (res.ec != std::errc() || res.ptr != last || v < 1)
    throw config::ConfigError(
        0, 0, std::string("invalid DETKEY_ENUM_CAP value: '") + s + "'");
  cfg.enum_cap = v;
}

// ===== audit =====

int run_audit(const std::string& path, bool as_json, int workers) {
  config::ExperimentConfig cfg = config::load_config(path);
  apply_env_cap(cfg);
  const channel::ChannelTopology topo = cfg.topology();
  const secrecy::AuditOptions opts{cfg.enum_cap, workers};
  const secrecy::SecrecyReport rep =
      secrecy::audit(cfg.scheme, topo, cfg.rounds, cfg.coherence, opts);

  if (as_json) {
    std::cout << secrecy::to_json(rep) << '\n';
  } else {
    std::cout << "scheme: " << scheme_name(cfg.scheme) << '\n'
              << "topology: n_a=" << topo.n_a << " n_b=" << topo.n_b
              << " n_1=" << topo.n_1 << " n_2=" << topo.n_2 << '\n'
              << "eve mode: " << eve_mode_name(cfg.eve_mode) << '\n'
              << "coherence: " << coherence_name(cfg.coherence) << '\n'
              << "rounds: " << cfg.rounds << '\n'
              << "enumerated bits: " << rep.enumerated_bits << '\n'
              << "key length: " << rep.key_len_bits << " bits\n"
              << "key entropy: " << num_g12(rep.key_entropy_bits) << " bits\n"
              << "mismatch probability: " << num_g12(rep.mismatch_prob) << '\n'
              << "leakage: " << num_g12(rep.leakage_bits)
              << (rep.leakage_is_exactly_zero ? " (certified exactly zero)"
                                              : " (not certified zero)")
              << '\n'
              << "r_d: " << num_g12(rep.r_d) << " bits/use\n";
    if (rep.r_sd)
      std::cout << "r_sd: " << num_g12(*rep.r_sd) << " bits/use\n";
    else
      std::cout << "r_sd: undefined\n";
  }

  const bool extraction = cfg.scheme == proto::Scheme::Product &&
                          cfg.eve_mode == channel::EveMode::StaticIdentity;
  bool ok = rep.mismatch_prob == 0.0;
  if (extraction) ok = ok && rep.leakage_is_exactly_zero;
  return ok ? 0 : 1;
}

// ===== sweep =====

void set_sweep_param(config::ExperimentConfig& cfg, const std::string& name,
                     long long v) {
  const auto as_int = [&]() {
    if (v < -2'000'000'000LL || v > 2'000'000'000LL)
      throw std::invalid_argument("sweep value out of range");
    return static_cast<int>(v);
  };
  if (name == "n_a")
    cfg.n_a = as_int();
  else if (name == "n_b")
    cfg.n_b = as_int();
  else if (name == "n_1")
    cfg.n_1 = as_int();
  else if (name == "n_2")
    cfg.n_2 = as_int();
  else if (name == "rounds")
    cfg.rounds = as_int();
  else if (name == "enum_cap")
    cfg.enum_cap = as_int();
  else if (name == "seed")
    cfg.seed = static_cast<std::uint64_t>(v);
  else
    throw config::ConfigError(0, 0, "unknown sweep parameter: " + name);
}

std::vector<long long> parse_values(const std::string& list) {
  std::vector<long long> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string::npos) comma = list.size();
    const std::string_view tok(list.data() + pos, comma - pos);
    long long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw config::ConfigError(
          0, 0, "invalid sweep value: '" + std::string(tok) + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

int run_sweep(const std::string& path, const std::string& param,
              const std::string& values, int workers) {
  config::ExperimentConfig base = config::load_config(path);
  apply_env_cap(base);
  {
    // validate the parameter name up front; a typo is a config error, not an
    // infeasible point
    config::ExperimentConfig probe = base;
    set_sweep_param(probe, param, 1);
  }
  const std::vector<long long> points = parse_values(values);

  std::cout << "value,r_d,r_sd,key_entropy,leakage,mismatch\n";
  for (long long v : points) {
    config::ExperimentConfig cfg = base;
    try {
      set_sweep_param(cfg, param, v);
      const channel::ChannelTopology topo = cfg.topology();
      const secrecy::AuditOptions opts{cfg.enum_cap, workers};
      const secrecy::SecrecyReport rep =
          secrecy::audit(cfg.scheme, topo, cfg.rounds, cfg.coherence, opts);
      std::cout << v << ',' << secrecy::to_csv_row(rep) << '\n';
    } catch (const std::exception& e) {
      std::cout << v << ",error,,,,\n";
      std::cerr << "sweep: " << param << "=" << v << ": " << e.what() << '\n';
    }
  }
  return 0;
}

// ===== bound =====

struct BoundArgs {
  CLI::Option* p_opt = nullptr;
  CLI::Option* sk_opt = nullptr;
  CLI::Option* sz_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  CLI::Option* rel_tol_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  double p = 0, sk = 0, sz = 0;
  std::string method = "quad";
  std::uint64_t samples = 0;
  double rel_tol = 0;
  std::uint64_t seed = 0;
  std::string config_path;
  int workers = 1;
  bool csv = false;
  bool as_json = false;
};

int run_bound(const BoundArgs& a) {
  gaussian::GaussianParams params;
  config::GaussianBlock defaults;
  std::uint64_t seed = 1;
  const bool have_config = !a.config_path.empty();
  if (have_config) {
    const config::ExperimentConfig cfg = config::load_config(a.config_path);
    defaults = cfg.gauss;
    params = defaults.params;
    seed = cfg.seed;
  } else {
    for (const auto& [opt, name] :
         {std::pair{a.p_opt, "--p"}, std::pair{a.sk_opt, "--sigma-k-sq"},
          std::pair{a.sz_opt, "--sigma-z-sq"}}) {
      if (opt->count() == 0)
        throw config::ConfigError(
            0, 0,
            std::string("missing required flag ") + name +
                " (or supply --config); see 'detkey bound --help'");
    }
  }
  if (a.p_opt->count()) params.p = a.p;
  if (a.sk_opt->count()) params.sigma_k_sq = a.sk;
  if (a.sz_opt->count()) params.sigma_z_sq = a.sz;
  const std::uint64_t samples =
      a.samples_opt->count() ? a.samples : defaults.samples;
  const double rel_tol = a.rel_tol_opt->count() ? a.rel_tol : defaults.rel_tol;
  if (a.seed_opt->count()) seed = a.seed;
  params.validate();

  gaussian::BoundEstimate est;
  if (a.method == "mc")
    est = gaussian::theorem1_mc(params, samples, seed, a.workers);
  else
    est = gaussian::theorem1_quadrature(params, rel_tol);

  if (a.csv) {
    std::cout << gaussian::bound_csv_header() << '\n'
              << gaussian::bound_csv_row(params, est) << '\n';
  } else if (a.as_json) {
    nlohmann::ordered_json j;
    j["p"] = params.p;
    j["sigma_k_sq"] = params.sigma_k_sq;
    j["sigma_z_sq"] = params.sigma_z_sq;
    j["method"] = a.method == "mc" ? "mc" : "quad";
    if (a.method == "mc") {
      j["samples"] = samples;
      j["seed"] = seed;
    } else {
      j["rel_tol"] = rel_tol;
    }
    j["value"] = est.value;
    j["value_clamped"] = est.value_clamped();
    j["std_error"] = est.std_error;
    j["terms"] = est.terms;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "p = " << num_g12(params.p) << '\n'
              << "sigma_k_sq = " << num_g12(params.sigma_k_sq) << '\n'
              << "sigma_z_sq = " << num_g12(params.sigma_z_sq) << '\n'
              << "method = " << a.method << '\n';
    if (a.method == "mc")
      std::cout << "samples = " << samples << '\n' << "seed = " << seed << '\n';
    else
      std::cout << "rel_tol = " << num_g12(rel_tol) << '\n';
    std::cout << "value = " << num_g12(est.value) << '\n'
              << "value_clamped = " << num_g12(est.value_clamped()) << '\n'
              << "std_error = " << num_g12(est.std_error) << '\n';
    for (int i = 0; i < 4; ++i)
      std::cout << "term" << i + 1 << " = " << num_g12(est.terms[i]) << '\n';
  }
  return 0;
}

// ===== demo =====

int run_demo() {
  // one product-signalling round on the worked (4,4,2,2) static topology
  const channel::ChannelTopology topo(4, 4, 2, 2,
                                      channel::EveMode::StaticIdentity);
  const std::uint64_t seed = 7;
  const auto gains =
      channel::sample_gains(topo, seed, 1, channel::Coherence::EveryRound);
  const auto [transcript, keys] = proto::run_product(topo, gains, 1, seed, seed);
  const proto::RoundRecord& r = transcript.rounds.front();

  std::cout << "demo: product signalling, one round\n"
            << "topology: n_a=4 n_b=4 n_1=2 n_2=2, eve mode static-identity\n"
            << "seed: " << seed << "\n\n"
            << "transcript (round fine x_a x_b y_a y_b y_e_odd y_e_even):\n"
            << proto::transcript_to_text(transcript) << '\n'
            << "x_a: " << r.x_a.to_string() << '\n'
            << "x_b: " << r.x_b.to_string() << '\n'
            << "key alice: " << keys.s_a.to_string() << '\n'
            << "key bob:   " << keys.s_b.to_string() << '\n'
            << "keys match: " << (keys.s_a == keys.s_b ? "yes" : "no") << '\n'
            << "eve view: odd " << r.y_e_odd.to_string() << ", even "
            << r.y_e_even.to_string() << '\n';

  const detkey::gf2::BitVec secure = proto::extract_secure_key(keys.s_a, topo);
  std::cout << "secure key: " << secure.to_string() << " (" << secure.size()
            << " bits)\n"
            << "secure rate: " << num_g12(secure.size() / 2.0) << " bits/use\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and exact secrecy auditor for key generation over "
               "deterministic lower-triangular channels"};
  app.require_subcommand(1);

  std::string audit_path;
  bool audit_json = false;
  int audit_workers = 1;
  CLI::App* audit = app.add_subcommand("audit", "exhaustive secrecy audit");
  audit->add_option("config", audit_path, "experiment config file")
      ->required();
  audit->add_flag("--json", audit_json, "emit the report as JSON");
  audit->add_option("--workers", audit_workers, "enumeration worker threads")
      ->check(CLI::PositiveNumber);

  std::string sweep_path, sweep_param, sweep_values;
  int sweep_workers = 1;
  CLI::App* sweep =
      app.add_subcommand("sweep", "audit across one numeric parameter");
  sweep->add_option("config", sweep_path, "experiment config file")
      ->required();
  sweep->add_option("--param", sweep_param, "numeric config key to sweep")
      ->required();
  sweep->add_option("--values", sweep_values,
                    "comma-separated integer values (may be empty)");
  sweep->add_option("--workers", sweep_workers, "enumeration worker threads")
      ->check(CLI::PositiveNumber);

  BoundArgs ba;
  CLI::App* bound =
      app.add_subcommand("bound", "evaluate the Gaussian key-rate bound");
  ba.p_opt = bound->add_option("--p", ba.p, "input power");
  ba.sk_opt = bound->add_option("--sigma-k-sq", ba.sk, "gain variance");
  ba.sz_opt = bound->add_option("--sigma-z-sq", ba.sz, "noise variance");
  bound->add_option("--method", ba.method, "estimator")
      ->check(CLI::IsMember({"mc", "quad"}));
  ba.samples_opt = bound->add_option("--samples", ba.samples, "MC samples");
  ba.rel_tol_opt =
      bound->add_option("--rel-tol", ba.rel_tol, "quadrature tolerance");
  ba.seed_opt = bound->add_option("--seed", ba.seed, "MC seed");
  bound->add_option("--config", ba.config_path,
                    "config file supplying gaussian.* defaults");
  bound->add_option("--workers", ba.workers, "MC worker threads")
      ->check(CLI::PositiveNumber);
  bound->add_flag("--csv", ba.csv, "emit CSV");
  bound->add_flag("--json", ba.as_json, "emit JSON");

  CLI::App* demo =
      app.add_subcommand("demo", "worked product-signalling example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (audit->parsed()) return run_audit(audit_path, audit_json, audit_workers);
    if (sweep->parsed())
      return run_sweep(sweep_path, sweep_param, sweep_values, sweep_workers);
    if (bound->parsed()) return run_bound(ba);
    if (demo->parsed()) return run_demo();
    return 2;
  } catch (const config::ConfigError& e) {
    if (e.line > 0)
      std::cerr << "config error at line " << e.line << ", col " << e.col
                << ": " << e.what() << '\n';
    else
      std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const secrecy::EnumCapExceeded& e) {
    std::cerr << "enumeration cap exceeded: need " << e.required_bits
              << " free bits, cap is " << e.cap
              << " (raise enum_cap or DETKEY_ENUM_CAP)\n";
    return 3;
  } catch (const gaussian::QuadratureError& e) {
    std::cerr << e.what()
              << "; best estimate value = " << num_g12(e.best.value) << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
