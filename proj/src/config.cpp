#include "detkey/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace detkey::config {

namespace {

struct Loc {
  int line = 0;
  int col = 0;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// ===== Scalar value parsers, all full-consume =====

template <typename T>
T parse_number(std::string_view text, const Loc& at, const char* key) {
  T out{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError(at.line, at.col,
                      std::string("invalid value for ") + key + ": '" +
                          std::string(text) + "'");
  return out;
}

double parse_real(std::string_view text, const Loc& at, const char* key) {
  return parse_number<double>(text, at, key);
}

proto::Scheme parse_scheme(std::string_view v, const Loc& at) {
  if (v == "pilot") return proto::Scheme::Pilot;
  if (v == "product") return proto::Scheme::Product;
  if (v == "mixed") return proto::Scheme::Mixed;
  throw ConfigError(at.line, at.col,
                    "invalid value for scheme: '" + std::string(v) +
                        "' (pilot|product|mixed)");
}

channel::EveMode parse_eve_mode(std::string_view v, const Loc& at) {
  if (v == "static-identity") return channel::EveMode::StaticIdentity;
  if (v == "random-gain") return channel::EveMode::RandomGain;
  throw ConfigError(at.line, at.col,
                    "invalid value for eve_mode: '" + std::string(v) +
                        "' (static-identity|random-gain)");
}

channel::Coherence parse_coherence(std::string_view v, const Loc& at) {
  if (v == "every-round") return channel::Coherence::EveryRound;
  if (v == "never") return channel::Coherence::Never;
  throw ConfigError(at.line, at.col,
                    "invalid value for coherence: '" + std::string(v) +
                        "' (every-round|never)");
}

}  // namespace

ConfigError::ConfigError(int line_, int col_, const std::string& msg)
    : std::runtime_error(msg), line(line_), col(col_) {}

channel::ChannelTopology ExperimentConfig::topology() const {
  const std::pair<const std::optional<int>*, const char*> dims[] = {
      {&n_a, "n_a"}, {&n_b, "n_b"}, {&n_1, "n_1"}, {&n_2, "n_2"}};
  for (const auto& [dim, name] : dims) {
    if (!dim->has_value())
      throw ConfigError(0, 0, std::string("missing required key: ") + name);
  }
  return channel::ChannelTopology(*n_a, *n_b, *n_1, *n_2, eve_mode);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, Loc> seen;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);

    std::size_t key_begin = 0;
    while (key_begin < line.size() && is_space(line[key_begin])) ++key_begin;
    if (key_begin == line.size()) continue;  // blank or comment-only

    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq <= key_begin)
      throw ConfigError(line_no, static_cast<int>(key_begin) + 1,
                        "expected 'key = value'");

    std::size_t key_end = eq;
    while (key_end > key_begin && is_space(line[key_end - 1])) --key_end;
    const std::string key(line.substr(key_begin, key_end - key_begin));

    std::size_t val_begin = eq + 1;
    while (val_begin < line.size() && is_space(line[val_begin])) ++val_begin;
    std::size_t val_end = line.size();
    while (val_end > val_begin && is_space(line[val_end - 1])) --val_end;
    const std::string_view value = line.substr(val_begin, val_end - val_begin);

    const Loc key_at{line_no, static_cast<int>(key_begin) + 1};
    const Loc val_at{line_no, static_cast<int>(val_begin) + 1};
    if (value.empty())
      throw ConfigError(val_at.line, val_at.col, "missing value for " + key);

    if (const auto [it, fresh] = seen.emplace(key, key_at); !fresh)
      throw ConfigError(key_at.line, key_at.col, "duplicate key: " + key);

    if (key == "scheme") {
      cfg.scheme = parse_scheme(value, val_at);
    } else if (key == "n_a") {
      cfg.n_a = parse_number<int>(value, val_at, "n_a");
    } else if (key == "n_b") {
      cfg.n_b = parse_number<int>(value, val_at, "n_b");
    } else if (key == "n_1") {
      cfg.n_1 = parse_number<int>(value, val_at, "n_1");
    } else if (key == "n_2") {
      cfg.n_2 = parse_number<int>(value, val_at, "n_2");
    } else if (key == "eve_mode") {
      cfg.eve_mode = parse_eve_mode(value, val_at);
    } else if (key == "coherence") {
      cfg.coherence = parse_coherence(value, val_at);
    } else if (key == "rounds") {
      cfg.rounds = parse_number<int>(value, val_at, "rounds");
      if (cfg.rounds < 1)
        throw ConfigError(val_at.line, val_at.col, "rounds must be >= 1");
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, val_at, "seed");
    } else if (key == "enum_cap") {
      cfg.enum_cap = parse_number<int>(value, val_at, "enum_cap");
      if (cfg.enum_cap < 1)
        throw ConfigError(val_at.line, val_at.col, "enum_cap must be >= 1");
    } else if (key == "gaussian.p") {
      cfg.gauss.params.p = parse_real(value, val_at, "gaussian.p");
    } else if (key == "gaussian.sigma_k_sq") {
      cfg.gauss.params.sigma_k_sq =
          parse_real(value, val_at, "gaussian.sigma_k_sq");
    } else if (key == "gaussian.sigma_z_sq") {
      cfg.gauss.params.sigma_z_sq =
          parse_real(value, val_at, "gaussian.sigma_z_sq");
    } else if (key == "gaussian.samples") {
      cfg.gauss.samples =
          parse_number<std::uint64_t>(value, val_at, "gaussian.samples");
      if (cfg.gauss.samples < 1)
        throw ConfigError(val_at.line, val_at.col,
                          "gaussian.samples must be >= 1");
    } else if (key == "gaussian.rel_tol") {
      cfg.gauss.rel_tol = parse_real(value, val_at, "gaussian.rel_tol");
    } else {
      throw ConfigError(key_at.line, key_at.col, "unknown key: " + key);
    }
  }

  // Topology constraints surface at parse time once all dimensions exist.
  if (cfg.n_a && cfg.n_b && cfg.n_1 && cfg.n_2) {
    try {
      cfg.topology();
    } catch (const std::invalid_argument& e) {
      Loc at{0, 0};
      for (const char* k : {"n_1", "n_2", "n_a", "n_b"}) {
        if (const auto it = seen.find(k); it != seen.end()) {
          at = it->second;
          break;
        }
      }
      throw ConfigError(at.line, at.col, e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, 0, "cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace detkey::config
