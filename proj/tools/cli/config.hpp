#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qbound/optimizer.hpp"

namespace qbound::cli {

// Anything wrong with the user's configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string kind = "qubit";  // qubit | depolarized
  std::optional<double> entropy;
  std::optional<std::vector<double>> r0;  // one value: (0, r, 0); three: the full Bloch vector
  std::vector<double> axis{0.0, 0.0, 1.0};
  double epsilon = 0.01;
  int dim = 2;
  std::optional<std::pair<double, double>> domain;  // closed interval; absent means (-pi, pi]
};

// A bound kind after aliases are resolved: qcrb is qab(0,1) and so on.
struct BoundSpec {
  bool quantum = true;
  int r = 0;
  int s = 1;
  std::string povm;  // classical only: x | y | z | optimal

  std::string name() const;
  bool operator==(const BoundSpec&) const = default;
};

struct BoundConfig {
  BoundSpec spec;
  int m = 1;
  double theta = 0.0;
};

struct OutputConfig {
  std::string format;  // csv | json; empty picks the command default
  std::string path;    // empty writes to stdout
};

struct SweepConfig {
  std::vector<int> m{1, 2, 3, 4, 5, 6, 7};
  std::vector<BoundSpec> kinds;
};

struct MonteCarloConfig {
  std::int64_t n_samples = 1'000'000;
};

struct CheckConfig {
  std::string filter;
  bool mutate_omega = false;
};

struct RunConfig {
  ModelConfig model;
  BoundConfig bound;
  OptimizerConfig optimizer;
  OutputConfig output;
  SweepConfig sweep;
  MonteCarloConfig montecarlo;
  CheckConfig check;
  std::uint64_t seed = 1;
};

/// Parses "r,s". Throws ConfigError with the offending text.
std::pair<int, int> parse_order(const std::string& text);

/// Resolves kind names and aliases. order may be empty, "n" or "r,s";
/// povm is only used by classical kinds.
BoundSpec parse_kind(const std::string& kind, const std::string& order, const std::string& povm = "optimal");

/// Builds a config from JSON, rejecting unknown keys and bad values.
RunConfig parse_config(const nlohmann::json& j);

/// Canonical JSON of everything that affects results (the output block is
/// left out).
nlohmann::json canonical_json(const RunConfig& cfg);

/// FNV-1a of the canonical JSON text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace qbound::cli
