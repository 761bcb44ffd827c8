#pragma once

#include "bridgelab/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bridgelab {

enum class Regime { discrete, gaussian };

std::string regime_name(Regime r);
Regime parse_regime(const std::string& s);

/// Size caps for generated instances.
inline constexpr Index kMaxDiscreteSide = 64;
inline constexpr Index kMaxGaussianDim = 16;

struct GenerateOptions {
  double osc_cap = 0.6931471805599453;
  double temperature = 0.1;
};

/// "bounded": W uniform in [0, osc_cap] with both ends attained. "quadratic-grid": W = (x − y)²/(2t) on
/// uniform grids of [0, 1]. Potentials are uniform random; λ = ν = 1.
DiscreteModel generate_discrete(const std::string& profile, Index nx, Index ny, std::uint64_t seed,
                                const GenerateOptions& options = {});

/// "gaussian-random-spd": σ, σ̄ with spectrum in [0.5, 2], τ with spectrum in [0.1, 1], β with singular
/// values in [0.5, 1.5], all built as QDQ' from seeded orthogonal factors.
GaussianInstance generate_gaussian(const std::string& profile, Index d, std::uint64_t seed);

/// Instance JSON for either regime; size is {nx, ny} or {d}.
Json generate_instance(Regime regime, const std::vector<Index>& size, std::uint64_t seed, const std::string& profile,
                       const GenerateOptions& options = {});

struct ExperimentConfig {
  Regime regime = Regime::discrete;
  std::string profile = "bounded";
  std::vector<Index> size{5, 7};
  Json instance;
  int iterations = 50;
  std::uint64_t seed = 0;
  std::vector<std::string> checks;
  std::string output;
  GenerateOptions options;
  double lyapunov_delta = 0.25;
  bool plot = false;
};

std::vector<std::string> known_checks(Regime regime);

/// A string-valued "instance" is a file path, resolved against base_dir when relative.
ExperimentConfig config_from_json(const Json& j, const std::string& base_dir = {});
/// Canonical form; the instance is materialized inline.
Json config_to_json(const ExperimentConfig& config);
/// FNV-1a of the canonical config without the output directory.
std::string config_hash(const ExperimentConfig& config);

struct ExperimentReport {
  Report report;
  std::string config_hash;
  std::uint64_t seed = 0;
  Regime regime = Regime::discrete;

  bool all_pass() const { return report.all_pass(); }
};

ExperimentReport run_experiment(const ExperimentConfig& config);

Json verdicts_json(const ExperimentReport& report);

/// Writes report.csv, verdicts.json and, when requested, plot.svg into dir.
void write_experiment(const ExperimentReport& report, const std::string& dir, bool plot);

}  // namespace bridgelab
