#pragma once

#include "bridgelab/divergences.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bridgelab {

/// Lyapunov weights g on 𝕏, h on 𝕐 and the shifted pair g_a = ½ + a·g, h_a = ½ + a·h.
struct WeightPair {
  Vector g;
  Vector h;
  double a = 1.0;

  WeightPair() = default;
  WeightPair(Vector g_, Vector h_, double a_ = 1.0);
  Vector g_a() const { return (0.5 + a * g.array()).matrix(); }
  Vector h_a() const { return (0.5 + a * h.array()).matrix(); }
};

/// max over row pairs of the total variation distance between rows.
double dobrushin(const Matrix& kernel);

struct ProbeReport {
  double dob = 0.0;
  double max_ratio = 0.0;
  int samples = 0;
  int violations = 0;
  double worst_excess = 0.0;
};

/// Samples measure pairs and checks H_Φ(μ1K, μ2K) ≤ dob(K)·H_Φ(μ1, μ2).
ProbeReport phi_contraction_probe(const Matrix& kernel, const PhiFunction& phi, int samples, std::uint64_t seed);

/// sup_{x1≠x2} |K(x1,·) − K(x2,·)|(h) / (g(x1) + g(x2)).
double lip_norm(const Matrix& kernel, const Vector& g, const Vector& h);

struct DriftReport {
  bool pass = false;
  bool rescaled_pass = false;
  double worst_slack = 0.0;
  double rescaled_worst_slack = 0.0;
  std::string worst_side;
  Index worst_state = -1;
};

/// K(h) ≤ εg + c and L(g) ≤ εh + c entrywise, and K(h̄) ≤ εḡ + ½ for ḡ = ½ + (ε/2c)g.
DriftReport drift_check(const Matrix& K, const Matrix& L, const WeightPair& w, double epsilon, double c);

struct IotaEntry {
  double level = 0.0;
  double iota = 0.0;
  bool feasible = false;
  std::string note;
};

/// ι(l) = min(Σ_y min_{g(x)≤l} K(x,y), Σ_x min_{h(y)≤l} L(y,x)).
std::vector<IotaEntry> minorization_table(const Matrix& K, const Matrix& L, const WeightPair& w,
                                          const std::vector<double>& levels);

struct KernelPair {
  Matrix K;
  Matrix L;
};

struct ContractionCertificate {
  double a = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;
  double c = 0.0;
  double product_lip = 0.0;
  Vector g;
  Vector h;
  std::vector<IotaEntry> iota_table;

  /// Re-checks drift, both lip bounds and the product bound for each pair.
  bool verify(const std::vector<KernelPair>& pairs, double tol = 1e-12) const;
};

struct SearchResult {
  bool found = false;
  ContractionCertificate certificate;
  double best_a = 0.0;
  double best_rho = 0.0;
};

/// 50 log-spaced points over [1e-4, 1e4].
std::vector<double> default_a_grid();

/// Minimizes max(lip_{g_a,h_a}(K), lip_{h_a,g_a}(L)) over the grid, ties to smaller a,
/// uniformly over all supplied pairs.
SearchResult lyapunov_search(const std::vector<KernelPair>& pairs, const Vector& g, const Vector& h,
                             const std::vector<double>& grid = default_a_grid(), double drift_epsilon = 0.5);

SearchResult lyapunov_search(const Matrix& K, const Matrix& L, const Vector& g, const Vector& h,
                             const std::vector<double>& grid = default_a_grid(), double drift_epsilon = 0.5);

}  // namespace bridgelab
