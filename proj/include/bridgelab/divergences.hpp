#pragma once

#include "bridgelab/matcore.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bridgelab {

/// Probability vector on a finite set; weights are normalized on construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(const Vector& weights);

  static DiscreteMeasure uniform(Index n);
  static DiscreteMeasure dirac(Index n, Index at);

  Index size() const { return w_.size(); }
  const Vector& weights() const { return w_; }
  double operator()(Index i) const { return w_(i); }

  /// μK for a row-stochastic K.
  DiscreteMeasure operator*(const Matrix& kernel) const;

 private:
  Vector w_;
};

/// 1-homogeneous convex Φ with Φ(1,1) = 0.
struct PhiFunction {
  std::string name;
  std::function<double(double, double)> evaluate;
};

namespace phi {
/// Φ(u,v) = u log(u/v) − u + v; sums to the relative entropy on probability vectors.
PhiFunction kl();
/// Φ₀(u,v) = |u − v|/2.
PhiFunction tv();
/// Φ(u,v) = (√u − √v)²/2.
PhiFunction hellinger();
/// Φ(u,v) = (u − v)²/v.
PhiFunction chi_square();
std::vector<PhiFunction> catalog();
}  // namespace phi

/// Σ_x Φ(μ1(x), μ2(x)).
double phi_entropy(const PhiFunction& phi, const DiscreteMeasure& mu1, const DiscreteMeasure& mu2);

double tv_distance(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2);

/// Relative entropy H(a|b) from log-weights; +inf when a charges a null set of b.
double relative_entropy_log(const Vector& log_a, const Vector& log_b);

/// Σ_x g(x)|μ1(x) − μ2(x)|.
double weighted_tv(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, const Vector& g);

struct Gaussian {
  Vector mean;
  SpdMatrix<double> covariance;

  Gaussian() = default;
  Gaussian(Vector m, const Matrix& sigma);

  Index dim() const { return mean.size(); }
  const Matrix& cov() const { return covariance.matrix(); }
};

/// Tr(σσ̄^{-1} − I) − log det(σσ̄^{-1}).
double burg_divergence(const Matrix& sigma, const Matrix& sigma_bar);

double gaussian_kl(const Gaussian& p, const Gaussian& q);

/// Closed-form 2-Wasserstein distance (Bures form).
double gaussian_w2(const Gaussian& p, const Gaussian& q);

struct TransportPlan {
  double value = 0.0;
  Matrix plan;
};

/// Exact optimal transport cost min_{Q ∈ Π(μ1,μ2)} Σ cost·Q by the transportation simplex.
TransportPlan kantorovich_discrete(const Matrix& cost, const DiscreteMeasure& mu1, const DiscreteMeasure& mu2);

}  // namespace bridgelab
