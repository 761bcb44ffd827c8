#pragma once

#include "bridgelab/divergences.hpp"
#include "bridgelab/report.hpp"

#include <vector>

namespace bridgelab {

/// y = α + βx + τ^{1/2}G.
struct LinearGaussianKernel {
  Vector alpha;
  Matrix beta;
  SpdMatrix<double> tau;

  LinearGaussianKernel() = default;
  LinearGaussianKernel(Vector a, Matrix b, const Matrix& t);

  Index dim() const { return alpha.size(); }
  const Matrix& cov() const { return tau.matrix(); }
  /// χ = τ^{-1}β.
  Matrix chi() const;
};

Gaussian push_forward(const Gaussian& mu, const LinearGaussianKernel& kernel);

/// Dual transition K*_μ: x = α₁ + β₁y + τ₁^{1/2}G with β₁ = σβ'σ₀^{-1}, τ₁^{-1} = σ^{-1} + β'τ^{-1}β.
LinearGaussianKernel conjugate_kernel(const Gaussian& mu, const LinearGaussianKernel& kernel);

/// Law of (X, Y) with X ~ μ and Y ~ K(X, ·).
Gaussian joint_law(const Gaussian& mu, const LinearGaussianKernel& kernel);

/// Swaps the two d-blocks of a 2d-dimensional Gaussian.
Gaussian swap_blocks(const Gaussian& joint);

/// State at step n. Even n: 𝒦_n(x) = m_n + β_n(x − m) + τ_n^{1/2}G on 𝕐, υ_n = σ̄^{-1/2}τ_nσ̄^{-1/2}.
/// Odd n: 𝒦_n(y) = m_n + β_n(y − m̄) + τ_n^{1/2}G on 𝕏, υ_n = σ^{-1/2}τ_nσ^{-1/2}.
struct GaussianSinkhornState {
  int step = 0;
  Vector m;
  Matrix beta;
  SpdMatrix<double> tau;
  Matrix upsilon;

  /// The Sinkhorn transition 𝒦_n in (α, β, τ) form.
  LinearGaussianKernel kernel(const Gaussian& mu, const Gaussian& eta) const;
  /// π_n: μ𝒦_n for even n, η𝒦_n for odd n.
  Gaussian marginal(const Gaussian& mu, const Gaussian& eta) const;
};

GaussianSinkhornState initial_state(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel);

GaussianSinkhornState sinkhorn_step(const GaussianSinkhornState& state, const Gaussian& mu, const Gaussian& eta,
                                    const LinearGaussianKernel& kernel);

/// States 0, 1, ..., steps.
std::vector<GaussianSinkhornState> gaussian_trajectory(const Gaussian& mu, const Gaussian& eta,
                                                       const LinearGaussianKernel& kernel, int steps);

/// Ricc_ϖ with ϖ^{-1} = γγ'.
struct RiccatiProblem {
  SpdMatrix<double> varpi;
  Matrix gamma;
};

/// Even chain: γ = σ̄^{1/2}τ^{-1}βσ^{1/2}. Odd chain: γ' and ϖ̄^{-1} = γ'γ.
RiccatiProblem make_riccati_problem(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel,
                                    bool odd = false);

/// (I + (ϖ + v)^{-1})^{-1} for PSD v.
Matrix riccati_apply(const RiccatiProblem& problem, const SymMatrix<double>& v);

/// r = −ϖ/2 + (ϖ + ϖ²/4)^{1/2}.
Matrix riccati_fixed_point(const RiccatiProblem& problem);

/// Z(x) = m̄ + ςτ^{-1}β(x − m) + ς^{1/2}G.
struct GaussianBridge {
  RiccatiProblem problem;
  Matrix r;
  Matrix varsigma;
  Matrix drift;
  Vector intercept;
  LinearGaussianKernel kernel;
};

GaussianBridge schrodinger_bridge_gaussian(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel);

/// H(𝒫_{2n}|P_{μ,η}) from the closed form in (τ_{2n}, m_{2n}, ς).
double bridge_entropy(const GaussianSinkhornState& state, const GaussianBridge& bridge, const Gaussian& mu,
                      const Gaussian& eta, const LinearGaussianKernel& kernel);

/// Convergence of τ_{2n} → ς, m_{2n} → m̄, directed products, Riccati equivalence and the sandwich.
Report rate_report(const std::vector<GaussianSinkhornState>& trajectory, const GaussianBridge& bridge,
                   const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel);

/// Entropy and 2-Wasserstein envelopes built from κ = ||τ^{-1}β||₂, ρ = ||σ||₂, ρ̄ = ||σ̄||₂.
Report envelope_report(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel,
                       const std::vector<GaussianSinkhornState>& trajectory);

struct CovarianceEnvelope {
  std::vector<Matrix> upper;
  std::vector<Matrix> lower;
  std::vector<Matrix> rescaled;
  /// max over n of ||τ̄_{2n} − σ̄^{-1/2}τ_{2n}σ̄^{-1/2}||₂ for the Ricc_{ϖ₋} flow.
  double rescaled_gap = 0.0;
};

CovarianceEnvelope strongly_convex_covariance_envelope(const Matrix& sigma, const Matrix& sigma_minus,
                                                       const Matrix& sigma_bar, const Matrix& sigma_bar_minus,
                                                       const LinearGaussianKernel& kernel, int n_max);

struct PotentialHessian {
  Matrix hessU;
  Matrix hessV;
  Matrix hessW_odd;
  Matrix hessW_even;
  double decomposition_gap = 0.0;
  bool curvature_bounds = false;
};

/// Hessians of U_{2n} and V_{2n+1} at an even state, with the ∇²₂W decompositions.
PotentialHessian potential_hessian(const GaussianSinkhornState& state, const Gaussian& mu, const Gaussian& eta,
                                   const LinearGaussianKernel& kernel);

}  // namespace bridgelab
