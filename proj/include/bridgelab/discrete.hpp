#pragma once

#include "bridgelab/divergences.hpp"
#include "bridgelab/report.hpp"

#include <vector>

namespace bridgelab {

/// Finite Sinkhorn problem. The supplied potentials are shifted so that μ = λe^{-U} and
/// η = νe^{-V} exactly, and the cost is shifted row-wise so that K(x,y) = e^{-W̃(x,y)}ν(y)
/// is Markov; the supplied W is kept for osc(W).
struct DiscreteModel {
  Index nx = 0;
  Index ny = 0;
  Matrix W;
  Matrix log_k;
  Vector lambda;
  Vector nu;
  Vector U;
  Vector V;
  DiscreteMeasure mu;
  DiscreteMeasure eta;

  Matrix reference_kernel() const;
  double osc() const { return W.maxCoeff() - W.minCoeff(); }
  double epsilon_w() const;
};

DiscreteModel build_model(const Matrix& W, const Vector& lambda, const Vector& nu, const Vector& U,
                          const Vector& V);

struct SinkhornPotentials {
  int step = 0;
  Vector U;
  Vector V;
};

/// (U_0, V_0) = (U, 0).
SinkhornPotentials initial_potentials(const DiscreteModel& model);

/// One half sweep: even n updates V, odd n updates U.
SinkhornPotentials half_step(const DiscreteModel& model, const SinkhornPotentials& p);

/// Potentials at steps 0, 2, ..., 2·sweeps.
std::vector<SinkhornPotentials> even_potentials(const DiscreteModel& model, int sweeps);

/// Objects attached to an even step 2n: 𝒦_{2n}, 𝒦_{2n+1}, π_{2n}, π_{2n+1}, 𝒫_{2n}, 𝒫_{2n+1}.
struct SinkhornIterate {
  int step = 0;
  Matrix kernel_even;
  Matrix kernel_odd;
  DiscreteMeasure pi_even;
  DiscreteMeasure pi_odd;
  Vector log_pi_even;
  Vector log_pi_odd;
  Matrix joint_even;
  Matrix joint_odd;
  Matrix log_joint_even;
  Matrix log_joint_odd;
};

/// Requires an even step.
SinkhornIterate materialize(const DiscreteModel& model, const SinkhornPotentials& p);

std::vector<SinkhornIterate> materialize_all(const DiscreteModel& model,
                                             const std::vector<SinkhornPotentials>& potentials);

/// K*_μ(y,x) = μ(x)K(x,y)/(μK)(y).
Matrix dual_kernel(const Matrix& kernel, const DiscreteMeasure& mu);

struct LadderRow {
  int n = 0;
  double h_q_joint = 0.0;
  double h_eta_pi_even = 0.0;
  double h_mu_pi_odd = 0.0;
  double partial_sum = 0.0;
  double residual = 0.0;
};

struct LadderReport {
  double h_q_reference = 0.0;
  std::vector<LadderRow> rows;
  Report report;
};

/// Iterates must start at step 0 and be consecutive.
LadderReport entropy_ladder(const DiscreteModel& model, const std::vector<SinkhornIterate>& iterates,
                            const Matrix& Q);

struct StoppingRule {
  double tolerance = 1e-12;
  int max_sweeps = 10000;
};

struct BridgeSolution {
  Vector UU;
  Vector VV;
  Matrix bridge;
  Matrix log_bridge;
  int iterations_used = 0;
  double residual = 0.0;
  bool converged = false;
};

BridgeSolution solve_bridge(const DiscreteModel& model, const StoppingRule& stop = {});

/// Monotone chains, commutation and semigroup formulae, fixed points, half-bridge argmins.
Report identity_suite(const DiscreteModel& model, const std::vector<SinkhornIterate>& iterates);

/// Φ-entropy ratios against (1−ε_W)², the ε_W sandwich and the density decay fit.
Report geometric_rate_report(const DiscreteModel& model, const std::vector<SinkhornIterate>& iterates);

/// Potential series, mean monotonicity, potential convergence constant and the entropic series.
Report potential_report(const DiscreteModel& model, const std::vector<SinkhornPotentials>& potentials,
                        const std::vector<SinkhornIterate>& iterates, const BridgeSolution& bridge);

/// Argmin over Q ∈ Π(·,η) (by columns) or Π(μ,·) (by rows) of H(Q|P) or H(P|Q), by mirror descent.
Matrix half_bridge_argmin(const Matrix& P, const Vector& marginal, bool fix_columns, bool reverse);

}  // namespace bridgelab
