#include "bridgelab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bridgelab {

namespace {

Matrix identity(Index d) { return Matrix::Identity(d, d); }

double spec(const Matrix& m) { return spectral_norm(m); }

void require_dims(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& k, const char* what) {
  if (mu.dim() != eta.dim() || mu.dim() != k.dim()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (mu " << mu.dim() << ", eta " << eta.dim() << ", kernel " << k.dim() << ")";
    throw DomainError(os.str());
  }
}

SpdMatrix<double> spd_at_step(const Matrix& m, int step) {
  try {
    return SpdMatrix<double>(m);
  } catch (const DomainError& e) {
    std::ostringstream os;
    os << "sinkhorn_step: covariance lost positive definiteness at step " << step << " (" << e.what() << ")";
    throw std::runtime_error(os.str());
  }
}

}  // namespace

LinearGaussianKernel::LinearGaussianKernel(Vector a, Matrix b, const Matrix& t)
    : alpha(std::move(a)), beta(std::move(b)), tau(t) {
  const Index d = alpha.size();
  if (beta.rows() != d || beta.cols() != d || tau.dim() != d)
    throw DomainError("LinearGaussianKernel: alpha, beta and tau dimensions disagree");
  if (!beta.allFinite() || !alpha.allFinite()) throw DomainError("LinearGaussianKernel: non-finite parameters");
  Vector sv = Eigen::JacobiSVD<Matrix>(beta).singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0))))
    throw DomainError("LinearGaussianKernel: beta is not invertible");
}

Matrix LinearGaussianKernel::chi() const { return spd_inverse(cov()) * beta; }

Gaussian push_forward(const Gaussian& mu, const LinearGaussianKernel& kernel) {
  if (mu.dim() != kernel.dim()) throw DomainError("push_forward: dimension mismatch");
  return Gaussian(kernel.alpha + kernel.beta * mu.mean, kernel.beta * mu.cov() * kernel.beta.transpose() + kernel.cov());
}

LinearGaussianKernel conjugate_kernel(const Gaussian& mu, const LinearGaussianKernel& kernel) {
  Gaussian image = push_forward(mu, kernel);
  Matrix beta1 = mu.cov() * kernel.beta.transpose() * spd_inverse(image.cov());
  Matrix tau1 = spd_inverse(Matrix(spd_inverse(mu.cov()) + kernel.beta.transpose() * kernel.chi()));
  Matrix alt = tau1 * kernel.chi().transpose();
  if ((beta1 - alt).norm() > 1e-8 * (1.0 + beta1.norm()))
    throw std::runtime_error("conjugate_kernel: gain identity beta1 = tau1 beta' tau^{-1} violated");
  return LinearGaussianKernel(mu.mean - beta1 * image.mean, beta1, tau1);
}

Gaussian joint_law(const Gaussian& mu, const LinearGaussianKernel& kernel) {
  if (mu.dim() != kernel.dim()) throw DomainError("joint_law: dimension mismatch");
  const Index d = mu.dim();
  Vector mean(2 * d);
  mean << mu.mean, kernel.alpha + kernel.beta * mu.mean;
  Matrix cov(2 * d, 2 * d);
  cov.topLeftCorner(d, d) = mu.cov();
  cov.topRightCorner(d, d) = mu.cov() * kernel.beta.transpose();
  cov.bottomLeftCorner(d, d) = kernel.beta * mu.cov();
  cov.bottomRightCorner(d, d) = kernel.beta * mu.cov() * kernel.beta.transpose() + kernel.cov();
  return Gaussian(mean, cov);
}

Gaussian swap_blocks(const Gaussian& joint) {
  const Index d = joint.dim() / 2;
  Eigen::PermutationMatrix<Eigen::Dynamic> p(2 * d);
  for (Index i = 0; i < d; ++i) {
    p.indices()(i) = static_cast<int>(i + d);
    p.indices()(i + d) = static_cast<int>(i);
  }
  Matrix c = p * joint.cov() * p.transpose();
  return Gaussian(Vector(p * joint.mean), c);
}

LinearGaussianKernel GaussianSinkhornState::kernel(const Gaussian& mu, const Gaussian& eta) const {
  const Vector& centre = step % 2 == 0 ? mu.mean : eta.mean;
  return LinearGaussianKernel(m - beta * centre, beta, tau.matrix());
}

Gaussian GaussianSinkhornState::marginal(const Gaussian& mu, const Gaussian& eta) const {
  return push_forward(step % 2 == 0 ? mu : eta, kernel(mu, eta));
}

GaussianSinkhornState initial_state(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel) {
  require_dims(mu, eta, kernel, "initial_state");
  Matrix s = inverse_sqrt(eta.cov());
  return {0, kernel.alpha + kernel.beta * mu.mean, kernel.beta, kernel.tau, s * kernel.cov() * s};
}

GaussianSinkhornState sinkhorn_step(const GaussianSinkhornState& state, const Gaussian& mu, const Gaussian& eta,
                                    const LinearGaussianKernel& kernel) {
  require_dims(mu, eta, kernel, "sinkhorn_step");
  const Matrix chi = kernel.chi();
  GaussianSinkhornState next;
  next.step = state.step + 1;
  if (state.step % 2 == 0) {
    Matrix prec = spd_inverse(mu.cov()) + chi.transpose() * state.tau.matrix() * chi;
    next.tau = spd_at_step(spd_inverse(prec), next.step);
    next.beta = next.tau.matrix() * chi.transpose();
    next.m = mu.mean + next.beta * (eta.mean - state.m);
    Matrix s = inverse_sqrt(mu.cov());
    next.upsilon = s * next.tau.matrix() * s;
  } else {
    Matrix prec = spd_inverse(eta.cov()) + chi * state.tau.matrix() * chi.transpose();
    next.tau = spd_at_step(spd_inverse(prec), next.step);
    next.beta = next.tau.matrix() * chi;
    next.m = eta.mean + next.beta * (mu.mean - state.m);
    Matrix s = inverse_sqrt(eta.cov());
    next.upsilon = s * next.tau.matrix() * s;
  }
  return next;
}

std::vector<GaussianSinkhornState> gaussian_trajectory(const Gaussian& mu, const Gaussian& eta,
                                                       const LinearGaussianKernel& kernel, int steps) {
  std::vector<GaussianSinkhornState> out{initial_state(mu, eta, kernel)};
  for (int n = 0; n < steps; ++n) out.push_back(sinkhorn_step(out.back(), mu, eta, kernel));
  return out;
}

RiccatiProblem make_riccati_problem(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel,
                                    bool odd) {
  require_dims(mu, eta, kernel, "make_riccati_problem");
  Matrix gamma = principal_sqrt(eta.cov()) * kernel.chi() * principal_sqrt(mu.cov());
  if (odd) gamma.transposeInPlace();
  Matrix gg = gamma * gamma.transpose();
  return {SpdMatrix<double>(spd_inverse(gg)), gamma};
}

Matrix riccati_apply(const RiccatiProblem& problem, const SymMatrix<double>& v) {
  if (v.dim() != problem.varpi.dim()) throw DomainError("riccati_apply: dimension mismatch");
  if (min_eigenvalue(v.matrix()) < -kNegativeClamp * std::max(1.0, spec(v.matrix())))
    throw DomainError("riccati_apply: argument is not positive semi-definite");
  const Index d = v.dim();
  Matrix inner = spd_inverse(Matrix(problem.varpi.matrix() + v.matrix()));
  return spd_inverse(Matrix(identity(d) + inner));
}

Matrix riccati_fixed_point(const RiccatiProblem& problem) {
  const Matrix& w = problem.varpi.matrix();
  Matrix r = -0.5 * w + principal_sqrt(Matrix(w + 0.25 * w * w));
  return (r + r.transpose()) / 2.0;
}

GaussianBridge schrodinger_bridge_gaussian(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel) {
  GaussianBridge b;
  b.problem = make_riccati_problem(mu, eta, kernel);
  b.r = riccati_fixed_point(b.problem);
  Matrix s = principal_sqrt(eta.cov());
  b.varsigma = s * b.r * s;
  b.varsigma = (b.varsigma + b.varsigma.transpose()) / 2.0;
  b.drift = b.varsigma * kernel.chi();
  b.intercept = eta.mean - b.drift * mu.mean;
  b.kernel = LinearGaussianKernel(b.intercept, b.drift, b.varsigma);
  return b;
}

double bridge_entropy(const GaussianSinkhornState& state, const GaussianBridge& bridge, const Gaussian& mu,
                      const Gaussian& eta, const LinearGaussianKernel& kernel) {
  if (state.step % 2 != 0) throw DomainError("bridge_entropy: state must sit at an even step");
  const Matrix& t = state.tau.matrix();
  const Matrix& vs = bridge.varsigma;
  Matrix vs_inv = spd_inverse(vs);
  Vector dm = state.m - eta.mean;
  Matrix drift_gap = inverse_sqrt(vs) * (t - vs) * kernel.chi() * principal_sqrt(mu.cov());
  return 0.5 * (burg_divergence(t, vs) + dm.dot(vs_inv * dm) + drift_gap.squaredNorm());
}

Report rate_report(const std::vector<GaussianSinkhornState>& trajectory, const GaussianBridge& bridge,
                   const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel) {
  Report r;
  const Index d = mu.dim();
  const Matrix I = identity(d);
  const Matrix sb = principal_sqrt(eta.cov()), sb_inv = inverse_sqrt(eta.cov());
  const Matrix s = principal_sqrt(mu.cov());
  const Matrix& varpi = bridge.problem.varpi.matrix();
  const RiccatiProblem odd_problem = make_riccati_problem(mu, eta, kernel, true);
  const Matrix& varpi_bar = odd_problem.varpi.matrix();
  const Matrix vs_sqrt = principal_sqrt(bridge.varsigma);
  const Matrix lower_even = sb * spd_inverse(Matrix(I + spd_inverse(varpi))) * sb;
  const Matrix lower_odd = s * spd_inverse(Matrix(I + spd_inverse(varpi_bar))) * s;
  const Matrix gibbs_cap = spd_inverse(Matrix(I + varpi));
  const Matrix sigma0 = push_forward(mu, kernel).cov();

  Matrix directed = I;
  Matrix v_even = trajectory.front().upsilon, v_odd;
  double ricc_gap = 0.0, sandwich = -std::numeric_limits<double>::infinity(), gibbs = 0.0, gibbs_order = 0.0;
  double mean_rec = 0.0, cov_rec = 0.0;
  std::vector<std::pair<int, double>> tau_series;
  const double lo_tol = 1e-12;

  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& st = trajectory[k];
    const Matrix& t = st.tau.matrix();
    if (st.step % 2 == 1) {
      if (st.step == 1) {
        v_odd = st.upsilon;
      } else {
        v_odd = riccati_apply(odd_problem, v_odd);
        ricc_gap = std::max(ricc_gap, spec(st.upsilon - v_odd));
        sandwich = std::max(sandwich, -min_eigenvalue(Matrix(mu.cov() - t)));
        sandwich = std::max(sandwich, -min_eigenvalue(Matrix(t - lower_odd)));
      }
      continue;
    }
    const int n = st.step / 2;
    if (n >= 1) {
      v_even = riccati_apply(bridge.problem, v_even);
      ricc_gap = std::max(ricc_gap, spec(st.upsilon - v_even));
      sandwich = std::max(sandwich, -min_eigenvalue(Matrix(eta.cov() - t)));
      sandwich = std::max(sandwich, -min_eigenvalue(Matrix(t - lower_even)));

      const auto& prev_odd = trajectory[k - 1];
      const auto& prev_even = trajectory[k - 2];
      Matrix loop = st.beta * prev_odd.beta;
      Matrix scaled = sb_inv * loop * sb;
      gibbs = std::max(gibbs, spec(Matrix(scaled - (I - st.upsilon))));
      Matrix sym = (scaled + scaled.transpose()) / 2.0;
      gibbs_order = std::max({gibbs_order, -min_eigenvalue(sym), -min_eigenvalue(Matrix(gibbs_cap - sym))});
      mean_rec = std::max(mean_rec, (st.m - eta.mean - loop * (prev_even.m - eta.mean)).norm());
      directed = loop * directed;
      Matrix sigma_n = st.marginal(mu, eta).cov();
      Matrix predicted = directed * (sigma0 - eta.cov()) * directed.transpose();
      cov_rec = std::max(cov_rec, spec(Matrix(sigma_n - eta.cov() - predicted)) / (1.0 + spec(eta.cov())));
    }
    double gap = spec(Matrix(t - bridge.varsigma));
    tau_series.push_back({n, gap});
    r.add(n, "tau_gap", gap);
    r.add(n, "tau_sqrt_gap", spec(Matrix(principal_sqrt(t) - vs_sqrt)));
    r.add(n, "mean_gap", (st.m - eta.mean).norm());
    r.add(n, "directed_product_norm", spec(Matrix(sb_inv * directed * sb)));
  }

  r.verdict("riccati_equivalence", ricc_gap <= 1e-10, ricc_gap);
  r.verdict("sandwich", sandwich <= lo_tol, sandwich);
  r.verdict("gibbs_loop_identity", gibbs <= 1e-10, gibbs);
  r.verdict("gibbs_loop_bounds", gibbs_order <= lo_tol, gibbs_order);
  r.verdict("mean_recursion", mean_rec <= 1e-10, mean_rec);
  r.verdict("marginal_covariance_recursion", cov_rec <= 1e-10, cov_rec);

  const double theory = -2.0 * std::log1p(min_eigenvalue(Matrix(bridge.r + varpi)));
  r.add(0, "tau_theory_slope", theory);
  RateFit fit = fit_rate(tau_series);
  if (fit.available) {
    r.add(0, "tau_fit_slope", fit.slope);
    r.add(0, "tau_fit_r2", fit.r2);
    double excess = fit.slope - 0.95 * theory;
    r.verdict("riccati_rate", excess <= 0.0, excess);
  } else {
    r.add(0, "tau_fit_points", fit.points);
    r.verdict("riccati_rate", true, 0.0, "fit unavailable: fewer than 5 points above the saturation floor");
  }
  return r;
}

Report envelope_report(const Gaussian& mu, const Gaussian& eta, const LinearGaussianKernel& kernel,
                       const std::vector<GaussianSinkhornState>& trajectory) {
  Report r;
  GaussianBridge bridge = schrodinger_bridge_gaussian(mu, eta, kernel);
  const Gaussian target = joint_law(mu, bridge.kernel);
  const double kappa = spec(kernel.chi());
  const double rho = spec(mu.cov()), rho_bar = spec(eta.cov());
  const double eps = kappa * kappa * rho * rho_bar;
  r.add(0, "kappa", kappa);
  r.add(0, "rho", rho);
  r.add(0, "rho_bar", rho_bar);
  r.add(0, "epsilon", eps);
  if (!std::isfinite(eps) || eps <= 0.0) {
    r.verdict("envelope", true, 0.0, "vacuous: epsilon is not finite");
    return r;
  }
  const double basic = 1.0 + 1.0 / eps;
  const double root = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 / eps));
  const double refined = root * root;

  std::vector<double> I_even, I_odd, w_even, w_odd;
  for (const auto& st : trajectory) {
    LinearGaussianKernel k = st.kernel(mu, eta);
    if (st.step % 2 == 0) {
      I_even.push_back(gaussian_kl(target, joint_law(mu, k)));
      w_even.push_back(gaussian_w2(st.marginal(mu, eta), eta));
    } else {
      I_odd.push_back(gaussian_kl(target, swap_blocks(joint_law(eta, k))));
      w_odd.push_back(gaussian_w2(st.marginal(mu, eta), mu));
    }
  }
  const double I0 = I_even.front();
  const double slack = kSaturationFloor * std::max(1.0, I0);
  double worst_basic = -std::numeric_limits<double>::infinity(), worst_refined = worst_basic;
  for (std::size_t n = 0; n < I_even.size(); ++n) {
    double env = std::pow(basic, -static_cast<double>(n)) * I0;
    r.add(static_cast<int>(n), "entropy_even", I_even[n]);
    r.add(static_cast<int>(n), "envelope_basic", env);
    worst_basic = std::max(worst_basic, I_even[n] - env - slack);
    if (n < I_odd.size()) {
      r.add(static_cast<int>(n), "entropy_odd", I_odd[n]);
      worst_basic = std::max(worst_basic, I_odd[n] - env - slack);
    }
    if (n >= 1) {
      double env_ref = std::pow(refined, -static_cast<double>(n - 1)) * I0;
      r.add(static_cast<int>(n), "envelope_refined", env_ref);
      worst_refined = std::max(worst_refined, I_even[n] - env_ref - slack);
    }
  }
  r.verdict("envelope", worst_basic <= 0.0, worst_basic, "odd-index entropies extrapolated by symmetry");
  r.verdict("envelope_refined", worst_refined <= 0.0, worst_refined);

  // squared comparisons: the Bures form loses half the digits near zero
  const double scale = 1e-12 * (mu.cov().trace() + eta.cov().trace() + mu.mean.squaredNorm() + eta.mean.squaredNorm());
  double worst_step = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < w_even.size(); ++n) {
    r.add(static_cast<int>(n), "w2_even", w_even[n]);
    if (n < w_odd.size()) {
      r.add(static_cast<int>(n), "w2_odd", w_odd[n]);
      double q = kappa * rho;
      worst_step = std::max(worst_step, w_odd[n] * w_odd[n] - q * q * w_even[n] * w_even[n] - scale);
    }
    if (n >= 1 && n - 1 < w_odd.size()) {
      double q = kappa * rho_bar;
      worst_step = std::max(worst_step, w_even[n] * w_even[n] - q * q * w_odd[n - 1] * w_odd[n - 1] - scale);
    }
  }
  r.verdict("w2_step", worst_step <= 0.0, worst_step);
  if (eps < 1.0) {
    double worst_decay = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < w_even.size(); ++n) {
      double f = std::pow(eps, static_cast<double>(n));
      worst_decay = std::max(worst_decay, w_even[n] * w_even[n] - f * f * w_even[0] * w_even[0] - scale);
      if (n < w_odd.size())
        worst_decay = std::max(worst_decay, w_odd[n] * w_odd[n] - f * f * w_odd[0] * w_odd[0] - scale);
    }
    r.verdict("w2_decay", worst_decay <= 0.0, worst_decay);
  }
  return r;
}

CovarianceEnvelope strongly_convex_covariance_envelope(const Matrix& sigma, const Matrix& sigma_minus,
                                                       const Matrix& sigma_bar, const Matrix& sigma_bar_minus,
                                                       const LinearGaussianKernel& kernel, int n_max) {
  const double tol = 1e-12 * (1.0 + spec(sigma) + spec(sigma_bar));
  if (!loewner_leq(sigma_minus, sigma, tol) || !loewner_leq(sigma_bar_minus, sigma_bar, tol))
    throw DomainError("strongly_convex_covariance_envelope: need sigma_minus <= sigma and sigma_bar_minus <= sigma_bar");
  SpdMatrix<double> check_a(sigma_minus), check_b(sigma_bar_minus);
  const Matrix chi = kernel.chi();
  const Matrix ps = spd_inverse(sigma), ps_m = spd_inverse(sigma_minus);
  const Matrix pb = spd_inverse(sigma_bar), pb_m = spd_inverse(sigma_bar_minus);

  CovarianceEnvelope out;
  out.upper.push_back(kernel.cov());
  out.lower.push_back(kernel.cov());
  for (int n = 0; n < n_max; ++n) {
    const Matrix up = out.upper.back();
    const Matrix lo = out.lower.back();
    if (n % 2 == 0) {
      out.upper.push_back(spd_inverse(Matrix(ps + chi.transpose() * lo * chi)));
      out.lower.push_back(spd_inverse(Matrix(ps_m + chi.transpose() * up * chi)));
    } else {
      out.upper.push_back(spd_inverse(Matrix(pb + chi * lo * chi.transpose())));
      out.lower.push_back(spd_inverse(Matrix(pb_m + chi * up * chi.transpose())));
    }
  }

  const Matrix sb = principal_sqrt(sigma_bar), sb_inv = inverse_sqrt(sigma_bar);
  Matrix gamma_minus = sb * chi * principal_sqrt(sigma_minus);
  RiccatiProblem minus{SpdMatrix<double>(spd_inverse(Matrix(gamma_minus * gamma_minus.transpose()))), gamma_minus};
  Matrix v = sb_inv * kernel.cov() * sb_inv;
  out.rescaled.push_back(v);
  for (std::size_t k = 2; k < out.upper.size(); k += 2) {
    v = riccati_apply(minus, v);
    out.rescaled.push_back(v);
    out.rescaled_gap = std::max(out.rescaled_gap, spec(Matrix(v - sb_inv * out.upper[k] * sb_inv)));
  }
  return out;
}

PotentialHessian potential_hessian(const GaussianSinkhornState& state, const Gaussian& mu, const Gaussian& eta,
                                   const LinearGaussianKernel& kernel) {
  if (state.step % 2 != 0) throw DomainError("potential_hessian: state must sit at an even step");
  const Matrix chi = kernel.chi();
  const Matrix ps = spd_inverse(mu.cov()), pb = spd_inverse(eta.cov());
  GaussianSinkhornState odd = sinkhorn_step(state, mu, eta, kernel);
  GaussianSinkhornState even = sinkhorn_step(odd, mu, eta, kernel);

  PotentialHessian out;
  out.hessU = ps - chi.transpose() * kernel.beta + chi.transpose() * state.tau.matrix() * chi;
  out.hessV = pb - spd_inverse(kernel.cov()) + chi * odd.tau.matrix() * chi.transpose();
  out.hessW_odd = ps + chi.transpose() * state.tau.matrix() * chi;
  out.hessW_even = pb + chi * odd.tau.matrix() * chi.transpose();
  out.hessU = (out.hessU + out.hessU.transpose()) / 2.0;
  out.hessV = (out.hessV + out.hessV.transpose()) / 2.0;

  Matrix want_odd = spd_inverse(odd.tau.matrix()), want_even = spd_inverse(even.tau.matrix());
  out.decomposition_gap = std::max(spec(Matrix(out.hessW_odd - want_odd)) / (1.0 + spec(want_odd)),
                                   spec(Matrix(out.hessW_even - want_even)) / (1.0 + spec(want_even)));
  const double tol = 1e-12 * (1.0 + spec(ps) + spec(pb));
  out.curvature_bounds = loewner_leq(ps, out.hessW_odd, tol) && loewner_leq(pb, out.hessW_even, tol);
  return out;
}

}  // namespace bridgelab
