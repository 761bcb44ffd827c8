#include "bridgelab/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bridgelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logsumexp(const Vector& v) {
  double m = v.maxCoeff();
  if (m == -kInf) return -kInf;
  return m + std::log((v.array() - m).exp().sum());
}

Vector row_lse(const Matrix& a) {
  Vector out(a.rows());
  for (Index i = 0; i < a.rows(); ++i) out(i) = logsumexp(a.row(i).transpose());
  return out;
}

Vector col_lse(const Matrix& a) {
  Vector out(a.cols());
  for (Index j = 0; j < a.cols(); ++j) out(j) = logsumexp(a.col(j));
  return out;
}

Vector safe_log(const Vector& v) {
  return v.unaryExpr([](double x) { return x > 0.0 ? std::log(x) : -kInf; });
}

Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

double joint_entropy(const Matrix& log_a, const Matrix& log_b) {
  return relative_entropy_log(flatten(log_a), flatten(log_b));
}

Vector log_mu(const DiscreteModel& m) { return m.lambda.array().log().matrix() - m.U; }
Vector log_eta(const DiscreteModel& m) { return m.nu.array().log().matrix() - m.V; }

// log of k(x,y) ν(y) e^{-V(y)} before row normalization
Matrix log_forward(const DiscreteModel& m, const Vector& V) {
  Matrix a = m.log_k;
  a.rowwise() += (m.nu.array().log().matrix() - V).transpose();
  return a;
}

// log of k(x,y) λ(x) e^{-U(x)}, indexed (x, y)
Matrix log_backward(const DiscreteModel& m, const Vector& U) {
  Matrix a = m.log_k;
  a.colwise() += m.lambda.array().log().matrix() - U;
  return a;
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double rel_gap(const Vector& lhs, const Vector& rhs) {
  return ((lhs - rhs).array().abs() / rhs.array().abs().max(1.0)).maxCoeff();
}

void require_vector(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << "build_model: " << what << " has size " << v.size() << ", expected " << n;
    throw DomainError(os.str());
  }
  if (!v.allFinite()) throw DomainError(std::string("build_model: non-finite entries in ") + what);
}

}  // namespace

Matrix DiscreteModel::reference_kernel() const {
  Matrix k = log_k.array().exp();
  return k * nu.asDiagonal();
}

double DiscreteModel::epsilon_w() const { return std::exp(-2.0 * osc()); }

DiscreteModel build_model(const Matrix& W, const Vector& lambda, const Vector& nu, const Vector& U,
                          const Vector& V) {
  if (W.rows() == 0 || W.cols() == 0) throw DomainError("build_model: empty cost matrix");
  if (!W.allFinite()) throw DomainError("build_model: non-finite cost entries (zero kernel entries are rejected)");
  require_vector(lambda, W.rows(), "lambda");
  require_vector(nu, W.cols(), "nu");
  require_vector(U, W.rows(), "U");
  require_vector(V, W.cols(), "V");
  if ((lambda.array() <= 0.0).any()) throw DomainError("build_model: nonpositive reference weight in lambda");
  if ((nu.array() <= 0.0).any()) throw DomainError("build_model: nonpositive reference weight in nu");

  DiscreteModel m;
  m.nx = W.rows();
  m.ny = W.cols();
  m.W = W;
  m.lambda = lambda;
  m.nu = nu;

  Matrix a = -W;
  a.rowwise() += nu.array().log().matrix().transpose();
  Vector row_norm = row_lse(a);
  m.log_k = -W;
  m.log_k.colwise() -= row_norm;

  Vector lmu = lambda.array().log().matrix() - U;
  Vector leta = nu.array().log().matrix() - V;
  m.U = U.array() + logsumexp(lmu);
  m.V = V.array() + logsumexp(leta);
  m.mu = DiscreteMeasure(Vector(log_mu(m).array().exp()));
  m.eta = DiscreteMeasure(Vector(log_eta(m).array().exp()));
  return m;
}

SinkhornPotentials initial_potentials(const DiscreteModel& model) {
  return {0, model.U, Vector::Zero(model.ny)};
}

SinkhornPotentials half_step(const DiscreteModel& model, const SinkhornPotentials& p) {
  SinkhornPotentials next = p;
  next.step = p.step + 1;
  if (p.step % 2 == 0)
    next.V = model.V + col_lse(log_backward(model, p.U));
  else
    next.U = model.U + row_lse(log_forward(model, p.V));
  if (!next.U.allFinite() || !next.V.allFinite()) {
    std::ostringstream os;
    os << "half_step: non-finite potentials at step " << next.step;
    throw std::runtime_error(os.str());
  }
  return next;
}

std::vector<SinkhornPotentials> even_potentials(const DiscreteModel& model, int sweeps) {
  std::vector<SinkhornPotentials> out{initial_potentials(model)};
  for (int n = 0; n < sweeps; ++n) out.push_back(half_step(model, half_step(model, out.back())));
  return out;
}

SinkhornIterate materialize(const DiscreteModel& model, const SinkhornPotentials& p) {
  if (p.step % 2 != 0) throw DomainError("materialize: potentials must sit at an even step");
  SinkhornIterate it;
  it.step = p.step;

  Matrix le = log_forward(model, p.V);
  le.colwise() -= row_lse(le);
  Matrix lo = log_backward(model, p.U);  // (x, y)
  lo.rowwise() -= col_lse(lo).transpose();

  Vector lmu = log_mu(model), leta = log_eta(model);
  it.log_joint_even = le;
  it.log_joint_even.colwise() += lmu;
  it.log_joint_odd = lo;
  it.log_joint_odd.rowwise() += leta.transpose();
  it.log_pi_even = col_lse(it.log_joint_even);
  it.log_pi_odd = row_lse(it.log_joint_odd);

  it.kernel_even = le.array().exp();
  it.kernel_odd = lo.transpose().array().exp();
  it.joint_even = it.log_joint_even.array().exp();
  it.joint_odd = it.log_joint_odd.array().exp();
  it.pi_even = DiscreteMeasure(Vector(it.log_pi_even.array().exp()));
  it.pi_odd = DiscreteMeasure(Vector(it.log_pi_odd.array().exp()));
  return it;
}

std::vector<SinkhornIterate> materialize_all(const DiscreteModel& model,
                                             const std::vector<SinkhornPotentials>& potentials) {
  std::vector<SinkhornIterate> out;
  out.reserve(potentials.size());
  for (const auto& p : potentials) out.push_back(materialize(model, p));
  return out;
}

Matrix dual_kernel(const Matrix& kernel, const DiscreteMeasure& mu) {
  if (kernel.rows() != mu.size()) throw DomainError("dual_kernel: kernel rows do not match the measure");
  Vector muk = kernel.transpose() * mu.weights();
  for (Index y = 0; y < muk.size(); ++y) {
    if (!(muk(y) > 0.0)) {
      std::ostringstream os;
      os << "dual_kernel: (muK)(" << y << ") = 0, the dual is undefined";
      throw DomainError(os.str());
    }
  }
  Matrix out = (mu.weights().asDiagonal() * kernel).transpose();
  return muk.cwiseInverse().asDiagonal() * out;
}

LadderReport entropy_ladder(const DiscreteModel& model, const std::vector<SinkhornIterate>& iterates,
                            const Matrix& Q) {
  if (iterates.empty() || iterates.front().step != 0) throw DomainError("entropy_ladder: iterates must start at step 0");
  if (Q.rows() != model.nx || Q.cols() != model.ny) throw DomainError("entropy_ladder: coupling has wrong shape");
  double gap = std::max(max_abs(Q.rowwise().sum() - model.mu.weights()),
                        max_abs(Q.colwise().sum().transpose() - model.eta.weights()));
  if (gap > 1e-10) throw DomainError("entropy_ladder: Q is not a coupling of (mu, eta)");

  Matrix lq(Q.rows(), Q.cols());
  for (Index i = 0; i < Q.size(); ++i) lq.data()[i] = Q.data()[i] > 0.0 ? std::log(Q.data()[i]) : -kInf;
  Vector lmu = safe_log(model.mu.weights()), leta = safe_log(model.eta.weights());

  LadderReport out;
  out.h_q_reference = joint_entropy(lq, iterates.front().log_joint_even);
  double partial = 0.0, worst = 0.0, worst_decay = -kInf;
  for (std::size_t n = 0; n < iterates.size(); ++n) {
    LadderRow row;
    row.n = static_cast<int>(n);
    row.h_q_joint = joint_entropy(lq, iterates[n].log_joint_even);
    row.h_eta_pi_even = relative_entropy_log(leta, iterates[n].log_pi_even);
    row.h_mu_pi_odd = relative_entropy_log(lmu, iterates[n].log_pi_odd);
    row.partial_sum = partial;
    row.residual = std::abs(out.h_q_reference - row.h_q_joint - partial);
    if (std::isfinite(row.residual)) worst = std::max(worst, row.residual);
    double decay = (n + 1.0) * (row.h_eta_pi_even + row.h_mu_pi_odd) - out.h_q_reference;
    worst_decay = std::max(worst_decay, decay);
    partial += row.h_eta_pi_even + row.h_mu_pi_odd;

    out.report.add(row.n, "h_q_joint", row.h_q_joint);
    out.report.add(row.n, "h_eta_pi_even", row.h_eta_pi_even);
    out.report.add(row.n, "h_mu_pi_odd", row.h_mu_pi_odd);
    out.report.add(row.n, "ladder_partial_sum", row.partial_sum);
    out.report.add(row.n, "ladder_residual", row.residual);
    out.rows.push_back(row);
  }
  out.report.add(0, "h_q_reference", out.h_q_reference);
  out.report.verdict("entropy_ladder", worst <= 1e-9, worst);
  out.report.verdict("linear_decay", worst_decay <= 1e-8, worst_decay);
  return out;
}

BridgeSolution solve_bridge(const DiscreteModel& model, const StoppingRule& stop) {
  SinkhornPotentials p = initial_potentials(model);
  BridgeSolution out;
  for (int sweep = 0; sweep < stop.max_sweeps; ++sweep) {
    SinkhornPotentials next = half_step(model, half_step(model, p));
    double change = std::max(max_abs(next.U - p.U), max_abs(next.V - p.V));
    p = std::move(next);
    if (change <= stop.tolerance) {
      out.converged = true;
      break;
    }
    ++out.iterations_used;
  }
  out.UU = p.U;
  out.VV = p.V;
  Vector r1 = out.UU - model.U - row_lse(log_forward(model, out.VV));
  Vector r2 = out.VV - model.V - col_lse(log_backward(model, out.UU));
  out.residual = std::max(max_abs(r1), max_abs(r2));

  out.log_bridge = model.log_k;
  out.log_bridge.colwise() += model.lambda.array().log().matrix() - out.UU;
  out.log_bridge.rowwise() += (model.nu.array().log().matrix() - out.VV).transpose();
  out.bridge = out.log_bridge.array().exp();
  return out;
}

Matrix half_bridge_argmin(const Matrix& P, const Vector& marginal, bool fix_columns, bool reverse) {
  const Matrix A = fix_columns ? P : Matrix(P.transpose());
  if (marginal.size() != A.cols()) throw DomainError("half_bridge_argmin: marginal size mismatch");
  Matrix Q(A.rows(), A.cols());
  for (Index c = 0; c < A.cols(); ++c) {
    const Vector p = A.col(c);
    const double mass = marginal(c);
    auto objective = [&](const Vector& w) {
      double f = 0.0;
      for (Index i = 0; i < w.size(); ++i) {
        if (reverse)
          f += p(i) * std::log(p(i) / (mass * w(i)));
        else if (w(i) > 0.0)
          f += mass * w(i) * std::log(mass * w(i) / p(i));
      }
      return f;
    };
    auto gradient = [&](const Vector& w) {
      Vector g(w.size());
      for (Index i = 0; i < w.size(); ++i)
        g(i) = reverse ? -p(i) / w(i) : mass * (std::log(mass * w(i) / p(i)) + 1.0);
      return g;
    };
    Vector w = Vector::Constant(p.size(), 1.0 / p.size());
    double f = objective(w), t = 1.0;
    for (int it = 0; it < 5000; ++it) {
      Vector g = gradient(w);
      g.array() -= g.minCoeff();
      bool moved = false;
      while (t > 1e-30) {
        Vector cand = w.array() * (-t * g.array()).exp();
        cand /= cand.sum();
        double fc = objective(cand);
        if (fc <= f) {
          moved = (cand - w).cwiseAbs().maxCoeff() > 0.0;
          w = cand;
          f = fc;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      t *= 2.0;
    }
    Q.col(c) = mass * w;
  }
  return fix_columns ? Q : Matrix(Q.transpose());
}

Report identity_suite(const DiscreteModel& model, const std::vector<SinkhornIterate>& iterates) {
  if (iterates.size() < 2) throw DomainError("identity_suite: needs at least two consecutive iterates");
  const std::size_t N = iterates.size();
  const Vector mu = model.mu.weights(), eta = model.eta.weights();
  const Vector lmu = safe_log(mu), leta = safe_log(eta);

  std::vector<double> he(N), hre(N), ho(N), hro(N);
  for (std::size_t n = 0; n < N; ++n) {
    he[n] = relative_entropy_log(leta, iterates[n].log_pi_even);
    hre[n] = relative_entropy_log(iterates[n].log_pi_even, leta);
    ho[n] = relative_entropy_log(lmu, iterates[n].log_pi_odd);
    hro[n] = relative_entropy_log(iterates[n].log_pi_odd, lmu);
  }

  Report r;
  const double chain_tol = 1e-12;
  auto chain = [&](const char* name, std::size_t from, auto lower, auto mid, auto upper) {
    double worst = 0.0;
    for (std::size_t n = from; n + 1 < N + (from == 1 ? 1 : 0); ++n) {
      double v = std::max(lower(n) - mid(n), mid(n) - upper(n));
      r.add(static_cast<int>(n), name, v);
      worst = std::max(worst, v);
    }
    r.verdict(name, worst <= chain_tol, worst);
  };
  chain("chain_eta_pi", 0, [&](std::size_t n) { return he[n + 1]; }, [&](std::size_t n) { return hro[n]; },
        [&](std::size_t n) { return he[n]; });
  chain("chain_pi_eta", 0, [&](std::size_t n) { return hre[n + 1]; }, [&](std::size_t n) { return ho[n]; },
        [&](std::size_t n) { return hre[n]; });
  chain("chain_pi_mu", 1, [&](std::size_t n) { return hro[n]; }, [&](std::size_t n) { return he[n]; },
        [&](std::size_t n) { return hro[n - 1]; });
  chain("chain_mu_pi", 1, [&](std::size_t n) { return ho[n]; }, [&](std::size_t n) { return hre[n]; },
        [&](std::size_t n) { return ho[n - 1]; });

  const double id_tol = 1e-12;
  auto pe = [&](std::size_t n) { return iterates[n].pi_even.weights(); };
  auto po = [&](std::size_t n) { return iterates[n].pi_odd.weights(); };
  auto ke = [&](std::size_t n) -> const Matrix& { return iterates[n].kernel_even; };
  auto ko = [&](std::size_t n) -> const Matrix& { return iterates[n].kernel_odd; };

  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, s_even = 0, s_odd = 0, fx = 0, fy = 0, mx = 0, my = 0;
  for (std::size_t l = 0; l < N; ++l) {
    c1 = std::max(c1, rel_gap(ke(l) * eta.cwiseQuotient(pe(l)), po(l).cwiseQuotient(mu)));
    fx = std::max(fx, rel_gap(ko(l).transpose() * pe(l), mu));
    mx = std::max(mx, max_abs(iterates[l].joint_even.rowwise().sum() - mu));
    my = std::max(my, max_abs(iterates[l].joint_odd.colwise().sum().transpose() - eta));
    if (l + 1 < N) {
      c2 = std::max(c2, rel_gap(ke(l + 1) * pe(l).cwiseQuotient(eta), mu.cwiseQuotient(po(l))));
      fy = std::max(fy, rel_gap(ke(l + 1).transpose() * po(l), eta));
    }
    if (l >= 1) {
      c3 = std::max(c3, rel_gap(ko(l - 1) * mu.cwiseQuotient(po(l - 1)), pe(l).cwiseQuotient(eta)));
      c4 = std::max(c4, rel_gap(ko(l) * po(l - 1).cwiseQuotient(mu), eta.cwiseQuotient(pe(l))));
      Matrix s2l = ko(l - 1) * ke(l);
      Matrix s2l1 = ke(l) * ko(l);
      s_even = std::max(s_even, rel_gap(s2l * pe(l - 1).cwiseQuotient(eta), pe(l).cwiseQuotient(eta)));
      s_odd = std::max(s_odd, rel_gap(s2l1 * po(l - 1).cwiseQuotient(mu), po(l).cwiseQuotient(mu)));
    }
  }
  r.verdict("commute_even_forward", c1 <= id_tol, c1);
  r.verdict("commute_even_backward", c2 <= id_tol, c2);
  r.verdict("commute_odd_forward", c3 <= id_tol, c3);
  r.verdict("commute_odd_backward", c4 <= id_tol, c4);
  r.verdict("semigroup_even", s_even <= id_tol, s_even);
  r.verdict("semigroup_odd", s_odd <= id_tol, s_odd);
  r.verdict("fixed_point_mu", fx <= id_tol, fx);
  r.verdict("fixed_point_eta", fy <= id_tol, fy);
  r.verdict("joint_marginal_mu", mx <= id_tol, mx);
  r.verdict("joint_marginal_eta", my <= id_tol, my);

  if (model.nx <= 4 && model.ny <= 4) {
    double hb = 0.0;
    for (std::size_t n = 0; n < std::min<std::size_t>(N, 4); ++n) {
      const auto& it = iterates[n];
      for (bool reverse : {false, true}) {
        hb = std::max(hb, (half_bridge_argmin(it.joint_even, eta, true, reverse) - it.joint_odd).cwiseAbs().maxCoeff());
        if (n + 1 < N)
          hb = std::max(hb, (half_bridge_argmin(it.joint_odd, mu, false, reverse) - iterates[n + 1].joint_even)
                                .cwiseAbs()
                                .maxCoeff());
      }
      r.add(static_cast<int>(n), "half_bridge_gap", hb);
    }
    r.verdict("half_bridge", hb <= 1e-7, hb);
  }
  return r;
}

Report geometric_rate_report(const DiscreteModel& model, const std::vector<SinkhornIterate>& iterates) {
  Report r;
  const double eps = model.epsilon_w();
  const double bound = (1.0 - eps) * (1.0 - eps);
  r.add(0, "epsilon_w", eps);
  r.add(0, "rate_bound", bound);

  for (const PhiFunction& phi : {phi::kl(), phi::tv(), phi::hellinger()}) {
    for (bool odd : {false, true}) {
      std::vector<double> h;
      for (const auto& it : iterates)
        h.push_back(odd ? phi_entropy(phi, it.pi_odd, model.mu) : phi_entropy(phi, it.pi_even, model.eta));
      std::string name = "phi_" + phi.name + (odd ? "_odd" : "_even");
      double worst = -kInf;
      for (std::size_t n = 0; n < h.size(); ++n) {
        r.add(static_cast<int>(n), name, h[n]);
        if (n + 1 < h.size() && h[n] >= kSaturationFloor && h[n] > 1e-300) {
          double ratio = h[n + 1] / h[n];
          r.add(static_cast<int>(n), name + "_ratio", ratio);
          worst = std::max(worst, ratio - bound);
        }
      }
      r.verdict("geometric_rate_" + phi.name + (odd ? "_odd" : "_even"), worst <= 1e-10, worst);
    }
  }

  double sandwich = -kInf;
  std::vector<std::pair<int, double>> density;
  for (std::size_t n = 0; n < iterates.size(); ++n) {
    Vector ratio = iterates[n].pi_even.weights().cwiseQuotient(model.eta.weights());
    double sup = (ratio.array() - 1.0).abs().maxCoeff();
    r.add(static_cast<int>(n), "density_sup_gap", sup);
    density.push_back({static_cast<int>(n), sup});
    if (n >= 1) {
      double lo = (eps - ratio.array()).maxCoeff();
      double hi = (ratio.array() - 1.0 / eps).maxCoeff();
      sandwich = std::max({sandwich, lo, hi});
    }
  }
  if (iterates.size() > 1) r.verdict("sandwich", sandwich <= 1e-12, sandwich);

  if (density.size() > 1) density.erase(density.begin());
  RateFit fit = fit_rate(density);
  if (fit.available && eps < 1.0) {
    double theory = 2.0 * std::log(1.0 - eps);
    r.add(0, "density_fit_slope", fit.slope);
    r.add(0, "density_fit_r2", fit.r2);
    r.add(0, "density_theory_slope", theory);
    r.verdict("density_rate", fit.slope <= 0.95 * theory, fit.slope - 0.95 * theory);
  }
  return r;
}

Report potential_report(const DiscreteModel& model, const std::vector<SinkhornPotentials>& potentials,
                        const std::vector<SinkhornIterate>& iterates, const BridgeSolution& bridge) {
  if (potentials.size() != iterates.size()) throw DomainError("potential_report: potentials and iterates differ in length");
  Report r;
  const Vector mu = model.mu.weights(), eta = model.eta.weights();
  const Vector lmu = safe_log(mu), leta = safe_log(eta);

  Vector sum_u = Vector::Zero(model.nx), sum_v = Vector::Zero(model.ny);
  double series = 0.0, mono = -kInf, identity = 0.0, c_fit = 0.0;
  const double eps = model.epsilon_w();
  for (std::size_t n = 0; n < potentials.size(); ++n) {
    const auto& p = potentials[n];
    series = std::max({series, max_abs(p.U - model.U - sum_u), max_abs(p.V - sum_v)});
    sum_u -= lmu - iterates[n].log_pi_odd;
    sum_v -= leta - iterates[n].log_pi_even;

    double ev = eta.dot(p.V), mu_u = mu.dot(p.U);
    r.add(static_cast<int>(n), "eta_mean_v", ev);
    r.add(static_cast<int>(n), "mu_mean_u", mu_u);
    mono = std::max(mono, ev);
    mono = std::max(mono, mu_u - mu.dot(model.U));
    if (n + 1 < potentials.size()) {
      mono = std::max(mono, eta.dot(potentials[n + 1].V) - ev);
      mono = std::max(mono, mu.dot(potentials[n + 1].U) - mu_u);
    }

    double gap = std::max(max_abs(p.V - bridge.VV), max_abs(p.U - bridge.UU));
    r.add(static_cast<int>(n), "potential_gap", gap);
    if (n >= 1 && eps < 1.0) c_fit = std::max(c_fit, gap / std::pow(1.0 - eps, 2.0 * n));

    double h = joint_entropy(bridge.log_bridge, iterates[n].log_joint_even);
    double via_potentials = mu.dot(p.U - bridge.UU) + eta.dot(p.V - bridge.VV);
    identity = std::max(identity, std::abs(h - via_potentials));
  }
  r.verdict("potential_series", series <= 1e-10, series);
  r.verdict("mean_monotone", mono <= 1e-12, mono);
  r.verdict("bridge_entropy_potentials", identity <= 1e-8, identity);
  r.add(0, "potential_fit_c", c_fit);

  // entropic series expansion, truncated at the last computed step
  std::vector<double> tail(iterates.size() + 1, 0.0);
  for (std::size_t n = iterates.size(); n-- > 0;)
    tail[n] = tail[n + 1] + relative_entropy_log(leta, iterates[n].log_pi_even) +
              relative_entropy_log(lmu, iterates[n].log_pi_odd);
  double worst = 0.0;
  for (std::size_t n = 0; n < iterates.size(); ++n) {
    double h = joint_entropy(bridge.log_bridge, iterates[n].log_joint_even);
    r.add(static_cast<int>(n), "h_bridge_joint", h);
    worst = std::max(worst, std::abs(h - tail[n]));
  }
  r.verdict("entropic_series", worst <= 1e-8, worst);
  return r;
}

}  // namespace bridgelab
