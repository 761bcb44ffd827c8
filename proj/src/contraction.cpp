#include "bridgelab/contraction.hpp"

#include "bridgelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace bridgelab {

namespace {

void require_positive(const Vector& v, const char* what) {
  if (v.size() == 0 || !v.allFinite() || (v.array() <= 0.0).any())
    throw DomainError(std::string(what) + ": weights must be finite and positive");
}

DiscreteMeasure random_measure(CounterRng& rng, Index n) {
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = -std::log(1.0 - rng.uniform());
  // occasionally sparse, to reach the boundary of the simplex
  if (rng.uniform() < 0.25) w(static_cast<Index>(rng.uniform() * n)) += 10.0 * n;
  return DiscreteMeasure(w);
}

}  // namespace

WeightPair::WeightPair(Vector g_, Vector h_, double a_) : g(std::move(g_)), h(std::move(h_)), a(a_) {
  require_positive(g, "WeightPair g");
  require_positive(h, "WeightPair h");
}

double dobrushin(const Matrix& kernel) {
  double best = 0.0;
  for (Index i = 0; i < kernel.rows(); ++i)
    for (Index j = i + 1; j < kernel.rows(); ++j)
      best = std::max(best, 0.5 * (kernel.row(i) - kernel.row(j)).cwiseAbs().sum());
  return best;
}

ProbeReport phi_contraction_probe(const Matrix& kernel, const PhiFunction& phi, int samples, std::uint64_t seed) {
  ProbeReport out;
  out.dob = dobrushin(kernel);
  const Index n = kernel.rows();
  CounterRng rng(seed);

  auto check = [&](const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
    double before = phi_entropy(phi, m1, m2);
    double after = phi_entropy(phi, m1 * kernel, m2 * kernel);
    ++out.samples;
    if (before > 0.0 && std::isfinite(before)) out.max_ratio = std::max(out.max_ratio, after / before);
    if (!std::isfinite(before)) return;
    double excess = after - out.dob * before;
    if (excess > 1e-12 * (1.0 + before)) {
      ++out.violations;
      out.worst_excess = std::max(out.worst_excess, excess);
    }
  };

  // Dirac pairs at the rows realizing dob(K)
  Index bi = 0, bj = std::min<Index>(1, n - 1);
  double best = -1.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      double t = 0.5 * (kernel.row(i) - kernel.row(j)).cwiseAbs().sum();
      if (t > best) {
        best = t;
        bi = i;
        bj = j;
      }
    }
  if (n >= 2) check(DiscreteMeasure::dirac(n, bi), DiscreteMeasure::dirac(n, bj));
  for (int s = 0; s < samples; ++s) {
    CounterRng local = rng.split(static_cast<std::uint64_t>(s));
    check(random_measure(local, n), random_measure(local, n));
  }
  return out;
}

double lip_norm(const Matrix& kernel, const Vector& g, const Vector& h) {
  if (g.size() != kernel.rows() || h.size() != kernel.cols()) throw DomainError("lip_norm: weight sizes do not match the kernel");
  require_positive(g, "lip_norm g");
  require_positive(h, "lip_norm h");
  double best = 0.0;
  for (Index i = 0; i < kernel.rows(); ++i)
    for (Index j = i + 1; j < kernel.rows(); ++j) {
      double num = (h.array() * (kernel.row(i) - kernel.row(j)).transpose().array().abs()).sum();
      best = std::max(best, num / (g(i) + g(j)));
    }
  return best;
}

DriftReport drift_check(const Matrix& K, const Matrix& L, const WeightPair& w, double epsilon, double c) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(c > 0.0)) throw DomainError("drift_check: need epsilon in (0,1) and c > 0");
  if (K.rows() != w.g.size() || K.cols() != w.h.size() || L.rows() != w.h.size() || L.cols() != w.g.size())
    throw DomainError("drift_check: kernel and weight dimensions disagree");
  DriftReport out;
  out.worst_slack = -std::numeric_limits<double>::infinity();
  Vector sk = K * w.h - epsilon * w.g - Vector::Constant(w.g.size(), c);
  Vector sl = L * w.g - epsilon * w.h - Vector::Constant(w.h.size(), c);
  Index ik, il;
  double mk = sk.maxCoeff(&ik), ml = sl.maxCoeff(&il);
  if (mk >= ml) {
    out.worst_slack = mk;
    out.worst_side = "K";
    out.worst_state = ik;
  } else {
    out.worst_slack = ml;
    out.worst_side = "L";
    out.worst_state = il;
  }
  const double tol = 1e-12 * (1.0 + c + w.g.maxCoeff() + w.h.maxCoeff());
  out.pass = out.worst_slack <= tol;

  double s = epsilon / (2.0 * c);
  Vector gb = (0.5 + s * w.g.array()).matrix(), hb = (0.5 + s * w.h.array()).matrix();
  Vector rk = K * hb - epsilon * gb - Vector::Constant(gb.size(), 0.5);
  Vector rl = L * gb - epsilon * hb - Vector::Constant(hb.size(), 0.5);
  out.rescaled_worst_slack = std::max(rk.maxCoeff(), rl.maxCoeff());
  out.rescaled_pass = out.rescaled_worst_slack <= 1e-12 * (1.0 + gb.maxCoeff() + hb.maxCoeff());
  return out;
}

std::vector<IotaEntry> minorization_table(const Matrix& K, const Matrix& L, const WeightPair& w,
                                          const std::vector<double>& levels) {
  std::vector<IotaEntry> out;
  for (double l : levels) {
    IotaEntry e;
    e.level = l;
    std::vector<Index> xs, ys;
    for (Index x = 0; x < w.g.size(); ++x)
      if (w.g(x) <= l) xs.push_back(x);
    for (Index y = 0; y < w.h.size(); ++y)
      if (w.h(y) <= l) ys.push_back(y);
    if (xs.empty() || ys.empty()) {
      e.note = "empty sublevel set";
      out.push_back(e);
      continue;
    }
    double ik = 0.0, il = 0.0;
    for (Index y = 0; y < K.cols(); ++y) {
      double m = std::numeric_limits<double>::infinity();
      for (Index x : xs) m = std::min(m, K(x, y));
      ik += m;
    }
    for (Index x = 0; x < L.cols(); ++x) {
      double m = std::numeric_limits<double>::infinity();
      for (Index y : ys) m = std::min(m, L(y, x));
      il += m;
    }
    e.iota = std::min(ik, il);
    e.feasible = true;
    out.push_back(e);
  }
  return out;
}

bool ContractionCertificate::verify(const std::vector<KernelPair>& pairs, double tol) const {
  WeightPair w(g, h, a);
  Vector ga = w.g_a(), ha = w.h_a();
  for (const auto& p : pairs) {
    if (!drift_check(p.K, p.L, w, epsilon, c).pass) return false;
    if (lip_norm(p.K, ga, ha) > rho + tol || lip_norm(p.L, ha, ga) > rho + tol) return false;
    if (lip_norm(p.K * p.L, ga, ga) > rho * rho + tol || lip_norm(p.L * p.K, ha, ha) > rho * rho + tol) return false;
  }
  return rho < 1.0;
}

std::vector<double> default_a_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(std::pow(10.0, -4.0 + 8.0 * i / 49.0));
  return grid;
}

SearchResult lyapunov_search(const std::vector<KernelPair>& pairs, const Vector& g, const Vector& h,
                             const std::vector<double>& grid, double drift_epsilon) {
  WeightPair base(g, h);
  SearchResult out;
  out.best_rho = std::numeric_limits<double>::infinity();
  for (double a : grid) {
    WeightPair w(g, h, a);
    Vector ga = w.g_a(), ha = w.h_a();
    double rho = 0.0;
    for (const auto& p : pairs) rho = std::max({rho, lip_norm(p.K, ga, ha), lip_norm(p.L, ha, ga)});
    if (rho < out.best_rho) {
      out.best_rho = rho;
      out.best_a = a;
    }
  }
  out.found = out.best_rho < 1.0;

  ContractionCertificate& cert = out.certificate;
  cert.a = out.best_a;
  cert.rho = out.best_rho;
  cert.g = g;
  cert.h = h;
  cert.epsilon = drift_epsilon;
  double c = 0.0;
  for (const auto& p : pairs) {
    c = std::max(c, (p.K * h - drift_epsilon * g).maxCoeff());
    c = std::max(c, (p.L * g - drift_epsilon * h).maxCoeff());
  }
  cert.c = std::max(c, 1e-12);
  WeightPair w(g, h, cert.a);
  Vector ga = w.g_a(), ha = w.h_a();
  for (const auto& p : pairs)
    cert.product_lip = std::max({cert.product_lip, lip_norm(p.K * p.L, ga, ga), lip_norm(p.L * p.K, ha, ha)});
  std::set<double> levels(g.data(), g.data() + g.size());
  levels.insert(h.data(), h.data() + h.size());
  if (!pairs.empty())
    cert.iota_table = minorization_table(pairs.front().K, pairs.front().L, base,
                                         std::vector<double>(levels.begin(), levels.end()));
  return out;
}

SearchResult lyapunov_search(const Matrix& K, const Matrix& L, const Vector& g, const Vector& h,
                             const std::vector<double>& grid, double drift_epsilon) {
  return lyapunov_search(std::vector<KernelPair>{{K, L}}, g, h, grid, drift_epsilon);
}

}  // namespace bridgelab
