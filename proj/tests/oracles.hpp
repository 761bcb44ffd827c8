#pragma once

#include "bridgelab/discrete.hpp"
#include "bridgelab/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using bridgelab::CounterRng;
using bridgelab::Index;
using bridgelab::Matrix;
using bridgelab::Vector;

inline Matrix random_orthogonal(CounterRng& rng, Index d) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  return Eigen::HouseholderQR<Matrix>(g).householderQ();
}

inline Matrix random_spd(CounterRng& rng, Index d, double lo = 0.2, double hi = 3.0) {
  Matrix q = random_orthogonal(rng, d);
  Vector ev(d);
  for (Index i = 0; i < d; ++i) ev(i) = rng.uniform(lo, hi);
  Matrix m = q * ev.asDiagonal() * q.transpose();
  return (m + m.transpose()) / 2.0;
}

inline Matrix random_matrix(CounterRng& rng, Index r, Index c) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vector random_probability(CounterRng& rng, Index n, double floor = 0.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = floor + rng.uniform();
  return v / v.sum();
}

inline Matrix random_kernel(CounterRng& rng, Index n, Index m, double floor = 0.0) {
  Matrix k(n, m);
  for (Index i = 0; i < n; ++i) k.row(i) = random_probability(rng, m, floor).transpose();
  return k;
}

/// 1 − min over row pairs of the overlap Σ_y min(K(i,y), K(j,y)).
inline double dobrushin_overlap(const Matrix& k) {
  double best = 1.0;
  if (k.rows() < 2) return 0.0;
  for (Index i = 0; i < k.rows(); ++i)
    for (Index j = i + 1; j < k.rows(); ++j) best = std::min(best, k.row(i).cwiseMin(k.row(j)).sum());
  return 1.0 - best;
}

/// sup over pairs and over test functions |f| ≤ h of (K(x1,·) − K(x2,·))(f)/(g(x1) + g(x2)), with f at the
/// extreme points ±h.
inline double lip_by_signs(const Matrix& k, const Vector& g, const Vector& h) {
  const Index m = k.cols();
  double best = 0.0;
  for (Index i = 0; i < k.rows(); ++i)
    for (Index j = 0; j < k.rows(); ++j) {
      if (i == j) continue;
      for (long mask = 0; mask < (1L << m); ++mask) {
        double s = 0.0;
        for (Index y = 0; y < m; ++y) s += ((mask >> y) & 1 ? 1.0 : -1.0) * h(y) * (k(i, y) - k(j, y));
        best = std::max(best, s / (g(i) + g(j)));
      }
    }
  return best;
}

/// Exact transport cost by enumerating every basis of the transportation polytope.
inline double transport_by_bases(const Matrix& cost, const Vector& a, const Vector& b) {
  const Index m = a.size(), n = b.size();
  const Index cells = m * n, size = m + n - 1;
  std::vector<int> pick(cells, 0);
  std::fill(pick.begin(), pick.begin() + size, 1);
  std::sort(pick.begin(), pick.end(), std::greater<int>());
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<Index> chosen;
    for (Index c = 0; c < cells; ++c)
      if (pick[c]) chosen.push_back(c);
    // a spanning tree on m + n nodes has no cycle
    std::vector<Index> parent(m + n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    bool tree = true;
    for (Index c : chosen) {
      Index r = find(c / n), s = find(m + c % n);
      if (r == s) {
        tree = false;
        break;
      }
      parent[r] = s;
    }
    if (!tree) continue;
    // leaf elimination gives the unique basic flow
    Vector ra = a, rb = b;
    std::vector<bool> used(chosen.size(), false);
    Matrix flow = Matrix::Zero(m, n);
    for (std::size_t step = 0; step < chosen.size(); ++step) {
      std::vector<int> deg(m + n, 0);
      for (std::size_t e = 0; e < chosen.size(); ++e)
        if (!used[e]) {
          ++deg[chosen[e] / n];
          ++deg[m + chosen[e] % n];
        }
      for (std::size_t e = 0; e < chosen.size(); ++e) {
        if (used[e]) continue;
        Index r = chosen[e] / n, c = chosen[e] % n;
        if (deg[r] == 1) {
          flow(r, c) = ra(r);
          rb(c) -= ra(r);
          ra(r) = 0.0;
        } else if (deg[m + c] == 1) {
          flow(r, c) = rb(c);
          ra(r) -= rb(c);
          rb(c) = 0.0;
        } else {
          continue;
        }
        used[e] = true;
        break;
      }
    }
    if (flow.minCoeff() < -1e-13) continue;
    best = std::min(best, (cost.array() * flow.array()).sum());
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

/// Plain-domain iterative proportional fitting: joints 𝒫_0, ..., 𝒫_{2N+1}.
inline std::vector<Matrix> ipf_joints(const bridgelab::DiscreteModel& model, int sweeps) {
  const Vector& mu = model.mu.weights();
  const Vector& eta = model.eta.weights();
  Matrix k(model.nx, model.ny);
  for (Index x = 0; x < model.nx; ++x) {
    for (Index y = 0; y < model.ny; ++y) k(x, y) = std::exp(-model.W(x, y)) * model.nu(y);
    k.row(x) /= k.row(x).sum();
  }
  std::vector<Matrix> out;
  Matrix p = mu.asDiagonal() * k;
  out.push_back(p);
  for (int s = 0; s <= sweeps; ++s) {
    Vector col = p.colwise().sum().transpose();
    p = p * (eta.array() / col.array()).matrix().asDiagonal();
    out.push_back(p);
    if (s == sweeps) break;
    Vector row = p.rowwise().sum();
    p = (mu.array() / row.array()).matrix().asDiagonal() * p;
    out.push_back(p);
  }
  return out;
}

inline double kl_direct(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    if (a(i) > 0.0) s += a(i) * std::log(a(i) / b(i));
  return s;
}

inline double kl_direct(const Matrix& a, const Matrix& b) {
  return kl_direct(Vector(Eigen::Map<const Vector>(a.data(), a.size())),
                   Vector(Eigen::Map<const Vector>(b.data(), b.size())));
}

/// ½[tr(S2^{-1}S1) − d + (m2 − m1)'S2^{-1}(m2 − m1) + log det S2 − log det S1] via Cholesky factors.
inline double gaussian_kl_cholesky(const Vector& m1, const Matrix& s1, const Vector& m2, const Matrix& s2) {
  Eigen::LLT<Matrix> l1(s1), l2(s2);
  const Index d = m1.size();
  double logdet1 = 2.0 * l1.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double logdet2 = 2.0 * l2.matrixL().toDenseMatrix().diagonal().array().log().sum();
  Vector dm = m2 - m1;
  return 0.5 * ((l2.solve(s1)).trace() - static_cast<double>(d) + dm.dot(l2.solve(dm)) + logdet2 - logdet1);
}

/// Joint law of (X, Y) with X ~ N(m, s) and Y | X ~ N(a + bX, t).
inline void joint_gaussian(const Vector& m, const Matrix& s, const Vector& a, const Matrix& b, const Matrix& t,
                           Vector& jm, Matrix& js) {
  const Index d = m.size();
  jm.resize(2 * d);
  js.resize(2 * d, 2 * d);
  jm << m, a + b * m;
  js.topLeftCorner(d, d) = s;
  js.topRightCorner(d, d) = s * b.transpose();
  js.bottomLeftCorner(d, d) = b * s;
  js.bottomRightCorner(d, d) = b * s * b.transpose() + t;
}

/// Law of Y | X = x for a joint Gaussian on (X, Y): returns (intercept, gain, covariance) with
/// Y | x ~ N(intercept + gain·x, covariance).
inline void condition_second_on_first(const Vector& jm, const Matrix& js, Vector& intercept, Matrix& gain,
                                      Matrix& cov) {
  const Index d = jm.size() / 2;
  Matrix sxx = js.topLeftCorner(d, d), syx = js.bottomLeftCorner(d, d), syy = js.bottomRightCorner(d, d);
  Eigen::LDLT<Matrix> f(sxx);
  gain = f.solve(syx.transpose()).transpose();
  intercept = jm.tail(d) - gain * jm.head(d);
  cov = syy - gain * syx.transpose();
  cov = (cov + cov.transpose()) / 2.0;
}

}  // namespace oracle
