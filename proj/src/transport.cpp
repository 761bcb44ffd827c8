#include "bridgelab/divergences.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace bridgelab {

namespace {

struct Cell {
  Index i;
  Index j;
};

// Spanning-tree basis of the transportation polytope, rows are nodes [0, m), columns [m, m+n).
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const Vector& a, const Vector& b)
      : c_(cost), m_(cost.rows()), n_(cost.cols()), slot_(m_ * n_, -1) {
    northwest_corner(a, b);
  }

  void solve() {
    const double tol = 1e-12 * (1.0 + c_.cwiseAbs().maxCoeff());
    const long cap = 200000;
    for (long it = 0; it < cap; ++it) {
      compute_potentials();
      Index enter = -1;
      for (Index k = 0; k < m_ * n_ && enter < 0; ++k) {
        if (slot_[k] >= 0) continue;
        Index i = k / n_, j = k % n_;
        if (c_(i, j) - u_(i) - v_(j) < -tol) enter = k;
      }
      if (enter < 0) return;
      pivot(enter / n_, enter % n_);
    }
    throw std::runtime_error("kantorovich_discrete: simplex iteration cap reached");
  }

  Matrix plan() const {
    Matrix p = Matrix::Zero(m_, n_);
    for (std::size_t s = 0; s < basis_.size(); ++s) p(basis_[s].i, basis_[s].j) = std::max(flow_[s], 0.0);
    return p;
  }

 private:
  void add(Index i, Index j, double x) {
    slot_[i * n_ + j] = static_cast<Index>(basis_.size());
    basis_.push_back({i, j});
    flow_.push_back(x);
  }

  void northwest_corner(const Vector& a, const Vector& b) {
    Vector ra = a, rb = b;
    Index i = 0, j = 0;
    while (true) {
      double x = std::min(ra(i), rb(j));
      add(i, j, x);
      ra(i) -= x;
      rb(j) -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1)
        ++j;
      else if (j == n_ - 1)
        ++i;
      else if (ra(i) <= rb(j))
        ++i;
      else
        ++j;
    }
  }

  std::vector<std::vector<Index>> adjacency() const {
    std::vector<std::vector<Index>> adj(m_ + n_);
    for (std::size_t s = 0; s < basis_.size(); ++s) {
      adj[basis_[s].i].push_back(static_cast<Index>(s));
      adj[m_ + basis_[s].j].push_back(static_cast<Index>(s));
    }
    return adj;
  }

  Index other_end(Index s, Index node) const {
    const Cell& c = basis_[s];
    return node == c.i ? m_ + c.j : c.i;
  }

  void compute_potentials() {
    u_ = Vector::Zero(m_);
    v_ = Vector::Zero(n_);
    auto adj = adjacency();
    std::vector<char> seen(m_ + n_, 0);
    std::queue<Index> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      Index node = q.front();
      q.pop();
      for (Index s : adj[node]) {
        Index next = other_end(s, node);
        if (seen[next]) continue;
        seen[next] = 1;
        const Cell& c = basis_[s];
        if (next >= m_)
          v_(c.j) = c_(c.i, c.j) - u_(c.i);
        else
          u_(c.i) = c_(c.i, c.j) - v_(c.j);
        q.push(next);
      }
    }
  }

  // Tree path from row node i to column node j, as basis slots ordered from the column end.
  std::vector<Index> tree_path(Index i, Index j) const {
    auto adj = adjacency();
    std::vector<Index> parent_slot(m_ + n_, -1);
    std::vector<char> seen(m_ + n_, 0);
    std::queue<Index> q;
    q.push(i);
    seen[i] = 1;
    const Index target = m_ + j;
    while (!q.empty() && !seen[target]) {
      Index node = q.front();
      q.pop();
      for (Index s : adj[node]) {
        Index next = other_end(s, node);
        if (seen[next]) continue;
        seen[next] = 1;
        parent_slot[next] = s;
        q.push(next);
      }
    }
    std::vector<Index> path;
    for (Index node = target; node != i;) {
      Index s = parent_slot[node];
      path.push_back(s);
      node = other_end(s, node);
    }
    return path;
  }

  void pivot(Index i, Index j) {
    std::vector<Index> path = tree_path(i, j);
    // Path slots alternate −, +, −, ... starting at the column end.
    double theta = std::numeric_limits<double>::infinity();
    Index leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      Index s = path[k];
      Index key = basis_[s].i * n_ + basis_[s].j;
      if (flow_[s] < theta || (flow_[s] == theta && key < basis_[leave].i * n_ + basis_[leave].j)) {
        theta = flow_[s];
        leave = s;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) flow_[path[k]] += (k % 2 == 0 ? -theta : theta);
    slot_[basis_[leave].i * n_ + basis_[leave].j] = -1;
    basis_[leave] = {i, j};
    flow_[leave] = theta;
    slot_[i * n_ + j] = leave;
  }

  const Matrix& c_;
  Index m_, n_;
  std::vector<Index> slot_;
  std::vector<Cell> basis_;
  std::vector<double> flow_;
  Vector u_, v_;
};

}  // namespace

TransportPlan kantorovich_discrete(const Matrix& cost, const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  if (cost.rows() != mu1.size() || cost.cols() != mu2.size())
    throw DomainError("kantorovich_discrete: cost dimensions do not match the supports");
  if (!cost.allFinite() || (cost.array() < 0.0).any())
    throw DomainError("kantorovich_discrete: cost must be finite and nonnegative");
  TransportSimplex lp(cost, mu1.weights(), mu2.weights());
  lp.solve();
  TransportPlan out;
  out.plan = lp.plan();
  out.value = (cost.array() * out.plan.array()).sum();
  return out;
}

}  // namespace bridgelab
