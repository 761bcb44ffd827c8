#include "bridgelab/divergences.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bridgelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_support(const DiscreteMeasure& a, const DiscreteMeasure& b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": support sizes differ (" << a.size() << " vs " << b.size() << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(const Vector& weights) {
  if (weights.size() == 0) throw DomainError("DiscreteMeasure: empty support");
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw DomainError("DiscreteMeasure: weights must be finite and nonnegative");
  double total = weights.sum();
  if (!(total > 0.0)) throw DomainError("DiscreteMeasure: zero total mass");
  w_ = weights / total;
}

DiscreteMeasure DiscreteMeasure::uniform(Index n) { return DiscreteMeasure(Vector::Ones(n)); }

DiscreteMeasure DiscreteMeasure::dirac(Index n, Index at) {
  Vector w = Vector::Zero(n);
  w(at) = 1.0;
  return DiscreteMeasure(w);
}

DiscreteMeasure DiscreteMeasure::operator*(const Matrix& kernel) const {
  if (kernel.rows() != size()) throw DomainError("DiscreteMeasure * kernel: dimension mismatch");
  return DiscreteMeasure(Vector(kernel.transpose() * w_));
}

namespace phi {

PhiFunction kl() {
  return {"kl", [](double u, double v) {
            if (u == 0.0) return v;
            if (v == 0.0) return kInf;
            double d = (v - u) / u;
            return u * (d - std::log1p(d));
          }};
}

PhiFunction tv() {
  return {"tv", [](double u, double v) { return 0.5 * std::abs(u - v); }};
}

PhiFunction hellinger() {
  return {"hellinger", [](double u, double v) {
            double s = std::sqrt(u) + std::sqrt(v);
            if (s == 0.0) return 0.0;
            double r = (u - v) / s;
            return 0.5 * r * r;
          }};
}

PhiFunction chi_square() {
  return {"chi_square", [](double u, double v) {
            if (v == 0.0) return u == 0.0 ? 0.0 : kInf;
            return (u - v) * (u - v) / v;
          }};
}

std::vector<PhiFunction> catalog() { return {kl(), tv(), hellinger(), chi_square()}; }

}  // namespace phi

double phi_entropy(const PhiFunction& phi, const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  require_same_support(mu1, mu2, "phi_entropy");
  double total = 0.0;
  for (Index i = 0; i < mu1.size(); ++i) {
    double t = phi.evaluate(mu1(i), mu2(i));
    if (std::isinf(t)) return kInf;
    total += t;
  }
  return total;
}

double tv_distance(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  return phi_entropy(phi::tv(), mu1, mu2);
}

double relative_entropy_log(const Vector& log_a, const Vector& log_b) {
  if (log_a.size() != log_b.size()) throw DomainError("relative_entropy_log: size mismatch");
  double total = 0.0;
  for (Index i = 0; i < log_a.size(); ++i) {
    if (log_a(i) == -kInf) {
      total += std::exp(log_b(i));
      continue;
    }
    if (log_b(i) == -kInf) return kInf;
    double d = log_b(i) - log_a(i);
    total += std::exp(log_a(i)) * (std::expm1(d) - d);
  }
  return total;
}

double weighted_tv(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, const Vector& g) {
  require_same_support(mu1, mu2, "weighted_tv");
  if (g.size() != mu1.size()) throw DomainError("weighted_tv: weight size mismatch");
  if (!g.allFinite() || (g.array() <= 0.0).any()) throw DomainError("weighted_tv: weights must be positive");
  return (g.array() * (mu1.weights() - mu2.weights()).array().abs()).sum();
}

Gaussian::Gaussian(Vector m, const Matrix& sigma) : mean(std::move(m)), covariance(sigma) {
  if (mean.size() != covariance.dim()) throw DomainError("Gaussian: mean and covariance dimensions differ");
}

double burg_divergence(const Matrix& sigma, const Matrix& sigma_bar) {
  if (sigma.rows() != sigma_bar.rows() || sigma.cols() != sigma_bar.cols())
    throw DomainError("burg_divergence: dimension mismatch");
  Matrix s = inverse_sqrt(sigma_bar);
  Vector ev = symmetric_eigenvalues(Matrix(s * sigma * s));
  double total = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    double d = ev(i) - 1.0;
    total += d - std::log1p(d);
  }
  return total;
}

double gaussian_kl(const Gaussian& p, const Gaussian& q) {
  if (p.dim() != q.dim()) throw DomainError("gaussian_kl: dimension mismatch");
  Vector dm = p.mean - q.mean;
  double quad = dm.dot(spd_inverse(q.cov()) * dm);
  return 0.5 * (burg_divergence(p.cov(), q.cov()) + quad);
}

double gaussian_w2(const Gaussian& p, const Gaussian& q) {
  if (p.dim() != q.dim()) throw DomainError("gaussian_w2: dimension mismatch");
  Matrix s1 = principal_sqrt(p.cov());
  Matrix cross = principal_sqrt(Matrix(s1 * q.cov() * s1));
  double v = (p.mean - q.mean).squaredNorm() + (p.cov() + q.cov() - 2.0 * cross).trace();
  return std::sqrt(std::max(v, 0.0));
}

}  // namespace bridgelab
