#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bridgelab {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

inline constexpr double kSpdTolerance = 1e-10;
inline constexpr double kSqrtTolerance = 1e-10;
inline constexpr double kNegativeClamp = 1e-12;

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DomainError(os.str());
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
}

}  // namespace detail

/// Symmetric matrix; entries are symmetrized on construction.
template <typename Scalar>
class SymMatrix {
 public:
  SymMatrix() = default;

  template <typename Derived>
  SymMatrix(const Eigen::MatrixBase<Derived>& m) {  // NOLINT: implicit from Eigen expressions
    detail::require_square(m, "SymMatrix");
    detail::require_finite(m, "SymMatrix");
    MatrixX<Scalar> tmp = m.template cast<Scalar>();
    m_ = (tmp + tmp.transpose()) / Scalar(2);
  }

  Index dim() const { return m_.rows(); }
  const MatrixX<Scalar>& matrix() const { return m_; }
  operator const MatrixX<Scalar>&() const { return m_; }

 private:
  MatrixX<Scalar> m_;
};

template <typename Derived>
auto symmetric_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> s = (m + m.transpose()) / Scalar(2);
  return Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>>(s, Eigen::EigenvaluesOnly).eigenvalues().eval();
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  return symmetric_eigenvalues(m).minCoeff();
}

template <typename Derived>
typename Derived::Scalar max_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  return symmetric_eigenvalues(m).maxCoeff();
}

/// Symmetric positive definite matrix: λ_min > kSpdTolerance·||v||₂.
template <typename Scalar>
class SpdMatrix {
 public:
  SpdMatrix() = default;

  template <typename Derived>
  SpdMatrix(const Eigen::MatrixBase<Derived>& m) : s_(m) {  // NOLINT: implicit from Eigen expressions
    auto ev = symmetric_eigenvalues(s_.matrix());
    Scalar scale = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    if (!(ev.minCoeff() > Scalar(kSpdTolerance) * scale)) {
      std::ostringstream os;
      os << "SpdMatrix: smallest eigenvalue " << ev.minCoeff() << " is not positive (spectral norm " << scale
         << ")";
      throw DomainError(os.str());
    }
  }

  Index dim() const { return s_.dim(); }
  const MatrixX<Scalar>& matrix() const { return s_.matrix(); }
  operator const MatrixX<Scalar>&() const { return s_.matrix(); }

 private:
  SymMatrix<Scalar> s_;
};

/// Applies f to the eigenvalues of a symmetric matrix.
template <typename Derived, typename F>
MatrixX<typename Derived::Scalar> spectral_apply(const Eigen::MatrixBase<Derived>& m, F f) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "spectral_apply");
  MatrixX<Scalar> s = (m + m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(s);
  VectorX<Scalar> d = es.eigenvalues().unaryExpr(f);
  MatrixX<Scalar> out = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  return (out + out.transpose()) / Scalar(2);
}

/// Principal square root of a positive semi-definite matrix.
/// Eigenvalues in (−1e-12·scale, 0) are clamped to zero; anything lower is a domain error.
template <typename Derived>
MatrixX<typename Derived::Scalar> principal_sqrt(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "principal_sqrt");
  detail::require_finite(m, "principal_sqrt");
  auto ev = symmetric_eigenvalues(m);
  Scalar scale = std::max(Scalar(1), ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -Scalar(kNegativeClamp) * scale) {
    std::ostringstream os;
    os << "principal_sqrt: matrix is not positive semi-definite (eigenvalue " << ev.minCoeff() << ")";
    throw DomainError(os.str());
  }
  return spectral_apply(m, [](Scalar x) { return x > Scalar(0) ? std::sqrt(x) : Scalar(0); });
}

template <typename Scalar>
SpdMatrix<Scalar> principal_sqrt(const SpdMatrix<Scalar>& v) {
  return SpdMatrix<Scalar>(principal_sqrt(v.matrix()));
}

/// v^{-1/2} for SPD v.
template <typename Derived>
MatrixX<typename Derived::Scalar> inverse_sqrt(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  SpdMatrix<Scalar> check(m);
  return spectral_apply(check.matrix(), [](Scalar x) { return Scalar(1) / std::sqrt(x); });
}

/// Inverse of an SPD matrix through its eigendecomposition.
template <typename Derived>
MatrixX<typename Derived::Scalar> spd_inverse(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  SpdMatrix<Scalar> check(m);
  return spectral_apply(check.matrix(), [](Scalar x) { return Scalar(1) / x; });
}

/// a ≤ b in Löwner order: λ_min(b − a) ≥ −tol.
template <typename DerivedA, typename DerivedB>
bool loewner_leq(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                 typename DerivedA::Scalar tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << "loewner_leq: dimension mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw DomainError(os.str());
  }
  detail::require_square(a, "loewner_leq");
  return min_eigenvalue(b - a) >= -tol;
}

template <typename Scalar>
bool loewner_leq(const SymMatrix<Scalar>& a, const SymMatrix<Scalar>& b, Scalar tol) {
  return loewner_leq(a.matrix(), b.matrix(), tol);
}

template <typename Scalar>
struct Norms {
  Scalar frobenius;
  Scalar spectral;
};

template <typename Derived>
Norms<typename Derived::Scalar> matrix_norms(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(v, "matrix_norms");
  if (v.size() == 0) return {Scalar(0), Scalar(0)};
  MatrixX<Scalar> m = v;
  Scalar spectral = Eigen::JacobiSVD<MatrixX<Scalar>>(m).singularValues()(0);
  return {m.norm(), spectral};
}

template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& v) {
  return matrix_norms(v).spectral;
}

}  // namespace bridgelab
