#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace awqmp {

/// Thrown when elimination meets a pivot below the singularity tolerance.
class SingularSystemError : public std::runtime_error {
 public:
  explicit SingularSystemError(int step)
      : std::runtime_error("singular system at elimination step " + std::to_string(step)),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Square dense system A x = b.
struct LinearSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

// Gaussian elimination with partial (row) pivoting. The inputs are copied,
// never modified. The singularity tolerance is 1e-12 times the largest row
// max-norm of A, so detection does not depend on the unit scale of the
// coefficients (energies here are ~1e-4 J).
template <typename DerivedA, typename DerivedB>
Eigen::Vector<typename DerivedA::Scalar, Eigen::Dynamic> gaussian_solve(
    const Eigen::MatrixBase<DerivedA>& a_expr, const Eigen::MatrixBase<DerivedB>& b_expr) {
  using Scalar = typename DerivedA::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

  Matrix a = a_expr;
  Vector b = b_expr;
  const Eigen::Index n = a.rows();
  if (n < 1 || a.cols() != n || b.size() != n) {
    throw std::invalid_argument("gaussian_solve: dimensions disagree");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("gaussian_solve: non-finite entries");
  }

  const Scalar tol =
      Scalar(1e-12) * a.cwiseAbs().rowwise().maxCoeff().maxCoeff();

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index rel = 0;
    const Scalar pivot_mag = a.col(k).tail(n - k).cwiseAbs().maxCoeff(&rel);
    // '!(> tol)' also rejects the all-zero matrix, where tol itself is zero.
    if (!(pivot_mag > tol)) throw SingularSystemError(static_cast<int>(k));
    const Eigen::Index pivot_row = k + rel;
    if (pivot_row != k) {
      a.row(k).swap(a.row(pivot_row));
      std::swap(b[k], b[pivot_row]);
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const Scalar f = a(i, k) / a(k, k);
      if (f == Scalar(0)) continue;
      a.row(i).tail(n - k - 1) -= f * a.row(k).tail(n - k - 1);
      a(i, k) = Scalar(0);
      b[i] -= f * b[k];
    }
  }

  Vector x(n);
  for (Eigen::Index i = n; i-- > 0;) {
    Scalar s = b[i];
    if (i + 1 < n) s -= a.row(i).tail(n - i - 1).dot(x.tail(n - i - 1));
    x[i] = s / a(i, i);
  }
  return x;
}

inline Eigen::VectorXd gaussian_solve(const LinearSystem& system) {
  return gaussian_solve(system.a, system.b);
}

/// Max-norm of the residual A x - b.
template <typename DerivedA, typename DerivedX, typename DerivedB>
typename DerivedA::Scalar residual_norm(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedX>& x,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.size() || a.cols() != x.size()) {
    throw std::invalid_argument("residual_norm: dimensions disagree");
  }
  return (a * x - b).cwiseAbs().maxCoeff();
}

inline double residual_norm(const LinearSystem& system, const Eigen::VectorXd& x) {
  return residual_norm(system.a, x, system.b);
}

}  // namespace awqmp
