#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace droplab {

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Eigenvalues are returned in ascending order with matching
/// eigenvector columns.
template <typename Scalar>
struct SymmetricEigen {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector eigenvalues;
  Matrix eigenvectors;
  int sweeps = 0;
};

template <typename Derived>
SymmetricEigen<typename Derived::Scalar>
jacobi_eigen(const Eigen::MatrixBase<Derived> &input,
             typename Derived::Scalar tol = typename Derived::Scalar(1e-12),
             int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  using Result = SymmetricEigen<Scalar>;
  typename Result::Matrix a = input;
  const Eigen::Index n = a.rows();
  typename Result::Matrix v = Result::Matrix::Identity(n, n);

  const Scalar scale = std::max(a.cwiseAbs().maxCoeff(), Scalar(1e-300));
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        off = std::max(off, std::abs(a(p, q)));
      }
    }
    if (off <= tol * scale) {
      break;
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) {
          continue;
        }
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        // A <- J^T A J with J the (p, q) rotation.
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  Result out;
  out.sweeps = sweep;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    order[static_cast<std::size_t>(i)] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.eigenvalues[i] = a(src, src);
    out.eigenvectors.col(i) = v.col(src);
  }
  return out;
}

} // namespace droplab
