#include "proxcomp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "proxcomp/error.hpp"
#include "proxcomp/stats.hpp"

namespace proxcomp::linalg {
namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

[[noreturn]] void not_converged(const char* what, double off) {
  std::ostringstream os;
  os << what << ": Jacobi iteration did not converge (off-diagonal norm " << off << ")";
  throw SingularError(os.str());
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& input, double tol, int max_sweeps) {
  if (input.rows() != input.cols()) throw DimensionError("symmetric_eigen needs a square matrix");
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  stats::record_factorization("jacobi_eig", n);
  const double scale = std::max(a.norm(), 1e-300);

  double off = off_diagonal_norm(a);
  int sweep = 0;
  while (off > tol * scale) {
    if (sweep++ >= max_sweeps) not_converged("symmetric_eigen", off);
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_diagonal_norm(a);
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

Svd svd(const Matrix& input, double tol, int max_sweeps) {
  if (input.rows() < input.cols()) {
    Svd t = svd(input.transpose(), tol, max_sweeps);
    return {t.v, t.s, t.u};
  }
  const Eigen::Index m = input.rows(), n = input.cols();
  Matrix u = input;
  Matrix v = Matrix::Identity(n, n);
  stats::record_factorization("jacobi_svd", n);

  bool rotated = true;
  int sweep = 0;
  double worst = 0.0;
  while (rotated) {
    if (sweep++ >= max_sweeps) not_converged("svd", worst);
    rotated = false;
    worst = 0.0;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, rel);
        if (rel <= tol) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double up = u(k, p), uq = u(k, q);
          u(k, p) = c * up - s * uq;
          u(k, q) = s * up + c * uq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vp = v(k, p), vq = v(k, q);
          v(k, p) = c * vp - s * vq;
          v(k, q) = s * vp + c * vq;
        }
      }
    }
  }

  Vector s(n);
  for (Eigen::Index j = 0; j < n; ++j) s(j) = u.col(j).norm();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return s(i) > s(j); });
  Svd out{Matrix::Zero(m, n), Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto j = order[k];
    out.s(k) = s(j);
    if (s(j) > 0.0) out.u.col(k) = u.col(j) / s(j);
    out.v.col(k) = v.col(j);
  }
  return out;
}

}  // namespace proxcomp::linalg
