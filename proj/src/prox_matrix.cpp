#include <cmath>

#include "proxcomp/error.hpp"
#include "proxcomp/linalg.hpp"
#include "proxcomp/prox.hpp"

namespace proxcomp::prox {

Matrix project_psd(const Matrix& v) {
  auto eig = linalg::symmetric_eigen(v);
  Vector clipped = eig.values.cwiseMax(0.0);
  return eig.vectors * clipped.asDiagonal() * eig.vectors.transpose();
}

Matrix prox_orthogonal_invariant(SpectralAtom atom, const Matrix& v, double lambda) {
  switch (atom) {
    case SpectralAtom::NegLogDet: {
      if (v.rows() != v.cols()) throw DimensionError("neg_log_det prox needs a square matrix");
      auto eig = linalg::symmetric_eigen(v);
      Vector d(eig.values.size());
      for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = prox_neg_log(eig.values(i), lambda);
      return eig.vectors * d.asDiagonal() * eig.vectors.transpose();
    }
    case SpectralAtom::NuclearNorm: {
      auto s = linalg::svd(v);
      Vector d = soft_threshold(s.s, lambda).cwiseMax(0.0);
      return s.u * d.asDiagonal() * s.v.transpose();
    }
    case SpectralAtom::SpectralNorm: {
      auto s = linalg::svd(v);
      Vector d = prox_linf(s.s, lambda);
      return s.u * d.asDiagonal() * s.v.transpose();
    }
  }
  throw InternalError("prox_orthogonal_invariant: unknown atom");
}

}  // namespace proxcomp::prox
