#pragma once

#include "proxcomp/linop.hpp"

namespace proxcomp::linalg {

// A = vectors * diag(values) * vectors^T, values ascending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

// Thin SVD: A = u * diag(s) * v^T with s descending, u m x r, v n x r,
// r = min(m, n).
struct Svd {
  Matrix u;
  Vector s;
  Matrix v;
};

// Cyclic Jacobi eigensolver. Stops once the off-diagonal Frobenius norm is
// at most tol * ||A||_F; throws SingularError (with the remaining
// off-diagonal norm) if max_sweeps is exhausted first.
SymmetricEigen symmetric_eigen(const Matrix& a, double tol = 1e-12, int max_sweeps = 100);

// One-sided (Hestenes) Jacobi SVD with the same stopping contract.
Svd svd(const Matrix& a, double tol = 1e-12, int max_sweeps = 100);

}  // namespace proxcomp::linalg
