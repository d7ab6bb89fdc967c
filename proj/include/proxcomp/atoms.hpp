#pragma once

#include <functional>
#include <string>
#include <vector>

#include "proxcomp/expr.hpp"

namespace proxcomp {

enum class Curvature { Constant, Affine, Convex, Concave, Unknown };
enum class Monotonicity { Nondecreasing, Nonincreasing, Nonmonotone };
enum class Sign { Positive, Negative, Unknown };  // Positive means >= 0

std::string curvature_name(Curvature c);
std::string sign_name(Sign s);

struct AtomInfo {
  std::string name;
  int min_args = 1;
  int max_args = 1;  // -1: variadic
  int num_params = 0;
  bool linear = false;

  // Nonlinear atoms: curvature of the atom itself, per-argument monotonicity
  // (the last entry repeats), and the sign of its value.
  Curvature curvature = Curvature::Convex;
  std::vector<Monotonicity> monotonicity;
  Sign sign = Sign::Unknown;

  // Name of the prox function implementing the atom directly; empty when
  // the atom only compiles through a reduction.
  std::string prox;

  // Output shape; throws DimensionError naming the offending argument shapes.
  std::function<Dim(const std::vector<Expr>&, const std::vector<double>&)> shape;
  // Linear atoms: equivalent Add/LinearMap expression over the same args.
  std::function<Expr(const std::vector<Expr>&, const std::vector<double>&, Dim)> linearize;
  // Nonlinear atoms: value on evaluated arguments.
  std::function<double(const std::vector<Matrix>&, const std::vector<double>&)> value;
};

const AtomInfo* find_atom(const std::string& name);
const AtomInfo& lookup_atom(const std::string& name);
std::vector<std::string> atom_names();

Monotonicity monotonicity_of(const AtomInfo& a, std::size_t arg);

// Vectorization helpers shared by the linear atoms and the compiler.
// Sparse operator placing a (rows x cols) block at (row_off, col_off) of an
// (out_rows x out_cols) matrix, acting on column-major vectors.
LinearOp embedding(Dim block, Dim out, std::int64_t row_off, std::int64_t col_off);
// Sparse operator computing vec(X^T) from vec(X).
LinearOp transpose_permutation(Dim d);

}  // namespace proxcomp
