#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "proxcomp/expr.hpp"
#include "proxcomp/separate.hpp"

namespace proxcomp::admm {

struct SolverParams {
  double lambda = 1.0;
  int max_iters = 10000;
  double abs_tol = 1e-4;
  double rel_tol = 1e-3;
  std::uint64_t seed = 0;
  // Evaluate the separable objective every iteration (needed for traces).
  bool track_objective = false;
  // Residual balancing: rescale lambda by 2 when the residuals drift apart
  // by more than 10x. Off by default.
  bool adaptive_lambda = false;
  std::string trace_csv;  // empty: no trace file
};

// Throws UserError on non-positive lambda or tolerances.
void validate(const SolverParams& params);

struct SolverState {
  std::vector<Vector> x;  // one per block
  Vector u;               // scaled dual, one entry per constraint row
  int k = 0;
  double lambda = 1.0;
  Vector r;  // Ax - b
  Vector s;  // dual residual, stacked over blocks
  double ax_norm = 0.0;
  double b_norm = 0.0;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> objective;
};

enum class Status { Optimal, MaxIters };
std::string status_name(Status s);

struct Diagnostics {
  std::vector<double> primal_res;
  std::vector<double> dual_res;
  std::vector<double> objective;
  std::vector<std::int64_t> prox_calls;  // per block
  // max over iterations of |(u^{k+1} - u^k) - (Ax^{k+1} - b)|, scaled by 1 + |u|
  double dual_identity_error = 0.0;
  double consensus_gap = 0.0;
  double seconds = 0.0;
};

struct Result {
  Assignment solution;  // every variable; originals hold the average of their copies
  Status status = Status::MaxIters;
  int iterations = 0;
  Diagnostics diagnostics;
};

bool stopping_check(const SolverState& state, const SolverParams& params);

// Gauss-Seidel ADMM over a separable problem. Blocks are the terms in order.
class Solver {
 public:
  Solver(const SeparableProblem& p, const SolverParams& params);
  ~Solver();
  Solver(Solver&&) noexcept;

  std::size_t num_blocks() const;
  const SolverState& state() const;
  SolverState& state();

  // b - u - sum_{j<i} A_j x_j^{k+1} - sum_{j>i} A_j x_j^k, given that blocks
  // j < i have already been updated this sweep.
  Vector compute_v(std::size_t i) const;
  // One full sweep plus the dual update. Returns the dual identity error.
  double step();
  Result run();

  // Block variables and the stacked constraint matrix, for tests.
  const std::vector<Expr>& block_vars(std::size_t i) const;
  Vector apply_block(std::size_t i, const Vector& xi) const;  // A_i x_i
  const Vector& b() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Result solve(const SeparableProblem& p, const SolverParams& params = {});

// Largest |a - b| over the consensus links a - b = 0 of `p`.
double consensus_gap(const SeparableProblem& p, const Assignment& x);

// Value of the separable objective (terms, folds, offset) at `x`.
double objective_value(const SeparableProblem& p, const Assignment& x);

}  // namespace proxcomp::admm
