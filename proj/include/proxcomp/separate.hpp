#pragma once

#include <string>
#include <vector>

#include "proxcomp/expr.hpp"

namespace proxcomp {

// sum_j op_j vec(var_j) = b
struct LinearConstraint {
  std::vector<AffineTerm> terms;
  Vector b;
};

struct VariableCopies {
  Expr original;
  std::vector<Expr> copies;
};

// Terms own disjoint variable blocks; all coupling is in `constraints`.
struct SeparableProblem {
  std::vector<Expr> terms;  // ProxFunction nodes
  std::vector<LinearConstraint> constraints;
  double offset = 0.0;
  std::vector<VariableCopies> copies;
};

// Variables of a term in block order.
std::vector<Expr> block_variables(const Expr& term);

// Working state of the separation passes: the term list plus the
// function/variable incidence graph derived from it.
struct BipartiteGraph {
  std::vector<Expr> terms;
  std::vector<LinearConstraint> constraints;
  double offset = 0.0;
  std::vector<VariableCopies> copies;

  // Edge lists derived from terms and constraints, rebuilt by refresh().
  std::map<std::int64_t, std::vector<std::size_t>> term_uses;        // var -> terms
  std::map<std::int64_t, std::vector<std::size_t>> constraint_uses;  // var -> constraints
  std::map<std::int64_t, Expr> vars;

  void refresh();
  // Throws InternalError if the edge lists disagree with the terms.
  void audit() const;
};

BipartiteGraph make_graph(const ProxAffineProblem& p);

void move_equality_indicators(BipartiteGraph& g);
void combine_objective_terms(BipartiteGraph& g);
SeparableProblem add_consensus_constraints(BipartiteGraph g);

// All three passes in order.
SeparableProblem separate(const ProxAffineProblem& p);

// Throws InternalError unless each variable appears in exactly one term.
void check_separable(const SeparableProblem& p);

}  // namespace proxcomp
