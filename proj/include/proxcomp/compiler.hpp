#pragma once

#include <string>
#include <vector>

#include "proxcomp/expr.hpp"

namespace proxcomp::compiler {

struct Options {
  // When false, atoms with a conic reduction are compiled through it even if
  // a direct prox kernel exists.
  bool prox_rules = true;
};

struct RuleDecision {
  std::string subtree;
  std::string rule;
};

struct CompileOutput {
  ProxAffineProblem prox_affine;
  std::vector<Expr> new_variables;
  int introduced_indicators = 0;
  std::vector<RuleDecision> rule_trace;
};

// Replaces linear atoms by LinearMap/Add nodes.
Expr linearize(const Expr& e);
Problem linearize_pass(const Problem& p);

// Evaluates constant Add and Atom subtrees. Constants under a LinearMap are
// left in place so maps stay visible in the output.
Expr fold_constants(const Expr& e);

// Verifies, linearizes, folds constants and converts to prox-affine form.
// Throws UserError if the problem is not DCP or uses an atom with neither a
// prox rule nor a reduction.
CompileOutput compile(const Problem& p, const Options& options = {});

// Converts an already linearized objective tree. Exposed for tests of the
// conversion itself (e.g. idempotence on compiled output).
CompileOutput convert_prox(const Expr& tree, const Options& options = {});

}  // namespace proxcomp::compiler
