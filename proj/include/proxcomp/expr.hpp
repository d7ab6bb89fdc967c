#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "proxcomp/dim.hpp"
#include "proxcomp/linop.hpp"

namespace proxcomp {

enum class NodeKind { Variable, Constant, LinearMap, ProxFunction, Atom, Add };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  Dim dim;
  std::vector<Expr> children;

  // Variable
  std::int64_t var_id = -1;
  std::string name;

  // Constant (column-major, dim.rows x dim.cols). `sparse` marks data that
  // should become a sparse operator when used as a multiplier.
  Matrix value;
  bool sparse = false;

  // LinearMap: op maps the flattened child to the flattened output.
  LinearOp op;

  // Atom / ProxFunction
  std::string atom;
  std::vector<double> params;
  // ProxFunction only: the term is weight * f(args) plus the folded terms.
  double weight = 1.0;
  std::vector<Expr> folds;
};

// --- constructors -------------------------------------------------------------

Expr variable(const std::string& name, std::int64_t rows = 1, std::int64_t cols = 1);
// A fresh variable sharing the shape of `like`.
Expr variable_like(const std::string& name, const Expr& like);
Expr constant(Matrix value, bool sparse = false);
Expr constant(double value);
Expr linear_map(LinearOp op, Expr child, Dim out);
// Shape-preserving map; `op` must be square.
Expr linear_map(LinearOp op, Expr child);
Expr add_node(std::vector<Expr> children);
Expr prox_function(const std::string& atom, std::vector<Expr> args, std::vector<double> params = {},
                   double weight = 1.0, std::vector<Expr> folds = {});

// Builds an Atom node after checking arity and argument shapes. Throws
// UserError for unknown atoms or bad shapes.
Expr build_atom(const std::string& name, std::vector<Expr> args, std::vector<double> params = {});

// Modeling conveniences (all go through build_atom or add_node).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(double c, const Expr& a);
Expr mul(const Expr& a, const Expr& b);  // matrix product, one side constant
Expr sum_entries(const Expr& a);

// --- queries --------------------------------------------------------------------

bool is_constant_tree(const Expr& e);
// Variables in first-traversal order, deduplicated by id.
std::vector<Expr> variables_of(const Expr& e);
void collect_variables(const Expr& e, std::vector<Expr>& out);

// e with every variable replaced per `map` (keyed by var_id).
Expr substitute(const Expr& e, const std::map<std::int64_t, Expr>& map);

// Structural equality; variables compare by id unless `rename` maps ids of
// `a` to ids of `b`, in which case that mapping is extended and enforced.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Expr& a, const Expr& b, std::map<std::int64_t, std::int64_t>& rename);

// Affine expression in canonical form: sum_j op_j * vec(var_j) + offset.
struct AffineTerm {
  Expr var;
  LinearOp op;
};
struct AffineForm {
  std::vector<AffineTerm> terms;  // one per variable, first-traversal order
  Vector offset;
  Dim dim;
};
// Throws InternalError if `e` is not built from Add/LinearMap/Variable/Constant.
AffineForm affine_form(const Expr& e);
// Add of op*var terms plus the offset (omitted when zero).
Expr to_expr(const AffineForm& f);
bool is_affine_tree(const Expr& e);

// --- problems --------------------------------------------------------------------

enum class Cone { Zero, Nonneg, Soc, Psd };
std::string cone_name(Cone c);

struct Constraint {
  Cone cone = Cone::Zero;
  std::vector<Expr> args;  // one expression; two (x, t) for Soc
};

struct Problem {
  Expr objective;
  std::vector<Constraint> constraints;
};

// Sum of prox-function terms over affine arguments, plus a constant.
struct ProxAffineProblem {
  std::vector<Expr> terms;  // ProxFunction nodes
  double offset = 0.0;
};

// --- evaluation ----------------------------------------------------------------------

using Assignment = std::map<std::int64_t, Matrix>;  // var_id -> value

Matrix evaluate(const Expr& e, const Assignment& x);
double evaluate_scalar(const Expr& e, const Assignment& x);
// Objective plus indicator values of the constraints (0 or +inf).
double evaluate(const Problem& p, const Assignment& x);
double evaluate(const ProxAffineProblem& p, const Assignment& x);
// Largest scaled violation of the problem's constraints.
double constraint_violation(const Problem& p, const Assignment& x);

}  // namespace proxcomp
