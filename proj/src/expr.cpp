#include "proxcomp/expr.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>

#include "proxcomp/error.hpp"
#include "proxcomp/prox_registry.hpp"

namespace proxcomp {
namespace {

std::atomic<std::int64_t> next_var_id{0};

std::shared_ptr<ExprNode> make(NodeKind k, Dim d) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->dim = d;
  return n;
}

}  // namespace

Expr variable(const std::string& name, std::int64_t rows, std::int64_t cols) {
  if (rows < 1 || cols < 1) throw DimensionError("variable '" + name + "' needs positive dimensions");
  auto n = make(NodeKind::Variable, Dim{rows, cols});
  n->var_id = next_var_id.fetch_add(1);
  n->name = name;
  return n;
}

Expr variable_like(const std::string& name, const Expr& like) {
  return variable(name, like->dim.rows, like->dim.cols);
}

Expr constant(Matrix value, bool sparse) {
  if (value.size() == 0) throw DimensionError("empty constant");
  auto n = make(NodeKind::Constant, Dim{value.rows(), value.cols()});
  n->value = std::move(value);
  n->sparse = sparse;
  return n;
}

Expr constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

Expr linear_map(LinearOp op, Expr child, Dim out) {
  if (op.cols() != child->dim.size())
    throw DimensionError("linear map expects input of size " + std::to_string(op.cols()) + ", child is " +
                         child->dim.str());
  if (op.rows() != out.size())
    throw DimensionError("linear map output size " + std::to_string(op.rows()) + " does not match " + out.str());
  auto n = make(NodeKind::LinearMap, out);
  n->op = std::move(op);
  n->children = {std::move(child)};
  return n;
}

Expr linear_map(LinearOp op, Expr child) {
  const Dim d = child->dim;
  return linear_map(std::move(op), std::move(child), d);
}

Expr add_node(std::vector<Expr> children) {
  if (children.empty()) throw InternalError("add with no operands");
  if (children.size() == 1) return children[0];
  const Dim d = children[0]->dim;
  for (const auto& c : children)
    if (!(c->dim == d)) throw DimensionError("add operands differ in shape: " + d.str() + " vs " + c->dim.str());
  auto n = make(NodeKind::Add, d);
  n->children = std::move(children);
  return n;
}

Expr prox_function(const std::string& atom, std::vector<Expr> args, std::vector<double> params, double weight,
                   std::vector<Expr> folds) {
  const auto& f = prox::lookup_prox(atom);
  if (static_cast<int>(args.size()) != f.arity)
    throw InternalError(atom + ": expected " + std::to_string(f.arity) + " arguments, got " +
                        std::to_string(args.size()));
  if (static_cast<int>(params.size()) != f.num_params)
    throw InternalError(atom + ": expected " + std::to_string(f.num_params) + " parameters");
  auto n = make(NodeKind::ProxFunction, Dim{1, 1});
  n->atom = atom;
  n->children = std::move(args);
  n->params = std::move(params);
  n->weight = weight;
  n->folds = std::move(folds);
  return n;
}

Expr operator+(const Expr& a, const Expr& b) {
  std::vector<Expr> kids;
  for (const auto& e : {a, b}) {
    if (e->kind == NodeKind::Add) kids.insert(kids.end(), e->children.begin(), e->children.end());
    else kids.push_back(e);
  }
  return add_node(std::move(kids));
}

Expr operator-(const Expr& a) { return build_atom("neg", {a}); }
Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
Expr operator*(double c, const Expr& a) { return build_atom("scale", {a}, {c}); }
Expr mul(const Expr& a, const Expr& b) { return build_atom("mul", {a, b}); }
Expr sum_entries(const Expr& a) { return build_atom("sum", {a}); }

bool is_constant_tree(const Expr& e) {
  if (e->kind == NodeKind::Variable) return false;
  for (const auto& c : e->children)
    if (!is_constant_tree(c)) return false;
  for (const auto& f : e->folds)
    if (!is_constant_tree(f)) return false;
  return true;
}

void collect_variables(const Expr& e, std::vector<Expr>& out) {
  if (e->kind == NodeKind::Variable) {
    for (const auto& v : out)
      if (v->var_id == e->var_id) return;
    out.push_back(e);
    return;
  }
  for (const auto& c : e->children) collect_variables(c, out);
  for (const auto& f : e->folds) collect_variables(f, out);
}

std::vector<Expr> variables_of(const Expr& e) {
  std::vector<Expr> out;
  collect_variables(e, out);
  return out;
}

Expr substitute(const Expr& e, const std::map<std::int64_t, Expr>& map) {
  if (e->kind == NodeKind::Variable) {
    auto it = map.find(e->var_id);
    if (it == map.end()) return e;
    if (!(it->second->dim == e->dim)) throw DimensionError("substitution changes the shape of " + e->name);
    return it->second;
  }
  if (e->children.empty() && e->folds.empty()) return e;
  auto n = std::make_shared<ExprNode>(*e);
  bool changed = false;
  for (auto& c : n->children) {
    auto s = substitute(c, map);
    changed |= s != c;
    c = std::move(s);
  }
  for (auto& f : n->folds) {
    auto s = substitute(f, map);
    changed |= s != f;
    f = std::move(s);
  }
  return changed ? Expr(n) : e;
}

bool structurally_equal(const Expr& a, const Expr& b, std::map<std::int64_t, std::int64_t>& rename) {
  if (a->kind != b->kind || !(a->dim == b->dim)) return false;
  switch (a->kind) {
    case NodeKind::Variable: {
      auto [it, inserted] = rename.emplace(a->var_id, b->var_id);
      return inserted ? true : it->second == b->var_id;
    }
    case NodeKind::Constant:
      if (a->value != b->value) return false;
      break;
    case NodeKind::LinearMap:
      if (!structurally_equal(a->op, b->op)) return false;
      break;
    case NodeKind::ProxFunction:
      if (a->weight != b->weight || a->folds.size() != b->folds.size()) return false;
      for (std::size_t i = 0; i < a->folds.size(); ++i)
        if (!structurally_equal(a->folds[i], b->folds[i], rename)) return false;
      [[fallthrough]];
    case NodeKind::Atom:
      if (a->atom != b->atom || a->params != b->params) return false;
      break;
    case NodeKind::Add:
      break;
  }
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!structurally_equal(a->children[i], b->children[i], rename)) return false;
  return true;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  std::map<std::int64_t, std::int64_t> identity_only;
  // Without a prior mapping, variables must match by id.
  std::vector<Expr> va = variables_of(a);
  for (const auto& v : va) identity_only.emplace(v->var_id, v->var_id);
  return structurally_equal(a, b, identity_only);
}

bool is_affine_tree(const Expr& e) {
  switch (e->kind) {
    case NodeKind::Variable:
    case NodeKind::Constant:
      return true;
    case NodeKind::LinearMap:
    case NodeKind::Add:
      for (const auto& c : e->children)
        if (!is_affine_tree(c)) return false;
      return true;
    default:
      return false;
  }
}

AffineForm affine_form(const Expr& e) {
  AffineForm out;
  out.dim = e->dim;
  switch (e->kind) {
    case NodeKind::Variable:
      out.terms.push_back({e, LinearOp::identity(e->dim.size())});
      out.offset = Vector::Zero(e->dim.size());
      return out;
    case NodeKind::Constant:
      out.offset = Eigen::Map<const Vector>(e->value.data(), e->value.size());
      return out;
    case NodeKind::LinearMap: {
      AffineForm inner = affine_form(e->children[0]);
      for (auto& t : inner.terms) out.terms.push_back({t.var, compose(e->op, t.op)});
      out.offset = e->op.apply(inner.offset);
      return out;
    }
    case NodeKind::Add: {
      out.offset = Vector::Zero(e->dim.size());
      for (const auto& c : e->children) {
        AffineForm f = affine_form(c);
        out.offset += f.offset;
        for (auto& t : f.terms) {
          auto it = std::find_if(out.terms.begin(), out.terms.end(),
                                 [&](const AffineTerm& u) { return u.var->var_id == t.var->var_id; });
          if (it == out.terms.end()) out.terms.push_back(std::move(t));
          else it->op = add(it->op, t.op);
        }
      }
      return out;
    }
    default:
      throw InternalError("affine_form: expression contains a nonlinear node");
  }
}

Expr to_expr(const AffineForm& f) {
  std::vector<Expr> parts;
  for (const auto& t : f.terms) {
    if (t.op.is_identity() && t.var->dim == f.dim) parts.push_back(t.var);
    else parts.push_back(linear_map(t.op, t.var, f.dim));
  }
  if (f.offset.size() && f.offset.cwiseAbs().maxCoeff() > 0)
    parts.push_back(constant(Eigen::Map<const Matrix>(f.offset.data(), f.dim.rows, f.dim.cols)));
  if (parts.empty()) return constant(Matrix::Zero(f.dim.rows, f.dim.cols));
  return add_node(std::move(parts));
}

std::string cone_name(Cone c) {
  switch (c) {
    case Cone::Zero: return "zero";
    case Cone::Nonneg: return "nonneg";
    case Cone::Soc: return "soc";
    case Cone::Psd: return "psd";
  }
  return "?";
}

}  // namespace proxcomp
