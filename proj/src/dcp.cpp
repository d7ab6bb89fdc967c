#include "proxcomp/dcp.hpp"

#include "proxcomp/error.hpp"

namespace proxcomp::dcp {
namespace {

Curvature flip(Curvature c) {
  if (c == Curvature::Convex) return Curvature::Concave;
  if (c == Curvature::Concave) return Curvature::Convex;
  return c;
}

// Sign pattern of an operator's entries: +1 all >= 0, -1 all <= 0, 0 mixed.
int op_sign(const LinearOp& op) {
  using K = LinearOp::Kind;
  auto of = [](auto&& values) {
    bool pos = true, neg = true;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      pos &= values.data()[i] >= 0;
      neg &= values.data()[i] <= 0;
    }
    return pos ? 1 : neg ? -1 : 0;
  };
  switch (op.kind()) {
    case K::Scalar: return op.scalar_value() >= 0 ? 1 : -1;
    case K::Diagonal: return of(op.diagonal_values());
    case K::Dense: return of(op.dense_matrix());
    case K::Sparse: {
      const auto& m = op.sparse_matrix();
      return of(Eigen::Map<const Vector>(m.valuePtr(), m.nonZeros()));
    }
    case K::Kron: return op_sign(op.kron_left()) * op_sign(op.kron_right());
    case K::Sum: {
      int s = op_sign(op.children()[0]);
      for (const auto& c : op.children())
        if (op_sign(c) != s) return 0;
      return s;
    }
    case K::Product: {
      int s = 1;
      for (const auto& c : op.children()) s *= op_sign(c);
      return s;
    }
    case K::Abstract: return 0;
  }
  return 0;
}

Curvature combine_add(Curvature a, Curvature b) {
  using C = Curvature;
  if (a == C::Unknown || b == C::Unknown) return C::Unknown;
  if (a == C::Constant) return b;
  if (b == C::Constant) return a;
  if (a == C::Affine) return b;
  if (b == C::Affine) return a;
  return a == b ? a : C::Unknown;
}

bool arg_ok(Curvature atom, Monotonicity m, Curvature g) {
  using C = Curvature;
  if (g == C::Constant || g == C::Affine) return true;
  if (atom == C::Convex)
    return (g == C::Convex && m == Monotonicity::Nondecreasing) || (g == C::Concave && m == Monotonicity::Nonincreasing);
  if (atom == C::Concave)
    return (g == C::Concave && m == Monotonicity::Nondecreasing) || (g == C::Convex && m == Monotonicity::Nonincreasing);
  return false;
}

bool bilinear(const Expr& e) {
  return (e->atom == "mul" || e->atom == "elemmul") && !is_constant_tree(e->children[0]) &&
         !is_constant_tree(e->children[1]);
}

std::string label(const Expr& e) {
  switch (e->kind) {
    case NodeKind::Variable: return "var";
    case NodeKind::Constant: return "const";
    case NodeKind::LinearMap: return "linear_map";
    case NodeKind::Add: return "add";
    default: return e->atom;
  }
}

// Path to the first subtree (depth first) whose curvature is not `want`-compatible.
std::string blame(const Expr& e, const std::string& path) {
  for (std::size_t i = 0; i < e->children.size(); ++i) {
    const Expr& c = e->children[i];
    if (curvature_of(c) == Curvature::Unknown)
      return blame(c, path + "/" + label(e) + "[" + std::to_string(i) + "]");
  }
  return path + "/" + label(e);
}

}  // namespace

bool is_convex(Curvature c) { return c == Curvature::Constant || c == Curvature::Affine || c == Curvature::Convex; }
bool is_concave(Curvature c) { return c == Curvature::Constant || c == Curvature::Affine || c == Curvature::Concave; }

Curvature curvature_of(const Expr& e) {
  using C = Curvature;
  switch (e->kind) {
    case NodeKind::Constant: return C::Constant;
    case NodeKind::Variable: return C::Affine;
    case NodeKind::LinearMap: {
      const C c = curvature_of(e->children[0]);
      if (c == C::Constant || c == C::Affine || c == C::Unknown) return c;
      const int s = op_sign(e->op);
      return s > 0 ? c : s < 0 ? flip(c) : C::Unknown;
    }
    case NodeKind::Add: {
      C c = C::Constant;
      for (const auto& k : e->children) c = combine_add(c, curvature_of(k));
      return c;
    }
    case NodeKind::ProxFunction: {
      for (const auto& k : e->children)
        if (!is_concave(curvature_of(k)) || !is_convex(curvature_of(k))) return C::Unknown;
      return e->weight >= 0 ? C::Convex : C::Concave;
    }
    case NodeKind::Atom: {
      const AtomInfo& a = lookup_atom(e->atom);
      if (is_constant_tree(e)) return C::Constant;
      if (a.linear) {
        if (bilinear(e)) return C::Unknown;
        return curvature_of(a.linearize(e->children, e->params, e->dim));
      }
      for (std::size_t i = 0; i < e->children.size(); ++i)
        if (!arg_ok(a.curvature, monotonicity_of(a, i), curvature_of(e->children[i]))) return C::Unknown;
      return a.curvature;
    }
  }
  return C::Unknown;
}

Sign sign_of(const Expr& e) {
  switch (e->kind) {
    case NodeKind::Constant:
      if ((e->value.array() >= 0).all()) return Sign::Positive;
      if ((e->value.array() <= 0).all()) return Sign::Negative;
      return Sign::Unknown;
    case NodeKind::Variable: return Sign::Unknown;
    case NodeKind::LinearMap: {
      const Sign s = sign_of(e->children[0]);
      const int o = op_sign(e->op);
      if (s == Sign::Unknown || o == 0) return Sign::Unknown;
      return (s == Sign::Positive) == (o > 0) ? Sign::Positive : Sign::Negative;
    }
    case NodeKind::Add: {
      Sign s = sign_of(e->children[0]);
      for (const auto& k : e->children)
        if (sign_of(k) != s) return Sign::Unknown;
      return s;
    }
    case NodeKind::ProxFunction: return Sign::Unknown;
    case NodeKind::Atom: {
      const AtomInfo& a = lookup_atom(e->atom);
      if (!a.linear) return a.sign;
      if (bilinear(e)) return Sign::Unknown;
      return sign_of(a.linearize(e->children, e->params, e->dim));
    }
  }
  return Sign::Unknown;
}

Verdict verify(const Problem& p) {
  Verdict v;
  auto reject = [&v](std::string reason, std::string path) {
    v.accepted = false;
    v.reason = std::move(reason);
    v.path = std::move(path);
    return v;
  };
  if (!p.objective->dim.is_scalar()) return reject("objective is not scalar", "objective");
  const Curvature oc = curvature_of(p.objective);
  if (oc == Curvature::Concave) return reject("objective is concave", "objective");
  if (!is_convex(oc)) return reject("objective curvature cannot be certified convex", blame(p.objective, "objective"));
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    const std::string path = "constraints[" + std::to_string(i) + "]";
    switch (c.cone) {
      case Cone::Zero:
        if (curvature_of(c.args[0]) > Curvature::Affine) return reject("equality constraint is not affine", path);
        break;
      case Cone::Nonneg:
        if (!is_concave(curvature_of(c.args[0])))
          return reject("nonnegativity constraint needs a concave expression", path);
        break;
      case Cone::Soc:
        for (const auto& a : c.args)
          if (curvature_of(a) > Curvature::Affine) return reject("second-order cone arguments must be affine", path);
        if (!c.args[1]->dim.is_scalar()) return reject("second-order cone bound must be scalar", path);
        break;
      case Cone::Psd:
        if (curvature_of(c.args[0]) > Curvature::Affine) return reject("PSD constraint argument must be affine", path);
        if (c.args[0]->dim.rows != c.args[0]->dim.cols) return reject("PSD constraint needs a square matrix", path);
        break;
    }
  }
  return v;
}

}  // namespace proxcomp::dcp
