#include <cmath>
#include <limits>

#include "proxcomp/atoms.hpp"
#include "proxcomp/error.hpp"
#include "proxcomp/expr.hpp"
#include "proxcomp/linalg.hpp"
#include "proxcomp/prox_registry.hpp"

namespace proxcomp {
namespace {

Matrix reshape(const Vector& v, Dim d) { return Eigen::Map<const Matrix>(v.data(), d.rows, d.cols); }
Vector flat(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

std::vector<Matrix> eval_args(const Expr& e, const Assignment& x) {
  std::vector<Matrix> out;
  out.reserve(e->children.size());
  for (const auto& c : e->children) out.push_back(evaluate(c, x));
  return out;
}

const char* cone_prox(Cone c) {
  switch (c) {
    case Cone::Zero: return "zero";
    case Cone::Nonneg: return "nonneg";
    case Cone::Soc: return "soc";
    case Cone::Psd: return "psd";
  }
  return "";
}

// Violation and magnitude of one constraint at a point.
std::pair<double, double> violation(const Constraint& c, const Assignment& x) {
  const Matrix v = evaluate(c.args[0], x);
  const double mag = v.cwiseAbs().maxCoeff();
  switch (c.cone) {
    case Cone::Zero: return {mag, mag};
    case Cone::Nonneg: return {std::max(0.0, -v.minCoeff()), mag};
    case Cone::Soc: {
      const double t = evaluate(c.args[1], x)(0, 0);
      return {std::max(0.0, v.norm() - t), std::max(mag, std::abs(t))};
    }
    case Cone::Psd: {
      const auto eig = linalg::symmetric_eigen(v);
      const double asym = (v - v.transpose()).cwiseAbs().maxCoeff();
      return {std::max({0.0, -eig.values(0), asym}), mag};
    }
  }
  return {0.0, 0.0};
}

}  // namespace

Matrix evaluate(const Expr& e, const Assignment& x) {
  switch (e->kind) {
    case NodeKind::Variable: {
      auto it = x.find(e->var_id);
      if (it == x.end()) throw UserError("no value for variable '" + e->name + "'");
      if (it->second.rows() != e->dim.rows || it->second.cols() != e->dim.cols)
        throw DimensionError("value for variable '" + e->name + "' has shape " +
                             std::to_string(it->second.rows()) + "x" + std::to_string(it->second.cols()) +
                             ", expected " + e->dim.str());
      return it->second;
    }
    case NodeKind::Constant:
      return e->value;
    case NodeKind::LinearMap:
      return reshape(e->op.apply(flat(evaluate(e->children[0], x))), e->dim);
    case NodeKind::Add: {
      Matrix s = evaluate(e->children[0], x);
      for (std::size_t i = 1; i < e->children.size(); ++i) s += evaluate(e->children[i], x);
      return s;
    }
    case NodeKind::Atom: {
      const AtomInfo& a = lookup_atom(e->atom);
      if (a.linear) return evaluate(a.linearize(e->children, e->params, e->dim), x);
      if (!a.value) throw InternalError("atom '" + e->atom + "' has no value function");
      return Matrix::Constant(1, 1, a.value(eval_args(e, x), e->params));
    }
    case NodeKind::ProxFunction: {
      const auto& f = prox::lookup_prox(e->atom);
      double v = f.value(eval_args(e, x), e->params);
      v = v == 0.0 ? 0.0 : e->weight * v;
      for (const auto& fold : e->folds) v += evaluate(fold, x)(0, 0);
      return Matrix::Constant(1, 1, v);
    }
  }
  throw InternalError("evaluate: unknown node kind");
}

double evaluate_scalar(const Expr& e, const Assignment& x) {
  const Matrix m = evaluate(e, x);
  if (m.size() != 1) throw DimensionError("expected a scalar expression, got " + e->dim.str());
  return m(0, 0);
}

double evaluate(const Problem& p, const Assignment& x) {
  double v = evaluate_scalar(p.objective, x);
  for (const auto& c : p.constraints) {
    std::vector<Matrix> args;
    for (const auto& a : c.args) args.push_back(evaluate(a, x));
    v += prox::lookup_prox(cone_prox(c.cone)).value(args, {});
  }
  return v;
}

double evaluate(const ProxAffineProblem& p, const Assignment& x) {
  double v = p.offset;
  for (const auto& t : p.terms) v += evaluate_scalar(t, x);
  return v;
}

double constraint_violation(const Problem& p, const Assignment& x) {
  double worst = 0.0;
  for (const auto& c : p.constraints) {
    auto [viol, mag] = violation(c, x);
    worst = std::max(worst, viol / (1.0 + mag));
  }
  return worst;
}

}  // namespace proxcomp
