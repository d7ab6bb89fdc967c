#include "proxcomp/compiler.hpp"

#include <deque>

#include "proxcomp/atoms.hpp"
#include "proxcomp/dcp.hpp"
#include "proxcomp/error.hpp"
#include "proxcomp/prox_registry.hpp"

namespace proxcomp::compiler {
namespace {

Expr scaled(double a, const Expr& e) { return linear_map(LinearOp::scalar(a, e->dim.size()), e, e->dim); }
Expr minus(const Expr& a, const Expr& b) { return add_node({a, scaled(-1.0, b)}); }
Expr plus(const Expr& a, const Expr& b) { return add_node({a, b}); }

Expr sum_of(const Expr& u) { return linear_map(LinearOp::dense(Matrix::Ones(1, u->dim.size())), u, Dim{1, 1}); }

// s * ones shaped like `like`
Expr broadcast(const Expr& s, Dim like) {
  return linear_map(LinearOp::dense(Matrix::Ones(like.size(), 1)), s, like);
}

std::string describe(const Expr& e) {
  std::string name;
  switch (e->kind) {
    case NodeKind::Variable: return "var " + e->name;
    case NodeKind::Constant: return "const " + e->dim.str();
    case NodeKind::LinearMap: return "linear_map " + e->dim.str();
    case NodeKind::Add: return "add " + e->dim.str();
    default: name = e->atom;
  }
  name += "(";
  for (std::size_t i = 0; i < e->children.size(); ++i) name += (i ? ", " : "") + e->children[i]->dim.str();
  return name + ")";
}

bool square_on(const LinearOp& op, std::int64_t n) { return op.rows() == n && op.cols() == n; }

bool uniform_diagonal(const LinearOp& op) {
  if (op.kind() == LinearOp::Kind::Scalar) return true;
  if (!op.is_diagonal_like()) return false;
  const Vector d = op.diagonal_vector();
  return (d.array() == d(0)).all();
}

bool policy_ok(prox::InnerMap inner, const Expr& a) {
  switch (inner) {
    case prox::InnerMap::GeneralAffine: return true;
    case prox::InnerMap::VariableOnly: return a->kind == NodeKind::Variable;
    case prox::InnerMap::ElementwiseAffine:
    case prox::InnerMap::ScalarAffine: {
      const AffineForm f = affine_form(a);
      for (const auto& t : f.terms) {
        if (!square_on(t.op, a->dim.size())) return false;
        if (inner == prox::InnerMap::ElementwiseAffine ? !t.op.is_diagonal_like() : !uniform_diagonal(t.op))
          return false;
      }
      return true;
    }
  }
  return false;
}

bool has_conic_reduction(const std::string& atom) {
  static const char* names[] = {"norm1", "abs", "hinge", "norm_inf", "max", "norm2", "sum_squares", "square", "huber"};
  for (const char* n : names)
    if (atom == n) return true;
  return false;
}

class Converter {
 public:
  explicit Converter(const Options& o) : options_(o) {}

  CompileOutput out;

  void objective(const Expr& e, double w) {
    if (w == 0.0) return;
    switch (e->kind) {
      case NodeKind::Constant:
        out.prox_affine.offset += w * e->value.sum();
        return;
      case NodeKind::Variable:
        affine_term(e, w);
        return;
      case NodeKind::Add:
        for (const auto& c : e->children) objective(c, w);
        return;
      case NodeKind::LinearMap: {
        if (is_affine_tree(e)) return affine_term(e, w);
        if (e->op.rows() != 1 || e->op.cols() != 1)
          throw InternalError("nonscalar linear map over a nonlinear objective term");
        objective(e->children[0], w * e->op.materialize()(0, 0));
        return;
      }
      case NodeKind::Atom: {
        const AtomInfo& a = lookup_atom(e->atom);
        if (a.linear) return objective(linearize(e), w);
        convert_atom(e, w);
        return;
      }
      case NodeKind::ProxFunction:
        if (w < 0) throw InternalError("negative weight on an existing prox term");
        trace(e, "existing");
        emit(prox_function(e->atom, e->children, e->params, e->weight * w, e->folds));
        return;
    }
  }

  void queue(Cone cone, std::vector<Expr> args) {
    pending_.push_back(Constraint{cone, std::move(args)});
    ++out.introduced_indicators;
  }

  void queue_user(const Constraint& c) { pending_.push_back(c); }

  void run() {
    while (!pending_.empty()) {
      Constraint c = std::move(pending_.front());
      pending_.pop_front();
      convert_cone(c);
    }
  }

 private:
  Expr fresh(const std::string& prefix, Dim d) {
    Expr v = variable(prefix + std::to_string(counter_++), d.rows, d.cols);
    out.new_variables.push_back(v);
    return v;
  }

  void emit(Expr term) { out.prox_affine.terms.push_back(std::move(term)); }
  void trace(const Expr& e, const std::string& rule) { out.rule_trace.push_back({describe(e), rule}); }

  void affine_term(const Expr& e, double w) {
    if (is_constant_tree(e)) {
      out.prox_affine.offset += w * evaluate(e, {}).sum();
      return;
    }
    trace(e, "affine");
    emit(prox_function("affine", {e}, {}, w));
  }

  void convert_atom(const Expr& h, double w) {
    std::string name = h->atom;
    if (w < 0) {
      // -log(x) is the convex neg_log atom.
      if (name != "log") throw InternalError("negative weight on convex atom '" + name + "'");
      name = "neg_log";
      w = -w;
    }
    const AtomInfo& info = lookup_atom(name);
    if (info.curvature != Curvature::Convex)
      throw UserError("atom '" + name + "' has no prox rule or conic reduction in a minimized objective");
    if (options_.prox_rules && !info.prox.empty()) {
      trace(h, "prox:" + info.prox);
      const auto& f = prox::lookup_prox(info.prox);
      auto args = convert_arguments(f, &info, h->children);
      emit(prox_function(info.prox, std::move(args), h->params, w));
      return;
    }
    if (name == "huber") {
      trace(h, "reduce:huber");
      const Expr& a = h->children[0];
      const Expr u = fresh("_epi", a->dim);
      objective(build_atom("square", {u}), w);
      objective(build_atom("abs", {minus(a, u)}), 2.0 * h->params[0] * w);
      return;
    }
    if (has_conic_reduction(name)) {
      trace(h, "conic:" + name);
      affine_term(conic_value(h), w);
      return;
    }
    throw UserError("no prox rule or conic reduction for atom '" + name + "'");
  }

  // Affine V over fresh variables with constraints queued so that
  // h <= V, with equality attainable.
  Expr conic_value(const Expr& h) {
    const std::string& name = h->atom;
    if (name == "huber") {
      const Expr& a = h->children[0];
      const Expr u = fresh("_epi", a->dim);
      Expr r = plus(build_atom("square", {u}), scaled(2.0 * h->params[0], build_atom("abs", {minus(a, u)})));
      return replace_nonlinear(linearize(r));
    }
    if (!has_conic_reduction(name)) throw UserError("no conic reduction for atom '" + name + "'");
    const Expr& a = h->children[0];
    if (name == "norm1" || name == "abs") {
      const Expr u = fresh("_epi", a->dim);
      queue(Cone::Nonneg, {minus(u, a)});
      queue(Cone::Nonneg, {plus(u, a)});
      return sum_of(u);
    }
    if (name == "hinge") {
      const Expr u = fresh("_epi", a->dim);
      queue(Cone::Nonneg, {minus(u, a)});
      queue(Cone::Nonneg, {u});
      return sum_of(u);
    }
    const Expr s = fresh("_epi", Dim{1, 1});
    if (name == "norm_inf") {
      queue(Cone::Nonneg, {minus(broadcast(s, a->dim), a)});
      queue(Cone::Nonneg, {plus(broadcast(s, a->dim), a)});
    } else if (name == "max") {
      queue(Cone::Nonneg, {minus(broadcast(s, a->dim), a)});
    } else if (name == "norm2") {
      queue(Cone::Soc, {a, s});
    } else {
      // ||a||^2 <= s  <=>  ||(2a, s - 1)|| <= s + 1
      const auto n = a->dim.size();
      SparseMatrix top(n + 1, n);
      for (std::int64_t i = 0; i < n; ++i) top.insert(i, i) = 2.0;
      Matrix bottom = Matrix::Zero(n + 1, 1);
      bottom(n, 0) = 1.0;
      Matrix shift = Matrix::Zero(n + 1, 1);
      shift(n, 0) = -1.0;
      const Dim out{n + 1, 1};
      Expr x = add_node({linear_map(LinearOp::sparse(top), a, out), linear_map(LinearOp::dense(bottom), s, out),
                         constant(shift)});
      queue(Cone::Soc, {x, plus(s, constant(1.0))});
    }
    return s;
  }

  // Swaps each nonlinear atom in a DCP-valid concave expression for an affine
  // upper bound over fresh variables.
  Expr replace_nonlinear(const Expr& e) {
    if (is_affine_tree(e)) return e;
    if (e->kind == NodeKind::Atom) {
      const AtomInfo& a = lookup_atom(e->atom);
      if (a.linear) return replace_nonlinear(linearize(e));
      if (a.curvature != Curvature::Convex)
        throw UserError("no conic reduction for concave atom '" + e->atom + "' in a constraint");
      trace(e, "conic:" + e->atom);
      return conic_value(e);
    }
    if (e->kind == NodeKind::ProxFunction) throw InternalError("prox term inside a constraint");
    auto n = std::make_shared<ExprNode>(*e);
    for (auto& c : n->children) c = replace_nonlinear(c);
    return n;
  }

  std::vector<Expr> convert_arguments(const prox::ProxFunction& f, const AtomInfo* info, std::vector<Expr> args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      Expr& a = args[i];
      const Curvature c = dcp::curvature_of(a);
      if (c > Curvature::Affine) {
        const Monotonicity m = info ? monotonicity_of(*info, i) : Monotonicity::Nonmonotone;
        const Expr t = fresh("_epi", a->dim);
        if (c == Curvature::Convex && m == Monotonicity::Nondecreasing) queue(Cone::Nonneg, {minus(t, a)});
        else if (c == Curvature::Concave && m == Monotonicity::Nonincreasing) queue(Cone::Nonneg, {minus(a, t)});
        else throw InternalError(f.name + ": nonaffine argument in a position DCP does not allow");
        trace(a, "epigraph:monotone");
        a = t;
        continue;
      }
      if (f.name == "sum_squares") a = kron_split(a);
      if (!policy_ok(f.inner, a)) {
        const Expr y = fresh("_epi", a->dim);
        trace(a, "epigraph:" + f.name);
        queue(Cone::Zero, {minus(y, a)});
        a = y;
      }
    }
    return args;
  }

  // ||A X B - C||^2: introduce Z = X B so the term only sees the one-sided
  // map (I (x) A) and the two-sided product moves to a zero indicator.
  Expr kron_split(const Expr& a) {
    AffineForm f = affine_form(a);
    bool changed = false;
    for (auto& t : f.terms) {
      if (t.op.kind() != LinearOp::Kind::Kron) continue;
      const LinearOp &l = t.op.kron_left(), &r = t.op.kron_right();
      if (l.is_identity() || r.is_identity()) continue;
      const Expr z = fresh("_split", Dim{r.cols(), l.rows()});
      trace(a, "kron-split");
      const Expr xb = linear_map(LinearOp::kron(l, LinearOp::identity(r.cols())), t.var, z->dim);
      queue(Cone::Zero, {minus(xb, z)});
      t.var = z;
      t.op = LinearOp::kron(LinearOp::identity(l.rows()), r);
      changed = true;
    }
    return changed ? to_expr(f) : a;
  }

  void convert_cone(const Constraint& c) {
    switch (c.cone) {
      case Cone::Zero:
        if (!is_affine_tree(c.args[0])) throw InternalError("equality indicator with a nonaffine argument");
        trace(c.args[0], "indicator:zero");
        emit(prox_function("zero", {c.args[0]}));
        return;
      case Cone::Nonneg: {
        Expr a = replace_nonlinear(c.args[0]);
        trace(a, "indicator:nonneg");
        emit(prox_function("nonneg", convert_arguments(prox::lookup_prox("nonneg"), nullptr, {a})));
        return;
      }
      case Cone::Soc: {
        if (!c.args[1]->dim.is_scalar()) throw DimensionError("second-order cone bound must be scalar");
        trace(c.args[0], "indicator:soc");
        emit(prox_function("soc", convert_arguments(prox::lookup_prox("soc"), nullptr, c.args)));
        return;
      }
      case Cone::Psd:
        trace(c.args[0], "indicator:psd");
        emit(prox_function("psd", convert_arguments(prox::lookup_prox("psd"), nullptr, c.args)));
        return;
    }
  }

  Options options_;
  std::deque<Constraint> pending_;
  int counter_ = 0;
};

}  // namespace

Expr linearize(const Expr& e) {
  switch (e->kind) {
    case NodeKind::Variable:
    case NodeKind::Constant:
      return e;
    default:
      break;
  }
  std::vector<Expr> kids;
  bool changed = false;
  for (const auto& c : e->children) {
    kids.push_back(linearize(c));
    changed |= kids.back() != c;
  }
  if (e->kind == NodeKind::Atom) {
    const AtomInfo& a = lookup_atom(e->atom);
    if (a.linear) return a.linearize(kids, e->params, e->dim);
  }
  if (!changed) return e;
  auto n = std::make_shared<ExprNode>(*e);
  n->children = std::move(kids);
  return n;
}

Problem linearize_pass(const Problem& p) {
  Problem out;
  out.objective = linearize(p.objective);
  for (const auto& c : p.constraints) {
    Constraint lc{c.cone, {}};
    for (const auto& a : c.args) lc.args.push_back(linearize(a));
    out.constraints.push_back(std::move(lc));
  }
  return out;
}

Expr fold_constants(const Expr& e) {
  if (e->children.empty()) return e;
  std::vector<Expr> kids;
  bool changed = false;
  for (const auto& c : e->children) {
    kids.push_back(fold_constants(c));
    changed |= kids.back() != c;
  }
  Expr n = e;
  if (changed) {
    auto m = std::make_shared<ExprNode>(*e);
    m->children = kids;
    n = m;
  }
  if ((n->kind == NodeKind::Add || n->kind == NodeKind::Atom) && is_constant_tree(n)) return constant(evaluate(n, {}));
  return n;
}

CompileOutput convert_prox(const Expr& tree, const Options& options) {
  Converter c(options);
  c.objective(tree, 1.0);
  c.run();
  return std::move(c.out);
}

CompileOutput compile(const Problem& p, const Options& options) {
  const dcp::Verdict v = dcp::verify(p);
  if (!v.accepted) throw UserError("problem is not DCP: " + v.reason + " (at " + v.path + ")");
  const Problem lp = linearize_pass(p);
  Converter c(options);
  c.objective(fold_constants(lp.objective), 1.0);
  for (const auto& con : lp.constraints) {
    Constraint fc{con.cone, {}};
    for (const auto& a : con.args) fc.args.push_back(fold_constants(a));
    c.queue_user(fc);
  }
  c.run();
  return std::move(c.out);
}

}  // namespace proxcomp::compiler
