#include "proxcomp/separate.hpp"

#include <algorithm>
#include <set>

#include "proxcomp/error.hpp"
#include "proxcomp/prox_registry.hpp"

namespace proxcomp {
namespace {

const prox::ProxFunction& function_of(const Expr& term) { return prox::lookup_prox(term->atom); }

// Scalar or diagonal and square on the variable.
bool simple(const AffineTerm& t) {
  return t.op.is_diagonal_like() && t.op.rows() == t.var->dim.size() && t.op.cols() == t.var->dim.size();
}

// Non-LS kernels and the zero cone need a diagonal quadratic term.
bool needs_diagonal(const Expr& term) {
  const auto& f = function_of(term);
  return !f.least_squares || f.name == "zero";
}

Expr with_children(const Expr& term, std::vector<Expr> children) {
  auto n = std::make_shared<ExprNode>(*term);
  n->children = std::move(children);
  return n;
}

bool contains(const std::vector<Expr>& vs, std::int64_t id) {
  return std::any_of(vs.begin(), vs.end(), [&](const Expr& v) { return v->var_id == id; });
}

bool uses(const LinearConstraint& c, std::int64_t id) {
  return std::any_of(c.terms.begin(), c.terms.end(), [&](const AffineTerm& t) { return t.var->var_id == id; });
}

class Fresh {
 public:
  explicit Fresh(const BipartiteGraph& g) {
    for (const auto& [id, v] : g.vars) names_.insert(v->name);
  }
  Expr operator()(const std::string& base, Dim d) {
    std::string name;
    do name = base + std::to_string(counter_++);
    while (names_.count(name));
    names_.insert(name);
    return variable(name, d.rows, d.cols);
  }
  Expr like(const Expr& v, int index) {
    std::string name = v->name + "_" + std::to_string(index);
    while (names_.count(name)) name += "'";
    names_.insert(name);
    return variable_like(name, v);
  }

 private:
  std::set<std::string> names_;
  int counter_ = 0;
};

LinearConstraint identity_link(const Expr& a, const Expr& b) {
  // a - b = 0
  const auto n = a->dim.size();
  return {{{a, LinearOp::identity(n)}, {b, LinearOp::scalar(-1.0, n)}}, Vector::Zero(n)};
}

}  // namespace

std::vector<Expr> block_variables(const Expr& term) {
  std::vector<Expr> out;
  for (const auto& c : term->children) collect_variables(c, out);
  return out;
}

void BipartiteGraph::refresh() {
  term_uses.clear();
  constraint_uses.clear();
  vars.clear();
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (const auto& v : block_variables(terms[i])) {
      term_uses[v->var_id].push_back(i);
      vars.emplace(v->var_id, v);
    }
  for (std::size_t i = 0; i < constraints.size(); ++i)
    for (const auto& t : constraints[i].terms) {
      auto& u = constraint_uses[t.var->var_id];
      if (u.empty() || u.back() != i) u.push_back(i);
      vars.emplace(t.var->var_id, t.var);
    }
}

void BipartiteGraph::audit() const {
  BipartiteGraph fresh;
  fresh.terms = terms;
  fresh.constraints = constraints;
  fresh.refresh();
  if (fresh.term_uses != term_uses || fresh.constraint_uses != constraint_uses)
    throw InternalError("separation graph is out of sync with its term list");
  for (const auto& c : constraints) {
    for (const auto& t : c.terms) {
      if (t.op.cols() != t.var->dim.size() || t.op.rows() != c.b.size())
        throw InternalError("constraint operator does not match " + t.var->name);
    }
  }
}

BipartiteGraph make_graph(const ProxAffineProblem& p) {
  BipartiteGraph g;
  g.terms = p.terms;
  g.offset = p.offset;
  for (const auto& t : g.terms)
    if (t->kind != NodeKind::ProxFunction) throw InternalError("prox-affine term is not a prox function");
  g.refresh();
  return g;
}

void move_equality_indicators(BipartiteGraph& g) {
  Fresh fresh(g);
  std::vector<Expr> kept;
  for (const auto& term : g.terms) {
    if (term->atom != "zero" || !term->folds.empty()) {
      kept.push_back(term);
      continue;
    }
    const Expr& arg = term->children[0];
    AffineForm f = affine_form(arg);
    AffineForm complex{{}, Vector::Zero(f.offset.size()), f.dim};
    LinearConstraint c;
    for (auto& t : f.terms) (simple(t) ? c.terms : complex.terms).push_back(t);
    if (c.terms.empty()) {
      kept.push_back(term);
      continue;
    }
    c.b = -f.offset;
    if (!complex.terms.empty()) {
      // I0(Ax + y + z) -> I0(Ax - w) with w + y + z = 0
      const Expr w = fresh("_sep", f.dim);
      complex.terms.push_back({w, LinearOp::scalar(-1.0, f.dim.size())});
      kept.push_back(prox_function("zero", {to_expr(complex)}));
      c.terms.insert(c.terms.begin(), AffineTerm{w, LinearOp::identity(f.dim.size())});
    }
    g.constraints.push_back(std::move(c));
  }

  // Separable kernels see each argument as d .* x + b over a variable of
  // their own; anything else goes through a fresh variable.
  for (auto& term : kept) {
    if (function_of(term).least_squares) continue;
    std::vector<Expr> args = term->children;
    std::vector<std::int64_t> seen;
    bool changed = false;
    for (auto& a : args) {
      AffineForm f = affine_form(a);
      const bool ok = f.terms.size() == 1 && simple(f.terms[0]) && f.terms[0].var->dim.size() == a->dim.size() &&
                      std::find(seen.begin(), seen.end(), f.terms[0].var->var_id) == seen.end();
      if (ok) {
        seen.push_back(f.terms[0].var->var_id);
        continue;
      }
      const Expr w = fresh("_sep", a->dim);
      LinearConstraint c;
      c.terms.push_back({w, LinearOp::identity(a->dim.size())});
      for (const auto& t : f.terms) c.terms.push_back({t.var, negate(t.op)});
      c.b = f.offset;
      g.constraints.push_back(std::move(c));
      seen.push_back(w->var_id);
      a = w;
      changed = true;
    }
    if (changed) term = with_children(term, std::move(args));
  }
  g.terms = std::move(kept);
  g.refresh();
  g.audit();
}

void combine_objective_terms(BipartiteGraph& g) {
  auto candidate = [](const Expr& t) {
    if (!t->folds.empty()) return false;
    if (t->atom == "affine") return true;
    if (t->atom != "sum_squares") return false;
    const AffineForm f = affine_form(t->children[0]);
    return f.terms.size() == 1 && simple(f.terms[0]) && f.terms[0].var->dim.size() == t->children[0]->dim.size();
  };
  auto accepts = [](const Expr& target, const Expr& c) {
    const auto& f = function_of(target);
    if (c->atom == "affine" || f.least_squares) return true;
    const LinearOp op = affine_form(c->children[0]).terms[0].op;
    switch (f.weights) {
      case prox::WeightSupport::PerCoordinate: return true;
      case prox::WeightSupport::PerArgument: return op.kind() == LinearOp::Kind::Scalar;
      case prox::WeightSupport::Uniform:
        return op.kind() == LinearOp::Kind::Scalar && block_variables(target).size() == 1;
    }
    return false;
  };

  std::vector<Expr> terms = g.terms;
  std::vector<bool> is_candidate(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) is_candidate[i] = candidate(terms[i]);
  std::vector<bool> removed(terms.size(), false);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!is_candidate[i]) continue;
    const auto need = block_variables(terms[i]);
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (j == i || is_candidate[j]) continue;
      const auto have = block_variables(terms[j]);
      const bool covers =
          std::all_of(need.begin(), need.end(), [&](const Expr& v) { return contains(have, v->var_id); });
      if (!covers || !accepts(terms[j], terms[i])) continue;
      auto n = std::make_shared<ExprNode>(*terms[j]);
      n->folds.push_back(terms[i]);
      terms[j] = n;
      removed[i] = true;
      break;
    }
  }
  g.terms.clear();
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (!removed[i]) g.terms.push_back(terms[i]);
  g.refresh();
  g.audit();
}

SeparableProblem add_consensus_constraints(BipartiteGraph g) {
  Fresh fresh(g);
  std::map<std::int64_t, std::size_t> copy_index;
  std::map<std::int64_t, Expr> root;
  auto record = [&](Expr original, const Expr& copy) {
    if (auto r = root.find(original->var_id); r != root.end()) original = r->second;
    root[copy->var_id] = original;
    auto it = copy_index.find(original->var_id);
    if (it == copy_index.end()) {
      copy_index[original->var_id] = g.copies.size();
      g.copies.push_back({original, {}});
      it = copy_index.find(original->var_id);
    }
    g.copies[it->second].copies.push_back(copy);
  };

  // Chain copies for variables shared by several terms.
  for (const auto& [id, users] : std::map(g.term_uses)) {
    if (users.size() < 2) continue;
    const Expr original = g.vars.at(id);
    Expr prev = original;
    for (std::size_t k = 1; k < users.size(); ++k) {
      const Expr c = fresh.like(original, static_cast<int>(k + 1));
      g.terms[users[k]] = substitute(g.terms[users[k]], {{id, c}});
      g.constraints.push_back(identity_link(c, prev));
      record(original, c);
      prev = c;
    }
  }
  g.refresh();

  // Some couplings would make a block's quadratic term unusable for its
  // kernel. Route them through a copy owned by a null term instead.
  std::vector<Expr> null_terms;
  auto redirect = [&](const Expr& v) {
    const Expr c = fresh.like(v, 0);
    for (auto& con : g.constraints)
      for (auto& t : con.terms)
        if (t.var->var_id == v->var_id) t.var = c;
    g.constraints.push_back(identity_link(v, c));
    null_terms.push_back(prox_function("null", {c}));
    record(v, c);
  };
  for (const auto& term : g.terms) {
    if (!needs_diagonal(term)) continue;
    const auto& f = function_of(term);
    const auto vs = block_variables(term);
    std::set<std::int64_t> moved;

    // A non-diagonal coupling, or two block variables in one constraint.
    for (std::size_t a = 0; a < vs.size(); ++a) {
      bool bad = false;
      for (const auto& con : g.constraints) {
        if (!uses(con, vs[a]->var_id)) continue;
        for (const auto& t : con.terms) {
          if (t.var->var_id == vs[a]->var_id && !simple(t)) bad = true;
          for (std::size_t b = 0; b < a; ++b)
            if (t.var->var_id == vs[b]->var_id && !moved.count(vs[b]->var_id)) bad = true;
        }
      }
      if (bad) {
        redirect(vs[a]);
        moved.insert(vs[a]->var_id);
      }
    }

    if (f.weights == prox::WeightSupport::PerCoordinate) continue;
    // Curvature each variable gets from the constraints (zero acts as one).
    auto curvature = [&](const Expr& v) {
      Vector q = Vector::Zero(v->dim.size());
      for (const auto& con : g.constraints)
        for (const auto& t : con.terms)
          if (t.var->var_id == v->var_id) q += t.op.diagonal_vector().cwiseAbs2();
      return Vector((q.array() == 0.0).select(1.0, q));
    };
    auto uniform = [](const Vector& q) { return (q.array() == q(0)).all(); };
    if (f.weights == prox::WeightSupport::PerArgument) {
      for (const auto& v : vs)
        if (!moved.count(v->var_id) && !uniform(curvature(v))) redirect(v);
      continue;
    }
    std::vector<double> all;
    for (const auto& v : vs) {
      const Vector q = curvature(v);
      all.insert(all.end(), q.data(), q.data() + q.size());
    }
    if (!all.empty() && std::any_of(all.begin(), all.end(), [&](double x) { return x != all[0]; }))
      for (const auto& v : vs)
        if (!moved.count(v->var_id)) redirect(v);
  }
  g.terms.insert(g.terms.end(), null_terms.begin(), null_terms.end());
  g.refresh();

  // Variables only seen by constraints get a term of their own.
  for (const auto& [id, v] : std::map(g.vars))
    if (!g.term_uses.count(id)) g.terms.push_back(prox_function("null", {v}));
  g.refresh();
  g.audit();

  SeparableProblem out{g.terms, g.constraints, g.offset, g.copies};
  check_separable(out);
  return out;
}

SeparableProblem separate(const ProxAffineProblem& p) {
  BipartiteGraph g = make_graph(p);
  move_equality_indicators(g);
  combine_objective_terms(g);
  return add_consensus_constraints(std::move(g));
}

void check_separable(const SeparableProblem& p) {
  std::map<std::int64_t, int> owners;
  for (const auto& t : p.terms)
    for (const auto& v : block_variables(t)) ++owners[v->var_id];
  for (const auto& [id, n] : owners)
    if (n != 1) throw InternalError("variable shared by " + std::to_string(n) + " terms after separation");
  for (const auto& c : p.constraints)
    for (const auto& t : c.terms)
      if (!owners.count(t.var->var_id))
        throw InternalError("constraint variable '" + t.var->name + "' has no term");
}

}  // namespace proxcomp
