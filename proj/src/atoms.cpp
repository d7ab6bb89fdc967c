#include "proxcomp/atoms.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "proxcomp/error.hpp"
#include "proxcomp/prox_registry.hpp"

namespace proxcomp {
namespace {

using Args = std::vector<Expr>;
using Params = std::vector<double>;

std::string dims_of(const Args& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + args[i]->dim.str();
  return s;
}

Dim scalar_out(const Args&, const Params&) { return Dim{1, 1}; }

Dim vector_arg(const std::string& name, const Args& a) {
  if (!a[0]->dim.is_vector()) throw DimensionError(name + " expects a vector argument, got " + dims_of(a));
  return Dim{1, 1};
}

Dim same_shape_pair(const std::string& name, const Args& a) {
  if (!(a[0]->dim == a[1]->dim)) throw DimensionError(name + " arguments differ in shape: " + dims_of(a));
  return Dim{1, 1};
}

Dim square_arg(const std::string& name, const Args& a) {
  if (a[0]->dim.rows != a[0]->dim.cols) throw DimensionError(name + " expects a square matrix, got " + dims_of(a));
  return Dim{1, 1};
}

Matrix constant_value(const Expr& e);

LinearOp matrix_op(const Expr& c, const Matrix& m) {
  if (c->kind == NodeKind::Constant && c->sparse) return LinearOp::sparse(m.sparseView());
  return LinearOp::dense(m);
}

Dim mul_shape(const Args& a, const Params&) {
  const Dim l = a[0]->dim, r = a[1]->dim;
  if (l.is_scalar()) return r;
  if (r.is_scalar()) return l;
  if (l.cols != r.rows) throw DimensionError("mul: inner dimensions differ: " + dims_of(a));
  return Dim{l.rows, r.cols};
}

Expr mul_linearize(const Args& a, const Params&, Dim out) {
  const bool lc = is_constant_tree(a[0]), rc = is_constant_tree(a[1]);
  if (!lc && !rc) throw InternalError("mul: neither operand is constant");
  if (lc) {
    const Matrix m = constant_value(a[0]);
    const Expr& x = a[1];
    if (m.size() == 1 && !(x->dim.is_scalar() && rc)) return linear_map(LinearOp::scalar(m(0, 0), x->dim.size()), x, out);
    if (x->dim.is_scalar() && !rc) {
      // constant matrix times scalar variable: vec(M) * x
      Matrix col = Eigen::Map<const Vector>(m.data(), m.size());
      return linear_map(LinearOp::dense(col), x, out);
    }
    const LinearOp base = matrix_op(a[0], m);
    if (x->dim.cols == 1) return linear_map(base, x, out);
    return linear_map(LinearOp::kron(LinearOp::identity(x->dim.cols), base), x, out);
  }
  const Matrix m = constant_value(a[1]);
  const Expr& x = a[0];
  if (m.size() == 1) return linear_map(LinearOp::scalar(m(0, 0), x->dim.size()), x, out);
  if (x->dim.is_scalar()) {
    Matrix col = Eigen::Map<const Vector>(m.data(), m.size());
    return linear_map(LinearOp::dense(col), x, out);
  }
  // vec(X B) = (B^T (x) I_m) vec(X)
  const LinearOp bt = matrix_op(a[1], Matrix(m.transpose()));
  return linear_map(LinearOp::kron(bt, LinearOp::identity(x->dim.rows)), x, out);
}

std::int64_t as_index(double v, const std::string& what) {
  if (v < 0 || v != std::floor(v)) throw UserError(what + " must be a nonnegative integer");
  return static_cast<std::int64_t>(v);
}

Expr stack(const Args& a, Dim out, bool horizontal) {
  std::vector<Expr> parts;
  std::int64_t off = 0;
  for (const auto& c : a) {
    const LinearOp e = horizontal ? embedding(c->dim, out, 0, off) : embedding(c->dim, out, off, 0);
    parts.push_back(linear_map(e, c, out));
    off += horizontal ? c->dim.cols : c->dim.rows;
  }
  return add_node(std::move(parts));
}

std::function<double(const std::vector<Matrix>&, const Params&)> registry_value(const std::string& prox) {
  const auto* f = prox::find_prox(prox);
  if (!f) throw InternalError("atom refers to unknown prox '" + prox + "'");
  return f->value;
}

std::map<std::string, AtomInfo> build_atoms() {
  std::map<std::string, AtomInfo> r;
  using C = Curvature;
  using M = Monotonicity;
  using S = Sign;

  auto function = [&r](std::string name, int args, int params, C curv, std::vector<M> mono, S sign,
                       std::string prox, decltype(AtomInfo::shape) shape = nullptr) {
    AtomInfo a;
    a.name = name;
    a.min_args = a.max_args = args;
    a.num_params = params;
    a.curvature = curv;
    a.monotonicity = std::move(mono);
    a.sign = sign;
    a.prox = prox;
    a.shape = shape ? std::move(shape) : scalar_out;
    if (!prox.empty()) a.value = registry_value(prox);
    r.emplace(name, std::move(a));
  };
  const auto nm = M::Nonmonotone;

  function("norm1", 1, 0, C::Convex, {nm}, S::Positive, "norm1");
  function("abs", 1, 0, C::Convex, {nm}, S::Positive, "abs");
  function("sum_squares", 1, 0, C::Convex, {nm}, S::Positive, "sum_squares");
  function("square", 1, 0, C::Convex, {nm}, S::Positive, "square");
  function("norm2", 1, 0, C::Convex, {nm}, S::Positive, "norm2");
  function("norm_inf", 1, 0, C::Convex, {nm}, S::Positive, "norm_inf");
  function("hinge", 1, 0, C::Convex, {M::Nondecreasing}, S::Positive, "hinge");
  function("deadzone", 1, 1, C::Convex, {nm}, S::Positive, "deadzone");
  function("quantile", 1, 1, C::Convex, {nm}, S::Positive, "quantile");
  function("logistic", 1, 0, C::Convex, {M::Nondecreasing}, S::Positive, "logistic");
  function("inv_pos", 1, 0, C::Convex, {M::Nonincreasing}, S::Positive, "inv_pos");
  function("neg_log", 1, 0, C::Convex, {M::Nonincreasing}, S::Unknown, "neg_log");
  function("exp", 1, 0, C::Convex, {M::Nondecreasing}, S::Positive, "exp");
  function("neg_entropy", 1, 0, C::Convex, {nm}, S::Unknown, "neg_entropy");
  function("kl_div", 2, 0, C::Convex, {nm, nm}, S::Unknown, "kl_div",
           [](const Args& a, const Params&) { return same_shape_pair("kl_div", a); });
  function("quad_over_lin", 2, 0, C::Convex, {nm, M::Nonincreasing}, S::Positive, "quad_over_lin",
           [](const Args& a, const Params&) { return same_shape_pair("quad_over_lin", a); });
  function("log_sum_exp", 1, 0, C::Convex, {M::Nondecreasing}, S::Unknown, "log_sum_exp");
  function("tv_1d", 1, 0, C::Convex, {nm}, S::Positive, "tv_1d",
           [](const Args& a, const Params&) { return vector_arg("tv_1d", a); });
  function("tv", 1, 0, C::Convex, {nm}, S::Positive, "tv_1d",
           [](const Args& a, const Params&) { return vector_arg("tv", a); });
  function("neg_log_det", 1, 0, C::Convex, {nm}, S::Unknown, "neg_log_det",
           [](const Args& a, const Params&) { return square_arg("neg_log_det", a); });
  function("nuclear_norm", 1, 0, C::Convex, {nm}, S::Positive, "nuclear_norm");
  function("spectral_norm", 1, 0, C::Convex, {nm}, S::Positive, "spectral_norm");

  // Atoms without a direct prox kernel; they compile through reductions.
  function("huber", 1, 1, C::Convex, {nm}, S::Positive, "");
  r["huber"].value = [](const std::vector<Matrix>& a, const Params& p) {
    const double m = p[0];
    double s = 0.0;
    for (Eigen::Index i = 0; i < a[0].size(); ++i) {
      const double x = std::abs(a[0].data()[i]);
      s += x <= m ? x * x : 2.0 * m * x - m * m;
    }
    return s;
  };
  function("max", 1, 0, C::Convex, {M::Nondecreasing}, S::Unknown, "");
  r["max"].value = [](const std::vector<Matrix>& a, const Params&) { return a[0].maxCoeff(); };
  function("log", 1, 0, C::Concave, {M::Nondecreasing}, S::Unknown, "");
  r["log"].value = [](const std::vector<Matrix>& a, const Params&) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a[0].size(); ++i) {
      const double x = a[0].data()[i];
      if (x <= 0) return -std::numeric_limits<double>::infinity();
      s += std::log(x);
    }
    return s;
  };

  auto linear = [&r](std::string name, int min_args, int max_args, int params, decltype(AtomInfo::shape) shape,
                     decltype(AtomInfo::linearize) lin) {
    AtomInfo a;
    a.name = name;
    a.min_args = min_args;
    a.max_args = max_args;
    a.num_params = params;
    a.linear = true;
    a.curvature = Curvature::Affine;
    a.shape = std::move(shape);
    a.linearize = std::move(lin);
    r.emplace(name, std::move(a));
  };
  auto same = [](const Args& a, const Params&) { return a[0]->dim; };

  linear("neg", 1, 1, 0, same, [](const Args& a, const Params&, Dim out) {
    return linear_map(LinearOp::scalar(-1.0, out.size()), a[0], out);
  });
  linear("scale", 1, 1, 1, same, [](const Args& a, const Params& p, Dim out) {
    return linear_map(LinearOp::scalar(p[0], out.size()), a[0], out);
  });
  linear("mul", 2, 2, 0, mul_shape, mul_linearize);
  linear("elemmul", 2, 2, 0,
         [](const Args& a, const Params&) {
           if (!(a[0]->dim == a[1]->dim) && !a[0]->dim.is_scalar())
             throw DimensionError("elemmul operands differ in shape: " + dims_of(a));
           return a[1]->dim;
         },
         [](const Args& a, const Params&, Dim out) {
           if (!is_constant_tree(a[0])) throw InternalError("elemmul: first operand must be constant");
           const Matrix c = constant_value(a[0]);
           if (c.size() == 1) return linear_map(LinearOp::scalar(c(0, 0), out.size()), a[1], out);
           return linear_map(LinearOp::diagonal(Eigen::Map<const Vector>(c.data(), c.size())), a[1], out);
         });
  linear("sum", 1, 1, 0, scalar_out, [](const Args& a, const Params&, Dim out) {
    return linear_map(LinearOp::dense(Matrix::Ones(1, a[0]->dim.size())), a[0], out);
  });
  linear("index", 1, 1, 2,
         [](const Args& a, const Params& p) {
           const auto start = as_index(p[0], "index start"), len = as_index(p[1], "index length");
           if (len == 0 || start + len > a[0]->dim.size())
             throw DimensionError("index range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                                  ") outside argument of shape " + a[0]->dim.str());
           return Dim{len, 1};
         },
         [](const Args& a, const Params& p, Dim out) {
           const auto start = static_cast<std::int64_t>(p[0]);
           SparseMatrix s(out.rows, a[0]->dim.size());
           std::vector<Eigen::Triplet<double>> t;
           for (std::int64_t i = 0; i < out.rows; ++i) t.emplace_back(i, start + i, 1.0);
           s.setFromTriplets(t.begin(), t.end());
           return linear_map(LinearOp::sparse(std::move(s)), a[0], out);
         });
  linear("hstack", 1, -1, 0,
         [](const Args& a, const Params&) {
           std::int64_t cols = 0;
           for (const auto& c : a) {
             if (c->dim.rows != a[0]->dim.rows) throw DimensionError("hstack row counts differ: " + dims_of(a));
             cols += c->dim.cols;
           }
           return Dim{a[0]->dim.rows, cols};
         },
         [](const Args& a, const Params&, Dim out) { return stack(a, out, true); });
  linear("vstack", 1, -1, 0,
         [](const Args& a, const Params&) {
           std::int64_t rows = 0;
           for (const auto& c : a) {
             if (c->dim.cols != a[0]->dim.cols) throw DimensionError("vstack column counts differ: " + dims_of(a));
             rows += c->dim.rows;
           }
           return Dim{rows, a[0]->dim.cols};
         },
         [](const Args& a, const Params&, Dim out) { return stack(a, out, false); });
  linear("reshape", 1, 1, 2,
         [](const Args& a, const Params& p) {
           const Dim d{as_index(p[0], "reshape rows"), as_index(p[1], "reshape cols")};
           if (d.size() != a[0]->dim.size())
             throw DimensionError("cannot reshape " + a[0]->dim.str() + " to " + d.str());
           return d;
         },
         [](const Args& a, const Params&, Dim out) {
           return linear_map(LinearOp::identity(out.size()), a[0], out);
         });
  linear("transpose", 1, 1, 0, [](const Args& a, const Params&) { return Dim{a[0]->dim.cols, a[0]->dim.rows}; },
         [](const Args& a, const Params&, Dim out) {
           return linear_map(transpose_permutation(a[0]->dim), a[0], out);
         });
  linear("trace", 1, 1, 0,
         [](const Args& a, const Params&) {
           square_arg("trace", a);
           return Dim{1, 1};
         },
         [](const Args& a, const Params&, Dim out) {
           const auto n = a[0]->dim.rows;
           SparseMatrix s(1, n * n);
           std::vector<Eigen::Triplet<double>> t;
           for (std::int64_t i = 0; i < n; ++i) t.emplace_back(0, i * n + i, 1.0);
           s.setFromTriplets(t.begin(), t.end());
           return linear_map(LinearOp::sparse(std::move(s)), a[0], out);
         });
  return r;
}

const std::map<std::string, AtomInfo>& atoms() {
  static const std::map<std::string, AtomInfo> r = build_atoms();
  return r;
}

Matrix constant_value(const Expr& e) { return evaluate(e, Assignment{}); }

}  // namespace

std::string curvature_name(Curvature c) {
  switch (c) {
    case Curvature::Constant: return "constant";
    case Curvature::Affine: return "affine";
    case Curvature::Convex: return "convex";
    case Curvature::Concave: return "concave";
    case Curvature::Unknown: return "unknown";
  }
  return "?";
}

std::string sign_name(Sign s) {
  switch (s) {
    case Sign::Positive: return "positive";
    case Sign::Negative: return "negative";
    case Sign::Unknown: return "unknown";
  }
  return "?";
}

const AtomInfo* find_atom(const std::string& name) {
  auto it = atoms().find(name);
  return it == atoms().end() ? nullptr : &it->second;
}

const AtomInfo& lookup_atom(const std::string& name) {
  if (auto* a = find_atom(name)) return *a;
  throw UserError("unknown atom '" + name + "'");
}

std::vector<std::string> atom_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : atoms()) out.push_back(k);
  return out;
}

Monotonicity monotonicity_of(const AtomInfo& a, std::size_t arg) {
  if (a.monotonicity.empty()) return Monotonicity::Nonmonotone;
  return a.monotonicity[std::min(arg, a.monotonicity.size() - 1)];
}

LinearOp embedding(Dim block, Dim out, std::int64_t row_off, std::int64_t col_off) {
  SparseMatrix s(out.size(), block.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(block.size());
  for (std::int64_t j = 0; j < block.cols; ++j)
    for (std::int64_t i = 0; i < block.rows; ++i)
      t.emplace_back((col_off + j) * out.rows + row_off + i, j * block.rows + i, 1.0);
  s.setFromTriplets(t.begin(), t.end());
  return LinearOp::sparse(std::move(s));
}

LinearOp transpose_permutation(Dim d) {
  SparseMatrix s(d.size(), d.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(d.size());
  // X(i, j) sits at j*rows + i; X^T(j, i) sits at i*cols + j.
  for (std::int64_t j = 0; j < d.cols; ++j)
    for (std::int64_t i = 0; i < d.rows; ++i) t.emplace_back(i * d.cols + j, j * d.rows + i, 1.0);
  s.setFromTriplets(t.begin(), t.end());
  return LinearOp::sparse(std::move(s));
}

Expr build_atom(const std::string& name, std::vector<Expr> args, std::vector<double> params) {
  const AtomInfo& a = lookup_atom(name);
  const int n = static_cast<int>(args.size());
  if (n < a.min_args || (a.max_args >= 0 && n > a.max_args)) {
    const std::string want = a.max_args < 0 ? "at least " + std::to_string(a.min_args)
                                            : std::to_string(a.min_args);
    throw DimensionError(name + ": arity mismatch, expected " + want + " arguments, got " + std::to_string(n));
  }
  if (static_cast<int>(params.size()) != a.num_params)
    throw UserError(name + ": expected " + std::to_string(a.num_params) + " parameters, got " +
                    std::to_string(params.size()));
  for (const auto& e : args)
    if (!e) throw UserError(name + ": null argument");
  const Dim out = a.shape(args, params);
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Atom;
  node->dim = out;
  node->atom = name;
  node->children = std::move(args);
  node->params = std::move(params);
  return node;
}

}  // namespace proxcomp
