#include "proxcomp/admm.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>

#include "proxcomp/error.hpp"
#include "proxcomp/prox_registry.hpp"

namespace proxcomp::admm {
namespace {

// Rows of one constraint touched by one variable of a block.
struct Piece {
  std::int64_t row = 0;
  std::int64_t var_start = 0;
  LinearOp op;
  LinearOp op_t;
};

struct Fold {
  bool quadratic = false;  // sum_squares, else affine
  double weight = 1.0;
  std::vector<std::pair<std::int64_t, LinearOp>> parts;  // (block start, op)
  Vector offset;
};

struct Block {
  Expr term;
  std::vector<Expr> vars;
  std::vector<std::int64_t> starts;
  std::int64_t size = 0;
  std::vector<Piece> pieces;
  std::vector<Fold> folds;
  std::vector<prox::ArgumentMap> args;
  LinearOp base_quad;  // A_i^T A_i
  std::optional<prox::PreparedProx> prox;
  Vector shift;  // fold contribution to r
};

std::int64_t find_start(const Block& b, std::int64_t var_id) {
  for (std::size_t j = 0; j < b.vars.size(); ++j)
    if (b.vars[j]->var_id == var_id) return b.starts[j];
  throw InternalError("variable is not part of its block");
}

bool simple(const LinearOp& op, std::int64_t n) { return op.is_diagonal_like() && op.rows() == n && op.cols() == n; }

LinearOp diagonal_op(const Vector& q) {
  if (q.size() && (q.array() == q(0)).all()) return LinearOp::scalar(q(0), q.size());
  return LinearOp::diagonal(q);
}

}  // namespace

void validate(const SolverParams& p) {
  if (!(p.lambda > 0)) throw UserError("lambda must be positive");
  if (!(p.abs_tol > 0) || !(p.rel_tol > 0)) throw UserError("tolerances must be positive");
  if (p.max_iters < 1) throw UserError("max-iters must be at least 1");
}

std::string status_name(Status s) { return s == Status::Optimal ? "optimal-to-tolerance" : "max-iters"; }

bool stopping_check(const SolverState& st, const SolverParams& p) {
  if (st.k < 1) return false;
  const double eps_pri = std::sqrt(static_cast<double>(st.rows)) * p.abs_tol + p.rel_tol * std::max(st.ax_norm, st.b_norm);
  const double eps_dual =
      std::sqrt(static_cast<double>(st.cols)) * p.abs_tol + p.rel_tol * st.u.norm() / st.lambda;
  return st.r.norm() <= eps_pri && st.s.norm() <= eps_dual;
}

double consensus_gap(const SeparableProblem& p, const Assignment& x) {
  double gap = 0.0;
  for (const auto& c : p.constraints) {
    // consensus links: a - b = 0
    if (c.terms.size() != 2 || c.b.cwiseAbs().maxCoeff() != 0) continue;
    if (!c.terms[0].op.is_identity() || c.terms[1].op.kind() != LinearOp::Kind::Scalar ||
        c.terms[1].op.scalar_value() != -1.0)
      continue;
    const Matrix d = x.at(c.terms[0].var->var_id) - x.at(c.terms[1].var->var_id);
    gap = std::max(gap, d.cwiseAbs().maxCoeff());
  }
  return gap;
}

double objective_value(const SeparableProblem& p, const Assignment& x) {
  return evaluate(ProxAffineProblem{p.terms, p.offset}, x);
}

struct Solver::Impl {
  SeparableProblem problem;
  SolverParams params;
  std::vector<Block> blocks;
  Vector b;
  std::vector<std::int64_t> row_start;
  SolverState st;
  std::vector<Vector> ax;  // A_j x_j per block
  std::vector<std::int64_t> calls;

  void build();
  void prepare();
  Vector apply(std::size_t i, const Vector& xi) const {
    Vector out = Vector::Zero(b.size());
    for (const auto& pc : blocks[i].pieces)
      out.segment(pc.row, pc.op.rows()) += pc.op.apply(xi.segment(pc.var_start, pc.op.cols()));
    return out;
  }
  Vector apply_t(std::size_t i, const Vector& y) const {
    Vector out = Vector::Zero(blocks[i].size);
    for (const auto& pc : blocks[i].pieces)
      out.segment(pc.var_start, pc.op.cols()) += pc.op_t.apply(y.segment(pc.row, pc.op.rows()));
    return out;
  }
  Vector compute_v(std::size_t i) const {
    Vector v = b - st.u;
    for (std::size_t j = 0; j < blocks.size(); ++j)
      if (j != i) v -= ax[j];
    return v;
  }
  Assignment assignment() const {
    Assignment a;
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (std::size_t j = 0; j < blocks[i].vars.size(); ++j) {
        const Expr& v = blocks[i].vars[j];
        const Vector seg = st.x[i].segment(blocks[i].starts[j], v->dim.size());
        a[v->var_id] = Eigen::Map<const Matrix>(seg.data(), v->dim.rows, v->dim.cols);
      }
    return a;
  }
};

void Solver::Impl::build() {
  std::map<std::int64_t, std::size_t> owner;
  for (const auto& t : problem.terms) {
    Block blk;
    blk.term = t;
    blk.vars = block_variables(t);
    for (const auto& v : blk.vars) {
      blk.starts.push_back(blk.size);
      blk.size += v->dim.size();
      owner[v->var_id] = blocks.size();
    }
    blocks.push_back(std::move(blk));
  }

  std::int64_t rows = 0;
  for (const auto& c : problem.constraints) {
    row_start.push_back(rows);
    rows += c.b.size();
  }
  b = Vector::Zero(rows);
  for (std::size_t ci = 0; ci < problem.constraints.size(); ++ci) {
    const auto& c = problem.constraints[ci];
    b.segment(row_start[ci], c.b.size()) = c.b;
    for (const auto& t : c.terms) {
      auto it = owner.find(t.var->var_id);
      if (it == owner.end()) throw InternalError("constraint variable '" + t.var->name + "' has no block");
      Block& blk = blocks[it->second];
      blk.pieces.push_back({row_start[ci], find_start(blk, t.var->var_id), t.op, t.op.transpose()});
    }
  }

  for (auto& blk : blocks) {
    const auto& f = prox::lookup_prox(blk.term->atom);
    if (!(blk.term->weight > 0)) throw InternalError(f.name + ": term weight must be positive");

    // Quadratic term A_i^T A_i.
    bool diagonal = true;
    std::map<std::int64_t, int> per_row;
    for (const auto& pc : blk.pieces) {
      diagonal &= simple(pc.op, pc.op.cols());
      if (++per_row[pc.row] > 1) diagonal = false;
    }
    if (diagonal) {
      Vector q = Vector::Zero(blk.size);
      for (const auto& pc : blk.pieces)
        q.segment(pc.var_start, pc.op.cols()) += pc.op.diagonal_vector().cwiseAbs2();
      blk.base_quad = diagonal_op(q);
    } else {
      Matrix q = Matrix::Zero(blk.size, blk.size);
      std::map<std::int64_t, Matrix> by_row;
      for (const auto& pc : blk.pieces) {
        auto& a = by_row[pc.row];
        if (a.size() == 0) a = Matrix::Zero(pc.op.rows(), blk.size);
        a.middleCols(pc.var_start, pc.op.cols()) += pc.op.materialize();
      }
      for (const auto& [row, a] : by_row) q.noalias() += a.transpose() * a;
      blk.base_quad = LinearOp::dense(std::move(q));
    }

    for (const auto& fe : blk.term->folds) {
      Fold fold;
      fold.quadratic = fe->atom == "sum_squares";
      fold.weight = fe->weight;
      const AffineForm af = affine_form(fe->children[0]);
      for (const auto& t : af.terms) fold.parts.push_back({find_start(blk, t.var->var_id), t.op});
      fold.offset = af.offset;
      if (fold.quadratic && (fold.parts.size() != 1 || !simple(fold.parts[0].second, fold.offset.size())))
        throw InternalError("folded sum_squares needs a diagonal map");
      blk.folds.push_back(std::move(fold));
    }

    if (f.least_squares) {
      const Expr& arg = blk.term->children[0];
      const AffineForm af = affine_form(arg);
      prox::ArgumentMap am;
      am.start = 0;
      am.length = blk.size;
      am.offset = af.offset;
      am.dim = arg->dim;
      if (af.terms.size() == 1 && blk.vars.size() == 1) {
        am.map = af.terms[0].op;
      } else {
        std::vector<LinearOp> cols;
        for (const auto& v : blk.vars) {
          auto it = std::find_if(af.terms.begin(), af.terms.end(),
                                 [&](const AffineTerm& t) { return t.var->var_id == v->var_id; });
          if (it != af.terms.end()) cols.push_back(it->op);
          else cols.push_back(LinearOp::sparse(SparseMatrix(arg->dim.size(), v->dim.size())));
        }
        am.map = hstack(cols);
      }
      blk.args.push_back(std::move(am));
    } else {
      for (const auto& arg : blk.term->children) {
        const AffineForm af = affine_form(arg);
        if (af.terms.size() != 1) throw InternalError(f.name + ": argument is not over a single variable");
        prox::ArgumentMap am;
        am.start = find_start(blk, af.terms[0].var->var_id);
        am.length = af.terms[0].var->dim.size();
        am.map = af.terms[0].op;
        am.offset = af.offset;
        am.dim = arg->dim;
        blk.args.push_back(std::move(am));
      }
    }
  }

  st.lambda = params.lambda;
  st.rows = rows;
  st.u = Vector::Zero(rows);
  st.r = Vector::Zero(rows);
  for (const auto& blk : blocks) {
    st.x.push_back(Vector::Zero(blk.size));
    ax.push_back(Vector::Zero(rows));
    st.cols += blk.size;
  }
  st.s = Vector::Zero(st.cols);
  st.b_norm = b.norm();
  for (std::size_t i = 0; i < blocks.size(); ++i) ax[i] = apply(i, st.x[i]);
  calls.assign(blocks.size(), 0);
}

// Factorizations depend on lambda, so this reruns when lambda changes.
void Solver::Impl::prepare() {
  const double lambda = st.lambda;
  for (auto& blk : blocks) {
    Vector qextra = Vector::Zero(blk.size);
    blk.shift = Vector::Zero(blk.size);
    for (const auto& fold : blk.folds) {
      const double c = lambda * fold.weight;
      if (fold.quadratic) {
        // c ||d .* x + o||^2 adds 2c d^2 to Q and -2c d o to r.
        const auto& [start, op] = fold.parts[0];
        const Vector d = op.diagonal_vector();
        qextra.segment(start, d.size()) += 2.0 * c * d.cwiseAbs2();
        blk.shift.segment(start, d.size()) -= 2.0 * c * d.cwiseProduct(fold.offset);
      } else {
        const Vector ones = Vector::Ones(fold.offset.size());
        for (const auto& [start, op] : fold.parts) blk.shift.segment(start, op.cols()) -= c * op.transpose().apply(ones);
      }
    }
    LinearOp quad = blk.base_quad;
    if (qextra.cwiseAbs().maxCoeff() > 0) {
      if (quad.is_diagonal_like()) quad = diagonal_op(quad.diagonal_vector() + qextra);
      else quad = add(quad, LinearOp::diagonal(qextra));
    }
    prox::GeneralizedProx g;
    g.function = &prox::lookup_prox(blk.term->atom);
    g.params = blk.term->params;
    g.block_size = blk.size;
    g.args = blk.args;
    g.quad = quad;
    g.lambda = lambda * blk.term->weight;
    blk.prox.emplace(std::move(g));
  }
}

Solver::Solver(const SeparableProblem& p, const SolverParams& params) : impl_(std::make_unique<Impl>()) {
  validate(params);
  check_separable(p);
  impl_->problem = p;
  impl_->params = params;
  impl_->build();
  impl_->prepare();
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;

std::size_t Solver::num_blocks() const { return impl_->blocks.size(); }
const SolverState& Solver::state() const { return impl_->st; }
SolverState& Solver::state() { return impl_->st; }
Vector Solver::compute_v(std::size_t i) const { return impl_->compute_v(i); }
const std::vector<Expr>& Solver::block_vars(std::size_t i) const { return impl_->blocks.at(i).vars; }
Vector Solver::apply_block(std::size_t i, const Vector& xi) const { return impl_->apply(i, xi); }
const Vector& Solver::b() const { return impl_->b; }

double Solver::step() {
  auto& s = *impl_;
  auto& st = s.st;
  const std::size_t n = s.blocks.size();
  std::vector<Vector> delta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector v = s.compute_v(i);
    const Vector r = s.apply_t(i, v) + s.blocks[i].shift;
    Vector x = s.blocks[i].prox->solve(r, st.x[i]);
    ++s.calls[i];
    if (!x.allFinite())
      throw InternalError("numerical blow-up in block " + std::to_string(i) + " (" + s.blocks[i].term->atom +
                          ") at iteration " + std::to_string(st.k + 1));
    Vector a = s.apply(i, x);
    delta[i] = a - s.ax[i];
    s.ax[i] = std::move(a);
    st.x[i] = std::move(x);
  }

  Vector total = Vector::Zero(s.b.size());
  for (const auto& a : s.ax) total += a;
  st.r = total - s.b;
  st.ax_norm = total.norm();
  const Vector u_old = st.u;
  st.u += st.r;
  const double err = st.u.size() ? ((st.u - u_old) - st.r).cwiseAbs().maxCoeff() / (1.0 + st.u.cwiseAbs().maxCoeff())
                                 : 0.0;

  // s_i = A_i^T sum_{j>i} A_j (x_j^{k+1} - x_j^k) / lambda
  Vector later = Vector::Zero(s.b.size());
  std::int64_t pos = st.cols;
  for (std::size_t i = n; i-- > 0;) {
    pos -= s.blocks[i].size;
    st.s.segment(pos, s.blocks[i].size) = s.apply_t(i, later) / st.lambda;
    later += delta[i];
  }
  ++st.k;
  if (!st.r.allFinite()) throw InternalError("numerical blow-up at iteration " + std::to_string(st.k));
  return err;
}

Result Solver::run() {
  auto& s = *impl_;
  auto& st = s.st;
  const auto& params = s.params;
  const bool track = params.track_objective || !params.trace_csv.empty();
  std::ofstream trace;
  if (!params.trace_csv.empty()) {
    trace.open(params.trace_csv);
    if (!trace) throw UserError("cannot write trace file: " + params.trace_csv);
    trace << "iter,objective,primal_res,dual_res,elapsed_ms\n";
    trace.precision(17);
  }

  Result res;
  const auto t0 = std::chrono::steady_clock::now();
  while (st.k < params.max_iters) {
    res.diagnostics.dual_identity_error = std::max(res.diagnostics.dual_identity_error, step());
    res.diagnostics.primal_res.push_back(st.r.norm());
    res.diagnostics.dual_res.push_back(st.s.norm());
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (track) {
      st.objective.push_back(objective_value(s.problem, s.assignment()));
      res.diagnostics.objective.push_back(st.objective.back());
    }
    if (trace) {
      trace << st.k << ',' << (track ? st.objective.back() : 0.0) << ',' << st.r.norm() << ',' << st.s.norm()
            << ',' << ms << '\n';
    }
    // The residual rule is relative, so large problems can pass it with
    // copies still apart; optimal also requires the copies to agree.
    if (stopping_check(st, params) && consensus_gap(s.problem, s.assignment()) <= 10.0 * params.abs_tol) {
      res.status = Status::Optimal;
      break;
    }
    if (params.adaptive_lambda && st.k % 10 == 0) {
      // Larger lambda weights f more, which shrinks the dual residual.
      const double rn = st.r.norm(), sn = st.s.norm();
      double factor = 1.0;
      if (rn > 10.0 * sn) factor = 0.5;
      else if (sn > 10.0 * rn) factor = 2.0;
      if (factor != 1.0) {
        st.u *= factor;
        st.lambda *= factor;
        s.prepare();
      }
    }
  }
  res.iterations = st.k;
  res.diagnostics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.diagnostics.prox_calls = s.calls;

  res.solution = s.assignment();
  res.diagnostics.consensus_gap = consensus_gap(s.problem, res.solution);
  for (const auto& vc : s.problem.copies) {
    Matrix sum = res.solution.at(vc.original->var_id);
    for (const auto& c : vc.copies) sum += res.solution.at(c->var_id);
    res.solution[vc.original->var_id] = sum / static_cast<double>(1 + vc.copies.size());
  }
  return res;
}

Result solve(const SeparableProblem& p, const SolverParams& params) {
  Solver s(p, params);
  return s.run();
}

}  // namespace proxcomp::admm
