#include "proxcomp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>

#include "proxcomp/error.hpp"

namespace proxcomp::problems {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix Rng::normal(std::int64_t rows, std::int64_t cols) {
  Matrix m(rows, cols);
  for (std::int64_t j = 0; j < cols; ++j)
    for (std::int64_t i = 0; i < rows; ++i) m(i, j) = normal();
  return m;
}

Matrix Rng::sparse_normal(std::int64_t rows, std::int64_t cols, double density) {
  Matrix m = Matrix::Zero(rows, cols);
  for (std::int64_t j = 0; j < cols; ++j)
    for (std::int64_t i = 0; i < rows; ++i)
      if (uniform() < density) m(i, j) = normal();
  return m;
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* s = std::getenv("PROXCOMP_SEED");
  if (!s || !*s) return fallback;
  char* end = nullptr;
  const auto v = std::strtoull(s, &end, 10);
  if (*end) throw UserError(std::string("PROXCOMP_SEED is not an integer: ") + s);
  return v;
}

namespace {

struct Context {
  BenchmarkSpec& spec;
  Generated& out;
  Rng rng;

  Expr data(const std::string& name, Matrix m, bool sparse = false) {
    out.data[name] = m;
    return constant(std::move(m), sparse);
  }
  Expr var(const std::string& name, std::int64_t r, std::int64_t c = 1) {
    Expr v = variable(name, r, c);
    out.variables[name] = v;
    return v;
  }
  double hyper(const std::string& name, double fallback) {
    const double v = spec.lambda >= 0 ? spec.lambda : fallback;
    out.hyper[name] = v;
    return v;
  }
  void defaults(std::int64_t m, std::int64_t n, std::int64_t k = 0, double density = 0.0) {
    if (!spec.m) spec.m = m;
    if (!spec.n) spec.n = n;
    if (!spec.k) spec.k = k;
    if (spec.density == 0.0) spec.density = density;
    if (spec.m < 0 || spec.n < 0 || spec.k < 0) throw UserError("problem sizes must be positive");
    if (spec.density < 0 || spec.density > 1) throw UserError("density must lie in [0, 1]");
  }
  Matrix features(std::int64_t m, std::int64_t n) {
    return spec.density > 0 ? rng.sparse_normal(m, n, spec.density) : rng.normal(m, n);
  }
  // Sparse ground truth: each entry nonzero with probability `p`.
  Matrix sparse_truth(std::int64_t r, std::int64_t c, double p) { return rng.sparse_normal(r, c, p); }
};

Expr ones(std::int64_t n) { return constant(Matrix::Ones(n, 1)); }
Expr sq(const Expr& a) { return build_atom("sum_squares", {a}); }
Expr l1(const Expr& a) { return build_atom("norm1", {a}); }

double inf_norm_xty(const Matrix& x, const Matrix& y) { return (x.transpose() * y).cwiseAbs().maxCoeff(); }

// 1/2 ||X theta - y||^2 + lambda ||theta||_1 with X in R^{m x 10m}.
void lasso(Context& c) {
  c.defaults(50, 0);
  if (!c.spec.n) c.spec.n = 10 * c.spec.m;
  const auto m = c.spec.m, n = c.spec.n;
  const bool sparse = c.spec.density > 0;
  Matrix x = c.features(m, n);
  const Matrix theta0 = c.sparse_truth(n, 1, 0.1);
  Matrix y = x * theta0 + 0.05 * c.rng.normal(m, 1);
  const double lam = c.hyper("lambda", 0.1 * inf_norm_xty(x, y));
  const Expr theta = c.var("theta", n);
  const Expr xc = c.data("X", std::move(x), sparse);
  const Expr yc = c.data("y", std::move(y));
  c.out.problem.objective = 0.5 * sq(mul(xc, theta) - yc) + lam * l1(theta);
}

void mv_lasso(Context& c) {
  c.defaults(40, 400, 10);
  const auto m = c.spec.m, n = c.spec.n, k = c.spec.k;
  Matrix x = c.rng.normal(m, n);
  const Matrix theta0 = c.sparse_truth(n, k, 0.1);
  Matrix y = x * theta0 + 0.05 * c.rng.normal(m, k);
  const double lam = c.hyper("lambda", 0.1 * inf_norm_xty(x, y));
  const Expr theta = c.var("Theta", n, k);
  const Expr xc = c.data("X", std::move(x));
  const Expr yc = c.data("Y", std::move(y));
  c.out.problem.objective = 0.5 * sq(mul(xc, theta) - yc) + lam * l1(theta);
}

// Piecewise constant signal with segments of length 10.
Matrix piecewise(Rng& rng, std::int64_t n) {
  Matrix v(n, 1);
  double level = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (i % 10 == 0) level = rng.normal();
    v(i, 0) = level;
  }
  return v;
}

void fused_lasso(Context& c) {
  c.defaults(50, 0);
  if (!c.spec.n) c.spec.n = 10 * c.spec.m;
  const auto m = c.spec.m, n = c.spec.n;
  Matrix x = c.rng.normal(m, n);
  const Matrix theta0 = piecewise(c.rng, n);
  Matrix y = x * theta0 + 0.05 * c.rng.normal(m, 1);
  const double scale = inf_norm_xty(x, y);
  const double l1w = c.hyper("lambda", 0.01 * scale);
  const double tvw = 0.05 * scale;
  c.out.hyper["lambda_tv"] = tvw;
  const Expr theta = c.var("theta", n);
  const Expr xc = c.data("X", std::move(x));
  const Expr yc = c.data("y", std::move(y));
  c.out.problem.objective =
      0.5 * sq(mul(xc, theta) - yc) + l1w * l1(theta) + tvw * build_atom("tv", {theta});
}

void tv_1d(Context& c) {
  c.defaults(0, 1000);
  const auto n = c.spec.n;
  Matrix y = piecewise(c.rng, n) + 0.05 * c.rng.normal(n, 1);
  const double lam = c.hyper("lambda", 0.1);
  const Expr x = c.var("x", n);
  const Expr yc = c.data("y", std::move(y));
  c.out.problem.objective = 0.5 * sq(x - yc) + lam * build_atom("tv", {x});
}

// Labels from a sparse linear rule with label noise; returns diag(y) X.
Matrix signed_features(Context& c, std::int64_t m, std::int64_t n, Matrix& labels) {
  Matrix x = c.features(m, n);
  const Matrix theta0 = c.rng.normal(n, 1);
  const Matrix score = x * theta0 + 0.5 * c.rng.normal(m, 1);
  labels = score.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
  return labels.asDiagonal() * x;
}

void hinge(Context& c, bool l2) {
  c.defaults(200, 50);
  const auto m = c.spec.m, n = c.spec.n;
  const bool sparse = c.spec.density > 0;
  Matrix labels;
  Matrix z = signed_features(c, m, n, labels);
  c.out.data["labels"] = labels;
  const double lam = c.hyper("lambda", 0.1 * std::sqrt(static_cast<double>(m)));
  const Expr theta = c.var("theta", n);
  const Expr zc = c.data("Z", std::move(z), sparse);
  const Expr loss = build_atom("hinge", {ones(m) - mul(zc, theta)});
  c.out.problem.objective = loss + lam * (l2 ? sq(theta) : l1(theta));
}

void logreg(Context& c) {
  c.defaults(200, 50);
  const auto m = c.spec.m, n = c.spec.n;
  const bool sparse = c.spec.density > 0;
  Matrix labels;
  Matrix z = signed_features(c, m, n, labels);
  c.out.data["labels"] = labels;
  const double lam = c.hyper("lambda", 0.1 * std::sqrt(static_cast<double>(m)));
  const Expr theta = c.var("theta", n);
  const Expr zc = c.data("Z", std::move(z), sparse);
  c.out.problem.objective = build_atom("logistic", {-mul(zc, theta)}) + lam * l1(theta);
}

// Regression data with a few gross outliers.
void robust_regression(Context& c, Matrix& x, Matrix& y) {
  const auto m = c.spec.m, n = c.spec.n;
  x = c.rng.normal(m, n);
  const Matrix theta0 = c.rng.normal(n, 1);
  y = x * theta0 + 0.1 * c.rng.normal(m, 1);
  for (std::int64_t i = 0; i < m; ++i)
    if (c.rng.uniform() < 0.05) y(i, 0) += 10.0 * c.rng.normal();
}

void huber(Context& c) {
  c.defaults(200, 50);
  Matrix x, y;
  robust_regression(c, x, y);
  const double mu = c.hyper("M", 1.0);
  const Expr theta = c.var("theta", c.spec.n);
  const Expr xc = c.data("X", std::move(x));
  const Expr yc = c.data("y", std::move(y));
  c.out.problem.objective = build_atom("huber", {mul(xc, theta) - yc}, {mu});
}

void least_abs_dev(Context& c) {
  c.defaults(200, 50);
  Matrix x, y;
  robust_regression(c, x, y);
  const Expr theta = c.var("theta", c.spec.n);
  const Expr xc = c.data("X", std::move(x));
  const Expr yc = c.data("y", std::move(y));
  c.out.problem.objective = l1(mul(xc, theta) - yc);
}

// min c^T x  s.t.  A x = b, x >= 0, built from a primal-dual pair so the
// optimum is finite.
void lp(Context& c) {
  c.defaults(50, 100);
  const auto m = c.spec.m, n = c.spec.n;
  Matrix a = c.rng.normal(m, n);
  Matrix x0(n, 1), s0(n, 1);
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = c.rng.normal();
    x0(i, 0) = std::max(v, 0.0);
    s0(i, 0) = std::max(-v, 0.0);
  }
  const Matrix y0 = c.rng.normal(m, 1);
  Matrix b = a * x0;
  Matrix cost = a.transpose() * y0 + s0;
  const Expr x = c.var("x", n);
  const Expr ac = c.data("A", std::move(a));
  const Expr bc = c.data("b", std::move(b));
  const Expr cc = c.data("c", std::move(cost));
  c.out.problem.objective = sum_entries(build_atom("elemmul", {cc, x}));
  c.out.problem.constraints = {{Cone::Zero, {mul(ac, x) - bc}}, {Cone::Nonneg, {x}}};
}

// min 1/2 ||F x||^2 + q^T x  s.t.  0 <= x <= 1
void qp(Context& c) {
  c.defaults(120, 100);
  const auto m = c.spec.m, n = c.spec.n;
  Matrix f = c.rng.normal(m, n) / std::sqrt(static_cast<double>(m));
  Matrix q = 2.0 * c.rng.normal(n, 1);
  const Expr x = c.var("x", n);
  const Expr fc = c.data("F", std::move(f));
  const Expr qc = c.data("q", std::move(q));
  c.out.problem.objective = 0.5 * sq(mul(fc, x)) + sum_entries(build_atom("elemmul", {qc, x}));
  c.out.problem.constraints = {{Cone::Nonneg, {x}}, {Cone::Nonneg, {ones(n) - x}}};
}

void basis_pursuit(Context& c) {
  c.defaults(50, 200);
  const auto m = c.spec.m, n = c.spec.n;
  Matrix a = c.rng.normal(m, n);
  const Matrix x0 = c.sparse_truth(n, 1, 0.05);
  Matrix b = a * x0;
  const Expr x = c.var("x", n);
  const Expr ac = c.data("A", std::move(a));
  const Expr bc = c.data("b", std::move(b));
  c.out.problem.objective = l1(x);
  c.out.problem.constraints = {{Cone::Zero, {mul(ac, x) - bc}}};
}

// -log det Theta + tr(S Theta) + lambda ||Theta||_1
void covsel(Context& c) {
  c.defaults(0, 30);
  const auto n = c.spec.n;
  if (!c.spec.m) c.spec.m = 10 * n;
  // Sparse symmetric positive definite precision matrix.
  Matrix p = Matrix::Zero(n, n);
  for (std::int64_t j = 0; j < n; ++j)
    for (std::int64_t i = j + 1; i < n; ++i)
      if (c.rng.uniform() < 0.1) p(i, j) = p(j, i) = c.rng.normal();
  const double shift = std::max(0.0, -Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues()(0)) + 1.0;
  p += shift * Matrix::Identity(n, n);
  const Matrix cov = p.inverse();
  const Matrix l = Eigen::LLT<Matrix>(cov).matrixL();
  const Matrix samples = l * c.rng.normal(n, c.spec.m);
  Matrix s = samples * samples.transpose() / static_cast<double>(c.spec.m);
  s = 0.5 * (s + s.transpose()).eval();
  const double lam = c.hyper("lambda", 0.05);
  const Expr theta = c.var("Theta", n, n);
  const Expr sc = c.data("S", std::move(s));
  c.out.problem.objective = build_atom("neg_log_det", {theta}) + build_atom("trace", {mul(sc, theta)}) +
                            lam * l1(theta);
}

// min ||L||_* + mu ||S||_1  s.t.  L + S = M
void robust_pca(Context& c) {
  c.defaults(30, 30, 2);
  const auto m = c.spec.m, n = c.spec.n, r = c.spec.k;
  Matrix low = c.rng.normal(m, r) * c.rng.normal(r, n);
  Matrix spikes = Matrix::Zero(m, n);
  for (std::int64_t j = 0; j < n; ++j)
    for (std::int64_t i = 0; i < m; ++i)
      if (c.rng.uniform() < 0.05) spikes(i, j) = 5.0 * c.rng.normal();
  const double mu = c.hyper("mu", 1.0 / std::sqrt(static_cast<double>(std::max(m, n))));
  const Expr l = c.var("L", m, n);
  const Expr s = c.var("S", m, n);
  const Expr mc = c.data("M", low + spikes);
  c.out.problem.objective = build_atom("nuclear_norm", {l}) + mu * l1(s);
  c.out.problem.constraints = {{Cone::Zero, {l + s - mc}}};
}

using Builder = std::function<void(Context&)>;

const std::map<std::string, Builder>& builders() {
  static const std::map<std::string, Builder> b = {
      {"basis_pursuit", basis_pursuit},
      {"covsel", covsel},
      {"fused_lasso", fused_lasso},
      {"hinge_l1", [](Context& c) { hinge(c, false); }},
      {"hinge_l1_sparse",
       [](Context& c) {
         if (c.spec.density == 0) c.spec.density = 0.1;
         hinge(c, false);
       }},
      {"hinge_l2", [](Context& c) { hinge(c, true); }},
      {"hinge_l2_sparse",
       [](Context& c) {
         if (c.spec.density == 0) c.spec.density = 0.1;
         hinge(c, true);
       }},
      {"huber", huber},
      {"lasso", lasso},
      {"lasso_sparse",
       [](Context& c) {
         if (c.spec.density == 0) c.spec.density = 0.1;
         lasso(c);
       }},
      {"least_abs_dev", least_abs_dev},
      {"logreg_l1", logreg},
      {"logreg_l1_sparse",
       [](Context& c) {
         if (c.spec.density == 0) c.spec.density = 0.1;
         logreg(c);
       }},
      {"lp", lp},
      {"mv_lasso", mv_lasso},
      {"qp", qp},
      {"robust_pca", robust_pca},
      {"tv_1d", tv_1d},
  };
  return b;
}

}  // namespace

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [name, b] : builders()) out.push_back(name);
  return out;
}

bool known(const std::string& name) { return builders().count(name) > 0; }

Generated generate(BenchmarkSpec spec) {
  auto it = builders().find(spec.name);
  if (it == builders().end()) throw UserError("unknown benchmark problem: " + spec.name);
  Generated out;
  Context c{spec, out, Rng(spec.seed)};
  it->second(c);
  out.spec = spec;
  return out;
}

}  // namespace proxcomp::problems
