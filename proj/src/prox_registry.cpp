#include "proxcomp/prox_registry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "proxcomp/error.hpp"
#include "proxcomp/linalg.hpp"
#include "proxcomp/prox.hpp"
#include "proxcomp/stats.hpp"

namespace proxcomp::prox {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector flat(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

// --- function values ----------------------------------------------------------

double sum_over(const Matrix& x, const std::function<double(double)>& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += f(x.data()[i]);
  return s;
}

double log_sum_exp_value(const Matrix& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

// --- kernels --------------------------------------------------------------------

using Scalar2 = std::function<double(double, double, const std::vector<double>&)>;

Kernel elementwise(Scalar2 f) {
  return [f](const KernelInput& in) {
    Vector out(in.center.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = f(in.center(i), in.lambda / in.weight(i), in.params);
    return out;
  };
}

double uniform_weight(const KernelInput& in) { return in.weight.size() ? in.weight(0) : 1.0; }

template <typename Pair>
Kernel paired(Pair f) {
  return [f](const KernelInput& in) {
    const Eigen::Index n = in.center.size() / 2;
    Vector out(in.center.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      auto [x, y] = f(in.center(i), in.center(n + i), in.lambda, in.weight(i), in.weight(n + i));
      out(i) = x;
      out(n + i) = y;
    }
    return out;
  };
}

Kernel matrix_kernel(SpectralAtom atom) {
  return [atom](const KernelInput& in) {
    const Dim d = in.arg_dims.at(0);
    Eigen::Map<const Matrix> v(in.center.data(), d.rows, d.cols);
    Matrix sym = v;
    if (atom == SpectralAtom::NegLogDet) sym = 0.5 * (v + v.transpose());
    return flat(prox_orthogonal_invariant(atom, sym, in.lambda / uniform_weight(in)));
  };
}

std::map<std::string, ProxFunction> build_registry() {
  std::map<std::string, ProxFunction> r;
  auto add = [&r](ProxFunction f) { r.emplace(f.name, std::move(f)); };
  using M = Method;
  using H = InnerMap;
  using W = WeightSupport;

  // cones
  add({"zero", 1, 0, M::Projection, H::GeneralAffine, W::PerCoordinate, true, true, nullptr,
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         return within_tolerance(a[0].cwiseAbs().maxCoeff(), 0.0) ? 0.0 : kInf;
       }});
  add({"nonneg", 1, 0, M::Projection, H::ElementwiseAffine, W::PerCoordinate, false, true,
       [](const KernelInput& in) { return project_nonneg(in.center); },
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         return within_tolerance(std::max(0.0, -a[0].minCoeff()), a[0].cwiseAbs().maxCoeff()) ? 0.0 : kInf;
       }});
  add({"soc", 2, 0, M::Projection, H::ElementwiseAffine, W::PerArgument, false, true,
       [](const KernelInput& in) {
         const Eigen::Index n = in.arg_dims[0].size();
         const double wx = in.weight(0), wt = in.weight(n);
         const double sx = std::sqrt(wx), st = std::sqrt(wt);
         auto [x, t] = project_soc(sx * in.center.head(n), st * in.center(n), std::sqrt(wx / wt));
         Vector out(n + 1);
         out << x / sx, t / st;
         return out;
       },
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         const double norm = a[0].norm(), t = a[1](0, 0);
         return within_tolerance(std::max(0.0, norm - t), std::max(norm, std::abs(t))) ? 0.0 : kInf;
       }});
  add({"psd", 1, 0, M::Projection, H::ScalarAffine, W::Uniform, false, true,
       [](const KernelInput& in) {
         const Dim d = in.arg_dims.at(0);
         return flat(project_psd(Eigen::Map<const Matrix>(in.center.data(), d.rows, d.cols)));
       },
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         const auto eig = linalg::symmetric_eigen(a[0]);
         return within_tolerance(std::max(0.0, -eig.values(0)), a[0].cwiseAbs().maxCoeff()) ? 0.0 : kInf;
       }});

  // elementwise
  auto soft = elementwise([](double v, double t, const auto&) { return soft_threshold(v, t); });
  auto l1_value = [](const std::vector<Matrix>& a, const std::vector<double>&) {
    return a[0].cwiseAbs().sum();
  };
  add({"abs", 1, 0, M::SoftThreshold, H::ElementwiseAffine, W::PerCoordinate, false, false, soft, l1_value});
  add({"norm1", 1, 0, M::SoftThreshold, H::ElementwiseAffine, W::PerCoordinate, false, false, soft,
       l1_value});
  add({"square", 1, 0, M::ExactEquation, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto&) { return prox_square(v, l); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return a[0].squaredNorm(); }});
  add({"hinge", 1, 0, M::SoftThreshold, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto&) { return prox_hinge(v, l); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return a[0].cwiseMax(0.0).sum(); }});
  add({"deadzone", 1, 1, M::SoftThreshold, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto& p) { return prox_deadzone(v, l, p[0]); }),
       [](const std::vector<Matrix>& a, const std::vector<double>& p) {
         return sum_over(a[0], [&](double x) { return std::max(std::abs(x) - p[0], 0.0); });
       }});
  add({"quantile", 1, 1, M::SoftThreshold, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto& p) { return prox_quantile(v, l, p[0]); }),
       [](const std::vector<Matrix>& a, const std::vector<double>& p) {
         return sum_over(a[0], [&](double x) { return std::max(p[0] * x, (p[0] - 1.0) * x); });
       }});
  add({"logistic", 1, 0, M::Newton, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto&) { return prox_logistic(v, l); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         return sum_over(a[0], [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); });
       }});
  add({"inv_pos", 1, 0, M::Newton, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto&) { return prox_inv_pos(v, l); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         return sum_over(a[0], [](double x) { return x > 0 ? 1.0 / x : kInf; });
       }});
  add({"neg_log", 1, 0, M::ExactEquation, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto&) { return prox_neg_log(v, l); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         return sum_over(a[0], [](double x) { return x > 0 ? -std::log(x) : kInf; });
       }});
  add({"exp", 1, 0, M::Newton, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto&) { return prox_exp(v, l); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return a[0].array().exp().sum(); }});
  add({"neg_entropy", 1, 0, M::Newton, H::ElementwiseAffine, W::PerCoordinate, false, false,
       elementwise([](double v, double l, const auto&) { return prox_neg_entropy(v, l); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         return sum_over(a[0], [](double x) { return x > 0 ? x * std::log(x) : (x == 0 ? 0.0 : kInf); });
       }});
  add({"kl_div", 2, 0, M::Newton, H::ElementwiseAffine, W::PerCoordinate, false, false,
       paired([](double a, double b, double l, double wx, double wy) { return prox_kl_div(a, b, l, wx, wy); }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         double s = 0.0;
         for (Eigen::Index i = 0; i < a[0].size(); ++i) {
           const double x = a[0].data()[i], y = a[1].data()[i];
           if (x == 0 && y >= 0) continue;
           if (x < 0 || y <= 0) return kInf;
           s += x * std::log(x / y);
         }
         return s;
       }});
  add({"quad_over_lin", 2, 0, M::ExactEquation, H::ElementwiseAffine, W::PerCoordinate, false, false,
       paired([](double a, double b, double l, double wx, double wy) {
         return prox_quad_over_lin(a, b, l, wx, wy);
       }),
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         double s = 0.0;
         for (Eigen::Index i = 0; i < a[0].size(); ++i) {
           const double x = a[0].data()[i], y = a[1].data()[i];
           if (y > 0) s += x * x / y;
           else if (!(x == 0 && y == 0)) return kInf;
         }
         return s;
       }});

  // vector
  add({"sum_squares", 1, 0, M::LeastSquares, H::GeneralAffine, W::PerCoordinate, true, false, nullptr,
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return a[0].squaredNorm(); }});
  add({"norm2", 1, 0, M::SoftThreshold, H::ScalarAffine, W::Uniform, false, false,
       [](const KernelInput& in) { return prox_l2_group(in.center, in.lambda / uniform_weight(in)); },
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return a[0].norm(); }});
  add({"norm_inf", 1, 0, M::Projection, H::ScalarAffine, W::Uniform, false, false,
       [](const KernelInput& in) { return prox_linf(in.center, in.lambda / uniform_weight(in)); },
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return a[0].cwiseAbs().maxCoeff(); }});
  add({"log_sum_exp", 1, 0, M::Newton, H::ScalarAffine, W::Uniform, false, false,
       [](const KernelInput& in) { return prox_log_sum_exp(in.center, in.lambda / uniform_weight(in)); },
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return log_sum_exp_value(a[0]); }});
  add({"tv_1d", 1, 0, M::SpecialPurpose, H::VariableOnly, W::Uniform, false, false,
       [](const KernelInput& in) { return prox_fused_lasso(in.center, in.lambda / uniform_weight(in)); },
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         const Vector x = flat(a[0]);
         return x.size() < 2 ? 0.0 : (x.tail(x.size() - 1) - x.head(x.size() - 1)).cwiseAbs().sum();
       }});

  // matrix
  add({"neg_log_det", 1, 0, M::OrthogonallyInvariant, H::VariableOnly, W::Uniform, false, false,
       matrix_kernel(SpectralAtom::NegLogDet),
       [](const std::vector<Matrix>& a, const std::vector<double>&) {
         const Matrix sym = 0.5 * (a[0] + a[0].transpose());
         const auto eig = linalg::symmetric_eigen(sym);
         if (eig.values(0) <= 0) return kInf;
         return -eig.values.array().log().sum();
       }});
  add({"nuclear_norm", 1, 0, M::OrthogonallyInvariant, H::VariableOnly, W::Uniform, false, false,
       matrix_kernel(SpectralAtom::NuclearNorm),
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return linalg::svd(a[0]).s.sum(); }});
  add({"spectral_norm", 1, 0, M::OrthogonallyInvariant, H::VariableOnly, W::Uniform, false, false,
       matrix_kernel(SpectralAtom::SpectralNorm),
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return linalg::svd(a[0]).s(0); }});

  // linear-solve family
  add({"null", 1, 0, M::LeastSquares, H::GeneralAffine, W::PerCoordinate, true, false, nullptr,
       [](const std::vector<Matrix>&, const std::vector<double>&) { return 0.0; }});
  add({"affine", 1, 0, M::LeastSquares, H::GeneralAffine, W::PerCoordinate, true, false, nullptr,
       [](const std::vector<Matrix>& a, const std::vector<double>&) { return a[0].sum(); }});
  return r;
}

const std::map<std::string, ProxFunction>& registry() {
  static const std::map<std::string, ProxFunction> r = build_registry();
  return r;
}

// --- linear algebra helpers -----------------------------------------------------

std::optional<double> uniform_value(const LinearOp& q) {
  if (q.kind() == LinearOp::Kind::Scalar) return q.scalar_value();
  if (!q.is_diagonal_like()) return std::nullopt;
  const Vector d = q.diagonal_vector();
  if (d.size() == 0) return 0.0;
  if ((d.array() == d(0)).all()) return d(0);
  return std::nullopt;
}

using Solve = std::function<Vector(const Vector&)>;

Solve dense_spd_solver(Matrix k, const char* what) {
  const auto n = k.rows();
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(k);
  stats::record_factorization(what, n);
  if (llt->info() == Eigen::Success) {
    const double dmin = llt->matrixLLT().diagonal().minCoeff();
    const double dmax = llt->matrixLLT().diagonal().maxCoeff();
    if (dmin > 1e-7 * dmax) return [llt](const Vector& y) -> Vector { return llt->solve(y); };
  }
  // Singular or nearly so: fall back to the minimum-norm least-squares solve.
  auto cod = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(k);
  return [cod](const Vector& y) -> Vector { return cod->solve(y); };
}

// Solver for (c M^T M + Q) x = y.
Solve normal_solver(const LinearOp& m, double c, const LinearOp& q) {
  const auto uq = uniform_value(q);
  const auto n = m.cols();
  if (uq && *uq > 0 && m.kind() == LinearOp::Kind::Kron) {
    const auto& left = m.kron_left();
    const auto alpha = uniform_value(left);
    if (alpha && left.rows() == left.cols()) {
      // (c (aI (x) R)^T (aI (x) R) + qI) = I (x) (c a^2 R^T R + qI): one
      // k-independent block solve applied to every column of the reshaped x.
      const auto& right = m.kron_right();
      Solve block = normal_solver(right, c * (*alpha) * (*alpha), LinearOp::scalar(*uq, right.cols()));
      const auto q_cols = right.cols();
      const auto k = left.cols();
      return [block, q_cols, k](const Vector& y) -> Vector {
        Vector x(y.size());
        for (std::int64_t j = 0; j < k; ++j) x.segment(j * q_cols, q_cols) = block(y.segment(j * q_cols, q_cols));
        return x;
      };
    }
  }
  if (m.kind() == LinearOp::Kind::Dense && q.is_diagonal_like()) {
    const Matrix& a = m.dense_matrix();
    if (uq && *uq > 0 && a.rows() < a.cols()) {
      // Woodbury: (qI + c A^T A)^{-1} = (I - c A^T (qI + c A A^T)^{-1} A) / q.
      const double qv = *uq;
      Matrix small = c * a * a.transpose();
      small.diagonal().array() += qv;
      Solve inner = dense_spd_solver(std::move(small), "cholesky");
      auto at = std::make_shared<const Matrix>(a);
      return [inner, at, c, qv](const Vector& y) -> Vector {
        stats::add_multiplies(2 * at->size());
        return (y - c * at->transpose() * inner(*at * y)) / qv;
      };
    }
    Matrix k = c * a.transpose() * a;
    k.diagonal() += q.diagonal_vector();
    return dense_spd_solver(std::move(k), "cholesky");
  }
  if (m.kind() == LinearOp::Kind::Sparse && q.is_diagonal_like()) {
    const SparseMatrix& a = m.sparse_matrix();
    SparseMatrix k = c * SparseMatrix(a.transpose() * a);
    const Vector d = q.diagonal_vector();
    SparseMatrix dq(n, n);
    dq.reserve(Eigen::VectorXi::Constant(n, 1));
    for (std::int64_t i = 0; i < n; ++i) dq.insert(i, i) = d(i);
    k += dq;
    auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(k);
    stats::record_factorization("sparse_ldlt", n);
    if (ldlt->info() == Eigen::Success && (ldlt->vectorD().array() > 0).all())
      return [ldlt](const Vector& y) -> Vector { return ldlt->solve(y); };
  }
  Matrix a = m.materialize();
  Matrix k = c * a.transpose() * a + q.materialize();
  return dense_spd_solver(std::move(k), "cholesky");
}

}  // namespace

bool within_tolerance(double violation, double scale) { return violation <= 1e-6 * (1.0 + scale); }

const ProxFunction* find_prox(const std::string& name) {
  const auto& r = registry();
  auto it = r.find(name);
  return it == r.end() ? nullptr : &it->second;
}

const ProxFunction& lookup_prox(const std::string& name) {
  if (auto* f = find_prox(name)) return *f;
  throw UserError("unknown prox function '" + name + "'");
}

std::vector<std::string> prox_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::ExactEquation: return "exact-equation";
    case Method::SoftThreshold: return "soft-threshold";
    case Method::Newton: return "newton";
    case Method::Projection: return "projection";
    case Method::OrthogonallyInvariant: return "orthogonally-invariant";
    case Method::SpecialPurpose: return "special-purpose";
    case Method::LeastSquares: return "least-squares";
  }
  return "?";
}

// --- PreparedProx -----------------------------------------------------------------

struct PreparedProx::Impl {
  GeneralizedProx p;
  bool diagonal_quad = false;
  Vector q;             // diagonal of Q with zero entries replaced by 1
  std::vector<bool> zero_curvature;
  Solve ls_solve;       // sum_squares / general-Q solves
  Vector ls_shift;      // constant part of the right-hand side
  LinearOp zero_map;    // zero cone: M
  Vector zero_offset;
  std::shared_ptr<Eigen::CompleteOrthogonalDecomposition<Matrix>> zero_schur;
  std::shared_ptr<Matrix> zero_dense;
};

namespace {

void check_args(const GeneralizedProx& p) {
  if (!p.function) throw InternalError("generalized prox without a function");
  if (!(p.lambda > 0)) throw InternalError("generalized prox needs lambda > 0");
  if (static_cast<int>(p.args.size()) != p.function->arity)
    throw InternalError(p.function->name + ": expected " + std::to_string(p.function->arity) +
                        " arguments, got " + std::to_string(p.args.size()));
  if (p.quad.rows() != p.block_size || p.quad.cols() != p.block_size)
    throw InternalError(p.function->name + ": quadratic term does not match block size");
  for (const auto& a : p.args) {
    if (a.map.cols() != a.length || a.start + a.length > p.block_size || a.map.rows() != a.dim.size())
      throw InternalError(p.function->name + ": argument map has inconsistent dimensions");
  }
}

}  // namespace

PreparedProx::PreparedProx(GeneralizedProx problem) : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.p = std::move(problem);
  const auto& p = s.p;
  check_args(p);
  const ProxFunction& f = *p.function;
  s.diagonal_quad = p.quad.is_diagonal_like();
  if (s.diagonal_quad) {
    s.q = p.quad.diagonal_vector();
    s.zero_curvature.assign(p.block_size, false);
    for (std::int64_t i = 0; i < p.block_size; ++i) {
      if (s.q(i) < 0) throw InternalError(f.name + ": negative quadratic weight");
      if (s.q(i) == 0.0) {
        s.zero_curvature[i] = true;
        s.q(i) = 1.0;
      }
    }
  }

  if (f.name == "sum_squares") {
    // (2 lambda M^T M + Q) x = r - 2 lambda M^T b
    const auto& arg = p.args[0];
    if (arg.start != 0 || arg.length != p.block_size)
      throw InternalError("sum_squares argument must span its whole block");
    s.ls_solve = normal_solver(arg.map, 2.0 * p.lambda, p.quad);
    s.ls_shift = -2.0 * p.lambda * arg.map.transpose().apply(arg.offset);
    s.zero_curvature.assign(p.block_size, false);
    return;
  }
  if (f.least_squares) {
    if (!s.diagonal_quad) {
      Matrix k = p.quad.materialize();
      s.ls_solve = dense_spd_solver(std::move(k), "cholesky");
      s.zero_curvature.assign(p.block_size, false);
    }
    if (f.name == "affine") {
      const auto& arg = p.args[0];
      s.ls_shift = -p.lambda * arg.map.transpose().apply(Vector::Ones(arg.map.rows()));
      if (arg.start != 0 || arg.length != p.block_size) {
        Vector full = Vector::Zero(p.block_size);
        full.segment(arg.start, arg.length) = s.ls_shift;
        s.ls_shift = full;
      }
    } else if (f.name == "zero") {
      const auto& arg = p.args[0];
      if (arg.start != 0 || arg.length != p.block_size)
        throw InternalError("zero-cone argument must span its whole block");
      if (!s.diagonal_quad) throw InternalError("zero cone needs a diagonal quadratic term");
      s.zero_map = arg.map;
      s.zero_offset = arg.offset;
      auto m = std::make_shared<Matrix>(arg.map.materialize());
      Matrix schur = (*m) * s.q.cwiseInverse().asDiagonal() * m->transpose();
      s.zero_schur = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(schur);
      stats::record_factorization("cod", schur.rows());
      s.zero_dense = m;
    } else {
      s.ls_shift = Vector::Zero(p.block_size);
    }
    return;
  }
  if (!s.diagonal_quad)
    throw InternalError("unsupported (f, H, A) combination: " + f.name +
                        " needs a scalar or diagonal outer map, got " + kind_name(p.quad.kind()));
  if (!f.kernel) throw InternalError(f.name + " has no prox kernel");
}

PreparedProx::~PreparedProx() = default;
PreparedProx::PreparedProx(PreparedProx&&) noexcept = default;
PreparedProx& PreparedProx::operator=(PreparedProx&&) noexcept = default;

const GeneralizedProx& PreparedProx::problem() const { return impl_->p; }

Vector PreparedProx::solve(const Vector& r_in, const Vector& current) const {
  const auto& s = *impl_;
  const auto& p = s.p;
  const ProxFunction& f = *p.function;
  if (r_in.size() != p.block_size) throw DimensionError(f.name + ": prox input has wrong length");
  Vector r = r_in;
  if (s.diagonal_quad && f.name != "sum_squares") {
    for (std::int64_t i = 0; i < p.block_size; ++i)
      if (s.zero_curvature[i]) r(i) += current.size() == p.block_size ? current(i) : 0.0;
  }

  if (f.name == "sum_squares") return s.ls_solve(r + s.ls_shift);
  if (f.least_squares) {
    if (f.name == "zero") {
      const Matrix& m = *s.zero_dense;
      const Vector qinv_r = r.cwiseQuotient(s.q);
      const Vector mu = s.zero_schur->solve(m * qinv_r + s.zero_offset);
      return (r - m.transpose() * mu).cwiseQuotient(s.q);
    }
    const Vector rhs = r + s.ls_shift;
    if (!s.diagonal_quad) return s.ls_solve(rhs);
    return rhs.cwiseQuotient(s.q);
  }

  // Separable family: change variables to argument space z = d x + b.
  Vector x = r.cwiseQuotient(s.q);
  std::int64_t total = 0;
  for (const auto& a : p.args) total += a.dim.size();
  Vector center(total), weight(total);
  std::vector<Dim> dims;
  std::vector<Vector> diag;
  std::int64_t pos = 0;
  for (const auto& a : p.args) {
    if (!a.map.is_diagonal_like() || a.map.rows() != a.length)
      throw InternalError("unsupported (f, H, A) combination: " + f.name + " needs an elementwise inner map");
    Vector d = a.map.diagonal_vector();
    for (std::int64_t i = 0; i < a.length; ++i) {
      const double di = d(i);
      if (di == 0.0) throw InternalError(f.name + ": zero coefficient in the inner map");
      const double qi = s.q(a.start + i);
      weight(pos + i) = qi / (di * di);
      center(pos + i) = a.offset(i) + di * r(a.start + i) / qi;
    }
    dims.push_back(a.dim);
    diag.push_back(std::move(d));
    pos += a.length;
  }
  if (f.weights != WeightSupport::PerCoordinate) {
    std::int64_t off = 0;
    for (std::size_t j = 0; j < p.args.size(); ++j) {
      const auto len = p.args[j].length;
      const auto& w = weight.segment(off, len);
      const double ref = f.weights == WeightSupport::Uniform ? weight(0) : w(0);
      if (((w.array() - ref).abs() > 1e-12 * std::abs(ref)).any())
        throw InternalError("unsupported (f, H, A) combination: " + f.name +
                            " needs a uniform quadratic weight");
      off += len;
    }
  }
  const Vector z = f.kernel(KernelInput{center, weight, p.lambda, p.params, dims});
  pos = 0;
  for (std::size_t j = 0; j < p.args.size(); ++j) {
    const auto& a = p.args[j];
    for (std::int64_t i = 0; i < a.length; ++i)
      x(a.start + i) = (z(pos + i) - a.offset(i)) / diag[j](i);
    pos += a.length;
  }
  return x;
}

Vector eval_prox(const ProxFunction& f, const ProxRequest& req) {
  GeneralizedProx g;
  g.function = &f;
  g.params = req.params;
  g.block_size = req.outer.cols();
  g.args = req.inner;
  g.quad = compose(req.outer.transpose(), req.outer);
  g.lambda = req.lambda;
  PreparedProx prepared(std::move(g));
  return prepared.solve(req.outer.transpose().apply(req.v), Vector::Zero(req.outer.cols()));
}

Vector prox_sum_squares(const Vector& v, double lambda, const LinearOp& a_inner, const Vector& b,
                        const LinearOp& a_outer) {
  ProxRequest req;
  req.v = v;
  req.lambda = lambda;
  req.inner = {ArgumentMap{0, a_inner.cols(), a_inner, -b, Dim{a_inner.rows(), 1}}};
  req.outer = a_outer;
  return eval_prox(lookup_prox("sum_squares"), req);
}

}  // namespace proxcomp::prox
