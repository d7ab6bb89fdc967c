#include "proxcomp/linop.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <mutex>
#include <sstream>
#include <variant>

#include "proxcomp/error.hpp"
#include "proxcomp/stats.hpp"

namespace proxcomp {
namespace detail {

struct DenseData {
  Matrix m;
};
struct SparseData {
  SparseMatrix m;
};
struct DiagonalData {
  Vector d;
};
struct ScalarData {
  double alpha;
  std::int64_t n;
};
struct KronData {
  LinearOp left, right;
};
struct SumData {
  std::vector<LinearOp> terms;
};
struct ProductData {
  std::vector<LinearOp> factors;
};
struct AbstractData {
  LinearOp::ApplyFn apply, apply_transpose;
  std::string label;
  std::shared_ptr<const LinearOp> inverse_of;
};

struct OpNode {
  using Payload = std::variant<DenseData, SparseData, DiagonalData, ScalarData, KronData,
                               SumData, ProductData, AbstractData>;
  LinearOp::Kind kind;
  std::int64_t rows, cols;
  Payload payload;

  mutable std::once_flag inverse_once;
  mutable LinearOp inverse_cache;

  OpNode(LinearOp::Kind k, std::int64_t r, std::int64_t c, Payload p)
      : kind(k), rows(r), cols(c), payload(std::move(p)) {}

  static LinearOp make(LinearOp::Kind k, std::int64_t r, std::int64_t c, Payload p) {
    return LinearOp(std::make_shared<const OpNode>(k, r, c, std::move(p)));
  }
};

}  // namespace detail

using detail::OpNode;
using Kind = LinearOp::Kind;

namespace {

std::string dims(const LinearOp& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

}  // namespace

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::Dense: return "dense";
    case Kind::Sparse: return "sparse";
    case Kind::Diagonal: return "diag";
    case Kind::Scalar: return "scalar";
    case Kind::Kron: return "kron";
    case Kind::Sum: return "sum";
    case Kind::Product: return "product";
    case Kind::Abstract: return "abstract";
  }
  return "?";
}

// --- construction -----------------------------------------------------------

LinearOp LinearOp::dense(Matrix m) {
  auto r = m.rows(), c = m.cols();
  return OpNode::make(Kind::Dense, r, c, detail::DenseData{std::move(m)});
}

LinearOp LinearOp::sparse(SparseMatrix m) {
  m.makeCompressed();
  auto r = m.rows(), c = m.cols();
  return OpNode::make(Kind::Sparse, r, c, detail::SparseData{std::move(m)});
}

LinearOp LinearOp::diagonal(Vector d) {
  auto n = d.size();
  return OpNode::make(Kind::Diagonal, n, n, detail::DiagonalData{std::move(d)});
}

LinearOp LinearOp::scalar(double alpha, std::int64_t n) {
  require(n >= 1, "scalar operator needs n >= 1");
  return OpNode::make(Kind::Scalar, n, n, detail::ScalarData{alpha, n});
}

LinearOp LinearOp::kron(LinearOp left, LinearOp right) {
  auto r = left.rows() * right.rows();
  auto c = left.cols() * right.cols();
  return OpNode::make(Kind::Kron, r, c, detail::KronData{std::move(left), std::move(right)});
}

LinearOp LinearOp::sum(std::vector<LinearOp> terms) {
  require(!terms.empty(), "empty sum operator");
  for (const auto& t : terms)
    require(t.rows() == terms[0].rows() && t.cols() == terms[0].cols(),
            "sum operands differ: " + dims(terms[0]) + " vs " + dims(t));
  if (terms.size() == 1) return terms[0];
  auto r = terms[0].rows(), c = terms[0].cols();
  return OpNode::make(Kind::Sum, r, c, detail::SumData{std::move(terms)});
}

LinearOp LinearOp::product(std::vector<LinearOp> factors) {
  require(!factors.empty(), "empty product operator");
  for (std::size_t i = 0; i + 1 < factors.size(); ++i)
    require(factors[i].cols() == factors[i + 1].rows(),
            "product factors do not chain: " + dims(factors[i]) + " * " + dims(factors[i + 1]));
  if (factors.size() == 1) return factors[0];
  auto r = factors.front().rows(), c = factors.back().cols();
  return OpNode::make(Kind::Product, r, c, detail::ProductData{std::move(factors)});
}

LinearOp LinearOp::abstract(std::int64_t rows, std::int64_t cols, ApplyFn apply,
                            ApplyFn apply_transpose, std::string label,
                            std::shared_ptr<const LinearOp> inverse_of) {
  return OpNode::make(Kind::Abstract, rows, cols,
                      detail::AbstractData{std::move(apply), std::move(apply_transpose),
                                           std::move(label), std::move(inverse_of)});
}

// --- accessors --------------------------------------------------------------

const OpNode& LinearOp::node() const {
  if (!node_) throw InternalError("use of an empty LinearOp");
  return *node_;
}

Kind LinearOp::kind() const { return node().kind; }
std::int64_t LinearOp::rows() const { return node().rows; }
std::int64_t LinearOp::cols() const { return node().cols; }

namespace {
template <typename T>
const T& payload_as(const OpNode& n, const char* what) {
  if (auto* p = std::get_if<T>(&n.payload)) return *p;
  throw InternalError(std::string("linear operator is not ") + what);
}
}  // namespace

const Matrix& LinearOp::dense_matrix() const { return payload_as<detail::DenseData>(node(), "dense").m; }
const SparseMatrix& LinearOp::sparse_matrix() const {
  return payload_as<detail::SparseData>(node(), "sparse").m;
}
const Vector& LinearOp::diagonal_values() const {
  return payload_as<detail::DiagonalData>(node(), "diagonal").d;
}
double LinearOp::scalar_value() const { return payload_as<detail::ScalarData>(node(), "scalar").alpha; }
const LinearOp& LinearOp::kron_left() const { return payload_as<detail::KronData>(node(), "kron").left; }
const LinearOp& LinearOp::kron_right() const {
  return payload_as<detail::KronData>(node(), "kron").right;
}
const std::vector<LinearOp>& LinearOp::children() const {
  if (kind() == Kind::Sum) return payload_as<detail::SumData>(node(), "sum").terms;
  return payload_as<detail::ProductData>(node(), "sum or product").factors;
}
const std::string& LinearOp::label() const {
  return payload_as<detail::AbstractData>(node(), "abstract").label;
}

bool LinearOp::is_identity() const {
  if (kind() == Kind::Scalar) return scalar_value() == 1.0;
  if (kind() == Kind::Diagonal) return (diagonal_values().array() == 1.0).all();
  if (kind() == Kind::Kron) return kron_left().is_identity() && kron_right().is_identity();
  return false;
}

bool LinearOp::is_diagonal_like() const {
  if (kind() == Kind::Scalar || kind() == Kind::Diagonal) return true;
  if (kind() == Kind::Kron) return kron_left().is_diagonal_like() && kron_right().is_diagonal_like();
  return false;
}

Vector LinearOp::diagonal_vector() const {
  switch (kind()) {
    case Kind::Scalar: return Vector::Constant(rows(), scalar_value());
    case Kind::Diagonal: return diagonal_values();
    case Kind::Kron: {
      Vector l = kron_left().diagonal_vector(), r = kron_right().diagonal_vector();
      Vector out(rows());
      for (Eigen::Index i = 0; i < l.size(); ++i) out.segment(i * r.size(), r.size()) = l(i) * r;
      return out;
    }
    default: throw InternalError("diagonal_vector on a " + kind_name(kind()) + " operator");
  }
}

std::int64_t LinearOp::storage() const {
  const auto& n = node();
  switch (n.kind) {
    case Kind::Dense: return n.rows * n.cols;
    case Kind::Sparse: return sparse_matrix().nonZeros();
    case Kind::Diagonal: return n.rows;
    case Kind::Scalar: return 1;
    case Kind::Kron: return kron_left().storage() + kron_right().storage();
    case Kind::Sum:
    case Kind::Product: {
      std::int64_t s = 0;
      for (const auto& c : children()) s += c.storage();
      return s;
    }
    case Kind::Abstract: return 0;
  }
  return 0;
}

// --- apply ------------------------------------------------------------------

Vector LinearOp::apply(const Vector& x) const {
  const auto& n = node();
  if (x.size() != n.cols)
    throw DimensionError("apply: operator " + dims(*this) + " given vector of length " +
                         std::to_string(x.size()));
  switch (n.kind) {
    case Kind::Dense:
      stats::add_multiplies(n.rows * n.cols);
      return dense_matrix() * x;
    case Kind::Sparse:
      stats::add_multiplies(sparse_matrix().nonZeros());
      return sparse_matrix() * x;
    case Kind::Diagonal:
      stats::add_multiplies(n.rows);
      return diagonal_values().cwiseProduct(x);
    case Kind::Scalar:
      stats::add_multiplies(n.rows);
      return scalar_value() * x;
    case Kind::Kron: {
      // (L (x) R) vec(X) = vec(R X L^T), X is q x n column-major.
      const auto& left = kron_left();
      const auto& right = kron_right();
      const auto q = right.cols(), nl = left.cols(), p = right.rows(), m = left.rows();
      Eigen::Map<const Matrix> xm(x.data(), q, nl);
      Matrix rx(p, nl);
      if (right.is_identity()) {
        rx = xm;
      } else {
        for (Eigen::Index j = 0; j < nl; ++j) rx.col(j) = right.apply(xm.col(j));
      }
      Matrix out(p, m);
      if (left.kind() == Kind::Scalar) {
        if (left.scalar_value() == 1.0) {
          out = rx;
        } else {
          stats::add_multiplies(p * m);
          out = left.scalar_value() * rx;
        }
      } else {
        for (Eigen::Index i = 0; i < p; ++i) out.row(i) = left.apply(rx.row(i).transpose()).transpose();
      }
      return Eigen::Map<const Vector>(out.data(), out.size());
    }
    case Kind::Sum: {
      Vector y = Vector::Zero(n.rows);
      for (const auto& t : children()) y += t.apply(x);
      return y;
    }
    case Kind::Product: {
      Vector y = x;
      const auto& f = children();
      for (auto it = f.rbegin(); it != f.rend(); ++it) y = it->apply(y);
      return y;
    }
    case Kind::Abstract:
      return std::get<detail::AbstractData>(n.payload).apply(x);
  }
  throw InternalError("apply: unknown operator kind");
}

// --- transpose --------------------------------------------------------------

LinearOp LinearOp::transpose() const {
  const auto& n = node();
  switch (n.kind) {
    case Kind::Dense: return dense(dense_matrix().transpose());
    case Kind::Sparse: return sparse(SparseMatrix(sparse_matrix().transpose()));
    case Kind::Diagonal:
    case Kind::Scalar: return *this;
    case Kind::Kron: return kron(kron_left().transpose(), kron_right().transpose());
    case Kind::Sum: {
      std::vector<LinearOp> t;
      for (const auto& c : children()) t.push_back(c.transpose());
      return sum(std::move(t));
    }
    case Kind::Product: {
      std::vector<LinearOp> t;
      const auto& f = children();
      for (auto it = f.rbegin(); it != f.rend(); ++it) t.push_back(it->transpose());
      return product(std::move(t));
    }
    case Kind::Abstract: {
      const auto& a = std::get<detail::AbstractData>(n.payload);
      std::shared_ptr<const LinearOp> inv_t;
      if (a.inverse_of) inv_t = std::make_shared<const LinearOp>(a.inverse_of->transpose());
      return abstract(n.cols, n.rows, a.apply_transpose, a.apply, a.label + "^T", inv_t);
    }
  }
  throw InternalError("transpose: unknown operator kind");
}

// --- inverse ----------------------------------------------------------------

namespace {

LinearOp dense_inverse(const LinearOp& op) {
  const Matrix& m = op.dense_matrix();
  if (m.rows() != m.cols()) throw DimensionError("inverse of non-square dense " + dims(op));
  auto lu = std::make_shared<const Eigen::PartialPivLU<Matrix>>(m);
  stats::record_factorization("lu", m.rows());
  double rcond = lu->rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "dense operator is singular to working precision (rcond estimate " << rcond << ")";
    throw SingularError(os.str());
  }
  return LinearOp::abstract(
      m.rows(), m.cols(), [lu](const Vector& x) -> Vector { return lu->solve(x); },
      [lu](const Vector& x) -> Vector { return lu->transpose().solve(x); }, "lu_inverse",
      std::make_shared<const LinearOp>(op));
}

LinearOp sparse_inverse(const LinearOp& op) {
  const SparseMatrix& m = op.sparse_matrix();
  if (m.rows() != m.cols()) throw DimensionError("inverse of non-square sparse " + dims(op));
  auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu->compute(m);
  stats::record_factorization("sparse_lu", m.rows());
  if (lu->info() != Eigen::Success) throw SingularError("sparse operator is singular");
  auto lut = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  SparseMatrix mt = m.transpose();
  lut->compute(mt);
  return LinearOp::abstract(
      m.rows(), m.cols(), [lu](const Vector& x) -> Vector { return lu->solve(x); },
      [lut](const Vector& x) -> Vector { return lut->solve(x); }, "sparse_lu_inverse",
      std::make_shared<const LinearOp>(op));
}

LinearOp build_inverse(const LinearOp& op) {
  if (op.rows() != op.cols()) throw DimensionError("inverse of non-square operator " + dims(op));
  switch (op.kind()) {
    case Kind::Scalar:
      if (op.scalar_value() == 0.0) throw SingularError("inverse of zero scalar operator");
      return LinearOp::scalar(1.0 / op.scalar_value(), op.rows());
    case Kind::Diagonal: {
      const Vector& d = op.diagonal_values();
      for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d(i) == 0.0)
          throw SingularError("inverse of diagonal operator with zero entry at index " +
                              std::to_string(i));
      return LinearOp::diagonal(d.cwiseInverse());
    }
    case Kind::Dense: return dense_inverse(op);
    case Kind::Sparse: return sparse_inverse(op);
    case Kind::Kron: {
      const auto& l = op.kron_left();
      const auto& r = op.kron_right();
      if (l.rows() != l.cols() || r.rows() != r.cols())
        throw DimensionError("inverse of kron with non-square factors");
      return LinearOp::kron(l.inverse(), r.inverse());
    }
    case Kind::Product: {
      const auto& f = op.children();
      bool all_square = true;
      for (const auto& x : f) all_square = all_square && x.rows() == x.cols();
      if (all_square) {
        std::vector<LinearOp> inv;
        for (auto it = f.rbegin(); it != f.rend(); ++it) inv.push_back(it->inverse());
        return LinearOp::product(std::move(inv));
      }
      return dense_inverse(LinearOp::dense(op.materialize()));
    }
    case Kind::Sum: return dense_inverse(LinearOp::dense(op.materialize()));
    case Kind::Abstract: break;  // only known when wrapping an inverse
  }
  throw SingularError("no inverse available for " + kind_name(op.kind()) + " operator");
}

}  // namespace

LinearOp LinearOp::inverse() const {
  const auto& n = node();
  if (n.kind == Kind::Abstract) {
    const auto& a = std::get<detail::AbstractData>(n.payload);
    if (a.inverse_of) return *a.inverse_of;
  }
  std::call_once(n.inverse_once, [&] { n.inverse_cache = build_inverse(*this); });
  return n.inverse_cache;
}

// --- materialize ------------------------------------------------------------

Matrix LinearOp::materialize(std::int64_t cap) const {
  const auto& n = node();
  if (n.rows * n.cols > cap)
    throw DimensionError("materialize: " + dims(*this) + " exceeds cap of " + std::to_string(cap) +
                         " entries");
  switch (n.kind) {
    case Kind::Dense: return dense_matrix();
    case Kind::Sparse: return Matrix(sparse_matrix());
    case Kind::Diagonal: return diagonal_values().asDiagonal();
    case Kind::Scalar: return scalar_value() * Matrix::Identity(n.rows, n.cols);
    case Kind::Kron: {
      Matrix l = kron_left().materialize(cap), r = kron_right().materialize(cap);
      Matrix out(n.rows, n.cols);
      for (Eigen::Index i = 0; i < l.rows(); ++i)
        for (Eigen::Index j = 0; j < l.cols(); ++j)
          out.block(i * r.rows(), j * r.cols(), r.rows(), r.cols()) = l(i, j) * r;
      return out;
    }
    case Kind::Sum: {
      Matrix out = Matrix::Zero(n.rows, n.cols);
      for (const auto& t : children()) out += t.materialize(cap);
      return out;
    }
    case Kind::Product: {
      const auto& f = children();
      Matrix out = f.front().materialize(cap);
      for (std::size_t i = 1; i < f.size(); ++i) out = out * f[i].materialize(cap);
      return out;
    }
    case Kind::Abstract: {
      Matrix out(n.rows, n.cols);
      for (Eigen::Index j = 0; j < n.cols; ++j) out.col(j) = apply(Vector::Unit(n.cols, j));
      return out;
    }
  }
  throw InternalError("materialize: unknown operator kind");
}

// --- combination ------------------------------------------------------------

namespace {

int density_rank(Kind k) {
  switch (k) {
    case Kind::Dense: return 3;
    case Kind::Sparse: return 2;
    case Kind::Diagonal: return 1;
    case Kind::Scalar: return 0;
    default: return -1;
  }
}

SparseMatrix to_sparse(const LinearOp& a) {
  switch (a.kind()) {
    case Kind::Sparse: return a.sparse_matrix();
    case Kind::Diagonal:
    case Kind::Scalar: {
      Vector d = a.diagonal_vector();
      SparseMatrix s(a.rows(), a.cols());
      s.reserve(Eigen::VectorXi::Constant(a.cols(), 1));
      for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d(i) != 0.0) s.insert(i, i) = d(i);
      s.makeCompressed();
      return s;
    }
    default: throw InternalError("to_sparse on " + kind_name(a.kind()));
  }
}

LinearOp promote_add(const LinearOp& a, const LinearOp& b) {
  const int ra = density_rank(a.kind()), rb = density_rank(b.kind());
  const int top = std::max(ra, rb);
  switch (top) {
    case 0: return LinearOp::scalar(a.scalar_value() + b.scalar_value(), a.rows());
    case 1: return LinearOp::diagonal(a.diagonal_vector() + b.diagonal_vector());
    case 2: return LinearOp::sparse(SparseMatrix(to_sparse(a) + to_sparse(b)));
    default: return LinearOp::dense(a.materialize() + b.materialize());
  }
}

void flatten_into(std::vector<LinearOp>& out, const LinearOp& a, Kind k) {
  if (a.kind() == k) {
    for (const auto& c : a.children()) out.push_back(c);
  } else {
    out.push_back(a);
  }
}

}  // namespace

LinearOp add(const LinearOp& a, const LinearOp& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "add: operator dims differ: " + dims(a) + " vs " + dims(b));
  const int ra = density_rank(a.kind()), rb = density_rank(b.kind());
  if (ra >= 0 && rb >= 0) return promote_add(a, b);
  if (a.kind() == Kind::Kron && b.kind() == Kind::Kron) {
    const auto &al = a.kron_left(), &ar = a.kron_right();
    const auto &bl = b.kron_left(), &br = b.kron_right();
    if (al.rows() == bl.rows() && al.cols() == bl.cols() && structurally_equal(al, bl))
      return LinearOp::kron(al, add(ar, br));
    if (ar.rows() == br.rows() && ar.cols() == br.cols() && structurally_equal(ar, br))
      return LinearOp::kron(add(al, bl), ar);
  }
  std::vector<LinearOp> terms;
  flatten_into(terms, a, Kind::Sum);
  flatten_into(terms, b, Kind::Sum);
  return LinearOp::sum(std::move(terms));
}

LinearOp scale(double alpha, const LinearOp& a) {
  if (alpha == 1.0) return a;
  switch (a.kind()) {
    case Kind::Dense: return LinearOp::dense(alpha * a.dense_matrix());
    case Kind::Sparse: return LinearOp::sparse(SparseMatrix(alpha * a.sparse_matrix()));
    case Kind::Diagonal: return LinearOp::diagonal(alpha * a.diagonal_values());
    case Kind::Scalar: return LinearOp::scalar(alpha * a.scalar_value(), a.rows());
    case Kind::Kron: return LinearOp::kron(scale(alpha, a.kron_left()), a.kron_right());
    default: return LinearOp::product({LinearOp::scalar(alpha, a.rows()), a});
  }
}

LinearOp negate(const LinearOp& a) { return scale(-1.0, a); }

LinearOp compose(const LinearOp& a, const LinearOp& b) {
  require(a.cols() == b.rows(), "compose: " + dims(a) + " * " + dims(b) + " do not chain");
  const Kind ka = a.kind(), kb = b.kind();
  if (ka == Kind::Scalar && kb != Kind::Abstract) return scale(a.scalar_value(), b);
  if (kb == Kind::Scalar && ka != Kind::Abstract) return scale(b.scalar_value(), a);
  if (ka == Kind::Diagonal && kb == Kind::Diagonal)
    return LinearOp::diagonal(a.diagonal_values().cwiseProduct(b.diagonal_values()));
  if (ka == Kind::Diagonal && kb == Kind::Dense)
    return LinearOp::dense(a.diagonal_values().asDiagonal() * b.dense_matrix());
  if (ka == Kind::Dense && kb == Kind::Diagonal)
    return LinearOp::dense(a.dense_matrix() * b.diagonal_values().asDiagonal());
  if (ka == Kind::Diagonal && kb == Kind::Sparse)
    return LinearOp::sparse(SparseMatrix(a.diagonal_values().asDiagonal() * b.sparse_matrix()));
  if (ka == Kind::Sparse && kb == Kind::Diagonal)
    return LinearOp::sparse(SparseMatrix(a.sparse_matrix() * b.diagonal_values().asDiagonal()));
  if (ka == Kind::Sparse && kb == Kind::Sparse)
    return LinearOp::sparse(SparseMatrix(a.sparse_matrix() * b.sparse_matrix()));
  if ((ka == Kind::Dense || ka == Kind::Sparse) && (kb == Kind::Dense || kb == Kind::Sparse)) {
    const auto result = a.rows() * b.cols();
    const auto operands = a.rows() * a.cols() + b.rows() * b.cols();
    if (result <= operands) {
      if (ka == Kind::Dense && kb == Kind::Dense)
        return LinearOp::dense(a.dense_matrix() * b.dense_matrix());
      if (ka == Kind::Dense) return LinearOp::dense(a.dense_matrix() * b.sparse_matrix());
      return LinearOp::dense(a.sparse_matrix() * b.dense_matrix());
    }
  }
  if (ka == Kind::Kron && kb == Kind::Kron) {
    const auto &al = a.kron_left(), &ar = a.kron_right();
    const auto &bl = b.kron_left(), &br = b.kron_right();
    if (al.cols() == bl.rows() && ar.cols() == br.rows())
      return LinearOp::kron(compose(al, bl), compose(ar, br));
  }
  std::vector<LinearOp> factors;
  flatten_into(factors, a, Kind::Product);
  flatten_into(factors, b, Kind::Product);
  return LinearOp::product(std::move(factors));
}

bool structurally_equal(const LinearOp& a, const LinearOp& b) {
  if (a.identity_key() == b.identity_key()) return true;
  if (a.kind() != b.kind() || a.rows() != b.rows() || a.cols() != b.cols()) return false;
  switch (a.kind()) {
    case Kind::Dense: return a.dense_matrix() == b.dense_matrix();
    case Kind::Sparse: {
      const auto &x = a.sparse_matrix(), &y = b.sparse_matrix();
      if (x.nonZeros() != y.nonZeros()) return false;
      return Matrix(x) == Matrix(y);
    }
    case Kind::Diagonal: return a.diagonal_values() == b.diagonal_values();
    case Kind::Scalar: return a.scalar_value() == b.scalar_value();
    case Kind::Kron:
      return structurally_equal(a.kron_left(), b.kron_left()) &&
             structurally_equal(a.kron_right(), b.kron_right());
    case Kind::Sum:
    case Kind::Product: {
      const auto &x = a.children(), &y = b.children();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!structurally_equal(x[i], y[i])) return false;
      return true;
    }
    case Kind::Abstract: return false;
  }
  return false;
}

LinearOp hstack(const std::vector<LinearOp>& blocks) {
  require(!blocks.empty(), "hstack of no blocks");
  if (blocks.size() == 1) return blocks[0];
  std::int64_t total = 0;
  for (const auto& b : blocks) {
    require(b.rows() == blocks[0].rows(), "hstack: row counts differ");
    total += b.cols();
  }
  std::vector<LinearOp> terms;
  std::int64_t offset = 0;
  for (const auto& b : blocks) {
    SparseMatrix sel(b.cols(), total);
    sel.reserve(Eigen::VectorXi::Constant(total, 1));
    for (std::int64_t j = 0; j < b.cols(); ++j) sel.insert(j, offset + j) = 1.0;
    sel.makeCompressed();
    terms.push_back(compose(b, LinearOp::sparse(std::move(sel))));
    offset += b.cols();
  }
  return LinearOp::sum(std::move(terms));
}

}  // namespace proxcomp
