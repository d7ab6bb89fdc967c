#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace proxcomp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

namespace detail {
struct OpNode;
}

// Structured linear operator acting on column-major vectorized data.
//
// Operators are immutable handles; copying shares the underlying node.
// Combination (add/compose) follows the promotion order
// Dense > Sparse > Diagonal > Scalar and the Kronecker identities
//   A (x) B + A (x) C = A (x) (B + C)
//   (A (x) B)(C (x) D) = AC (x) BD
// falling back to Sum/Product nodes when no rule applies.
class LinearOp {
 public:
  enum class Kind { Dense, Sparse, Diagonal, Scalar, Kron, Sum, Product, Abstract };

  using ApplyFn = std::function<Vector(const Vector&)>;

  LinearOp() = default;

  static LinearOp dense(Matrix m);
  static LinearOp sparse(SparseMatrix m);
  static LinearOp diagonal(Vector d);
  static LinearOp scalar(double alpha, std::int64_t n);
  static LinearOp identity(std::int64_t n) { return scalar(1.0, n); }
  static LinearOp kron(LinearOp left, LinearOp right);
  static LinearOp sum(std::vector<LinearOp> terms);
  static LinearOp product(std::vector<LinearOp> factors);
  // `inverse_of` may be empty; it is returned by inverse() when present.
  static LinearOp abstract(std::int64_t rows, std::int64_t cols, ApplyFn apply,
                           ApplyFn apply_transpose, std::string label,
                           std::shared_ptr<const LinearOp> inverse_of = nullptr);

  bool valid() const { return node_ != nullptr; }
  Kind kind() const;
  std::int64_t rows() const;
  std::int64_t cols() const;

  Vector apply(const Vector& x) const;
  LinearOp transpose() const;
  // Cached: the first call builds (and for Dense/Sparse factors) the inverse,
  // later calls return the same operator.
  LinearOp inverse() const;
  Matrix materialize(std::int64_t cap = 4'000'000) const;

  // Number of stored scalars (the size-accounting contract).
  std::int64_t storage() const;

  // Payload accessors; each throws InternalError on a kind mismatch.
  const Matrix& dense_matrix() const;
  const SparseMatrix& sparse_matrix() const;
  const Vector& diagonal_values() const;
  double scalar_value() const;
  const LinearOp& kron_left() const;
  const LinearOp& kron_right() const;
  const std::vector<LinearOp>& children() const;  // Sum terms / Product factors
  const std::string& label() const;               // Abstract only

  bool is_identity() const;
  // Scalar or Diagonal.
  bool is_diagonal_like() const;
  // Diagonal of a Scalar/Diagonal operator as a vector.
  Vector diagonal_vector() const;

  const void* identity_key() const { return node_.get(); }

 private:
  explicit LinearOp(std::shared_ptr<const detail::OpNode> node) : node_(std::move(node)) {}
  const detail::OpNode& node() const;

  std::shared_ptr<const detail::OpNode> node_;
  friend struct detail::OpNode;
};

LinearOp add(const LinearOp& a, const LinearOp& b);
LinearOp compose(const LinearOp& a, const LinearOp& b);
LinearOp scale(double alpha, const LinearOp& a);
LinearOp negate(const LinearOp& a);

// Exact structural equality (same kinds and bitwise-equal payloads).
bool structurally_equal(const LinearOp& a, const LinearOp& b);

// Horizontal concatenation [A_1 ... A_k] as a Sum of A_j composed with
// sparse column selectors.
LinearOp hstack(const std::vector<LinearOp>& blocks);

std::string kind_name(LinearOp::Kind k);

}  // namespace proxcomp
