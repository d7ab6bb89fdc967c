#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "proxcomp/dim.hpp"
#include "proxcomp/linop.hpp"

namespace proxcomp::prox {

enum class Method {
  ExactEquation,
  SoftThreshold,
  Newton,
  Projection,
  OrthogonallyInvariant,
  SpecialPurpose,
  LeastSquares,
};

// Class of inner map H a prox kernel accepts for each argument.
enum class InnerMap {
  ElementwiseAffine,  // diagonal (or scalar) map plus offset
  ScalarAffine,       // scalar map plus offset
  VariableOnly,       // a bare variable
  GeneralAffine,      // any linear operator plus offset
};

// How the quadratic coupling weight may vary across the kernel input.
enum class WeightSupport { Uniform, PerArgument, PerCoordinate };

struct KernelInput {
  const Vector& center;  // concatenated argument-space centers
  const Vector& weight;  // matching per-coordinate quadratic weights
  double lambda;
  const std::vector<double>& params;
  const std::vector<Dim>& arg_dims;
};

// Solves argmin_z lambda f(z) + 1/2 sum_i weight_i (z_i - center_i)^2.
using Kernel = std::function<Vector(const KernelInput&)>;
// Function value on argument values; indicators return 0 or +inf.
using ValueFn = std::function<double(const std::vector<Matrix>&, const std::vector<double>&)>;

struct ProxFunction {
  std::string name;
  int arity = 1;
  int num_params = 0;
  Method method = Method::SoftThreshold;
  InnerMap inner = InnerMap::ElementwiseAffine;
  WeightSupport weights = WeightSupport::PerCoordinate;
  // null, zero, sum_squares and affine accept a general outer map A; their
  // generalized prox reduces to a linear solve.
  bool least_squares = false;
  bool cone = false;
  Kernel kernel;
  ValueFn value;
};

const ProxFunction* find_prox(const std::string& name);
const ProxFunction& lookup_prox(const std::string& name);
std::vector<std::string> prox_names();

std::string method_name(Method m);

// Feasibility tolerance used by indicator values.
bool within_tolerance(double violation, double scale);

// One argument of a prox term, in block coordinates:
//   arg = map * x[start : start + length] + offset, reshaped to `dim`.
struct ArgumentMap {
  std::int64_t start = 0;
  std::int64_t length = 0;
  LinearOp map;
  Vector offset;
  Dim dim;
};

// The generalized prox subproblem
//   argmin_x lambda f(H x) + 1/2 x^T Q x - r^T x,
// which with Q = A^T A and r = A^T v is
//   argmin_x lambda f(H x) + 1/2 ||A x - v||^2.
struct GeneralizedProx {
  const ProxFunction* function = nullptr;
  std::vector<double> params;
  std::int64_t block_size = 0;
  std::vector<ArgumentMap> args;
  LinearOp quad;
  double lambda = 1.0;
};

// A generalized prox with its factorizations computed once up front;
// solve() is then cheap and thread-safe.
class PreparedProx {
 public:
  explicit PreparedProx(GeneralizedProx problem);
  ~PreparedProx();
  PreparedProx(PreparedProx&&) noexcept;
  PreparedProx& operator=(PreparedProx&&) noexcept;

  // `current` is the previous iterate; coordinates with zero curvature in Q
  // take a unit proximal-point step around it.
  Vector solve(const Vector& r, const Vector& current) const;
  const GeneralizedProx& problem() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Spec-level request: argmin_x lambda f(H x) + 1/2 ||A x - v||^2.
struct ProxRequest {
  Vector v;
  double lambda = 1.0;
  std::vector<ArgumentMap> inner;  // H, one entry per argument
  LinearOp outer;                  // A
  std::vector<double> params;
};

Vector eval_prox(const ProxFunction& f, const ProxRequest& request);

}  // namespace proxcomp::prox
