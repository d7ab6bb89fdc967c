#pragma once

#include <utility>

#include "proxcomp/linop.hpp"

// Proximal kernels: prox_{lambda f}(v) = argmin_x lambda f(x) + 1/2 ||x - v||^2.
namespace proxcomp::prox {

// --- soft thresholding family ---
double soft_threshold(double v, double t);
Vector soft_threshold(const Vector& v, double t);
// lambda * max(x, 0)
double prox_hinge(double v, double lambda);
// lambda * max(|x| - eps, 0)
double prox_deadzone(double v, double lambda, double eps);
// lambda * max(alpha x, (alpha - 1) x)
double prox_quantile(double v, double lambda, double alpha);

// --- exact equations ---
double prox_square(double v, double lambda);
double prox_neg_log(double v, double lambda);
// Joint prox of lambda x^2 / y (y > 0) with separate quadratic weights
// wx, wy on the two coordinates. Enumerates the real roots of the cubic
// stationarity condition and the y = 0 boundary, returning the best.
std::pair<double, double> prox_quad_over_lin(double a, double b, double lambda, double wx = 1.0,
                                             double wy = 1.0);

// --- guarded Newton ---
double prox_logistic(double v, double lambda);
double prox_exp(double v, double lambda);
double prox_neg_entropy(double v, double lambda);
double prox_inv_pos(double v, double lambda);
std::pair<double, double> prox_kl_div(double a, double b, double lambda, double wx = 1.0,
                                      double wy = 1.0);
Vector prox_log_sum_exp(const Vector& v, double lambda);

enum class NewtonAtom { Logistic, Exp, NegEntropy, KlDiv, InvPos, LogSumExp };
// Elementwise atoms act per coordinate; KlDiv takes v = (x; y) stacked.
Vector prox_scalar_newton(NewtonAtom atom, const Vector& v, double lambda);

enum class ExactAtom { Square, NegLog, QuadOverLin };
// QuadOverLin takes v = (x; y) stacked.
Vector prox_exact_equation(ExactAtom atom, const Vector& v, double lambda);

// --- projections ---
Vector project_nonneg(const Vector& v);
// Projection onto {(x, t) : ||x||_2 <= kappa t}.
std::pair<Vector, double> project_soc(const Vector& x, double t, double kappa = 1.0);
Matrix project_psd(const Matrix& v);
// Expected linear time (randomized pivot selection with a fixed seed).
Vector project_l1_ball(const Vector& v, double radius);

// --- vector atoms ---
// v - lambda * P_{||.||_1 <= 1}(v / lambda)
Vector prox_linf(const Vector& v, double lambda);
Vector prox_l2_group(const Vector& v, double lambda);
// lambda * sum_i |x_i - x_{i+1}|, linear-time dynamic programming.
Vector prox_fused_lasso(const Vector& v, double lambda);

// --- orthogonally invariant matrix atoms ---
enum class SpectralAtom { NegLogDet, NuclearNorm, SpectralNorm };
Matrix prox_orthogonal_invariant(SpectralAtom atom, const Matrix& v, double lambda);

// --- cone projections (prox of cone indicators) ---
enum class Cone { Zero, Nonneg, Soc, Psd };
struct ConeSpec {
  Cone cone = Cone::Nonneg;
  LinearOp a;  // Zero: {x : a x = b}
  Vector b;
  std::int64_t psd_n = 0;  // Psd: v is vec of an n x n matrix
};
Vector project_cone(const ConeSpec& cone, const Vector& v);

// Generalized sum-of-squares prox:
//   argmin_x lambda ||A_inner x - b||^2 + 1/2 ||A_outer x - v||^2
Vector prox_sum_squares(const Vector& v, double lambda, const LinearOp& a_inner, const Vector& b,
                        const LinearOp& a_outer);

}  // namespace proxcomp::prox
