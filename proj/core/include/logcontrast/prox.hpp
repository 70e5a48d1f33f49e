#pragma once

#include "logcontrast/types.hpp"

namespace logcontrast {

/// Output pair of a perspective-function proximity operator. The scale part
/// is always >= 0: both perspective proxes map into the closed domain.
struct ProxResult {
  double sigma = 0.0;
  Vector u;
};

struct ScalarProxResult {
  double sigma = 0.0;
  double u = 0.0;
};

/// Unique nonnegative root of a3 t^3 + a1 t - a0.
///
/// For a1 > 0 the polynomial is strictly increasing on t >= 0 and the root is
/// bracketed by [0, a0/a1 + 1]; safeguarded Newton with bisection fallback,
/// stopping at residual 1e-12 * max(1, a0). a1 <= 0 is accepted when a0 > 0
/// (the prox cubics can reach that regime); the root then lies past the
/// stationary point sqrt(-a1/(3 a3)) and is still unique.
double solve_cubic_increasing(double a3, double a1, double a0);

/// Prox of gamma times the perspective of ||.||^2 + 1/2 at (sigma, u).
ProxResult prox_perspective_ls(double gamma, double sigma, const Vector& u);

/// Prox of gamma times the perspective of the Huber function h_rho + 1/2 at
/// (sigma, u), scalar residual. Four closed-form cases; ties on the case
/// boundaries resolve to the first matching case in order.
ScalarProxResult prox_perspective_huber(double gamma, double rho, double sigma,
                                        double u);

/// Elementwise soft threshold at gamma * lambda.
Vector prox_scaled_l1(double gamma, double lambda, const Vector& v);

/// Orthogonal projector onto a scale subspace, with the basis factorization
/// cached for Custom subspaces.
class ScaleProjector {
 public:
  ScaleProjector(const ScaleSubspace& subspace, int N);
  Vector operator()(const Vector& s) const;

 private:
  ScaleSubspaceKind kind_;
  Matrix q_;  // orthonormal basis, Custom only
  int N_;
};

/// One-shot projection of s onto D.
Vector project_scale_subspace(const ScaleSubspace& subspace, const Vector& s);

/// W = Id - C (C^T C)^{-1} C^T, the orthogonal projector onto {b : C^T b = 0}.
Matrix build_constraint_projector(const Matrix& C);

}  // namespace logcontrast
