#pragma once

#include <string>
#include <vector>

#include "logcontrast/types.hpp"

namespace logcontrast {

/// Canonical problem construction from a composition table.
///
/// X = log(table values); covariates are appended as unpenalized,
/// unconstrained columns. The block partition and scale subspace follow the
/// loss: least squares uses a single block with one free scale, Huber uses
/// singleton blocks with a shared scale. Set `intercept` to add a column of
/// ones as an extra covariate.
ProblemSpec build_problem(const CompositionTable& table, const Vector& y,
                          const std::optional<Matrix>& covariates, LossSpec loss,
                          const ConstraintSpec& constraint, const PenaltySpec& penalty,
                          bool intercept = false);

/// Existence / coercivity diagnostics for a problem instance.
///
/// Checks, in order: the loss has the form theta + alpha with alpha > 0
/// (alpha = 1/2 for both built-ins), penalties are finite and nonnegative,
/// some active penalty is coercive on E (ker L_j intersected with E trivial),
/// and D contains a strictly positive vector. When the strict penalty
/// coercivity fails (e.g. unpenalized covariates), a refined check asks
/// whether loss rows and active penalty rows together pin down every
/// direction of E, which still guarantees a minimizer.
struct FeasibilityReport {
  bool loss_form_ok = false;        // phi = theta + alpha, alpha > 0
  bool penalty_form_ok = false;     // psi finite, >= 0
  bool penalty_coercive = false;    // some lambda_j > 0 with ker(L_j) cap E = {0}
  bool objective_coercive = false;  // [A_loss; L_active; C^T] has full column rank
  bool scale_cone_ok = false;       // D contains a strictly positive vector
  bool pass = false;
  std::vector<std::string> warnings;
};

FeasibilityReport check_feasibility(const ProblemSpec& spec);

/// Objective value of the problem at (s, b); +infinity outside the loss
/// domain. Membership of b in E and s in D is *not* folded in; use
/// in_constraint_sets for that.
double evaluate_objective(const ProblemSpec& spec, const Vector& s, const Vector& b);

/// Value of the perspective-LS loss at (sigma, u).
double perspective_ls_value(double sigma, const Vector& u);

/// Value of the perspective-Huber loss at (sigma, u), scalar residual.
double perspective_huber_value(double rho, double sigma, double u);

struct ConstraintMembership {
  bool b_in_E = false;
  bool s_in_D = false;
  double e_residual = 0.0;  // ||C^T b||_inf
  double d_distance = 0.0;  // ||s - proj_D s||_inf
};

ConstraintMembership in_constraint_sets(const ProblemSpec& spec, const Vector& s,
                                        const Vector& b, double tol = 1e-9);

/// Same problem with the lambda of the (single) penalty term replaced.
/// Throws when the problem carries more than one penalty term.
ProblemSpec with_lambda(const ProblemSpec& spec, double lambda);

/// Row-restricted problem over the given sample indices (sorted, distinct).
/// Block structure follows the loss convention of build_problem.
ProblemSpec subsample_problem(const ProblemSpec& spec, const std::vector<int>& rows);

/// Column-restricted problem keeping only `support` coordinates. Constraint
/// columns that become all-zero are dropped; penalty matrices are restricted
/// to the surviving columns (zero columns of L are allowed and kept).
ProblemSpec restrict_support(const ProblemSpec& spec, const std::vector<int>& support,
                             double lambda);

}  // namespace logcontrast
