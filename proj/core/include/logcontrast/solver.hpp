#pragma once

#include <Eigen/Cholesky>
#include <functional>
#include <optional>
#include <vector>

#include "logcontrast/types.hpp"

namespace logcontrast {

struct SolverConfig {
  double gamma = 1.0;      // prox scaling, > 0
  double mu = 1.9;         // relaxation, in ]0,2[
  double tol = 1e-6;       // stop when ||b_k - b_{k+1}||_2 < tol
  int max_iter = 200000;
  bool record_history = false;        // keep per-iteration step norms
  bool check_feasibility = true;      // run the existence checks before solving
  // Called as (k, s_k, b_k) for every computed iterate; test hook.
  std::function<void(int, const Vector&, const Vector&)> iterate_observer;

  void validate() const;
};

/// The Douglas-Rachford driving state (x) and auxiliary state (h), split
/// into scale and regression components, plus the derived per-iteration
/// vectors. Passing a previous state back in warm-starts the solve.
struct SolverState {
  Vector x_s, x_b;  // R^N, R^p_total
  Vector h_s, h_b;  // R^N, R^(n+m)
  Vector s, b;      // current primal iterates
  Vector z_b;       // A b, stacked loss and penalty images
  Vector q_s, q_b;
  Vector c_s, c_b;  // projections of the reflected x
  Vector d_s, d_b;  // prox images of the reflected h
  int iteration = 0;
  double last_b_step = 0.0;
  double last_s_step = 0.0;
};

/// Stacked operator A = [X_1; ...; X_N; L_1; ...; L_M] with the SPD
/// factorization of Id + A A^T (so Q v = A^T (Id + A A^T)^{-1} v is two
/// triangular solves away) and the constraint projector W.
struct StackedOperator {
  Matrix A;                 // (n+m) x p_total
  Eigen::LLT<Matrix> gram;  // factor of Id + A A^T
  Matrix W;                 // p_total x p_total

  Vector apply_Q(const Vector& v) const { return A.transpose() * gram.solve(v); }
};

StackedOperator make_stacked_operator(const ProblemSpec& spec);

struct FitResult {
  Vector b_hat;      // p_total
  Vector s_hat;      // N
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  Vector residuals;  // X b_hat - y, stacked over all n samples
  std::optional<std::vector<bool>> outlier_mask;  // Huber fits only
  std::optional<std::vector<double>> history;     // step norms per iteration
  SolverState state;                              // terminal state, warm-startable
};

/// Exact Douglas-Rachford solve of the problem instance.
///
/// Implements the iteration verbatim: half-step through the graph of
/// (s, b) -> (s, A b), projection onto D x E, relaxed updates with mu, and
/// blockwise perspective / soft-threshold proxes shifted by y. Returns the
/// (s_k, b_k) of the last computed iterate. Non-convergence within max_iter
/// is reported through `converged`, not an exception.
FitResult dr_solve(const ProblemSpec& spec, const SolverConfig& cfg = {},
                   const std::optional<SolverState>& init = std::nullopt);

/// Verification twin: the same problem solved by the generic two-function
/// Douglas-Rachford iteration on the product space R^(N+p) x R^(N+n+m), with
/// F(w,z) = i_{D x E}(w) + g(z) and G the indicator of the graph of the
/// dense stacked map. Iterate-for-iterate equal to dr_solve from identical
/// initialization, up to roundoff. Intended for testing.
FitResult dr_solve_product_space(const ProblemSpec& spec, const SolverConfig& cfg = {},
                                 const std::optional<SolverState>& init = std::nullopt);

/// Outlier mask for a Huber fit: sample i is an outlier iff its residual
/// magnitude exceeds rho * sigma_i (strictly). Throws on non-Huber fits and
/// on nonpositive fitted scales.
std::vector<bool> flag_outliers(const FitResult& result, const ProblemSpec& spec);

}  // namespace logcontrast
