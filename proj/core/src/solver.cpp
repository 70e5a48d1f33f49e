#include "logcontrast/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "logcontrast/problem.hpp"
#include "logcontrast/prox.hpp"

namespace logcontrast {

namespace {

void check_config(const SolverConfig& cfg) { cfg.validate(); }

SolverState default_state(const ProblemSpec& spec) {
  SolverState st;
  st.x_s = Vector::Ones(spec.N());  // strictly positive scale start
  st.x_b = Vector::Zero(spec.p_total());
  st.h_s = Vector::Zero(spec.N());
  st.h_b = Vector::Zero(spec.n() + spec.m());
  return st;
}

void check_state_dims(const SolverState& st, const ProblemSpec& spec) {
  if (st.x_s.size() != spec.N() || st.x_b.size() != spec.p_total() ||
      st.h_s.size() != spec.N() || st.h_b.size() != spec.n() + spec.m()) {
    throw std::invalid_argument("dr_solve: warm-start state dimensions do not match");
  }
}

void maybe_check_feasibility(const ProblemSpec& spec, const SolverConfig& cfg) {
  if (!cfg.check_feasibility) return;
  const FeasibilityReport rep = check_feasibility(spec);
  if (!rep.pass) {
    std::string msg = "dr_solve: feasibility check failed:";
    for (const auto& w : rep.warnings) msg += "\n  " + w;
    msg += "\nset SolverConfig::check_feasibility = false to solve anyway";
    throw std::invalid_argument(msg);
  }
}

// d_s and the loss segment of d_b from the blockwise prox of g, evaluated at
// the reflected point (2 s - h_s, 2 z_b - h_b); includes the (0, y_i) shift.
void apply_loss_prox(const ProblemSpec& spec, double gamma, const Vector& s,
                     const Vector& h_s, const Vector& z_b, const Vector& h_b,
                     Vector& d_s, Vector& d_b) {
  const Vector& y = spec.design().y;
  for (int i = 0; i < spec.N(); ++i) {
    const int off = spec.block_offset(i);
    const int len = spec.block_size(i);
    const double sigma_in = 2.0 * s[i] - h_s[i];
    if (spec.loss().kind == LossKind::PerspectiveLS) {
      const Vector u_in =
          2.0 * z_b.segment(off, len) - h_b.segment(off, len) - y.segment(off, len);
      const ProxResult pr = prox_perspective_ls(gamma, sigma_in, u_in);
      d_s[i] = pr.sigma;
      d_b.segment(off, len) = y.segment(off, len) + pr.u;
    } else {
      const double u_in = 2.0 * z_b[off] - h_b[off] - y[off];
      const ScalarProxResult pr =
          prox_perspective_huber(gamma, spec.loss().rho, sigma_in, u_in);
      d_s[i] = pr.sigma;
      d_b[off] = y[off] + pr.u;
    }
  }
}

void apply_penalty_prox(const ProblemSpec& spec, double gamma, const Vector& z_b,
                        const Vector& h_b, Vector& d_b) {
  const int n = spec.n();
  for (int j = 0; j < spec.M(); ++j) {
    const int off = n + spec.penalty_offset(j);
    const int len = static_cast<int>(spec.penalties()[static_cast<std::size_t>(j)].L.rows());
    const double lambda = spec.penalties()[static_cast<std::size_t>(j)].lambda;
    d_b.segment(off, len) =
        prox_scaled_l1(gamma, lambda, 2.0 * z_b.segment(off, len) - h_b.segment(off, len));
  }
}

FitResult finalize(const ProblemSpec& spec, const SolverConfig& cfg, SolverState st,
                   bool converged, std::optional<std::vector<double>> history) {
  FitResult fr;
  fr.b_hat = st.b;
  fr.s_hat = st.s;
  fr.converged = converged;
  fr.iterations = st.iteration;
  fr.objective = evaluate_objective(spec, st.s, st.b);
  fr.residuals = spec.full_design() * st.b - spec.design().y;
  fr.history = std::move(history);
  fr.state = std::move(st);
  if (spec.loss().kind == LossKind::PerspectiveHuber &&
      (fr.s_hat.array() > 0.0).all()) {
    fr.outlier_mask = flag_outliers(fr, spec);
  }
  (void)cfg;
  return fr;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("SolverConfig: gamma must be > 0");
  if (!(mu > 0.0 && mu < 2.0)) throw std::invalid_argument("SolverConfig: mu must be in ]0,2[");
  if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
  if (max_iter < 0) throw std::invalid_argument("SolverConfig: max_iter must be >= 0");
}

StackedOperator make_stacked_operator(const ProblemSpec& spec) {
  StackedOperator op;
  const int n = spec.n();
  const int m = spec.m();
  op.A.resize(n + m, spec.p_total());
  op.A.topRows(n) = spec.full_design();
  for (int j = 0; j < spec.M(); ++j) {
    const auto& L = spec.penalties()[static_cast<std::size_t>(j)].L;
    op.A.middleRows(n + spec.penalty_offset(j), L.rows()) = L;
  }
  Matrix G = op.A * op.A.transpose();
  G.diagonal().array() += 1.0;
  op.gram.compute(G);
  if (op.gram.info() != Eigen::Success) {
    throw std::runtime_error("make_stacked_operator: factorization of Id + AA^T failed");
  }
  op.W = build_constraint_projector(spec.constraint().C());
  return op;
}

FitResult dr_solve(const ProblemSpec& spec, const SolverConfig& cfg,
                   const std::optional<SolverState>& init) {
  check_config(cfg);
  maybe_check_feasibility(spec, cfg);

  const StackedOperator op = make_stacked_operator(spec);
  const ScaleProjector proj_D(spec.loss().scale_subspace, spec.N());

  SolverState st = init ? *init : default_state(spec);
  check_state_dims(st, spec);
  st.iteration = 0;

  std::optional<std::vector<double>> history;
  if (cfg.record_history) history.emplace();

  Vector prev_b, prev_s;
  bool converged = false;
  const double mu = cfg.mu;

  for (;;) {
    // u_k = prox_G: half-step through the graph of (s,b) -> (s, Ab).
    st.q_s = st.x_s - st.h_s;
    st.q_b = op.A * st.x_b - st.h_b;
    st.s = st.x_s - 0.5 * st.q_s;
    st.b = st.x_b - op.apply_Q(st.q_b);

    if (cfg.iterate_observer) cfg.iterate_observer(st.iteration, st.s, st.b);

    if (prev_b.size() > 0) {
      st.last_b_step = (st.b - prev_b).norm();
      st.last_s_step = (st.s - prev_s).norm();
      if (history) history->push_back(st.last_b_step);
      if (st.last_b_step < cfg.tol) {
        converged = true;
        break;
      }
    }
    if (st.iteration >= cfg.max_iter) break;

    // Projections of the reflected driving state onto D x E.
    st.c_s = proj_D(2.0 * st.s - st.x_s);
    st.c_b = op.W * (2.0 * st.b - st.x_b);
    st.x_s += mu * (st.c_s - st.s);
    st.x_b += mu * (st.c_b - st.b);

    // Blockwise prox of g at the reflected auxiliary state.
    st.z_b = op.A * st.b;
    st.d_s.resize(spec.N());
    st.d_b.resize(spec.n() + spec.m());
    apply_loss_prox(spec, cfg.gamma, st.s, st.h_s, st.z_b, st.h_b, st.d_s, st.d_b);
    apply_penalty_prox(spec, cfg.gamma, st.z_b, st.h_b, st.d_b);

    st.h_s += mu * (st.d_s - st.s);
    st.h_b += mu * (st.d_b - st.z_b);

    prev_b = st.b;
    prev_s = st.s;
    ++st.iteration;
  }

  return finalize(spec, cfg, std::move(st), converged, std::move(history));
}

FitResult dr_solve_product_space(const ProblemSpec& spec, const SolverConfig& cfg,
                                 const std::optional<SolverState>& init) {
  check_config(cfg);
  maybe_check_feasibility(spec, cfg);

  const int N = spec.N();
  const int pt = spec.p_total();
  const int nm = spec.n() + spec.m();

  // Dense stacked map (s, b) -> (s, A b) of the product-space splitting.
  const StackedOperator op = make_stacked_operator(spec);
  Matrix L = Matrix::Zero(N + nm, N + pt);
  L.topLeftCorner(N, N).setIdentity();
  L.bottomRightCorner(nm, pt) = op.A;
  Matrix G = L * L.transpose();
  G.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> gram(G);
  if (gram.info() != Eigen::Success) {
    throw std::runtime_error("dr_solve_product_space: factorization failed");
  }
  const ScaleProjector proj_D(spec.loss().scale_subspace, N);

  SolverState st0 = init ? *init : default_state(spec);
  check_state_dims(st0, spec);

  Vector x(N + pt), h(N + nm);
  x << st0.x_s, st0.x_b;
  h << st0.h_s, st0.h_b;

  std::optional<std::vector<double>> history;
  if (cfg.record_history) history.emplace();

  Vector prev_b;
  bool converged = false;
  int iteration = 0;
  Vector w(N + pt), z(N + nm), c(N + pt), d(N + nm);

  for (;;) {
    const Vector q = L * x - h;
    w = x - L.transpose() * gram.solve(q);
    z = L * w;

    const Vector s = w.head(N);
    const Vector b = w.tail(pt);
    if (cfg.iterate_observer) cfg.iterate_observer(iteration, s, b);

    if (prev_b.size() > 0) {
      const double step = (b - prev_b).norm();
      if (history) history->push_back(step);
      if (step < cfg.tol) {
        converged = true;
        break;
      }
    }
    if (iteration >= cfg.max_iter) break;

    // prox of F = i_{D x E} + g, componentwise on (w, z).
    const Vector rx = 2.0 * w - x;
    c.head(N) = proj_D(rx.head(N));
    c.tail(pt) = op.W * rx.tail(pt);

    Vector d_s(N);
    d.setZero();
    apply_loss_prox(spec, cfg.gamma, z.head(N), h.head(N), z.tail(nm), h.tail(nm), d_s,
                    d);
    // apply_loss_prox wrote the loss rows of d shifted by y into d's first
    // n entries of the tail layout; reorder into (scale, stacked) layout.
    Vector d_tail = d.head(nm);
    apply_penalty_prox(spec, cfg.gamma, z.tail(nm), h.tail(nm), d_tail);
    d.head(N) = d_s;
    d.tail(nm) = d_tail;

    x += cfg.mu * (c - w);
    h += cfg.mu * (d - z);

    prev_b = b;
    ++iteration;
  }

  SolverState st;
  st.x_s = x.head(N);
  st.x_b = x.tail(pt);
  st.h_s = h.head(N);
  st.h_b = h.tail(nm);
  st.s = w.head(N);
  st.b = w.tail(pt);
  st.z_b = z.tail(nm);
  st.iteration = iteration;
  if (prev_b.size() > 0) st.last_b_step = (st.b - prev_b).norm();

  return finalize(spec, cfg, std::move(st), converged, std::move(history));
}

std::vector<bool> flag_outliers(const FitResult& result, const ProblemSpec& spec) {
  if (spec.loss().kind != LossKind::PerspectiveHuber) {
    throw std::invalid_argument("flag_outliers: requires a Huber fit");
  }
  if (!(result.s_hat.array() > 0.0).all()) {
    throw std::invalid_argument("flag_outliers: fitted scales must be strictly positive");
  }
  const double rho = spec.loss().rho;
  std::vector<bool> mask(static_cast<std::size_t>(spec.n()), false);
  for (int i = 0; i < spec.N(); ++i) {
    const int off = spec.block_offset(i);
    mask[static_cast<std::size_t>(off)] =
        std::abs(result.residuals[off]) > rho * result.s_hat[i];
  }
  return mask;
}

}  // namespace logcontrast
