#include "logcontrast/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "logcontrast/prox.hpp"

namespace logcontrast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix compositional_selector(int p, int q) {
  Matrix L = Matrix::Zero(p, p + q);
  L.topLeftCorner(p, p).setIdentity();
  return L;
}

int rank_of(const Matrix& M) {
  Eigen::ColPivHouseholderQR<Matrix> qr(M);
  return static_cast<int>(qr.rank());
}

}  // namespace

ProblemSpec build_problem(const CompositionTable& table, const Vector& y,
                          const std::optional<Matrix>& covariates, LossSpec loss,
                          const ConstraintSpec& constraint, const PenaltySpec& penalty,
                          bool intercept) {
  const int n = table.n();
  const int p = table.p();
  if (y.size() != n) {
    throw std::invalid_argument("build_problem: response length " +
                                std::to_string(y.size()) + " does not match n = " +
                                std::to_string(n));
  }

  DesignMatrix design;
  design.X = table.values().array().log().matrix();
  design.y = y;
  if (covariates && covariates->size() > 0) {
    if (covariates->rows() != n) {
      throw std::invalid_argument("build_problem: covariate rows do not match n");
    }
    design.U = *covariates;
  }
  if (intercept) {
    const int q0 = design.q();
    Matrix U(n, q0 + 1);
    if (q0 > 0) U.leftCols(q0) = *design.U;
    U.col(q0).setOnes();
    design.U = U;
  }
  const int q = design.q();

  BlockPartition partition = (loss.kind == LossKind::PerspectiveHuber)
                                 ? BlockPartition::singletons(n)
                                 : BlockPartition::single(n);

  std::vector<PenaltyTerm> terms;
  if (penalty.custom_terms) {
    terms = *penalty.custom_terms;
  } else {
    if (penalty.lambda < 0.0) throw std::invalid_argument("build_problem: lambda < 0");
    terms.push_back({compositional_selector(p, q), penalty.lambda});
  }

  ProblemSpec spec = ProblemSpec::make(std::move(design), std::move(partition), loss,
                                       constraint, std::move(terms));

  std::vector<std::string> labels = table.taxon_ids();
  const int named_covariates = q - (intercept ? 1 : 0);
  for (int j = 0; j < named_covariates; ++j) labels.push_back("cov" + std::to_string(j));
  if (intercept) labels.push_back("intercept");
  spec.set_coordinate_labels(std::move(labels));
  spec.set_sample_labels(table.sample_ids());
  return spec;
}

double perspective_ls_value(double sigma, const Vector& u) {
  if (sigma > 0.0) return 0.5 * sigma + u.squaredNorm() / sigma;
  if (sigma == 0.0) return u.isZero(0.0) ? 0.0 : kInf;
  return kInf;
}

double perspective_huber_value(double rho, double sigma, double u) {
  const double au = std::abs(u);
  if (sigma > 0.0) {
    if (au > sigma * rho) return 0.5 * (1.0 - rho * rho) * sigma + rho * au;
    return 0.5 * sigma + u * u / (2.0 * sigma);
  }
  if (sigma == 0.0) return rho * au;
  return kInf;
}

double evaluate_objective(const ProblemSpec& spec, const Vector& s, const Vector& b) {
  if (s.size() != spec.N() || b.size() != spec.p_total()) {
    throw std::invalid_argument("evaluate_objective: dimension mismatch");
  }
  const Matrix& F = spec.full_design();
  const Vector r = F * b - spec.design().y;

  double total = 0.0;
  for (int i = 0; i < spec.N(); ++i) {
    const auto seg = r.segment(spec.block_offset(i), spec.block_size(i));
    double v;
    if (spec.loss().kind == LossKind::PerspectiveLS) {
      v = perspective_ls_value(s[i], seg);
    } else {
      v = perspective_huber_value(spec.loss().rho, s[i], seg[0]);
    }
    if (v == kInf) return kInf;
    total += v;
  }
  for (const auto& t : spec.penalties()) {
    total += t.lambda * (t.L * b).lpNorm<1>();
  }
  return total;
}

ConstraintMembership in_constraint_sets(const ProblemSpec& spec, const Vector& s,
                                        const Vector& b, double tol) {
  ConstraintMembership m;
  m.e_residual = (spec.constraint().C().transpose() * b).lpNorm<Eigen::Infinity>();
  const Vector proj = project_scale_subspace(spec.loss().scale_subspace, s);
  m.d_distance = (s - proj).lpNorm<Eigen::Infinity>();
  m.b_in_E = m.e_residual <= tol * (1.0 + b.lpNorm<Eigen::Infinity>());
  m.s_in_D = m.d_distance <= tol * (1.0 + s.lpNorm<Eigen::Infinity>());
  return m;
}

FeasibilityReport check_feasibility(const ProblemSpec& spec) {
  FeasibilityReport rep;
  const int pt = spec.p_total();
  const Matrix Ct = spec.constraint().C().transpose();

  // Both built-in losses are theta + 1/2 with theta >= 0 convex.
  rep.loss_form_ok = true;
  rep.penalty_form_ok = true;

  rep.penalty_coercive = false;
  for (const auto& t : spec.penalties()) {
    if (t.lambda <= 0.0) continue;
    Matrix stacked(t.L.rows() + Ct.rows(), pt);
    stacked << t.L, Ct;
    if (rank_of(stacked) == pt) {
      rep.penalty_coercive = true;
      break;
    }
  }
  if (!rep.penalty_coercive) {
    rep.warnings.push_back(
        "penalty coercivity: no penalty term with lambda > 0 is coercive on the "
        "constraint subspace");
  }

  {
    int rows = spec.n() + Ct.rows();
    for (const auto& t : spec.penalties()) {
      if (t.lambda > 0.0) rows += static_cast<int>(t.L.rows());
    }
    Matrix stacked(rows, pt);
    int off = 0;
    stacked.topRows(spec.n()) = spec.full_design();
    off += spec.n();
    for (const auto& t : spec.penalties()) {
      if (t.lambda > 0.0) {
        stacked.middleRows(off, t.L.rows()) = t.L;
        off += static_cast<int>(t.L.rows());
      }
    }
    stacked.bottomRows(Ct.rows()) = Ct;
    rep.objective_coercive = rank_of(stacked) == pt;
  }
  if (!rep.objective_coercive && !rep.penalty_coercive) {
    rep.warnings.push_back(
        "objective coercivity: loss and active penalties leave an unbounded "
        "direction in the constraint subspace");
  }

  {
    const Vector ones = Vector::Ones(spec.N());
    const Vector proj = project_scale_subspace(spec.loss().scale_subspace, ones);
    rep.scale_cone_ok = (proj.array() > 0.0).all();
    if (!rep.scale_cone_ok) {
      rep.warnings.push_back(
          "scale subspace: projection of the all-ones vector is not strictly "
          "positive, so no strictly positive scale vector was found in D");
    }
  }

  rep.pass = rep.loss_form_ok && rep.penalty_form_ok && rep.scale_cone_ok &&
             (rep.penalty_coercive || rep.objective_coercive);
  return rep;
}

ProblemSpec with_lambda(const ProblemSpec& spec, double lambda) {
  if (spec.M() != 1) {
    throw std::invalid_argument("with_lambda: problem must have a single penalty term");
  }
  std::vector<PenaltyTerm> terms = spec.penalties();
  terms[0].lambda = lambda;
  ProblemSpec out = ProblemSpec::make(spec.design(), spec.partition(), spec.loss(),
                                      spec.constraint(), std::move(terms));
  out.set_coordinate_labels(spec.coordinate_labels());
  out.set_sample_labels(spec.sample_labels());
  return out;
}

ProblemSpec subsample_problem(const ProblemSpec& spec, const std::vector<int>& rows) {
  const int ns = static_cast<int>(rows.size());
  if (ns < 1) throw std::invalid_argument("subsample_problem: empty row set");
  const bool singleton = spec.N() == spec.n();
  if (!singleton && spec.N() != 1) {
    throw std::invalid_argument(
        "subsample_problem: only single-block or singleton partitions supported");
  }
  if (spec.loss().scale_subspace.kind == ScaleSubspaceKind::Custom) {
    throw std::invalid_argument(
        "subsample_problem: custom scale subspaces cannot be resized");
  }

  DesignMatrix d;
  d.X.resize(ns, spec.p());
  d.y.resize(ns);
  if (spec.design().U) d.U = Matrix(ns, spec.q());
  for (int i = 0; i < ns; ++i) {
    const int r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= spec.n()) {
      throw std::invalid_argument("subsample_problem: row index out of range");
    }
    d.X.row(i) = spec.design().X.row(r);
    d.y[i] = spec.design().y[r];
    if (d.U) d.U->row(i) = spec.design().U->row(r);
  }

  BlockPartition part =
      singleton ? BlockPartition::singletons(ns) : BlockPartition::single(ns);
  ProblemSpec out = ProblemSpec::make(std::move(d), std::move(part), spec.loss(),
                                      spec.constraint(), spec.penalties());
  out.set_coordinate_labels(spec.coordinate_labels());
  std::vector<std::string> sl;
  sl.reserve(rows.size());
  for (int r : rows) sl.push_back(spec.sample_labels()[static_cast<std::size_t>(r)]);
  out.set_sample_labels(std::move(sl));
  return out;
}

ProblemSpec restrict_support(const ProblemSpec& spec, const std::vector<int>& support,
                             double lambda) {
  if (support.empty()) throw std::invalid_argument("restrict_support: empty support");
  for (std::size_t i = 0; i < support.size(); ++i) {
    const int j = support[i];
    if (j < 0 || j >= spec.p_total()) {
      throw std::invalid_argument("restrict_support: coordinate out of range");
    }
    if (i > 0 && support[i] <= support[i - 1]) {
      throw std::invalid_argument("restrict_support: support must be sorted, distinct");
    }
  }
  const int ps = static_cast<int>(support.size());
  int comp_count = 0;
  for (int j : support) {
    if (j < spec.p()) ++comp_count;
  }
  const int cov_count = ps - comp_count;

  DesignMatrix d;
  d.X.resize(spec.n(), comp_count);
  d.y = spec.design().y;
  if (cov_count > 0) d.U = Matrix(spec.n(), cov_count);
  {
    int cx = 0, cu = 0;
    for (int j : support) {
      if (j < spec.p()) {
        d.X.col(cx++) = spec.design().X.col(j);
      } else {
        d.U->col(cu++) = spec.full_design().col(j);
      }
    }
  }

  // Constraint: take the support rows, drop columns that become all zero
  // (groups with no surviving member), and require the rest independent.
  Matrix Cs(ps, spec.constraint().C().cols());
  for (int i = 0; i < ps; ++i) {
    Cs.row(i) = spec.constraint().C().row(support[static_cast<std::size_t>(i)]);
  }
  std::vector<int> keep;
  for (int c = 0; c < Cs.cols(); ++c) {
    if (Cs.col(c).cwiseAbs().maxCoeff() > 0.0) keep.push_back(c);
  }
  if (keep.empty()) {
    throw std::invalid_argument(
        "restrict_support: no constraint column survives the given support");
  }
  Matrix Ck(ps, static_cast<int>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    Ck.col(static_cast<int>(c)) = Cs.col(keep[c]);
  }
  ConstraintSpec constraint = ConstraintSpec::custom(std::move(Ck));

  // Penalties: column-restrict each L, prune rows that vanish.
  std::vector<PenaltyTerm> terms;
  for (const auto& t : spec.penalties()) {
    Matrix Lc(t.L.rows(), ps);
    for (int i = 0; i < ps; ++i) {
      Lc.col(i) = t.L.col(support[static_cast<std::size_t>(i)]);
    }
    std::vector<int> live;
    for (int r = 0; r < Lc.rows(); ++r) {
      if (Lc.row(r).cwiseAbs().maxCoeff() > 0.0) live.push_back(r);
    }
    if (live.empty()) continue;
    Matrix Lr(static_cast<int>(live.size()), ps);
    for (std::size_t r = 0; r < live.size(); ++r) {
      Lr.row(static_cast<int>(r)) = Lc.row(live[r]);
    }
    terms.push_back({std::move(Lr), lambda});
  }
  if (terms.empty()) {
    throw std::invalid_argument(
        "restrict_support: every penalty row vanishes on the given support");
  }

  BlockPartition part = (spec.N() == spec.n()) ? BlockPartition::singletons(spec.n())
                                               : spec.partition();
  ProblemSpec out = ProblemSpec::make(std::move(d), part, spec.loss(),
                                      std::move(constraint), std::move(terms));
  std::vector<std::string> labels;
  labels.reserve(support.size());
  for (int j : support) labels.push_back(spec.coordinate_labels()[static_cast<std::size_t>(j)]);
  out.set_coordinate_labels(std::move(labels));
  out.set_sample_labels(spec.sample_labels());
  return out;
}

}  // namespace logcontrast
