#include "logcontrast/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace logcontrast {

double solve_cubic_increasing(double a3, double a1, double a0) {
  if (!(a3 > 0.0)) throw std::invalid_argument("solve_cubic_increasing: a3 must be > 0");
  if (!(a0 >= 0.0)) throw std::invalid_argument("solve_cubic_increasing: a0 must be >= 0");
  if (a1 <= 0.0 && a0 == 0.0) {
    throw std::invalid_argument("solve_cubic_increasing: a1 <= 0 requires a0 > 0");
  }
  if (a0 == 0.0) return 0.0;

  const auto f = [&](double t) { return (a3 * t * t + a1) * t - a0; };
  const double tol = 1e-12 * std::max(1.0, a0);

  // Root bracket. For a1 > 0, f(a0/a1) = a3 (a0/a1)^3 >= 0; for a1 <= 0 the
  // root sits past the stationary point of f.
  double lo = (a1 > 0.0) ? 0.0 : std::sqrt(-a1 / (3.0 * a3));
  double hi;
  if (a1 > 0.0) {
    hi = a0 / a1 + 1.0;
  } else {
    hi = std::max(1.0, 2.0 * lo);
    while (f(hi) <= 0.0) hi *= 2.0;
  }

  double t = std::min(std::cbrt(a0 / a3), hi);
  if (t <= lo) t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double ft = f(t);
    if (std::abs(ft) <= tol) return t;
    if (ft > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double fp = 3.0 * a3 * t * t + a1;
    double next = (fp > 0.0) ? t - ft / fp : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return t;
}

ProxResult prox_perspective_ls(double gamma, double sigma, const Vector& u) {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_perspective_ls: gamma must be > 0");
  const double nu = u.norm();
  if (4.0 * gamma * sigma + nu * nu <= 2.0 * gamma * gamma) {
    return {0.0, Vector::Zero(u.size())};
  }
  // gamma t^3 + 2(2 sigma + 3 gamma) t - 8 ||u|| = 0
  const double t = solve_cubic_increasing(gamma, 2.0 * (2.0 * sigma + 3.0 * gamma), 8.0 * nu);
  ProxResult out;
  out.sigma = sigma + 0.5 * gamma * (0.5 * t * t - 1.0);
  if (nu > 0.0) {
    out.u = u * (1.0 - gamma * t / nu);
  } else {
    out.u = Vector::Zero(u.size());
  }
  if (out.sigma < 0.0) out.sigma = 0.0;  // guard against roundoff at the boundary
  return out;
}

ScalarProxResult prox_perspective_huber(double gamma, double rho, double sigma,
                                        double u) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("prox_perspective_huber: gamma must be > 0");
  }
  if (!(rho > 1.0)) {
    throw std::invalid_argument("prox_perspective_huber: rho must be > 1");
  }
  const double au = std::abs(u);
  // (i)
  if (au <= gamma * rho && au * au <= gamma * (gamma - 2.0 * sigma)) {
    return {0.0, 0.0};
  }
  // (ii)
  if (sigma <= 0.5 * gamma * (1.0 - rho * rho) && au > gamma * rho) {
    return {0.0, (1.0 - gamma * rho / au) * u};
  }
  // (iii)
  if (sigma > 0.5 * gamma * (1.0 - rho * rho) &&
      au >= rho * sigma + 0.5 * gamma * rho * (1.0 + rho * rho)) {
    return {sigma + 0.5 * gamma * (rho * rho - 1.0), (1.0 - gamma * rho / au) * u};
  }
  // (iv): |u|^2 > gamma (gamma - 2 sigma) and |u| < rho sigma + gamma rho (1+rho^2)/2
  if (2.0 * gamma * sigma + au * au <= gamma * gamma) {
    return {0.0, 0.0};
  }
  const double t = (u == 0.0)
                       ? 0.0
                       : solve_cubic_increasing(gamma, 2.0 * sigma + gamma, 2.0 * au);
  double sig_out = sigma + 0.5 * gamma * (t * t - 1.0);
  if (sig_out < 0.0) sig_out = 0.0;
  const double sign = (u > 0.0) ? 1.0 : ((u < 0.0) ? -1.0 : 0.0);
  return {sig_out, u - gamma * t * sign};
}

Vector prox_scaled_l1(double gamma, double lambda, const Vector& v) {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_scaled_l1: gamma must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("prox_scaled_l1: lambda must be >= 0");
  const double t = gamma * lambda;
  return v.unaryExpr([t](double x) {
    const double m = std::abs(x) - t;
    return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
  });
}

ScaleProjector::ScaleProjector(const ScaleSubspace& subspace, int N)
    : kind_(subspace.kind), N_(N) {
  if (kind_ == ScaleSubspaceKind::Custom) {
    if (subspace.basis.rows() != N) {
      throw std::invalid_argument("ScaleProjector: basis must have N rows");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(subspace.basis);
    if (qr.rank() != subspace.basis.cols()) {
      throw std::invalid_argument("ScaleProjector: basis is rank deficient");
    }
    Eigen::HouseholderQR<Matrix> hqr(subspace.basis);
    q_ = Matrix(hqr.householderQ()).leftCols(subspace.basis.cols());
  }
}

Vector ScaleProjector::operator()(const Vector& s) const {
  if (s.size() != N_) throw std::invalid_argument("ScaleProjector: dimension mismatch");
  switch (kind_) {
    case ScaleSubspaceKind::Free:
      return s;
    case ScaleSubspaceKind::SharedScale:
      return Vector::Constant(s.size(), s.mean());
    case ScaleSubspaceKind::Custom:
      return q_ * (q_.transpose() * s);
  }
  return s;
}

Vector project_scale_subspace(const ScaleSubspace& subspace, const Vector& s) {
  return ScaleProjector(subspace, static_cast<int>(s.size()))(s);
}

Matrix build_constraint_projector(const Matrix& C) {
  const Matrix gram = C.transpose() * C;
  Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("build_constraint_projector: C^T C is singular");
  }
  const auto pt = C.rows();
  return Matrix::Identity(pt, pt) - C * lu.solve(C.transpose());
}

}  // namespace logcontrast
