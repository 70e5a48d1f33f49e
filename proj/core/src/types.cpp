#include "logcontrast/types.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace logcontrast {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string cell(int i, int j) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// CompositionTable

CompositionTable::CompositionTable(Matrix values, std::vector<std::string> sample_ids,
                                   std::vector<std::string> taxon_ids)
    : values_(std::move(values)),
      sample_ids_(std::move(sample_ids)),
      taxon_ids_(std::move(taxon_ids)) {
  require(values_.rows() > 0 && values_.cols() > 0,
          "CompositionTable: matrix must be nonempty");
  require(static_cast<int>(sample_ids_.size()) == values_.rows(),
          "CompositionTable: sample label count does not match row count");
  require(static_cast<int>(taxon_ids_.size()) == values_.cols(),
          "CompositionTable: taxon label count does not match column count");
  for (int i = 0; i < values_.rows(); ++i) {
    for (int j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      require(std::isfinite(v) && v > 0.0,
              "CompositionTable: entry " + cell(i, j) + " is not strictly positive");
    }
    const double rs = values_.row(i).sum();
    values_.row(i) /= rs;
    const double check = values_.row(i).sum();
    require(check > 1.0 - 1e-6 && check < 1.0 + 1e-6,
            "CompositionTable: row " + std::to_string(i) + " failed closure");
  }
}

CompositionTable CompositionTable::from_proportions(Matrix values,
                                                    std::vector<std::string> sample_ids,
                                                    std::vector<std::string> taxon_ids) {
  return CompositionTable(std::move(values), std::move(sample_ids), std::move(taxon_ids));
}

CompositionTable CompositionTable::from_counts(Matrix counts,
                                               std::vector<std::string> sample_ids,
                                               std::vector<std::string> taxon_ids,
                                               ZeroPolicy policy, double pseudocount) {
  for (int i = 0; i < counts.rows(); ++i) {
    bool all_zero = true;
    for (int j = 0; j < counts.cols(); ++j) {
      const double v = counts(i, j);
      require(std::isfinite(v) && v >= 0.0,
              "CompositionTable: negative count at " + cell(i, j));
      if (v > 0.0) all_zero = false;
      if (v == 0.0 && policy == ZeroPolicy::Reject) {
        throw std::invalid_argument("CompositionTable: zero count at " + cell(i, j) +
                                    "; rerun with a pseudocount policy to keep it");
      }
    }
    require(!all_zero, "CompositionTable: row " + std::to_string(i) + " is all zero");
  }
  if (policy == ZeroPolicy::Pseudocount) {
    require(pseudocount > 0.0, "CompositionTable: pseudocount must be positive");
    counts.array() += pseudocount;
  }
  return CompositionTable(std::move(counts), std::move(sample_ids), std::move(taxon_ids));
}

void CompositionTable::set_group_of_taxon(std::map<std::string, std::string> groups) {
  for (const auto& t : taxon_ids_) {
    require(groups.count(t) == 1,
            "CompositionTable: taxon '" + t + "' has no group assignment");
  }
  group_of_taxon_ = std::move(groups);
}

// ---------------------------------------------------------------------------
// DesignMatrix

Matrix DesignMatrix::full() const {
  if (!U) return X;
  Matrix F(X.rows(), X.cols() + U->cols());
  F << X, *U;
  return F;
}

void DesignMatrix::validate() const {
  require(X.rows() > 0 && X.cols() > 0, "DesignMatrix: X must be nonempty");
  require(y.size() == X.rows(), "DesignMatrix: response length does not match X rows");
  if (U) {
    require(U->rows() == X.rows(), "DesignMatrix: covariate rows do not match X rows");
  }
  require(X.allFinite(), "DesignMatrix: X contains non-finite entries");
  require(y.allFinite(), "DesignMatrix: y contains non-finite entries");
  if (U) require(U->allFinite(), "DesignMatrix: U contains non-finite entries");
}

// ---------------------------------------------------------------------------
// ConstraintSpec

ConstraintSpec::ConstraintSpec(Matrix C, ConstraintKind kind)
    : C_(std::move(C)), kind_(kind) {
  require(C_.rows() > 0 && C_.cols() > 0, "ConstraintSpec: C must be nonempty");
  Eigen::ColPivHouseholderQR<Matrix> qr(C_);
  require(qr.rank() == C_.cols(), "ConstraintSpec: C must have full column rank");
}

ConstraintSpec ConstraintSpec::zero_sum(int p, int q) {
  require(p >= 1 && q >= 0, "ConstraintSpec::zero_sum: need p >= 1, q >= 0");
  Matrix C = Matrix::Zero(p + q, 1);
  C.topRows(p).setOnes();
  return ConstraintSpec(std::move(C), ConstraintKind::ZeroSum);
}

ConstraintSpec ConstraintSpec::groups(const std::vector<int>& group_of_coord,
                                      int n_groups, int q) {
  const int p = static_cast<int>(group_of_coord.size());
  require(p >= 1 && n_groups >= 1 && q >= 0, "ConstraintSpec::groups: bad dimensions");
  Matrix C = Matrix::Zero(p + q, n_groups);
  for (int j = 0; j < p; ++j) {
    const int g = group_of_coord[static_cast<std::size_t>(j)];
    require(g >= 0 && g < n_groups, "ConstraintSpec::groups: coordinate " +
                                        std::to_string(j) + " has group out of range");
    C(j, g) = 1.0;
  }
  for (int g = 0; g < n_groups; ++g) {
    require(C.col(g).sum() > 0.0,
            "ConstraintSpec::groups: group " + std::to_string(g) + " is empty");
  }
  return ConstraintSpec(std::move(C), ConstraintKind::Groups);
}

ConstraintSpec ConstraintSpec::custom(Matrix C) {
  return ConstraintSpec(std::move(C), ConstraintKind::Custom);
}

// ---------------------------------------------------------------------------
// BlockPartition

int BlockPartition::total() const {
  return std::accumulate(sizes.begin(), sizes.end(), 0);
}

void BlockPartition::validate(int n) const {
  require(!sizes.empty(), "BlockPartition: must have at least one block");
  for (int s : sizes) require(s >= 1, "BlockPartition: block sizes must be >= 1");
  require(total() == n, "BlockPartition: block sizes must sum to the sample count");
}

// ---------------------------------------------------------------------------
// LossSpec / PenaltySpec

LossSpec LossSpec::least_squares() {
  return LossSpec{LossKind::PerspectiveLS, 1.345, ScaleSubspace::free()};
}

LossSpec LossSpec::huber(double rho) {
  return LossSpec{LossKind::PerspectiveHuber, rho, ScaleSubspace::shared()};
}

void LossSpec::validate() const {
  if (kind == LossKind::PerspectiveHuber) {
    require(rho > 1.0, "LossSpec: Huber rho must be > 1");
  }
  if (scale_subspace.kind == ScaleSubspaceKind::Custom) {
    require(scale_subspace.basis.rows() > 0 && scale_subspace.basis.cols() > 0,
            "LossSpec: custom scale subspace needs a basis matrix");
  }
}

PenaltySpec PenaltySpec::l1(double lambda) {
  require(lambda >= 0.0, "PenaltySpec: lambda must be >= 0");
  return PenaltySpec{lambda, std::nullopt};
}

PenaltySpec PenaltySpec::custom(std::vector<PenaltyTerm> terms) {
  require(!terms.empty(), "PenaltySpec: custom penalty needs at least one term");
  PenaltySpec s;
  s.custom_terms = std::move(terms);
  return s;
}

// ---------------------------------------------------------------------------
// ProblemSpec

ProblemSpec ProblemSpec::make(DesignMatrix design, BlockPartition partition,
                              LossSpec loss, ConstraintSpec constraint,
                              std::vector<PenaltyTerm> penalties) {
  design.validate();
  partition.validate(design.n());
  loss.validate();
  require(!penalties.empty(), "ProblemSpec: at least one penalty term required");

  const int pt = design.p_total();
  require(constraint.p_total() == pt,
          "ProblemSpec: constraint row count must equal p + q = " + std::to_string(pt));

  if (loss.kind == LossKind::PerspectiveHuber) {
    for (int s : partition.sizes) {
      require(s == 1, "ProblemSpec: Huber loss requires singleton blocks");
    }
  }
  const int N = partition.N();
  if (loss.scale_subspace.kind == ScaleSubspaceKind::Custom) {
    require(loss.scale_subspace.basis.rows() == N,
            "ProblemSpec: scale subspace basis must have N rows");
    Eigen::ColPivHouseholderQR<Matrix> qr(loss.scale_subspace.basis);
    require(qr.rank() == loss.scale_subspace.basis.cols(),
            "ProblemSpec: scale subspace basis is rank deficient");
  }

  ProblemSpec spec;
  spec.design_ = std::move(design);
  spec.partition_ = std::move(partition);
  spec.loss_ = loss;
  spec.constraint_ = std::move(constraint);
  spec.penalties_ = std::move(penalties);
  spec.full_design_ = spec.design_.full();

  spec.block_offsets_.resize(static_cast<std::size_t>(N));
  int off = 0;
  for (int i = 0; i < N; ++i) {
    spec.block_offsets_[static_cast<std::size_t>(i)] = off;
    off += spec.partition_.sizes[static_cast<std::size_t>(i)];
  }

  spec.penalty_offsets_.resize(spec.penalties_.size());
  int moff = 0;
  for (std::size_t j = 0; j < spec.penalties_.size(); ++j) {
    const auto& t = spec.penalties_[j];
    require(t.lambda >= 0.0, "ProblemSpec: penalty lambda must be >= 0");
    require(t.L.cols() == pt,
            "ProblemSpec: penalty matrix " + std::to_string(j) + " must have " +
                std::to_string(pt) + " columns");
    require(t.L.rows() >= 1, "ProblemSpec: penalty matrix must be nonempty");
    spec.penalty_offsets_[j] = moff;
    moff += static_cast<int>(t.L.rows());
  }
  spec.m_ = moff;

  spec.labels_.reserve(static_cast<std::size_t>(pt));
  for (int j = 0; j < spec.p(); ++j) spec.labels_.push_back("x" + std::to_string(j));
  for (int j = 0; j < spec.q(); ++j) spec.labels_.push_back("cov" + std::to_string(j));
  spec.sample_labels_.reserve(static_cast<std::size_t>(spec.n()));
  for (int i = 0; i < spec.n(); ++i) spec.sample_labels_.push_back("s" + std::to_string(i));
  return spec;
}

void ProblemSpec::set_coordinate_labels(std::vector<std::string> labels) {
  require(static_cast<int>(labels.size()) == p_total(),
          "ProblemSpec: need one label per coordinate");
  labels_ = std::move(labels);
}

void ProblemSpec::set_sample_labels(std::vector<std::string> labels) {
  require(static_cast<int>(labels.size()) == n(),
          "ProblemSpec: need one label per sample");
  sample_labels_ = std::move(labels);
}

int ProblemSpec::penalized_coordinate_count() const {
  std::vector<bool> hit(static_cast<std::size_t>(p_total()), false);
  bool any_positive = false;
  for (const auto& t : penalties_) {
    if (t.lambda > 0.0) any_positive = true;
  }
  for (const auto& t : penalties_) {
    if (any_positive && t.lambda == 0.0) continue;
    for (int j = 0; j < t.L.cols(); ++j) {
      if (t.L.col(j).cwiseAbs().maxCoeff() > 0.0) hit[static_cast<std::size_t>(j)] = true;
    }
  }
  int count = 0;
  for (bool h : hit) count += h ? 1 : 0;
  return count;
}

}  // namespace logcontrast
