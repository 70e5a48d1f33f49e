#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace logcontrast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Policy for zero entries when closing raw count data onto the simplex.
enum class ZeroPolicy { Reject, Pseudocount };

/// n x p table of strictly positive relative abundances whose rows sum to 1.
///
/// Construction normalizes each row by its sum (closure); entries must be
/// strictly positive beforehand, or come through from_counts with an explicit
/// pseudocount policy. Immutable after construction.
class CompositionTable {
 public:
  /// Rows are renormalized to sum to 1. Every entry must be > 0.
  static CompositionTable from_proportions(Matrix values,
                                           std::vector<std::string> sample_ids,
                                           std::vector<std::string> taxon_ids);

  /// Raw nonnegative counts. ZeroPolicy::Reject refuses zero entries;
  /// ZeroPolicy::Pseudocount adds `pseudocount` to every entry before closure.
  static CompositionTable from_counts(Matrix counts,
                                      std::vector<std::string> sample_ids,
                                      std::vector<std::string> taxon_ids,
                                      ZeroPolicy policy,
                                      double pseudocount = 0.5);

  const Matrix& values() const { return values_; }
  int n() const { return static_cast<int>(values_.rows()); }
  int p() const { return static_cast<int>(values_.cols()); }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<std::string>& taxon_ids() const { return taxon_ids_; }

  const std::optional<std::map<std::string, std::string>>& group_of_taxon() const {
    return group_of_taxon_;
  }
  void set_group_of_taxon(std::map<std::string, std::string> groups);

 private:
  CompositionTable(Matrix values, std::vector<std::string> sample_ids,
                   std::vector<std::string> taxon_ids);

  Matrix values_;
  std::vector<std::string> sample_ids_;
  std::vector<std::string> taxon_ids_;
  std::optional<std::map<std::string, std::string>> group_of_taxon_;
};

/// Log-transformed design: X = log(composition), optional unpenalized
/// covariate block U, and the response y. Row counts must agree.
struct DesignMatrix {
  Matrix X;                 // n x p, elementwise log of a CompositionTable
  std::optional<Matrix> U;  // n x q covariates, unpenalized and unconstrained
  Vector y;                 // n

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  int q() const { return U ? static_cast<int>(U->cols()) : 0; }
  int p_total() const { return p() + q(); }

  /// [X U] with covariate columns appended (just X when q = 0).
  Matrix full() const;

  void validate() const;
};

enum class ConstraintKind { ZeroSum, Groups, Custom };

/// Linear constraints C^T b = 0 on the regression vector. Rows of C
/// corresponding to covariate coordinates are zero, so covariates are
/// unconstrained.
class ConstraintSpec {
 public:
  /// All-ones column on the p compositional coordinates, zeros on covariates.
  static ConstraintSpec zero_sum(int p, int q = 0);

  /// One binary column per group; group_of_coord[j] in {0,...,K-1} assigns
  /// compositional coordinate j to a group. Columns are orthogonal by
  /// construction.
  static ConstraintSpec groups(const std::vector<int>& group_of_coord, int n_groups,
                               int q = 0);

  /// Arbitrary user matrix; must have full column rank.
  static ConstraintSpec custom(Matrix C);

  const Matrix& C() const { return C_; }
  ConstraintKind kind() const { return kind_; }
  int K() const { return static_cast<int>(C_.cols()); }
  int p_total() const { return static_cast<int>(C_.rows()); }

 private:
  ConstraintSpec(Matrix C, ConstraintKind kind);
  Matrix C_;
  ConstraintKind kind_;
};

/// Partition of the n samples into N contiguous loss blocks.
struct BlockPartition {
  std::vector<int> sizes;

  static BlockPartition single(int n) { return BlockPartition{{n}}; }
  static BlockPartition singletons(int n) {
    return BlockPartition{std::vector<int>(static_cast<std::size_t>(n), 1)};
  }

  int N() const { return static_cast<int>(sizes.size()); }
  int total() const;
  void validate(int n) const;
};

enum class LossKind { PerspectiveLS, PerspectiveHuber };
enum class ScaleSubspaceKind { Free, SharedScale, Custom };

/// Subspace D of R^N constraining the scale vector.
struct ScaleSubspace {
  ScaleSubspaceKind kind = ScaleSubspaceKind::Free;
  Matrix basis;  // N x r, only for Custom; must have full column rank

  static ScaleSubspace free() { return {ScaleSubspaceKind::Free, {}}; }
  static ScaleSubspace shared() { return {ScaleSubspaceKind::SharedScale, {}}; }
  static ScaleSubspace custom(Matrix basis) {
    return {ScaleSubspaceKind::Custom, std::move(basis)};
  }
};

/// Per-block loss choice plus the scale-vector subspace.
struct LossSpec {
  LossKind kind = LossKind::PerspectiveLS;
  double rho = 1.345;  // Huber transition point, must be > 1
  ScaleSubspace scale_subspace = ScaleSubspace::free();

  static LossSpec least_squares();
  static LossSpec huber(double rho = 1.345);

  void validate() const;
};

/// One penalty term psi(L b) with psi = lambda * ||.||_1.
struct PenaltyTerm {
  Matrix L;       // m_i x p_total
  double lambda;  // >= 0
};

/// Penalty configuration. The default (made by l1) resolves to a single term
/// whose L selects the compositional coordinates, leaving covariates
/// unpenalized.
struct PenaltySpec {
  double lambda = 0.0;
  std::optional<std::vector<PenaltyTerm>> custom_terms;

  static PenaltySpec l1(double lambda);
  static PenaltySpec custom(std::vector<PenaltyTerm> terms);
};

/// A fully validated instance of the joint scale/regression problem:
///
///   minimize over s in D, b in E   sum_i phi~_i(sigma_i, X_i b - y_i)
///                                  + sum_j lambda_j ||L_j b||_1
///
/// where E = { b : C^T b = 0 } and D is a subspace of R^N. Immutable after
/// construction; safe to share across threads.
class ProblemSpec {
 public:
  static ProblemSpec make(DesignMatrix design, BlockPartition partition, LossSpec loss,
                          ConstraintSpec constraint, std::vector<PenaltyTerm> penalties);

  const DesignMatrix& design() const { return design_; }
  const BlockPartition& partition() const { return partition_; }
  const LossSpec& loss() const { return loss_; }
  const ConstraintSpec& constraint() const { return constraint_; }
  const std::vector<PenaltyTerm>& penalties() const { return penalties_; }

  int n() const { return design_.n(); }
  int p() const { return design_.p(); }
  int q() const { return design_.q(); }
  int p_total() const { return design_.p_total(); }
  int N() const { return partition_.N(); }
  int M() const { return static_cast<int>(penalties_.size()); }

  /// Total penalty output dimension m = sum_j m_j.
  int m() const { return m_; }

  /// Cached [X U] design with covariates appended.
  const Matrix& full_design() const { return full_design_; }

  /// Row offset of loss block i in the design (and in stacked loss vectors).
  int block_offset(int i) const { return block_offsets_[static_cast<std::size_t>(i)]; }
  int block_size(int i) const { return partition_.sizes[static_cast<std::size_t>(i)]; }

  /// Row offset of penalty term j within the stacked m-dimensional range.
  int penalty_offset(int j) const { return penalty_offsets_[static_cast<std::size_t>(j)]; }

  /// Labels for all p_total coordinates (taxa first, then covariates).
  const std::vector<std::string>& coordinate_labels() const { return labels_; }
  void set_coordinate_labels(std::vector<std::string> labels);

  /// Sample labels if the problem was built from a CompositionTable.
  const std::vector<std::string>& sample_labels() const { return sample_labels_; }
  void set_sample_labels(std::vector<std::string> labels);

  /// Number of coordinates hit by at least one penalty term with lambda > 0;
  /// falls back to all coordinates touched by any L_j if every lambda is 0.
  int penalized_coordinate_count() const;

 private:
  ProblemSpec() = default;

  DesignMatrix design_;
  BlockPartition partition_;
  LossSpec loss_;
  ConstraintSpec constraint_ = ConstraintSpec::zero_sum(1, 0);
  std::vector<PenaltyTerm> penalties_;
  Matrix full_design_;
  std::vector<int> block_offsets_;
  std::vector<int> penalty_offsets_;
  std::vector<std::string> labels_;
  std::vector<std::string> sample_labels_;
  int m_ = 0;
};

}  // namespace logcontrast
