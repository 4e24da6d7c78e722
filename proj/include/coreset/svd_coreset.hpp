#pragma once

#include "coreset/ifa.hpp"
#include "coreset/matrix.hpp"

#include <cstdint>
#include <vector>

namespace coreset {

/// Row i of P is (U_{i,1:k}, U_{i,k+1:r}·σ_tail/‖σ_tail‖, τ); X holds the unit rows P_i/‖P_i‖.
struct LiftedRows {
  DenseMatrix P;
  Vector row_norms;
  DenseMatrix X;
  std::size_t k = 0;
  std::size_t tail_dim = 0;
  double tail_scale = 0.0;
  double sigma_tail_norm_sq = 0.0;
  /// Set when σ_{k+1:r} vanishes; the tail block then has zero width.
  bool exact_rank = false;

  std::size_t size() const { return static_cast<std::size_t>(P.rows()); }
  /// Z = Σᵢ ‖P_i‖².
  double mass() const { return row_norms.squaredNorm(); }
  /// z_i = ‖P_i‖² / Z: the distribution under which Σ z_i X_i X_iᵀ = PᵀP / Z.
  SimplexWeights mass_distribution() const;
};

LiftedRows build_lifted(const SvdFactors& svd, std::size_t k, double tail_scale);

/// Kernel over the outer products X_i X_iᵀ: inner(i, j) = (X_i · X_j)². The d×d matrices
/// are never formed; the target's products use the small Gram Σ z_l X_lᵀ X_l.
class OuterProductOracle final : public PointSetOracle {
 public:
  explicit OuterProductOracle(DenseMatrix unit_rows) : x_(std::move(unit_rows)) {}

  std::size_t size() const override { return static_cast<std::size_t>(x_.rows()); }
  double inner(Index i, Index j) const override;
  void inner_column(Index j, std::span<double> out) const override;
  TargetProducts target_products(const SimplexWeights& z) const override;

 private:
  DenseMatrix x_;
};

struct CoresetResult {
  std::vector<Index> indices;        // sorted, distinct rows of A
  std::vector<double> row_weights;   // W_ii, applied as W_ii · a_i
  double epsilon_target = 0.0;
  /// Z·‖Σ(z_i − w_i) X_i X_iᵀ‖_F = ‖Σ(1 − W²_ii) P_i P_iᵀ‖_F. Query errors are bounded by 5× this value.
  double epsilon_residual = 0.0;
  std::size_t k = 0;
  bool exact = false;
  FwTrace trace;

  std::size_t size() const { return indices.size(); }
  friend bool operator==(const CoresetResult&, const CoresetResult&) = default;
};

struct SvdCoresetOptions {
  std::uint64_t seed = 0;
  FwOptions::Start start = FwOptions::Start::FirstPoint;
  /// Early exit once epsilon_residual drops to this value; epsilon when <= 0.
  double residual_target = 0.0;
  /// Called with the lifted rows once they exist, before the solver runs.
  std::function<void(const LiftedRows&)> on_lifted;
  std::function<void(const FwIterate&)> on_iteration;
};

struct ExtractedWeights {
  std::vector<Index> indices;
  std::vector<double> row_weights;
};

/// W_ii = √(w_i · Z / ‖P_i‖²) on the support of w.
ExtractedWeights extract_weights(const SimplexWeights& w, const LiftedRows& lifted);

/// (ε,k)-coreset of the rows of A: lifts the rows through the SVD, runs the kernelized
/// conditional-gradient solver for at most ⌈k/ε²⌉ steps, and maps the resulting
/// distribution back to row multipliers. Inputs of numerical rank ≤ k are reweighted
/// exactly instead.
CoresetResult svd_coreset(const SparseMatrix& a, std::size_t k, double epsilon,
                          const SvdCoresetOptions& options = {});

/// |1 − ‖WAX‖² / ‖AX‖²| for an orthonormal d×(d−k) X.
double claim_error(const SparseMatrix& a, const CoresetResult& cs, const DenseMatrix& x);

/// The coreset as explicit scaled rows W_ii·a_i (in index order).
SparseMatrix weighted_rows(const SparseMatrix& a, const CoresetResult& cs);

/// ‖Σ_i (1 − W²_ii) P_i P_iᵀ‖_F from explicit outer products (testing aid; O(n·m²)).
double lifted_residual(const LiftedRows& lifted, const SimplexWeights& w);

}  // namespace coreset
