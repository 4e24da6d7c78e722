#pragma once

#include "coreset/matrix.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace coreset {

/// Sparse probability distribution over n items. Stored weights are strictly positive.
class SimplexWeights {
 public:
  SimplexWeights() = default;
  /// Validates: indices < n, weights > 0, Σ weights = 1 within 1e-9.
  SimplexWeights(std::size_t n, std::map<Index, double> weights);

  static SimplexWeights uniform(std::size_t n);
  static SimplexWeights vertex(std::size_t n, Index i);
  /// Drops non-positive entries and renormalizes.
  static SimplexWeights from_dense(std::span<const double> dense);

  std::size_t n() const noexcept { return n_; }
  std::size_t support_size() const noexcept { return weights_.size(); }
  const std::map<Index, double>& entries() const noexcept { return weights_; }
  double at(Index i) const;
  std::vector<double> to_dense() const;

  friend bool operator==(const SimplexWeights&, const SimplexWeights&) = default;

 private:
  std::size_t n_ = 0;
  std::map<Index, double> weights_;
};

/// Inner products of the target point μ = Σ z_i a_i with every point, plus ‖μ‖².
struct TargetProducts {
  std::vector<double> inner;
  double norm_sq = 0.0;
};

/// Kernel access to a finite point set: the solver only ever sees inner products, so the
/// points may live in a space that is never materialized.
class PointSetOracle {
 public:
  virtual ~PointSetOracle() = default;

  virtual std::size_t size() const = 0;
  virtual double inner(Index i, Index j) const = 0;
  /// out[i] = inner(i, j) for every i.
  virtual void inner_column(Index j, std::span<double> out) const;
  /// Generic O(n·|supp z|) evaluation; implementations override with closed forms.
  virtual TargetProducts target_products(const SimplexWeights& z) const;
};

/// Points held as explicit rows of a dense matrix.
class ExplicitVectorOracle final : public PointSetOracle {
 public:
  explicit ExplicitVectorOracle(DenseMatrix points) : points_(std::move(points)) {}

  std::size_t size() const override { return static_cast<std::size_t>(points_.rows()); }
  double inner(Index i, Index j) const override;
  void inner_column(Index j, std::span<double> out) const override;
  TargetProducts target_products(const SimplexWeights& z) const override;

  const DenseMatrix& points() const noexcept { return points_; }

 private:
  DenseMatrix points_;
};

struct FwTrace {
  /// Initialization counts as the first iteration.
  std::size_t iterations = 0;
  std::vector<double> residual_norm_per_iter;
  std::vector<Index> selected_indices;
  /// Step length toward the selected vertex; the initialization records 1.
  std::vector<double> alphas;

  friend bool operator==(const FwTrace&, const FwTrace&) = default;
};

/// Per-iteration snapshot handed to FwOptions::on_iteration.
struct FwIterate {
  std::size_t iteration;
  std::span<const double> weights;  // dense, length n
  double residual_sq;               // recursively maintained value
};

struct FwOptions {
  enum class Start { FirstPoint, NearestVertex };
  Start start = Start::FirstPoint;
  /// Gram columns are cached while (cached columns) x n stays below this many doubles.
  std::size_t column_cache_budget = std::size_t{1} << 24;
  std::function<void(const FwIterate&)> on_iteration;
};

struct FwResult {
  SimplexWeights weights;
  FwTrace trace;
  double residual = 0.0;
};

/// Sparse ℓ2 approximation of μ = Σ z_i a_i by Σ w_i a_i with conditional-gradient steps
/// and exact line search. Runs at most min(max_iter, ⌈1/ε²⌉) steps after initialization
/// and stops early once the residual is ≤ ε, on a degenerate step, or when the step
/// length falls below 1e-12. The residual ‖Σ(z_i − w_i) a_i‖ is tracked from inner
/// products only.
FwResult frank_wolfe(const PointSetOracle& oracle, const SimplexWeights& z, double epsilon,
                     std::size_t max_iter, const FwOptions& options = {});

/// Overload taking precomputed target products (must correspond to z).
FwResult frank_wolfe(const PointSetOracle& oracle, const TargetProducts& target, double epsilon,
                     std::size_t max_iter, const FwOptions& options = {});

/// Scalars describing the segment from the current center c = Σ w_i a_i to vertex a_j.
struct LineSearchState {
  double a = 0.0;               // ⟨c, a_j⟩
  double b = 0.0;               // ⟨c, μ⟩ − ⟨a_j, μ⟩
  double c = 0.0;               // ‖c‖²
  double vertex_norm_sq = 1.0;  // ‖a_j‖²
};

/// Exact minimizer over [0,1] of ‖(1−α)c + α a_j − μ‖². Throws DegenerateStep when
/// |‖a_j − c‖²| < 1e-15.
double line_search_alpha(const LineSearchState& state);

/// Index minimizing ⟨c − μ, a_i⟩ for c = Σ w_i a_i, μ = Σ z_i a_i; ties go to the smallest index.
Index select_vertex(const PointSetOracle& oracle, const SimplexWeights& z, const SimplexWeights& w);

/// Exact reweighting onto at most d+1 rows (fewer when the support is affinely
/// dependent) with Σ w_i a_i = Σ z_i a_i, by repeated null-space elimination.
SimplexWeights caratheodory_exact(const DenseMatrix& points, const SimplexWeights& z);

/// ‖Σ (z_i − w_i) a_i‖ computed from the explicit rows.
double explicit_residual(const DenseMatrix& points, const SimplexWeights& z, const SimplexWeights& w);

}  // namespace coreset
