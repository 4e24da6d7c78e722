#pragma once

#include "coreset/ifa.hpp"
#include "coreset/matrix.hpp"

#include <cstdint>
#include <vector>

namespace coreset {

struct OneMeanCoreset {
  std::vector<Index> indices;   // sorted, distinct
  std::vector<double> weights;  // multiply squared distances
  std::size_t n_source = 0;
  /// sup over all centers of the relative error, computed exactly from the weighted moments.
  double error_bound = 0.0;

  std::size_t size() const { return indices.size(); }
};

struct OneMeanOptions {
  /// Exact Caratheodory reweighting instead of the ε-approximate solver.
  bool exact = false;
  FwOptions::Start start = FwOptions::Start::FirstPoint;
};

/// Weighted subset with |Σᵢ‖a_i−c‖² − Σ_C w_j‖a_j−c‖²| ≤ ε·Σᵢ‖a_i−c‖² for every center c,
/// of size at most ⌈4/ε²⌉. Points are centered and scaled to unit variance, lifted to
/// (b_i, ‖b_i‖², 1), normalized, and the lifted mean is approximated by the
/// conditional-gradient solver.
OneMeanCoreset one_mean_coreset(const SparseMatrix& points, double epsilon, const OneMeanOptions& options = {});

/// Exact sup over c ∈ ℝ^d of |Σᵢ‖a_i−c‖² − Σ_C w_j‖a_j−c‖²| / Σᵢ‖a_i−c‖².
double one_mean_error_bound(const SparseMatrix& points, const OneMeanCoreset& cs);

/// Max over the rows of `centers` of the relative cost error.
double eval_one_mean(const SparseMatrix& points, const OneMeanCoreset& cs, const DenseMatrix& centers);

/// m centers uniform in the bounding box inflated 2× about its midpoint, followed by the
/// origin and the mean of the points ((m + 2) × d).
DenseMatrix sample_centers(const SparseMatrix& points, std::size_t m, std::uint64_t seed);

}  // namespace coreset
