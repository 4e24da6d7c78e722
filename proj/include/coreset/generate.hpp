#pragma once

#include "coreset/matrix.hpp"

#include <cstdint>

namespace coreset {

struct LowRankSpec {
  std::size_t n = 2000;
  std::size_t d = 100;
  std::size_t rank = 5;
  /// Noise standard deviation relative to the RMS of the signal entries.
  double noise = 0.01;
  /// Fraction of the columns touched by each latent factor.
  double density = 0.2;
  /// Number of latent factors mixed into each row; caps the row nnz at
  /// factors_per_row · ⌈density·d⌉.
  std::size_t factors_per_row = 2;
  std::uint64_t seed = 0;
};

/// Sparse rank-r signal L·R plus Gaussian noise on the signal's nonzero pattern. R has
/// ⌈density·d⌉ Gaussian entries per row; each row of L mixes `factors_per_row` factors.
SparseMatrix generate_low_rank(const LowRankSpec& spec);

/// n rows with i.i.d. standard normal entries in d columns (dense pattern).
DenseMatrix gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace coreset
