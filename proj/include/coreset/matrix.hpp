#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace coreset {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;

/// Tolerance on |XᵀX - I| used by every orthonormality check.
inline constexpr double kOrthonormalTol = 1e-8;

/// Singular values at or below this fraction of the largest one are treated as zero.
inline constexpr double kRankTol = 1e-10;

/// Above this many dense entries thin_svd switches to Lanczos bidiagonalization.
inline constexpr std::size_t kDenseSvdLimit = 1'000'000;

struct SparseRowView {
  std::span<const Index> cols;
  std::span<const double> values;

  std::size_t nnz() const { return cols.size(); }
  double norm_sq() const;
};

/// Compressed-row sparse matrix. Immutable after construction.
///
/// Invariants: row_offsets is non-decreasing, starts at 0 and ends at nnz; column
/// indices within a row are strictly increasing and < n_cols; no explicit zeros.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Validates the CSR arrays and throws InvalidArgument on any violated invariant.
  SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  struct Triplet {
    Index row;
    Index col;
    double value;
  };

  /// Duplicates are summed and resulting zeros dropped.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix from_dense(const DenseMatrix& dense);

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  SparseRowView row(Index i) const;
  std::size_t row_nnz(Index i) const { return row_offsets_[i + 1] - row_offsets_[i]; }
  std::size_t max_row_nnz() const;

  std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  double frobenius_norm_sq() const;
  bool all_zero() const noexcept { return values_.empty(); }

  DenseMatrix to_dense() const;
  /// Returns this * rhs (rows() x rhs.cols()).
  DenseMatrix multiply(const DenseMatrix& rhs) const;
  /// Returns thisᵀ * rhs (cols() x rhs.cols()).
  DenseMatrix transpose_multiply(const DenseMatrix& rhs) const;
  /// AᵀA as a dense cols() x cols() matrix.
  DenseMatrix gram() const;

  /// Rows `indices` (in that order), each multiplied by the matching scale.
  SparseMatrix select_rows(std::span<const Index> indices, std::span<const double> scales) const;
  SparseMatrix select_rows(std::span<const Index> indices) const;
  /// Contiguous block of rows [begin, end).
  SparseMatrix row_block(Index begin, Index end) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// Row-at-a-time CSR assembly. Rows must be appended in order.
class SparseMatrixBuilder {
 public:
  explicit SparseMatrixBuilder(std::size_t n_cols) : n_cols_(n_cols) {}

  /// Appends a row given as (col, value) pairs in any order. Zeros are dropped.
  void append_row(std::span<const Index> cols, std::span<const double> values);
  void append_row(const SparseRowView& row, double scale = 1.0);

  std::size_t rows() const noexcept { return row_offsets_.size() - 1; }
  std::size_t cols() const noexcept { return n_cols_; }
  void clear();

  SparseMatrix build() const;

 private:
  std::size_t n_cols_;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// Vertical concatenation; all blocks must share the column count.
SparseMatrix vstack(std::span<const SparseMatrix> blocks);

struct SvdFactors {
  DenseMatrix U;      // n x r, orthonormal columns
  Vector sigma;       // r, non-increasing, positive
  DenseMatrix Vt;     // r x d, orthonormal rows
  std::size_t rank = 0;
  /// Numerical rank before `rank_cap` truncation.
  std::size_t numerical_rank = 0;
};

/// Thin SVD truncated to min(numerical rank, rank_cap). Dense Jacobi/BDC SVD on the
/// densified matrix at desk scale; Golub-Kahan-Lanczos with full reorthogonalization
/// above kDenseSvdLimit entries (its start vector is drawn from `seed`).
SvdFactors thin_svd(const SparseMatrix& a, std::size_t rank_cap, std::uint64_t seed = 0);

/// Lanczos path exposed for testing; thin_svd dispatches here above kDenseSvdLimit.
SvdFactors lanczos_svd(const SparseMatrix& a, std::size_t rank_cap, std::uint64_t seed = 0);

/// max_ij |XᵀX - I|_ij.
double orthonormality_defect(const DenseMatrix& x);

/// Σᵢ ‖aᵢ X‖² for an orthonormal X (d x m): the sum of squared distances from the rows
/// of A to the subspace orthogonal to the columns of X.
double sum_sq_dist(const SparseMatrix& a, const DenseMatrix& x);

/// d x m matrix with orthonormal columns drawn from the Haar measure, deterministic per seed.
DenseMatrix random_orthonormal(std::size_t d, std::size_t m, std::uint64_t seed);

/// Orthonormal basis (d x (d - m)) of the complement of the column span of an orthonormal
/// d x m matrix.
DenseMatrix orthogonal_complement(const DenseMatrix& basis);

}  // namespace coreset
