#include "coreset/matrix.hpp"

#include "coreset/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace coreset {

double SparseRowView::norm_sq() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Index> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != n_rows_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != values_.size() || col_indices_.size() != values_.size()) {
    fail(ErrorCode::InvalidArgument, "CSR arrays have inconsistent lengths");
  }
  for (Index i = 0; i < n_rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) {
      fail(ErrorCode::InvalidArgument, "row_offsets decreases at row " + std::to_string(i));
    }
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      if (col_indices_[p] >= n_cols_) {
        fail(ErrorCode::InvalidArgument, "column index out of range in row " + std::to_string(i));
      }
      if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1]) {
        fail(ErrorCode::InvalidArgument, "column indices not strictly increasing in row " +
                                             std::to_string(i));
      }
      if (values_[p] == 0.0 || !std::isfinite(values_[p])) {
        fail(ErrorCode::InvalidArgument, "stored zero or non-finite value in row " +
                                             std::to_string(i));
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(n_rows + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t t = 0;
  for (Index i = 0; i < n_rows; ++i) {
    while (t < triplets.size() && triplets[t].row == i) {
      const Index c = triplets[t].col;
      if (c >= n_cols) fail(ErrorCode::InvalidArgument, "triplet column out of range");
      double sum = 0.0;
      while (t < triplets.size() && triplets[t].row == i && triplets[t].col == c) {
        sum += triplets[t].value;
        ++t;
      }
      if (sum != 0.0) {
        cols.push_back(c);
        vals.push_back(sum);
      }
    }
    offsets[i + 1] = vals.size();
  }
  if (t != triplets.size()) fail(ErrorCode::InvalidArgument, "triplet row out of range");
  return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
  SparseMatrixBuilder builder(static_cast<std::size_t>(dense.cols()));
  std::vector<Index> cols;
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    cols.clear();
    vals.clear();
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        cols.push_back(static_cast<Index>(j));
        vals.push_back(dense(i, j));
      }
    }
    builder.append_row(cols, vals);
  }
  return builder.build();
}

SparseRowView SparseMatrix::row(Index i) const {
  const Index b = row_offsets_[i];
  const Index e = row_offsets_[i + 1];
  return {std::span<const Index>(col_indices_).subspan(b, e - b),
          std::span<const double>(values_).subspan(b, e - b)};
}

std::size_t SparseMatrix::max_row_nnz() const {
  std::size_t m = 0;
  for (Index i = 0; i < n_rows_; ++i) m = std::max(m, row_nnz(i));
  return m;
}

double SparseMatrix::frobenius_norm_sq() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n_rows_),
                                      static_cast<Eigen::Index>(n_cols_));
  for (Index i = 0; i < n_rows_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_indices_[p])) = values_[p];
    }
  }
  return out;
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& rhs) const {
  if (static_cast<std::size_t>(rhs.rows()) != n_cols_) {
    fail(ErrorCode::DimensionMismatch, "multiply: rhs has " + std::to_string(rhs.rows()) +
                                           " rows, expected " + std::to_string(n_cols_));
  }
  // Row-major accumulation keeps the inner loop contiguous over rhs rows.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = rhs;
  DenseMatrix out(static_cast<Eigen::Index>(n_rows_), rhs.cols());
  for (Index i = 0; i < n_rows_; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(rhs.cols());
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      acc.noalias() += values_[p] * r.row(static_cast<Eigen::Index>(col_indices_[p]));
    }
    out.row(static_cast<Eigen::Index>(i)) = acc;
  }
  return out;
}

DenseMatrix SparseMatrix::transpose_multiply(const DenseMatrix& rhs) const {
  if (static_cast<std::size_t>(rhs.rows()) != n_rows_) {
    fail(ErrorCode::DimensionMismatch, "transpose_multiply: rhs row count mismatch");
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(
          static_cast<Eigen::Index>(n_cols_), rhs.cols());
  for (Index i = 0; i < n_rows_; ++i) {
    const Eigen::RowVectorXd r = rhs.row(static_cast<Eigen::Index>(i));
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      out.row(static_cast<Eigen::Index>(col_indices_[p])).noalias() += values_[p] * r;
    }
  }
  return out;
}

DenseMatrix SparseMatrix::gram() const {
  DenseMatrix g = DenseMatrix::Zero(static_cast<Eigen::Index>(n_cols_),
                                    static_cast<Eigen::Index>(n_cols_));
  for (Index i = 0; i < n_rows_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const auto cp = static_cast<Eigen::Index>(col_indices_[p]);
      for (Index q = row_offsets_[i]; q <= p; ++q) {
        g(cp, static_cast<Eigen::Index>(col_indices_[q])) += values_[p] * values_[q];
      }
    }
  }
  return g.selfadjointView<Eigen::Lower>();
}

SparseMatrix SparseMatrix::select_rows(std::span<const Index> indices,
                                       std::span<const double> scales) const {
  if (indices.size() != scales.size()) {
    fail(ErrorCode::DimensionMismatch, "select_rows: indices and scales differ in length");
  }
  SparseMatrixBuilder builder(n_cols_);
  for (std::size_t t = 0; t < indices.size(); ++t) {
    if (indices[t] >= n_rows_) fail(ErrorCode::InvalidArgument, "select_rows: row out of range");
    builder.append_row(row(indices[t]), scales[t]);
  }
  return builder.build();
}

SparseMatrix SparseMatrix::select_rows(std::span<const Index> indices) const {
  std::vector<double> ones(indices.size(), 1.0);
  return select_rows(indices, ones);
}

SparseMatrix SparseMatrix::row_block(Index begin, Index end) const {
  if (begin > end || end > n_rows_) fail(ErrorCode::InvalidArgument, "row_block out of range");
  std::vector<Index> offsets(end - begin + 1);
  for (Index i = begin; i <= end; ++i) offsets[i - begin] = row_offsets_[i] - row_offsets_[begin];
  std::vector<Index> cols(col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[begin]),
                          col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[end]));
  std::vector<double> vals(values_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[begin]),
                           values_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[end]));
  return SparseMatrix(end - begin, n_cols_, std::move(offsets), std::move(cols), std::move(vals));
}

void SparseMatrixBuilder::append_row(std::span<const Index> cols, std::span<const double> values) {
  if (cols.size() != values.size()) {
    fail(ErrorCode::DimensionMismatch, "append_row: cols and values differ in length");
  }
  std::vector<std::size_t> order(cols.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
  for (std::size_t t = 0; t < order.size(); ++t) {
    const Index c = cols[order[t]];
    if (c >= n_cols_) {
      fail(ErrorCode::DimensionMismatch, "row has column " + std::to_string(c) +
                                             " but matrix has " + std::to_string(n_cols_) + " columns");
    }
    if (t > 0 && c == cols[order[t - 1]]) fail(ErrorCode::InvalidArgument, "duplicate column in row");
    if (values[order[t]] == 0.0) continue;
    col_indices_.push_back(c);
    values_.push_back(values[order[t]]);
  }
  row_offsets_.push_back(values_.size());
}

void SparseMatrixBuilder::append_row(const SparseRowView& row, double scale) {
  for (std::size_t t = 0; t < row.nnz(); ++t) {
    if (row.cols[t] >= n_cols_) fail(ErrorCode::DimensionMismatch, "append_row: column out of range");
    const double v = row.values[t] * scale;
    if (v == 0.0) continue;
    col_indices_.push_back(row.cols[t]);
    values_.push_back(v);
  }
  row_offsets_.push_back(values_.size());
}

void SparseMatrixBuilder::clear() {
  row_offsets_.assign(1, 0);
  col_indices_.clear();
  values_.clear();
}

SparseMatrix SparseMatrixBuilder::build() const {
  return SparseMatrix(rows(), n_cols_, row_offsets_, col_indices_, values_);
}

SparseMatrix vstack(std::span<const SparseMatrix> blocks) {
  if (blocks.empty()) fail(ErrorCode::EmptyInput, "vstack of zero blocks");
  SparseMatrixBuilder builder(blocks.front().cols());
  for (const auto& b : blocks) {
    if (b.cols() != builder.cols()) fail(ErrorCode::DimensionMismatch, "vstack: column counts differ");
    for (Index i = 0; i < b.rows(); ++i) builder.append_row(b.row(i));
  }
  return builder.build();
}

namespace {

std::size_t numerical_rank(const Vector& sigma) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cut = kRankTol * sigma(0);
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(sigma.size()) && sigma(static_cast<Eigen::Index>(r)) > cut) ++r;
  return r;
}

SvdFactors truncate(const DenseMatrix& u, const Vector& sigma, const DenseMatrix& v,
                    std::size_t rank_cap) {
  SvdFactors f;
  f.numerical_rank = numerical_rank(sigma);
  f.rank = std::min(f.numerical_rank, rank_cap);
  const auto r = static_cast<Eigen::Index>(f.rank);
  f.U = u.leftCols(r);
  f.sigma = sigma.head(r);
  f.Vt = v.leftCols(r).transpose();
  return f;
}

void check_svd_input(const SparseMatrix& a, std::size_t rank_cap) {
  if (a.rows() == 0 || a.cols() == 0) fail(ErrorCode::EmptyMatrix, "thin_svd: matrix has no rows");
  if (a.all_zero()) fail(ErrorCode::EmptyMatrix, "thin_svd: all entries are zero");
  if (rank_cap == 0 || rank_cap > std::min(a.rows(), a.cols())) {
    fail(ErrorCode::InvalidArgument, "thin_svd: rank_cap must lie in [1, min(n, d)]");
  }
}

// Unit vector orthogonal to the first `used` columns of `basis`, or empty if none exists.
Vector random_orthogonal_unit(const DenseMatrix& basis, Eigen::Index used, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector v(basis.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    for (int pass = 0; pass < 2; ++pass) {
      v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
    }
    const double nrm = v.norm();
    if (nrm > 1e-8) return v / nrm;
  }
  return {};
}

}  // namespace

SvdFactors lanczos_svd(const SparseMatrix& a, std::size_t rank_cap, std::uint64_t seed) {
  check_svd_input(a, rank_cap);
  const auto n = static_cast<Eigen::Index>(a.rows());
  const auto d = static_cast<Eigen::Index>(a.cols());
  const Eigen::Index max_steps = std::min(n, d);
  const double tiny = 1e-13 * std::sqrt(a.frobenius_norm_sq());

  std::mt19937_64 rng(seed);
  DenseMatrix p_basis(n, max_steps);
  DenseMatrix q_basis(d, max_steps);
  Vector alpha = Vector::Zero(max_steps);
  Vector beta = Vector::Zero(max_steps);

  q_basis.col(0) = random_orthogonal_unit(q_basis, 0, rng);
  Eigen::Index steps = 0;
  DenseMatrix ub, vb;
  Vector sb;

  auto solve_projected = [&](Eigen::Index m) {
    DenseMatrix b = DenseMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      b(i, i) = alpha(i);
      if (i + 1 < m) b(i, i + 1) = beta(i);
    }
    Eigen::JacobiSVD<DenseMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ub = svd.matrixU();
    vb = svd.matrixV();
    sb = svd.singularValues();
  };

  for (Eigen::Index j = 0; j < max_steps; ++j) {
    Vector p = a.multiply(q_basis.col(j));
    if (j > 0) p -= beta(j - 1) * p_basis.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) p -= p_basis.leftCols(j) * (p_basis.leftCols(j).transpose() * p);
    alpha(j) = p.norm();
    if (alpha(j) <= tiny) {
      alpha(j) = 0.0;
      Vector fresh = random_orthogonal_unit(p_basis, j, rng);
      if (fresh.size() == 0) {
        steps = j + 1;
        break;
      }
      p_basis.col(j) = fresh;
    } else {
      p_basis.col(j) = p / alpha(j);
    }
    steps = j + 1;
    if (steps == max_steps) break;

    Vector q = a.transpose_multiply(p_basis.col(j)) - alpha(j) * q_basis.col(j);
    for (int pass = 0; pass < 2; ++pass) q -= q_basis.leftCols(j + 1) * (q_basis.leftCols(j + 1).transpose() * q);
    beta(j) = q.norm();
    const bool breakdown = beta(j) <= tiny;
    if (breakdown) {
      beta(j) = 0.0;
      Vector fresh = random_orthogonal_unit(q_basis, j + 1, rng);
      if (fresh.size() == 0) break;
      q_basis.col(j + 1) = fresh;
    } else {
      q_basis.col(j + 1) = q / beta(j);
    }

    // Ritz residual of triplet i is beta_j * |last component of its left vector|.
    if (!breakdown && static_cast<std::size_t>(steps) >= rank_cap && steps % 4 == 0) {
      solve_projected(steps);
      const double scale = sb(0) > 0.0 ? sb(0) : 1.0;
      bool converged = true;
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(rank_cap); ++i) {
        if (beta(j) * std::abs(ub(steps - 1, i)) > 1e-12 * scale) {
          converged = false;
          break;
        }
      }
      if (converged) break;
    }
  }
  solve_projected(steps);
  const DenseMatrix u = p_basis.leftCols(steps) * ub;
  const DenseMatrix v = q_basis.leftCols(steps) * vb;
  return truncate(u, sb, v, rank_cap);
}

SvdFactors thin_svd(const SparseMatrix& a, std::size_t rank_cap, std::uint64_t seed) {
  check_svd_input(a, rank_cap);
  if (a.rows() * a.cols() > kDenseSvdLimit) return lanczos_svd(a, rank_cap, seed);
  Eigen::BDCSVD<DenseMatrix> svd(a.to_dense(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return truncate(svd.matrixU(), svd.singularValues(), svd.matrixV(), rank_cap);
}

double orthonormality_defect(const DenseMatrix& x) {
  const DenseMatrix g = x.transpose() * x;
  return (g - DenseMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double sum_sq_dist(const SparseMatrix& a, const DenseMatrix& x) {
  if (static_cast<std::size_t>(x.rows()) != a.cols()) {
    fail(ErrorCode::DimensionMismatch, "sum_sq_dist: X has " + std::to_string(x.rows()) +
                                           " rows, A has " + std::to_string(a.cols()) + " columns");
  }
  if (x.cols() == 0 || x.cols() > x.rows()) fail(ErrorCode::DimensionMismatch, "sum_sq_dist: bad column count");
  if (orthonormality_defect(x) > kOrthonormalTol) {
    fail(ErrorCode::NotOrthonormal, "sum_sq_dist: XᵀX deviates from I");
  }
  return a.multiply(x).squaredNorm();
}

DenseMatrix random_orthonormal(std::size_t d, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m > d) fail(ErrorCode::InvalidDims, "random_orthonormal: need 1 <= m <= d");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(g.rows(), g.cols());
  // Fixing the sign of R's diagonal makes the distribution Haar.
  const DenseMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

DenseMatrix orthogonal_complement(const DenseMatrix& basis) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index m = basis.cols();
  if (m > d) fail(ErrorCode::InvalidDims, "orthogonal_complement: more columns than rows");
  if (m == 0) return DenseMatrix::Identity(d, d);
  Eigen::HouseholderQR<DenseMatrix> qr(basis);
  const DenseMatrix q = qr.householderQ();
  return q.rightCols(d - m);
}

}  // namespace coreset
