#include "coreset/matrix.hpp"
#include "test_util.hpp"

#include <Eigen/SVD>

#include <limits>
#include <numbers>

using namespace coreset;

TEST_CASE("CSR invariants are enforced") {
  CHECK_CODE(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}), ErrorCode::InvalidArgument);            // offsets length
  CHECK_CODE(SparseMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 2.0}), ErrorCode::InvalidArgument);    // unsorted columns
  CHECK_CODE(SparseMatrix(1, 2, {0, 1}, {2}, {1.0}), ErrorCode::InvalidArgument);            // column out of range
  CHECK_CODE(SparseMatrix(1, 2, {0, 1}, {0}, {0.0}), ErrorCode::InvalidArgument);            // stored zero
  CHECK_CODE(SparseMatrix(2, 2, {0, 1, 0}, {0}, {1.0}), ErrorCode::InvalidArgument);         // decreasing offsets
  const SparseMatrix ok(2, 3, {0, 2, 3}, {0, 2, 1}, {1.0, -2.0, 3.0});
  CHECK(ok.nnz() == 3);
  CHECK(ok.row_nnz(0) == 2);
  CHECK(ok.frobenius_norm_sq() == doctest::Approx(14.0));
}

TEST_CASE("from_triplets sums duplicates and drops cancellations") {
  const auto a = SparseMatrix::from_triplets(2, 2, {{1, 1, 2.0}, {0, 0, 1.0}, {1, 1, 3.0}, {0, 1, 1.0}, {0, 1, -1.0}});
  CHECK(a.nnz() == 2);
  DenseMatrix expected(2, 2);
  expected << 1, 0, 0, 5;
  CHECK(a.to_dense() == expected);
  CHECK(SparseMatrix::from_dense(expected) == a);
}

TEST_CASE("builder sorts rows, rejects duplicates and drops zeros") {
  SparseMatrixBuilder b(4);
  const std::vector<Index> cols{3, 0, 2};
  const std::vector<double> vals{1.0, 2.0, 0.0};
  b.append_row(cols, vals);
  b.append_row(std::vector<Index>{}, std::vector<double>{});
  const SparseMatrix m = b.build();
  CHECK(m.rows() == 2);
  CHECK(m.row_nnz(0) == 2);
  CHECK(m.row(0).cols[0] == 0);
  CHECK(m.row_nnz(1) == 0);
  const std::vector<Index> dup{1, 1};
  const std::vector<double> two{1.0, 1.0};
  CHECK_CODE(b.append_row(dup, two), ErrorCode::InvalidArgument);
}

TEST_CASE("products agree with dense arithmetic") {
  const SparseMatrix a = testutil::random_sparse(30, 12, 0.3, 4);
  const DenseMatrix ad = a.to_dense();
  const DenseMatrix x = testutil::gaussian(12, 5, 5);
  const DenseMatrix y = testutil::gaussian(30, 3, 6);
  CHECK((a.multiply(x) - ad * x).norm() <= 1e-12 * (ad * x).norm());
  CHECK((a.transpose_multiply(y) - ad.transpose() * y).norm() <= 1e-12 * (ad.transpose() * y).norm());
  CHECK((a.gram() - ad.transpose() * ad).norm() <= 1e-12 * (ad.transpose() * ad).norm());
}

TEST_CASE("row selection, blocks and vstack") {
  const SparseMatrix a = testutil::random_sparse(10, 6, 0.5, 9);
  const std::vector<Index> idx{7, 2};
  const std::vector<double> sc{2.0, -1.0};
  const DenseMatrix s = a.select_rows(idx, sc).to_dense();
  CHECK(s.row(0) == 2.0 * a.to_dense().row(7));
  CHECK(s.row(1) == -1.0 * a.to_dense().row(2));
  const SparseMatrix parts[] = {a.row_block(0, 4), a.row_block(4, 10)};
  CHECK(vstack(parts) == a);
  const SparseMatrix bad[] = {a, testutil::random_sparse(2, 5, 0.5, 1)};
  CHECK_CODE(vstack(bad), ErrorCode::DimensionMismatch);
}

TEST_CASE("thin_svd: identity and single row") {
  const SvdFactors id = thin_svd(SparseMatrix::from_dense(DenseMatrix::Identity(2, 2)), 2);
  REQUIRE(id.rank == 2);
  CHECK(id.sigma(0) == doctest::Approx(1.0));
  CHECK(id.sigma(1) == doctest::Approx(1.0));
  CHECK(orthonormality_defect(id.U) <= 1e-12);
  CHECK(orthonormality_defect(id.Vt.transpose()) <= 1e-12);

  DenseMatrix r(1, 2);
  r << 3, 4;
  const SvdFactors one = thin_svd(SparseMatrix::from_dense(r), 1);
  REQUIRE(one.rank == 1);
  CHECK(one.sigma(0) == doctest::Approx(5.0));
  CHECK(std::abs(one.U(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("thin_svd reconstructs a random sparse matrix and matches a textbook SVD") {
  const SparseMatrix a = testutil::random_sparse(20, 8, 0.4, 11);
  const SvdFactors f = thin_svd(a, 8);
  const DenseMatrix ad = a.to_dense();
  const DenseMatrix rec = f.U * f.sigma.asDiagonal() * f.Vt;
  CHECK((rec - ad).norm() <= 1e-6 * ad.norm());
  CHECK(orthonormality_defect(f.U) <= kOrthonormalTol);
  CHECK(orthonormality_defect(f.Vt.transpose()) <= kOrthonormalTol);
  // Independent oracle: Jacobi SVD of the dense matrix.
  Eigen::JacobiSVD<DenseMatrix> oracle(ad);
  for (Eigen::Index i = 0; i < f.sigma.size(); ++i) CHECK(f.sigma(i) == doctest::Approx(oracle.singularValues()(i)).epsilon(1e-10));
  for (Eigen::Index i = 1; i < f.sigma.size(); ++i) CHECK(f.sigma(i) <= f.sigma(i - 1));
}

TEST_CASE("thin_svd truncates to rank_cap and reports numerical rank") {
  // Rank 2 by construction.
  DenseMatrix b = testutil::gaussian(15, 2, 1) * testutil::gaussian(2, 6, 2);
  const SvdFactors f = thin_svd(SparseMatrix::from_dense(b), 6);
  CHECK(f.rank == 2);
  CHECK(f.numerical_rank == 2);
  const SvdFactors g = thin_svd(SparseMatrix::from_dense(b), 1);
  CHECK(g.rank == 1);
  CHECK(g.numerical_rank == 2);
}

TEST_CASE("thin_svd errors") {
  CHECK_CODE(thin_svd(SparseMatrix::from_triplets(0, 3, {}), 1), ErrorCode::EmptyMatrix);
  CHECK_CODE(thin_svd(SparseMatrix::from_triplets(4, 3, {}), 1), ErrorCode::EmptyMatrix);
  CHECK_CODE(thin_svd(testutil::random_sparse(4, 3, 1.0, 1), 4), ErrorCode::InvalidArgument);
}

TEST_CASE("Lanczos path agrees with the dense path") {
  const SparseMatrix a = testutil::random_sparse(300, 40, 0.1, 21);
  const SvdFactors dense = thin_svd(a, 40);
  const SvdFactors lz = lanczos_svd(a, 40, 3);
  REQUIRE(lz.rank == dense.rank);
  for (Eigen::Index i = 0; i < dense.sigma.size(); ++i) CHECK(lz.sigma(i) == doctest::Approx(dense.sigma(i)).epsilon(1e-8));
  const DenseMatrix rec = lz.U * lz.sigma.asDiagonal() * lz.Vt;
  CHECK((rec - a.to_dense()).norm() <= 1e-6 * std::sqrt(a.frobenius_norm_sq()));
  CHECK(orthonormality_defect(lz.U) <= kOrthonormalTol);
}

TEST_CASE("Lanczos handles rank deficiency") {
  const DenseMatrix b = testutil::gaussian(60, 3, 5) * testutil::gaussian(3, 20, 6);
  const SvdFactors lz = lanczos_svd(SparseMatrix::from_dense(b), 20, 1);
  CHECK(lz.rank == 3);
  CHECK((lz.U * lz.sigma.asDiagonal() * lz.Vt - b).norm() <= 1e-6 * b.norm());
}

TEST_CASE("sum_sq_dist examples") {
  DenseMatrix a(2, 2);
  a << 1, 0, 0, 1;
  DenseMatrix x(2, 1);
  x << 0, 1;
  CHECK(sum_sq_dist(SparseMatrix::from_dense(a), x) == doctest::Approx(1.0));

  // Every row lies in span(e1, e2); X spans the complement.
  const SparseMatrix in_plane = SparseMatrix::from_dense(testutil::gaussian(7, 2, 3) * DenseMatrix::Identity(2, 4));
  const DenseMatrix comp = DenseMatrix::Identity(4, 4).rightCols(2);
  CHECK(sum_sq_dist(in_plane, comp) <= 1e-10);

  const SparseMatrix r = SparseMatrix::from_dense(testutil::gaussian(10, 4, 8));
  const DenseMatrix q = random_orthonormal(4, 2, 3);
  const double dense = (r.to_dense() * q).squaredNorm();
  CHECK(sum_sq_dist(r, q) == doctest::Approx(dense).epsilon(1e-12));
}

TEST_CASE("sum_sq_dist properties") {
  const SparseMatrix a = testutil::random_sparse(25, 6, 0.5, 12);
  const DenseMatrix q = random_orthonormal(6, 6, 4);
  CHECK(sum_sq_dist(a, q) == doctest::Approx(a.frobenius_norm_sq()).epsilon(1e-12));
  double by_column = 0.0;
  for (Eigen::Index j = 0; j < 3; ++j) by_column += sum_sq_dist(a, q.col(j));
  CHECK(sum_sq_dist(a, q.leftCols(3)) == doctest::Approx(by_column).epsilon(1e-12));

  CHECK_CODE(sum_sq_dist(a, random_orthonormal(5, 2, 1)), ErrorCode::DimensionMismatch);
  DenseMatrix skew = q.leftCols(2);
  skew(0, 0) += 1e-3;
  CHECK_CODE(sum_sq_dist(a, skew), ErrorCode::NotOrthonormal);
}

TEST_CASE("Eckart-Young: tail energy equals the best line cost on a 2-D grid") {
  const SparseMatrix a = SparseMatrix::from_dense(testutil::gaussian(40, 2, 31));
  const SvdFactors f = thin_svd(a, 2);
  const double tail = f.sigma(1) * f.sigma(1);
  double best = std::numeric_limits<double>::infinity();
  const int grid = 20000;
  for (int i = 0; i < grid; ++i) {
    const double t = std::numbers::pi * i / grid;
    DenseMatrix normal(2, 1);
    normal << -std::sin(t), std::cos(t);
    best = std::min(best, sum_sq_dist(a, normal));
  }
  CHECK(tail <= best + 1e-12);
  CHECK(best == doctest::Approx(tail).epsilon(1e-6));
}

TEST_CASE("random_orthonormal") {
  const DenseMatrix q3 = random_orthonormal(3, 3, 42);
  CHECK(std::abs(std::abs(q3.determinant()) - 1.0) <= 1e-9);
  const DenseMatrix a = random_orthonormal(2, 1, 5);
  const DenseMatrix b = random_orthonormal(2, 1, 5);
  CHECK(a == b);
  CHECK(a.norm() == doctest::Approx(1.0));
  const DenseMatrix q = random_orthonormal(5, 2, 7);
  CHECK((q.transpose() * q - DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(random_orthonormal(5, 2, 8) != q);
  CHECK_CODE(random_orthonormal(3, 4, 0), ErrorCode::InvalidDims);
  CHECK_CODE(random_orthonormal(3, 0, 0), ErrorCode::InvalidDims);
}

TEST_CASE("orthogonal_complement") {
  const DenseMatrix q = random_orthonormal(6, 2, 1);
  const DenseMatrix c = orthogonal_complement(q);
  REQUIRE(c.cols() == 4);
  CHECK((q.transpose() * c).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(orthonormality_defect(c) <= 1e-12);
}
