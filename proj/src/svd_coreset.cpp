#include "coreset/svd_coreset.hpp"

#include "coreset/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace coreset {

SimplexWeights LiftedRows::mass_distribution() const {
  const Vector sq = row_norms.array().square();
  return SimplexWeights::from_dense(std::span<const double>(sq.data(), static_cast<std::size_t>(sq.size())));
}

LiftedRows build_lifted(const SvdFactors& svd, std::size_t k, double tail_scale) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "build_lifted: k must be >= 1");
  if (k > svd.rank) {
    fail(ErrorCode::KTooLarge, "build_lifted: k = " + std::to_string(k) + " exceeds rank " +
                                   std::to_string(svd.rank));
  }
  if (!(tail_scale > 0.0 && tail_scale <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "build_lifted: tail scale must lie in (0, 1]");
  }
  const Eigen::Index n = svd.U.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::Index tail = static_cast<Eigen::Index>(svd.rank) - kk;

  LiftedRows out;
  out.k = k;
  out.tail_dim = static_cast<std::size_t>(tail);
  out.tail_scale = tail_scale;
  out.sigma_tail_norm_sq = tail > 0 ? svd.sigma.tail(tail).squaredNorm() : 0.0;
  out.exact_rank = !(out.sigma_tail_norm_sq > 0.0);

  out.P.resize(n, kk + tail + 1);
  out.P.leftCols(kk) = svd.U.leftCols(kk);
  if (tail > 0) {
    const Vector scale = svd.sigma.tail(tail) / std::sqrt(out.sigma_tail_norm_sq);
    out.P.middleCols(kk, tail) = svd.U.rightCols(tail) * scale.asDiagonal();
  }
  out.P.col(kk + tail).setConstant(tail_scale);

  out.row_norms = out.P.rowwise().norm();
  out.X = out.row_norms.cwiseInverse().asDiagonal() * out.P;
  return out;
}

double OuterProductOracle::inner(Index i, Index j) const {
  const double d = x_.row(static_cast<Eigen::Index>(i)).dot(x_.row(static_cast<Eigen::Index>(j)));
  return d * d;
}

void OuterProductOracle::inner_column(Index j, std::span<double> out) const {
  auto col = Eigen::Map<Vector>(out.data(), x_.rows());
  col.noalias() = x_ * x_.row(static_cast<Eigen::Index>(j)).transpose();
  col = col.array().square();
}

TargetProducts OuterProductOracle::target_products(const SimplexWeights& z) const {
  // μ = Σ z_l X_lᵀX_l, so ⟨X_iX_iᵀ, μ⟩ = X_i μ X_iᵀ and ‖μ‖² = ‖μ‖_F².
  DenseMatrix mu = DenseMatrix::Zero(x_.cols(), x_.cols());
  for (const auto& [l, zl] : z.entries()) {
    const auto row = x_.row(static_cast<Eigen::Index>(l));
    mu.noalias() += zl * row.transpose() * row;
  }
  const DenseMatrix xm = x_ * mu;
  const Vector t = xm.cwiseProduct(x_).rowwise().sum();
  return {std::vector<double>(t.data(), t.data() + t.size()), mu.squaredNorm()};
}

ExtractedWeights extract_weights(const SimplexWeights& w, const LiftedRows& lifted) {
  if (w.n() != lifted.size()) fail(ErrorCode::DimensionMismatch, "extract_weights: w size != lifted rows");
  const double mass = lifted.mass();
  ExtractedWeights out;
  for (const auto& [i, wi] : w.entries()) {
    const double norm_sq = lifted.row_norms(static_cast<Eigen::Index>(i)) *
                           lifted.row_norms(static_cast<Eigen::Index>(i));
    if (!(norm_sq > 0.0)) fail(ErrorCode::ZeroNormRow, "extract_weights: lifted row " + std::to_string(i) + " is zero");
    out.indices.push_back(i);
    out.row_weights.push_back(std::sqrt(wi * mass / norm_sq));
  }
  return out;
}

double lifted_residual(const LiftedRows& lifted, const SimplexWeights& w) {
  const double mass = lifted.mass();
  DenseMatrix diff = lifted.P.transpose() * lifted.P;
  for (const auto& [i, wi] : w.entries()) {
    const auto row = lifted.X.row(static_cast<Eigen::Index>(i));
    diff.noalias() -= (wi * mass) * row.transpose() * row;
  }
  return diff.norm();
}

namespace {

// Symmetric outer products X_i X_iᵀ as vectors in the Frobenius geometry (upper triangle,
// off-diagonals scaled by √2).
DenseMatrix vectorize_outer_products(const DenseMatrix& x) {
  const Eigen::Index m = x.cols();
  DenseMatrix out(x.rows(), m * (m + 1) / 2);
  const double root2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index c = 0;
    for (Eigen::Index a = 0; a < m; ++a) {
      out(i, c++) = x(i, a) * x(i, a);
      for (Eigen::Index b = a + 1; b < m; ++b) out(i, c++) = root2 * x(i, a) * x(i, b);
    }
  }
  return out;
}

}  // namespace

CoresetResult svd_coreset(const SparseMatrix& a, std::size_t k, double epsilon,
                          const SvdCoresetOptions& options) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    fail(ErrorCode::BadEpsilon, "svd_coreset: epsilon must lie in (0, 1], got " + std::to_string(epsilon));
  }
  if (k == 0) fail(ErrorCode::InvalidArgument, "svd_coreset: k must be >= 1");
  if (k >= std::min(a.rows(), a.cols())) {
    fail(ErrorCode::KTooLarge, "svd_coreset: need k < min(n, d) = " +
                                   std::to_string(std::min(a.rows(), a.cols())));
  }

  // Zero rows contribute nothing to any query and are never selected.
  std::vector<Index> nonzero;
  for (Index i = 0; i < a.rows(); ++i) {
    if (a.row_nnz(i) > 0) nonzero.push_back(i);
  }
  if (nonzero.empty()) fail(ErrorCode::EmptyMatrix, "svd_coreset: all rows are zero");
  const SparseMatrix rows = nonzero.size() == a.rows() ? a : a.select_rows(nonzero);

  const SvdFactors svd = thin_svd(rows, std::min(rows.rows(), rows.cols()), options.seed);
  const std::size_t k_lift = std::min(k, svd.rank);
  const double tau = 1.0 / std::sqrt(static_cast<double>(rows.rows()));
  const LiftedRows lifted = build_lifted(svd, k_lift, tau);
  if (options.on_lifted) options.on_lifted(lifted);

  const SimplexWeights z = lifted.mass_distribution();
  const double mass = lifted.mass();

  CoresetResult result;
  result.k = k;
  result.epsilon_target = epsilon;

  SimplexWeights w;
  ExtractedWeights extracted;
  if (lifted.exact_rank) {
    // Preserving AᵀA only needs Σ W²_ii U_iᵀU_i = I, so the trailing coordinate is dropped
    // (rows that differ only by scale then coincide). The outer products span a space of
    // dimension r(r+1)/2, so an exact reweighting with at most that many rows plus one exists.
    LiftedRows basis;
    basis.k = k_lift;
    basis.exact_rank = true;
    basis.P = lifted.P.leftCols(static_cast<Eigen::Index>(k_lift));
    basis.row_norms = basis.P.rowwise().norm();
    basis.X = basis.row_norms.cwiseInverse().asDiagonal() * basis.P;
    w = caratheodory_exact(vectorize_outer_products(basis.X), basis.mass_distribution());
    result.exact = true;
    result.epsilon_residual = lifted_residual(basis, w);
    extracted = extract_weights(w, basis);
  } else {
    const OuterProductOracle oracle(lifted.X);
    const double target = options.residual_target > 0.0 ? options.residual_target : epsilon;
    FwOptions fw;
    fw.start = options.start;
    fw.on_iteration = options.on_iteration;
    const auto budget = static_cast<std::size_t>(std::ceil(static_cast<double>(k) / (epsilon * epsilon)));
    FwResult solved = frank_wolfe(oracle, z, std::min(1.0, target / mass), budget, fw);
    w = std::move(solved.weights);
    result.epsilon_residual = mass * solved.residual;
    result.trace = std::move(solved.trace);
    for (Index& idx : result.trace.selected_indices) idx = nonzero[idx];
    extracted = extract_weights(w, lifted);
  }

  result.indices.reserve(extracted.indices.size());
  for (Index local : extracted.indices) result.indices.push_back(nonzero[local]);
  result.row_weights = std::move(extracted.row_weights);
  return result;
}

double claim_error(const SparseMatrix& a, const CoresetResult& cs, const DenseMatrix& x) {
  if (static_cast<std::size_t>(x.rows()) != a.cols()) {
    fail(ErrorCode::DimensionMismatch, "claim_error: X must have d rows");
  }
  if (cs.k >= a.cols() || static_cast<std::size_t>(x.cols()) != a.cols() - cs.k) {
    fail(ErrorCode::DimensionMismatch, "claim_error: X must have d - k columns");
  }
  if (orthonormality_defect(x) > kOrthonormalTol) fail(ErrorCode::NotOrthonormal, "claim_error: XᵀX != I");
  if (cs.indices.size() != cs.row_weights.size()) {
    fail(ErrorCode::DimensionMismatch, "claim_error: coreset indices and weights differ in length");
  }

  const double full = a.multiply(x).squaredNorm();
  if (full < 1e-30) fail(ErrorCode::ZeroDenominator, "claim_error: ‖AX‖² vanishes");
  const double weighted = weighted_rows(a, cs).multiply(x).squaredNorm();
  return std::abs(1.0 - weighted / full);
}

SparseMatrix weighted_rows(const SparseMatrix& a, const CoresetResult& cs) {
  return a.select_rows(cs.indices, cs.row_weights);
}

}  // namespace coreset
