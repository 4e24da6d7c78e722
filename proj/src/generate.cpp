#include "coreset/generate.hpp"

#include "coreset/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace coreset {

namespace {

std::vector<Index> sample_without_replacement(std::size_t population, std::size_t count,
                                              std::mt19937_64& rng) {
  std::vector<Index> all(population);
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates with an explicit uniform draw keeps the output platform independent.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

SparseMatrix generate_low_rank(const LowRankSpec& spec) {
  if (spec.n == 0 || spec.d == 0 || spec.rank == 0 || spec.rank > spec.d) {
    fail(ErrorCode::InvalidArgument, "generate_low_rank: need n, d >= 1 and 1 <= rank <= d");
  }
  if (!(spec.density > 0.0 && spec.density <= 1.0) || spec.noise < 0.0) {
    fail(ErrorCode::InvalidArgument, "generate_low_rank: density must lie in (0, 1], noise >= 0");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;

  const auto per_factor = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(spec.density * static_cast<double>(spec.d))));
  DenseMatrix factors = DenseMatrix::Zero(static_cast<Eigen::Index>(spec.rank), static_cast<Eigen::Index>(spec.d));
  for (Eigen::Index f = 0; f < factors.rows(); ++f) {
    for (Index c : sample_without_replacement(spec.d, per_factor, rng)) {
      factors(f, static_cast<Eigen::Index>(c)) = normal(rng);
    }
  }

  const std::size_t mix = std::clamp<std::size_t>(spec.factors_per_row, 1, spec.rank);
  DenseMatrix signal(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.d));
  for (Eigen::Index i = 0; i < signal.rows(); ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(signal.cols());
    for (Index f : sample_without_replacement(spec.rank, mix, rng)) {
      row += normal(rng) * factors.row(static_cast<Eigen::Index>(f));
    }
    signal.row(i) = row;
  }

  double sum_sq = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < signal.rows(); ++i) {
    for (Eigen::Index j = 0; j < signal.cols(); ++j) {
      if (signal(i, j) != 0.0) {
        sum_sq += signal(i, j) * signal(i, j);
        ++count;
      }
    }
  }
  const double sd = count > 0 ? spec.noise * std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
  for (Eigen::Index i = 0; i < signal.rows(); ++i) {
    for (Eigen::Index j = 0; j < signal.cols(); ++j) {
      if (signal(i, j) != 0.0) signal(i, j) += sd * normal(rng);
    }
  }
  return SparseMatrix::from_dense(signal);
}

DenseMatrix gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = normal(rng);
  }
  return out;
}

}  // namespace coreset
