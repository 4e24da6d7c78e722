#include "coreset/one_mean.hpp"

#include "coreset/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace coreset {

namespace {

// Variance below this fraction of the mean squared norm means all points coincide.
constexpr double kDegenerateSpread = 1e-12;

double sparse_dot(const SparseRowView& row, const Vector& dense) {
  double s = 0.0;
  for (std::size_t t = 0; t < row.nnz(); ++t) s += row.values[t] * dense(static_cast<Eigen::Index>(row.cols[t]));
  return s;
}

struct CloudStats {
  Vector mean;
  double mean_sq = 0.0;       // ‖m‖²
  double variance = 0.0;      // (1/n) Σ ‖a_i − m‖²
  std::vector<double> dot_mean;  // ⟨a_i, m⟩
  std::vector<double> norm_sq;   // ‖a_i‖²
};

CloudStats cloud_stats(const SparseMatrix& a) {
  CloudStats s;
  const auto n = static_cast<double>(a.rows());
  s.mean = Vector::Zero(static_cast<Eigen::Index>(a.cols()));
  for (Index i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (std::size_t t = 0; t < row.nnz(); ++t) s.mean(static_cast<Eigen::Index>(row.cols[t])) += row.values[t];
  }
  s.mean /= n;
  s.mean_sq = s.mean.squaredNorm();
  s.dot_mean.resize(a.rows());
  s.norm_sq.resize(a.rows());
  double total = 0.0;
  double total_norm = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    s.dot_mean[i] = sparse_dot(row, s.mean);
    s.norm_sq[i] = row.norm_sq();
    total += s.norm_sq[i] - 2.0 * s.dot_mean[i] + s.mean_sq;
    total_norm += s.norm_sq[i];
  }
  s.variance = total / n;
  if (s.variance <= kDegenerateSpread * (total_norm / n)) s.variance = 0.0;
  return s;
}

/// Unit-normalized lifts q_i / ‖q_i‖ of q_i = (b_i, ‖b_i‖², 1), b_i = (a_i − m)/σ, evaluated
/// from the sparse rows without forming the centered (dense) points.
class CenteredLiftOracle final : public PointSetOracle {
 public:
  CenteredLiftOracle(const SparseMatrix& a, const CloudStats& stats) : a_(a), stats_(stats) {
    const double inv_var = 1.0 / stats.variance;
    centered_sq_.resize(a.rows());
    lift_norm_.resize(a.rows());
    for (Index i = 0; i < a.rows(); ++i) {
      centered_sq_[i] = std::max(0.0, (stats.norm_sq[i] - 2.0 * stats.dot_mean[i] + stats.mean_sq) * inv_var);
      lift_norm_[i] = std::sqrt(centered_sq_[i] + centered_sq_[i] * centered_sq_[i] + 1.0);
    }
  }

  std::size_t size() const override { return a_.rows(); }

  double inner(Index i, Index j) const override {
    const auto ri = a_.row(i);
    const auto rj = a_.row(j);
    double aa = 0.0;
    for (std::size_t p = 0, q = 0; p < ri.nnz() && q < rj.nnz();) {
      if (ri.cols[p] == rj.cols[q]) {
        aa += ri.values[p++] * rj.values[q++];
      } else if (ri.cols[p] < rj.cols[q]) {
        ++p;
      } else {
        ++q;
      }
    }
    return lifted_inner(i, j, aa);
  }

  void inner_column(Index j, std::span<double> out) const override {
    Vector dense = Vector::Zero(static_cast<Eigen::Index>(a_.cols()));
    const auto rj = a_.row(j);
    for (std::size_t t = 0; t < rj.nnz(); ++t) dense(static_cast<Eigen::Index>(rj.cols[t])) = rj.values[t];
    for (Index i = 0; i < a_.rows(); ++i) out[i] = lifted_inner(i, j, sparse_dot(a_.row(i), dense));
  }

  TargetProducts target_products(const SimplexWeights& z) const override {
    // μ = Σ c_l q_l with c_l = z_l/‖q_l‖, split into its three blocks.
    const double sd = std::sqrt(stats_.variance);
    Vector raw = Vector::Zero(static_cast<Eigen::Index>(a_.cols()));
    double coef_sum = 0.0;
    double mu_sq_block = 0.0;
    for (const auto& [l, zl] : z.entries()) {
      const double c = zl / lift_norm_[l];
      const auto row = a_.row(l);
      for (std::size_t t = 0; t < row.nnz(); ++t) raw(static_cast<Eigen::Index>(row.cols[t])) += c * row.values[t];
      coef_sum += c;
      mu_sq_block += c * centered_sq_[l];
    }
    const Vector mu_b = (raw - coef_sum * stats_.mean) / sd;
    const double mean_dot = stats_.mean.dot(mu_b);
    TargetProducts t;
    t.inner.resize(a_.rows());
    for (Index i = 0; i < a_.rows(); ++i) {
      const double b_dot = (sparse_dot(a_.row(i), mu_b) - mean_dot) / sd;
      t.inner[i] = (b_dot + centered_sq_[i] * mu_sq_block + coef_sum) / lift_norm_[i];
    }
    t.norm_sq = mu_b.squaredNorm() + mu_sq_block * mu_sq_block + coef_sum * coef_sum;
    return t;
  }

  double lift_norm(Index i) const { return lift_norm_[i]; }

  DenseMatrix explicit_points() const {
    const double sd = std::sqrt(stats_.variance);
    const auto d = static_cast<Eigen::Index>(a_.cols());
    DenseMatrix q(static_cast<Eigen::Index>(a_.rows()), d + 2);
    for (Index i = 0; i < a_.rows(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      q.row(r).head(d) = -stats_.mean.transpose();
      const auto row = a_.row(i);
      for (std::size_t t = 0; t < row.nnz(); ++t) q(r, static_cast<Eigen::Index>(row.cols[t])) += row.values[t];
      q.row(r).head(d) /= sd;
      q(r, d) = centered_sq_[i];
      q(r, d + 1) = 1.0;
      q.row(r) /= lift_norm_[i];
    }
    return q;
  }

 private:
  double lifted_inner(Index i, Index j, double aa) const {
    const double b_dot =
        (aa - stats_.dot_mean[i] - stats_.dot_mean[j] + stats_.mean_sq) / stats_.variance;
    return (b_dot + centered_sq_[i] * centered_sq_[j] + 1.0) / (lift_norm_[i] * lift_norm_[j]);
  }

  const SparseMatrix& a_;
  const CloudStats& stats_;
  std::vector<double> centered_sq_;
  std::vector<double> lift_norm_;
};

double bound_from_moments(double d_count, double d_second, double d_first_norm) {
  // sup_x |(Δ2 − 2xD + δ0x²)/(1 + x²)| is the spectral radius of [[Δ2, −D], [−D, δ0]].
  const double mid = 0.5 * (d_second + d_count);
  const double rad = std::hypot(0.5 * (d_second - d_count), d_first_norm);
  return std::max(std::abs(mid + rad), std::abs(mid - rad));
}

double one_mean_bound(const SparseMatrix& a, const CloudStats& stats, const OneMeanCoreset& cs) {
  const auto n = static_cast<double>(a.rows());
  double count = 0.0;
  for (double w : cs.weights) count += w;
  const double d_count = count / n - 1.0;
  if (stats.variance == 0.0) return std::abs(d_count);

  const double sd = std::sqrt(stats.variance);
  Vector first = Vector::Zero(static_cast<Eigen::Index>(a.cols()));
  double second = 0.0;
  for (std::size_t t = 0; t < cs.indices.size(); ++t) {
    const Index i = cs.indices[t];
    const double c = cs.weights[t] / n;
    const auto row = a.row(i);
    for (std::size_t p = 0; p < row.nnz(); ++p) first(static_cast<Eigen::Index>(row.cols[p])) += c * row.values[p];
    second += c * (stats.norm_sq[i] - 2.0 * stats.dot_mean[i] + stats.mean_sq) / stats.variance;
  }
  // Σ (w_i/n) b_i, with b_i = (a_i − m)/σ.
  const Vector d_first = (first - (count / n) * stats.mean) / sd;
  return bound_from_moments(d_count, second - 1.0, d_first.norm());
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    fail(ErrorCode::BadEpsilon, "one_mean_coreset: epsilon must lie in (0, 1], got " + std::to_string(epsilon));
  }
}

}  // namespace

OneMeanCoreset one_mean_coreset(const SparseMatrix& points, double epsilon, const OneMeanOptions& options) {
  check_epsilon(epsilon);
  const std::size_t n = points.rows();
  if (n == 0) fail(ErrorCode::EmptyInput, "one_mean_coreset: no points");

  OneMeanCoreset cs;
  cs.n_source = n;
  const CloudStats stats = cloud_stats(points);
  if (n == 1 || stats.variance == 0.0) {
    cs.indices = {0};
    cs.weights = {static_cast<double>(n)};
    cs.error_bound = 0.0;
    return cs;
  }

  const CenteredLiftOracle oracle(points, stats);
  std::vector<double> lift_mass(n);
  double total_mass = 0.0;
  for (Index i = 0; i < n; ++i) {
    lift_mass[i] = oracle.lift_norm(i);
    total_mass += lift_mass[i];
  }
  // Σ z_i X_i = Σ q_i / M, the lifted mean up to scale.
  const SimplexWeights z = SimplexWeights::from_dense(lift_mass);

  SimplexWeights w;
  if (options.exact) {
    w = caratheodory_exact(oracle.explicit_points(), z);
  } else {
    // The relative error over all centers is at most √2·(M/n)·residual.
    const double mean_mass = total_mass / static_cast<double>(n);
    const double target = std::min(1.0, epsilon / (std::sqrt(2.0) * mean_mass));
    const auto max_steps = static_cast<std::size_t>(std::ceil(4.0 / (epsilon * epsilon))) - 1;
    FwOptions fw;
    fw.start = options.start;
    w = frank_wolfe(oracle, z, target, max_steps, fw).weights;
  }

  for (const auto& [i, wi] : w.entries()) {
    cs.indices.push_back(i);
    cs.weights.push_back(total_mass * wi / lift_mass[i]);
  }
  cs.error_bound = one_mean_bound(points, stats, cs);
  return cs;
}

double one_mean_error_bound(const SparseMatrix& points, const OneMeanCoreset& cs) {
  if (points.rows() == 0) fail(ErrorCode::EmptyInput, "one_mean_error_bound: no points");
  return one_mean_bound(points, cloud_stats(points), cs);
}

double eval_one_mean(const SparseMatrix& points, const OneMeanCoreset& cs, const DenseMatrix& centers) {
  if (static_cast<std::size_t>(centers.cols()) != points.cols()) {
    fail(ErrorCode::DimensionMismatch, "eval_one_mean: centers must have d columns");
  }
  if (cs.indices.size() != cs.weights.size()) {
    fail(ErrorCode::DimensionMismatch, "eval_one_mean: indices and weights differ in length");
  }
  const auto d = static_cast<Eigen::Index>(points.cols());
  // Per-row squared distances to every center, from densified rows (no cancellation).
  auto sq_dist = [&](Index i) -> Vector {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
    const auto r = points.row(i);
    for (std::size_t t = 0; t < r.nnz(); ++t) row(static_cast<Eigen::Index>(r.cols[t])) = r.values[t];
    return (centers.rowwise() - row).rowwise().squaredNorm();
  };
  Vector full = Vector::Zero(centers.rows());
  for (Index i = 0; i < points.rows(); ++i) full += sq_dist(i);
  Vector weighted = Vector::Zero(centers.rows());
  for (std::size_t t = 0; t < cs.indices.size(); ++t) weighted += cs.weights[t] * sq_dist(cs.indices[t]);

  double worst = 0.0;
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    double err = 0.0;
    if (full(c) > 0.0) {
      err = std::abs(full(c) - weighted(c)) / full(c);
    } else if (weighted(c) != 0.0) {
      err = 1.0;
    }
    worst = std::max(worst, err);
  }
  return worst;
}

DenseMatrix sample_centers(const SparseMatrix& points, std::size_t m, std::uint64_t seed) {
  if (points.rows() == 0) fail(ErrorCode::EmptyInput, "sample_centers: no points");
  const auto d = static_cast<Eigen::Index>(points.cols());
  const DenseMatrix dense = points.to_dense();
  const Eigen::RowVectorXd lo = dense.colwise().minCoeff();
  const Eigen::RowVectorXd hi = dense.colwise().maxCoeff();
  const Eigen::RowVectorXd mid = 0.5 * (lo + hi);
  const Eigen::RowVectorXd half = hi - lo;  // inflated half-width: 2 × (hi − lo)/2

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  DenseMatrix centers(static_cast<Eigen::Index>(m) + 2, d);
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(m); ++c) {
    for (Eigen::Index j = 0; j < d; ++j) centers(c, j) = mid(j) + half(j) * unit(rng);
  }
  centers.row(static_cast<Eigen::Index>(m)).setZero();
  centers.row(static_cast<Eigen::Index>(m) + 1) = dense.colwise().mean();
  return centers;
}

}  // namespace coreset
