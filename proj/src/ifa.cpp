#include "coreset/ifa.hpp"

#include "coreset/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

namespace coreset {

namespace {

constexpr double kSimplexSumTol = 1e-9;
constexpr double kNegativeResidualTol = 1e-9;
constexpr double kDegenerateDenominator = 1e-15;
constexpr double kStallAlpha = 1e-12;
constexpr double kAffineRankTol = 1e-10;

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    fail(ErrorCode::BadEpsilon, "epsilon must lie in (0, 1], got " + std::to_string(epsilon));
  }
}

}  // namespace

SimplexWeights::SimplexWeights(std::size_t n, std::map<Index, double> weights)
    : n_(n), weights_(std::move(weights)) {
  double sum = 0.0;
  for (const auto& [i, w] : weights_) {
    if (i >= n_) fail(ErrorCode::InvalidArgument, "simplex index " + std::to_string(i) + " >= n");
    if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorCode::InvalidArgument, "simplex weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSimplexSumTol) {
    fail(ErrorCode::InvalidArgument, "simplex weights sum to " + std::to_string(sum));
  }
}

SimplexWeights SimplexWeights::uniform(std::size_t n) {
  if (n == 0) fail(ErrorCode::EmptyInput, "uniform distribution over zero items");
  std::map<Index, double> w;
  for (Index i = 0; i < n; ++i) w.emplace_hint(w.end(), i, 1.0 / static_cast<double>(n));
  return SimplexWeights(n, std::move(w));
}

SimplexWeights SimplexWeights::vertex(std::size_t n, Index i) { return SimplexWeights(n, {{i, 1.0}}); }

SimplexWeights SimplexWeights::from_dense(std::span<const double> dense) {
  double sum = 0.0;
  for (double v : dense) {
    if (v > 0.0) sum += v;
  }
  if (!(sum > 0.0)) fail(ErrorCode::InvalidArgument, "distribution has no positive mass");
  std::map<Index, double> w;
  for (Index i = 0; i < dense.size(); ++i) {
    if (dense[i] > 0.0) w.emplace_hint(w.end(), i, dense[i] / sum);
  }
  return SimplexWeights(dense.size(), std::move(w));
}

double SimplexWeights::at(Index i) const {
  const auto it = weights_.find(i);
  return it == weights_.end() ? 0.0 : it->second;
}

std::vector<double> SimplexWeights::to_dense() const {
  std::vector<double> out(n_, 0.0);
  for (const auto& [i, w] : weights_) out[i] = w;
  return out;
}

void PointSetOracle::inner_column(Index j, std::span<double> out) const {
  for (Index i = 0; i < out.size(); ++i) out[i] = inner(i, j);
}

TargetProducts PointSetOracle::target_products(const SimplexWeights& z) const {
  const std::size_t n = size();
  TargetProducts t;
  t.inner.assign(n, 0.0);
  std::vector<double> column(n);
  for (const auto& [l, zl] : z.entries()) {
    inner_column(l, column);
    for (Index i = 0; i < n; ++i) t.inner[i] += zl * column[i];
  }
  for (const auto& [l, zl] : z.entries()) t.norm_sq += zl * t.inner[l];
  return t;
}

double ExplicitVectorOracle::inner(Index i, Index j) const {
  return points_.row(static_cast<Eigen::Index>(i)).dot(points_.row(static_cast<Eigen::Index>(j)));
}

void ExplicitVectorOracle::inner_column(Index j, std::span<double> out) const {
  Eigen::Map<Vector>(out.data(), points_.rows()) = points_ * points_.row(static_cast<Eigen::Index>(j)).transpose();
}

TargetProducts ExplicitVectorOracle::target_products(const SimplexWeights& z) const {
  Vector mu = Vector::Zero(points_.cols());
  for (const auto& [l, zl] : z.entries()) mu += zl * points_.row(static_cast<Eigen::Index>(l)).transpose();
  const Vector t = points_ * mu;
  return {std::vector<double>(t.data(), t.data() + t.size()), mu.squaredNorm()};
}

double line_search_alpha(const LineSearchState& s) {
  const double denominator = s.vertex_norm_sq + s.c - 2.0 * s.a;
  if (std::abs(denominator) < kDegenerateDenominator) {
    fail(ErrorCode::DegenerateStep, "current iterate coincides with the selected vertex");
  }
  const double alpha = (s.c - s.a - s.b) / denominator;
  return std::clamp(alpha, 0.0, 1.0);
}

namespace {

Index argmin_gradient(std::span<const double> center_inner, std::span<const double> target_inner) {
  Index best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < center_inner.size(); ++i) {
    const double g = center_inner[i] - target_inner[i];
    if (g < best_value) {
      best_value = g;
      best = i;
    }
  }
  return best;
}

class ColumnCache {
 public:
  ColumnCache(const PointSetOracle& oracle, std::size_t budget) : oracle_(oracle), budget_(budget) {}

  std::span<const double> get(Index j) {
    if (auto it = cache_.find(j); it != cache_.end()) return it->second;
    const std::size_t n = oracle_.size();
    if ((cache_.size() + 1) * n <= budget_) {
      auto& col = cache_[j];
      col.resize(n);
      oracle_.inner_column(j, col);
      return col;
    }
    scratch_.resize(n);
    oracle_.inner_column(j, scratch_);
    return scratch_;
  }

 private:
  const PointSetOracle& oracle_;
  std::size_t budget_;
  std::unordered_map<Index, std::vector<double>> cache_;
  std::vector<double> scratch_;
};

}  // namespace

Index select_vertex(const PointSetOracle& oracle, const SimplexWeights& z, const SimplexWeights& w) {
  const std::size_t n = oracle.size();
  if (z.n() != n || w.n() != n) fail(ErrorCode::DimensionMismatch, "select_vertex: distribution size != n");
  const TargetProducts target = oracle.target_products(z);
  std::vector<double> center(n, 0.0);
  std::vector<double> column(n);
  for (const auto& [l, wl] : w.entries()) {
    oracle.inner_column(l, column);
    for (Index i = 0; i < n; ++i) center[i] += wl * column[i];
  }
  return argmin_gradient(center, target.inner);
}

FwResult frank_wolfe(const PointSetOracle& oracle, const SimplexWeights& z, double epsilon,
                     std::size_t max_iter, const FwOptions& options) {
  check_epsilon(epsilon);
  if (z.n() != oracle.size()) fail(ErrorCode::DimensionMismatch, "frank_wolfe: target size != n");
  return frank_wolfe(oracle, oracle.target_products(z), epsilon, max_iter, options);
}

FwResult frank_wolfe(const PointSetOracle& oracle, const TargetProducts& target, double epsilon,
                     std::size_t max_iter, const FwOptions& options) {
  check_epsilon(epsilon);
  const std::size_t n = oracle.size();
  if (n == 0) fail(ErrorCode::EmptyInput, "frank_wolfe: empty point set");
  if (target.inner.size() != n) fail(ErrorCode::DimensionMismatch, "frank_wolfe: target products size != n");

  const double mu_sq = target.norm_sq;
  // ⌈1/ε²⌉ can exceed size_t for tiny ε; compare in floating point first.
  const double budget = std::ceil(1.0 / (epsilon * epsilon));
  const std::size_t max_steps =
      budget >= static_cast<double>(max_iter) ? max_iter : static_cast<std::size_t>(budget);

  Index start = 0;
  if (options.start == FwOptions::Start::NearestVertex) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      const double dist = oracle.inner(i, i) - 2.0 * target.inner[i];
      if (dist < best) {
        best = dist;
        start = i;
      }
    }
  }

  ColumnCache columns(oracle, options.column_cache_budget);
  std::vector<double> w(n, 0.0);
  w[start] = 1.0;
  const auto first = columns.get(start);
  std::vector<double> center_inner(first.begin(), first.end());  // ⟨c, a_i⟩
  double center_sq = first[start];                               // ‖c‖²
  double center_target = target.inner[start];                    // ⟨c, μ⟩

  FwResult result;
  FwTrace& trace = result.trace;
  auto residual_sq_now = [&] {
    const double r2 = center_sq - 2.0 * center_target + mu_sq;
    if (r2 < -kNegativeResidualTol) {
      fail(ErrorCode::OracleInconsistency, "squared residual " + std::to_string(r2) +
                                               " is negative; the Gram matrix is not PSD");
    }
    return std::max(r2, 0.0);
  };
  auto record = [&](Index vertex, double alpha, double r2) {
    ++trace.iterations;
    trace.selected_indices.push_back(vertex);
    trace.alphas.push_back(alpha);
    trace.residual_norm_per_iter.push_back(std::sqrt(r2));
    if (options.on_iteration) options.on_iteration({trace.iterations, w, r2});
  };

  double r2 = residual_sq_now();
  record(start, 1.0, r2);

  for (std::size_t step = 0; step < max_steps && std::sqrt(r2) > epsilon; ++step) {
    const Index j = argmin_gradient(center_inner, target.inner);
    const auto col = columns.get(j);
    LineSearchState state;
    state.a = center_inner[j];
    state.b = center_target - target.inner[j];
    state.c = center_sq;
    state.vertex_norm_sq = col[j];
    double alpha = 0.0;
    try {
      alpha = line_search_alpha(state);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateStep) throw;
      break;
    }
    if (alpha <= kStallAlpha) break;

    const double keep = 1.0 - alpha;
    for (double& wi : w) wi *= keep;
    w[j] += alpha;
    for (Index i = 0; i < n; ++i) center_inner[i] = keep * center_inner[i] + alpha * col[i];
    center_sq = keep * keep * center_sq + 2.0 * alpha * keep * state.a + alpha * alpha * col[j];
    center_target = keep * center_target + alpha * target.inner[j];
    r2 = residual_sq_now();
    record(j, alpha, r2);
  }

  result.weights = SimplexWeights::from_dense(w);
  result.residual = std::sqrt(r2);
  return result;
}

double explicit_residual(const DenseMatrix& points, const SimplexWeights& z, const SimplexWeights& w) {
  Vector diff = Vector::Zero(points.cols());
  for (const auto& [i, zi] : z.entries()) diff += zi * points.row(static_cast<Eigen::Index>(i)).transpose();
  for (const auto& [i, wi] : w.entries()) diff -= wi * points.row(static_cast<Eigen::Index>(i)).transpose();
  return diff.norm();
}

SimplexWeights caratheodory_exact(const DenseMatrix& points, const SimplexWeights& z) {
  const auto n = static_cast<std::size_t>(points.rows());
  const Eigen::Index d = points.cols();
  if (z.n() != n) fail(ErrorCode::DimensionMismatch, "caratheodory_exact: z size != number of points");

  std::vector<Index> support;
  std::vector<double> weight;
  for (const auto& [i, zi] : z.entries()) {
    support.push_back(i);
    weight.push_back(zi);
  }

  const Eigen::Index block_limit = d + 2;
  while (support.size() > 1) {
    const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(support.size(), block_limit));
    DenseMatrix lifted(d + 1, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      lifted.col(c).head(d) = points.row(static_cast<Eigen::Index>(support[c])).transpose();
      lifted(d, c) = 1.0;
    }
    Eigen::JacobiSVD<DenseMatrix> svd(lifted, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    // With m > d + 1 columns a null vector always exists; otherwise only if the
    // remaining support is affinely dependent.
    if (m <= d + 1 && sv(m - 1) > kAffineRankTol * sv(0)) break;
    Vector v = svd.matrixV().col(m - 1);
    if (v.maxCoeff() <= 0.0) v = -v;
    const double scale = v.cwiseAbs().maxCoeff();
    if (!(v.maxCoeff() > 1e-12 * scale)) {
      fail(ErrorCode::NumericalBreakdown, "caratheodory_exact: null vector has no positive pivot");
    }

    double ratio = std::numeric_limits<double>::infinity();
    Eigen::Index pivot = -1;
    for (Eigen::Index c = 0; c < m; ++c) {
      if (v(c) > 1e-12 * scale) {
        const double r = weight[static_cast<std::size_t>(c)] / v(c);
        if (r < ratio) {
          ratio = r;
          pivot = c;
        }
      }
    }
    for (Eigen::Index c = 0; c < m; ++c) weight[static_cast<std::size_t>(c)] -= ratio * v(c);
    weight[static_cast<std::size_t>(pivot)] = 0.0;

    std::size_t keep = 0;
    for (std::size_t t = 0; t < support.size(); ++t) {
      if (weight[t] > 0.0) {
        support[keep] = support[t];
        weight[keep] = weight[t];
        ++keep;
      }
    }
    support.resize(keep);
    weight.resize(keep);
  }

  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  std::map<Index, double> out;
  for (std::size_t t = 0; t < support.size(); ++t) out.emplace(support[t], weight[t] / total);
  return SimplexWeights(n, std::move(out));
}

}  // namespace coreset
