#include "coreset/eval.hpp"

#include "coreset/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace coreset {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t q) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (q + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_coreset(const SparseMatrix& a, const CoresetResult& cs) {
  if (cs.indices.size() != cs.row_weights.size()) {
    fail(ErrorCode::DimensionMismatch, "eval: coreset indices and weights differ in length");
  }
  for (Index i : cs.indices) {
    if (i >= a.rows()) {
      fail(ErrorCode::DimensionMismatch, "eval: coreset row " + std::to_string(i) + " is outside A (" +
                                             std::to_string(a.rows()) + " rows)");
    }
  }
}

// Eigenvectors of a symmetric matrix, columns ordered by descending eigenvalue.
DenseMatrix descending_basis(const DenseMatrix& gram) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(gram);
  if (es.info() != Eigen::Success) fail(ErrorCode::NumericalBreakdown, "eval: eigendecomposition failed");
  return es.eigenvectors().rowwise().reverse();
}

// ‖MX‖² from the sparse rows. Going through MᵀM would leave rounding of order
// 1e-16·‖M‖² and swamp queries that nearly annihilate the data.
double cost(const SparseMatrix& m, const DenseMatrix& x) { return m.multiply(x).squaredNorm(); }

}  // namespace

EvalReport evaluate(const SparseMatrix& a, const CoresetResult& cs, std::size_t n_queries, std::uint64_t seed) {
  if (n_queries == 0) fail(ErrorCode::InvalidArgument, "evaluate: n_queries must be >= 1");
  check_coreset(a, cs);
  const std::size_t d = a.cols();
  if (cs.k == 0 || cs.k >= d) {
    fail(ErrorCode::DimensionMismatch, "evaluate: need 1 <= k < d, got k = " + std::to_string(cs.k));
  }
  const auto t0 = Clock::now();

  EvalReport report;
  report.n_queries = n_queries;
  report.epsilon_target = cs.epsilon_target;
  report.bound_5eps = 5.0 * cs.epsilon_residual;
  report.coreset_size = cs.size();
  const SparseMatrix weighted = weighted_rows(a, cs);
  report.nnz_ratio = a.nnz() > 0 ? static_cast<double>(weighted.nnz()) / static_cast<double>(a.nnz()) : 0.0;

  const DenseMatrix basis = descending_basis(a.gram());
  const double floor = kDegenerateRel * a.frobenius_norm_sq();
  report.wall_time_ms.gram_ms = ms_since(t0);

  const auto t1 = Clock::now();
  const auto m = static_cast<Eigen::Index>(d - cs.k);
  auto run_query = [&](std::string label, const DenseMatrix& x) {
    QueryError q{std::move(label), 0.0, false};
    const double full = cost(a, x);
    if (full <= floor) {
      q.degenerate = true;
    } else {
      q.error = std::abs(1.0 - cost(weighted, x) / full);
    }
    report.queries.push_back(std::move(q));
  };
  for (std::size_t q = 0; q < n_queries; ++q) {
    run_query("random-" + std::to_string(q), random_orthonormal(d, d - cs.k, mix_seed(seed, q)));
  }
  run_query("optimal", basis.rightCols(m));
  run_query("worst", basis.leftCols(m));
  report.wall_time_ms.queries_ms = ms_since(t1);

  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& q : report.queries) {
    if (q.degenerate) {
      ++report.n_degenerate;
      continue;
    }
    report.max_rel_error = std::max(report.max_rel_error, q.error);
    sum += q.error;
    ++counted;
  }
  report.mean_rel_error = counted > 0 ? sum / static_cast<double>(counted) : 0.0;
  report.wall_time_ms.total_ms = ms_since(t0);
  return report;
}

std::pair<double, double> optimal_cost_comparison(const SparseMatrix& a, const CoresetResult& cs, std::size_t k) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "optimal_cost_comparison: k must be >= 1");
  if (k >= a.cols()) fail(ErrorCode::KTooLarge, "optimal_cost_comparison: need k < d");
  check_coreset(a, cs);
  const auto m = static_cast<Eigen::Index>(a.cols() - k);
  // Costs are evaluated on the complement so that small costs are not lost to cancellation.
  const double best = cost(a, descending_basis(a.gram()).rightCols(m));
  const double achieved = cost(a, descending_basis(weighted_rows(a, cs).gram()).rightCols(m));
  return {best, achieved};
}

double brute_force_2d(const SparseMatrix& a, const CoresetResult& cs, std::size_t grid) {
  if (a.cols() != 2) fail(ErrorCode::WrongDims, "brute_force_2d: need d = 2, got " + std::to_string(a.cols()));
  if (cs.k != 1) fail(ErrorCode::WrongDims, "brute_force_2d: need k = 1, got " + std::to_string(cs.k));
  if (grid == 0) fail(ErrorCode::InvalidArgument, "brute_force_2d: grid must be >= 1");
  check_coreset(a, cs);
  const DenseMatrix ad = a.to_dense();
  const DenseMatrix wd = weighted_rows(a, cs).to_dense();
  const double floor = kDegenerateRel * a.frobenius_norm_sq();
  double worst = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid);
    // The line is span(cos θ, sin θ); distances are measured along its normal.
    Eigen::Vector2d x(-std::sin(theta), std::cos(theta));
    const double full = (ad * x).squaredNorm();
    if (full <= floor) continue;
    worst = std::max(worst, std::abs(1.0 - (wd * x).squaredNorm() / full));
  }
  return worst;
}

nlohmann::json to_json(const EvalReport& r, bool include_timing) {
  nlohmann::json j;
  j["n_queries"] = r.n_queries;
  j["max_rel_error"] = r.max_rel_error;
  j["mean_rel_error"] = r.mean_rel_error;
  j["epsilon_target"] = r.epsilon_target;
  j["bound_5eps"] = r.bound_5eps;
  j["coreset_size"] = r.coreset_size;
  j["nnz_ratio"] = r.nnz_ratio;
  j["n_degenerate"] = r.n_degenerate;
  const auto find = [&](const char* label) -> nlohmann::json {
    for (const auto& q : r.queries) {
      if (q.label == label) return q.degenerate ? nlohmann::json(nullptr) : nlohmann::json(q.error);
    }
    return nullptr;
  };
  j["optimal_query_error"] = find("optimal");
  j["worst_query_error"] = find("worst");
  if (include_timing) {
    j["wall_time_ms"] = {{"gram", r.wall_time_ms.gram_ms},
                         {"queries", r.wall_time_ms.queries_ms},
                         {"total", r.wall_time_ms.total_ms}};
  }
  return j;
}

std::string format_table(const EvalReport& r) {
  std::ostringstream os;
  os.precision(6);
  auto line = [&](const char* key, auto value) { os << "  " << key << std::string(16 - std::string(key).size(), ' ') << value << '\n'; };
  line("queries", std::to_string(r.n_queries) + " + 2 extremes");
  line("degenerate", r.n_degenerate);
  line("max error", r.max_rel_error);
  line("mean error", r.mean_rel_error);
  line("5x residual", r.bound_5eps);
  line("epsilon", r.epsilon_target);
  line("coreset rows", r.coreset_size);
  line("nnz ratio", r.nnz_ratio);
  line("time (ms)", r.wall_time_ms.total_ms);
  os << (r.max_rel_error <= r.bound_5eps ? "  within bound\n" : "  BOUND EXCEEDED\n");
  return os.str();
}

std::string per_query_csv(const EvalReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "query,error,degenerate\n";
  for (const auto& q : r.queries) os << q.label << ',' << q.error << ',' << (q.degenerate ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace coreset
