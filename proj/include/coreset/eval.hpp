#pragma once

#include "coreset/matrix.hpp"
#include "coreset/svd_coreset.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace coreset {

struct QueryError {
  std::string label;  // "random-<q>", "optimal" or "worst"
  double error = 0.0;
  bool degenerate = false;  // ‖AX‖² too small for a relative error; excluded from max/mean
};

struct PhaseTimes {
  double gram_ms = 0.0;
  double queries_ms = 0.0;
  double total_ms = 0.0;
};

struct EvalReport {
  std::size_t n_queries = 0;  // random queries; the two extremes come on top
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  double epsilon_target = 0.0;
  double bound_5eps = 0.0;
  std::size_t coreset_size = 0;
  double nnz_ratio = 0.0;
  std::size_t n_degenerate = 0;
  std::vector<QueryError> queries;
  PhaseTimes wall_time_ms;
};

/// Queries with ‖AX‖² ≤ kDegenerateRel · ‖A‖_F² are skipped and counted.
inline constexpr double kDegenerateRel = 1e-20;

/// claim_error over n_queries random orthonormal d×(d−k) matrices plus the optimal and the
/// worst complement of A's principal subspace.
EvalReport evaluate(const SparseMatrix& a, const CoresetResult& cs, std::size_t n_queries, std::uint64_t seed);

/// (cost on A of A's best k-subspace, cost on A of the best k-subspace of the weighted coreset).
std::pair<double, double> optimal_cost_comparison(const SparseMatrix& a, const CoresetResult& cs, std::size_t k);

/// Max relative error over `grid` lines through the origin at angles iπ/grid (d = 2, k = 1).
double brute_force_2d(const SparseMatrix& a, const CoresetResult& cs, std::size_t grid);

nlohmann::json to_json(const EvalReport& report, bool include_timing = true);
std::string format_table(const EvalReport& report);
/// "query,error,degenerate" rows, one per query.
std::string per_query_csv(const EvalReport& report);

}  // namespace coreset
