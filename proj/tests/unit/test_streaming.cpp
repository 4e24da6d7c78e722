#include "coreset/generate.hpp"
#include "coreset/streaming.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>

using namespace coreset;

namespace {

void feed(CoresetStream& s, const SparseMatrix& a, Index begin, Index end) {
  for (Index i = begin; i < end; ++i) s.insert(a.row(i));
}

double max_query_error(const SparseMatrix& a, const CoresetResult& cs, std::size_t queries, std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t q = 0; q < queries; ++q) {
    worst = std::max(worst, claim_error(a, cs, random_orthonormal(a.cols(), a.cols() - cs.k, seed + q)));
  }
  return worst;
}

SparseMatrix identical_rows(std::size_t n, std::size_t d) {
  std::vector<SparseMatrix::Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, 0, 1.5});
    t.push_back({i, d - 1, -0.5});
  }
  return SparseMatrix::from_triplets(n, d, t);
}

// Weighted rows agree up to the rounding of composed multipliers.
bool same_rows(const SparseMatrix& x, const SparseMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || x.nnz() != y.nnz()) return false;
  if (!std::equal(x.col_indices().begin(), x.col_indices().end(), y.col_indices().begin())) return false;
  for (std::size_t t = 0; t < x.nnz(); ++t) {
    if (std::abs(x.values()[t] - y.values()[t]) > 1e-12 * std::abs(y.values()[t])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("leaf epsilon") {
  CHECK(leaf_epsilon(0.2, 1) == 0.2);
  CHECK(leaf_epsilon(0.2, 4) == doctest::Approx(0.025));
}

TEST_CASE("buffering: chunk-1 rows trigger no reduction") {
  const SparseMatrix a = testutil::random_sparse(40, 10, 0.3, 1);
  CoresetStream s(10, 2, 0.3, {16, 0});
  feed(s, a, 0, 15);
  CHECK(s.buffered_rows() == 15);
  CHECK(s.tree().occupied_levels() == 0);
}

TEST_CASE("binary carry: 2 chunks leave only level 1 occupied") {
  const SparseMatrix a = testutil::random_sparse(64, 10, 0.3, 2);
  CoresetStream s(10, 2, 0.3, {32, 0});
  feed(s, a, 0, 64);
  CHECK(s.buffered_rows() == 0);
  REQUIRE(s.tree().levels().size() == 2);
  CHECK_FALSE(s.tree().levels()[0].has_value());
  CHECK(s.tree().levels()[1].has_value());
}

TEST_CASE("a single chunk is the batch construction") {
  const SparseMatrix a = testutil::random_sparse(200, 30, 0.2, 3);
  for (std::size_t chunk : {200, 256}) {
    CoresetStream s(30, 3, 0.3, {chunk, 5});
    feed(s, a, 0, 200);
    const StreamResult r = s.finalize();
    SvdCoresetOptions options;
    options.seed = 5;
    const CoresetResult batch = svd_coreset(a, 3, 0.3, options);
    CHECK(r.coreset == batch);
    CHECK(r.rows == weighted_rows(a, batch));
  }
}

TEST_CASE("identical rows stream to a single exact row") {
  const SparseMatrix a = identical_rows(1000, 8);
  CoresetStream s(8, 2, 0.3, {64, 0});
  feed(s, a, 0, a.rows());
  const StreamResult r = s.finalize();
  CHECK(r.coreset.size() == 1);
  CHECK(r.coreset.exact);
  CHECK(max_query_error(a, r.coreset, 20, 1) <= 1e-9);
}

TEST_CASE("stream output satisfies the composed bound and the memory bound") {
  LowRankSpec spec;
  spec.n = 1000;
  spec.d = 40;
  spec.seed = 4;
  const SparseMatrix a = generate_low_rank(spec);
  const std::size_t chunk = 128, k = 4;
  const double eps = 0.3;
  CoresetStream s(40, k, eps, {chunk, 0});
  std::size_t max_levels = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    s.insert(a.row(i));
    const std::size_t bound = static_cast<std::size_t>(std::ceil(std::log2(std::max(1.0, double(s.rows_seen()) / chunk)))) + 1;
    CHECK(s.tree().occupied_levels() <= bound);
    max_levels = std::max(max_levels, s.tree().occupied_levels());
  }
  const StreamResult r = s.finalize();
  const std::size_t per_level = static_cast<std::size_t>(std::ceil(k / (eps * eps))) + 1;
  CHECK(s.peak_retained_rows() <= chunk + max_levels * per_level);
  CHECK(max_query_error(a, r.coreset, 60, 10) <= 5.0 * r.coreset.epsilon_residual);
  CHECK(same_rows(r.rows, weighted_rows(a, r.coreset)));
  CHECK(std::is_sorted(r.coreset.indices.begin(), r.coreset.indices.end()));
}

TEST_CASE("weights compose multiplicatively through merges") {
  const SparseMatrix a = testutil::random_sparse(600, 20, 0.3, 6);
  const MergeTree tree(3, 0.4);
  const CoresetNode left = tree.reduce(std::vector<CoresetNode>{raw_node(a.row_block(0, 300), 0)}, 0.1);
  const CoresetNode right = tree.reduce(std::vector<CoresetNode>{raw_node(a.row_block(300, 600), 300)}, 0.1);
  const CoresetNode merged = tree.reduce(std::vector<CoresetNode>{left, right}, 0.1);
  CHECK(merged.depth == 2);
  CHECK(same_rows(merged.rows, a.select_rows(merged.indices, merged.weights)));
  for (Index i : merged.indices) {
    const bool from_left = std::binary_search(left.indices.begin(), left.indices.end(), i);
    const bool from_right = std::binary_search(right.indices.begin(), right.indices.end(), i);
    CHECK((from_left || from_right));
  }
  CHECK(merged.error_bound >= std::max(left.error_bound, right.error_bound));
}

TEST_CASE("parallel build") {
  LowRankSpec spec;
  spec.n = 2000;
  spec.d = 100;
  spec.seed = 1;
  const SparseMatrix a = generate_low_rank(spec);

  SUBCASE("one worker is the batch path") {
    const StreamResult r = parallel_build(a, 5, 0.25, 1);
    CHECK(r.coreset == svd_coreset(a, 5, 0.25));
  }
  SUBCASE("four workers equal a sequential replay of the four shards") {
    const StreamResult par = parallel_build(a, 5, 0.25, 4);
    const StreamResult seq = parallel_build(a, 5, 0.25, 1, 4);
    CHECK(par.coreset == seq.coreset);
    CHECK(par.rows == seq.rows);
    // Replay by hand with the tree primitives.
    MergeTree tree(5, 0.25);
    const double target = leaf_epsilon(0.25, 3);
    for (std::size_t s = 0; s < 4; ++s) {
      const Index b = s * 500, e = (s + 1) * 500;
      tree.push(tree.reduce(std::vector<CoresetNode>{raw_node(a.row_block(b, e), b)}, target), target);
    }
    const CoresetNode replay = *tree.collapse(target);
    CHECK(replay.indices == par.coreset.indices);
    CHECK(replay.weights == par.coreset.row_weights);
  }
  SUBCASE("worker count does not change the result for fixed shards") {
    CHECK(parallel_build(a, 5, 0.25, 2, 6).coreset == parallel_build(a, 5, 0.25, 3, 6).coreset);
  }
}

TEST_CASE("shards of identical rows merge with zero error") {
  const SparseMatrix a = identical_rows(400, 6);
  const StreamResult r = parallel_build(a, 2, 0.3, 4);
  CHECK(r.coreset.size() == 1);
  CHECK(max_query_error(a, r.coreset, 20, 4) <= 1e-9);
}

TEST_CASE("errors") {
  CoresetStream s(5, 2, 0.3);
  CHECK_CODE(s.finalize(), ErrorCode::EmptyStream);
  const std::vector<Index> cols{5};
  const std::vector<double> vals{1.0};
  CHECK_CODE(s.insert(cols, vals), ErrorCode::DimensionMismatch);
  CHECK_CODE(CoresetStream(5, 2, 0.0), ErrorCode::BadEpsilon);
  CHECK_CODE(CoresetStream(5, 2, 0.3, {0, 0}), ErrorCode::InvalidArgument);
  const SparseMatrix a = testutil::random_sparse(10, 5, 0.5, 1);
  CHECK_CODE(parallel_build(a, 2, 0.3, 0), ErrorCode::InvalidArgument);
}
