#pragma once

#include "coreset/matrix.hpp"
#include "coreset/svd_coreset.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace coreset {

/// A coreset of some set of source rows, carried with its own weighted rows so the
/// originals can be dropped.
struct CoresetNode {
  std::vector<Index> indices;   // global source rows, sorted
  std::vector<double> weights;  // multipliers relative to the original rows
  SparseMatrix rows;            // weights[t] · a_{indices[t]}
  /// Relative query-error bound of this node against its source rows.
  double error_bound = 0.0;
  bool exact = true;
  /// Number of reductions on the longest path from the source rows to this node.
  std::size_t depth = 0;
  /// epsilon_residual of the reduction that produced this node.
  double last_residual = 0.0;
  FwTrace trace;

  std::size_t size() const { return indices.size(); }
};

/// Leaf node holding raw rows with unit weight.
CoresetNode raw_node(const SparseMatrix& rows, Index first_index);

/// Converts a node to the public result type. A node produced by a single reduction
/// reports that reduction's residual; deeper nodes report error_bound / 5 so that the
/// usual 5·epsilon_residual query bound covers the composed error.
CoresetResult to_result(const CoresetNode& node, std::size_t k, double epsilon);

/// Early-exit target for reductions in a tree expected to be `levels` deep: ε for a single
/// level, ε/(2·levels) otherwise.
double leaf_epsilon(double epsilon, std::size_t levels);

/// Binary-counter merge-and-reduce tree: level ℓ holds a coreset of 2^ℓ leaves.
class MergeTree {
 public:
  MergeTree(std::size_t k, double epsilon, std::uint64_t seed = 0);

  /// Concatenates the parts (already weighted) and reduces them to one coreset with at
  /// most ⌈k/ε²⌉ + 1 rows; parts too small to reduce are returned as their union.
  CoresetNode reduce(std::span<const CoresetNode> parts, double residual_target) const;

  /// Inserts a node at level 0 and carries merges upward.
  void push(CoresetNode node, double residual_target);

  /// Union of all occupied levels, reduced once more when more than one level is occupied.
  std::optional<CoresetNode> collapse(double residual_target) const;

  const std::vector<std::optional<CoresetNode>>& levels() const noexcept { return levels_; }
  std::size_t occupied_levels() const;
  std::size_t retained_rows() const;

 private:
  std::size_t k_;
  double epsilon_;
  std::uint64_t seed_;
  std::vector<std::optional<CoresetNode>> levels_;
};

struct StreamOptions {
  std::size_t chunk_size = 256;
  std::uint64_t seed = 0;
};

struct StreamResult {
  CoresetResult coreset;
  SparseMatrix rows;  // the final weighted rows, in coreset.indices order
};

/// One-pass coreset maintenance over a row stream. Memory stays within one chunk buffer
/// plus one coreset per occupied tree level.
class CoresetStream {
 public:
  CoresetStream(std::size_t d, std::size_t k, double epsilon, StreamOptions options = {});

  void insert(std::span<const Index> cols, std::span<const double> values);
  void insert(const SparseRowView& row);

  StreamResult finalize() const;

  std::size_t rows_seen() const noexcept { return rows_seen_; }
  std::size_t buffered_rows() const noexcept { return buffer_.rows(); }
  std::size_t peak_retained_rows() const noexcept { return peak_retained_; }
  const MergeTree& tree() const noexcept { return tree_; }
  std::size_t chunk_size() const noexcept { return options_.chunk_size; }

 private:
  double current_leaf_epsilon() const;
  void flush_buffer();
  void note_retained();

  std::size_t d_;
  std::size_t k_;
  double epsilon_;
  StreamOptions options_;
  SparseMatrixBuilder buffer_;
  MergeTree tree_;
  std::size_t rows_seen_ = 0;
  std::size_t peak_retained_ = 0;
};

/// Shards rows into `n_shards` contiguous blocks (default: one per worker), reduces the
/// shards concurrently, then merges them in shard order through a MergeTree. The result
/// depends only on the shard boundaries, never on the worker count.
StreamResult parallel_build(const SparseMatrix& a, std::size_t k, double epsilon, std::size_t n_workers,
                            std::size_t n_shards = 0, std::uint64_t seed = 0);

}  // namespace coreset
