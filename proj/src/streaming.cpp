#include "coreset/streaming.hpp"

#include "coreset/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

namespace coreset {

namespace {

std::size_t levels_for(std::size_t pieces) {
  std::size_t levels = 1;
  while ((std::size_t{1} << (levels - 1)) < pieces) ++levels;
  return levels;
}

CoresetNode sorted_node(std::vector<Index> indices, std::vector<double> weights, const SparseMatrix& rows) {
  std::vector<std::size_t> order(indices.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return indices[x] < indices[y]; });
  CoresetNode node;
  node.indices.reserve(order.size());
  node.weights.reserve(order.size());
  std::vector<Index> local(order.begin(), order.end());
  for (std::size_t t : order) {
    node.indices.push_back(indices[t]);
    node.weights.push_back(weights[t]);
  }
  node.rows = rows.select_rows(local);
  return node;
}

}  // namespace

CoresetNode raw_node(const SparseMatrix& rows, Index first_index) {
  CoresetNode node;
  node.indices.resize(rows.rows());
  std::iota(node.indices.begin(), node.indices.end(), first_index);
  node.weights.assign(rows.rows(), 1.0);
  node.rows = rows;
  return node;
}

CoresetResult to_result(const CoresetNode& node, std::size_t k, double epsilon) {
  CoresetResult r;
  r.indices = node.indices;
  r.row_weights = node.weights;
  r.k = k;
  r.epsilon_target = epsilon;
  r.epsilon_residual = node.depth <= 1 ? node.last_residual : node.error_bound / 5.0;
  r.exact = node.exact;
  r.trace = node.trace;
  return r;
}

double leaf_epsilon(double epsilon, std::size_t levels) {
  return levels <= 1 ? epsilon : epsilon / (2.0 * static_cast<double>(levels));
}

MergeTree::MergeTree(std::size_t k, double epsilon, std::uint64_t seed) : k_(k), epsilon_(epsilon), seed_(seed) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail(ErrorCode::BadEpsilon, "MergeTree: epsilon must lie in (0, 1]");
  if (k == 0) fail(ErrorCode::InvalidArgument, "MergeTree: k must be >= 1");
}

CoresetNode MergeTree::reduce(std::span<const CoresetNode> parts, double residual_target) const {
  if (parts.empty()) fail(ErrorCode::EmptyInput, "MergeTree::reduce: nothing to reduce");
  std::vector<SparseMatrix> blocks;
  std::vector<Index> indices;
  std::vector<double> weights;
  double bound = 0.0;
  bool exact = true;
  std::size_t depth = 0;
  for (const auto& p : parts) {
    blocks.push_back(p.rows);
    indices.insert(indices.end(), p.indices.begin(), p.indices.end());
    weights.insert(weights.end(), p.weights.begin(), p.weights.end());
    bound = std::max(bound, p.error_bound);
    exact = exact && p.exact;
    depth = std::max(depth, p.depth);
  }
  const SparseMatrix concat = vstack(blocks);

  // A union too small for k can still be compressed exactly when it is rank deficient:
  // any k' at or above the rank takes the exact reweighting, which preserves AᵀA.
  const std::size_t full = std::min(concat.rows(), concat.cols());
  std::size_t k_use = k_;
  if (k_use >= full && full >= 2 && !concat.all_zero() && thin_svd(concat, full, seed_).numerical_rank < full) {
    k_use = full - 1;
  }

  if (k_use >= full) {
    CoresetNode node = sorted_node(std::move(indices), std::move(weights), concat);
    node.error_bound = bound;
    node.exact = exact;
    node.depth = depth;
    node.last_residual = parts.size() == 1 ? parts.front().last_residual : 0.0;
    node.trace = parts.size() == 1 ? parts.front().trace : FwTrace{};
    return node;
  }

  SvdCoresetOptions options;
  options.seed = seed_;
  options.residual_target = residual_target;
  const CoresetResult cs = svd_coreset(concat, k_use, epsilon_, options);

  std::vector<Index> global(cs.indices.size());
  std::vector<double> composed(cs.indices.size());
  for (std::size_t t = 0; t < cs.indices.size(); ++t) {
    global[t] = indices[cs.indices[t]];
    composed[t] = weights[cs.indices[t]] * cs.row_weights[t];
  }
  const SparseMatrix selected = concat.select_rows(cs.indices, cs.row_weights);
  CoresetNode node = sorted_node(std::move(global), std::move(composed), selected);
  node.error_bound = (1.0 + bound) * (1.0 + 5.0 * cs.epsilon_residual) - 1.0;
  node.exact = exact && cs.exact;
  node.depth = depth + 1;
  node.last_residual = cs.epsilon_residual;
  node.trace = cs.trace;
  for (Index& idx : node.trace.selected_indices) idx = indices[idx];
  return node;
}

void MergeTree::push(CoresetNode node, double residual_target) {
  std::size_t level = 0;
  while (level < levels_.size() && levels_[level].has_value()) {
    const CoresetNode pair[2] = {std::move(*levels_[level]), std::move(node)};
    levels_[level].reset();
    node = reduce(pair, residual_target);
    ++level;
  }
  if (level == levels_.size()) levels_.emplace_back();
  levels_[level] = std::move(node);
}

std::optional<CoresetNode> MergeTree::collapse(double residual_target) const {
  std::vector<CoresetNode> parts;
  for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
    if (it->has_value()) parts.push_back(**it);
  }
  if (parts.empty()) return std::nullopt;
  if (parts.size() == 1) return parts.front();
  return reduce(parts, residual_target);
}

std::size_t MergeTree::occupied_levels() const {
  return static_cast<std::size_t>(std::count_if(levels_.begin(), levels_.end(), [](const auto& l) { return l.has_value(); }));
}

std::size_t MergeTree::retained_rows() const {
  std::size_t total = 0;
  for (const auto& l : levels_) {
    if (l) total += l->size();
  }
  return total;
}

CoresetStream::CoresetStream(std::size_t d, std::size_t k, double epsilon, StreamOptions options)
    : d_(d), k_(k), epsilon_(epsilon), options_(options), buffer_(d), tree_(k, epsilon, options.seed) {
  if (options_.chunk_size == 0) fail(ErrorCode::InvalidArgument, "CoresetStream: chunk_size must be >= 1");
  if (d == 0) fail(ErrorCode::InvalidArgument, "CoresetStream: d must be >= 1");
}

void CoresetStream::insert(std::span<const Index> cols, std::span<const double> values) {
  for (Index c : cols) {
    if (c >= d_) {
      fail(ErrorCode::DimensionMismatch, "stream row " + std::to_string(rows_seen_) + " has column " +
                                             std::to_string(c) + " but the stream has d = " + std::to_string(d_));
    }
  }
  buffer_.append_row(cols, values);
  ++rows_seen_;
  note_retained();
  if (buffer_.rows() == options_.chunk_size) flush_buffer();
}

void CoresetStream::insert(const SparseRowView& row) { insert(row.cols, row.values); }

double CoresetStream::current_leaf_epsilon() const {
  const std::size_t chunks = (std::max(rows_seen_, options_.chunk_size) + options_.chunk_size - 1) / options_.chunk_size;
  return leaf_epsilon(epsilon_, levels_for(chunks));
}

void CoresetStream::flush_buffer() {
  const double target = current_leaf_epsilon();
  const CoresetNode raw = raw_node(buffer_.build(), rows_seen_ - buffer_.rows());
  CoresetNode leaf = tree_.reduce(std::span<const CoresetNode>(&raw, 1), target);
  buffer_.clear();
  tree_.push(std::move(leaf), target);
  note_retained();
}

void CoresetStream::note_retained() {
  peak_retained_ = std::max(peak_retained_, buffer_.rows() + tree_.retained_rows());
}

StreamResult CoresetStream::finalize() const {
  if (rows_seen_ == 0) fail(ErrorCode::EmptyStream, "finalize: no rows were inserted");
  const double target = current_leaf_epsilon();

  std::vector<CoresetNode> parts;
  for (auto it = tree_.levels().rbegin(); it != tree_.levels().rend(); ++it) {
    if (it->has_value()) parts.push_back(**it);
  }
  if (buffer_.rows() > 0) parts.push_back(raw_node(buffer_.build(), rows_seen_ - buffer_.rows()));

  StreamResult out;
  if (parts.size() == 1 && parts.front().depth == 0) {
    // Nothing was ever merged: this is the batch construction on the buffered rows.
    const CoresetNode& raw = parts.front();
    if (k_ < std::min(raw.rows.rows(), raw.rows.cols())) {
      SvdCoresetOptions options;
      options.seed = options_.seed;
      out.coreset = svd_coreset(raw.rows, k_, epsilon_, options);
      out.rows = weighted_rows(raw.rows, out.coreset);
      for (Index& idx : out.coreset.indices) idx += raw.indices.front();
      return out;
    }
  }
  const CoresetNode node = parts.size() == 1 && parts.front().depth > 0 ? parts.front() : tree_.reduce(parts, target);
  out.coreset = to_result(node, k_, epsilon_);
  out.rows = node.rows;
  return out;
}

StreamResult parallel_build(const SparseMatrix& a, std::size_t k, double epsilon, std::size_t n_workers,
                            std::size_t n_shards, std::uint64_t seed) {
  if (n_workers == 0) fail(ErrorCode::InvalidArgument, "parallel_build: n_workers must be >= 1");
  if (n_shards == 0) n_shards = n_workers;
  if (n_shards > a.rows()) fail(ErrorCode::InvalidArgument, "parallel_build: more shards than rows");

  StreamResult out;
  if (n_shards == 1) {
    SvdCoresetOptions options;
    options.seed = seed;
    out.coreset = svd_coreset(a, k, epsilon, options);
    out.rows = weighted_rows(a, out.coreset);
    return out;
  }

  const double target = leaf_epsilon(epsilon, levels_for(n_shards));
  MergeTree tree(k, epsilon, seed);
  std::vector<std::optional<CoresetNode>> leaves(n_shards);
  std::vector<std::exception_ptr> errors(n_shards);
  auto shard_begin = [&](std::size_t s) { return s * a.rows() / n_shards; };

  auto work = [&](std::size_t worker) {
    for (std::size_t s = worker; s < n_shards; s += n_workers) {
      try {
        const CoresetNode raw = raw_node(a.row_block(shard_begin(s), shard_begin(s + 1)), shard_begin(s));
        leaves[s] = tree.reduce(std::span<const CoresetNode>(&raw, 1), target);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(n_workers, n_shards); ++w) pool.emplace_back(work, w);
    work(0);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (auto& leaf : leaves) tree.push(std::move(*leaf), target);
  const CoresetNode node = *tree.collapse(target);
  out.coreset = to_result(node, k, epsilon);
  out.rows = node.rows;
  return out;
}

}  // namespace coreset
