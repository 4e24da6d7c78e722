#pragma once

#include "coreset/ifa.hpp"
#include "coreset/matrix.hpp"
#include "coreset/one_mean.hpp"
#include "coreset/svd_coreset.hpp"

#include <filesystem>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace coreset {

// Matrix Market: "%%MatrixMarket matrix coordinate real general" (integer also accepted on
// input), 1-based indices on the wire.
SparseMatrix read_matrix_market(std::istream& in);
void write_matrix_market(std::ostream& out, const SparseMatrix& a);

/// Dense CSV, one row per line, full double precision.
void write_dense_csv(std::ostream& out, const DenseMatrix& m);

/// Incremental row reader.
class RowSource {
 public:
  virtual ~RowSource() = default;
  virtual std::size_t cols() const = 0;
  /// Fills the next row; false at end of input.
  virtual bool next(std::vector<Index>& cols, std::vector<double>& values) = 0;
};

/// Matrix Market entries must arrive grouped by row with non-decreasing row indices.
/// Rows without entries are produced as empty rows.
std::unique_ptr<RowSource> matrix_market_rows(std::istream& in);

/// One JSON object {"cols": [...], "vals": [...]} per line, 0-based columns. With d = 0 the
/// first line must be a header {"d": <columns>}.
std::unique_ptr<RowSource> ndjson_rows(std::istream& in, std::size_t d = 0);

/// Reads a whole matrix; ".ndjson"/".jsonl" files go through ndjson_rows, anything else is
/// Matrix Market.
SparseMatrix load_matrix(const std::filesystem::path& path, std::size_t d = 0);
std::unique_ptr<RowSource> open_rows(const std::filesystem::path& path, std::istream& in, std::size_t d = 0);

nlohmann::json to_json(const SimplexWeights& w);
SimplexWeights simplex_weights_from_json(const nlohmann::json& j);

nlohmann::json to_json(const OneMeanCoreset& cs);
OneMeanCoreset one_mean_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FwTrace& trace);
nlohmann::json to_json(const CoresetResult& cs);
CoresetResult coreset_from_json(const nlohmann::json& j);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace coreset
