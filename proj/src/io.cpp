#include "coreset/io.hpp"

#include "coreset/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unistd.h>

namespace coreset {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

struct MmHeader {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t entries = 0;
  std::size_t line_no = 0;
};

MmHeader read_mm_header(std::istream& in) {
  MmHeader h;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "Matrix Market: empty input");
  ++h.line_no;
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") fail(ErrorCode::ParseError, "Matrix Market: missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix" || format != "coordinate" || (field != "real" && field != "integer") ||
      symmetry != "general") {
    fail(ErrorCode::ParseError, "Matrix Market: only 'matrix coordinate real general' is supported, got '" +
                                    line + "'");
  }
  while (std::getline(in, line)) {
    ++h.line_no;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    std::istringstream size(line);
    long long r = -1, c = -1, e = -1;
    if (!(size >> r >> c >> e) || r < 0 || c < 0 || e < 0) {
      fail(ErrorCode::ParseError, "Matrix Market: bad size line " + std::to_string(h.line_no) + ": '" + line + "'");
    }
    h.rows = static_cast<std::size_t>(r);
    h.cols = static_cast<std::size_t>(c);
    h.entries = static_cast<std::size_t>(e);
    return h;
  }
  fail(ErrorCode::ParseError, "Matrix Market: missing size line");
}

// Reads one entry; false at end of input.
bool read_mm_entry(std::istream& in, const MmHeader& h, std::size_t& line_no, SparseMatrix::Triplet& t) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    std::istringstream entry(line);
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(entry >> r >> c >> v)) {
      fail(ErrorCode::ParseError, "Matrix Market: bad entry on line " + std::to_string(line_no) + ": '" + line + "'");
    }
    if (r < 1 || c < 1 || static_cast<std::size_t>(r) > h.rows || static_cast<std::size_t>(c) > h.cols) {
      fail(ErrorCode::ParseError, "Matrix Market: entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                      ") on line " + std::to_string(line_no) + " is outside " +
                                      std::to_string(h.rows) + "x" + std::to_string(h.cols));
    }
    t = {static_cast<Index>(r - 1), static_cast<Index>(c - 1), v};
    return true;
  }
  return false;
}

class MmRowSource final : public RowSource {
 public:
  explicit MmRowSource(std::istream& in) : in_(in), header_(read_mm_header(in)), line_no_(header_.line_no) {
    pending_ = read_next();
  }

  std::size_t cols() const override { return header_.cols; }

  bool next(std::vector<Index>& cols, std::vector<double>& values) override {
    cols.clear();
    values.clear();
    if (row_ >= header_.rows) {
      if (pending_) fail(ErrorCode::ParseError, "Matrix Market: entries beyond the declared rows");
      if (read_ != header_.entries) {
        fail(ErrorCode::ParseError, "Matrix Market: expected " + std::to_string(header_.entries) +
                                        " entries, found " + std::to_string(read_));
      }
      return false;
    }
    while (pending_ && pending_->row == row_) {
      cols.push_back(pending_->col);
      values.push_back(pending_->value);
      pending_ = read_next();
    }
    if (pending_ && pending_->row < row_) {
      fail(ErrorCode::ParseError, "Matrix Market: line " + std::to_string(line_no_) +
                                      " breaks row grouping (row " + std::to_string(pending_->row + 1) +
                                      " after row " + std::to_string(row_ + 1) + ")");
    }
    ++row_;
    return true;
  }

 private:
  std::optional<SparseMatrix::Triplet> read_next() {
    SparseMatrix::Triplet t{};
    if (!read_mm_entry(in_, header_, line_no_, t)) return std::nullopt;
    ++read_;
    if (read_ > header_.entries) {
      fail(ErrorCode::ParseError, "Matrix Market: more entries than the declared " + std::to_string(header_.entries));
    }
    return t;
  }

  std::istream& in_;
  MmHeader header_;
  std::size_t line_no_;
  std::size_t read_ = 0;
  Index row_ = 0;
  std::optional<SparseMatrix::Triplet> pending_;
};

class NdjsonRowSource final : public RowSource {
 public:
  NdjsonRowSource(std::istream& in, std::size_t d) : in_(in), d_(d) {
    if (d_ == 0) {
      std::string line;
      while (std::getline(in_, line)) {
        ++line_no_;
        if (blank(line)) continue;
        const auto j = parse(line);
        if (!j.is_object() || !j.contains("d") || !j["d"].is_number_unsigned() || j["d"].get<std::size_t>() == 0) {
          fail(ErrorCode::ParseError, "NDJSON: first line must be a header {\"d\": <columns>}");
        }
        d_ = j["d"].get<std::size_t>();
        return;
      }
      fail(ErrorCode::ParseError, "NDJSON: empty input");
    }
  }

  std::size_t cols() const override { return d_; }

  bool next(std::vector<Index>& cols, std::vector<double>& values) override {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (blank(line)) continue;
      const auto j = parse(line);
      try {
        cols = j.at("cols").get<std::vector<Index>>();
        values = j.at("vals").get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        fail(ErrorCode::ParseError, "NDJSON line " + std::to_string(line_no_) + ": expected {\"cols\": [...], \"vals\": [...]}");
      }
      if (cols.size() != values.size()) {
        fail(ErrorCode::ParseError, "NDJSON line " + std::to_string(line_no_) + ": cols and vals differ in length");
      }
      for (Index c : cols) {
        if (c >= d_) {
          fail(ErrorCode::DimensionMismatch, "NDJSON line " + std::to_string(line_no_) + ": column " +
                                                 std::to_string(c) + " >= d = " + std::to_string(d_));
        }
      }
      return true;
    }
    return false;
  }

 private:
  nlohmann::json parse(const std::string& line) const {
    try {
      return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::ParseError, "NDJSON line " + std::to_string(line_no_) + ": " + e.what());
    }
  }

  std::istream& in_;
  std::size_t d_;
  std::size_t line_no_ = 0;
};

bool is_ndjson(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  return ext == ".ndjson" || ext == ".jsonl";
}

template <class T>
T field(const nlohmann::json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::ParseError, std::string(what) + ": missing or malformed field '" + key + "'");
  }
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  const MmHeader h = read_mm_header(in);
  std::vector<SparseMatrix::Triplet> triplets;
  triplets.reserve(std::min<std::size_t>(h.entries, std::size_t{1} << 24));
  std::size_t line_no = h.line_no;
  SparseMatrix::Triplet t{};
  while (read_mm_entry(in, h, line_no, t)) {
    if (triplets.size() == h.entries) {
      fail(ErrorCode::ParseError, "Matrix Market: more entries than the declared " + std::to_string(h.entries));
    }
    triplets.push_back(t);
  }
  if (triplets.size() != h.entries) {
    fail(ErrorCode::ParseError, "Matrix Market: expected " + std::to_string(h.entries) + " entries, found " +
                                    std::to_string(triplets.size()));
  }
  return SparseMatrix::from_triplets(h.rows, h.cols, std::move(triplets));
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (std::size_t t = 0; t < row.nnz(); ++t) out << i + 1 << ' ' << row.cols[t] + 1 << ' ' << row.values[t] << '\n';
  }
}

void write_dense_csv(std::ostream& out, const DenseMatrix& m) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

std::unique_ptr<RowSource> matrix_market_rows(std::istream& in) { return std::make_unique<MmRowSource>(in); }

std::unique_ptr<RowSource> ndjson_rows(std::istream& in, std::size_t d) { return std::make_unique<NdjsonRowSource>(in, d); }

std::unique_ptr<RowSource> open_rows(const std::filesystem::path& path, std::istream& in, std::size_t d) {
  return is_ndjson(path) ? ndjson_rows(in, d) : matrix_market_rows(in);
}

SparseMatrix load_matrix(const std::filesystem::path& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  if (!is_ndjson(path)) return read_matrix_market(in);
  auto rows = ndjson_rows(in, d);
  SparseMatrixBuilder builder(rows->cols());
  std::vector<Index> cols;
  std::vector<double> values;
  while (rows->next(cols, values)) builder.append_row(cols, values);
  return builder.build();
}

nlohmann::json to_json(const SimplexWeights& w) {
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& [i, v] : w.entries()) weights.push_back({i, v});
  return {{"n", w.n()}, {"weights", std::move(weights)}};
}

SimplexWeights simplex_weights_from_json(const nlohmann::json& j) {
  const auto n = field<std::size_t>(j, "n", "SimplexWeights");
  const auto pairs = field<std::vector<std::pair<Index, double>>>(j, "weights", "SimplexWeights");
  std::map<Index, double> weights;
  for (const auto& [i, v] : pairs) {
    if (!weights.emplace(i, v).second) fail(ErrorCode::ParseError, "SimplexWeights: duplicate index " + std::to_string(i));
  }
  return SimplexWeights(n, std::move(weights));
}

nlohmann::json to_json(const OneMeanCoreset& cs) {
  return {{"indices", cs.indices}, {"weights", cs.weights}, {"n_source", cs.n_source}, {"error_bound", cs.error_bound}};
}

OneMeanCoreset one_mean_from_json(const nlohmann::json& j) {
  OneMeanCoreset cs;
  cs.indices = field<std::vector<Index>>(j, "indices", "OneMeanCoreset");
  cs.weights = field<std::vector<double>>(j, "weights", "OneMeanCoreset");
  cs.n_source = field<std::size_t>(j, "n_source", "OneMeanCoreset");
  if (j.contains("error_bound")) cs.error_bound = field<double>(j, "error_bound", "OneMeanCoreset");
  if (cs.indices.size() != cs.weights.size()) fail(ErrorCode::ParseError, "OneMeanCoreset: indices and weights differ in length");
  return cs;
}

nlohmann::json to_json(const FwTrace& trace) {
  return {{"iterations", trace.iterations},
          {"residual_norm_per_iter", trace.residual_norm_per_iter},
          {"selected_indices", trace.selected_indices},
          {"alphas", trace.alphas}};
}

nlohmann::json to_json(const CoresetResult& cs) {
  return {{"k", cs.k},
          {"epsilon_target", cs.epsilon_target},
          {"epsilon_residual", cs.epsilon_residual},
          {"exact", cs.exact},
          {"indices", cs.indices},
          {"row_weights", cs.row_weights},
          {"trace", to_json(cs.trace)}};
}

CoresetResult coreset_from_json(const nlohmann::json& j) {
  CoresetResult cs;
  cs.k = field<std::size_t>(j, "k", "CoresetResult");
  cs.epsilon_target = field<double>(j, "epsilon_target", "CoresetResult");
  cs.epsilon_residual = field<double>(j, "epsilon_residual", "CoresetResult");
  if (j.contains("exact")) cs.exact = field<bool>(j, "exact", "CoresetResult");
  cs.indices = field<std::vector<Index>>(j, "indices", "CoresetResult");
  cs.row_weights = field<std::vector<double>>(j, "row_weights", "CoresetResult");
  if (cs.indices.size() != cs.row_weights.size()) {
    fail(ErrorCode::ParseError, "CoresetResult: indices and row_weights differ in length");
  }
  if (j.contains("trace")) {
    const auto& t = j["trace"];
    cs.trace.iterations = field<std::size_t>(t, "iterations", "trace");
    cs.trace.residual_norm_per_iter = field<std::vector<double>>(t, "residual_norm_per_iter", "trace");
    cs.trace.selected_indices = field<std::vector<Index>>(t, "selected_indices", "trace");
    cs.trace.alphas = field<std::vector<double>>(t, "alphas", "trace");
  }
  return cs;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      fail(ErrorCode::IoError, "short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    fail(ErrorCode::IoError, "cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

}  // namespace coreset
