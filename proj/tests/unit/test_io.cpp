#include "coreset/io.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace coreset;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "coreset_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("Matrix Market round trip is exact") {
  const SparseMatrix a = testutil::random_sparse(17, 9, 0.3, 5);
  std::stringstream ss;
  write_matrix_market(ss, a);
  CHECK(read_matrix_market(ss) == a);
}

TEST_CASE("Matrix Market reader: 1-based indices, comments, integer field, duplicates summed") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate integer general\n"
      "% a comment\n"
      "\n"
      "2 3 4\n"
      "1 1 5\n"
      "2 3 -1\n"
      "2 3 3\n"
      "1 2 7\n");
  const SparseMatrix a = read_matrix_market(in);
  DenseMatrix expected(2, 3);
  expected << 5, 7, 0, 0, 0, 2;
  CHECK(a.to_dense() == expected);
}

TEST_CASE("Matrix Market reader errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_matrix_market(in);
  };
  CHECK_CODE(parse(""), ErrorCode::ParseError);
  CHECK_CODE(parse("%%MatrixMarket matrix array real general\n2 2\n"), ErrorCode::ParseError);
  CHECK_CODE(parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 0\n"), ErrorCode::ParseError);
  CHECK_CODE(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"), ErrorCode::ParseError);
  CHECK_CODE(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n"), ErrorCode::ParseError);
  CHECK_CODE(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n"), ErrorCode::ParseError);
  CHECK_CODE(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n"), ErrorCode::ParseError);
  CHECK_CODE(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 2\n"), ErrorCode::ParseError);
}

TEST_CASE("Matrix Market row stream") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "4 3 3\n"
      "1 2 1.5\n"
      "1 1 2.0\n"
      "3 3 -1\n");
  auto rows = matrix_market_rows(in);
  CHECK(rows->cols() == 3);
  std::vector<Index> cols;
  std::vector<double> vals;
  std::vector<std::size_t> sizes;
  while (rows->next(cols, vals)) sizes.push_back(cols.size());
  CHECK(sizes == std::vector<std::size_t>{2, 0, 1, 0});

  std::istringstream bad(
      "%%MatrixMarket matrix coordinate real general\n"
      "3 3 2\n"
      "2 1 1\n"
      "1 1 1\n");
  auto r2 = matrix_market_rows(bad);
  CHECK(r2->next(cols, vals));
  CHECK_CODE(r2->next(cols, vals), ErrorCode::ParseError);
}

TEST_CASE("NDJSON rows") {
  std::istringstream with_header("{\"d\": 4}\n{\"cols\": [3, 0], \"vals\": [1.0, 2.0]}\n\n{\"cols\": [], \"vals\": []}\n");
  auto rows = ndjson_rows(with_header);
  CHECK(rows->cols() == 4);
  std::vector<Index> cols;
  std::vector<double> vals;
  REQUIRE(rows->next(cols, vals));
  CHECK(cols == std::vector<Index>{3, 0});
  REQUIRE(rows->next(cols, vals));
  CHECK(cols.empty());
  CHECK_FALSE(rows->next(cols, vals));

  std::istringstream no_header("{\"cols\": [1], \"vals\": [1.0]}\n");
  CHECK_CODE(ndjson_rows(no_header), ErrorCode::ParseError);
  std::istringstream wide("{\"cols\": [7], \"vals\": [1.0]}\n");
  auto w = ndjson_rows(wide, 5);
  CHECK_CODE(w->next(cols, vals), ErrorCode::DimensionMismatch);
  std::istringstream ragged("{\"cols\": [1, 2], \"vals\": [1.0]}\n");
  auto r = ndjson_rows(ragged, 5);
  CHECK_CODE(r->next(cols, vals), ErrorCode::ParseError);
  std::istringstream garbage("{cols\n");
  auto g = ndjson_rows(garbage, 5);
  CHECK_CODE(g->next(cols, vals), ErrorCode::ParseError);
}

TEST_CASE("load_matrix dispatches on the extension") {
  const SparseMatrix a = testutil::random_sparse(6, 4, 0.5, 2);
  const auto mtx = scratch("a.mtx");
  {
    std::ofstream out(mtx);
    write_matrix_market(out, a);
  }
  CHECK(load_matrix(mtx) == a);
  const auto nd = scratch("a.ndjson");
  {
    std::ofstream out(nd);
    out << "{\"d\": 4}\n";
    for (Index i = 0; i < a.rows(); ++i) {
      const auto row = a.row(i);
      nlohmann::json j{{"cols", std::vector<Index>(row.cols.begin(), row.cols.end())},
                       {"vals", std::vector<double>(row.values.begin(), row.values.end())}};
      out << j.dump() << '\n';
    }
  }
  CHECK(load_matrix(nd) == a);
  CHECK_CODE(load_matrix(scratch("missing.mtx")), ErrorCode::IoError);
}

TEST_CASE("dense CSV") {
  DenseMatrix m(2, 2);
  m << 1.0, 0.1, -2.5, 1e-300;
  std::ostringstream os;
  write_dense_csv(os, m);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(std::stod(line.substr(line.find(',') + 1)) == 0.1);
  std::getline(in, line);
  CHECK(line.rfind("-2.5,", 0) == 0);
}

TEST_CASE("JSON round trips") {
  const SimplexWeights w(5, {{4, 0.25}, {1, 0.75}});
  const auto wj = to_json(w);
  CHECK(wj.dump() == R"({"n":5,"weights":[[1,0.75],[4,0.25]]})");
  CHECK(simplex_weights_from_json(wj) == w);
  CHECK_CODE(simplex_weights_from_json(nlohmann::json::parse(R"({"n":2,"weights":[[0,0.5],[0,0.5]]})")), ErrorCode::ParseError);
  CHECK_CODE(simplex_weights_from_json(nlohmann::json::parse(R"({"weights":[]})")), ErrorCode::ParseError);

  OneMeanCoreset om;
  om.indices = {2, 9};
  om.weights = {3.5, 1.25};
  om.n_source = 12;
  const auto oj = to_json(om);
  for (const char* key : {"indices", "weights", "n_source"}) CHECK(oj.contains(key));
  const OneMeanCoreset back = one_mean_from_json(oj);
  CHECK(back.indices == om.indices);
  CHECK(back.weights == om.weights);
  CHECK(back.n_source == 12);

  const SparseMatrix a = testutil::random_sparse(60, 12, 0.3, 8);
  const CoresetResult cs = svd_coreset(a, 2, 0.4);
  const auto cj = to_json(cs);
  for (const char* key : {"k", "epsilon_target", "epsilon_residual", "indices", "row_weights", "trace"}) CHECK(cj.contains(key));
  CHECK(coreset_from_json(nlohmann::json::parse(cj.dump())) == cs);
  CHECK_CODE(coreset_from_json(nlohmann::json::parse(R"({"k":1})")), ErrorCode::ParseError);
}

TEST_CASE("atomic writes replace the target and leave no temporary") {
  const auto path = scratch("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  for (const auto& entry : std::filesystem::directory_iterator(path.parent_path())) {
    CHECK(entry.path().filename().string().find(".tmp.") == std::string::npos);
  }
  CHECK_CODE(write_file_atomic(scratch("no/such/dir/file.txt"), "x"), ErrorCode::IoError);
  CHECK_CODE(read_file(scratch("absent.txt")), ErrorCode::IoError);
}
