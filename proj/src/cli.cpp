#include "coreset/cli.hpp"

#include "coreset/error.hpp"
#include "coreset/eval.hpp"
#include "coreset/ifa.hpp"
#include "coreset/io.hpp"
#include "coreset/one_mean.hpp"
#include "coreset/streaming.hpp"
#include "coreset/svd_coreset.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coreset {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void emit(const RunConfig& config, std::ostream& out, const std::string& content) {
  if (config.output_path.empty()) {
    out << content;
  } else {
    write_file_atomic(config.output_path, content);
  }
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void require_input(const RunConfig& config) {
  if (config.input_path.empty()) fail(ErrorCode::InvalidArgument, config.command + ": -i/--input is required");
}

void write_rows(const std::string& path, const SparseMatrix& rows) {
  if (path.empty()) return;
  std::ostringstream os;
  write_matrix_market(os, rows);
  write_file_atomic(path, os.str());
}

// Points for the item-frequency command: the input rows scaled to unit norm.
DenseMatrix unit_rows(const SparseMatrix& a) {
  DenseMatrix points = a.to_dense();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double norm = points.row(i).norm();
    if (!(norm > 0.0)) fail(ErrorCode::ZeroNormRow, "ifa: input row " + std::to_string(i) + " is zero");
    points.row(i) /= norm;
  }
  return points;
}

int cmd_ifa(const RunConfig& config, std::ostream& out) {
  require_input(config);
  const SparseMatrix a = load_matrix(config.input_path, config.d);
  if (a.rows() == 0) fail(ErrorCode::EmptyInput, "ifa: input has no rows");
  const DenseMatrix points = unit_rows(a);
  const SimplexWeights z = SimplexWeights::uniform(a.rows());
  nlohmann::json j;
  if (config.exact) {
    const SimplexWeights w = caratheodory_exact(points, z);
    j["residual"] = explicit_residual(points, z, w);
    j["support_size"] = w.support_size();
    j["weights"] = to_json(w);
  } else {
    const auto cap = static_cast<std::size_t>(std::ceil(1.0 / (config.epsilon * config.epsilon)));
    const std::size_t max_iter = config.max_iter == 0 ? cap : config.max_iter;
    const FwResult r = frank_wolfe(ExplicitVectorOracle(points), z, config.epsilon, max_iter);
    j["residual"] = r.residual;
    j["support_size"] = r.weights.support_size();
    j["weights"] = to_json(r.weights);
    j["trace"] = to_json(r.trace);
  }
  j["epsilon"] = config.epsilon;
  emit(config, out, dump(j));
  return kExitOk;
}

int cmd_one_mean(const RunConfig& config, std::ostream& out) {
  require_input(config);
  const SparseMatrix a = load_matrix(config.input_path, config.d);
  OneMeanOptions options;
  options.exact = config.exact;
  const OneMeanCoreset cs = one_mean_coreset(a, config.epsilon, options);
  emit(config, out, dump(to_json(cs)));
  return kExitOk;
}

int cmd_svd_coreset(const RunConfig& config, std::ostream& out, std::ostream& err) {
  require_input(config);
  const SparseMatrix a = load_matrix(config.input_path, config.d);
  const auto t0 = Clock::now();
  CoresetResult cs;
  SparseMatrix rows;
  if (config.workers > 1) {
    StreamResult r = parallel_build(a, config.k, config.epsilon, config.workers, config.workers, config.seed);
    cs = std::move(r.coreset);
    rows = std::move(r.rows);
  } else {
    SvdCoresetOptions options;
    options.seed = config.seed;
    cs = svd_coreset(a, config.k, config.epsilon, options);
    rows = weighted_rows(a, cs);
  }
  if (config.timing) err << "svd-coreset: " << cs.size() << " of " << a.rows() << " rows in " << ms_since(t0) << " ms\n";
  emit(config, out, dump(to_json(cs)));
  write_rows(config.rows_out_path, rows);
  return kExitOk;
}

int cmd_stream(const RunConfig& config, std::ostream& out, std::ostream& err) {
  require_input(config);
  std::ifstream in(config.input_path);
  if (!in) fail(ErrorCode::IoError, "stream: cannot open '" + config.input_path + "'");
  auto source = open_rows(config.input_path, in, config.d);
  StreamOptions options;
  options.chunk_size = config.chunk_size;
  options.seed = config.seed;
  CoresetStream stream(source->cols(), config.k, config.epsilon, options);
  std::vector<Index> cols;
  std::vector<double> values;
  while (source->next(cols, values)) stream.insert(cols, values);
  const StreamResult r = stream.finalize();
  err << "stream: " << stream.rows_seen() << " rows, " << r.coreset.size() << " kept, peak retained "
      << stream.peak_retained_rows() << " rows\n";
  emit(config, out, dump(to_json(r.coreset)));
  write_rows(config.rows_out_path, r.rows);
  return kExitOk;
}

nlohmann::json cost_json(const SparseMatrix& a, const CoresetResult& cs) {
  const auto [best, achieved] = optimal_cost_comparison(a, cs, cs.k);
  nlohmann::json j{{"best", best}, {"achieved", achieved}};
  j["ratio"] = best > 0.0 ? nlohmann::json(achieved / best) : nlohmann::json(nullptr);
  return j;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
  require_input(config);
  if (config.coreset_path.empty()) fail(ErrorCode::InvalidArgument, "evaluate: --coreset is required");
  const SparseMatrix a = load_matrix(config.input_path, config.d);
  nlohmann::json cj;
  try {
    cj = nlohmann::json::parse(read_file(config.coreset_path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, "evaluate: '" + config.coreset_path + "': " + e.what());
  }

  if (cj.contains("n_source")) {
    const OneMeanCoreset cs = one_mean_from_json(cj);
    if (cs.n_source != a.rows()) fail(ErrorCode::DimensionMismatch, "evaluate: coreset was built from a different point count");
    const DenseMatrix centers = sample_centers(a, config.n_queries, config.seed);
    nlohmann::json j{{"n_centers", centers.rows()},
                     {"max_rel_error", eval_one_mean(a, cs, centers)},
                     {"certified_bound", one_mean_error_bound(a, cs)},
                     {"coreset_size", cs.size()}};
    emit(config, out, dump(j));
    return kExitOk;
  }

  const CoresetResult cs = coreset_from_json(cj);
  const EvalReport report = evaluate(a, cs, config.n_queries, config.seed);
  if (!config.csv_path.empty()) write_file_atomic(config.csv_path, per_query_csv(report));
  if (config.table) {
    emit(config, out, format_table(report));
  } else {
    nlohmann::json j = to_json(report, config.timing);
    j["optimal_cost"] = cost_json(a, cs);
    emit(config, out, dump(j));
  }
  return kExitOk;
}

int cmd_gen(const RunConfig& config, std::ostream& out) {
  std::ostringstream os;
  write_matrix_market(os, generate_low_rank(config.gen));
  emit(config, out, os.str());
  return kExitOk;
}

int cmd_bench(const RunConfig& config, std::ostream& out) {
  LowRankSpec spec = config.gen;
  const auto t_gen = Clock::now();
  const SparseMatrix a = config.input_path.empty() ? generate_low_rank(spec) : load_matrix(config.input_path, config.d);
  const double gen_ms = ms_since(t_gen);

  SvdCoresetOptions options;
  options.seed = config.seed;
  const auto t_batch = Clock::now();
  const CoresetResult batch = svd_coreset(a, config.k, config.epsilon, options);
  const double batch_ms = ms_since(t_batch);

  StreamOptions stream_options;
  stream_options.chunk_size = config.chunk_size;
  stream_options.seed = config.seed;
  const auto t_stream = Clock::now();
  CoresetStream stream(a.cols(), config.k, config.epsilon, stream_options);
  for (Index i = 0; i < a.rows(); ++i) stream.insert(a.row(i));
  const StreamResult streamed = stream.finalize();
  const double stream_ms = ms_since(t_stream);

  const EvalReport eb = evaluate(a, batch, config.n_queries, config.seed);
  const EvalReport es = evaluate(a, streamed.coreset, config.n_queries, config.seed);

  nlohmann::json j;
  j["instance"] = {{"n", a.rows()}, {"d", a.cols()}, {"nnz", a.nnz()}, {"k", config.k}, {"epsilon", config.epsilon}};
  j["batch"] = to_json(eb, false);
  j["batch"]["optimal_cost"] = cost_json(a, batch);
  j["stream"] = to_json(es, false);
  j["stream"]["peak_retained_rows"] = stream.peak_retained_rows();
  j["stream"]["chunk_size"] = config.chunk_size;
  if (config.timing) {
    j["wall_time_ms"] = {{"generate_or_load", gen_ms},
                         {"batch_build", batch_ms},
                         {"stream_build", stream_ms},
                         {"evaluate_batch", eb.wall_time_ms.total_ms},
                         {"evaluate_stream", es.wall_time_ms.total_ms}};
  }
  emit(config, out, dump(j));
  return kExitOk;
}

void validate(const RunConfig& config) {
  if (!(config.epsilon > 0.0 && config.epsilon <= 1.0)) {
    fail(ErrorCode::BadEpsilon, "epsilon must lie in (0, 1], got " + std::to_string(config.epsilon));
  }
  if (config.k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (config.chunk_size == 0) fail(ErrorCode::InvalidArgument, "chunk-size must be >= 1");
  if (config.n_queries == 0) fail(ErrorCode::InvalidArgument, "queries must be >= 1");
  if (config.workers == 0) fail(ErrorCode::InvalidArgument, "workers must be >= 1");
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (classify(code)) {
    case ErrorClass::Usage: return kExitUsage;
    case ErrorClass::Numerical: return kExitNumerical;
    case ErrorClass::Data: return kExitData;
  }
  return kExitData;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    if (config.command == "ifa") return cmd_ifa(config, out);
    if (config.command == "one-mean") return cmd_one_mean(config, out);
    if (config.command == "svd-coreset") return cmd_svd_coreset(config, out, err);
    if (config.command == "stream") return cmd_stream(config, out, err);
    if (config.command == "evaluate") return cmd_evaluate(config, out);
    if (config.command == "bench") return cmd_bench(config, out);
    if (config.command == "gen") return cmd_gen(config, out);
    fail(ErrorCode::InvalidArgument, "unknown command '" + config.command + "'");
  } catch (const Error& e) {
    err << "error [" << config.command << "] " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::bad_alloc&) {
    err << "error [" << config.command << "] out of memory\n";
    return kExitData;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Coresets for k-subspace queries and 1-mean via sparse item frequency approximation"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");

  const std::pair<const char*, const char*> commands[] = {
      {"ifa", "sparse reweighting of the unit-normalized rows approximating their mean"},
      {"one-mean", "weighted subset preserving the sum of squared distances to any center"},
      {"svd-coreset", "weighted row subset preserving distances to every k-subspace"},
      {"stream", "one-pass merge-and-reduce coreset over a row stream"},
      {"evaluate", "query-error report of a coreset against its source matrix"},
      {"bench", "batch and streaming construction plus evaluation on one instance"},
      {"gen", "synthetic sparse low-rank-plus-noise matrix (Matrix Market)"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  app.add_option("-i,--input", config.input_path, "input matrix (.mtx, or .ndjson/.jsonl sparse rows)");
  app.add_option("-o,--output", config.output_path, "output file (stdout when omitted)");
  app.add_option("--coreset", config.coreset_path, "coreset JSON to evaluate");
  app.add_option("--rows-out", config.rows_out_path, "write the weighted coreset rows as Matrix Market");
  app.add_option("--csv", config.csv_path, "write per-query errors as CSV (evaluate)");
  app.add_option("--k", config.k, "subspace dimension");
  app.add_option("--epsilon", config.epsilon, "target error in (0, 1]");
  app.add_option("--seed", config.seed, "random seed");
  app.add_option("--chunk-size", config.chunk_size, "rows buffered before each streaming reduction");
  app.add_option("--queries", config.n_queries, "random queries (evaluate) or sampled centers (1-mean)");
  app.add_option("--max-iter", config.max_iter, "solver iteration cap for ifa; 0 means ceil(1/epsilon^2)");
  app.add_option("--workers", config.workers, "parallel shard workers for svd-coreset");
  app.add_option("--d", config.d, "columns: gen output width (100 when 0), or NDJSON input width without a header");
  app.add_flag("--exact", config.exact, "exact reweighting instead of the epsilon-approximate solver");
  app.add_flag("--table", config.table, "human-readable evaluate output");
  app.add_flag("!--no-timing", config.timing, "omit wall-clock times from reports");
  app.add_option("--n", config.gen.n, "gen: rows");
  app.add_option("--rank", config.gen.rank, "gen: latent rank");
  app.add_option("--noise", config.gen.noise, "gen: noise level relative to the signal RMS");
  app.add_option("--density", config.gen.density, "gen: fraction of columns per latent factor");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\nrun with --help for the option list\n";
    return kExitUsage;
  }
  config.command = app.get_subcommands().front()->get_name();
  config.gen.seed = config.seed;
  if (config.d > 0) config.gen.d = config.d;
  return run(config, out, err);
}

}  // namespace coreset
