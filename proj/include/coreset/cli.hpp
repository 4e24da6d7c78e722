#pragma once

#include "coreset/error.hpp"
#include "coreset/generate.hpp"

#include <cstdint>
#include <ostream>
#include <string>

namespace coreset {

struct RunConfig {
  std::string command;  // ifa, one-mean, svd-coreset, stream, evaluate, bench, gen
  std::string input_path;
  std::string output_path;  // stdout when empty
  std::string coreset_path;
  std::string rows_out_path;  // weighted coreset rows as Matrix Market
  std::string csv_path;       // per-query errors (evaluate)
  std::size_t k = 5;
  double epsilon = 0.25;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 256;
  std::size_t n_queries = 100;
  std::size_t max_iter = 0;  // 0: ⌈1/ε²⌉
  std::size_t workers = 1;
  std::size_t d = 0;         // column count for NDJSON input without a header
  bool exact = false;
  bool table = false;        // human-readable evaluate output
  bool timing = true;        // include wall times in reports
  LowRankSpec gen;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

int exit_code_for(ErrorCode code);

/// Executes one command. Errors are reported on `err` and mapped to exit codes.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses flags (and an optional key=value config file) and runs the command.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coreset
