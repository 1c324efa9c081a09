#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "defuse/harness.hpp"
#include "defuse/problems.hpp"
#include "defuse/trainer.hpp"

namespace defuse {

/// Parsed command line. Training fields left unset fall back to the
/// per-dimension defaults of the chosen problem.
struct RunConfig {
  std::string command;
  std::string problem;
  ParamMap params;
  std::optional<int> n;
  std::vector<int> grids;
  std::uint64_t seed = 0;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<OptimizerKind> optimizer;
  std::optional<int> m1, m2, layers, width, regen;
  /// Empty: auto weighting.
  std::optional<LossWeights> weights;
  int band_width = 1;
  bool oracle = false;
  std::string out_dir;
  std::string load_dir;
  TableFormat format = TableFormat::csv;
  int instances = 100;
  int progress_every = 0;
  /// Set when --help was requested; run prints it and returns 0.
  std::string help;

  TrainConfig train_config(int dim) const;
};

/// Arguments without the program name. Throws Error(UsageError) on any bad
/// or missing flag.
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes a parsed command. Returns 0 on success, 1 on a numerical or I/O
/// failure (printed to `err`), 2 on a usage error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args followed by run, mapping parse failures to status 2.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace defuse
