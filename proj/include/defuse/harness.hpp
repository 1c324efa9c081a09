#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "defuse/fdsolver.hpp"
#include "defuse/metrics.hpp"
#include "defuse/problems.hpp"
#include "defuse/trainer.hpp"

namespace defuse {

/// log2(e_coarse / e_fine). Throws NonPositiveError unless both are > 0.
double order(double e_coarse, double e_fine);

struct StudyRow {
  int n = 0;
  double err_omega1 = 0.0, err_omega2 = 0.0, err_omega = 0.0;
  std::optional<double> order_omega1, order_omega2, order_omega;
  std::optional<double> err_inf;
  std::optional<double> order_inf;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

struct StudyTable {
  std::string problem;
  ParamMap params;
  /// "exact" (errors against the exact solution) or "residual".
  std::string metric = "exact";
  std::vector<StudyRow> rows;
};

/// Fills the order columns from consecutive rows. Rows with a zero error
/// leave the affected order empty.
void compute_orders(StudyTable& table);

enum class StudyMode { trained, oracle };

struct StudyConfig {
  StudyMode mode = StudyMode::trained;
  TrainConfig train;
  int band_width_cells = 1;
  std::uint64_t seed = 0;
  bool concurrent_solves = true;
  double picard_tol = 1e-10;
  int picard_max_iter = 500;
  /// Called after each row with the finished row.
  std::function<void(const StudyRow&)> on_row;
  /// Called after each row with the intermediate artifacts.
  std::function<void(int n, const RegionMap&, const DecoupledSolution&, const TrainedNet*)>
      on_solution;
  TrainProgress on_train_step;
};

/// One refinement row: classify, train (or use exact band data), solve, and
/// measure. The training seed is config.seed + n.
StudyRow run_row(const ProblemSpec& problem, int n, const StudyConfig& config);

/// Rows for every grid size in `grids` (strictly doubling).
StudyTable convergence_study(const ProblemSpec& problem, const std::vector<int>& grids,
                             const StudyConfig& config);

enum class TableFormat { csv, markdown };

/// Header n,err_o1,ord_o1,err_o2,ord_o2,err_all,ord_all.
void write_csv(std::ostream& out, const StudyTable& table);
void write_markdown(std::ostream& out, const StudyTable& table);
StudyTable parse_csv(std::istream& in);

/// Writes `content` to a temporary file next to `path`, then renames it.
void write_file_atomic(const std::string& path, const std::string& content);

void emit(const StudyTable& table, TableFormat format, const std::string& path);
void emit(const GridFunction& u, const std::string& path);
void emit(const std::vector<LossBreakdown>& history, const std::string& path);

}  // namespace defuse
