#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "defuse/jetnet.hpp"
#include "defuse/loss.hpp"

namespace defuse {

enum class OptimizerKind { sgd, adam };

const char* to_string(OptimizerKind kind);

struct TrainConfig {
  int epochs = 20000;
  double learning_rate = 1e-4;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_regen_every = 10;
  int m1 = 100;
  int m2 = 100;
  std::uint64_t seed = 0;
  bool auto_weights = true;
  LossWeights weights;
  int hidden_layers = 4;
  int width = 6;
  Activation activation = Activation::elu;

  /// 1D: 4x6 Adam, 20000 steps, 100 samples per side.
  /// 2D: 6x15 Adam, 50000 steps, 1000 samples per side.
  static TrainConfig defaults_for(int dim);
  /// Throws InvalidArgument on an out-of-range field.
  void validate() const;
  /// key=value lines, one per field.
  void write(std::ostream& out) const;
};

struct OptimizerState {
  std::vector<double> m, v;
  long t = 0;
};

/// One update of theta from grad; sgd or adam per config.
void step(std::vector<double>& theta, const std::vector<double>& grad, OptimizerState& state,
          const TrainConfig& config);

struct TrainedNet {
  PairedNet net;
  std::vector<LossBreakdown> loss_history;
  double final_total = 0.0;
  LossWeights weights;
  TrainConfig config;
};

/// Uniform samples over the band on each side by rejection within band cells.
SampleSet sample_band(const RegionMap& map, const ProblemSpec& problem, int m1, int m2,
                      std::mt19937_64& rng, bool shared);

/// Fresh network pair for `problem`, initialized from `rng`.
PairedNet init_network(const ProblemSpec& problem, const TrainConfig& config,
                       std::mt19937_64& rng);

using TrainProgress = std::function<void(int step, const LossBreakdown&)>;

TrainedNet train(const ProblemSpec& problem, const RegionMap& map, const TrainConfig& config,
                 const TrainProgress& progress = {});

/// CSV with header step,l1,l2,l3,l4,total.
void write_loss_csv(std::ostream& out, const std::vector<LossBreakdown>& history);

}  // namespace defuse
