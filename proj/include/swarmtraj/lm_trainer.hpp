#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swarmtraj/metrics.hpp"
#include "swarmtraj/network.hpp"
#include "swarmtraj/swarm_gen.hpp"

namespace swarmtraj {

enum class Axis { X, Y, Z };

inline constexpr std::array<Axis, 3> kAllAxes = {Axis::X, Axis::Y, Axis::Z};

std::string_view to_string(Axis axis);
Axis axis_from_string(std::string_view name);

struct SplitFractions {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;

  bool operator==(const SplitFractions&) const = default;
};

enum class TrainableLayers {
  All,
  // Hidden layer frozen at its initial values; the problem becomes linear least squares.
  OutputOnly,
};

struct TrainConfig {
  std::size_t max_epochs = 1000;
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double lambda_max = 1e10;
  // Lower clamp so repeated successes cannot underflow the damping to zero.
  double lambda_min = 1e-15;
  // Consecutive non-improving validation epochs before stopping; 0 disables.
  std::size_t val_patience = 6;
  SplitFractions split;
  std::uint64_t seed = 0;
  NetworkShape shape;
  TrainableLayers trainable = TrainableLayers::All;
  // Opt-in: derive activation hyperparameters from medians of the initial
  // hidden pre-activations over the training inputs.
  bool calibrate_activation = false;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Deterministic shuffle by config.seed, then floor(train * n), floor(val * n)
/// and the remainder. Throws InsufficientDataError below 3 samples.
DatasetSplit split_dataset(std::size_t n_samples, const TrainConfig& config);
DatasetSplit split_dataset(const SwarmDataset& dataset, const TrainConfig& config);

/// One regression example in normalized units.
struct Sample {
  Eigen::VectorXd input;
  Eigen::VectorXd target;
};

/// Sum over the batch of squared output residuals.
double batch_sse(const NetworkParams& params, std::span<const Sample> batch);

/// Solves (J'J + lambda * diag(J'J)) delta = J'r for the stacked batch
/// residuals r = target - output, returning delta in flattening order.
/// Exploits the block structure of the output layer, so the cost is linear in
/// the number of outputs. Diagonal entries are floored at kDampingFloor.
/// Throws NumericError carrying lambda when the damped system cannot be solved.
Eigen::VectorXd lm_direction(const NetworkParams& params, std::span<const Sample> batch, double lambda,
                             TrainableLayers trainable = TrainableLayers::All);

/// Same system assembled from the full per-sample Jacobians. Quadratic in the
/// parameter count; meant for small networks and cross-checks.
Eigen::VectorXd lm_direction_dense(const NetworkParams& params, std::span<const Sample> batch,
                                   double lambda, TrainableLayers trainable = TrainableLayers::All);

inline constexpr double kDampingFloor = 1e-12;

struct LmStepResult {
  NetworkParams params;
  double lambda = 0.0;
  bool accepted = false;
  double sse_before = 0.0;
  double sse_after = 0.0;
};

/// Accepts `params + delta` iff it strictly lowers the batch SSE, returning
/// lambda * lambda_down; otherwise keeps `params` and returns lambda * lambda_up.
/// sse_after is the candidate's SSE either way. A batch with zero SSE is
/// already optimal: accepted, params unchanged.
LmStepResult try_step(const NetworkParams& params, const Eigen::VectorXd& delta,
                      std::span<const Sample> batch, double lambda, const TrainConfig& config);

/// One Levenberg-Marquardt iteration: lm_direction followed by try_step.
LmStepResult lm_step(const NetworkParams& params, std::span<const Sample> batch, double lambda,
                     const TrainConfig& config);

enum class StopReason { MaxEpochs, ValPatience, LambdaOverflow, Converged };

std::string_view to_string(StopReason reason);

/// Monitoring callback evaluated after every epoch; returns an MSE.
using MseMonitor = std::function<double(const NetworkParams&)>;

struct FitResult {
  NetworkParams params;  // best-validation parameters
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
  std::vector<double> train_mse_history;
  std::vector<double> val_mse_history;
  std::vector<double> accepted_sse_history;  // objective after every accepted step
  double final_lambda = 0.0;
  StopReason stopped_reason = StopReason::MaxEpochs;
};

/// Epoch loop on prepared samples. Each epoch retries the LM step with growing
/// damping until one is accepted or lambda exceeds lambda_max. Monitors default
/// to the mean squared residual over the respective sample set; when `val` is
/// empty the training monitor stands in for validation.
FitResult fit_lm(const NetworkParams& init, std::span<const Sample> train, std::span<const Sample> val,
                 const TrainConfig& config, MseMonitor train_monitor = {}, MseMonitor val_monitor = {});

/// Per-feature min-max scaling to [0, 1]. Constant features map to 0 and
/// denormalize back to their constant exactly.
struct AffineNormalizer {
  Eigen::VectorXd lo;
  Eigen::VectorXd range;

  static AffineNormalizer fit(std::span<const Eigen::VectorXd> rows);
  Eigen::VectorXd normalize(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  Eigen::VectorXd denormalize(const Eigen::Ref<const Eigen::VectorXd>& v) const;
};

/// Start, midpoint (index size/2) and destination positions: 9 values.
Eigen::VectorXd trajectory_features(const Trajectory& traj);
/// One coordinate of every waypoint.
Eigen::VectorXd trajectory_axis(const Trajectory& traj, Axis axis);

struct TrainedModel {
  Axis axis = Axis::X;
  NetworkParams params;
  AffineNormalizer input_norm;
  AffineNormalizer output_norm;
  SplitFractions split;
  std::uint64_t seed = 0;

  /// Denormalized predicted coordinate for every waypoint of `traj`.
  Eigen::VectorXd predict(const Trajectory& traj) const;
};

void to_json(nlohmann::json& j, const TrainedModel& m);
void from_json(const nlohmann::json& j, TrainedModel& m);

struct TrainReport {
  Axis axis = Axis::X;
  ActivationSpec activation;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::vector<double> train_mse_history;  // original units
  std::vector<double> val_mse_history;
  std::vector<double> accepted_sse_history;  // normalized training objective
  double train_mse = 0.0;  // of the returned parameters
  double val_mse = 0.0;
  MetricResult test_metrics;
  double test_mse = 0.0;
  double test_smape = 0.0;
  StopReason stopped_reason = StopReason::MaxEpochs;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const TrainReport& r);

struct TrainResult {
  TrainedModel model;
  TrainReport report;
};

/// Metrics of `model` over the trajectories at `indices`, averaged per trajectory.
MetricResult evaluate_model(const TrainedModel& model, const SwarmDataset& dataset,
                            std::span<const std::size_t> indices);

/// Fits one network predicting `axis` from start/mid/end positions. Errors in
/// the report are in dataset units; test metrics use the returned parameters.
/// Throws NumericError with the epoch index on a non-finite loss.
TrainResult train(const SwarmDataset& dataset, Axis axis, const ActivationSpec& activation,
                  const TrainConfig& config);

}  // namespace swarmtraj
