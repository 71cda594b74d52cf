#include "swarmtraj/lm_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "swarmtraj/errors.hpp"
#include "swarmtraj/rng.hpp"

namespace swarmtraj {

namespace {

constexpr std::array<std::string_view, 3> kAxisNames = {"x", "y", "z"};
constexpr std::array<std::string_view, 4> kStopNames = {"max_epochs", "val_patience", "lambda_overflow",
                                                        "converged"};

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

Eigen::VectorXd floored(const Eigen::VectorXd& diag) { return diag.cwiseMax(kDampingFloor); }

void check_batch(const NetworkParams& params, std::span<const Sample> batch, double lambda) {
  if (batch.empty()) throw UsageError("LM step needs a non-empty batch");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw UsageError("LM damping must be positive and finite");
  for (const auto& s : batch) {
    if (static_cast<std::size_t>(s.input.size()) != params.shape.n_inputs ||
        static_cast<std::size_t>(s.target.size()) != params.shape.n_outputs) {
      throw ShapeError("sample dimensions do not match the network shape");
    }
  }
}

template <typename Decomposition>
void require_solved(const Decomposition& dec, const Eigen::VectorXd& x, double lambda) {
  if (dec.info() != Eigen::Success || !x.allFinite()) {
    throw NumericError("damped normal equations could not be solved (lambda = " + std::to_string(lambda) + ")",
                       lambda);
  }
}

// Maps the hidden ordering (k, j) with j == n_inputs standing for the bias
// onto flattened parameter positions.
Eigen::Index hidden_flat_index(const NetworkShape& s, std::size_t k, std::size_t j) {
  return j < s.n_inputs ? idx(k * s.n_inputs + j) : idx(s.n_hidden * s.n_inputs + k);
}

Eigen::Index output_flat_index(const NetworkShape& s, std::size_t i, std::size_t q) {
  const std::size_t w2_offset = s.n_hidden * s.n_inputs + s.n_hidden;
  return q < s.n_hidden ? idx(w2_offset + i * s.n_hidden + q)
                        : idx(w2_offset + s.n_outputs * s.n_hidden + i);
}

double mean_squared_residual(const NetworkParams& params, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    total += (s.target - forward(params, s.input)).squaredNorm();
    count += static_cast<std::size_t>(s.target.size());
  }
  return total / static_cast<double>(count);
}

}  // namespace

std::string_view to_string(Axis axis) { return kAxisNames[static_cast<std::size_t>(axis)]; }

Axis axis_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kAxisNames.size(); ++i) {
    if (kAxisNames[i] == name || (name.size() == 1 && std::tolower(name[0]) == kAxisNames[i][0])) {
      return static_cast<Axis>(i);
    }
  }
  throw UsageError("unknown axis '" + std::string(name) + "'");
}

std::string_view to_string(StopReason reason) { return kStopNames[static_cast<std::size_t>(reason)]; }

void TrainConfig::validate() const {
  const double sum = split.train + split.val + split.test;
  if (split.train < 0 || split.val < 0 || split.test < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw UsageError("split fractions must be non-negative and sum to 1");
  }
  if (!(lambda_up > 1.0 && lambda_down > 0.0 && lambda_down < 1.0)) {
    throw UsageError("damping schedule needs lambda_up > 1 > lambda_down > 0");
  }
  if (!(lambda_init > 0.0) || !(lambda_min > 0.0) || !(lambda_max >= lambda_init) ||
      !(lambda_init >= lambda_min)) {
    throw UsageError("damping bounds need 0 < lambda_min <= lambda_init <= lambda_max");
  }
  shape.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"max_epochs", c.max_epochs},
                     {"lambda_init", c.lambda_init},
                     {"lambda_up", c.lambda_up},
                     {"lambda_down", c.lambda_down},
                     {"lambda_max", c.lambda_max},
                     {"lambda_min", c.lambda_min},
                     {"val_patience", c.val_patience},
                     {"split", {c.split.train, c.split.val, c.split.test}},
                     {"seed", c.seed},
                     {"n_hidden", c.shape.n_hidden},
                     {"output_only", c.trainable == TrainableLayers::OutputOnly},
                     {"calibrate_activation", c.calibrate_activation}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.lambda_init = j.value("lambda_init", c.lambda_init);
  c.lambda_up = j.value("lambda_up", c.lambda_up);
  c.lambda_down = j.value("lambda_down", c.lambda_down);
  c.lambda_max = j.value("lambda_max", c.lambda_max);
  c.lambda_min = j.value("lambda_min", c.lambda_min);
  c.val_patience = j.value("val_patience", c.val_patience);
  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (!s.is_array() || s.size() != 3) throw UsageError("split must be [train, val, test]");
    c.split = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
  }
  c.seed = j.value("seed", c.seed);
  c.shape.n_hidden = j.value("n_hidden", c.shape.n_hidden);
  if (j.value("output_only", false)) c.trainable = TrainableLayers::OutputOnly;
  c.calibrate_activation = j.value("calibrate_activation", c.calibrate_activation);
}

DatasetSplit split_dataset(std::size_t n, const TrainConfig& config) {
  if (n < 3) throw InsufficientDataError("need at least 3 samples to split, got " + std::to_string(n));
  config.validate();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(substream_seed(config.seed, 0x5b11));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  // The epsilon keeps products like 0.7 * 10 from flooring to 6.
  const auto count = [n](double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_train = std::min(count(config.split.train), n);
  const std::size_t n_val = std::min(count(config.split.val), n - n_train);
  DatasetSplit out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

DatasetSplit split_dataset(const SwarmDataset& dataset, const TrainConfig& config) {
  return split_dataset(dataset.trajectories.size(), config);
}

double batch_sse(const NetworkParams& params, std::span<const Sample> batch) {
  double total = 0.0;
  for (const auto& s : batch) total += (s.target - forward(params, s.input)).squaredNorm();
  return total;
}

Eigen::VectorXd lm_direction(const NetworkParams& params, std::span<const Sample> batch, double lambda,
                             TrainableLayers trainable) {
  check_batch(params, batch, lambda);
  const NetworkShape& shape = params.shape;
  const std::size_t n_in = shape.n_inputs;
  const std::size_t n_hid = shape.n_hidden;
  const auto in1 = idx(n_in + 1);
  const auto hid1 = idx(n_hid + 1);
  const auto q = idx(n_hid) * in1;  // hidden-layer parameter count
  const auto n_samples = idx(batch.size());

  // Per-sample rows: e = d (x) [x; 1] (hidden sensitivities), g = [a; 1]
  // (output-layer regressors), r = residual.
  Eigen::MatrixXd e_rows(n_samples, q);
  Eigen::MatrixXd g_rows(n_samples, hid1);
  Eigen::MatrixXd r_rows(n_samples, idx(shape.n_outputs));
  Eigen::MatrixXd u_rows(n_samples, idx(n_hid));  // d o (w2' r)
  Eigen::MatrixXd xt_rows(n_samples, in1);         // [x; 1]
  for (Eigen::Index s = 0; s < n_samples; ++s) {
    const Sample& sample = batch[static_cast<std::size_t>(s)];
    const Eigen::VectorXd z = params.w1 * sample.input + params.b1;
    Eigen::VectorXd a(z.size()), d(z.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      a[k] = evaluate(params.activation, z[k]);
      d[k] = derivative(params.activation, z[k]);
    }
    const Eigen::VectorXd r = sample.target - (params.w2 * a + params.b2);
    r_rows.row(s) = r.transpose();
    g_rows.row(s).head(idx(n_hid)) = a.transpose();
    g_rows(s, idx(n_hid)) = 1.0;
    u_rows.row(s) = d.cwiseProduct(params.w2.transpose() * r).transpose();
    xt_rows.row(s).head(idx(n_in)) = sample.input.transpose();
    xt_rows(s, idx(n_in)) = 1.0;
    for (Eigen::Index k = 0; k < idx(n_hid); ++k) e_rows.row(s).segment(k * in1, in1) = d[k] * xt_rows.row(s);
  }

  // Output block of J'J is block diagonal with one shared block G per output.
  const Eigen::MatrixXd gram = g_rows.transpose() * g_rows;
  Eigen::MatrixXd gram_damped = gram;
  gram_damped.diagonal() += lambda * floored(gram.diagonal());
  const Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram_damped);
  if (gram_ldlt.info() != Eigen::Success) {
    throw NumericError("output-layer block is singular (lambda = " + std::to_string(lambda) + ")", lambda);
  }
  const Eigen::MatrixXd ro = r_rows.transpose() * g_rows;  // n_outputs x (n_hidden + 1)

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(idx(shape.parameter_count()));
  Eigen::MatrixXd delta_out;  // n_outputs x (n_hidden + 1)

  if (trainable == TrainableLayers::OutputOnly) {
    delta_out = gram_ldlt.solve(ro.transpose()).transpose();
    require_solved(gram_ldlt, Eigen::Map<const Eigen::VectorXd>(delta_out.data(), delta_out.size()), lambda);
  } else {
    // Hidden block: A[(k,j),(k',j')] = W(k,k') * EE[(k,j),(k',j')] with W = w2'w2.
    const Eigen::MatrixXd w = params.w2.transpose() * params.w2;
    Eigen::MatrixXd w_expanded(q, q);
    for (Eigen::Index k = 0; k < idx(n_hid); ++k)
      for (Eigen::Index l = 0; l < idx(n_hid); ++l) w_expanded.block(k * in1, l * in1, in1, in1).setConstant(w(k, l));
    const Eigen::MatrixXd a_block = (e_rows.transpose() * e_rows).cwiseProduct(w_expanded);
    // Coupling: B_i[(k,j), q] = w2(i,k) * C[(k,j), q].
    const Eigen::MatrixXd coupling = e_rows.transpose() * g_rows;  // q x (n_hidden + 1)

    // Gradient for the hidden layer: sum_s u_s[k] * [x_s; 1][j].
    const Eigen::MatrixXd hidden_grad = u_rows.transpose() * xt_rows;  // n_hidden x (n_inputs + 1)
    Eigen::VectorXd rhs_hidden(q);
    for (Eigen::Index k = 0; k < idx(n_hid); ++k) rhs_hidden.segment(k * in1, in1) = hidden_grad.row(k).transpose();

    Eigen::MatrixXd schur = a_block;
    schur.diagonal() += lambda * floored(a_block.diagonal());
    const Eigen::MatrixXd gram_inv_ct = gram_ldlt.solve(coupling.transpose());  // (n_hidden+1) x q
    schur -= (coupling * gram_inv_ct).cwiseProduct(w_expanded);

    // rhs_hidden -= sum_i B_i G^-1 ro_i
    const Eigen::MatrixXd v = gram_ldlt.solve(ro.transpose() * params.w2);  // (n_hidden+1) x n_hidden
    for (Eigen::Index k = 0; k < idx(n_hid); ++k) {
      for (Eigen::Index j = 0; j < in1; ++j) {
        rhs_hidden[k * in1 + j] -= coupling.row(k * in1 + j).dot(v.col(k));
      }
    }

    const Eigen::LDLT<Eigen::MatrixXd> schur_ldlt(schur);
    const Eigen::VectorXd delta_hidden = schur_ldlt.solve(rhs_hidden);
    require_solved(schur_ldlt, delta_hidden, lambda);

    // Back substitution: delta_out_i = G^-1 (ro_i - B_i' delta_hidden).
    Eigen::MatrixXd u(idx(n_hid), hid1);
    for (Eigen::Index k = 0; k < idx(n_hid); ++k) {
      u.row(k) = delta_hidden.segment(k * in1, in1).transpose() * coupling.middleRows(k * in1, in1);
    }
    delta_out = gram_ldlt.solve((ro - params.w2 * u).transpose()).transpose();

    for (std::size_t k = 0; k < n_hid; ++k) {
      for (std::size_t j = 0; j <= n_in; ++j) {
        delta[hidden_flat_index(shape, k, j)] = delta_hidden[idx(k) * in1 + idx(j)];
      }
    }
  }

  for (std::size_t i = 0; i < shape.n_outputs; ++i) {
    for (std::size_t c = 0; c <= n_hid; ++c) delta[output_flat_index(shape, i, c)] = delta_out(idx(i), idx(c));
  }
  if (!delta.allFinite()) {
    throw NumericError("LM step produced non-finite values (lambda = " + std::to_string(lambda) + ")", lambda);
  }
  return delta;
}

Eigen::VectorXd lm_direction_dense(const NetworkParams& params, std::span<const Sample> batch, double lambda,
                                   TrainableLayers trainable) {
  check_batch(params, batch, lambda);
  const auto p = idx(params.shape.parameter_count());
  Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd jtr = Eigen::VectorXd::Zero(p);
  for (const auto& s : batch) {
    const Eigen::MatrixXd jac = jacobian(params, s.input);
    jtj.noalias() += jac.transpose() * jac;
    jtr.noalias() += jac.transpose() * (s.target - forward(params, s.input));
  }
  Eigen::Index first = 0;
  if (trainable == TrainableLayers::OutputOnly) {
    first = idx(params.shape.n_hidden * params.shape.n_inputs + params.shape.n_hidden);
  }
  Eigen::MatrixXd system = jtj.bottomRightCorner(p - first, p - first);
  system.diagonal() += lambda * floored(system.diagonal());
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  const Eigen::VectorXd tail = ldlt.solve(jtr.tail(p - first));
  require_solved(ldlt, tail, lambda);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
  delta.tail(p - first) = tail;
  return delta;
}

LmStepResult try_step(const NetworkParams& params, const Eigen::VectorXd& delta, std::span<const Sample> batch,
                      double lambda, const TrainConfig& config) {
  LmStepResult out{params, lambda, false, batch_sse(params, batch), 0.0};
  if (out.sse_before == 0.0) {
    out.accepted = true;
    out.sse_after = 0.0;
    out.lambda = lambda * config.lambda_down;
    return out;
  }
  NetworkParams candidate =
      NetworkParams::unflatten(params.shape, params.activation, params.flatten() + delta);
  out.sse_after = batch_sse(candidate, batch);
  if (std::isfinite(out.sse_after) && out.sse_after < out.sse_before) {
    out.params = std::move(candidate);
    out.accepted = true;
    out.lambda = lambda * config.lambda_down;
  } else {
    out.lambda = lambda * config.lambda_up;
  }
  return out;
}

LmStepResult lm_step(const NetworkParams& params, std::span<const Sample> batch, double lambda,
                     const TrainConfig& config) {
  return try_step(params, lm_direction(params, batch, lambda, config.trainable), batch, lambda, config);
}

FitResult fit_lm(const NetworkParams& init, std::span<const Sample> train, std::span<const Sample> val,
                 const TrainConfig& config, MseMonitor train_monitor, MseMonitor val_monitor) {
  config.validate();
  if (train.empty()) throw InsufficientDataError("training split is empty");
  if (!train_monitor) {
    train_monitor = [train](const NetworkParams& p) { return mean_squared_residual(p, train); };
  }
  if (!val_monitor) {
    val_monitor = val.empty() ? train_monitor
                              : MseMonitor([val](const NetworkParams& p) { return mean_squared_residual(p, val); });
  }

  FitResult out;
  out.params = init;
  NetworkParams current = init;
  double lambda = config.lambda_init;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    bool accepted = false;
    bool zero_gradient = false;
    while (!accepted) {
      LmStepResult step;
      try {
        step = lm_step(current, train, lambda, config);
      } catch (const NumericError&) {
        // An unsolvable system counts as a rejected step.
        step = LmStepResult{current, lambda * config.lambda_up, false, 0.0, 0.0};
      }
      if (!std::isfinite(step.sse_before)) {
        throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch), lambda,
                           static_cast<long>(epoch));
      }
      if (step.accepted) {
        accepted = true;
        zero_gradient = step.sse_after == step.sse_before;
        current = std::move(step.params);
        lambda = std::max(step.lambda, config.lambda_min);
        if (!zero_gradient) out.accepted_sse_history.push_back(step.sse_after);
      } else if (step.lambda > config.lambda_max) {
        out.final_lambda = lambda;
        out.stopped_reason = StopReason::LambdaOverflow;
        return out;
      } else {
        lambda = step.lambda;
      }
    }
    if (zero_gradient) {
      out.final_lambda = lambda;
      out.stopped_reason = StopReason::Converged;
      return out;
    }

    const double train_mse = train_monitor(current);
    const double val_mse = val_monitor(current);
    if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
      throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch), lambda,
                         static_cast<long>(epoch));
    }
    out.train_mse_history.push_back(train_mse);
    out.val_mse_history.push_back(val_mse);
    out.epochs_run = epoch;
    if (val_mse < best_val) {
      best_val = val_mse;
      out.params = current;
      out.best_epoch = epoch;
      stale = 0;
    } else if (config.val_patience > 0 && ++stale >= config.val_patience) {
      out.final_lambda = lambda;
      out.stopped_reason = StopReason::ValPatience;
      return out;
    }
  }
  out.final_lambda = lambda;
  out.stopped_reason = StopReason::MaxEpochs;
  return out;
}

AffineNormalizer AffineNormalizer::fit(std::span<const Eigen::VectorXd> rows) {
  if (rows.empty()) throw UsageError("cannot fit a normalizer to zero rows");
  AffineNormalizer n;
  n.lo = rows.front();
  Eigen::VectorXd hi = rows.front();
  for (const auto& r : rows) {
    if (r.size() != n.lo.size()) throw ShapeError("normalizer rows differ in length");
    n.lo = n.lo.cwiseMin(r);
    hi = hi.cwiseMax(r);
  }
  n.range = hi - n.lo;
  return n;
}

Eigen::VectorXd AffineNormalizer::normalize(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != lo.size()) throw ShapeError("normalizer dimension mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = range[i] > 0.0 ? (v[i] - lo[i]) / range[i] : 0.0;
  return out;
}

Eigen::VectorXd AffineNormalizer::denormalize(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != lo.size()) throw ShapeError("normalizer dimension mismatch");
  return lo + range.cwiseProduct(v);
}

Eigen::VectorXd trajectory_features(const Trajectory& traj) {
  const auto& wp = traj.waypoints;
  if (wp.size() < 3) throw UsageError("trajectory too short to extract features");
  const Waypoint& a = wp.front();
  const Waypoint& m = wp[wp.size() / 2];
  const Waypoint& b = wp.back();
  Eigen::VectorXd f(9);
  f << a.x, a.y, a.z, m.x, m.y, m.z, b.x, b.y, b.z;
  return f;
}

Eigen::VectorXd trajectory_axis(const Trajectory& traj, Axis axis) {
  Eigen::VectorXd v(idx(traj.waypoints.size()));
  for (std::size_t k = 0; k < traj.waypoints.size(); ++k) {
    const auto& w = traj.waypoints[k];
    v[idx(k)] = axis == Axis::X ? w.x : axis == Axis::Y ? w.y : w.z;
  }
  return v;
}

Eigen::VectorXd TrainedModel::predict(const Trajectory& traj) const {
  return output_norm.denormalize(forward(params, input_norm.normalize(trajectory_features(traj))));
}

MetricResult evaluate_model(const TrainedModel& model, const SwarmDataset& dataset,
                            std::span<const std::size_t> indices) {
  std::vector<MetricResult> per_sample;
  per_sample.reserve(indices.size());
  for (std::size_t i : indices) {
    const Trajectory& traj = dataset.trajectories.at(i);
    if (traj.waypoints.size() != model.params.shape.n_outputs) {
      throw UsageError("trajectory " + std::to_string(traj.uav_id) + " has " +
                       std::to_string(traj.waypoints.size()) + " waypoints, model predicts " +
                       std::to_string(model.params.shape.n_outputs));
    }
    const Eigen::VectorXd actual = trajectory_axis(traj, model.axis);
    const Eigen::VectorXd predicted = model.predict(traj);
    per_sample.push_back(compute_all(std::span<const double>(actual.data(), idx(actual.size())),
                                     std::span<const double>(predicted.data(), idx(predicted.size()))));
  }
  return aggregate(per_sample);
}

TrainResult train(const SwarmDataset& dataset, Axis axis, const ActivationSpec& activation,
                  const TrainConfig& config) {
  config.validate();
  activation.validate();
  if (dataset.trajectories.size() < 3) {
    throw InsufficientDataError("training needs at least 3 trajectories, got " +
                                std::to_string(dataset.trajectories.size()));
  }
  NetworkShape shape = config.shape;
  for (const auto& traj : dataset.trajectories) {
    if (traj.waypoints.size() != shape.n_outputs) {
      throw UsageError("trajectory " + std::to_string(traj.uav_id) + " has " +
                       std::to_string(traj.waypoints.size()) + " waypoints, expected " +
                       std::to_string(shape.n_outputs));
    }
  }
  const DatasetSplit split = split_dataset(dataset, config);

  std::vector<Eigen::VectorXd> train_inputs, train_targets;
  for (std::size_t i : split.train) {
    train_inputs.push_back(trajectory_features(dataset.trajectories[i]));
    train_targets.push_back(trajectory_axis(dataset.trajectories[i], axis));
  }
  TrainedModel model;
  model.axis = axis;
  model.split = config.split;
  model.seed = config.seed;
  model.input_norm = AffineNormalizer::fit(train_inputs);
  model.output_norm = AffineNormalizer::fit(train_targets);

  const auto make_samples = [&](const std::vector<std::size_t>& indices) {
    std::vector<Sample> out;
    for (std::size_t i : indices) {
      const auto& traj = dataset.trajectories[i];
      out.push_back({model.input_norm.normalize(trajectory_features(traj)),
                     model.output_norm.normalize(trajectory_axis(traj, axis))});
    }
    return out;
  };
  const std::vector<Sample> train_samples = make_samples(split.train);
  const std::vector<Sample> val_samples = make_samples(split.val);

  NetworkParams init = init_params(shape, activation, config.seed);
  if (config.calibrate_activation) {
    std::vector<double> pre;
    for (const auto& s : train_samples) {
      const Eigen::VectorXd z = hidden_pre_activation(init, s.input);
      pre.insert(pre.end(), z.data(), z.data() + z.size());
    }
    init.activation = calibrate_from_median(init.activation, pre);
  }

  const auto monitor_for = [&](const std::vector<std::size_t>& indices) -> MseMonitor {
    return [&dataset, &model, &indices](const NetworkParams& p) {
      TrainedModel probe = model;
      probe.params = p;
      return evaluate_model(probe, dataset, indices).mse;
    };
  };
  const MseMonitor train_monitor = monitor_for(split.train);
  const MseMonitor val_monitor = split.val.empty() ? train_monitor : monitor_for(split.val);

  FitResult fit = fit_lm(init, train_samples, val_samples, config, train_monitor, val_monitor);
  model.params = std::move(fit.params);

  TrainReport report;
  report.axis = axis;
  report.activation = model.params.activation;
  report.epochs_run = fit.epochs_run;
  report.best_epoch = fit.best_epoch;
  report.train_mse_history = std::move(fit.train_mse_history);
  report.val_mse_history = std::move(fit.val_mse_history);
  report.accepted_sse_history = std::move(fit.accepted_sse_history);
  report.stopped_reason = fit.stopped_reason;
  report.seed = config.seed;
  report.train_mse = train_monitor(model.params);
  report.val_mse = val_monitor(model.params);
  report.test_metrics = evaluate_model(model, dataset, split.test);
  report.test_mse = report.test_metrics.mse;
  report.test_smape = report.test_metrics.smape;
  if (!std::isfinite(report.test_mse)) {
    throw NumericError("test loss is not finite", fit.final_lambda, static_cast<long>(fit.epochs_run));
  }
  return {std::move(model), std::move(report)};
}

void to_json(nlohmann::json& j, const TrainedModel& m) {
  const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  const NetworkShape& s = m.params.shape;
  j = nlohmann::json{
      {"format_version", kFormatVersion},
      {"axis", to_string(m.axis)},
      {"seed", m.seed},
      {"split", {m.split.train, m.split.val, m.split.test}},
      {"shape", {{"n_inputs", s.n_inputs}, {"n_hidden", s.n_hidden}, {"n_outputs", s.n_outputs}}},
      {"activation", m.params.activation},
      {"normalization",
       {{"input_lo", vec(m.input_norm.lo)},
        {"input_range", vec(m.input_norm.range)},
        {"output_lo", vec(m.output_norm.lo)},
        {"output_range", vec(m.output_norm.range)}}},
      {"parameter_order", "w1_row_major,b1,w2_row_major,b2"},
      {"parameters", vec(m.params.flatten())},
  };
}

void from_json(const nlohmann::json& j, TrainedModel& m) {
  if (!j.contains("format_version")) throw UsageError("model file lacks format_version");
  const auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), idx(v.size())));
  };
  m.axis = axis_from_string(j.at("axis").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& sp = j.at("split");
  m.split = {sp.at(0).get<double>(), sp.at(1).get<double>(), sp.at(2).get<double>()};
  NetworkShape shape{j.at("shape").at("n_inputs").get<std::size_t>(),
                     j.at("shape").at("n_hidden").get<std::size_t>(),
                     j.at("shape").at("n_outputs").get<std::size_t>()};
  const ActivationSpec act = j.at("activation").get<ActivationSpec>();
  m.params = NetworkParams::unflatten(shape, act, vec(j.at("parameters")));
  m.params.validate();
  const auto& nj = j.at("normalization");
  m.input_norm = {vec(nj.at("input_lo")), vec(nj.at("input_range"))};
  m.output_norm = {vec(nj.at("output_lo")), vec(nj.at("output_range"))};
  if (static_cast<std::size_t>(m.input_norm.lo.size()) != shape.n_inputs ||
      static_cast<std::size_t>(m.output_norm.lo.size()) != shape.n_outputs ||
      m.input_norm.range.size() != m.input_norm.lo.size() ||
      m.output_norm.range.size() != m.output_norm.lo.size()) {
    throw ShapeError("model normalization constants do not match its shape");
  }
}

void to_json(nlohmann::json& j, const TrainReport& r) {
  j = nlohmann::json{{"format_version", kFormatVersion},
                     {"axis", to_string(r.axis)},
                     {"activation", r.activation},
                     {"seed", r.seed},
                     {"epochs_run", r.epochs_run},
                     {"best_epoch", r.best_epoch},
                     {"stopped_reason", to_string(r.stopped_reason)},
                     {"train_mse", r.train_mse},
                     {"val_mse", r.val_mse},
                     {"test_mse", r.test_mse},
                     {"test_smape", r.test_smape},
                     {"test_metrics", r.test_metrics},
                     {"train_mse_history", r.train_mse_history},
                     {"val_mse_history", r.val_mse_history},
                     {"accepted_sse_history", r.accepted_sse_history}};
}

}  // namespace swarmtraj
