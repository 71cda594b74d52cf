#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "swarmtraj/activations.hpp"

namespace swarmtraj {

/// Layer widths of the single-hidden-layer regression network. The defaults
/// take the start, midpoint and destination positions (3 x 3 coordinates) and
/// emit one coordinate of all 201 waypoints.
struct NetworkShape {
  std::size_t n_inputs = 9;
  std::size_t n_hidden = 15;
  std::size_t n_outputs = 201;

  /// Number of trainable scalars.
  std::size_t parameter_count() const {
    return n_hidden * n_inputs + n_hidden + n_outputs * n_hidden + n_outputs;
  }

  void validate() const;

  bool operator==(const NetworkShape&) const = default;
};

/// Weights and biases of one network. The output layer is affine.
///
/// Flattening order, used by `flatten`, `unflatten`, `jacobian` and the model
/// file: w1 row-major, b1, w2 row-major, b2.
struct NetworkParams {
  NetworkShape shape;
  ActivationSpec activation;
  Eigen::MatrixXd w1;  // n_hidden x n_inputs
  Eigen::VectorXd b1;  // n_hidden
  Eigen::MatrixXd w2;  // n_outputs x n_hidden
  Eigen::VectorXd b2;  // n_outputs

  /// All-zero parameters of the given shape.
  static NetworkParams zeros(const NetworkShape& shape, const ActivationSpec& activation);

  /// Throws ShapeError on inconsistent dimensions, UsageError on non-finite entries.
  void validate() const;

  Eigen::VectorXd flatten() const;
  static NetworkParams unflatten(const NetworkShape& shape, const ActivationSpec& activation,
                                 const Eigen::Ref<const Eigen::VectorXd>& flat);
};

/// Hidden weights uniform in +-1/sqrt(n_inputs), output weights uniform in
/// +-1/sqrt(n_hidden), biases zero. Bit-identical for equal arguments.
NetworkParams init_params(const NetworkShape& shape, const ActivationSpec& activation,
                          std::uint64_t seed);

/// Hidden-layer pre-activations w1 * input + b1.
Eigen::VectorXd hidden_pre_activation(const NetworkParams& params,
                                      const Eigen::Ref<const Eigen::VectorXd>& input);

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input);

/// d output_i / d param_j, columns in flattening order.
Eigen::MatrixXd jacobian(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input);

}  // namespace swarmtraj
