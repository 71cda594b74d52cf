#include "swarmtraj/network.hpp"

#include <cmath>
#include <string>

#include "swarmtraj/errors.hpp"
#include "swarmtraj/rng.hpp"

namespace swarmtraj {

namespace {

void check_input(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (static_cast<std::size_t>(input.size()) != params.shape.n_inputs) {
    throw ShapeError("network expects " + std::to_string(params.shape.n_inputs) +
                     " inputs, got " + std::to_string(input.size()));
  }
}

}  // namespace

void NetworkShape::validate() const {
  if (n_inputs == 0 || n_hidden == 0 || n_outputs == 0) {
    throw UsageError("network layer widths must be at least 1");
  }
}

NetworkParams NetworkParams::zeros(const NetworkShape& shape, const ActivationSpec& activation) {
  shape.validate();
  const auto in = static_cast<Eigen::Index>(shape.n_inputs);
  const auto hid = static_cast<Eigen::Index>(shape.n_hidden);
  const auto out = static_cast<Eigen::Index>(shape.n_outputs);
  return NetworkParams{shape,
                       activation,
                       Eigen::MatrixXd::Zero(hid, in),
                       Eigen::VectorXd::Zero(hid),
                       Eigen::MatrixXd::Zero(out, hid),
                       Eigen::VectorXd::Zero(out)};
}

void NetworkParams::validate() const {
  shape.validate();
  const auto in = static_cast<Eigen::Index>(shape.n_inputs);
  const auto hid = static_cast<Eigen::Index>(shape.n_hidden);
  const auto out = static_cast<Eigen::Index>(shape.n_outputs);
  if (w1.rows() != hid || w1.cols() != in || b1.size() != hid || w2.rows() != out ||
      w2.cols() != hid || b2.size() != out) {
    throw ShapeError("network parameter dimensions do not match the declared shape");
  }
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite()) {
    throw UsageError("network parameters must be finite");
  }
  activation.validate();
}

Eigen::VectorXd NetworkParams::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(shape.parameter_count()));
  Eigen::Index pos = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) flat[pos++] = w1(r, c);
  for (Eigen::Index i = 0; i < b1.size(); ++i) flat[pos++] = b1[i];
  for (Eigen::Index r = 0; r < w2.rows(); ++r)
    for (Eigen::Index c = 0; c < w2.cols(); ++c) flat[pos++] = w2(r, c);
  for (Eigen::Index i = 0; i < b2.size(); ++i) flat[pos++] = b2[i];
  return flat;
}

NetworkParams NetworkParams::unflatten(const NetworkShape& shape, const ActivationSpec& activation,
                                       const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (static_cast<std::size_t>(flat.size()) != shape.parameter_count()) {
    throw ShapeError("flat parameter vector has " + std::to_string(flat.size()) +
                     " entries, shape needs " + std::to_string(shape.parameter_count()));
  }
  NetworkParams p = zeros(shape, activation);
  Eigen::Index pos = 0;
  for (Eigen::Index r = 0; r < p.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w1.cols(); ++c) p.w1(r, c) = flat[pos++];
  for (Eigen::Index i = 0; i < p.b1.size(); ++i) p.b1[i] = flat[pos++];
  for (Eigen::Index r = 0; r < p.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w2.cols(); ++c) p.w2(r, c) = flat[pos++];
  for (Eigen::Index i = 0; i < p.b2.size(); ++i) p.b2[i] = flat[pos++];
  return p;
}

NetworkParams init_params(const NetworkShape& shape, const ActivationSpec& activation,
                          std::uint64_t seed) {
  NetworkParams p = NetworkParams::zeros(shape, activation);
  Rng rng(substream_seed(seed, 0x1417));
  const double hidden_bound = 1.0 / std::sqrt(static_cast<double>(shape.n_inputs));
  const double output_bound = 1.0 / std::sqrt(static_cast<double>(shape.n_hidden));
  for (Eigen::Index r = 0; r < p.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w1.cols(); ++c) p.w1(r, c) = rng.uniform(-hidden_bound, hidden_bound);
  for (Eigen::Index r = 0; r < p.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w2.cols(); ++c) p.w2(r, c) = rng.uniform(-output_bound, output_bound);
  return p;
}

Eigen::VectorXd hidden_pre_activation(const NetworkParams& params,
                                      const Eigen::Ref<const Eigen::VectorXd>& input) {
  check_input(params, input);
  return params.w1 * input + params.b1;
}

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input) {
  const Eigen::VectorXd z = hidden_pre_activation(params, input);
  Eigen::VectorXd a(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) a[k] = evaluate(params.activation, z[k]);
  return params.w2 * a + params.b2;
}

Eigen::MatrixXd jacobian(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& input) {
  const Eigen::VectorXd z = hidden_pre_activation(params, input);
  const auto in = static_cast<Eigen::Index>(params.shape.n_inputs);
  const auto hid = static_cast<Eigen::Index>(params.shape.n_hidden);
  const auto out = static_cast<Eigen::Index>(params.shape.n_outputs);

  Eigen::VectorXd a(hid), da(hid);
  for (Eigen::Index k = 0; k < hid; ++k) {
    a[k] = evaluate(params.activation, z[k]);
    da[k] = derivative(params.activation, z[k]);
  }

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(out, static_cast<Eigen::Index>(params.shape.parameter_count()));
  const Eigen::Index b1_offset = hid * in;
  const Eigen::Index w2_offset = b1_offset + hid;
  const Eigen::Index b2_offset = w2_offset + out * hid;
  for (Eigen::Index i = 0; i < out; ++i) {
    for (Eigen::Index k = 0; k < hid; ++k) {
      const double upstream = params.w2(i, k) * da[k];
      for (Eigen::Index j = 0; j < in; ++j) jac(i, k * in + j) = upstream * input[j];
      jac(i, b1_offset + k) = upstream;
      jac(i, w2_offset + i * hid + k) = a[k];
    }
    jac(i, b2_offset + i) = 1.0;
  }
  return jac;
}

}  // namespace swarmtraj
