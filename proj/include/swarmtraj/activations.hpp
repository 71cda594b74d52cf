#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace swarmtraj {

enum class ActivationKind {
  Sigmoid,
  Tanh,
  ReLU,
  LeakyReLU,
  Swish,
  Maxout,
  Elliot,
  AdaptoSwelliGauss,
};

/// All kinds in canonical reporting order.
inline constexpr std::array<ActivationKind, 8> kAllActivationKinds = {
    ActivationKind::Sigmoid, ActivationKind::Tanh,   ActivationKind::ReLU,
    ActivationKind::LeakyReLU, ActivationKind::Swish, ActivationKind::Maxout,
    ActivationKind::Elliot,  ActivationKind::AdaptoSwelliGauss,
};

/// Snake-case identifier used in files and on the command line.
std::string_view to_string(ActivationKind kind);
/// Throws UsageError naming the offending string.
ActivationKind activation_kind_from_string(std::string_view name);

struct MaxoutPiece {
  double weight;
  double bias;

  bool operator==(const MaxoutPiece&) const = default;
};

/// Tagged activation choice plus every hyperparameter any kind may use.
/// Only the fields relevant to `kind` are read.
struct ActivationSpec {
  ActivationKind kind = ActivationKind::Sigmoid;
  double leaky_alpha = 0.01;
  double swish_beta = 0.5;
  // |x| when left at the default.
  std::vector<MaxoutPiece> maxout_pieces = {{1.0, 0.0}, {-1.0, 0.0}};
  // AdaptoSwelliGauss: Swish below or at asg_alpha, Elliot times a scaled and
  // shifted unit-variance Gaussian above it.
  double asg_alpha = 0.14;
  double asg_scale = 0.5;
  double asg_shift = 0.25;

  static ActivationSpec of(ActivationKind kind) {
    ActivationSpec spec;
    spec.kind = kind;
    return spec;
  }

  /// Throws UsageError when an invariant is broken.
  void validate() const;

  bool operator==(const ActivationSpec&) const = default;
};

double evaluate(const ActivationSpec& spec, double x);

/// Analytic derivative. At switch points the right-hand slope is used for the
/// ReLU family, the Swish-branch slope at asg_alpha, and the first maximal
/// piece for Maxout.
double derivative(const ActivationSpec& spec, double x);

/// Element-wise evaluate. A non-finite entry raises DomainError with its index.
std::vector<double> batch_evaluate(const ActivationSpec& spec, std::span<const double> xs);

// Component functions, exposed for tests and for composing ASG.
double sigmoid(double x);
double swish(double x, double beta);
double elliot(double x);
double scale_shift_gaussian(double x, double scale, double shift);

/// Replaces the hyperparameters with statistics of observed pre-activations:
/// asg_alpha and asg_shift become the median, swish_beta and asg_scale the
/// median magnitude (floored to stay positive). Used by the opt-in training
/// calibration pass.
ActivationSpec calibrate_from_median(ActivationSpec spec, std::span<const double> pre_activations);

void to_json(nlohmann::json& j, const ActivationSpec& spec);
void from_json(const nlohmann::json& j, ActivationSpec& spec);

}  // namespace swarmtraj
