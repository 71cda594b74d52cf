#include "swarmtraj/activations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swarmtraj/errors.hpp"

namespace swarmtraj {

namespace {

constexpr std::array<std::string_view, 8> kNames = {
    "sigmoid", "tanh", "relu", "leaky_relu", "swish", "maxout", "elliot", "adapto_swelli_gauss",
};

void require_finite(double x) {
  if (!std::isfinite(x)) {
    throw DomainError("activation input must be finite, got " + std::to_string(x));
  }
}

double swish_derivative(double x, double beta) {
  const double s = sigmoid(beta * x);
  return s + beta * x * s * (1.0 - s);
}

double elliot_derivative(double x) {
  const double d = 1.0 + std::abs(x);
  return 1.0 / (d * d);
}

// Index of the first piece attaining the maximum.
std::size_t maxout_argmax(const std::vector<MaxoutPiece>& pieces, double x) {
  std::size_t best = 0;
  double best_value = pieces[0].weight * x + pieces[0].bias;
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    const double v = pieces[i].weight * x + pieces[i].bias;
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(ActivationKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

ActivationKind activation_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<ActivationKind>(i);
  }
  throw UsageError("unknown activation kind '" + std::string(name) + "'");
}

void ActivationSpec::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(leaky_alpha) || !finite(swish_beta) || !finite(asg_alpha) || !finite(asg_scale) ||
      !finite(asg_shift)) {
    throw UsageError("activation hyperparameters must be finite");
  }
  if (!(asg_scale > 0.0)) throw UsageError("asg_scale must be positive");
  if (kind == ActivationKind::Maxout && maxout_pieces.empty()) {
    throw UsageError("maxout needs at least one piece");
  }
  for (const auto& p : maxout_pieces) {
    if (!finite(p.weight) || !finite(p.bias)) throw UsageError("maxout pieces must be finite");
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double swish(double x, double beta) { return x * sigmoid(beta * x); }

double elliot(double x) { return x / (1.0 + std::abs(x)); }

double scale_shift_gaussian(double x, double scale, double shift) {
  const double u = x - shift;
  return scale * std::exp(-u * u);
}

double evaluate(const ActivationSpec& spec, double x) {
  require_finite(x);
  switch (spec.kind) {
    case ActivationKind::Sigmoid:
      return sigmoid(x);
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::LeakyReLU:
      return std::max(spec.leaky_alpha * x, x);
    case ActivationKind::Swish:
      return swish(x, spec.swish_beta);
    case ActivationKind::Maxout: {
      const auto& p = spec.maxout_pieces[maxout_argmax(spec.maxout_pieces, x)];
      return p.weight * x + p.bias;
    }
    case ActivationKind::Elliot:
      return elliot(x);
    case ActivationKind::AdaptoSwelliGauss:
      if (x <= spec.asg_alpha) return swish(x, spec.swish_beta);
      return elliot(x) * scale_shift_gaussian(x, spec.asg_scale, spec.asg_shift);
  }
  return 0.0;
}

double derivative(const ActivationSpec& spec, double x) {
  require_finite(x);
  switch (spec.kind) {
    case ActivationKind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::ReLU:
      return x >= 0.0 ? 1.0 : 0.0;
    case ActivationKind::LeakyReLU:
      return spec.leaky_alpha * x > x ? spec.leaky_alpha : 1.0;
    case ActivationKind::Swish:
      return swish_derivative(x, spec.swish_beta);
    case ActivationKind::Maxout:
      return spec.maxout_pieces[maxout_argmax(spec.maxout_pieces, x)].weight;
    case ActivationKind::Elliot:
      return elliot_derivative(x);
    case ActivationKind::AdaptoSwelliGauss: {
      if (x <= spec.asg_alpha) return swish_derivative(x, spec.swish_beta);
      const double g = scale_shift_gaussian(x, spec.asg_scale, spec.asg_shift);
      const double dg = -2.0 * (x - spec.asg_shift) * g;
      return elliot_derivative(x) * g + elliot(x) * dg;
    }
  }
  return 0.0;
}

std::vector<double> batch_evaluate(const ActivationSpec& spec, std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) {
      throw DomainError("non-finite activation input at index " + std::to_string(i), i);
    }
    out.push_back(evaluate(spec, xs[i]));
  }
  return out;
}

ActivationSpec calibrate_from_median(ActivationSpec spec, std::span<const double> pre_activations) {
  if (pre_activations.empty()) throw UsageError("calibration needs at least one pre-activation");
  const auto median = [](std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
  };
  std::vector<double> values(pre_activations.begin(), pre_activations.end());
  std::vector<double> magnitudes;
  magnitudes.reserve(values.size());
  for (double v : values) magnitudes.push_back(std::abs(v));

  constexpr double kMinPositive = 1e-6;
  const double center = median(std::move(values));
  const double spread = std::max(median(std::move(magnitudes)), kMinPositive);
  spec.asg_alpha = center;
  spec.asg_shift = center;
  spec.swish_beta = spread;
  spec.asg_scale = spread;
  return spec;
}

void to_json(nlohmann::json& j, const ActivationSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)}};
  switch (spec.kind) {
    case ActivationKind::LeakyReLU:
      j["alpha"] = spec.leaky_alpha;
      break;
    case ActivationKind::Swish:
      j["swish_beta"] = spec.swish_beta;
      break;
    case ActivationKind::Maxout: {
      auto pieces = nlohmann::json::array();
      for (const auto& p : spec.maxout_pieces) pieces.push_back({p.weight, p.bias});
      j["pieces"] = pieces;
      break;
    }
    case ActivationKind::AdaptoSwelliGauss:
      j["alpha"] = spec.asg_alpha;
      j["scale"] = spec.asg_scale;
      j["shift"] = spec.asg_shift;
      j["swish_beta"] = spec.swish_beta;
      break;
    default:
      break;
  }
}

void from_json(const nlohmann::json& j, ActivationSpec& spec) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw UsageError("activation spec must be an object with a string 'kind'");
  }
  spec = ActivationSpec::of(activation_kind_from_string(j["kind"].get<std::string>()));
  switch (spec.kind) {
    case ActivationKind::LeakyReLU:
      spec.leaky_alpha = j.value("alpha", spec.leaky_alpha);
      break;
    case ActivationKind::Swish:
      spec.swish_beta = j.value("swish_beta", spec.swish_beta);
      break;
    case ActivationKind::Maxout:
      if (j.contains("pieces")) {
        spec.maxout_pieces.clear();
        for (const auto& p : j["pieces"]) {
          if (!p.is_array() || p.size() != 2) throw UsageError("maxout piece must be [weight, bias]");
          spec.maxout_pieces.push_back({p[0].get<double>(), p[1].get<double>()});
        }
      }
      break;
    case ActivationKind::AdaptoSwelliGauss:
      spec.asg_alpha = j.value("alpha", spec.asg_alpha);
      spec.asg_scale = j.value("scale", spec.asg_scale);
      spec.asg_shift = j.value("shift", spec.asg_shift);
      spec.swish_beta = j.value("swish_beta", spec.swish_beta);
      break;
    default:
      break;
  }
  spec.validate();
}

}  // namespace swarmtraj
