#include "swarmtraj/activations.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swarmtraj/errors.hpp"

namespace swarmtraj {
namespace {

using testing::central_difference;
using testing::relative_error;

ActivationSpec asg() { return ActivationSpec::of(ActivationKind::AdaptoSwelliGauss); }

TEST(Activations, TrivialValues) {
  EXPECT_EQ(evaluate(ActivationSpec::of(ActivationKind::Sigmoid), 0.0), 0.5);
  EXPECT_EQ(evaluate(ActivationSpec::of(ActivationKind::Tanh), 0.0), 0.0);
  EXPECT_EQ(evaluate(ActivationSpec::of(ActivationKind::ReLU), -2.0), 0.0);
  EXPECT_EQ(evaluate(ActivationSpec::of(ActivationKind::Elliot), 1.0), 0.5);
  EXPECT_EQ(evaluate(ActivationSpec::of(ActivationKind::Swish), 0.0), 0.0);
  EXPECT_EQ(evaluate(asg(), 0.0), 0.0);
}

TEST(Activations, AdaptoSwelliGaussAboveThreshold) {
  // mpmath, 40 digits: (1/2) * 0.5 * exp(-0.5625)
  EXPECT_NEAR(evaluate(asg(), 1.0), 0.14244570618273075, 1e-15);
}

TEST(Activations, DefaultHyperparameters) {
  const ActivationSpec s = asg();
  EXPECT_EQ(s.swish_beta, 0.5);
  EXPECT_EQ(s.asg_alpha, 0.14);
  EXPECT_EQ(s.asg_scale, 0.5);
  EXPECT_EQ(s.asg_shift, 0.25);
  EXPECT_EQ(ActivationSpec::of(ActivationKind::LeakyReLU).leaky_alpha, 0.01);
  // Default maxout is |x|.
  const ActivationSpec m = ActivationSpec::of(ActivationKind::Maxout);
  EXPECT_EQ(evaluate(m, -3.0), 3.0);
  EXPECT_EQ(evaluate(m, 2.5), 2.5);
}

TEST(Activations, DerivativeExamples) {
  EXPECT_EQ(derivative(ActivationSpec::of(ActivationKind::Sigmoid), 0.0), 0.25);
  EXPECT_EQ(derivative(ActivationSpec::of(ActivationKind::ReLU), 3.0), 1.0);
  const auto tanh_spec = ActivationSpec::of(ActivationKind::Tanh);
  const double fd = central_difference([&](double x) { return evaluate(tanh_spec, x); }, 1.0);
  EXPECT_LT(relative_error(derivative(tanh_spec, 1.0), fd), 1e-6);
  EXPECT_NEAR(derivative(tanh_spec, 1.0), 0.41997434161402607, 1e-15);
}

TEST(Activations, SwitchPointConventions) {
  EXPECT_EQ(derivative(ActivationSpec::of(ActivationKind::ReLU), 0.0), 1.0);
  EXPECT_EQ(derivative(ActivationSpec::of(ActivationKind::LeakyReLU), 0.0), 1.0);
  EXPECT_EQ(derivative(ActivationSpec::of(ActivationKind::LeakyReLU), -1.0), 0.01);
  const ActivationSpec s = asg();
  const ActivationSpec swish_spec = ActivationSpec::of(ActivationKind::Swish);
  EXPECT_EQ(derivative(s, s.asg_alpha), derivative(swish_spec, s.asg_alpha));
  // First maximal piece wins a tie: |x| at 0 takes slope +1.
  EXPECT_EQ(derivative(ActivationSpec::of(ActivationKind::Maxout), 0.0), 1.0);
}

TEST(Activations, NonFiniteInputIsDomainError) {
  for (ActivationKind k : kAllActivationKinds) {
    const auto s = ActivationSpec::of(k);
    EXPECT_THROW(evaluate(s, std::numeric_limits<double>::quiet_NaN()), DomainError);
    EXPECT_THROW(derivative(s, std::numeric_limits<double>::infinity()), DomainError);
  }
}

TEST(Activations, BatchEvaluate) {
  const std::vector<double> xs{-1.0, 0.0, 2.0};
  EXPECT_EQ(batch_evaluate(ActivationSpec::of(ActivationKind::ReLU), xs), (std::vector<double>{0.0, 0.0, 2.0}));
  const std::vector<double> ys{-1.0, 1.0};
  EXPECT_EQ(batch_evaluate(ActivationSpec::of(ActivationKind::Elliot), ys), (std::vector<double>{-0.5, 0.5}));
  EXPECT_TRUE(batch_evaluate(ActivationSpec::of(ActivationKind::Sigmoid), std::vector<double>{}).empty());

  const std::vector<double> bad{0.0, 1.0, std::numeric_limits<double>::quiet_NaN()};
  try {
    batch_evaluate(ActivationSpec::of(ActivationKind::Tanh), bad);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Activations, BatchMatchesPointwise) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  for (ActivationKind k : kAllActivationKinds) {
    const auto s = ActivationSpec::of(k);
    std::vector<double> xs(257);
    for (auto& x : xs) x = dist(gen);
    const auto ys = batch_evaluate(s, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(ys[i], evaluate(s, xs[i]));
  }
}

TEST(Activations, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  ActivationSpec maxout3 = ActivationSpec::of(ActivationKind::Maxout);
  maxout3.maxout_pieces = {{0.5, 1.0}, {-2.0, 0.0}, {3.0, -4.0}};
  std::vector<ActivationSpec> specs;
  for (ActivationKind k : kAllActivationKinds) specs.push_back(ActivationSpec::of(k));
  specs.push_back(maxout3);

  for (const auto& s : specs) {
    std::vector<double> kinks{0.0};
    if (s.kind == ActivationKind::AdaptoSwelliGauss) kinks = {s.asg_alpha};
    if (s.kind == ActivationKind::Maxout) {
      kinks.clear();
      for (std::size_t i = 0; i < s.maxout_pieces.size(); ++i)
        for (std::size_t j = i + 1; j < s.maxout_pieces.size(); ++j) {
          const auto& p = s.maxout_pieces[i];
          const auto& q = s.maxout_pieces[j];
          if (p.weight != q.weight) kinks.push_back((q.bias - p.bias) / (p.weight - q.weight));
        }
    }
    int checked = 0;
    while (checked < 1000) {
      const double x = dist(gen);
      bool near_kink = false;
      for (double k : kinks) near_kink = near_kink || std::abs(x - k) < 1e-4;
      if (near_kink) continue;
      const double fd = central_difference([&](double v) { return evaluate(s, v); }, x);
      ASSERT_LT(relative_error(derivative(s, x), fd, 1e-8), 1e-5) << to_string(s.kind) << " at x=" << x;
      ++checked;
    }
  }
}

TEST(Activations, RangeBounds) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> dist(-15.0, 15.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = dist(gen);
    const double s = evaluate(ActivationSpec::of(ActivationKind::Sigmoid), x);
    const double t = evaluate(ActivationSpec::of(ActivationKind::Tanh), x);
    const double e = evaluate(ActivationSpec::of(ActivationKind::Elliot), x);
    EXPECT_TRUE(s > 0.0 && s < 1.0) << x;
    EXPECT_TRUE(t > -1.0 && t < 1.0) << x;
    EXPECT_TRUE(e > -1.0 && e < 1.0) << x;
    const double r = evaluate(ActivationSpec::of(ActivationKind::ReLU), x);
    EXPECT_EQ(r, x > 0.0 ? x : 0.0);
  }
}

TEST(Activations, AdaptoSwelliGaussShape) {
  const ActivationSpec s = asg();
  // Swish minimum: min_u u * sigmoid(u) = -0.278464542761074 (mpmath), scaled by 1/beta.
  const double swish_min = -0.278464542761074 / s.swish_beta;
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = -100000; i <= 100000; ++i) {
    const double x = i * 1e-3;
    const double v = evaluate(s, x);
    ASSERT_TRUE(std::isfinite(v));
    lowest = std::min(lowest, v);
    if (x > s.asg_alpha) {
      ASSERT_LE(std::abs(v), s.asg_scale);
    }
  }
  EXPECT_GE(lowest, swish_min - 1e-12);

  // Unbounded above once the switch point is pushed out of the way.
  ActivationSpec wide = s;
  wide.asg_alpha = 1e6;
  EXPECT_GT(evaluate(wide, 100.0), evaluate(wide, 50.0));
  EXPECT_GT(evaluate(wide, 1000.0), 999.0);

  // Both one-sided limits at the switch are finite; the jump is documented, not forbidden.
  const double left = evaluate(s, s.asg_alpha);
  const double right = evaluate(s, std::nextafter(s.asg_alpha, 1.0));
  EXPECT_TRUE(std::isfinite(left));
  EXPECT_TRUE(std::isfinite(right));
  // Continuous away from the switch.
  for (double x : {-3.0, -0.5, 0.0, 0.1, 0.5, 2.0}) {
    EXPECT_NEAR(evaluate(s, x), evaluate(s, x + 1e-9), 1e-8);
  }
}

TEST(Activations, JsonRoundTrip) {
  const auto j = nlohmann::json::parse(
      R"({"kind": "adapto_swelli_gauss", "alpha": 0.14, "scale": 0.5, "shift": 0.25, "swish_beta": 0.5})");
  const ActivationSpec s = j.get<ActivationSpec>();
  EXPECT_EQ(s, asg());
  EXPECT_EQ(nlohmann::json(s), j);

  ActivationSpec m = ActivationSpec::of(ActivationKind::Maxout);
  m.maxout_pieces = {{2.0, 1.0}};
  EXPECT_EQ(nlohmann::json(m).get<ActivationSpec>(), m);
  for (ActivationKind k : kAllActivationKinds) {
    EXPECT_EQ(nlohmann::json(ActivationSpec::of(k)).get<ActivationSpec>(), ActivationSpec::of(k));
  }
}

TEST(Activations, UnknownKindNamesTheString) {
  try {
    nlohmann::json{{"kind", "softplus"}}.get<ActivationSpec>();
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("softplus"), std::string::npos);
  }
}

TEST(Activations, InvalidHyperparameters) {
  ActivationSpec s = asg();
  s.asg_scale = 0.0;
  EXPECT_THROW(s.validate(), UsageError);
  ActivationSpec m = ActivationSpec::of(ActivationKind::Maxout);
  m.maxout_pieces.clear();
  EXPECT_THROW(m.validate(), UsageError);
  ActivationSpec l = ActivationSpec::of(ActivationKind::LeakyReLU);
  l.leaky_alpha = std::numeric_limits<double>::infinity();
  EXPECT_THROW(l.validate(), UsageError);
}

TEST(Activations, MedianCalibration) {
  const std::vector<double> pre{-2.0, -1.0, 0.5, 3.0, 4.0};
  const ActivationSpec c = calibrate_from_median(asg(), pre);
  EXPECT_EQ(c.asg_alpha, 0.5);
  EXPECT_EQ(c.asg_shift, 0.5);
  EXPECT_EQ(c.swish_beta, 2.0);  // median of |pre| = {0.5, 1, 2, 3, 4}
  EXPECT_EQ(c.asg_scale, 2.0);
  const std::vector<double> even{1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(calibrate_from_median(asg(), even).asg_alpha, 2.5);
  EXPECT_THROW(calibrate_from_median(asg(), std::vector<double>{}), UsageError);
}

}  // namespace
}  // namespace swarmtraj
