#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace swarmtraj {

/// The five trajectory error measures. Percentages are in percent units.
struct MetricResult {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;
  double smape = 0.0;
  // Set when some actual value was zero; those terms are left out of MAPE.
  bool mape_undefined = false;
  std::size_t mape_skipped = 0;
  // SMAPE terms with both values zero count as 0 and never set this flag; it
  // only propagates from aggregated inputs.
  bool smape_undefined = false;

  bool operator==(const MetricResult&) const = default;
};

/// Throws UsageError on empty or mismatched inputs, DomainError on non-finite values.
MetricResult compute_all(std::span<const double> actual, std::span<const double> predicted);

/// Unweighted mean of each field over the samples; flags OR together and
/// skipped counts add up.
MetricResult aggregate(std::span<const MetricResult> per_sample);

void to_json(nlohmann::json& j, const MetricResult& m);
void from_json(const nlohmann::json& j, MetricResult& m);

/// Header line matching `metrics_csv_row`.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricResult& m);

/// Shortest representation that round-trips a double.
std::string format_double(double v);

}  // namespace swarmtraj
