#include "swarmtraj/metrics.hpp"

#include <charconv>
#include <cmath>

#include "swarmtraj/errors.hpp"

namespace swarmtraj {

MetricResult compute_all(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.empty()) throw UsageError("metrics need at least one value");
  if (actual.size() != predicted.size()) {
    throw UsageError("metrics need equal lengths, got " + std::to_string(actual.size()) + " and " +
                     std::to_string(predicted.size()));
  }
  const auto n = static_cast<double>(actual.size());
  double sq = 0.0, abs_sum = 0.0, ape_sum = 0.0, sape_sum = 0.0;
  std::size_t ape_terms = 0;
  MetricResult m;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double y = actual[i];
    const double yhat = predicted[i];
    if (!std::isfinite(y) || !std::isfinite(yhat)) {
      throw DomainError("metric input is not finite at index " + std::to_string(i), i);
    }
    const double diff = y - yhat;
    sq += diff * diff;
    abs_sum += std::abs(diff);
    if (y == 0.0) {
      ++m.mape_skipped;
    } else {
      ape_sum += std::abs(diff / y);
      ++ape_terms;
    }
    const double denom = std::abs(y) + std::abs(yhat);
    if (denom > 0.0) sape_sum += 2.0 * std::abs(diff) / denom;
  }
  m.mse = sq / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = abs_sum / n;
  m.mape_undefined = m.mape_skipped > 0;
  m.mape = ape_terms > 0 ? 100.0 * ape_sum / static_cast<double>(ape_terms) : 0.0;
  m.smape = 100.0 * sape_sum / n;
  return m;
}

MetricResult aggregate(std::span<const MetricResult> per_sample) {
  if (per_sample.empty()) throw UsageError("cannot aggregate an empty list of metrics");
  MetricResult out;
  for (const auto& m : per_sample) {
    out.mse += m.mse;
    out.mae += m.mae;
    out.mape += m.mape;
    out.smape += m.smape;
    out.mape_undefined = out.mape_undefined || m.mape_undefined;
    out.smape_undefined = out.smape_undefined || m.smape_undefined;
    out.mape_skipped += m.mape_skipped;
  }
  const auto n = static_cast<double>(per_sample.size());
  out.mse /= n;
  out.mae /= n;
  out.mape /= n;
  out.smape /= n;
  out.rmse = std::sqrt(out.mse);
  return out;
}

void to_json(nlohmann::json& j, const MetricResult& m) {
  j = nlohmann::json{{"mse", m.mse},
                     {"rmse", m.rmse},
                     {"mae", m.mae},
                     {"mape", m.mape},
                     {"smape", m.smape},
                     {"mape_undefined", m.mape_undefined},
                     {"mape_skipped", m.mape_skipped},
                     {"smape_undefined", m.smape_undefined}};
}

void from_json(const nlohmann::json& j, MetricResult& m) {
  m.mse = j.at("mse").get<double>();
  m.rmse = j.at("rmse").get<double>();
  m.mae = j.at("mae").get<double>();
  m.mape = j.at("mape").get<double>();
  m.smape = j.at("smape").get<double>();
  m.mape_undefined = j.value("mape_undefined", false);
  m.mape_skipped = j.value("mape_skipped", std::size_t{0});
  m.smape_undefined = j.value("smape_undefined", false);
}

std::string metrics_csv_header() { return "mse,rmse,mae,mape,smape,mape_undefined,smape_undefined"; }

std::string metrics_csv_row(const MetricResult& m) {
  return format_double(m.mse) + ',' + format_double(m.rmse) + ',' + format_double(m.mae) + ',' +
         format_double(m.mape) + ',' + format_double(m.smape) + ',' +
         (m.mape_undefined ? "1" : "0") + ',' + (m.smape_undefined ? "1" : "0");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace swarmtraj
