#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "physfac/factorize.hpp"
#include "physfac/metrics.hpp"

namespace physfac::cli {

using Json = nlohmann::json;

/// {metric: {avg, se}} for MAE, RMSE, MAPE, Corr (null when undefined), SNR, MACC.
Json metrics_json(const MetricsReport& report, RateKind kind, double fs);

/// Plain table with an Avg/SE column pair per metric.
std::string metrics_table(const MetricsReport& report, RateKind kind);

Json factorization_json(const FactorizationResult& result, const Matrix& input);

/// Canonical text form: two-space indent, sorted keys, trailing newline.
std::string dump_report(const Json& j);

}  // namespace physfac::cli
