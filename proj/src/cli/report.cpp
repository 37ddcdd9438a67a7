#include "physfac/cli/report.hpp"

#include <cstdio>
#include <sstream>

namespace physfac::cli {

namespace {

Json stat_json(const MetricStat& s) { return Json{{"avg", s.avg}, {"se", s.se}}; }

}  // namespace

Json metrics_json(const MetricsReport& report, RateKind kind, double fs) {
  Json metrics;
  metrics["MAE"] = stat_json(report.errors.mae);
  metrics["RMSE"] = stat_json(report.errors.rmse);
  metrics["MAPE"] = stat_json(report.errors.mape);
  metrics["Corr"] = report.errors.corr ? stat_json(*report.errors.corr) : Json(nullptr);
  metrics["SNR"] = stat_json(report.snr);
  metrics["MACC"] = stat_json(report.macc);

  Json j;
  j["kind"] = std::string(to_string(kind));
  j["fs"] = fs;
  j["n"] = report.n;
  j["metrics"] = std::move(metrics);
  j["rates"] = Json{{"pred", report.pred_rates}, {"gt", report.gt_rates}};
  return j;
}

std::string metrics_table(const MetricsReport& report, RateKind kind) {
  const char* names[] = {"MAE", "RMSE", "MAPE", "Corr", "SNR", "MACC"};
  const std::optional<MetricStat> stats[] = {report.errors.mae, report.errors.rmse,
                                             report.errors.mape, report.errors.corr,
                                             report.snr, report.macc};
  std::ostringstream o;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-6s", "");
  o << buf;
  for (const char* n : names) {
    std::snprintf(buf, sizeof buf, " %-17s", n);
    o << buf;
  }
  o << "\n";
  std::snprintf(buf, sizeof buf, "%-6s", "");
  o << buf;
  for (std::size_t i = 0; i < 6; ++i) {
    std::snprintf(buf, sizeof buf, " %8s %8s", "Avg", "SE");
    o << buf;
  }
  o << "\n";
  std::snprintf(buf, sizeof buf, "%-6s", kind == RateKind::hr ? "HR" : "RR");
  o << buf;
  for (const auto& s : stats) {
    if (s) {
      std::snprintf(buf, sizeof buf, " %8.3f %8.3f", s->avg, s->se);
    } else {
      std::snprintf(buf, sizeof buf, " %8s %8s", "n/a", "n/a");
    }
    o << buf;
  }
  o << "\n(n = " << report.n << " windows)\n";
  return o.str();
}

Json factorization_json(const FactorizationResult& result, const Matrix& input) {
  const double vnorm = input.norm();
  const double last = result.error_trace.empty() ? 0.0 : result.error_trace.back();
  Json j;
  j["shape"] = {input.rows(), input.cols()};
  j["rank"] = result.factors.rank;
  j["iterations"] = result.iterations;
  j["seed"] = result.seed;
  j["error_trace"] = result.error_trace;
  j["relative_error"] = vnorm > 0.0 ? last / vnorm : 0.0;
  return j;
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace physfac::cli
