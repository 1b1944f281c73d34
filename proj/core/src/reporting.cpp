#include "dda/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "dda/io.hpp"
#include "dda/losses.hpp"

namespace dda {

namespace {

using nlohmann::json;

json method_to_json(const MethodReport& m) {
  return {{"overall_rate", m.overall_rate},
          {"per_cluster_rates", m.per_cluster_rates},
          {"clusters_above_threshold", m.clusters_above_threshold},
          {"rate_variance", m.rate_variance}};
}

}  // namespace

MethodReport method_report(const Eigen::VectorXd& actual, const Eigen::VectorXd& assigned,
                           const std::vector<int>& labels, int k, double threshold) {
  const Eigen::Index m = actual.size();
  if (assigned.size() != m || static_cast<Eigen::Index>(labels.size()) != m) {
    throw std::invalid_argument("method_report: size mismatch");
  }
  if (m == 0 || k < 1) throw std::invalid_argument("method_report: empty input");

  std::vector<long> completed(static_cast<std::size_t>(k), 0);
  std::vector<long> total(static_cast<std::size_t>(k), 0);
  long completed_all = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k) throw std::invalid_argument("method_report: label out of range");
    ++total[static_cast<std::size_t>(c)];
    if (actual[i] >= assigned[i]) {
      ++completed[static_cast<std::size_t>(c)];
      ++completed_all;
    }
  }

  MethodReport report;
  report.overall_rate = static_cast<double>(completed_all) / static_cast<double>(m);
  report.per_cluster_rates.resize(static_cast<std::size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    if (total[idx] == 0) throw std::invalid_argument("method_report: empty cluster");
    report.per_cluster_rates[idx] =
        static_cast<double>(completed[idx]) / static_cast<double>(total[idx]);
    if (report.per_cluster_rates[idx] > threshold) ++report.clusters_above_threshold;
  }

  double mean = 0.0;
  for (const double r : report.per_cluster_rates) mean += r;
  mean /= k;
  for (const double r : report.per_cluster_rates) {
    report.rate_variance += (r - mean) * (r - mean);
  }
  report.rate_variance /= k;
  return report;
}

std::vector<HistogramRow> rate_histogram(const ComparisonReport& report, double bin_width) {
  if (bin_width <= 0.0 || bin_width > 1.0) {
    throw std::invalid_argument("rate_histogram: bin_width must be in (0, 1]");
  }
  const int bins = static_cast<int>(std::ceil(1.0 / bin_width - 1e-12));
  std::vector<HistogramRow> rows(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    rows[static_cast<std::size_t>(b)].bin_low = b * bin_width;
    rows[static_cast<std::size_t>(b)].bin_high = std::min((b + 1) * bin_width, 1.0);
  }
  const auto bin_of = [&](double rate) {
    const int b = static_cast<int>(rate / bin_width);
    return std::clamp(b, 0, bins - 1);
  };
  for (const double r : report.rule_based.per_cluster_rates) {
    ++rows[static_cast<std::size_t>(bin_of(r))].count_rule_based;
  }
  for (const double r : report.dl_dda.per_cluster_rates) {
    ++rows[static_cast<std::size_t>(bin_of(r))].count_dl_dda;
  }
  return rows;
}

std::string comparison_report_to_json(const ComparisonReport& report) {
  json doc;
  doc["format"] = formats::kReport;
  doc["version"] = formats::kVersion;
  doc["band_low"] = report.band_low;
  doc["band_high"] = report.band_high;
  doc["threshold"] = report.threshold;
  doc["k"] = report.k;
  doc["methods"] = {{"dl-dda", method_to_json(report.dl_dda)},
                    {"rule-based", method_to_json(report.rule_based)}};
  return doc.dump(2) + "\n";
}

void write_comparison_report(const std::filesystem::path& path, const ComparisonReport& report) {
  write_text_atomic(path, comparison_report_to_json(report));
}

void write_histogram(const std::filesystem::path& path, const std::vector<HistogramRow>& rows) {
  std::string out = "bin_low,bin_high,count_rule_based,count_dl_dda\n";
  for (const auto& row : rows) {
    out += format_double(row.bin_low);
    out += ',';
    out += format_double(row.bin_high);
    out += ',';
    out += std::to_string(row.count_rule_based);
    out += ',';
    out += std::to_string(row.count_dl_dda);
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_curves(const std::filesystem::path& path, const TrainingTrace& trace) {
  std::string out = "step,phase,ux_loss,completion_abs_err,batch_id,phase_start\n";
  out.reserve(out.size() + trace.steps.size() * 50);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const bool start = i == 0 || trace.steps[i - 1].phase != s.phase;
    out += std::to_string(s.step);
    out += ',';
    out += phase_name(s.phase);
    out += ',';
    out += format_double(s.ux_loss);
    out += ',';
    out += format_double(s.completion_abs_err);
    out += ',';
    out += std::to_string(s.batch_id);
    out += ',';
    out += start ? '1' : '0';
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_convergence_report(const std::filesystem::path& path, const TrainingTrace& trace) {
  json doc;
  doc["format"] = formats::kConvergence;
  doc["version"] = formats::kVersion;
  doc["cycles"] = trace.alternations.size();
  if (trace.alternations.size() < 2) {
    doc["note"] = "fewer than two alternation cycles; no distance series statistics";
  } else {
    const ConvergenceReport report = convergence_check(trace);
    doc["pairs"] = report.pairs;
    doc["nonincreasing_fraction"] = report.nonincreasing_fraction;
    doc["first_distance"] = report.first_distance;
    doc["last_distance"] = report.last_distance;
    doc["last_below_first"] = report.last_below_first;
    json series = json::array();
    for (const auto& a : trace.alternations) series.push_back(a.dist_m_to_c);
    doc["distance_series"] = std::move(series);
  }
  write_text_atomic(path, doc.dump(2) + "\n");
}

}  // namespace dda
