#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dda/optimizer.hpp"

namespace dda {

struct MethodReport {
  double overall_rate = 0.0;
  std::vector<double> per_cluster_rates;
  int clusters_above_threshold = 0;
  double rate_variance = 0.0;  // population variance of per-cluster rates
};

struct ComparisonReport {
  double band_low = 0.08;
  double band_high = 0.10;
  double threshold = 0.16;
  int k = 0;
  MethodReport dl_dda;
  MethodReport rule_based;
};

MethodReport method_report(const Eigen::VectorXd& actual, const Eigen::VectorXd& assigned,
                           const std::vector<int>& labels, int k, double threshold);

struct HistogramRow {
  double bin_low = 0.0;
  double bin_high = 0.0;
  int count_rule_based = 0;
  int count_dl_dda = 0;
};

// Per-cluster completion rate histogram over [0, 1] with fixed-width bins.
std::vector<HistogramRow> rate_histogram(const ComparisonReport& report, double bin_width = 0.02);

std::string comparison_report_to_json(const ComparisonReport& report);
void write_comparison_report(const std::filesystem::path& path, const ComparisonReport& report);
void write_histogram(const std::filesystem::path& path, const std::vector<HistogramRow>& rows);

// Steps table plus a phase_start marker column (1 on the first step of each
// phase run), for loss/constraint curve plots.
void write_curves(const std::filesystem::path& path, const TrainingTrace& trace);

// Summary of the alternation distance series (JSON). With fewer than two
// alternation cycles the document carries a note instead of statistics.
void write_convergence_report(const std::filesystem::path& path, const TrainingTrace& trace);

}  // namespace dda
