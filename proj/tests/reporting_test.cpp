#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "dda/io.hpp"
#include "dda/reporting.hpp"

using namespace dda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "dda_reporting_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("method_report computes per-cluster and overall rates") {
  Eigen::VectorXd actual(6), assigned(6);
  actual << 5, 5, 5, 1, 1, 1;
  assigned << 4, 6, 5, 2, 2, 1;  // cluster 0: complete, miss, tie; cluster 1: miss, miss, tie
  const std::vector<int> labels{0, 0, 0, 1, 1, 1};

  const MethodReport r = method_report(actual, assigned, labels, 2, 0.5);
  CHECK(r.overall_rate == doctest::Approx(0.5));
  REQUIRE(r.per_cluster_rates.size() == 2);
  CHECK(r.per_cluster_rates[0] == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_cluster_rates[1] == doctest::Approx(1.0 / 3.0));
  CHECK(r.clusters_above_threshold == 1);  // only 2/3 > 0.5

  const double mean = 0.5;
  const double expect_var = ((2.0 / 3.0 - mean) * (2.0 / 3.0 - mean) +
                             (1.0 / 3.0 - mean) * (1.0 / 3.0 - mean)) /
                            2.0;
  CHECK(r.rate_variance == doctest::Approx(expect_var));
}

TEST_CASE("method_report validates its inputs") {
  Eigen::VectorXd a(2), b(3);
  a << 1, 2;
  b << 1, 2, 3;
  CHECK_THROWS_AS(method_report(a, b, {0, 0}, 1, 0.16), std::invalid_argument);
  CHECK_THROWS_AS(method_report(a, a, {0}, 1, 0.16), std::invalid_argument);
  CHECK_THROWS_AS(method_report(a, a, {0, 2}, 2, 0.16), std::invalid_argument);
  CHECK_THROWS_AS(method_report(a, a, {0, 0}, 2, 0.16), std::invalid_argument);  // empty cluster 1
}

TEST_CASE("histogram bins cover [0,1] and count every cluster once") {
  ComparisonReport rep;
  rep.k = 5;
  rep.dl_dda.per_cluster_rates = {0.0, 0.019, 0.02, 0.5, 1.0};
  rep.rule_based.per_cluster_rates = {0.01, 0.03, 0.999, 1.0, 1.0};

  const std::vector<HistogramRow> rows = rate_histogram(rep, 0.02);
  REQUIRE(rows.size() == 50);
  CHECK(rows.front().bin_low == 0.0);
  CHECK(rows.front().bin_high == doctest::Approx(0.02));
  CHECK(rows.back().bin_high == doctest::Approx(1.0));

  int dl = 0;
  int rb = 0;
  for (const auto& row : rows) {
    dl += row.count_dl_dda;
    rb += row.count_rule_based;
  }
  CHECK(dl == 5);
  CHECK(rb == 5);

  // Half-open bins except the last, which is closed at 1.0.
  CHECK(rows[0].count_dl_dda == 2);  // 0.0 and 0.019
  CHECK(rows[1].count_dl_dda == 1);  // 0.02
  CHECK(rows.back().count_dl_dda == 1);
  CHECK(rows.back().count_rule_based == 3);  // 0.999 and both 1.0
  CHECK(rows[0].count_rule_based == 1);      // 0.01
  CHECK(rows[1].count_rule_based == 1);      // 0.03
}

TEST_CASE("comparison report JSON carries both methods") {
  ComparisonReport rep;
  rep.k = 2;
  rep.dl_dda.overall_rate = 0.09;
  rep.dl_dda.per_cluster_rates = {0.08, 0.10};
  rep.rule_based.overall_rate = 0.12;
  rep.rule_based.per_cluster_rates = {0.02, 0.22};
  rep.rule_based.clusters_above_threshold = 1;

  const std::string text = comparison_report_to_json(rep);
  CHECK(text.find("\"dl-dda\"") != std::string::npos);
  CHECK(text.find("\"rule-based\"") != std::string::npos);
  CHECK(text.find("dda.report") != std::string::npos);
  CHECK(text.find("band_low") != std::string::npos);

  const fs::path dir = scratch("report");
  write_comparison_report(dir / "report.json", rep);
  CHECK(read_text(dir / "report.json") == text);
}

TEST_CASE("histogram file format") {
  const fs::path dir = scratch("histogram");
  ComparisonReport rep;
  rep.k = 1;
  rep.dl_dda.per_cluster_rates = {0.09};
  rep.rule_based.per_cluster_rates = {0.12};
  write_histogram(dir / "h.csv", rate_histogram(rep, 0.5));
  const std::string text = read_text(dir / "h.csv");
  CHECK(text.rfind("bin_low,bin_high,count_rule_based,count_dl_dda\n", 0) == 0);
  CHECK(text == "bin_low,bin_high,count_rule_based,count_dl_dda\n0,0.5,1,1\n0.5,1,0,0\n");
}

TEST_CASE("curves mark the first step of each phase run") {
  TrainingTrace t;
  t.steps.push_back({0, Phase::Ux, 2.0, std::nan(""), 0});
  t.steps.push_back({1, Phase::Ux, 1.8, std::nan(""), 1});
  t.steps.push_back({2, Phase::Projection, 1.9, 0.1, -1});
  t.steps.push_back({3, Phase::Projection, 1.85, 0.01, -1});
  t.steps.push_back({4, Phase::Ux, 1.7, std::nan(""), 0});

  const fs::path dir = scratch("curves");
  write_curves(dir / "curves.csv", t);
  const std::string text = read_text(dir / "curves.csv");
  CHECK(text.rfind("step,phase,ux_loss,completion_abs_err,batch_id,phase_start\n", 0) == 0);

  std::vector<int> markers;
  std::size_t pos = text.find('\n') + 1;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    markers.push_back(line.back() - '0');
    pos = end + 1;
  }
  CHECK(markers == std::vector<int>{1, 0, 1, 0, 1});
}

TEST_CASE("convergence report downgrades gracefully") {
  const fs::path dir = scratch("convergence");

  TrainingTrace shallow;
  shallow.alternations.push_back({0, 1.0, 0.5});
  write_convergence_report(dir / "one.json", shallow);
  const std::string one = read_text(dir / "one.json");
  CHECK(one.find("note") != std::string::npos);
  CHECK(one.find("dda.convergence") != std::string::npos);

  TrainingTrace deep;
  deep.alternations.push_back({0, 2.0, 1.0});
  deep.alternations.push_back({1, 0.5, 0.25});
  write_convergence_report(dir / "two.json", deep);
  const std::string two = read_text(dir / "two.json");
  CHECK(two.find("nonincreasing_fraction") != std::string::npos);
  CHECK(two.find("distance_series") != std::string::npos);
  CHECK(two.find("last_below_first") != std::string::npos);
}
