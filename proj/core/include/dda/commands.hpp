#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dda/network.hpp"
#include "dda/optimizer.hpp"

namespace dda {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kValidation = 1;
inline constexpr int kRuntime = 2;
inline constexpr int kUnsatisfied = 3;  // training finished with flagged clusters
}  // namespace exit_code

struct GenerateOptions {
  std::string out;
  std::string meta_out;  // optional sidecar
  int players = 20000;
  int features = 40;
  std::string scenario = "heterogeneous-segments";
  int segments = 10;
  double noise_sd = -1.0;  // negative = scenario default
  std::uint64_t seed = 42;
};

struct ClusterOptions {
  std::string data;
  std::string out;
  int k = 10;
  int min_size = 200;
  std::uint64_t seed = 42;
  int max_iter = 100;
  bool plain_init = false;  // disable k-means++ seeding
};

struct TrainOptions {
  std::string data;
  std::string model_dir;
  int k = 10;
  int min_size = 200;
  double alpha = 1.0;
  double target = 0.09;
  double delta = 0.005;
  std::uint64_t seed = 42;
  int hidden_width = 64;
  int hidden_layers = 5;
  std::string activation = "leaky_relu";
  TrainConfig train;
  int threads = 1;
};

struct EvaluateOptions {
  std::string data;
  std::string model_dir;
  std::string report_dir;
  std::string policy;  // empty = frozen default baseline
  double threshold = 0.16;
  double band_low = 0.08;
  double band_high = 0.10;
};

struct ReportOptions {
  std::string trace;          // steps table
  std::string alternations;   // empty = derived from `trace` by convention
  std::string out_dir;
};

// Each command validates, runs and writes its outputs, mapping failures to
// the exit codes above. Progress goes to stdout, errors to stderr.
int cmd_generate(const GenerateOptions& opt);
int cmd_cluster(const ClusterOptions& opt);
int cmd_train(const TrainOptions& opt);
int cmd_evaluate(const EvaluateOptions& opt);
int cmd_report(const ReportOptions& opt);

}  // namespace dda
