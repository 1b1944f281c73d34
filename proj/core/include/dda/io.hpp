#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dda/clustering.hpp"
#include "dda/network.hpp"
#include "dda/optimizer.hpp"
#include "dda/synthetic.hpp"

namespace dda {

/// Raised on malformed files and on format/version tags that do not match.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace formats {
inline constexpr int kVersion = 1;
inline constexpr const char* kDataset = "dda.dataset";
inline constexpr const char* kDatasetMeta = "dda.dataset-meta";
inline constexpr const char* kWeights = "dda.weights";
inline constexpr const char* kAssignment = "dda.assignment";
inline constexpr const char* kNormalizer = "dda.normalizer";
inline constexpr const char* kPolicy = "dda.policy";
inline constexpr const char* kManifest = "dda.manifest";
inline constexpr const char* kReport = "dda.report";
inline constexpr const char* kConvergence = "dda.convergence";
}  // namespace formats

// Shortest decimal form that parses back to the identical double ("%.17g"
// trimmed), used by every delimited text format.
std::string format_double(double v);

// Write-temp-then-rename so readers never observe partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

// FNV-1a 64-bit, used to tie manifests to the artifacts they describe.
std::uint64_t fnv1a64(const std::string& bytes);

// --- dataset: header `player_id,f0..f{Z-1},difficulty`, one row per player ---

void write_dataset(const std::filesystem::path& path, const Eigen::MatrixXd& X,
                   const Eigen::VectorXd& D);

struct LoadedDataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd difficulty;
};

LoadedDataset read_dataset(const std::filesystem::path& path);

// Sidecar with scenario, seed and ground-truth parameters.
void write_dataset_meta(const std::filesystem::path& path, const PlayerDataset& ds);

// --- structured documents (JSON) ---

void save_weights(const std::filesystem::path& path, const NetworkWeights& w);
NetworkWeights load_weights(const std::filesystem::path& path);

std::string normalizer_to_string(const FeatureNormalizer& n);
void save_normalizer(const std::filesystem::path& path, const FeatureNormalizer& n);
FeatureNormalizer load_normalizer(const std::filesystem::path& path);

// Assignment document embeds the normalizer so the clusters file is
// self-describing.
void save_assignment(const std::filesystem::path& path, const ClusterAssignment& a,
                     const FeatureNormalizer& n);
struct LoadedAssignment {
  ClusterAssignment assignment;
  FeatureNormalizer normalizer;
};
LoadedAssignment load_assignment(const std::filesystem::path& path);

void save_policy(const std::filesystem::path& path, const RuleBasedPolicy& p);
RuleBasedPolicy load_policy(const std::filesystem::path& path);

// --- trace tables ---
// steps:        step,phase,ux_loss,completion_abs_err,batch_id
// alternations: cycle,dist_M_to_C,dist_M_to_nextC

void write_trace_steps(const std::filesystem::path& path, const TrainingTrace& trace);
void write_trace_alternations(const std::filesystem::path& path, const TrainingTrace& trace);
TrainingTrace read_trace(const std::filesystem::path& steps_path,
                         const std::filesystem::path& alternations_path);

}  // namespace dda
