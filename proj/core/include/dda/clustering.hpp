#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace dda {

/// Column-wise z-score parameters fitted on a feature matrix. Zero-variance
/// columns are recorded and map to 0 when applied.
struct FeatureNormalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;        // population sd; 0 marks a dropped column
  std::vector<bool> retained;    // per column, stddev > 0

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd apply_row(const Eigen::VectorXd& row) const;
  Eigen::Index dim() const { return mean.size(); }
};

// Requires at least 2 rows.
FeatureNormalizer fit_normalizer(const Eigen::MatrixXd& X);

// Euclidean distance between the normalized rows; smaller = more similar.
double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const FeatureNormalizer& n);

/// Partition of players into k clusters over normalized features.
struct ClusterAssignment {
  std::vector<int> labels;    // one label in [0, k) per player
  Eigen::MatrixXd centroids;  // k x Z, normalized feature space
  int k = 0;

  // Total objective and per-iteration history from the Lloyd run that
  // produced this assignment (empty after enforce_min_size).
  std::vector<double> wcss_history;

  std::vector<int> cluster_sizes() const;
  void validate(Eigen::Index num_players) const;
};

// Lloyd iterations to local convergence or max_iter. Deterministic per seed.
// k-means++ seeding by default; plain random pick when kmeanspp = false.
// Empty clusters respawn at the point farthest from its assigned centroid.
ClusterAssignment kmeans(const Eigen::MatrixXd& Xn, int k, std::uint64_t seed,
                         int max_iter = 100, bool kmeanspp = true);

// Within-cluster sum of squares for an assignment over Xn.
double wcss(const Eigen::MatrixXd& Xn, const ClusterAssignment& a);

// Repeatedly dissolves the smallest cluster below min_size, reassigning its
// members to the nearest surviving centroid, until all surviving clusters
// meet min_size. Surviving centroids keep their positions; labels are
// re-packed to [0, k'). At least one cluster always survives.
ClusterAssignment enforce_min_size(const ClusterAssignment& a, const Eigen::MatrixXd& Xn,
                                   int min_size);

}  // namespace dda
