#include "dda/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dda {

Eigen::MatrixXd FeatureNormalizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) throw std::invalid_argument("normalizer: column count mismatch");
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (retained[static_cast<std::size_t>(c)]) {
      out.col(c) = (X.col(c).array() - mean[c]) / stddev[c];
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

Eigen::VectorXd FeatureNormalizer::apply_row(const Eigen::VectorXd& row) const {
  if (row.size() != mean.size()) throw std::invalid_argument("normalizer: row length mismatch");
  Eigen::VectorXd out(row.size());
  for (Eigen::Index c = 0; c < row.size(); ++c) {
    out[c] = retained[static_cast<std::size_t>(c)] ? (row[c] - mean[c]) / stddev[c] : 0.0;
  }
  return out;
}

FeatureNormalizer fit_normalizer(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) throw std::invalid_argument("fit_normalizer needs at least 2 rows");
  const double m = static_cast<double>(X.rows());
  FeatureNormalizer n;
  n.mean = X.colwise().mean();
  n.stddev.resize(X.cols());
  n.retained.resize(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (X.col(c).array() - n.mean[c]).square().sum() / m;
    const double sd = std::sqrt(var);
    const bool keep = sd > 0.0;
    n.stddev[c] = keep ? sd : 0.0;
    n.retained[static_cast<std::size_t>(c)] = keep;
  }
  return n;
}

double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const FeatureNormalizer& n) {
  if (a.size() != b.size()) throw std::invalid_argument("similarity: row lengths differ");
  return (n.apply_row(a) - n.apply_row(b)).norm();
}

std::vector<int> ClusterAssignment::cluster_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int label : labels) sizes[static_cast<std::size_t>(label)]++;
  return sizes;
}

void ClusterAssignment::validate(Eigen::Index num_players) const {
  if (static_cast<Eigen::Index>(labels.size()) != num_players) {
    throw std::invalid_argument("assignment length mismatch");
  }
  if (centroids.rows() != k) throw std::invalid_argument("centroid count mismatch");
  for (int label : labels) {
    if (label < 0 || label >= k) throw std::invalid_argument("label outside [0, k)");
  }
}

double wcss(const Eigen::MatrixXd& Xn, const ClusterAssignment& a) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < Xn.rows(); ++i) {
    total += (Xn.row(i) - a.centroids.row(a.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

namespace {

int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (x - centroids.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Eigen::MatrixXd init_centroids_kmeanspp(const Eigen::MatrixXd& Xn, int k, std::mt19937_64& gen) {
  const Eigen::Index m = Xn.rows();
  Eigen::MatrixXd centroids(k, Xn.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, m - 1);
  std::vector<bool> chosen(static_cast<std::size_t>(m), false);
  Eigen::Index c0 = first(gen);
  centroids.row(0) = Xn.row(c0);
  chosen[static_cast<std::size_t>(c0)] = true;

  Eigen::VectorXd min_sq = (Xn.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = min_sq.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(gen);
      for (Eigen::Index i = 0; i < m; ++i) {
        r -= min_sq[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = m - 1;  // guard against accumulated rounding
    } else {
      // All remaining mass is on duplicates of chosen points; take the first
      // index not yet used so k distinct centroid slots still get filled.
      for (Eigen::Index i = 0; i < m; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = 0;
    }
    centroids.row(c) = Xn.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    min_sq = min_sq.cwiseMin((Xn.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

Eigen::MatrixXd init_centroids_random(const Eigen::MatrixXd& Xn, int k, std::mt19937_64& gen) {
  // Fisher-Yates prefix: k distinct rows.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(Xn.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), idx.size() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[pick(gen)]);
  }
  Eigen::MatrixXd centroids(k, Xn.cols());
  for (int i = 0; i < k; ++i) centroids.row(i) = Xn.row(idx[static_cast<std::size_t>(i)]);
  return centroids;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& Xn, int k, std::uint64_t seed, int max_iter,
                         bool kmeanspp) {
  const Eigen::Index m = Xn.rows();
  if (m == 0) throw std::invalid_argument("kmeans: empty input");
  if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
  if (static_cast<Eigen::Index>(k) > m) throw std::invalid_argument("kmeans: k exceeds number of rows");
  if (max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be positive");

  std::mt19937_64 gen(seed);
  ClusterAssignment a;
  a.k = k;
  a.centroids = kmeanspp ? init_centroids_kmeanspp(Xn, k, gen) : init_centroids_random(Xn, k, gen);
  a.labels.assign(static_cast<std::size_t>(m), -1);

  std::vector<int> counts(static_cast<std::size_t>(k));
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      const int c = nearest_centroid(a.centroids, Xn.row(i));
      if (c != a.labels[static_cast<std::size_t>(i)]) {
        a.labels[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, Xn.cols());
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int c = a.labels[static_cast<std::size_t>(i)];
      sums.row(c) += Xn.row(i);
      counts[static_cast<std::size_t>(c)]++;
    }

    bool respawned = false;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        a.centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        // Respawn at the point farthest from its assigned centroid.
        Eigen::Index far_i = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double d =
              (Xn.row(i) - a.centroids.row(a.labels[static_cast<std::size_t>(i)])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        a.centroids.row(c) = Xn.row(far_i);
        respawned = true;
      }
    }

    const double objective = wcss(Xn, a);
    if (!a.wcss_history.empty()) {
      // Lloyd steps cannot increase the objective; tiny slack for rounding.
      assert(objective <= a.wcss_history.back() * (1.0 + 1e-9) + 1e-12);
    }
    a.wcss_history.push_back(objective);

    if (!changed && !respawned) break;
  }
  return a;
}

ClusterAssignment enforce_min_size(const ClusterAssignment& a, const Eigen::MatrixXd& Xn,
                                   int min_size) {
  const Eigen::Index m = Xn.rows();
  if (min_size < 1) throw std::invalid_argument("enforce_min_size: min_size must be positive");
  if (static_cast<Eigen::Index>(min_size) > m) {
    throw std::invalid_argument("enforce_min_size: min_size exceeds number of players");
  }
  a.validate(m);

  std::vector<int> labels = a.labels;
  std::vector<bool> alive(static_cast<std::size_t>(a.k), true);

  for (;;) {
    std::vector<int> sizes(static_cast<std::size_t>(a.k), 0);
    for (int label : labels) sizes[static_cast<std::size_t>(label)]++;

    int victim = -1;
    int alive_count = 0;
    for (int c = 0; c < a.k; ++c) {
      if (!alive[static_cast<std::size_t>(c)]) continue;
      alive_count++;
      if (sizes[static_cast<std::size_t>(c)] < min_size &&
          (victim < 0 || sizes[static_cast<std::size_t>(c)] < sizes[static_cast<std::size_t>(victim)])) {
        victim = c;
      }
    }
    if (victim < 0 || alive_count <= 1) break;

    alive[static_cast<std::size_t>(victim)] = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (labels[static_cast<std::size_t>(i)] != victim) continue;
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < a.k; ++c) {
        if (!alive[static_cast<std::size_t>(c)]) continue;
        const double d = (Xn.row(i) - a.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[static_cast<std::size_t>(i)] = best;
    }
  }

  // Re-pack surviving clusters in ascending original id order.
  std::vector<int> remap(static_cast<std::size_t>(a.k), -1);
  int next = 0;
  for (int c = 0; c < a.k; ++c) {
    if (alive[static_cast<std::size_t>(c)]) remap[static_cast<std::size_t>(c)] = next++;
  }

  ClusterAssignment out;
  out.k = next;
  out.centroids.resize(next, Xn.cols());
  for (int c = 0; c < a.k; ++c) {
    if (alive[static_cast<std::size_t>(c)]) {
      out.centroids.row(remap[static_cast<std::size_t>(c)]) = a.centroids.row(c);
    }
  }
  out.labels.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.labels[i] = remap[static_cast<std::size_t>(labels[i])];
  }
  return out;
}

}  // namespace dda
