#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dda/clustering.hpp"
#include "dda/losses.hpp"
#include "dda/network.hpp"

namespace dda {

struct TrainConfig {
  double eta_ux = 1e-2;    // learning rate for the UX training phase
  double eta_proj = 5e-3;  // learning rate for the projection phase
  int batch_size = 512;    // clamped to M at use sites
  int max_epochs_ux = 300;
  int max_iter_proj = 300;
  int max_alternations = 20;
  double ux_plateau_tol = 1e-4;  // relative epoch-mean improvement threshold
  int ux_plateau_patience = 5;   // epochs below threshold before stopping
  double alt_distance_tol = 1e-3;
  bool proj_step_decay = true;  // scale eta_proj by the latest alternation distance
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Phase { Ux, Projection };

std::string phase_name(Phase p);
Phase parse_phase(const std::string& name);

struct StepRecord {
  long step = 0;
  Phase phase = Phase::Ux;
  double ux_loss = 0.0;
  double completion_abs_err = 0.0;  // |achieved - target|; NaN when no target known
  long batch_id = 0;                // minibatch index within epoch; -1 = full batch
};

// Snapshot distances for one alternation cycle i:
//   dist_m_to_c     = || Theta_i^M - Theta_i^C ||      (UX training displacement)
//   dist_m_to_next_c = || Theta_i^M - Theta_{i+1}^C || (projection displacement)
struct AlternationRecord {
  int cycle = 0;
  double dist_m_to_c = 0.0;
  double dist_m_to_next_c = 0.0;
};

struct TrainingTrace {
  std::vector<StepRecord> steps;
  std::vector<AlternationRecord> alternations;

  long next_step = 0;

  // Phases of consecutive steps form alternating runs.
  bool phases_alternate() const;
};

/// Thrown by train_ux when the loss turns non-finite. alternate() reacts by
/// halving eta_ux and retrying the cycle once.
class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

// Minibatch SGD on the UX loss (variance term taken over the minibatch).
// Stops on an epoch-mean plateau or the epoch budget and returns the best
// epoch-end weights seen. `spec` is only used to annotate the trace; pass
// nullptr to record NaN completion errors.
NetworkWeights train_ux(const NetworkWeights& w, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& D, double alpha, const TrainConfig& cfg,
                        TrainingTrace* trace, const CompletionSpec* spec = nullptr);

struct ProjectionResult {
  NetworkWeights weights;
  bool satisfied = false;
  double completion_abs_err = 0.0;
  int iterations = 0;  // SGD steps taken; 0 when the entry weights already satisfy
};

// Full-batch descent on the projection surrogate until |achieved - target|
// <= tolerance or the iteration budget runs out, in which case the
// best-so-far weights are returned with satisfied = false.
// `eta_override` replaces cfg.eta_proj when positive (used by the
// alternation-level step decay). `alpha_for_trace` only annotates the trace.
ProjectionResult project_completion(const NetworkWeights& w, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& D, const CompletionSpec& spec,
                                    const TrainConfig& cfg, TrainingTrace* trace,
                                    double alpha_for_trace = 1.0, double eta_override = -1.0);

struct AlternateResult {
  NetworkWeights weights;  // post-projection weights of the last cycle
  bool satisfied = false;
  int cycles = 0;
};

// Repeats [train_ux -> snapshot -> project_completion -> snapshot], recording
// the two weight distances per cycle. Stops when the projection takes no
// steps, when the cycle distance stabilizes within alt_distance_tol, or at
// max_alternations.
AlternateResult alternate(const NetworkWeights& w, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& D, double alpha, const CompletionSpec& spec,
                          const TrainConfig& cfg, TrainingTrace& trace);

struct ClusterRunResult {
  int cluster = 0;
  std::vector<Eigen::Index> rows;  // player indices of this cluster
  NetworkWeights weights;
  Eigen::VectorXd required;  // model outputs for the cluster's players
  bool satisfied = false;
  double achieved_rate = 0.0;
  int cycles = 0;
  TrainingTrace trace;
};

struct FullSystemResult {
  FeatureNormalizer normalizer;
  ClusterAssignment assignment;
  std::vector<ClusterRunResult> clusters;

  // Per-player required difficulties stitched back into dataset order.
  Eigen::VectorXd required_by_player() const;
  bool all_satisfied() const;
};

// Normalize -> kmeans -> enforce_min_size -> per cluster: xavier_init +
// alternate + forward. Per-cluster work is independent; `threads` > 1 runs
// clusters in parallel without affecting results.
FullSystemResult run_full_system(const Eigen::MatrixXd& X, const Eigen::VectorXd& D,
                                 const NetworkArchitecture& arch, int k, int min_size,
                                 double alpha, const CompletionSpec& spec,
                                 const TrainConfig& cfg, int threads = 1);

struct ConvergenceReport {
  int pairs = 0;                       // consecutive pairs examined
  double nonincreasing_fraction = 0.0; // within relative slack 1e-3
  double first_distance = 0.0;
  double last_distance = 0.0;
  bool last_below_first = false;
};

// Diagnostics over the per-cycle training travel: for each alternation, the
// distance from the weights the cycle started at (the previous repaired
// snapshot, or the initialization) to the loss minimum it reached. A shrinking
// series means each repair lands closer to the next minimum.
// Requires at least 2 alternation records.
ConvergenceReport convergence_check(const TrainingTrace& trace);

}  // namespace dda
