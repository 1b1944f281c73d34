#include "dda/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "dda/rng.hpp"

namespace dda {

void TrainConfig::validate() const {
  // eta = 0 is a legal no-op (weights stay put); only negative rates are rejected.
  if (eta_ux < 0.0 || eta_proj < 0.0) throw std::invalid_argument("learning rates must be nonnegative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (max_epochs_ux < 1 || max_iter_proj < 1 || max_alternations < 1) {
    throw std::invalid_argument("iteration budgets must be positive");
  }
  if (ux_plateau_tol <= 0.0) throw std::invalid_argument("ux_plateau_tol must be positive");
  if (ux_plateau_patience < 1) throw std::invalid_argument("ux_plateau_patience must be positive");
  if (alt_distance_tol <= 0.0) throw std::invalid_argument("alt_distance_tol must be positive");
}

std::string phase_name(Phase p) {
  return p == Phase::Ux ? "ux" : "projection";
}

Phase parse_phase(const std::string& name) {
  if (name == "ux") return Phase::Ux;
  if (name == "projection") return Phase::Projection;
  throw std::invalid_argument("unknown phase: " + name);
}

bool TrainingTrace::phases_alternate() const {
  if (steps.empty()) return true;
  if (steps.front().phase != Phase::Ux) return false;
  std::size_t runs = 1;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].phase != steps[i - 1].phase) ++runs;
  }
  // Each alternation cycle contributes one run of UX steps followed by one
  // run of projection steps.
  if (!alternations.empty() && runs != 2 * alternations.size()) return false;
  return true;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take_entries(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

}  // namespace

NetworkWeights train_ux(const NetworkWeights& w0, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& D, double alpha, const TrainConfig& cfg,
                        TrainingTrace* trace, const CompletionSpec* spec) {
  cfg.validate();
  w0.validate();
  if (X.rows() != D.size()) throw std::invalid_argument("train_ux: feature/difficulty size mismatch");
  const Eigen::Index m = X.rows();
  if (m < 2) throw std::invalid_argument("train_ux: needs at least 2 players");
  if (alpha < 0.0) throw std::invalid_argument("train_ux: alpha must be nonnegative");

  const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, m);
  const UxLossConfig loss_cfg{alpha};
  std::mt19937_64 gen(splitmix64(cfg.seed));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  NetworkWeights w = w0;
  NetworkWeights best = w0;
  double best_epoch_mean = std::numeric_limits<double>::infinity();
  double prev_epoch_mean = std::numeric_limits<double>::infinity();
  int plateau_streak = 0;

  std::vector<Eigen::Index> batch_rows;
  for (int epoch = 0; epoch < cfg.max_epochs_ux; ++epoch) {
    std::shuffle(order.begin(), order.end(), gen);

    double loss_sum = 0.0;
    long num_batches = 0;
    for (Eigen::Index start = 0; start + batch <= m; start += batch) {
      batch_rows.assign(order.begin() + start, order.begin() + start + batch);
      const Eigen::MatrixXd Xb = take_rows(X, batch_rows);
      const Eigen::VectorXd Db = take_entries(D, batch_rows);

      const auto cache = detail::forward_cached(w, Xb);
      if (!cache.output.allFinite()) {
        throw TrainingDiverged("network outputs became non-finite at epoch " +
                               std::to_string(epoch));
      }
      const DifficultyPair pair{Db, cache.output};
      const double loss = ux_loss(pair, loss_cfg);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("ux loss became non-finite at epoch " + std::to_string(epoch));
      }
      loss_sum += loss;
      ++num_batches;

      if (trace) {
        double abs_err = std::numeric_limits<double>::quiet_NaN();
        if (spec) abs_err = std::abs(achieved_completion_rate(pair) - spec->target);
        trace->steps.push_back({trace->next_step++, Phase::Ux, loss, abs_err,
                                static_cast<long>(start / batch)});
      }

      const auto grads = detail::backward_cached(w, cache, ux_loss_output_grad(pair, loss_cfg));
      w = sgd_step(w, grads, cfg.eta_ux);
    }

    const double epoch_mean = loss_sum / static_cast<double>(num_batches);
    if (epoch_mean < best_epoch_mean) {
      best_epoch_mean = epoch_mean;
      best = w;
    }

    if (epoch > 0) {
      const double improvement =
          (prev_epoch_mean - epoch_mean) / std::max(std::abs(prev_epoch_mean), 1e-12);
      plateau_streak = improvement < cfg.ux_plateau_tol ? plateau_streak + 1 : 0;
      if (plateau_streak >= cfg.ux_plateau_patience) break;
    }
    prev_epoch_mean = epoch_mean;
  }
  return best;
}

ProjectionResult project_completion(const NetworkWeights& w0, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& D, const CompletionSpec& spec,
                                    const TrainConfig& cfg, TrainingTrace* trace,
                                    double alpha_for_trace, double eta_override) {
  cfg.validate();
  spec.validate();
  w0.validate();
  if (X.rows() != D.size()) {
    throw std::invalid_argument("project_completion: feature/difficulty size mismatch");
  }
  const Eigen::Index m = X.rows();
  if (m < 1) throw std::invalid_argument("project_completion: empty input");

  const double eta = eta_override > 0.0 ? eta_override : cfg.eta_proj;
  const UxLossConfig trace_loss_cfg{alpha_for_trace};

  NetworkWeights w = w0;
  NetworkWeights best = w0;
  double best_err = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= cfg.max_iter_proj; ++iter) {
    const auto cache = detail::forward_cached(w, X);
    if (!cache.output.allFinite()) {
      throw TrainingDiverged("network outputs became non-finite at projection step " +
                             std::to_string(iter));
    }
    const DifficultyPair pair{D, cache.output};
    const double abs_err = std::abs(achieved_completion_rate(pair) - spec.target);

    if (trace) {
      trace->steps.push_back(
          {trace->next_step++, Phase::Projection, ux_loss(pair, trace_loss_cfg), abs_err, -1});
    }

    const ProjectionError err = projection_error(pair, spec);
    if (err.satisfied) {
      return {w, true, abs_err, iter};
    }
    if (abs_err < best_err) {
      best_err = abs_err;
      best = w;
    }
    if (iter == cfg.max_iter_proj) break;

    const auto grads = detail::backward_cached(w, cache, err.output_grad(m));
    w = sgd_step(w, grads, eta);
  }
  return {best, false, best_err, cfg.max_iter_proj};
}

AlternateResult alternate(const NetworkWeights& w0, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& D, double alpha, const CompletionSpec& spec,
                          const TrainConfig& cfg, TrainingTrace& trace) {
  cfg.validate();
  spec.validate();

  NetworkWeights theta_c = w0;
  AlternateResult result{w0, false, 0};
  double first_exit_dist = -1.0;
  double prev_exit_dist = -1.0;
  double prev_entry_dist = -1.0;

  for (int cycle = 0; cycle < cfg.max_alternations; ++cycle) {
    TrainConfig cycle_cfg = cfg;
    cycle_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(cycle));

    NetworkWeights theta_m;
    try {
      theta_m = train_ux(theta_c, X, D, alpha, cycle_cfg, &trace, &spec);
    } catch (const TrainingDiverged&) {
      cycle_cfg.eta_ux *= 0.5;
      theta_m = train_ux(theta_c, X, D, alpha, cycle_cfg, &trace, &spec);
    }
    const double dist_entry = weight_distance(theta_m, theta_c);

    double eta_override = -1.0;
    if (cfg.proj_step_decay && first_exit_dist > 0.0) {
      const double ratio = std::clamp(prev_exit_dist / first_exit_dist, 0.05, 1.0);
      eta_override = cfg.eta_proj * ratio;
    }
    const ProjectionResult proj =
        project_completion(theta_m, X, D, spec, cfg, &trace, alpha, eta_override);
    const double dist_exit = weight_distance(theta_m, proj.weights);

    trace.alternations.push_back({cycle, dist_entry, dist_exit});
    theta_c = proj.weights;
    result.weights = theta_c;
    result.satisfied = proj.satisfied;
    result.cycles = cycle + 1;

    if (first_exit_dist < 0.0) first_exit_dist = dist_exit;
    prev_exit_dist = dist_exit;

    // UX minimum already satisfies the constraint: the alternation is a
    // fixed point.
    if (proj.satisfied && proj.iterations == 0) break;

    if (prev_entry_dist >= 0.0) {
      const double change = std::abs(dist_entry - prev_entry_dist);
      if (change <= cfg.alt_distance_tol * std::max(prev_entry_dist, 1e-12)) break;
    }
    prev_entry_dist = dist_entry;
  }
  return result;
}

Eigen::VectorXd FullSystemResult::required_by_player() const {
  Eigen::Index total = 0;
  for (const auto& c : clusters) total += static_cast<Eigen::Index>(c.rows.size());
  Eigen::VectorXd out(total);
  for (const auto& c : clusters) {
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
      out[c.rows[i]] = c.required[static_cast<Eigen::Index>(i)];
    }
  }
  return out;
}

bool FullSystemResult::all_satisfied() const {
  return std::all_of(clusters.begin(), clusters.end(),
                     [](const ClusterRunResult& c) { return c.satisfied; });
}

FullSystemResult run_full_system(const Eigen::MatrixXd& X, const Eigen::VectorXd& D,
                                 const NetworkArchitecture& arch, int k, int min_size,
                                 double alpha, const CompletionSpec& spec,
                                 const TrainConfig& cfg, int threads) {
  cfg.validate();
  spec.validate();
  arch.validate();
  if (X.rows() != D.size()) {
    throw std::invalid_argument("run_full_system: feature/difficulty size mismatch");
  }
  if (arch.input_dim != X.cols()) {
    throw std::invalid_argument("run_full_system: architecture input_dim differs from data");
  }

  FullSystemResult result;
  result.normalizer = fit_normalizer(X);
  const Eigen::MatrixXd Xn = result.normalizer.apply(X);
  result.assignment =
      enforce_min_size(kmeans(Xn, k, mix_seed(cfg.seed, seed_salt::kKmeans)), Xn, min_size);

  const int num_clusters = result.assignment.k;
  result.clusters.resize(static_cast<std::size_t>(num_clusters));
  for (Eigen::Index i = 0; i < Xn.rows(); ++i) {
    result.clusters[static_cast<std::size_t>(result.assignment.labels[static_cast<std::size_t>(i)])]
        .rows.push_back(i);
  }

  const std::uint64_t init_base = mix_seed(cfg.seed, seed_salt::kInit);
  const std::uint64_t train_base = mix_seed(cfg.seed, seed_salt::kTrain);

  auto run_cluster = [&](int c) {
    ClusterRunResult& cluster = result.clusters[static_cast<std::size_t>(c)];
    cluster.cluster = c;
    const Eigen::MatrixXd Xc = take_rows(Xn, cluster.rows);
    const Eigen::VectorXd Dc = take_entries(D, cluster.rows);

    TrainConfig cluster_cfg = cfg;
    cluster_cfg.seed = mix_seed(train_base, static_cast<std::uint64_t>(c));
    const NetworkWeights w0 = xavier_init(arch, mix_seed(init_base, static_cast<std::uint64_t>(c)));

    const AlternateResult alt = alternate(w0, Xc, Dc, alpha, spec, cluster_cfg, cluster.trace);
    cluster.weights = alt.weights;
    cluster.satisfied = alt.satisfied;
    cluster.cycles = alt.cycles;
    cluster.required = forward(alt.weights, Xc);
    cluster.achieved_rate = achieved_completion_rate({Dc, cluster.required});
  };

  const int workers = std::max(1, std::min(threads, num_clusters));
  if (workers == 1) {
    for (int c = 0; c < num_clusters; ++c) run_cluster(c);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const int c = next.fetch_add(1);
          if (c >= num_clusters) return;
          try {
            run_cluster(c);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  return result;
}

ConvergenceReport convergence_check(const TrainingTrace& trace) {
  const std::size_t n = trace.alternations.size();
  if (n < 2) throw std::invalid_argument("convergence_check needs at least 2 alternation records");

  // One distance per cycle: how far the training phase moved from the cycle's
  // entry weights (the previous constraint-satisfying point, or the
  // initialization on the first cycle) to the new loss minimum.
  std::vector<double> series;
  series.reserve(n);
  for (const auto& rec : trace.alternations) {
    series.push_back(rec.dist_m_to_c);
  }

  ConvergenceReport report;
  report.pairs = static_cast<int>(series.size()) - 1;
  int ok = 0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    if (series[i + 1] <= series[i] * (1.0 + 1e-3) + 1e-12) ++ok;
  }
  report.nonincreasing_fraction = static_cast<double>(ok) / report.pairs;
  report.first_distance = series.front();
  report.last_distance = series.back();
  report.last_below_first = report.last_distance < report.first_distance;
  return report;
}

}  // namespace dda
