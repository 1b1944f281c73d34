#include "dda/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "dda/clustering.hpp"
#include "dda/io.hpp"
#include "dda/reporting.hpp"
#include "dda/rng.hpp"
#include "dda/synthetic.hpp"

namespace dda {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string cluster_file(const fs::path& dir, int cluster, const char* suffix) {
  char name[64];
  std::snprintf(name, sizeof(name), "cluster_%02d_%s", cluster, suffix);
  return (dir / name).string();
}

template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::kValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::kRuntime;
  }
}

json manifest_architecture(const NetworkArchitecture& arch) {
  return {{"input_dim", arch.input_dim},
          {"hidden_dims", arch.hidden_dims},
          {"activation", activation_name(arch.activation)}};
}

json manifest_train(const TrainConfig& cfg) {
  return {{"eta_ux", cfg.eta_ux},
          {"eta_proj", cfg.eta_proj},
          {"batch_size", cfg.batch_size},
          {"max_epochs_ux", cfg.max_epochs_ux},
          {"max_iter_proj", cfg.max_iter_proj},
          {"max_alternations", cfg.max_alternations},
          {"ux_plateau_tol", cfg.ux_plateau_tol},
          {"ux_plateau_patience", cfg.ux_plateau_patience},
          {"alt_distance_tol", cfg.alt_distance_tol},
          {"proj_step_decay", cfg.proj_step_decay}};
}

json read_manifest(const fs::path& model_dir) {
  const fs::path path = model_dir / "manifest.json";
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != formats::kManifest ||
      doc.value("version", -1) != formats::kVersion) {
    throw FormatError(path.string() + ": not a model manifest");
  }
  return doc;
}

// Nearest stored centroid in normalized feature space; when evaluating the
// training dataset itself this reproduces the stored labels.
std::vector<int> assign_to_centroids(const Eigen::MatrixXd& Xn, const Eigen::MatrixXd& centroids) {
  std::vector<int> labels(static_cast<std::size_t>(Xn.rows()), 0);
  for (Eigen::Index i = 0; i < Xn.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d2 = (Xn.row(i) - centroids.row(c)).squaredNorm();
      if (d2 < best) {
        best = d2;
        labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
      }
    }
  }
  return labels;
}

}  // namespace

int cmd_generate(const GenerateOptions& opt) {
  return run_guarded([&] {
    if (opt.out.empty()) throw std::invalid_argument("generate: --out is required");
    SyntheticScenario scenario;
    scenario.players = opt.players;
    scenario.feature_dim = opt.features;
    scenario.kind = parse_scenario(opt.scenario);
    scenario.segments = opt.segments;
    if (opt.noise_sd >= 0.0) scenario.noise_sd = opt.noise_sd;
    scenario.seed = opt.seed;
    scenario.validate();

    const PlayerDataset ds = generate(scenario);
    write_dataset(opt.out, ds.features, ds.difficulty);
    if (!opt.meta_out.empty()) write_dataset_meta(opt.meta_out, ds);

    std::cout << "wrote " << ds.players() << " players x " << ds.feature_dim()
              << " features (" << scenario_name(scenario.kind) << ", noise_sd "
              << format_double(ds.truth.noise_sd) << ") to " << opt.out << "\n";
    return exit_code::kOk;
  });
}

int cmd_cluster(const ClusterOptions& opt) {
  return run_guarded([&] {
    if (opt.data.empty() || opt.out.empty()) {
      throw std::invalid_argument("cluster: --data and --out are required");
    }
    const LoadedDataset ds = read_dataset(opt.data);
    const FeatureNormalizer norm = fit_normalizer(ds.features);
    const Eigen::MatrixXd Xn = norm.apply(ds.features);

    ClusterAssignment asg = kmeans(Xn, opt.k, mix_seed(opt.seed, seed_salt::kKmeans),
                                   opt.max_iter, !opt.plain_init);
    asg = enforce_min_size(asg, Xn, opt.min_size);
    save_assignment(opt.out, asg, norm);

    const std::vector<int> sizes = asg.cluster_sizes();
    std::cout << "k=" << asg.k << " clusters over " << Xn.rows() << " players (sizes:";
    for (const int s : sizes) std::cout << ' ' << s;
    std::cout << ")\n";
    return exit_code::kOk;
  });
}

int cmd_train(const TrainOptions& opt) {
  return run_guarded([&] {
    if (opt.data.empty() || opt.model_dir.empty()) {
      throw std::invalid_argument("train: --data and --model-dir are required");
    }
    const std::string dataset_bytes = read_text(opt.data);
    const LoadedDataset ds = read_dataset(opt.data);

    NetworkArchitecture arch;
    arch.input_dim = static_cast<int>(ds.features.cols());
    arch.hidden_dims.assign(static_cast<std::size_t>(opt.hidden_layers), opt.hidden_width);
    arch.activation = parse_activation(opt.activation);
    arch.validate();

    const CompletionSpec spec{opt.target, opt.delta};
    spec.validate();
    TrainConfig cfg = opt.train;
    cfg.seed = opt.seed;
    cfg.validate();

    const FullSystemResult result = run_full_system(ds.features, ds.difficulty, arch, opt.k,
                                                    opt.min_size, opt.alpha, spec, cfg,
                                                    opt.threads);

    const fs::path dir(opt.model_dir);
    fs::create_directories(dir);
    save_normalizer(dir / "normalizer.json", result.normalizer);
    save_assignment((dir / "assignment.json").string(), result.assignment, result.normalizer);

    json clusters = json::array();
    for (const auto& c : result.clusters) {
      save_weights(cluster_file(dir, c.cluster, "weights.json"), c.weights);
      write_trace_steps(cluster_file(dir, c.cluster, "steps.csv"), c.trace);
      write_trace_alternations(cluster_file(dir, c.cluster, "alternations.csv"), c.trace);
      clusters.push_back(
          {{"cluster", c.cluster},
           {"size", c.rows.size()},
           {"satisfied", c.satisfied},
           {"achieved_rate", c.achieved_rate},
           {"cycles", c.cycles},
           {"weights_fnv1a64",
            hex64(fnv1a64(read_text(cluster_file(dir, c.cluster, "weights.json"))))}});
      std::cout << "cluster " << c.cluster << ": size=" << c.rows.size()
                << " satisfied=" << (c.satisfied ? "yes" : "no")
                << " rate=" << format_double(c.achieved_rate) << " cycles=" << c.cycles << "\n";
    }

    json manifest;
    manifest["format"] = formats::kManifest;
    manifest["version"] = formats::kVersion;
    manifest["seed"] = opt.seed;
    manifest["alpha"] = opt.alpha;
    manifest["target"] = opt.target;
    manifest["delta"] = opt.delta;
    manifest["k_requested"] = opt.k;
    manifest["k_effective"] = result.assignment.k;
    manifest["min_size"] = opt.min_size;
    manifest["architecture"] = manifest_architecture(arch);
    manifest["train"] = manifest_train(cfg);
    manifest["dataset"] = {{"players", ds.features.rows()},
                           {"feature_dim", ds.features.cols()},
                           {"fnv1a64", hex64(fnv1a64(dataset_bytes))}};
    manifest["normalizer_fnv1a64"] = hex64(fnv1a64(normalizer_to_string(result.normalizer)));
    manifest["clusters"] = std::move(clusters);
    manifest["all_satisfied"] = result.all_satisfied();
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    if (!result.all_satisfied()) {
      std::cout << "model written to " << opt.model_dir
                << " with unsatisfied clusters flagged\n";
      return exit_code::kUnsatisfied;
    }
    std::cout << "model written to " << opt.model_dir << "\n";
    return exit_code::kOk;
  });
}

int cmd_evaluate(const EvaluateOptions& opt) {
  return run_guarded([&] {
    if (opt.data.empty() || opt.model_dir.empty() || opt.report_dir.empty()) {
      throw std::invalid_argument("evaluate: --data, --model-dir and --report-dir are required");
    }
    const std::string dataset_bytes = read_text(opt.data);
    const LoadedDataset ds = read_dataset(opt.data);
    const fs::path dir(opt.model_dir);

    const json manifest = read_manifest(dir);
    const auto z = manifest.at("dataset").at("feature_dim").get<Eigen::Index>();
    if (z != ds.features.cols()) {
      throw FormatError("evaluate: dataset has " + std::to_string(ds.features.cols()) +
                        " features, model expects " + std::to_string(z));
    }
    const int k = manifest.at("k_effective").get<int>();

    const LoadedAssignment loaded = load_assignment((dir / "assignment.json").string());
    const std::string norm_hash = hex64(fnv1a64(normalizer_to_string(loaded.normalizer)));
    if (manifest.value("normalizer_fnv1a64", norm_hash) != norm_hash) {
      throw FormatError("evaluate: assignment normalizer does not match the manifest");
    }
    const Eigen::MatrixXd Xn = loaded.normalizer.apply(ds.features);

    const bool same_dataset =
        manifest.at("dataset").value("fnv1a64", "") == hex64(fnv1a64(dataset_bytes)) &&
        static_cast<Eigen::Index>(loaded.assignment.labels.size()) == ds.features.rows();
    const std::vector<int> labels = same_dataset
                                        ? loaded.assignment.labels
                                        : assign_to_centroids(Xn, loaded.assignment.centroids);

    // A foreign population may leave some trained clusters without players;
    // those drop out of the per-cluster statistics.
    std::vector<int> members(static_cast<std::size_t>(k), 0);
    for (const int label : labels) ++members[static_cast<std::size_t>(label)];
    std::vector<int> dense(static_cast<std::size_t>(k), -1);
    int populated = 0;
    for (int c = 0; c < k; ++c) {
      if (members[static_cast<std::size_t>(c)] > 0) dense[static_cast<std::size_t>(c)] = populated++;
    }
    if (populated < k) {
      std::cout << (k - populated) << " of " << k
                << " clusters have no players in this dataset and are omitted from "
                   "per-cluster statistics\n";
    }
    std::vector<int> report_labels(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      report_labels[i] = dense[static_cast<std::size_t>(labels[i])];
    }

    Eigen::VectorXd dl_assigned(ds.features.rows());
    for (int c = 0; c < k; ++c) {
      const NetworkWeights w = load_weights(cluster_file(dir, c, "weights.json"));
      std::vector<Eigen::Index> rows;
      for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        if (labels[static_cast<std::size_t>(i)] == c) rows.push_back(i);
      }
      if (rows.empty()) continue;
      Eigen::MatrixXd Xc(static_cast<Eigen::Index>(rows.size()), Xn.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        Xc.row(static_cast<Eigen::Index>(i)) = Xn.row(rows[i]);
      }
      const Eigen::VectorXd out = forward(w, Xc);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        dl_assigned[rows[i]] = out[static_cast<Eigen::Index>(i)];
      }
    }

    const RuleBasedPolicy policy =
        opt.policy.empty() ? default_benchmark_policy() : load_policy(opt.policy);
    policy.validate(static_cast<int>(ds.features.cols()));
    const Eigen::VectorXd rule_assigned = rule_based_assign(policy, ds.features);

    ComparisonReport report;
    report.band_low = opt.band_low;
    report.band_high = opt.band_high;
    report.threshold = opt.threshold;
    report.k = populated;
    report.dl_dda =
        method_report(ds.difficulty, dl_assigned, report_labels, populated, opt.threshold);
    report.rule_based =
        method_report(ds.difficulty, rule_assigned, report_labels, populated, opt.threshold);

    const fs::path out(opt.report_dir);
    fs::create_directories(out);
    write_comparison_report(out / "report.json", report);
    write_histogram(out / "histogram.csv", rate_histogram(report));

    const auto in_band = [&](double r) { return r >= opt.band_low && r <= opt.band_high; };
    std::cout << "dl-dda overall rate " << format_double(report.dl_dda.overall_rate)
              << (in_band(report.dl_dda.overall_rate) ? " (in band [" : " (outside band [")
              << format_double(opt.band_low) << ", " << format_double(opt.band_high) << "]), "
              << report.dl_dda.clusters_above_threshold << "/" << populated << " clusters above "
              << format_double(opt.threshold) << "\n";
    std::cout << "rule-based overall rate " << format_double(report.rule_based.overall_rate)
              << ", " << report.rule_based.clusters_above_threshold << "/" << populated
              << " clusters above " << format_double(opt.threshold) << "\n";
    std::cout << "report written to " << opt.report_dir << "\n";
    return exit_code::kOk;
  });
}

int cmd_report(const ReportOptions& opt) {
  return run_guarded([&] {
    if (opt.trace.empty() || opt.out_dir.empty()) {
      throw std::invalid_argument("report: --trace and --out-dir are required");
    }
    std::string alternations = opt.alternations;
    if (alternations.empty()) {
      const std::size_t pos = opt.trace.rfind("steps");
      if (pos == std::string::npos) {
        throw std::invalid_argument(
            "report: cannot derive the alternations table from '" + opt.trace +
            "'; pass --alternations");
      }
      alternations = opt.trace.substr(0, pos) + "alternations" + opt.trace.substr(pos + 5);
    }

    const TrainingTrace trace = read_trace(opt.trace, alternations);
    const fs::path out(opt.out_dir);
    fs::create_directories(out);
    write_curves(out / "curves.csv", trace);
    write_trace_alternations(out / "distances.csv", trace);
    write_convergence_report(out / "convergence.json", trace);

    std::cout << trace.steps.size() << " steps, " << trace.alternations.size()
              << " alternation cycles, phases "
              << (trace.phases_alternate() ? "alternate cleanly" : "DO NOT alternate") << "\n";
    if (trace.alternations.size() >= 2) {
      const ConvergenceReport conv = convergence_check(trace);
      std::cout << "distance series: " << format_double(conv.nonincreasing_fraction * 100.0)
                << "% non-increasing pairs, first " << format_double(conv.first_distance)
                << " -> last " << format_double(conv.last_distance) << "\n";
    }
    std::cout << "curves written to " << opt.out_dir << "\n";
    return exit_code::kOk;
  });
}

}  // namespace dda
