// Command-line front end: generate / cluster / train / evaluate / report.
#include <CLI11.hpp>

#include "dda/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Per-player difficulty engine: synthetic populations, player clustering,\n"
      "constraint-aware training and benchmark reports"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a TOML-style file (flags win)");
  app.set_version_flag("--version", "1.0.0");

  dda::GenerateOptions gen;
  CLI::App* g = app.add_subcommand("generate", "create a synthetic player dataset");
  g->configurable()->fallthrough();
  g->add_option("--out", gen.out, "dataset file to write")->required();
  g->add_option("--meta-out", gen.meta_out, "ground-truth sidecar file");
  g->add_option("--players", gen.players, "population size")->capture_default_str();
  g->add_option("--features", gen.features, "feature dimension")->capture_default_str();
  g->add_option("--scenario", gen.scenario,
                "linear | piecewise | heterogeneous-segments")->capture_default_str();
  g->add_option("--segments", gen.segments, "segment count (heterogeneous-segments)")
      ->capture_default_str();
  g->add_option("--noise-sd", gen.noise_sd, "difficulty noise sd; negative = scenario default")
      ->capture_default_str();
  g->add_option("--seed", gen.seed, "generation seed")->capture_default_str();

  dda::ClusterOptions clu;
  CLI::App* c = app.add_subcommand("cluster", "normalize features and cluster players");
  c->configurable()->fallthrough();
  c->add_option("--data", clu.data, "dataset file")->required();
  c->add_option("--out", clu.out, "assignment file to write")->required();
  c->add_option("--k", clu.k, "cluster count")->capture_default_str();
  c->add_option("--min-size", clu.min_size, "dissolve clusters smaller than this")
      ->capture_default_str();
  c->add_option("--seed", clu.seed, "seeding randomness")->capture_default_str();
  c->add_option("--max-iter", clu.max_iter, "iteration cap")->capture_default_str();
  c->add_flag("--plain-init", clu.plain_init, "uniform random seeding instead of spread-out");

  dda::TrainOptions tr;
  CLI::App* t = app.add_subcommand("train", "fit per-cluster difficulty networks");
  t->configurable()->fallthrough();
  t->add_option("--data", tr.data, "dataset file")->required();
  t->add_option("--model-dir", tr.model_dir, "output directory")->required();
  t->add_option("--k", tr.k, "cluster count")->capture_default_str();
  t->add_option("--min-size", tr.min_size, "dissolve clusters smaller than this")
      ->capture_default_str();
  t->add_option("--alpha", tr.alpha, "personalization weight in the loss")->capture_default_str();
  t->add_option("--target", tr.target, "desired completion rate")->capture_default_str();
  t->add_option("--delta", tr.delta, "completion rate tolerance")->capture_default_str();
  t->add_option("--seed", tr.seed, "master seed")->capture_default_str();
  t->add_option("--hidden-width", tr.hidden_width, "units per hidden layer")
      ->capture_default_str();
  t->add_option("--hidden-layers", tr.hidden_layers, "hidden layer count")
      ->capture_default_str();
  t->add_option("--activation", tr.activation,
                "relu | leaky_relu | tanh | softplus | identity")->capture_default_str();
  t->add_option("--eta-ux", tr.train.eta_ux, "loss descent step size")->capture_default_str();
  t->add_option("--eta-proj", tr.train.eta_proj, "constraint step size")->capture_default_str();
  t->add_option("--batch-size", tr.train.batch_size, "minibatch rows")->capture_default_str();
  t->add_option("--max-epochs", tr.train.max_epochs_ux, "epoch cap per descent phase")
      ->capture_default_str();
  t->add_option("--max-proj-iter", tr.train.max_iter_proj, "step cap per constraint phase")
      ->capture_default_str();
  t->add_option("--max-alternations", tr.train.max_alternations, "alternation cycle cap")
      ->capture_default_str();
  t->add_option("--plateau-tol", tr.train.ux_plateau_tol,
                "relative epoch improvement that still counts as progress")
      ->capture_default_str();
  t->add_option("--plateau-patience", tr.train.ux_plateau_patience,
                "flat epochs before the descent phase stops")->capture_default_str();
  t->add_option("--alt-tol", tr.train.alt_distance_tol,
                "relative change of the alternation distance that stops cycling")
      ->capture_default_str();
  t->add_flag("!--no-step-decay", tr.train.proj_step_decay,
              "keep the constraint step size fixed across cycles");
  t->add_option("--threads", tr.threads, "parallel cluster workers")->capture_default_str();

  dda::EvaluateOptions ev;
  CLI::App* e = app.add_subcommand("evaluate", "compare a model against the rule-based baseline");
  e->configurable()->fallthrough();
  e->add_option("--data", ev.data, "dataset file")->required();
  e->add_option("--model-dir", ev.model_dir, "trained model directory")->required();
  e->add_option("--report-dir", ev.report_dir, "output directory")->required();
  e->add_option("--policy", ev.policy, "rule cascade file; omit for the built-in baseline");
  e->add_option("--threshold", ev.threshold, "per-cluster rate that counts as blown")
      ->capture_default_str();
  e->add_option("--band-low", ev.band_low, "acceptable overall rate, lower edge")
      ->capture_default_str();
  e->add_option("--band-high", ev.band_high, "acceptable overall rate, upper edge")
      ->capture_default_str();

  dda::ReportOptions rep;
  CLI::App* r = app.add_subcommand("report", "render curves and convergence stats from traces");
  r->configurable()->fallthrough();
  r->add_option("--trace", rep.trace, "step table (…steps.csv)")->required();
  r->add_option("--alternations", rep.alternations,
                "alternation table; default replaces 'steps' in --trace");
  r->add_option("--out-dir", rep.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return dda::exit_code::kValidation;
  }

  if (app.got_subcommand(g)) return dda::cmd_generate(gen);
  if (app.got_subcommand(c)) return dda::cmd_cluster(clu);
  if (app.got_subcommand(t)) return dda::cmd_train(tr);
  if (app.got_subcommand(e)) return dda::cmd_evaluate(ev);
  if (app.got_subcommand(r)) return dda::cmd_report(rep);
  return dda::exit_code::kValidation;
}
