// Copyright 2026 The cfnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cfnav/annotation.h"
#include "cfnav/annotation_http.h"
#include "cfnav/error.h"
#include "cfnav/pipeline.h"

#include <CLI11.hpp>

namespace {

using cfnav::RunConfig;

struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string loss = "chop";
  std::vector<std::string> scenarios;
  std::optional<size_t> episodes;
  std::string checkpoint;
  std::string label;
  std::vector<std::string> labels = {"bc", "chop"};
  std::string host = "127.0.0.1";
  int port = 8080;
};

RunConfig LoadConfig(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{}
                                   : RunConfig::Load(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.episodes) cfg.episodes = *f.episodes;
  if (!f.scenarios.empty()) {
    cfg.scenarios.clear();
    for (const std::string& s : f.scenarios)
      cfg.scenarios.push_back(cfnav::ParseScenario(s));
  }
  cfg.Validate();
  return cfg;
}

// "run/policy_chop.json" -> "chop"
std::string LabelFor(const Flags& f, const std::filesystem::path& ckpt) {
  if (!f.label.empty()) return f.label;
  std::string stem = ckpt.stem().string();
  if (stem.rfind("policy_", 0) == 0) stem = stem.substr(7);
  return stem;
}

std::filesystem::path CheckpointFor(const Flags& f, const RunConfig& cfg) {
  if (!f.checkpoint.empty()) return f.checkpoint;
  return cfnav::CheckpointPath(cfg, cfnav::ParseLossKind(f.loss));
}

void Serve(const RunConfig& cfg, const Flags& f) {
  cfnav::PreferenceStore store(cfg.out_dir / "annotation" /
                               cfnav::files::kPreferences);
  cfnav::AnnotationConfig ac;
  ac.seed = cfg.seed;
  ac.gen = cfg.gen;
  ac.gen.rng_seed = cfg.seed;
  ac.export_dir = cfg.out_dir / "annotation";
  cfnav::AnnotationService service(
      store, cfnav::ReadObservations(cfg.out_dir / cfnav::files::kObservations),
      ac);

  httplib::Server server;
  cfnav::MountAnnotationRoutes(server, service);
  std::cerr << "serving annotation tasks on http://" << f.host << ":" << f.port
            << "\n";
  if (!server.listen(f.host, f.port))
    throw cfnav::Error(cfnav::ErrorCode::kIoError,
                       "cannot listen on " + f.host + ":" +
                           std::to_string(f.port));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfnav: counterfactual preference data and policy pipeline"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "RunConfig JSON file");
    sub->add_option("--seed", f.seed, "Override the run seed");
    sub->add_option("--out", f.out, "Override the output directory");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Teleop dataset and candidates");
  CLI::App* serve = app.add_subcommand("annotate-serve", "Annotation HTTP API");
  CLI::App* autoann =
      app.add_subcommand("auto-annotate", "Oracle labels for all pairs");
  CLI::App* agg = app.add_subcommand("aggregate", "Preferred trajectory table");
  CLI::App* train = app.add_subcommand("train", "Distill a policy");
  CLI::App* eval = app.add_subcommand("eval-offline", "Held-out metrics");
  CLI::App* sim = app.add_subcommand("simulate", "Closed-loop episodes");
  CLI::App* report = app.add_subcommand("report", "Markdown comparison tables");
  for (CLI::App* s : {gen, serve, autoann, agg, train, eval, sim, report})
    common(s);

  serve->add_option("--host", f.host);
  serve->add_option("--port", f.port);
  train->add_option("--loss", f.loss, "bc or chop");
  for (CLI::App* s : {eval, sim}) {
    s->add_option("--checkpoint", f.checkpoint, "Policy checkpoint JSON");
    s->add_option("--loss", f.loss, "Pick the default checkpoint by loss");
    s->add_option("--label", f.label, "Name used for output files");
  }
  for (CLI::App* s : {gen, sim}) {
    s->add_option("--scenario", f.scenarios, "Scenario name (repeatable)");
    s->add_option("--episodes", f.episodes);
  }
  report->add_option("--labels", f.labels, "Policies to compare");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = LoadConfig(f);
    if (gen->parsed()) {
      const cfnav::GenDataResult r = cfnav::GenData(cfg);
      std::cout << r.observations.size() << " observations from " << r.episodes
                << " episodes (" << r.truncated_episodes << " truncated)\n";
    } else if (serve->parsed()) {
      Serve(cfg, f);
    } else if (autoann->parsed()) {
      std::cout << cfnav::AutoAnnotate(cfg).size() << " preference records\n";
    } else if (agg->parsed()) {
      const cfnav::AggregateResult r = cfnav::Aggregate(cfg);
      std::cout << "observations " << r.summary.observations
                << ", comparisons " << r.summary.total_comparisons
                << ", dataset not preferred "
                << 100.0 * r.summary.fraction_dataset_not_preferred << "%\n";
    } else if (train->parsed()) {
      const cfnav::LossKind loss = cfnav::ParseLossKind(f.loss);
      const cfnav::TrainResult r = cfnav::TrainPolicy(cfg, loss);
      std::cout << "final loss " << r.loss_curve.back() << " -> "
                << cfnav::CheckpointPath(cfg, loss).string() << "\n";
    } else if (eval->parsed()) {
      const auto ckpt = CheckpointFor(f, cfg);
      const cfnav::MetricsReport r =
          cfnav::EvalOffline(cfg, ckpt, LabelFor(f, ckpt));
      std::cout << "samples " << r.sample_count << ", near-collisions "
                << r.near_collision_count << ", deviation " << r.mean_deviation
                << ", clearance " << r.mean_min_clearance << "\n";
    } else if (sim->parsed()) {
      const auto ckpt = CheckpointFor(f, cfg);
      const auto logs =
          cfnav::Simulate(cfg, ckpt, LabelFor(f, ckpt), cfg.scenarios);
      size_t ok = 0;
      int hits = 0;
      for (const cfnav::EpisodeLog& l : logs) {
        ok += l.success ? 1 : 0;
        hits += l.collisions;
      }
      std::cout << ok << "/" << logs.size() << " episodes succeeded, "
                << hits << " collisions\n";
    } else if (report->parsed()) {
      const std::string md = cfnav::Report(cfg.out_dir, f.labels);
      cfnav::WriteText(cfg.out_dir / "report.md", md);
      std::cout << md;
    }
  } catch (const cfnav::Error& e) {
    std::cerr << cfnav::ErrorName(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "io-error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
