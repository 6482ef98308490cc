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

#include "cfnav/pipeline.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "cfnav/error.h"
#include "cfnav/random.h"

namespace cfnav {
namespace {

namespace fs = std::filesystem;

Json LidarJson(const LidarConfig& l) {
  return {{"n_beams", l.n_beams}, {"fov", l.fov}, {"max_range", l.max_range}};
}

void LidarFrom(const Json& j, LidarConfig& l) {
  l.n_beams = j.value("n_beams", l.n_beams);
  l.fov = j.value("fov", l.fov);
  l.max_range = j.value("max_range", l.max_range);
}

std::map<std::string, Observation> ById(std::vector<Observation> obs) {
  std::map<std::string, Observation> out;
  for (Observation& o : obs) {
    std::string id = o.frame.observation_id;
    out.emplace(std::move(id), std::move(o));
  }
  return out;
}

PreferenceDataset LoadPreferenceDataset(const RunConfig& cfg,
                                        bool with_records) {
  PreferenceDataset data;
  for (CandidateSet& cs : ReadCandidateSets(cfg.out_dir / files::kCandidates)) {
    std::string id = cs.observation_id;
    data.candidate_sets.emplace(std::move(id), std::move(cs));
  }
  if (with_records)
    data.records = ReadPreferences(cfg.out_dir / files::kPreferences);
  return data;
}

void WriteConfig(const RunConfig& cfg) {
  WriteJson(cfg.out_dir / files::kConfig, cfg.ToJson());
}

std::string Fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string Percent(double base, double value) {
  if (base == 0.0) return "n/a";
  std::ostringstream s;
  s << std::showpos << std::fixed << std::setprecision(1)
    << 100.0 * (value - base) / std::abs(base) << "%";
  return s.str();
}

}  // namespace

Json RunConfig::ToJson() const {
  Json scen = Json::array();
  for (ScenarioId id : scenarios) scen.push_back(std::string(ScenarioName(id)));
  return {
      {"scenarios", scen},
      {"seed", seed},
      {"observations", observations},
      {"episodes", episodes},
      {"test_fraction", test_fraction},
      {"jitter_xy", jitter_xy},
      {"jitter_theta", jitter_theta},
      {"gen",
       {{"m", gen.m}, {"n", gen.n}, {"rot_min", gen.rot_min},
        {"rot_max", gen.rot_max}}},
      {"train",
       {{"learning_rate", train.learning_rate},
        {"batch_size", train.batch_size},
        {"epochs", train.epochs},
        {"seed", train.seed},
        {"hidden", train.hidden},
        {"weight_init", train.weight_init},
        {"momentum", train.momentum},
        {"decay_start", train.decay_start}}},
      {"policy",
       {{"n_beams", policy.n_beams},
        {"horizon", policy.horizon},
        {"output_scale", policy.output_scale},
        {"goal_scale", policy.goal_scale},
        {"max_range", policy.max_range}}},
      {"noise",
       {{"sigma_v", noise.sigma_v},
        {"sigma_omega", noise.sigma_omega},
        {"lag_ticks", noise.lag_ticks},
        {"correlation_time", noise.correlation_time}}},
      {"teleop",
       {{"control_dt", teleop.control_dt},
        {"sample_period", teleop.sample_period},
        {"waypoint_dt", teleop.waypoint_dt},
        {"cruise_speed", teleop.cruise_speed},
        {"heading_gain", teleop.heading_gain},
        {"repulsion_gain", teleop.repulsion_gain},
        {"influence_radius", teleop.influence_radius},
        {"lookahead", teleop.lookahead},
        {"corridor_half_width", teleop.corridor_half_width},
        {"sidestep_gain", teleop.sidestep_gain},
        {"goal_tolerance", teleop.goal_tolerance},
        {"time_budget", teleop.time_budget},
        {"robot_radius", teleop.robot_radius},
        {"lidar", LidarJson(teleop.lidar)}}},
      {"oracle",
       {{"progress_weight", oracle.progress_weight},
        {"robot_radius", oracle.robot_radius},
        {"interp_step", oracle.interp_step},
        {"lidar", LidarJson(oracle.lidar)}}},
      {"metrics",
       {{"interp_step", metrics.interp_step},
        {"robot_width", metrics.robot_width},
        {"empty_clearance", metrics.empty_clearance}}},
      {"episode", cfnav::ToJson(episode)},
      {"out_dir", out_dir.string()},
  };
}

RunConfig RunConfig::FromJson(const Json& j) {
  RunConfig c;
  try {
    if (j.contains("scenarios")) {
      c.scenarios.clear();
      for (const Json& s : j["scenarios"])
        c.scenarios.push_back(ParseScenario(s.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    c.observations = j.value("observations", c.observations);
    c.episodes = j.value("episodes", c.episodes);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.jitter_xy = j.value("jitter_xy", c.jitter_xy);
    c.jitter_theta = j.value("jitter_theta", c.jitter_theta);
    if (j.contains("gen")) {
      const Json& g = j["gen"];
      c.gen.m = g.value("m", c.gen.m);
      c.gen.n = g.value("n", c.gen.n);
      c.gen.rot_min = g.value("rot_min", c.gen.rot_min);
      c.gen.rot_max = g.value("rot_max", c.gen.rot_max);
    }
    if (j.contains("train")) {
      const Json& t = j["train"];
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.seed = t.value("seed", c.train.seed);
      c.train.hidden = t.value("hidden", c.train.hidden);
      c.train.weight_init = t.value("weight_init", c.train.weight_init);
      c.train.momentum = t.value("momentum", c.train.momentum);
      c.train.decay_start = t.value("decay_start", c.train.decay_start);
    }
    if (j.contains("policy")) {
      const Json& p = j["policy"];
      c.policy.n_beams = p.value("n_beams", c.policy.n_beams);
      c.policy.horizon = p.value("horizon", c.policy.horizon);
      c.policy.output_scale = p.value("output_scale", c.policy.output_scale);
      c.policy.goal_scale = p.value("goal_scale", c.policy.goal_scale);
      c.policy.max_range = p.value("max_range", c.policy.max_range);
    }
    if (j.contains("noise")) {
      const Json& n = j["noise"];
      c.noise.sigma_v = n.value("sigma_v", c.noise.sigma_v);
      c.noise.sigma_omega = n.value("sigma_omega", c.noise.sigma_omega);
      c.noise.lag_ticks = n.value("lag_ticks", c.noise.lag_ticks);
      c.noise.correlation_time =
          n.value("correlation_time", c.noise.correlation_time);
    }
    if (j.contains("teleop")) {
      const Json& t = j["teleop"];
      c.teleop.control_dt = t.value("control_dt", c.teleop.control_dt);
      c.teleop.sample_period = t.value("sample_period", c.teleop.sample_period);
      c.teleop.waypoint_dt = t.value("waypoint_dt", c.teleop.waypoint_dt);
      c.teleop.cruise_speed = t.value("cruise_speed", c.teleop.cruise_speed);
      c.teleop.heading_gain = t.value("heading_gain", c.teleop.heading_gain);
      c.teleop.repulsion_gain =
          t.value("repulsion_gain", c.teleop.repulsion_gain);
      c.teleop.influence_radius =
          t.value("influence_radius", c.teleop.influence_radius);
      c.teleop.lookahead = t.value("lookahead", c.teleop.lookahead);
      c.teleop.corridor_half_width =
          t.value("corridor_half_width", c.teleop.corridor_half_width);
      c.teleop.sidestep_gain =
          t.value("sidestep_gain", c.teleop.sidestep_gain);
      c.teleop.goal_tolerance =
          t.value("goal_tolerance", c.teleop.goal_tolerance);
      c.teleop.time_budget = t.value("time_budget", c.teleop.time_budget);
      c.teleop.robot_radius = t.value("robot_radius", c.teleop.robot_radius);
      if (t.contains("lidar")) LidarFrom(t["lidar"], c.teleop.lidar);
    }
    if (j.contains("oracle")) {
      const Json& o = j["oracle"];
      c.oracle.progress_weight =
          o.value("progress_weight", c.oracle.progress_weight);
      c.oracle.robot_radius = o.value("robot_radius", c.oracle.robot_radius);
      c.oracle.interp_step = o.value("interp_step", c.oracle.interp_step);
      if (o.contains("lidar")) LidarFrom(o["lidar"], c.oracle.lidar);
    }
    if (j.contains("metrics")) {
      const Json& m = j["metrics"];
      c.metrics.interp_step = m.value("interp_step", c.metrics.interp_step);
      c.metrics.robot_width = m.value("robot_width", c.metrics.robot_width);
      c.metrics.empty_clearance =
          m.value("empty_clearance", c.metrics.empty_clearance);
    }
    if (j.contains("episode")) {
      const Json& e = j["episode"];
      EpisodeConfig& ec = c.episode;
      ec.control_dt = e.value("control_dt", ec.control_dt);
      ec.runner_period = e.value("runner_period", ec.runner_period);
      ec.runner_latency = e.value("runner_latency", ec.runner_latency);
      ec.prune_radius = e.value("prune_radius", ec.prune_radius);
      ec.goal_tolerance = e.value("goal_tolerance", ec.goal_tolerance);
      ec.waypoint_tolerance =
          e.value("waypoint_tolerance", ec.waypoint_tolerance);
      ec.time_budget = e.value("time_budget", ec.time_budget);
      ec.robot_radius = e.value("robot_radius", ec.robot_radius);
      if (e.contains("lidar")) LidarFrom(e["lidar"], ec.lidar);
      if (e.contains("limits")) {
        ec.limits.v_max = e["limits"].value("v_max", ec.limits.v_max);
        ec.limits.omega_max =
            e["limits"].value("omega_max", ec.limits.omega_max);
      }
      if (e.contains("gains")) {
        ec.gains.k_v = e["gains"].value("k_v", ec.gains.k_v);
        ec.gains.k_omega = e["gains"].value("k_omega", ec.gains.k_omega);
      }
    }
    c.out_dir = j.value("out_dir", c.out_dir.string());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

RunConfig RunConfig::Load(const fs::path& path) {
  return FromJson(ReadJson(path));
}

void RunConfig::Validate() const {
  gen.Validate();
  if (scenarios.empty())
    throw Error(ErrorCode::kInvalidArgument, "no scenarios configured");
  if (policy.horizon != gen.n)
    throw Error(ErrorCode::kInvalidArgument,
                "policy horizon must equal the trajectory horizon n");
  if (teleop.lidar.n_beams != policy.n_beams ||
      episode.lidar.n_beams != policy.n_beams)
    throw Error(ErrorCode::kInvalidArgument,
                "lidar beam counts must match the policy input");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must be in (0,1)");
}

fs::path CheckpointPath(const RunConfig& cfg, LossKind loss) {
  return cfg.out_dir / ("policy_" + std::string(LossKindName(loss)) + ".json");
}

GenDataResult GenData(const RunConfig& cfg) {
  cfg.Validate();
  GenDataResult out;
  TeleopConfig tc = cfg.teleop;
  tc.horizon = cfg.gen.n;
  GenConfig gen = cfg.gen;
  gen.rng_seed = cfg.seed;
  const size_t n_scen = cfg.scenarios.size();
  for (size_t si = 0; si < n_scen; ++si) {
    const ScenarioId id = cfg.scenarios[si];
    const Scenario sc = BuildScenario(id);
    const size_t quota =
        cfg.observations / n_scen + (si < cfg.observations % n_scen ? 1 : 0);
    size_t taken = 0;
    for (size_t k = 0; taken < quota; ++k) {
      ++out.episodes;
      const std::string prefix =
          std::string(ScenarioName(id)) + "/ep" + std::to_string(k);
      Rng rng(DeriveSeed(cfg.seed, "teleop/" + prefix));
      const Pose2 start(
          sc.start.x + UniformReal(rng, -cfg.jitter_xy, cfg.jitter_xy),
          sc.start.y + UniformReal(rng, -cfg.jitter_xy, cfg.jitter_xy),
          sc.start.theta +
              UniformReal(rng, -cfg.jitter_theta, cfg.jitter_theta));
      TeleopEpisode ep =
          TeleopSurrogate(sc.world, start, sc.goal, cfg.noise, tc, rng, prefix);
      if (ep.truncated) ++out.truncated_episodes;
      size_t usable = 0;
      for (TeleopSample& s : ep.samples) {
        if (taken >= quota) break;
        if (ArcLength(s.executed) < 1e-6) continue;
        ++usable;
        ++taken;
        Observation o;
        o.frame = std::move(s.frame);
        o.executed = std::move(s.executed);
        o.scenario = id;
        o.pose = s.pose;
        out.candidates.push_back(GenerateCandidates(
            o.frame.observation_id, o.executed, std::monostate{}, gen));
        out.observations.push_back(std::move(o));
      }
      if (usable == 0 && k > 1000)
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(ScenarioName(id)) +
                        ": teleop produces no usable samples");
    }
  }
  std::vector<Json> obs_lines, cand_lines;
  for (const Observation& o : out.observations) obs_lines.push_back(ToJson(o));
  for (const CandidateSet& cs : out.candidates) cand_lines.push_back(ToJson(cs));
  WriteConfig(cfg);
  WriteJsonLines(cfg.out_dir / files::kObservations, obs_lines);
  WriteJsonLines(cfg.out_dir / files::kCandidates, cand_lines);
  return out;
}

std::vector<PreferenceRecord> AutoAnnotate(const RunConfig& cfg) {
  const auto observations =
      ById(ReadObservations(cfg.out_dir / files::kObservations));
  const std::vector<CandidateSet> sets =
      ReadCandidateSets(cfg.out_dir / files::kCandidates);
  std::map<ScenarioId, Scenario> worlds;
  for (ScenarioId id : kAllScenarios) worlds.emplace(id, BuildScenario(id));

  std::vector<PreferenceRecord> records;
  std::vector<Json> lines;
  for (const CandidateSet& cs : sets) {
    auto it = observations.find(cs.observation_id);
    if (it == observations.end())
      throw Error(ErrorCode::kMissingObservation,
                  "candidate set references unknown observation '" +
                      cs.observation_id + "'");
    const Observation& o = it->second;
    const std::vector<double> scores =
        OracleScores(cs, worlds.at(o.scenario).world, o.pose, o.frame.goal,
                     o.frame.stamp, cfg.oracle);
    for (const auto& [i, j] : AllPairs(cs.size())) {
      PreferenceRecord r;
      r.observation_id = cs.observation_id;
      r.i = i;
      r.j = j;
      r.y = PreferFromScores(scores[i], scores[j], i, j);
      r.annotator_id = "oracle";
      r.source = PreferenceSource::kOracle;
      lines.push_back(ToJson(r));
      records.push_back(std::move(r));
    }
  }
  WriteConfig(cfg);
  WriteJsonLines(cfg.out_dir / files::kPreferences, lines);
  return records;
}

AggregateResult Aggregate(const RunConfig& cfg) {
  const PreferenceDataset data = LoadPreferenceDataset(cfg, true);
  std::map<std::string, std::vector<PreferenceRecord>> by_obs;
  for (const PreferenceRecord& r : data.records) {
    if (!data.candidate_sets.contains(r.observation_id))
      throw Error(ErrorCode::kMissingObservation,
                  "preference references unknown observation '" +
                      r.observation_id + "'");
    by_obs[r.observation_id].push_back(r);
  }
  AggregateResult out;
  std::vector<Json> lines;
  for (const auto& [id, recs] : by_obs) {
    const CandidateSet& cs = data.candidate_sets.at(id);
    const size_t best = AggregateBest(cs, recs, cfg.seed);
    out.rows.push_back({id, best, cs[best].kind});
    lines.push_back({{"obs", id},
                     {"index", best},
                     {"kind", std::string(CandidateKindName(cs[best].kind))}});
  }
  out.summary = SummarizeDataset(data, cfg.seed);
  out.kind_rewards = FitRewardsByKind(data);

  std::map<std::string, size_t> kind_counts;
  for (const AggregateRow& r : out.rows)
    ++kind_counts[std::string(CandidateKindName(r.kind))];
  Json rewards = Json::object();
  for (const auto& [kind, r] : out.kind_rewards)
    rewards[std::string(CandidateKindName(kind))] = r;
  const DatasetSummary& s = out.summary;
  Json summary = {{"observations", s.observations},
                  {"m", s.m},
                  {"total_candidates", s.total_candidates},
                  {"fraction_dataset_not_preferred",
                   s.fraction_dataset_not_preferred},
                  {"total_comparisons", s.total_comparisons},
                  {"preferred_kind_counts", kind_counts},
                  {"bradley_terry_kind_rewards", rewards},
                  {"config", cfg.ToJson()}};
  WriteJsonLines(cfg.out_dir / files::kAggregate, lines);
  WriteJson(cfg.out_dir / files::kSummary, summary);
  return out;
}

std::vector<std::string> HeldOutIds(const RunConfig& cfg,
                                    std::vector<std::string> all_ids) {
  std::sort(all_ids.begin(), all_ids.end());
  Rng rng(DeriveSeed(cfg.seed, "split"));
  Shuffle(all_ids, rng);
  const auto n_test = static_cast<size_t>(
      std::llround(cfg.test_fraction * static_cast<double>(all_ids.size())));
  std::vector<std::string> test(all_ids.begin(),
                                all_ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(test.begin(), test.end());
  return test;
}

namespace {

struct Split {
  std::vector<Observation> train;
  std::vector<Observation> test;
};

Split LoadSplit(const RunConfig& cfg) {
  std::vector<Observation> all =
      ReadObservations(cfg.out_dir / files::kObservations);
  std::vector<std::string> ids;
  for (const Observation& o : all) ids.push_back(o.frame.observation_id);
  const std::vector<std::string> held = HeldOutIds(cfg, ids);
  Split s;
  for (Observation& o : all) {
    if (std::binary_search(held.begin(), held.end(), o.frame.observation_id))
      s.test.push_back(std::move(o));
    else
      s.train.push_back(std::move(o));
  }
  return s;
}

}  // namespace

TrainResult TrainPolicy(const RunConfig& cfg, LossKind loss) {
  const Split split = LoadSplit(cfg);
  const PreferenceDataset prefs =
      LoadPreferenceDataset(cfg, loss == LossKind::kChop);
  const std::vector<DistillTarget> targets = DistillTargets(
      split.train, prefs,
      loss == LossKind::kChop ? DistillMode::kChop : DistillMode::kBc,
      cfg.seed);
  std::vector<TrainingExample> examples;
  examples.reserve(targets.size());
  for (size_t k = 0; k < targets.size(); ++k)
    examples.push_back(
        {EncodeFeatures(split.train[k].frame, cfg.policy), targets[k].target});

  TrainConfig tc = cfg.train;
  tc.loss_kind = loss;
  TrainResult result = Train(examples, cfg.policy, tc);

  Json ckpt = ToJson(result.params);
  ckpt["loss"] = std::string(LossKindName(loss));
  ckpt["config"] = cfg.ToJson();
  WriteJson(CheckpointPath(cfg, loss), ckpt);
  std::ostringstream curve;
  curve << "epoch\tloss\n";
  for (size_t e = 0; e < result.loss_curve.size(); ++e)
    curve << e << '\t' << std::setprecision(17) << result.loss_curve[e] << '\n';
  WriteText(cfg.out_dir / ("loss_" + std::string(LossKindName(loss)) + ".tsv"),
            curve.str());
  return result;
}

MetricsReport EvalOffline(const RunConfig& cfg, const fs::path& checkpoint,
                          const std::string& label) {
  const PolicyParams params = PolicyFromJson(ReadJson(checkpoint));
  const Split split = LoadSplit(cfg);
  const PreferenceDataset prefs = LoadPreferenceDataset(cfg, true);
  const std::vector<DistillTarget> preferred =
      DistillTargets(split.test, prefs, DistillMode::kChop, cfg.seed);

  std::vector<OfflineSample> samples;
  samples.reserve(split.test.size());
  for (size_t k = 0; k < split.test.size(); ++k) {
    const Observation& o = split.test[k];
    samples.push_back({Predict(params, EncodeFeatures(o.frame, params.config)),
                       preferred[k].target, ScanToPoints(o.frame.scan)});
  }
  const MetricsReport report = EvaluateBatch(samples, cfg.metrics);

  std::vector<Json> rows;
  std::vector<double> devs, clears;
  for (size_t k = 0; k < report.per_sample.size(); ++k) {
    const SampleRow& r = report.per_sample[k];
    rows.push_back({{"obs", split.test[k].frame.observation_id},
                    {"deviation", r.deviation},
                    {"min_clearance", r.min_clearance},
                    {"near_collision", r.near_collision}});
    devs.push_back(r.deviation);
    clears.push_back(r.min_clearance);
  }
  auto hist_json = [](const Histogram& h) {
    return Json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
  };
  Json summary = SummaryToJson(report);
  summary["label"] = label;
  summary["checkpoint"] = checkpoint.filename().string();
  summary["histograms"] = {{"deviation", hist_json(MakeHistogram(devs))},
                           {"min_clearance", hist_json(MakeHistogram(clears))}};
  summary["config"] = cfg.ToJson();
  WriteJsonLines(cfg.out_dir / ("eval_" + label + ".jsonl"), rows);
  WriteJson(cfg.out_dir / ("eval_" + label + "_summary.json"), summary);
  return report;
}

Pose2 EpisodeJitter(const RunConfig& cfg, ScenarioId id, size_t k) {
  Rng rng(DeriveSeed(cfg.seed, "sim/" + std::string(ScenarioName(id)) + "/" +
                                   std::to_string(k)));
  const double x = UniformReal(rng, -cfg.jitter_xy, cfg.jitter_xy);
  const double y = UniformReal(rng, -cfg.jitter_xy, cfg.jitter_xy);
  const double th = UniformReal(rng, -cfg.jitter_theta, cfg.jitter_theta);
  return Pose2(x, y, th);
}

std::vector<EpisodeLog> Simulate(const RunConfig& cfg,
                                 const fs::path& checkpoint,
                                 const std::string& label,
                                 const std::vector<ScenarioId>& scenarios) {
  const PolicyParams params = PolicyFromJson(ReadJson(checkpoint));
  const PathSource source = PolicyPathSource(params);
  std::vector<EpisodeLog> logs;
  std::vector<EpisodeSummary> rows;
  for (ScenarioId id : scenarios) {
    const Scenario sc = BuildScenario(id);
    for (size_t k = 0; k < cfg.episodes; ++k) {
      EpisodeConfig ec = cfg.episode;
      ec.seed = DeriveSeed(cfg.seed, k);
      ec.start_jitter = EpisodeJitter(cfg, id, k);
      EpisodeLog log = RunEpisode(sc, source, ec, label);
      WriteJsonLines(cfg.out_dir / "episodes" / label /
                         (std::string(ScenarioName(id)) + "_" +
                          std::to_string(k) + ".jsonl"),
                     EpisodeLogToJson(log));
      rows.push_back(Summarize(log));
      logs.push_back(std::move(log));
    }
  }
  MetricsReport report;
  SummarizeEpisodes(rows, report);
  Json summary = SummaryToJson(report);
  summary["label"] = label;
  summary["config"] = cfg.ToJson();
  WriteJson(cfg.out_dir / ("sim_" + label + "_summary.json"), summary);
  return logs;
}

std::string Report(const fs::path& run_dir,
                   const std::vector<std::string>& labels) {
  std::ostringstream md;
  md << "# Baseline vs preference-aligned policy\n\n";

  const fs::path summary_path = run_dir / files::kSummary;
  if (fs::exists(summary_path)) {
    const Json s = ReadJson(summary_path);
    md << "## Preference dataset\n\n| Statistic | Value |\n|---|---|\n"
       << "| Annotated observations | " << s.at("observations") << " |\n"
       << "| Counterfactuals per observation (M) | " << s.at("m") << " |\n"
       << "| Total counterfactual trajectories | " << s.at("total_candidates")
       << " |\n"
       << "| Fraction where dataset trajectory is not preferred | "
       << Fixed(100.0 * s.at("fraction_dataset_not_preferred").get<double>(), 2)
       << "% |\n"
       << "| Total pairwise comparisons | " << s.at("total_comparisons")
       << " |\n\n";
  }

  std::vector<Json> offline, closed;
  for (const std::string& l : labels) {
    const fs::path e = run_dir / ("eval_" + l + "_summary.json");
    offline.push_back(fs::exists(e) ? ReadJson(e) : Json());
    // Closed-loop numbers are recomputed from the episode logs themselves.
    std::vector<EpisodeSummary> rows;
    const fs::path dir = run_dir / "episodes" / l;
    if (fs::exists(dir)) {
      std::vector<fs::path> logs;
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
      std::sort(logs.begin(), logs.end());
      for (const fs::path& p : logs) {
        const Json h = ReadJsonLines(p).front();
        rows.push_back({h.at("success").get<bool>(),
                        h.at("min_clearance").get<double>(),
                        h.at("collisions").get<int>(),
                        h.at("path_completion").get<double>()});
      }
    }
    MetricsReport r;
    SummarizeEpisodes(rows, r);
    closed.push_back(rows.empty() ? Json() : SummaryToJson(r));
  }

  md << "## Offline evaluation (held-out split)\n\n"
     << "| Policy | Near-Coll. | Deviation (m) | Clearance (m) |\n"
     << "|---|---|---|---|\n";
  for (size_t k = 0; k < labels.size(); ++k) {
    const Json& o = offline[k];
    if (o.is_null()) continue;
    md << "| " << labels[k] << " | " << o.at("near_collision_count");
    if (k > 0 && !offline[0].is_null()) {
      md << " (" << Percent(offline[0].at("near_collision_count").get<double>(),
                            o.at("near_collision_count").get<double>()) << ")";
    }
    md << " | " << Fixed(o.at("mean_deviation").get<double>());
    if (k > 0 && !offline[0].is_null())
      md << " (" << Percent(offline[0].at("mean_deviation").get<double>(),
                            o.at("mean_deviation").get<double>()) << ")";
    md << " | " << Fixed(o.at("mean_min_clearance").get<double>());
    if (k > 0 && !offline[0].is_null())
      md << " (" << Percent(offline[0].at("mean_min_clearance").get<double>(),
                            o.at("mean_min_clearance").get<double>()) << ")";
    md << " |\n";
  }

  md << "\n## Closed-loop simulation\n\n"
     << "| Policy | Episodes | Success Rate | Avg. Min. Clearance (m) | "
        "Avg. Collisions | Path Completion |\n"
     << "|---|---|---|---|---|---|\n";
  for (size_t k = 0; k < labels.size(); ++k) {
    const Json& c = closed[k];
    if (c.is_null()) continue;
    md << "| " << labels[k] << " | " << c.at("episodes") << " | "
       << Fixed(100.0 * c.at("success_rate").get<double>(), 1) << "% | "
       << Fixed(c.at("mean_episode_clearance").get<double>()) << " | "
       << Fixed(c.at("mean_collisions").get<double>(), 2) << " | "
       << Fixed(c.at("mean_path_completion").get<double>(), 3) << " |\n";
  }

  md << "\n## Metric distributions (50 uniform bins)\n\n";
  for (size_t k = 0; k < labels.size(); ++k) {
    const Json& o = offline[k];
    if (o.is_null() || !o.contains("histograms")) continue;
    for (const char* metric : {"deviation", "min_clearance"}) {
      const Json& h = o["histograms"][metric];
      md << "- " << labels[k] << " " << metric << " ["
         << Fixed(h.at("lo").get<double>(), 3) << ", "
         << Fixed(h.at("hi").get<double>(), 3) << "]: ";
      bool first = true;
      for (const Json& c : h.at("counts")) {
        md << (first ? "" : " ") << c.get<size_t>();
        first = false;
      }
      md << "\n";
    }
  }
  return md.str();
}

}  // namespace cfnav
