#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "rh/archive.hpp"
#include "rh/checkpoint.hpp"
#include "rh/config.hpp"
#include "rh/environment.hpp"
#include "rh/error.hpp"
#include "rh/heatmap.hpp"
#include "rh/synthetic.hpp"
#include "rh/tracks_csv.hpp"
#include "rh/trainer.hpp"

#ifndef RH_VERSION
#define RH_VERSION "0.0.0"
#endif

namespace rh {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Relative output paths land under $RHPLAN_OUT_DIR when it is set.
fs::path output_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("RHPLAN_OUT_DIR"); dir != nullptr && *dir != '\0') {
      return fs::path(dir) / path;
    }
  }
  return path;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_output(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  write_text_file(p, text);
}

struct Manifest {
  json j;
  explicit Manifest(const std::string& command, std::uint64_t seed) {
    j["tool"] = "rhplan";
    j["version"] = RH_VERSION;
    j["command"] = command;
    j["seed"] = seed;
    j["inputs"] = json::array();
    j["outputs"] = json::array();
  }
  void seeds(std::initializer_list<std::string_view> tags) {
    const std::uint64_t seed = j["seed"];
    json s = json::object();
    for (auto t : tags) s[std::string(t)] = fmt::format("{:016x}", derive_seed(seed, t));
    j["derived_seeds"] = s;
  }
  void input(const fs::path& p) {
    j["inputs"].push_back({{"path", p.string()}, {"hash", text_hash(read_text_file(p))}});
  }
  void output(const fs::path& p) {
    j["outputs"].push_back({{"path", p.string()}, {"hash", text_hash(read_text_file(p))}});
  }
  void config(const std::string& path, const Settings& s) {
    const std::string text = dump_config(s);
    j["config"] = {{"path", path}, {"resolved_hash", text_hash(text)}};
  }
  void write(const fs::path& p) const { write_output(p, j.dump(2) + "\n"); }
};

fs::path manifest_for(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

Settings settings_from(const std::string& config_path) {
  return config_path.empty() ? parse_config("") : load_config(config_path);
}

std::vector<fs::path> expand_scenarios(const std::vector<std::string>& items) {
  std::vector<fs::path> out;
  for (const auto& item : items) {
    const fs::path p(item);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".rhscn") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw IoError(fmt::format("no .rhscn archives in '{}'", item));
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

struct EpisodeRun {
  std::vector<Transition> transitions;
  std::vector<RoadState> history;
  EpisodeStart start;
  Termination reason = Termination::kNone;
  std::string debug;
};

struct StartOverride {
  std::optional<double> s;
  std::optional<int> lane;
};

EpisodeRun run_episode(const Scenario& sc, const Settings& st, RuleId phase, const ValueNet* net,
                       std::uint64_t seed, const StartOverride& over, bool debug) {
  ScenarioContext ctx(sc);
  EnvParams env = st.train.env;
  if (net == nullptr) env.weights.value = 0.0;
  EpisodeStart start;
  if (over.s || over.lane) {
    start.s = over.s.value_or(sc.ego.goal_s - 0.5 * (env.start_min + env.start_max));
    start.lane = over.lane.value_or(0);
    start.speed = env.start_speed;
    if (start.lane < 0 || start.lane >= ctx.frame.lane_count()) {
      throw RangeError(fmt::format("lane {} does not exist", start.lane));
    }
  } else {
    Rng rng = make_rng(seed, "replay");
    const auto s = sample_start(ctx, env, rng);
    if (!s) throw DataError("no collision-free start position in the scenario");
    start = *s;
  }
  EpisodeRun run;
  run.start = start;
  Episode ep(ctx, phase, env, start, 0);
  if (debug) ep.set_debug_sink(&run.debug);
  std::optional<GraphCritic> critic;
  if (net != nullptr) critic.emplace(*net, ctx, env.graph);
  while (!ep.finished()) {
    auto steps = ep.advance(critic ? &*critic : nullptr, env.substeps());
    for (auto& t : steps) run.transitions.push_back(std::move(t));
  }
  run.history = ep.history();
  run.reason = ep.termination();
  return run;
}

// Rounds values that would print as "-0.000000" to zero.
double tidy(double v) { return std::abs(v) < 5e-7 ? 0.0 : v; }

std::string trajectory_csv(const Scenario& sc, const EpisodeRun& run) {
  const FrenetFrame frame = sc.lanes.frame(sc.ego.direction);
  std::string out = "step,t,x,y,heading,vx,vy,s,d,vs,vd\n";
  for (std::size_t i = 0; i < run.history.size(); ++i) {
    const RoadState& r = run.history[i];
    const int step = run.start.step + static_cast<int>(i);
    const Vec2 p = frame.to_cartesian({r.s, r.d});
    const Vec2 v = frame.velocity_to_cartesian(r.vs, r.vd);
    out += fmt::format("{},{:.2f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", step,
                       step * sc.timestep, tidy(p.x), tidy(p.y), tidy(frame.heading_to_cartesian(r.heading)),
                       tidy(v.x), tidy(v.y), tidy(r.s), tidy(r.d), tidy(r.vs), tidy(r.vd));
  }
  return out;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const PlannerError*>(&e) || dynamic_cast<const StateError*>(&e) ||
      dynamic_cast<const TrainingError*>(&e) || dynamic_cast<const ParameterError*>(&e)) {
    return 3;
  }
  return 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rule-compliance toolkit for highway driving: scenarios, STL rule monitoring, "
               "a Frenet lattice planner and a graph value critic.",
               "rhplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RH_VERSION);
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string config_path;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Run seed; every component stream derives from it")->capture_default_str();
    c->add_option("--config", config_path, "Flat [section] key = value configuration file");
    c->add_option("--jobs", jobs, "Worker cap")->check(CLI::PositiveNumber)->capture_default_str();
  };

  // version
  auto* version = app.add_subcommand("version", "Print the version");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert highD-style CSVs into a scenario archive");
  std::string meta_path, tracks_path, out_path;
  double ingest_dt = 0.1;
  ingest->add_option("--meta", meta_path, "Recording meta CSV")->required();
  ingest->add_option("--tracks", tracks_path, "Tracks CSV")->required();
  ingest->add_option("--out", out_path, "Scenario archive to write")->required();
  ingest->add_option("--timestep", ingest_dt, "Resampling step in seconds, 0 keeps the file rate")
      ->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic scenario archives");
  SyntheticSpec spec;
  int count = 1;
  bool with_sign = false, braking = false;
  synth->add_option("--out", out_path, "Archive path, or a directory when --count > 1")->required();
  synth->add_option("--count", count, "Number of scenarios")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--lanes", spec.lanes, "Lane count")->capture_default_str();
  synth->add_option("--vehicles", spec.vehicles, "Vehicle count")->capture_default_str();
  synth->add_option("--duration", spec.duration, "Seconds")->capture_default_str();
  synth->add_option("--road-length", spec.road_length, "Metres")->capture_default_str();
  synth->add_option("--speed-min", spec.speed_min, "m/s")->capture_default_str();
  synth->add_option("--speed-max", spec.speed_max, "m/s")->capture_default_str();
  synth->add_option("--lane-changes", spec.lane_changes, "Lane changes to insert")->capture_default_str();
  synth->add_flag("--braking", braking, "Add a braking event at t = 10 s");
  synth->add_flag("--sign", with_sign, "Insert a no-overtaking sign");
  add_common(synth);

  // train
  auto* train = app.add_subcommand("train", "Train a value critic for one rule phase");
  std::vector<std::string> scenario_paths;
  std::string out_dir = "train_out";
  std::string phase_text;
  int steps_override = -1;
  train->add_option("--scenario", scenario_paths, "Scenario archives or directories")->required();
  train->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  train->add_option("--phase", phase_text, "Rule phase (G1, I6, I2); overrides the config");
  train->add_option("--steps", steps_override, "Total environment steps; overrides the config");
  add_common(train);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Rule-compliance report for one planned episode");
  std::string scenario_path, checkpoint_path, report_path;
  std::optional<double> start_s;
  std::optional<int> start_lane;
  evaluate->add_option("--scenario", scenario_path, "Scenario archive")->required();
  evaluate->add_option("--checkpoint", checkpoint_path, "Critic checkpoint (omit for the baseline)");
  evaluate->add_option("--phase", phase_text, "Rule whose reward is reported");
  evaluate->add_option("--out", report_path, "JSON report path (default: stdout)");
  evaluate->add_option("--start-s", start_s, "Ego start position along the road");
  evaluate->add_option("--start-lane", start_lane, "Ego start lane, 0 = rightmost");
  add_common(evaluate);

  // heatmap
  auto* heatmap = app.add_subcommand("heatmap", "Value or robustness grid over the road");
  std::string quantity = "robustness", rule_text = "I6", csv_path, svg_path;
  std::optional<double> ego_speed, cell_long, cell_lat;
  std::optional<int> time_index;
  heatmap->add_option("--scenario", scenario_path, "Scenario archive")->required();
  heatmap->add_option("--quantity", quantity, "value, value-margin or robustness")
      ->check(CLI::IsMember({"value", "value-margin", "robustness"}))
      ->capture_default_str();
  heatmap->add_option("--rule", rule_text, "Rule for robustness grids")->capture_default_str();
  heatmap->add_option("--checkpoint", checkpoint_path, "Critic checkpoint for value grids");
  heatmap->add_option("--ego-speed", ego_speed, "Ego template speed (m/s)");
  heatmap->add_option("--time-index", time_index, "Scenario step of the replayed traffic");
  heatmap->add_option("--cell-long", cell_long, "Cell length along the road (m)");
  heatmap->add_option("--cell-lat", cell_lat, "Cell width across the road (m)");
  heatmap->add_option("--csv", csv_path, "CSV output");
  heatmap->add_option("--svg", svg_path, "SVG output");
  add_common(heatmap);

  // replay
  auto* replay = app.add_subcommand("replay", "Run the planner over an archive and log the ego");
  std::string robustness_path, debug_path;
  replay->add_option("--scenario", scenario_path, "Scenario archive")->required();
  replay->add_option("--checkpoint", checkpoint_path, "Critic checkpoint (omit for the baseline)");
  replay->add_option("--out", out_path, "Ego trajectory CSV")->required();
  replay->add_option("--robustness", robustness_path, "Rule robustness trace CSV (default: <out>.robustness.csv)");
  replay->add_option("--debug-candidates", debug_path, "Per-plan candidate table CSV");
  replay->add_option("--phase", phase_text, "Rule whose reward is logged");
  replay->add_option("--start-s", start_s, "Ego start position along the road");
  replay->add_option("--start-lane", start_lane, "Ego start lane, 0 = rightmost");
  add_common(replay);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << RH_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "rhplan: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (version->parsed()) {
      out << "rhplan " << RH_VERSION << "\n";
      return 0;
    }

    if (ingest->parsed()) {
      Scenario sc = parse_tracks_csv(read_text_file(meta_path), read_text_file(tracks_path));
      if (ingest_dt > 0.0) sc = resample(sc, ingest_dt);
      const fs::path o = output_path(out_path);
      ensure_parent(o);
      save_archive(sc, o);
      Manifest m("ingest", 0);
      m.input(meta_path);
      m.input(tracks_path);
      m.j["timestep"] = sc.timestep;
      m.output(o);
      m.write(manifest_for(o));
      out << fmt::format("wrote {} ({} tracks, {} steps of {} s)\n", o.string(), sc.tracks.size(),
                         sc.steps, sc.timestep);
      return 0;
    }

    if (synth->parsed()) {
      if (braking) spec.braking = BrakingEvent{};
      Manifest m("synth", seed);
      std::vector<fs::path> written;
      if (count == 1) {
        Scenario sc = generate_synthetic_scenario(spec, seed);
        if (with_sign) sc = insert_no_overtaking_sign(std::move(sc), seed);
        const fs::path o = output_path(out_path);
        ensure_parent(o);
        save_archive(sc, o);
        written.push_back(o);
        m.seeds({"synth", "sign"});
      } else {
        const auto set = generate_scenario_set(spec, count, seed, with_sign);
        const fs::path dir = output_path(out_path);
        fs::create_directories(dir);
        for (std::size_t i = 0; i < set.size(); ++i) {
          const fs::path o = dir / fmt::format("scenario_{:03d}.rhscn", i);
          save_archive(set[i], o);
          written.push_back(o);
        }
      }
      m.j["spec"] = {{"lanes", spec.lanes},           {"vehicles", spec.vehicles},
                     {"duration", spec.duration},     {"road_length", spec.road_length},
                     {"speed_min", spec.speed_min},   {"speed_max", spec.speed_max},
                     {"lane_changes", spec.lane_changes}, {"braking", braking},
                     {"sign", with_sign},             {"count", count}};
      for (const auto& o : written) m.output(o);
      const fs::path mpath = count == 1 ? manifest_for(written[0]) : output_path(out_path) / "manifest.json";
      m.write(mpath);
      out << fmt::format("wrote {} scenario(s)\n", written.size());
      return 0;
    }

    if (train->parsed()) {
      Settings st = settings_from(config_path);
      if (!phase_text.empty()) st.train.phase = rule_from_string(phase_text);
      if (steps_override >= 0) st.train.total_steps = steps_override;
      st.train.seed = seed;
      const auto paths = expand_scenarios(scenario_paths);
      std::vector<Scenario> scenarios;
      for (const auto& p : paths) scenarios.push_back(load_archive(p));
      const fs::path dir = output_path(out_dir);
      fs::create_directories(dir);
      TrainResult res = train_phase(scenarios, st.train, [&](const RoundMetrics& r) {
        err << fmt::format("round {}: explained variance {}, episode reward mean {}, loss {:.6g}\n",
                           r.round,
                           r.explained_variance ? fmt::format("{:.4f}", *r.explained_variance) : "n/a",
                           r.episode_reward_mean ? fmt::format("{:.2f}", *r.episode_reward_mean) : "n/a",
                           r.mean_loss);
      });
      json extra = {{"phase", std::string(to_string(st.train.phase))},
                    {"seed", seed},
                    {"total_steps", st.train.total_steps},
                    {"rounds", res.history.size()},
                    {"parameter_hash", fmt::format("{:016x}", parameter_hash(res.net))}};
      const fs::path ckpt = dir / "critic.rhnet";
      save_checkpoint(ckpt, res.net, extra.dump());
      write_output(dir / "metrics.csv", metrics_csv(res.history));
      std::string episodes = "episode,scenario,steps,total_reward,rule_reward,progression_reward,termination\n";
      for (const EpisodeLog& e : res.episodes) {
        episodes += fmt::format("{},{},{},{:.9g},{:.9g},{:.9g},{}\n", e.id, e.scenario, e.steps,
                                e.total_reward, e.total_rule, e.total_progression, to_string(e.reason));
      }
      write_output(dir / "episodes.csv", episodes);
      Manifest m("train", seed);
      m.seeds({"init", "episode", "shuffle"});
      m.config(config_path, st);
      for (const auto& p : paths) m.input(p);
      m.j["skipped_scenarios"] = res.skipped_scenarios;
      for (const char* f : {"critic.rhnet", "critic.rhnet.json", "metrics.csv", "episodes.csv"}) m.output(dir / f);
      if (res.error) m.j["error"] = *res.error;
      m.write(dir / "manifest.json");
      if (res.error) {
        err << "rhplan: training aborted: " << *res.error << " (last good parameters saved)\n";
        return 3;
      }
      out << fmt::format("wrote {} ({} rounds)\n", ckpt.string(), res.history.size());
      return 0;
    }

    if (evaluate->parsed() || replay->parsed()) {
      Settings st = settings_from(config_path);
      const RuleId phase = phase_text.empty() ? st.train.phase : rule_from_string(phase_text);
      const Scenario sc = load_archive(scenario_path);
      std::optional<ValueNet> net;
      if (!checkpoint_path.empty()) net = load_checkpoint(checkpoint_path);
      const bool want_debug = replay->parsed() && !debug_path.empty();
      const EpisodeRun run = run_episode(sc, st, phase, net ? &*net : nullptr, seed,
                                         {start_s, start_lane}, want_debug);
      WorldView world(sc, EgoTrack{run.start.step, run.history});
      const RuleBookReport book = rulebook_evaluate(world, st.train.env.rules);
      double total = 0.0;
      for (const auto& t : run.transitions) total += t.reward;

      Manifest m(evaluate->parsed() ? "evaluate" : "replay", seed);
      m.seeds({"replay"});
      m.config(config_path, st);
      m.input(scenario_path);
      if (!checkpoint_path.empty()) m.input(checkpoint_path);

      if (evaluate->parsed()) {
        json rep;
        rep["scenario"] = scenario_path;
        rep["critic"] = checkpoint_path.empty() ? json(nullptr) : json(checkpoint_path);
        rep["start"] = {{"s", run.start.s}, {"lane", run.start.lane}, {"speed", run.start.speed}};
        rep["steps"] = run.transitions.size();
        rep["termination"] = std::string(to_string(run.reason));
        rep["reward_phase"] = std::string(to_string(phase));
        rep["episode_reward"] = total;
        json rules = json::object();
        for (RuleId r : kRules) {
          const auto i = static_cast<std::size_t>(r);
          rules[std::string(to_string(r))] = {{"min_robustness", book.minimum[i]},
                                              {"violations", book.violations[i]},
                                              {"violated", book.verdict.violated[i]}};
        }
        rep["rules"] = rules;
        rep["tie_break"] = book.verdict.tie_break;
        const std::string text = rep.dump(2) + "\n";
        if (report_path.empty()) {
          out << text;
        } else {
          const fs::path o = output_path(report_path);
          write_output(o, text);
          m.output(o);
          m.write(manifest_for(o));
        }
        return 0;
      }

      const fs::path o = output_path(out_path);
      write_output(o, trajectory_csv(sc, run));
      const fs::path rob = robustness_path.empty() ? fs::path(o.string() + ".robustness.csv")
                                                   : output_path(robustness_path);
      write_output(rob, robustness_csv(book, world));
      m.output(o);
      m.output(rob);
      if (want_debug) {
        const fs::path d = output_path(debug_path);
        write_output(d, run.debug);
        m.output(d);
      }
      m.j["termination"] = std::string(to_string(run.reason));
      m.write(manifest_for(o));
      out << fmt::format("wrote {} ({} steps, {})\n", o.string(), run.history.size() - 1,
                         to_string(run.reason));
      return 0;
    }

    if (heatmap->parsed()) {
      Settings st = settings_from(config_path);
      if (ego_speed) st.eval.ego.speed = *ego_speed;
      if (time_index) st.eval.time_index = *time_index;
      if (cell_long) st.eval.grid.cell_long = *cell_long;
      if (cell_lat) st.eval.grid.cell_lat = *cell_lat;
      if (csv_path.empty() && svg_path.empty()) {
        err << "rhplan: heatmap needs --csv and/or --svg\n\n" << heatmap->help();
        return 1;
      }
      const Scenario sc = load_archive(scenario_path);
      if (st.eval.time_index >= sc.steps) {
        throw RangeError(fmt::format("time index {} beyond the scenario's {} steps", st.eval.time_index, sc.steps));
      }
      Manifest m("heatmap", seed);
      m.config(config_path, st);
      m.input(scenario_path);
      EvalGrid grid;
      if (quantity != "robustness") {
        if (checkpoint_path.empty()) {
          err << "rhplan: value heatmaps need --checkpoint\n\n" << heatmap->help();
          return 1;
        }
        const ValueNet net = load_checkpoint(checkpoint_path);
        m.input(checkpoint_path);
        grid = quantity == "value"
                   ? value_heatmap(net, sc, st.eval.time_index, st.eval.ego, st.eval.grid, st.train.env.graph)
                   : value_margin_heatmap(net, sc, st.eval.time_index, st.eval.ego, st.eval.grid,
                                          st.train.env.graph);
      } else {
        grid = robustness_heatmap(rule_from_string(rule_text), sc, st.eval.time_index, st.eval.ego,
                                  st.eval.grid, st.train.env.rules);
      }
      fs::path first;
      if (!csv_path.empty()) {
        const fs::path o = output_path(csv_path);
        write_output(o, grid_csv(grid));
        m.output(o);
        first = o;
      }
      if (!svg_path.empty()) {
        const fs::path o = output_path(svg_path);
        write_output(o, grid_svg(grid));
        m.output(o);
        if (first.empty()) first = o;
      }
      m.write(manifest_for(first));
      out << fmt::format("wrote {} grid {}x{}\n", grid.quantity, grid.rows, grid.cols);
      return 0;
    }
  } catch (const Error& e) {
    err << "rhplan: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "rhplan: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "rhplan: internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace rh
