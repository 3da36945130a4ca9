#include "cyclone/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cyclone/harness.hpp"
#include "cyclone/service.hpp"
#include "cyclone/trainer.hpp"

namespace cyclone {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void require_file(const std::string& path, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw UsageError(what + " '" + path + "' does not exist");
}

struct Common {
  std::string out_dir;
  int threads = 1;
  CLI::Option* threads_opt = nullptr;
  std::string strikeout = "zero";
  bool literal_signs = false;

  void add_to(CLI::App* app) {
    app->add_option("--out", out_dir, "Output directory (env CYCLONE_OUT_DIR, default .)");
    threads_opt = app->add_option("--threads", threads, "Worker threads (env CYCLONE_THREADS, default 1)");
    app->add_option("--strikeout", strikeout, "Score after three strikes")
        ->check(CLI::IsMember({"zero", "keep"}));
    app->add_flag("--literal-signs", literal_signs,
                  "Keep the two-strike misplay weight positive");
  }

  // Flags win over the environment, the environment over defaults.
  void resolve() {
    if (out_dir.empty()) {
      const char* env = std::getenv("CYCLONE_OUT_DIR");
      out_dir = env && *env ? env : ".";
    }
    if (threads_opt->count() == 0) {
      const char* env = std::getenv("CYCLONE_THREADS");
      if (env && *env) {
        try {
          threads = std::stoi(env);
        } catch (const std::exception&) {
          throw UsageError(std::string("CYCLONE_THREADS is not a number: ") + env);
        }
      } else {
        threads = 1;
      }
    }
    if (threads < 1) throw UsageError("thread count must be at least 1");
  }

  RulesConfig rules() const {
    RulesConfig r;
    r.strike_out = strikeout == "keep" ? StrikeOutScoring::KeepFireworks : StrikeOutScoring::Zero;
    return r;
  }

  fs::path path(const std::string& name) const { return fs::path(out_dir) / name; }

  Json echo() const {
    Json j;
    j["out"] = out_dir;
    j["strikeout"] = strikeout;
    j["literal_signs"] = literal_signs;
    return j;
  }
};

WeightVector resolve_agent(const std::string& spec, bool literal_signs) {
  if (auto p = parse_preset(spec)) return preset(*p, literal_signs);
  std::error_code ec;
  if (!fs::is_regular_file(spec, ec))
    throw UsageError("unknown agent '" + spec + "': not a preset name or weights file");
  WeightVector w = parse_weights(read_file(spec));
  if (w.name.empty()) w.name = fs::path(spec).stem().string();
  return w;
}

/// Writes the resolved configuration to `out` and to config.json.
void echo_config(std::ostream& out, const Common& common, Json config) {
  config["threads"] = common.threads;
  out << "config " << config.dump() << "\n";
  config.erase("threads");
  write_file(common.path("config.json"), config.dump(2) + "\n");
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SimArgs {
  Common common;
  std::string a = "self-play";
  std::string b;
  int n = 1000;
  std::uint64_t seed = 1;
  bool crossplay = false;
  std::vector<std::string> presets;
  bool logs = false;
  int bootstrap = 0;
};

int cmd_sim(SimArgs& args, std::ostream& out) {
  args.common.resolve();
  if (args.n < 1) throw UsageError("-n must be at least 1");
  SimulationOptions opts;
  opts.threads = args.common.threads;
  opts.rules = args.common.rules();

  Json config = args.common.echo();
  config["command"] = "sim";
  config["n"] = args.n;
  config["seed"] = args.seed;

  if (args.crossplay) {
    if (args.presets.empty())
      for (Preset p : kAllPresets) args.presets.emplace_back(preset_name(p));
    std::vector<WeightVector> agents;
    for (const auto& s : args.presets) agents.push_back(resolve_agent(s, args.common.literal_signs));
    if (agents.size() < 2) throw UsageError("crossplay needs at least two agents");
    config["mode"] = "crossplay";
    config["agents"] = args.presets;
    echo_config(out, args.common, config);
    const auto table = crossplay_matrix(agents, args.n, args.seed, opts);
    write_file(args.common.path("crossplay.json"), crossplay_json(table));
    const auto text = crossplay_text(table);
    write_file(args.common.path("crossplay.txt"), text);
    out << text;
    return kExitOk;
  }

  if (args.b.empty()) args.b = args.a;
  const WeightVector a = resolve_agent(args.a, args.common.literal_signs);
  const WeightVector b = resolve_agent(args.b, args.common.literal_signs);
  config["mode"] = "pair";
  config["a"] = args.a;
  config["b"] = args.b;
  config["logs"] = args.logs;
  config["bootstrap"] = args.bootstrap;
  echo_config(out, args.common, config);

  opts.keep_logs = args.logs;
  const auto result = simulate_games(a, b, args.n, args.seed, opts);
  Json stats = Json::parse(stats_json(result.stats));
  if (args.bootstrap > 0) {
    const auto [lo, hi] = bootstrap_ci95(result.scores, args.bootstrap, args.seed);
    stats["stats"]["bootstrap_ci95"] = {lo, hi};
  }
  write_file(args.common.path("stats.json"), stats.dump(2) + "\n");
  if (args.logs) {
    for (std::size_t i = 0; i < result.logs.size(); ++i) {
      char name[48];
      std::snprintf(name, sizeof name, "logs/game_%06zu.gamelog", i);
      write_file(args.common.path(name), serialize(result.logs[i]));
    }
  }
  const auto& s = result.stats;
  out << "sim a=" << s.label_a << " b=" << s.label_b << " n=" << s.n << " mean=" << fmt(s.mean)
      << " sd=" << fmt(s.sd) << " ci95=" << fmt(s.ci95) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string objective;
  std::string start;
  std::string partner = "human-like";
  std::string db;
  std::string name;
  int n = 200;
  std::uint64_t seed = 1;
  int max_rounds = 50;
  int max_halvings = 2;
  double min_step = 0.25;
  double relative_step = 0.25;
  bool fixed_step = false;
  std::string schedule;
  bool resume = false;
};

std::vector<std::array<Param, kFactorsPerExperiment>> parse_schedule(const std::string& text) {
  std::vector<std::array<Param, kFactorsPerExperiment>> out;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::stringstream names(group);
    std::string name;
    std::vector<Param> params;
    while (std::getline(names, name, ',')) {
      auto p = parse_param(name);
      if (!p) throw UsageError("unknown parameter '" + name + "' in schedule");
      params.push_back(*p);
    }
    if (params.size() != kFactorsPerExperiment)
      throw UsageError("each schedule group needs exactly four parameters");
    std::array<Param, kFactorsPerExperiment> g{};
    std::copy(params.begin(), params.end(), g.begin());
    out.push_back(g);
  }
  return out;
}

int cmd_train(TrainArgs& args, std::ostream& out) {
  args.common.resolve();
  if (args.n < 1) throw UsageError("-n must be at least 1");
  WeightVector start = resolve_agent(args.start, args.common.literal_signs);
  if (args.objective == "humanness") {
    if (args.db.empty()) throw UsageError("the humanness objective needs --db");
    require_file(args.db, "decision database");
  }
  std::optional<WeightVector> partner;
  if (args.objective == "paired") partner = resolve_agent(args.partner, args.common.literal_signs);

  TrainOptions opts;
  opts.schedule = args.schedule.empty() ? default_schedule(start) : parse_schedule(args.schedule);
  opts.min_step = args.min_step;
  opts.relative_step = args.relative_step;
  opts.fixed_step = args.fixed_step;
  opts.max_halvings = args.max_halvings;
  opts.max_rounds = args.max_rounds;
  opts.threads = args.common.threads;

  Json config = args.common.echo();
  config["command"] = "train";
  config["objective"] = args.objective;
  config["start"] = args.start;
  if (partner) config["partner"] = args.partner;
  if (!args.db.empty()) config["db"] = args.db;
  config["n"] = args.n;
  config["seed"] = args.seed;
  config["max_rounds"] = args.max_rounds;
  config["max_halvings"] = args.max_halvings;
  config["min_step"] = args.min_step;
  config["relative_step"] = args.relative_step;
  config["fixed_step"] = args.fixed_step;
  auto sched = Json::array();
  for (const auto& g : opts.schedule) {
    std::string s;
    for (Param p : g) s += (s.empty() ? "" : ",") + param_name(p);
    sched.push_back(s);
  }
  config["schedule"] = sched;
  config["resume"] = args.resume;
  echo_config(out, args.common, config);

  Objective objective;
  if (args.objective == "selfplay") {
    objective = make_selfplay_objective(args.n, args.seed, args.common.rules());
  } else if (args.objective == "paired") {
    objective = make_paired_objective(*partner, args.n, args.seed, args.common.rules());
  } else {
    const auto db = parse_decisions(read_file(args.db));
    if (db.records.empty()) throw std::runtime_error("decision database has no records");
    objective = make_humanness_objective(
        std::make_shared<const std::vector<DecisionCase>>(materialize(db)));
  }

  const fs::path audit_path = args.common.path("audit.jsonl");
  if (args.resume) {
    std::error_code ec;
    if (fs::is_regular_file(audit_path, ec)) opts.resume = read_audit_lines(read_file(audit_path));
  }
  fs::create_directories(args.common.out_dir);
  std::ofstream audit(audit_path, std::ios::binary | (opts.resume.empty() ? std::ios::trunc : std::ios::app));
  if (!audit) throw std::runtime_error("cannot write " + audit_path.string());
  opts.audit_sink = [&](const std::string& line) {
    audit << line << '\n';
    audit.flush();
  };

  TrainResult result = train_to_saturation(start, objective, opts);
  result.weights.name = args.name.empty() ? start.name + "-trained" : args.name;
  write_file(args.common.path("weights.json"), serialize_weights(result.weights));
  const auto& last = result.experiments.back();
  out << "train objective=" << objective.id << " rounds=" << result.rounds
      << " experiments=" << result.experiments.size()
      << " score=" << fmt(last.candidates[last.best].score.value, 4)
      << " capped=" << (result.capped ? "true" : "false") << "\n";
  if (result.capped) out << "warning " << result.warning << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct HumannessArgs {
  Common common;
  std::string agent;
  std::string db;
};

int cmd_humanness(HumannessArgs& args, std::ostream& out) {
  args.common.resolve();
  const WeightVector w = resolve_agent(args.agent, args.common.literal_signs);
  require_file(args.db, "decision database");
  Json config = args.common.echo();
  config["command"] = "humanness";
  config["agent"] = args.agent;
  config["db"] = args.db;
  echo_config(out, args.common, config);

  const auto db = parse_decisions(read_file(args.db));
  const auto rep = evaluate_humanness(w, db, args.common.threads);
  Json j;
  j["format"] = "cyclone-humanness";
  j["version"] = 1;
  j["agent"] = w.name;
  j["fraction"] = rep.fraction;
  j["matches"] = rep.matches;
  j["total"] = rep.total;
  auto records = Json::array();
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    const auto& r = db.records[i];
    Json rj;
    rj["game"] = r.game_id;
    rj["turn"] = r.turn;
    rj["seat"] = r.seat;
    rj["actor"] = r.actor_tag;
    rj["recorded"] = to_string(r.action);
    rj["recommended"] = to_string(rep.recommended[i]);
    rj["match"] = static_cast<bool>(rep.matched[i]);
    records.push_back(rj);
  }
  j["records"] = records;
  write_file(args.common.path("humanness.json"), j.dump(2) + "\n");
  out << "humanness agent=" << w.name << " matches=" << rep.matches << " total=" << rep.total
      << " fraction=" << fmt(rep.fraction, 4) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenDbArgs {
  Common common;
  std::string agent = "human-like";
  int n = 50;
  std::uint64_t seed = 1;
  std::string tag;
};

int cmd_gen_db(GenDbArgs& args, std::ostream& out) {
  args.common.resolve();
  if (args.n < 1) throw UsageError("-n must be at least 1");
  const WeightVector w = resolve_agent(args.agent, args.common.literal_signs);
  if (args.tag.empty()) args.tag = "preset:" + w.name;
  Json config = args.common.echo();
  config["command"] = "gen-db";
  config["agent"] = args.agent;
  config["n"] = args.n;
  config["seed"] = args.seed;
  config["tag"] = args.tag;
  echo_config(out, args.common, config);

  const auto db = generate_decisions(w, args.n, args.seed, args.tag);
  write_file(args.common.path("decisions.jsonl"), serialize_decisions(db));
  out << "gen-db agent=" << w.name << " games=" << db.games.size()
      << " records=" << db.records.size() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  Common common;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string capture_dir;
  std::uint64_t seed_base = 1;
  std::vector<std::string> agent_weights;
  std::string cors_origin = "*";
};

int cmd_serve(ServeArgs& args, std::ostream& out) {
  args.common.resolve();
  if (args.port < 0 || args.port > 65535) throw UsageError("port out of range");
  std::vector<WeightVector> extra;
  for (const auto& f : args.agent_weights) {
    require_file(f, "weights file");
    extra.push_back(resolve_agent(f, args.common.literal_signs));
  }
  SessionManager::Options opts;
  if (!args.capture_dir.empty()) opts.capture_dir = args.capture_dir;
  opts.rules = args.common.rules();
  opts.seed_base = args.seed_base;
  SessionManager sessions(opts);
  for (const auto& w : extra) sessions.add_agent(w);

  Json config = args.common.echo();
  config["command"] = "serve";
  config["host"] = args.host;
  config["port"] = args.port;
  config["capture_dir"] = args.capture_dir;
  config["seed_base"] = args.seed_base;
  config["agent_weights"] = args.agent_weights;
  config["threads"] = args.common.threads;
  out << "config " << config.dump() << "\n";

  HttpService http(sessions, args.cors_origin);
  out << "serving http://" << args.host << ":" << args.port << "/api/v1\n" << std::flush;
  if (!http.listen(args.host, args.port))
    throw std::runtime_error("cannot listen on " + args.host + ":" + std::to_string(args.port));
  return kExitOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void report(std::ostream& err, const char* kind, const std::string& message) {
  Json j;
  j["error"] = kind;
  j["message"] = one_line(message);
  err << j.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cyclone Hanabi agent: simulation, training, evaluation and live play", "cyclone"};
  app.require_subcommand(1);

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("sim", "Simulate games between two agents or a cross-play table");
  sim.common.add_to(sim_cmd);
  sim_cmd->add_option("--a", sim.a, "Agent A: preset name or weights file");
  sim_cmd->add_option("--b", sim.b, "Agent B (default: same as A)");
  sim_cmd->add_option("-n,--games", sim.n, "Games (per cell for cross-play)");
  sim_cmd->add_option("--seed", sim.seed, "Seed of the first game (default 1)");
  sim_cmd->add_flag("--crossplay", sim.crossplay, "Play every pairing of --presets");
  sim_cmd->add_option("--presets", sim.presets, "Agents for cross-play (default: all presets)")
      ->delimiter(',');
  sim_cmd->add_flag("--logs", sim.logs, "Write one game log per game under logs/");
  sim_cmd->add_option("--bootstrap", sim.bootstrap, "Also report a bootstrap CI with this many resamples");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train weights by full-factorial experiments");
  train.common.add_to(train_cmd);
  train_cmd->add_option("--objective", train.objective, "selfplay, paired or humanness")
      ->required()
      ->check(CLI::IsMember({"selfplay", "paired", "humanness"}));
  train_cmd->add_option("--start", train.start, "Starting weights: preset name or file")->required();
  train_cmd->add_option("--partner", train.partner, "Fixed partner for the paired objective");
  train_cmd->add_option("--db", train.db, "Decision database for the humanness objective");
  train_cmd->add_option("--name", train.name, "Name of the trained weights");
  train_cmd->add_option("-n,--games", train.n, "Games per candidate");
  train_cmd->add_option("--seed", train.seed, "First seed of the common seed block (default 1)");
  train_cmd->add_option("--max-rounds", train.max_rounds, "Round cap");
  train_cmd->add_option("--max-halvings", train.max_halvings, "Step halvings before stopping");
  train_cmd->add_option("--min-step", train.min_step, "Smallest step");
  train_cmd->add_option("--relative-step", train.relative_step, "Step as a fraction of |value|");
  train_cmd->add_flag("--fixed-step", train.fixed_step, "Always step by --min-step");
  train_cmd->add_option("--schedule", train.schedule,
                        "Groups of four parameters: a,b,c,d;e,f,g,h");
  train_cmd->add_flag("--resume", train.resume, "Continue from audit.jsonl in the output directory");

  HumannessArgs hum;
  auto* hum_cmd = app.add_subcommand("humanness", "Agreement of an agent with recorded decisions");
  hum.common.add_to(hum_cmd);
  hum_cmd->add_option("--agent", hum.agent, "Preset name or weights file")->required();
  hum_cmd->add_option("--db", hum.db, "Decision database")->required();

  GenDbArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-db", "Record the decisions of an agent in self-play");
  gen.common.add_to(gen_cmd);
  gen_cmd->add_option("--agent", gen.agent, "Preset name or weights file");
  gen_cmd->add_option("-n,--games", gen.n, "Games");
  gen_cmd->add_option("--seed", gen.seed, "Seed of the first game (default 1)");
  gen_cmd->add_option("--tag", gen.tag, "Actor tag (default preset:<name>)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP game service");
  serve.common.add_to(serve_cmd);
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port");
  serve_cmd->add_option("--capture-dir", serve.capture_dir, "Write logs and decisions here every turn");
  serve_cmd->add_option("--seed-base", serve.seed_base, "Seed of the first session without a seed");
  serve_cmd->add_option("--agent-weights", serve.agent_weights, "Extra agents from weights files");
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Access-Control-Allow-Origin value");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) return cmd_sim(sim, out);
    if (train_cmd->parsed()) return cmd_train(train, out);
    if (hum_cmd->parsed()) return cmd_humanness(hum, out);
    if (gen_cmd->parsed()) return cmd_gen_db(gen, out);
    if (serve_cmd->parsed()) return cmd_serve(serve, out);
  } catch (const UsageError& e) {
    report(err, "usage", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    report(err, "usage", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    report(err, "runtime", e.what());
    return kExitRuntime;
  }
  report(err, "usage", "no subcommand");
  return kExitUsage;
}

}  // namespace cyclone
