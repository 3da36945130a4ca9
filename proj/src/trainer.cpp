#include "cyclone/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace cyclone {

namespace {

constexpr std::string_view kAuditFormat = "cyclone-train-audit";
constexpr int kAuditVersion = 1;
constexpr std::array<std::string_view, 3> kCurveParamNames{"curve.floor", "curve.amplitude",
                                                           "curve.exponent"};

using Json = nlohmann::ordered_json;

Json weights_json(const WeightVector& w) { return Json::parse(serialize_weights(w)); }

}  // namespace

std::string param_name(Param p) {
  const int i = static_cast<int>(p);
  if (i < kNumFactors) return std::string(factor_name(static_cast<Factor>(i)));
  return std::string(kCurveParamNames[i - kNumFactors]);
}

std::optional<Param> parse_param(std::string_view name) {
  if (auto f = parse_factor(name)) return param_of(*f);
  for (int i = 0; i < 3; ++i)
    if (kCurveParamNames[i] == name) return static_cast<Param>(kNumFactors + i);
  return std::nullopt;
}

double get_param(const WeightVector& w, Param p) {
  switch (p) {
    case Param::CurveFloor: return w.curve.floor;
    case Param::CurveAmplitude: return w.curve.amplitude;
    case Param::CurveExponent: return w.curve.exponent;
    default: return w.w[static_cast<int>(p)];
  }
}

void set_param(WeightVector& w, Param p, double value) {
  switch (p) {
    case Param::CurveFloor: w.curve.floor = value; break;
    case Param::CurveAmplitude: w.curve.amplitude = value; break;
    case Param::CurveExponent: w.curve.exponent = value; break;
    default: w.w[static_cast<int>(p)] = value; break;
  }
}

bool trainable(const WeightVector& w, Param p) {
  const int i = static_cast<int>(p);
  return i >= kNumFactors || w.dominance[i] == 0;
}

bool feasible(const WeightVector& w) {
  for (double v : w.w)
    if (!std::isfinite(v)) return false;
  return std::isfinite(w.curve.floor) && std::isfinite(w.curve.amplitude) &&
         std::isfinite(w.curve.exponent) && w.curve.exponent > 0.0;
}

// ---------------------------------------------------------------------------
// Objectives

ObjectiveValue objective_selfplay(const WeightVector& w, int games, std::uint64_t seed_base,
                                  const RulesConfig& rules) {
  return objective_paired(w, w, games, seed_base, rules);
}

ObjectiveValue objective_paired(const WeightVector& w, const WeightVector& partner, int games,
                                std::uint64_t seed_base, const RulesConfig& rules) {
  if (games < 1) throw ContractViolation("game objectives need at least one game");
  SimulationOptions opts;
  opts.rules = rules;
  const auto r = simulate_games(w, partner, games, seed_base, opts);
  return {r.stats.mean, r.stats.ci95};
}

ObjectiveValue objective_humanness(const WeightVector& w, std::span<const DecisionCase> cases) {
  if (cases.empty()) throw TrainerError("humanness objective needs a non-empty decision database");
  const double f = humanness(w, cases);
  const double n = static_cast<double>(cases.size());
  return {f, 1.96 * std::sqrt(f * (1.0 - f) / n)};
}

namespace {

std::string seed_range(int games, std::uint64_t seed_base) {
  return "seeds " + std::to_string(seed_base) + ".." +
         std::to_string(seed_base + static_cast<std::uint64_t>(games) - 1);
}

}  // namespace

Objective make_selfplay_objective(int games, std::uint64_t seed_base, const RulesConfig& rules) {
  if (games < 1) throw ContractViolation("game objectives need at least one game");
  return {"selfplay", seed_range(games, seed_base), [=](const WeightVector& w) {
            return objective_selfplay(w, games, seed_base, rules);
          }};
}

Objective make_paired_objective(WeightVector partner, int games, std::uint64_t seed_base,
                                const RulesConfig& rules) {
  if (games < 1) throw ContractViolation("game objectives need at least one game");
  std::string id = "paired:" + partner.name;
  return {std::move(id), seed_range(games, seed_base),
          [partner = std::move(partner), games, seed_base, rules](const WeightVector& w) {
            return objective_paired(w, partner, games, seed_base, rules);
          }};
}

Objective make_humanness_objective(std::shared_ptr<const std::vector<DecisionCase>> cases) {
  if (!cases || cases->empty())
    throw TrainerError("humanness objective needs a non-empty decision database");
  std::string block = std::to_string(cases->size()) + " decisions";
  return {"humanness", std::move(block), [cases = std::move(cases)](const WeightVector& w) {
            return objective_humanness(w, *cases);
          }};
}

// ---------------------------------------------------------------------------
// Experiments

std::vector<Candidate> design_candidates(const DesignExperiment& exp) {
  for (int k = 0; k < kFactorsPerExperiment; ++k) {
    if (!trainable(exp.base, exp.params[k]))
      throw ConfigError("parameter " + param_name(exp.params[k]) + " has an infinite weight");
    if (!(exp.steps[k] > 0.0) || !std::isfinite(exp.steps[k]))
      throw ConfigError("step for " + param_name(exp.params[k]) + " must be positive");
    for (int m = 0; m < k; ++m)
      if (exp.params[m] == exp.params[k])
        throw ConfigError("parameter " + param_name(exp.params[k]) + " chosen twice");
  }
  std::vector<Candidate> out(kCandidatesPerExperiment);
  for (int c = 0; c < kCandidatesPerExperiment; ++c) {
    Candidate& cand = out[c];
    cand.weights = exp.base;
    int rest = c;
    for (int k = kFactorsPerExperiment - 1; k >= 0; --k) {
      cand.levels[k] = rest % kLevels - 1;
      rest /= kLevels;
    }
    for (int k = 0; k < kFactorsPerExperiment; ++k) {
      if (cand.levels[k] == 0) continue;
      const double v = get_param(exp.base, exp.params[k]) + cand.levels[k] * exp.steps[k];
      set_param(cand.weights, exp.params[k], v);
    }
    cand.feasible = feasible(cand.weights);
  }
  return out;
}

namespace {

int moved(const Candidate& c) {
  int n = 0;
  for (int l : c.levels) n += l != 0;
  return n;
}

// Ties with the base keep the base. Among equal improvements the smallest
// move wins, then the earliest candidate, so parameters the objective
// ignores do not drift.
void pick_best(ExperimentResult& r) {
  r.best = kBaseCandidate;
  double best = r.candidates[kBaseCandidate].score.value;
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const auto& c = r.candidates[i];
    if (!c.feasible) continue;
    const bool better = c.score.value > best ||
                        (r.best != kBaseCandidate && c.score.value == best &&
                         moved(c) < moved(r.candidates[r.best]));
    if (better) {
      best = c.score.value;
      r.best = i;
    }
  }
  r.saturated = r.best == kBaseCandidate;
}

std::string levels_text(const std::array<int, kFactorsPerExperiment>& levels) {
  std::string s = "[";
  for (int k = 0; k < kFactorsPerExperiment; ++k) {
    if (k) s += ',';
    s += std::to_string(levels[k]);
  }
  return s + "]";
}

}  // namespace

ExperimentResult run_experiment(const DesignExperiment& exp, const Objective& objective,
                                int threads) {
  if (!objective.eval) throw TrainerError("objective '" + objective.id + "' is not registered");
  ExperimentResult r;
  r.experiment = exp;
  r.candidates = design_candidates(exp);
  if (!r.candidates[kBaseCandidate].feasible)
    throw TrainerError("base weights have an unusable give-up curve");
  parallel_for(r.candidates.size(), threads, [&](std::size_t i) {
    Candidate& c = r.candidates[i];
    if (!c.feasible) {
      c.score = {-std::numeric_limits<double>::infinity(), 0.0};
      return;
    }
    try {
      c.score = objective.eval(c.weights);
    } catch (const std::exception& e) {
      throw TrainerError("candidate " + std::to_string(i) + " " + levels_text(c.levels) + ": " +
                         e.what());
    }
  });
  pick_best(r);
  return r;
}

std::vector<std::array<Param, kFactorsPerExperiment>> default_schedule(const WeightVector& w) {
  std::vector<Param> params;
  for (int i = 0; i < kNumParams; ++i)
    if (trainable(w, static_cast<Param>(i))) params.push_back(static_cast<Param>(i));
  if (params.size() < kFactorsPerExperiment)
    throw ConfigError("fewer than four trainable parameters");
  std::vector<std::array<Param, kFactorsPerExperiment>> out;
  const std::size_t groups = (params.size() + kFactorsPerExperiment - 1) / kFactorsPerExperiment;
  for (std::size_t g = 0; g < groups; ++g) {
    std::array<Param, kFactorsPerExperiment> group{};
    for (int k = 0; k < kFactorsPerExperiment; ++k)
      group[k] = params[(g * kFactorsPerExperiment + k) % params.size()];
    out.push_back(group);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audit trail

namespace {

Json header_record(const WeightVector& start, const Objective& objective, const TrainOptions& o,
                   const std::vector<std::array<Param, kFactorsPerExperiment>>& schedule) {
  Json j;
  j["format"] = kAuditFormat;
  j["version"] = kAuditVersion;
  j["objective"] = objective.id;
  j["seed_block"] = objective.seed_block;
  auto sched = Json::array();
  for (const auto& g : schedule) {
    auto names = Json::array();
    for (Param p : g) names.push_back(param_name(p));
    sched.push_back(names);
  }
  j["schedule"] = sched;
  j["min_step"] = o.min_step;
  j["relative_step"] = o.relative_step;
  j["fixed_step"] = o.fixed_step;
  j["max_halvings"] = o.max_halvings;
  j["max_rounds"] = o.max_rounds;
  j["start"] = weights_json(start);
  return j;
}

Json experiment_record(const ExperimentResult& r, int round, int number, int scale) {
  Json j;
  j["type"] = "experiment";
  j["number"] = number;
  j["round"] = round;
  j["scale"] = scale;
  auto names = Json::array();
  for (Param p : r.experiment.params) names.push_back(param_name(p));
  j["params"] = names;
  j["steps"] = r.experiment.steps;
  j["base"] = weights_json(r.experiment.base);
  auto cands = Json::array();
  for (const auto& c : r.candidates) {
    Json cj;
    cj["levels"] = c.levels;
    if (c.feasible) {
      cj["value"] = c.score.value;
      cj["ci95"] = c.score.ci95;
    } else {
      cj["value"] = nullptr;
    }
    cands.push_back(cj);
  }
  j["candidates"] = cands;
  j["best"] = r.best;
  j["saturated"] = r.saturated;
  return j;
}

struct Resumed {
  std::vector<Json> experiments;
  bool done = false;
};

Resumed parse_resume(const std::vector<std::string>& lines, const Json& header) {
  Resumed out;
  if (lines.empty()) return out;
  Json first;
  try {
    first = Json::parse(lines.front());
  } catch (const nlohmann::json::exception& e) {
    throw TrainerError(std::string("audit header is not JSON: ") + e.what());
  }
  if (first != header) throw TrainerError("audit trail belongs to a different training run");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    Json j;
    try {
      j = Json::parse(lines[i]);
    } catch (const nlohmann::json::exception&) {
      // A torn final line from an interrupted write is dropped.
      if (i + 1 == lines.size()) break;
      throw TrainerError("audit record " + std::to_string(i) + " is not JSON");
    }
    const auto type = j.value("type", std::string());
    if (type == "experiment")
      out.experiments.push_back(std::move(j));
    else if (type == "done")
      out.done = true;
  }
  return out;
}

ExperimentResult from_record(const DesignExperiment& exp, const Json& rec) {
  ExperimentResult r;
  r.experiment = exp;
  r.candidates = design_candidates(exp);
  const auto& cands = rec.at("candidates");
  if (cands.size() != r.candidates.size()) throw TrainerError("audit record has wrong size");
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto& cj = cands[i];
    auto& c = r.candidates[i];
    if (cj.at("value").is_null()) {
      c.score = {-std::numeric_limits<double>::infinity(), 0.0};
    } else {
      c.score = {cj.at("value").get<double>(), cj.value("ci95", 0.0)};
    }
  }
  pick_best(r);
  return r;
}

}  // namespace

std::vector<std::string> read_audit_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    if (nl > pos) out.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

TrainResult train_to_saturation(const WeightVector& start, const Objective& objective,
                                const TrainOptions& opts) {
  if (opts.max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
  if (opts.max_halvings < 0) throw ConfigError("max_halvings must be non-negative");
  if (!(opts.min_step > 0.0)) throw ConfigError("min_step must be positive");
  if (opts.relative_step < 0.0) throw ConfigError("relative_step must be non-negative");
  if (!feasible(start)) throw ConfigError("start weights have an unusable give-up curve");
  const auto schedule = opts.schedule.empty() ? default_schedule(start) : opts.schedule;
  // Every trainable parameter must be visited once per round.
  for (int i = 0; i < kNumParams; ++i) {
    const auto p = static_cast<Param>(i);
    if (!trainable(start, p)) continue;
    bool covered = false;
    for (const auto& g : schedule) covered |= std::find(g.begin(), g.end(), p) != g.end();
    if (!covered) throw ConfigError("schedule never visits " + param_name(p));
  }

  const Json header = header_record(start, objective, opts, schedule);
  const Resumed resumed = parse_resume(opts.resume, header);
  auto emit = [&](const Json& j) {
    if (opts.audit_sink) opts.audit_sink(j.dump());
  };
  if (opts.resume.empty()) emit(header);

  TrainResult out;
  out.weights = start;
  int scale = 0;
  int number = 0;
  bool finished = false;
  for (int round = 1; round <= opts.max_rounds && !finished; ++round) {
    out.rounds = round;
    bool improved = false;
    const double factor = std::ldexp(1.0, -scale);
    for (const auto& group : schedule) {
      DesignExperiment exp;
      exp.base = out.weights;
      exp.params = group;
      for (int k = 0; k < kFactorsPerExperiment; ++k) {
        const double v = get_param(out.weights, group[k]);
        const double raw =
            opts.fixed_step ? opts.min_step : std::max(opts.min_step, opts.relative_step * std::abs(v));
        exp.steps[k] = raw * factor;
      }
      ExperimentResult r;
      if (static_cast<std::size_t>(number) < resumed.experiments.size()) {
        const Json& rec = resumed.experiments[number];
        if (rec.at("base") != weights_json(exp.base) ||
            rec.at("steps").get<std::vector<double>>() !=
                std::vector<double>(exp.steps.begin(), exp.steps.end()))
          throw TrainerError("audit experiment " + std::to_string(number) +
                             " does not match the resumed run");
        r = from_record(exp, rec);
      } else {
        r = run_experiment(exp, objective, opts.threads);
        emit(experiment_record(r, round, number, scale));
      }
      ++number;
      if (!r.saturated) {
        out.weights = r.best_weights();
        improved = true;
      }
      out.experiments.push_back(std::move(r));
    }
    if (improved) {
      scale = 0;
    } else if (scale == opts.max_halvings) {
      finished = true;
    } else {
      ++scale;
    }
  }
  if (!finished) {
    out.capped = true;
    out.warning = "training stopped after " + std::to_string(opts.max_rounds) +
                  " rounds without saturating";
  }
  if (!resumed.done) {
    Json done;
    done["type"] = "done";
    done["rounds"] = out.rounds;
    done["experiments"] = number;
    done["capped"] = out.capped;
    done["weights"] = weights_json(out.weights);
    emit(done);
  }
  return out;
}

}  // namespace cyclone
