#include "cyclone/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace cyclone {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

MatchStats compute_stats(std::span<const int> scores, std::string label_a, std::string label_b) {
  MatchStats s;
  s.label_a = std::move(label_a);
  s.label_b = std::move(label_b);
  s.n = static_cast<int>(scores.size());
  if (scores.empty()) return s;
  // Integer sums are exact, so the result does not depend on game order.
  long long sum = 0, sum_sq = 0;
  for (int v : scores) {
    sum += v;
    sum_sq += static_cast<long long>(v) * v;
    if (v >= 0 && v <= kMaxScore) ++s.histogram[v];
  }
  const double n = s.n;
  s.mean = static_cast<double>(sum) / n;
  if (s.n > 1) {
    // n * sum_sq - sum^2 is exact in integers.
    const long long centered = static_cast<long long>(s.n) * sum_sq - sum * sum;
    s.sd = std::sqrt(static_cast<double>(centered) / (n * (n - 1)));
  }
  s.ci95 = 1.96 * s.sd / std::sqrt(n);
  return s;
}

std::pair<double, double> bootstrap_ci95(std::span<const int> scores, int resamples,
                                         std::uint64_t seed) {
  if (scores.empty() || resamples < 1) throw ContractViolation("bootstrap needs data");
  std::mt19937_64 rng(seed);
  std::vector<double> means(resamples);
  const auto n = scores.size();
  for (int r = 0; r < resamples; ++r) {
    long long sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += scores[rng() % n];
    means[r] = static_cast<double>(sum) / n;
  }
  std::sort(means.begin(), means.end());
  auto at = [&](double q) {
    auto idx = static_cast<std::size_t>(q * (resamples - 1));
    return means[idx];
  };
  return {at(0.025), at(0.975)};
}

SimulationError::SimulationError(std::uint64_t seed, const std::string& what)
    : std::runtime_error("game with seed " + std::to_string(seed) + " failed: " + what),
      seed_(seed) {}

GameState play_game(const WeightVector& w0, const WeightVector& w1, std::uint64_t seed,
                    const RulesConfig& rules) {
  GameState state = new_game(seed, rules);
  std::array<PlayerView, kNumPlayers> views{initial_view(state, 0), initial_view(state, 1)};
  const std::array<const WeightVector*, kNumPlayers> weights{&w0, &w1};
  while (!state.terminal()) {
    const int p = state.current_player();
    const ActionSpec action = choose_action(views[p], *weights[p]);
    const ResolvedEvent ev = state.apply(action);
    for (auto& v : views) update_knowledge(v, ev);
  }
  return state;
}

SimulationResult simulate_games(const WeightVector& a, const WeightVector& b, int n,
                                std::uint64_t seed_base, const SimulationOptions& opts) {
  if (n < 1) throw ContractViolation("simulate_games needs n >= 1");
  SimulationResult result;
  result.scores.assign(n, 0);
  if (opts.keep_logs) result.logs.assign(n, GameLog{});
  parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t i) {
    const std::uint64_t seed = seed_base + i;
    try {
      const bool a_first = i % 2 == 0;
      GameState end = a_first ? play_game(a, b, seed, opts.rules) : play_game(b, a, seed, opts.rules);
      result.scores[i] = end.score();
      if (opts.keep_logs) result.logs[i] = make_log(end, false);
    } catch (const std::exception& e) {
      throw SimulationError(seed, e.what());
    }
  });
  result.stats = compute_stats(result.scores, a.name, b.name);
  return result;
}

CrossplayTable crossplay_matrix(const std::vector<WeightVector>& presets, int n_per_cell,
                                std::uint64_t seed_base, const SimulationOptions& opts) {
  if (presets.size() < 2) throw ContractViolation("crossplay needs at least two presets");
  CrossplayTable t;
  const std::size_t k = presets.size();
  for (const auto& p : presets) t.labels.push_back(p.name);
  t.cells.assign(k, std::vector<MatchStats>(k));
  SimulationOptions cell_opts = opts;
  cell_opts.keep_logs = false;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j)
      // Every cell sees the same deals.
      t.cells[i][j] = simulate_games(presets[i], presets[j], n_per_cell, seed_base, cell_opts).stats;
  return t;
}

namespace {

nlohmann::ordered_json stats_to_json(const MatchStats& s) {
  nlohmann::ordered_json j;
  j["a"] = s.label_a;
  j["b"] = s.label_b;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["sd"] = s.sd;
  j["ci95"] = s.ci95;
  j["histogram"] = s.histogram;
  return j;
}

}  // namespace

std::string stats_json(const MatchStats& s) {
  nlohmann::ordered_json j;
  j["format"] = "cyclone-stats";
  j["version"] = 1;
  j["stats"] = stats_to_json(s);
  return j.dump(2) + "\n";
}

std::string crossplay_json(const CrossplayTable& t) {
  nlohmann::ordered_json j;
  j["format"] = "cyclone-crossplay";
  j["version"] = 1;
  j["labels"] = t.labels;
  auto cells = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < t.labels.size(); ++i)
    for (std::size_t jx = i; jx < t.labels.size(); ++jx) cells.push_back(stats_to_json(t.cells[i][jx]));
  j["cells"] = cells;
  return j.dump(2) + "\n";
}

std::string crossplay_text(const CrossplayTable& t) {
  std::size_t width = 12;
  for (const auto& l : t.labels) width = std::max(width, l.size() + 2);
  std::ostringstream out;
  auto pad = [&](const std::string& s) {
    out << s << std::string(width > s.size() ? width - s.size() : 1, ' ');
  };
  pad("");
  for (std::size_t j = 0; j < t.labels.size(); ++j) {
    if (j + 1 < t.labels.size())
      pad(t.labels[j]);
    else
      out << t.labels[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < t.labels.size(); ++i) {
    pad(t.labels[i]);
    for (std::size_t j = 0; j < t.labels.size(); ++j) {
      const auto& s = t.at(i, j);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f +/- %.2f", s.mean, s.ci95);
      if (j + 1 < t.labels.size())
        pad(buf);
      else
        out << buf;
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

DecisionValidationError::DecisionValidationError(std::size_t record, const std::string& what)
    : std::runtime_error("decision record " + std::to_string(record) + ": " + what),
      record_(record) {}

std::vector<DecisionRecord> capture_decisions(const GameLog& log, const std::string& game_id,
                                              const std::array<std::string, kNumPlayers>& actor_tags) {
  replay(log);  // throws ReplayError if the log is not playable
  std::vector<DecisionRecord> out;
  out.reserve(log.actions.size());
  for (std::size_t t = 0; t < log.actions.size(); ++t) {
    DecisionRecord r;
    r.game_id = game_id;
    r.turn = static_cast<int>(t);
    r.seat = static_cast<int>(t % kNumPlayers);
    r.action = log.actions[t];
    r.actor_tag = actor_tags[r.seat];
    out.push_back(std::move(r));
  }
  return out;
}

void add_game(DecisionDatabase& db, const GameLog& log, const std::string& game_id,
              const std::array<std::string, kNumPlayers>& actor_tags) {
  auto records = capture_decisions(log, game_id, actor_tags);
  db.games[game_id] = log;
  db.records.insert(db.records.end(), records.begin(), records.end());
}

std::string serialize_decisions(const DecisionDatabase& db) {
  std::string out;
  nlohmann::ordered_json header;
  header["format"] = "cyclone-decisions";
  header["version"] = 1;
  out += header.dump() + "\n";
  for (const auto& [id, log] : db.games) {
    nlohmann::ordered_json g;
    g["type"] = "game";
    g["id"] = id;
    g["log"] = serialize(log);
    out += g.dump() + "\n";
  }
  for (const auto& r : db.records) {
    nlohmann::ordered_json d;
    d["type"] = "decision";
    d["game"] = r.game_id;
    d["turn"] = r.turn;
    d["seat"] = r.seat;
    d["action"] = to_string(r.action);
    d["actor"] = r.actor_tag;
    out += d.dump() + "\n";
  }
  return out;
}

DecisionDatabase parse_decisions(std::string_view text) {
  DecisionDatabase db;
  std::size_t pos = 0, line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw LogFormatError("decisions line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (!header_seen) {
        if (j.at("format").get<std::string>() != "cyclone-decisions" ||
            j.at("version").get<int>() != 1)
          throw LogFormatError("unsupported decisions header");
        header_seen = true;
        continue;
      }
      const auto type = j.at("type").get<std::string>();
      if (type == "game") {
        db.games[j.at("id").get<std::string>()] = parse_game_log(j.at("log").get<std::string>());
      } else if (type == "decision") {
        DecisionRecord r;
        r.game_id = j.at("game").get<std::string>();
        r.turn = j.at("turn").get<int>();
        r.seat = j.at("seat").get<int>();
        r.actor_tag = j.at("actor").get<std::string>();
        auto action = parse_action(j.at("action").get<std::string>(), r.seat);
        if (!action) throw LogFormatError("bad action in decisions line " + std::to_string(line_no));
        r.action = *action;
        db.records.push_back(std::move(r));
      } else {
        throw LogFormatError("unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw LogFormatError("decisions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) throw LogFormatError("empty decisions file");
  return db;
}

std::vector<DecisionCase> materialize(const DecisionDatabase& db) {
  std::vector<DecisionCase> cases;
  cases.reserve(db.records.size());
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    const auto& r = db.records[i];
    auto it = db.games.find(r.game_id);
    if (it == db.games.end()) throw DecisionValidationError(i, "unknown game '" + r.game_id + "'");
    const GameLog& log = it->second;
    if (r.turn < 0 || static_cast<std::size_t>(r.turn) >= log.actions.size())
      throw DecisionValidationError(i, "turn out of range");
    if (r.seat != r.turn % kNumPlayers) throw DecisionValidationError(i, "seat does not move on turn");
    GameState state;
    try {
      state = replay_prefix(log, r.turn);
    } catch (const std::exception& e) {
      throw DecisionValidationError(i, e.what());
    }
    if (check_action(state, r.action))
      throw DecisionValidationError(i, "recorded action is illegal");
    cases.push_back({make_view(state, r.seat), r.action});
  }
  return cases;
}

double humanness(const WeightVector& w, std::span<const DecisionCase> cases, int threads) {
  if (cases.empty()) throw ContractViolation("humanness needs a non-empty decision set");
  std::vector<char> hit(cases.size(), 0);
  parallel_for(cases.size(), threads, [&](std::size_t i) {
    hit[i] = choose_action(cases[i].view, w) == cases[i].chosen;
  });
  int matches = 0;
  for (char h : hit) matches += h;
  return static_cast<double>(matches) / static_cast<double>(cases.size());
}

HumannessReport evaluate_humanness(const WeightVector& w, const DecisionDatabase& db, int threads) {
  if (db.records.empty()) throw ContractViolation("decision database is empty");
  const auto cases = materialize(db);
  HumannessReport rep;
  rep.total = static_cast<int>(cases.size());
  rep.matched.assign(cases.size(), false);
  rep.recommended.assign(cases.size(), ActionSpec{});
  std::vector<char> hit(cases.size(), 0);
  parallel_for(cases.size(), threads, [&](std::size_t i) {
    rep.recommended[i] = choose_action(cases[i].view, w);
    hit[i] = rep.recommended[i] == cases[i].chosen;
  });
  for (std::size_t i = 0; i < cases.size(); ++i) {
    rep.matched[i] = hit[i] != 0;
    rep.matches += hit[i];
  }
  rep.fraction = static_cast<double>(rep.matches) / rep.total;
  return rep;
}

DecisionDatabase generate_decisions(const WeightVector& w, int n, std::uint64_t seed_base,
                                    const std::string& tag) {
  DecisionDatabase db;
  for (int i = 0; i < n; ++i) {
    GameState end = play_game(w, w, seed_base + i);
    char id[32];
    std::snprintf(id, sizeof id, "g%06d", i);
    add_game(db, make_log(end, false), id, {tag, tag});
  }
  return db;
}

}  // namespace cyclone
