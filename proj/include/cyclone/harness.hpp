#pragma once

// Batch simulation, cross-play tables, decision capture, and humanness.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyclone/decision.hpp"
#include "cyclone/engine.hpp"
#include "cyclone/knowledge.hpp"

namespace cyclone {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots; the first exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct MatchStats {
  std::string label_a;
  std::string label_b;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;          // sample standard deviation
  double ci95 = 0.0;        // 1.96 * sd / sqrt(n)
  std::array<int, kMaxScore + 1> histogram{};

  friend bool operator==(const MatchStats&, const MatchStats&) = default;
};

MatchStats compute_stats(std::span<const int> scores, std::string label_a = {},
                         std::string label_b = {});

/// Percentile bootstrap 95% interval of the mean.
std::pair<double, double> bootstrap_ci95(std::span<const int> scores, int resamples,
                                         std::uint64_t seed);

class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::uint64_t seed, const std::string& what);
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Plays one game to completion: seat 0 uses `w0`, seat 1 `w1`.
GameState play_game(const WeightVector& w0, const WeightVector& w1, std::uint64_t seed,
                    const RulesConfig& rules = {});

struct SimulationOptions {
  int threads = 1;
  bool keep_logs = false;
  RulesConfig rules;
};

struct SimulationResult {
  MatchStats stats;
  std::vector<int> scores;
  std::vector<GameLog> logs;  // filled when keep_logs
};

/// Game i uses seed seed_base + i; A takes seat 0 on even i and seat 1 on
/// odd i.
SimulationResult simulate_games(const WeightVector& a, const WeightVector& b, int n,
                                std::uint64_t seed_base, const SimulationOptions& opts = {});

struct CrossplayTable {
  std::vector<std::string> labels;
  // cells[i][j] for i <= j; seat orders are pooled into one cell.
  std::vector<std::vector<MatchStats>> cells;

  const MatchStats& at(std::size_t i, std::size_t j) const {
    return i <= j ? cells[i][j] : cells[j][i];
  }
};

CrossplayTable crossplay_matrix(const std::vector<WeightVector>& presets, int n_per_cell,
                                std::uint64_t seed_base, const SimulationOptions& opts = {});

std::string stats_json(const MatchStats& s);
std::string crossplay_json(const CrossplayTable& t);
std::string crossplay_text(const CrossplayTable& t);

// ---------------------------------------------------------------------------
// Decision database

struct DecisionRecord {
  std::string game_id;
  int turn = 0;
  int seat = 0;
  ActionSpec action;
  std::string actor_tag;

  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

struct DecisionDatabase {
  std::map<std::string, GameLog> games;
  std::vector<DecisionRecord> records;

  friend bool operator==(const DecisionDatabase&, const DecisionDatabase&) = default;
};

class DecisionValidationError : public std::runtime_error {
 public:
  DecisionValidationError(std::size_t record, const std::string& what);
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

/// One record per turn of the log. `actor_tags[seat]` labels each seat.
std::vector<DecisionRecord> capture_decisions(const GameLog& log, const std::string& game_id,
                                              const std::array<std::string, kNumPlayers>& actor_tags);

/// Adds a game and its captured records to the database.
void add_game(DecisionDatabase& db, const GameLog& log, const std::string& game_id,
              const std::array<std::string, kNumPlayers>& actor_tags);

/// Line-delimited JSON: a header line, one "game" line per log, one
/// "decision" line per record.
std::string serialize_decisions(const DecisionDatabase& db);
DecisionDatabase parse_decisions(std::string_view text);

/// A record with its view reconstructed from the log prefix.
struct DecisionCase {
  PlayerView view;
  ActionSpec chosen;
};

std::vector<DecisionCase> materialize(const DecisionDatabase& db);

/// Fraction of cases where choose_action agrees with the recorded action.
double humanness(const WeightVector& w, std::span<const DecisionCase> cases, int threads = 1);

struct HumannessReport {
  double fraction = 0.0;
  int matches = 0;
  int total = 0;
  std::vector<bool> matched;           // per record
  std::vector<ActionSpec> recommended; // per record
};

HumannessReport evaluate_humanness(const WeightVector& w, const DecisionDatabase& db,
                                   int threads = 1);

/// Decision database from `n` games of `w` against itself.
DecisionDatabase generate_decisions(const WeightVector& w, int n, std::uint64_t seed_base,
                                    const std::string& tag);

}  // namespace cyclone
