#pragma once

// Coordinate search over weight vectors by full-factorial experiments:
// four parameters at three levels each, re-basing on the winner until a
// whole round of experiments finds nothing better.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cyclone/decision.hpp"
#include "cyclone/harness.hpp"

namespace cyclone {

inline constexpr int kFactorsPerExperiment = 4;
inline constexpr int kLevels = 3;
inline constexpr int kCandidatesPerExperiment = 81;  // kLevels ^ kFactorsPerExperiment

/// A trainable scalar: one of the 12 weights or a give-up curve parameter.
enum class Param : int {
  // 0..11 mirror Factor
  CurveFloor = kNumFactors,
  CurveAmplitude,
  CurveExponent,
};

inline constexpr int kNumParams = kNumFactors + 3;

inline constexpr Param param_of(Factor f) { return static_cast<Param>(index(f)); }
std::string param_name(Param p);  // factor name or "curve.floor" etc.
std::optional<Param> parse_param(std::string_view name);

double get_param(const WeightVector& w, Param p);
void set_param(WeightVector& w, Param p, double value);
/// Dominance-flagged weights are not searched.
bool trainable(const WeightVector& w, Param p);
/// Curve parameters that keep m(s) finite on [0, 40].
bool feasible(const WeightVector& w);

struct ObjectiveValue {
  double value = 0.0;
  double ci95 = 0.0;
};

/// A pure function of the weights. Game objectives close over a fixed seed
/// block, so every candidate in an experiment sees the same deals.
struct Objective {
  std::string id;
  std::string seed_block;  // human-readable description for the audit trail
  std::function<ObjectiveValue(const WeightVector&)> eval;
};

class TrainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean self-play score of `w` over seeds [seed_base, seed_base + games).
ObjectiveValue objective_selfplay(const WeightVector& w, int games, std::uint64_t seed_base,
                                  const RulesConfig& rules = {});
/// Mean score of `w` paired with a fixed partner, seats alternating.
ObjectiveValue objective_paired(const WeightVector& w, const WeightVector& partner, int games,
                                std::uint64_t seed_base, const RulesConfig& rules = {});
/// Fraction of cases where `w` picks the recorded action.
ObjectiveValue objective_humanness(const WeightVector& w, std::span<const DecisionCase> cases);

Objective make_selfplay_objective(int games, std::uint64_t seed_base, const RulesConfig& rules = {});
Objective make_paired_objective(WeightVector partner, int games, std::uint64_t seed_base,
                                const RulesConfig& rules = {});
Objective make_humanness_objective(std::shared_ptr<const std::vector<DecisionCase>> cases);

struct DesignExperiment {
  WeightVector base;
  std::array<Param, kFactorsPerExperiment> params{};
  std::array<double, kFactorsPerExperiment> steps{};
};

struct Candidate {
  std::array<int, kFactorsPerExperiment> levels{};  // each -1, 0 or +1
  WeightVector weights;
  ObjectiveValue score;
  bool feasible = true;
};

struct ExperimentResult {
  DesignExperiment experiment;
  std::vector<Candidate> candidates;  // 81, first parameter most significant
  std::size_t best = 0;
  bool saturated = true;

  const WeightVector& best_weights() const { return candidates[best].weights; }
};

/// Index of the all-zero candidate.
inline constexpr std::size_t kBaseCandidate = (kCandidatesPerExperiment - 1) / 2;

std::vector<Candidate> design_candidates(const DesignExperiment& exp);

/// Evaluates all 81 candidates. A candidate beats the base only with a
/// strictly higher score; among equal improvements the one changing the
/// fewest parameters wins, then the earliest.
ExperimentResult run_experiment(const DesignExperiment& exp, const Objective& objective,
                                int threads = 1);

/// Default grouping: trainable parameters in declaration order (play,
/// discard, convention weights, then the curve), cut into groups of four,
/// wrapping around to fill the last group.
std::vector<std::array<Param, kFactorsPerExperiment>> default_schedule(const WeightVector& w);

struct TrainOptions {
  std::vector<std::array<Param, kFactorsPerExperiment>> schedule;  // empty: default_schedule
  double min_step = 0.25;
  double relative_step = 0.25;  // step = max(min_step, relative_step * |value|)
  bool fixed_step = false;      // step = min_step regardless of value
  int max_halvings = 2;
  int max_rounds = 50;
  int threads = 1;
  /// Receives each audit record as one line without the trailing newline.
  std::function<void(const std::string&)> audit_sink;
  /// Audit records from an interrupted run with the same start, schedule
  /// and objective; completed experiments are reused instead of rerun.
  std::vector<std::string> resume;
};

struct TrainResult {
  WeightVector weights;
  std::vector<ExperimentResult> experiments;
  int rounds = 0;
  bool capped = false;
  std::string warning;
};

/// Runs the schedule round by round. A round with no improvement halves
/// the step scale; an improvement resets it. Training ends after a round
/// without improvement at the finest scale that followed unimproved rounds
/// at every coarser scale, so the output is saturated at all scales.
TrainResult train_to_saturation(const WeightVector& start, const Objective& objective,
                                const TrainOptions& opts = {});

/// Splits audit file contents into records.
std::vector<std::string> read_audit_lines(std::string_view text);

}  // namespace cyclone
