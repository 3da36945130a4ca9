#pragma once

// The linear expected-value policy. Every legal action gets a 12-entry
// factor vector h; its value is the inner product with a static weight
// vector w, and the agent takes the argmax.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclone/engine.hpp"
#include "cyclone/knowledge.hpp"

namespace cyclone {

enum class Factor : int {
  // Play
  PlayPlayable = 0,
  MisplayFewStrikes,   // fewer than 2 strikes
  MisplayTwoStrikes,
  OtherPlayPlayable,
  OtherMisplay,
  // Discard
  DiscardNonEndangered,
  DiscardUnneeded,
  // Conventions
  PlaySingledOut,
  ClueSinglesPlayable,
  ClueSinglesNonPlayable,
  DiscardSingledOut,
  ClueInfoTokens,
};

inline constexpr int kNumFactors = 12;

enum class FactorGroup { Play, Discard, Conventions };

std::string_view factor_name(Factor f);
std::optional<Factor> parse_factor(std::string_view name);
FactorGroup factor_group(Factor f);
inline constexpr int index(Factor f) { return static_cast<int>(f); }

struct FactorVector {
  std::array<double, kNumFactors> h{};

  double& operator[](Factor f) { return h[index(f)]; }
  double operator[](Factor f) const { return h[index(f)]; }
  friend bool operator==(const FactorVector&, const FactorVector&) = default;
};

/// How Table-style infinite weights are realised.
enum class DominanceMode {
  Tier,         // flagged entries form a lexicographically dominant score
  LargeFinite,  // flagged entries use +/- large_finite inside the EV
};

enum class ClueAggregate { Sum, Max };

struct PolicyOptions {
  DominanceMode dominance = DominanceMode::Tier;
  double large_finite = 1e3;
  ClueAggregate clue_aggregate = ClueAggregate::Sum;

  friend bool operator==(const PolicyOptions&, const PolicyOptions&) = default;
};

/// A complete play style.
struct WeightVector {
  std::string name;
  std::array<double, kNumFactors> w{};
  std::array<int, kNumFactors> dominance{};  // +1 / -1 marks an infinite weight
  GiveUpCurve curve;
  PolicyOptions options;

  double& operator[](Factor f) { return w[index(f)]; }
  double operator[](Factor f) const { return w[index(f)]; }
  bool dominant(Factor f) const { return dominance[index(f)] != 0; }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

enum class Preset { HumanLike, HumanComplementary, SelfPlay };

inline constexpr std::array<Preset, 3> kAllPresets{Preset::HumanLike, Preset::HumanComplementary,
                                                    Preset::SelfPlay};

std::string_view preset_name(Preset p);
std::optional<Preset> parse_preset(std::string_view name);

/// The three trained columns. The 2-strike misplay entry is a bare magnitude;
/// by default it is applied as a penalty. `literal_signs` keeps it positive.
WeightVector preset(Preset p, bool literal_signs = false);

class WeightFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_weights(const WeightVector& w);
WeightVector parse_weights(std::string_view text);

// ---------------------------------------------------------------------------

/// Legal actions for the player to move, in the engine's canonical order.
std::vector<ActionSpec> legal_actions(const PlayerView& view);

struct TeammateProbs {
  std::vector<Rational> play;     // probability the partner plays slot i
  std::vector<Rational> discard;  // probability the partner discards slot i
};

/// The partner's unseen multiset as estimated by the viewer: public cards
/// removed, plus the viewer's own cards whose identity its clues pin down.
CardCounts partner_unseen_estimate(const PlayerView& view);

/// Per-slot play and discard probabilities of the partner, optionally after
/// the viewer gives `hypothetical_clue`.
TeammateProbs teammate_play_probs(const PlayerView& view,
                                  const std::optional<ActionSpec>& hypothetical_clue = {});

FactorVector factor_vector(const PlayerView& view, const ActionSpec& action,
                           const GiveUpCurve& curve = {},
                           ClueAggregate aggregate = ClueAggregate::Sum);

struct ActionEvaluation {
  ActionSpec action;
  FactorVector h;
  double dominant_tier = 0.0;
  double ev = 0.0;
};

/// Finite-weight inner product as used for ActionEvaluation::ev.
double finite_value(const FactorVector& h, const WeightVector& w);
double dominant_value(const FactorVector& h, const WeightVector& w);

std::vector<ActionEvaluation> expected_values(const PlayerView& view, const WeightVector& w);

/// Argmax over (dominant_tier, ev); ties go to the earliest canonical action.
ActionSpec choose_action(const PlayerView& view, const WeightVector& w);
std::size_t best_index(const std::vector<ActionEvaluation>& evals);

}  // namespace cyclone
