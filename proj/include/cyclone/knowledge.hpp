#pragma once

// Information sets: what each player can infer about its own hand from
// clues and visible cards, and the count-based probabilities derived from
// them.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cyclone/card.hpp"
#include "cyclone/engine.hpp"

namespace cyclone {

/// Exact probability kept as raw counts; `den` is the number of unseen
/// identities matching a card's clue mask.
struct Rational {
  int num = 0;
  int den = 1;

  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<long long>(a.num) * b.den == static_cast<long long>(b.num) * a.den;
  }
};

struct CardKnowledge {
  IdentityMask possible = IdentityMask::all();
  bool clued = false;        // touched by at least one clue
  bool singled_out = false;
  int drawn_turn = 0;

  std::optional<Color> known_color() const;
  std::optional<int> known_rank() const;

  friend bool operator==(const CardKnowledge&, const CardKnowledge&) = default;
};

class KnowledgeDesyncError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One player's information set.
struct PlayerView {
  int viewer = 0;
  int current_player = 0;
  int turn = 0;
  std::vector<CardKnowledge> own;               // identities hidden
  std::vector<Card> partner_cards;              // visible
  std::vector<CardKnowledge> partner_knowledge; // partner's clue knowledge
  Fireworks fireworks;
  std::vector<Card> discard_pile;
  CardCounts discards;
  int info_tokens = kMaxInfoTokens;
  int strikes = 0;
  int deck_size = kDeckSize - kNumPlayers * kHandSize;
  int turns_after_deck_empty = 0;
  bool terminal = false;
  std::vector<ResolvedEvent> history;  // own draws are stored without identity

  int partner() const { return 1 - viewer; }

  friend bool operator==(const PlayerView&, const PlayerView&) = default;
};

/// Full deck minus the partner's hand, the discard pile, and played cards.
CardCounts unseen_counts(const PlayerView& view);

/// View of `viewer` at the start of the game that produced `state`.
PlayerView initial_view(const GameState& state, int viewer);
/// View of `viewer` reconstructed by replaying the state's history.
PlayerView make_view(const GameState& state, int viewer);

/// Applies the public consequences of an engine event. Throws
/// KnowledgeDesyncError if the event cannot follow the view.
void update_knowledge(PlayerView& view, const ResolvedEvent& event);

/// Restricts a hand's clue masks: touched cards to the clue's identities,
/// untouched ones to the complement. Flags the singled-out card.
void apply_clue(std::vector<CardKnowledge>& hand, const ActionSpec& clue, std::uint8_t touched);

/// Among touched slots whose clued attribute was not already known, the
/// unique one; nullopt when zero or several qualify.
std::optional<int> single_out_target(const std::vector<CardKnowledge>& hand_before,
                                     const ActionSpec& clue, std::uint8_t touched);
/// Outgoing clue from the viewer to its partner.
std::optional<int> single_out_target(const PlayerView& view, const ActionSpec& clue);

// ---------------------------------------------------------------------------
// Card predicates and the give-up curve

/// Maximum tolerated deficit as a function of deck size:
/// m(s) = floor + amplitude * (s / 40)^exponent.
struct GiveUpCurve {
  double floor = 1.0;
  double amplitude = 4.5;
  double exponent = 0.4;

  double operator()(int deck_size) const;
  friend bool operator==(const GiveUpCurve&, const GiveUpCurve&) = default;
};

inline constexpr int kInitialDeckSize = kDeckSize - kNumPlayers * kHandSize;

double give_up_threshold(int deck_size, const GiveUpCurve& curve = {});

/// rank - fireworks[color], floored at zero.
int deficit(Card card, const Fireworks& fireworks);

bool is_endangered(Card card, const Fireworks& fireworks, const CardCounts& discards);
bool is_dead(Card card, const Fireworks& fireworks, const CardCounts& discards);
bool is_unneeded(Card card, const Fireworks& fireworks, const CardCounts& discards,
                 int deck_size, const GiveUpCurve& curve);

/// Count of `counts` inside `mask` satisfying `pred`, over count inside
/// `mask`. Throws ContractViolation when the mask matches nothing.
template <typename Pred>
Rational mask_probability(IdentityMask mask, const CardCounts& counts, Pred&& pred) {
  int num = 0, den = 0;
  for (int i = 0; i < kNumIdentities; ++i) {
    if (!mask.contains(i) || counts[i] == 0) continue;
    den += counts[i];
    if (pred(Card::from_index(i))) num += counts[i];
  }
  if (den == 0) throw ContractViolation("no unseen card matches the clue mask");
  return {num, den};
}

Rational prob_playable(const PlayerView& view, int slot);
Rational prob_non_endangered(const PlayerView& view, int slot);
Rational prob_unneeded(const PlayerView& view, int slot, const GiveUpCurve& curve = {});

}  // namespace cyclone
