#pragma once

// Two-player Hanabi rules: deal, legality, transitions, scoring, and
// replayable game logs.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cyclone/card.hpp"

namespace cyclone {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class ActionKind : std::uint8_t { Play, Discard, ClueColor, ClueRank };

struct ActionSpec {
  ActionKind kind = ActionKind::Play;
  int slot = -1;    // Play/Discard
  int value = -1;   // color index for ClueColor, rank for ClueRank
  int target = -1;  // seat receiving a clue

  static ActionSpec play(int slot) { return {ActionKind::Play, slot, -1, -1}; }
  static ActionSpec discard(int slot) { return {ActionKind::Discard, slot, -1, -1}; }
  static ActionSpec clue_color(int target, Color c) {
    return {ActionKind::ClueColor, -1, color_index(c), target};
  }
  static ActionSpec clue_rank(int target, int rank) {
    return {ActionKind::ClueRank, -1, rank, target};
  }

  bool is_clue() const { return kind == ActionKind::ClueColor || kind == ActionKind::ClueRank; }
  /// Identities named by a clue.
  IdentityMask clue_mask() const;
  bool touches(Card c) const { return clue_mask().contains(c); }

  friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

/// Compact form used in logs: "P2", "D0", "CR" (color clue), "C3" (rank clue).
/// The clue target is implicit: always the actor's partner.
std::string to_string(const ActionSpec& action);
std::optional<ActionSpec> parse_action(std::string_view text, int actor);

enum class StrikeOutScoring : std::uint8_t { Zero, KeepFireworks };

struct RulesConfig {
  int hand_size = kHandSize;
  StrikeOutScoring strike_out = StrikeOutScoring::Zero;

  void validate() const;
  std::string canonical() const;  // "hand=5 strikeout=zero"
  std::uint32_t hash() const;     // FNV-1a of canonical()
  friend bool operator==(const RulesConfig&, const RulesConfig&) = default;
};

enum class RejectReason : std::uint8_t {
  GameOver,
  SlotOutOfRange,
  DiscardAtMaxTokens,
  NoInfoTokens,
  BadClueTarget,
  BadClueValue,
  ClueTouchesNothing,
};

std::string_view to_string(RejectReason reason);

class IllegalActionError : public std::runtime_error {
 public:
  IllegalActionError(RejectReason reason, const ActionSpec& action);
  RejectReason reason() const { return reason_; }

 private:
  RejectReason reason_;
};

/// Full-information record of one transition.
struct ResolvedEvent {
  int turn = 0;
  int actor = 0;
  ActionSpec action;
  std::optional<Card> card;  // revealed by Play/Discard
  bool success = false;      // Play landed on its firework
  std::uint8_t touched = 0;  // clue: bit per slot of the target hand
  std::optional<Card> drawn;
  int deck_size_after = 0;

  friend bool operator==(const ResolvedEvent&, const ResolvedEvent&) = default;
};

using DeckOrder = std::array<Card, kDeckSize>;

/// Canonical unshuffled deck: colors in order, ranks ascending with copies.
DeckOrder standard_deck();
/// Fisher-Yates over standard_deck() driven by std::mt19937_64(seed) with
/// rejection-sampled bounded draws, so the order is identical on every
/// conforming platform.
DeckOrder shuffled_deck(std::uint64_t seed);

class GameState {
 public:
  const std::vector<Card>& hand(int player) const { return hands_[player]; }
  const Fireworks& fireworks() const { return fireworks_; }
  int info_tokens() const { return info_tokens_; }
  int strikes() const { return strikes_; }
  const std::vector<Card>& discard_pile() const { return discard_pile_; }
  const CardCounts& discard_counts() const { return discard_counts_; }
  int current_player() const { return current_player_; }
  int turns_after_deck_empty() const { return turns_after_deck_empty_; }
  int deck_size() const { return kDeckSize - next_draw_; }
  int turn() const { return static_cast<int>(history_.size()); }
  const std::vector<ResolvedEvent>& history() const { return history_; }
  std::uint64_t seed() const { return seed_; }
  const RulesConfig& config() const { return config_; }
  const DeckOrder& deck_order() const { return deck_order_; }
  /// Remaining draw pile, next card first.
  std::vector<Card> deck() const;

  bool terminal() const;
  int fireworks_total() const { return fireworks_.score(); }
  /// Final score under the configured strike-out rule.
  int score() const;

  /// Mutating transition. Throws IllegalActionError and leaves the state
  /// untouched if the action is not legal.
  ResolvedEvent apply(const ActionSpec& action);

  /// Test hook: overwrite a player's hand.
  void set_hand_for_testing(int player, std::vector<Card> hand) { hands_[player] = std::move(hand); }
  void set_tokens_for_testing(int tokens) { info_tokens_ = tokens; }
  void set_strikes_for_testing(int strikes) { strikes_ = strikes; }
  void set_fireworks_for_testing(const Fireworks& f) { fireworks_ = f; }

  friend bool operator==(const GameState&, const GameState&) = default;

 private:
  friend GameState new_game_with_deck(const DeckOrder&, const RulesConfig&, std::uint64_t);

  RulesConfig config_;
  std::uint64_t seed_ = 0;
  DeckOrder deck_order_{};
  int next_draw_ = 0;
  std::array<std::vector<Card>, kNumPlayers> hands_;
  Fireworks fireworks_;
  int info_tokens_ = kMaxInfoTokens;
  int strikes_ = 0;
  std::vector<Card> discard_pile_;
  CardCounts discard_counts_;
  int current_player_ = 0;
  int turns_after_deck_empty_ = 0;
  bool deck_emptied_ = false;
  std::vector<ResolvedEvent> history_;
};

GameState new_game(std::uint64_t seed, const RulesConfig& config = {});
/// Deal from an explicit deck order; `seed` is only recorded.
GameState new_game_with_deck(const DeckOrder& deck, const RulesConfig& config = {},
                             std::uint64_t seed = 0);

/// Returns the rejection reason, or nullopt if `action` is legal.
std::optional<RejectReason> check_action(const GameState& state, const ActionSpec& action);

/// Canonical order: plays by slot, discards by slot, color clues, rank clues.
std::vector<ActionSpec> legal_actions(const GameState& state);

std::pair<GameState, ResolvedEvent> apply_action(GameState state, const ActionSpec& action);

/// Slots of `hand` touched by a clue, one bit per slot.
std::uint8_t touched_slots(const std::vector<Card>& hand, const ActionSpec& clue);

// ---------------------------------------------------------------------------
// Game logs

struct GameLog {
  std::uint64_t seed = 0;
  RulesConfig config;
  std::optional<DeckOrder> deck;  // when present the seed is not used to shuffle
  std::vector<ActionSpec> actions;

  friend bool operator==(const GameLog&, const GameLog&) = default;
};

class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::size_t index, const std::string& what);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class LogFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GameLog make_log(const GameState& state, bool include_deck = true);
GameState replay(const GameLog& log);
/// State after the first `count` actions of the log.
GameState replay_prefix(const GameLog& log, std::size_t count);

std::string serialize(const GameLog& log);
GameLog parse_game_log(std::string_view text);

}  // namespace cyclone
