#pragma once

// Independent reference implementations used as oracles by the unit and
// acceptance suites. Nothing here calls into the knowledge module.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cyclone/engine.hpp"
#include "cyclone/knowledge.hpp"

namespace oracle {

using namespace cyclone;

/// Plays uniformly random legal moves from seed `seed` for up to `steps`
/// turns, stopping early at a terminal state.
inline GameState random_state(std::uint64_t seed, int steps, const RulesConfig& rules = {}) {
  GameState s = new_game(seed, rules);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int i = 0; i < steps && !s.terminal(); ++i) {
    const auto legal = legal_actions(s);
    s.apply(legal[rng() % legal.size()]);
  }
  return s;
}

/// A deck whose first cards are `h0` then `h1`, followed by `next` and the
/// remaining cards of the standard deck in canonical order.
inline DeckOrder deck_with(const std::vector<Card>& h0, const std::vector<Card>& h1,
                           const std::vector<Card>& next = {}) {
  const DeckOrder standard = standard_deck();
  std::vector<Card> rest(standard.begin(), standard.end());
  std::vector<Card> head = h0;
  head.insert(head.end(), h1.begin(), h1.end());
  head.insert(head.end(), next.begin(), next.end());
  for (const Card& c : head) {
    auto it = std::find(rest.begin(), rest.end(), c);
    if (it == rest.end()) throw std::logic_error("deck_with: too many copies of " + to_string(c));
    rest.erase(it);
  }
  DeckOrder d{};
  std::copy(head.begin(), head.end(), d.begin());
  std::copy(rest.begin(), rest.end(), d.begin() + head.size());
  return d;
}

/// Every syntactically well-formed action, including out-of-range slots,
/// clues to either seat and out-of-range clue values.
inline std::vector<ActionSpec> all_candidate_actions() {
  std::vector<ActionSpec> out;
  for (int slot = -1; slot <= 6; ++slot) {
    out.push_back(ActionSpec::play(slot));
    out.push_back(ActionSpec::discard(slot));
  }
  for (int target = 0; target < kNumPlayers; ++target) {
    for (int c = -1; c <= kNumColors; ++c) out.push_back({ActionKind::ClueColor, -1, c, target});
    for (int r = 0; r <= kNumRanks + 1; ++r) out.push_back({ActionKind::ClueRank, -1, r, target});
  }
  return out;
}

/// Legality straight from the rules text.
inline bool brute_legal(const GameState& s, const ActionSpec& a) {
  if (s.strikes() >= 3) return false;
  if (s.fireworks_total() == kMaxScore) return false;
  // After the turn that draws the last card, each player moves once more.
  const auto& h = s.history();
  for (std::size_t t = 0; t < h.size(); ++t) {
    if (h[t].drawn && h[t].deck_size_after == 0) {
      if (h.size() >= t + 1 + kNumPlayers) return false;
      break;
    }
  }
  const int me = s.current_player();
  const auto& hand = s.hand(me);
  switch (a.kind) {
    case ActionKind::Play:
      return a.slot >= 0 && a.slot < static_cast<int>(hand.size());
    case ActionKind::Discard:
      return a.slot >= 0 && a.slot < static_cast<int>(hand.size()) && s.info_tokens() < 8;
    case ActionKind::ClueColor:
    case ActionKind::ClueRank: {
      if (s.info_tokens() == 0) return false;
      if (a.target != 1 - me) return false;
      const bool color = a.kind == ActionKind::ClueColor;
      if (color && (a.value < 0 || a.value >= 5)) return false;
      if (!color && (a.value < 1 || a.value > 5)) return false;
      for (const Card& c : s.hand(a.target))
        if (color ? static_cast<int>(c.color) == a.value : c.rank == a.value) return true;
      return false;
    }
  }
  return false;
}

/// Sum of all card zones equals the standard deck.
inline bool conserved(const GameState& s) {
  std::array<int, 25> n{};
  auto add = [&](const Card& c) { ++n[static_cast<int>(c.color) * 5 + c.rank - 1]; };
  for (int p = 0; p < kNumPlayers; ++p)
    for (const Card& c : s.hand(p)) add(c);
  for (const Card& c : s.deck()) add(c);
  for (const Card& c : s.discard_pile()) add(c);
  for (int col = 0; col < 5; ++col)
    for (int r = 1; r <= s.fireworks().top[col]; ++r) add(Card{static_cast<Color>(col), r});
  const int copies[6] = {0, 3, 2, 2, 2, 1};
  for (int i = 0; i < 25; ++i)
    if (n[i] != copies[i % 5 + 1]) return false;
  return true;
}

inline bool matches_clue(const ActionSpec& clue, int identity) {
  const int color = identity / 5, rank = identity % 5 + 1;
  return clue.kind == ActionKind::ClueColor ? color == clue.value : rank == clue.value;
}

/// Mask of each card in `viewer`'s hand, derived from the true cards: an
/// identity survives if every clue the card received would have touched it
/// exactly when it touched the true card.
inline std::vector<std::uint32_t> truth_masks(const GameState& s, int viewer) {
  // Replay slot bookkeeping to learn when each card entered the hand.
  std::vector<int> drawn(s.config().hand_size, 0);
  for (const auto& ev : s.history()) {
    if (ev.actor == viewer && !ev.action.is_clue()) {
      drawn.erase(drawn.begin() + ev.action.slot);
      if (ev.drawn) drawn.push_back(ev.turn);
    }
  }
  const auto& hand = s.hand(viewer);
  std::vector<std::uint32_t> out;
  for (std::size_t slot = 0; slot < hand.size(); ++slot) {
    const int truth = hand[slot].index();
    std::uint32_t mask = 0;
    for (int id = 0; id < 25; ++id) {
      bool ok = true;
      for (const auto& ev : s.history()) {
        if (!ev.action.is_clue() || ev.action.target != viewer) continue;
        if (ev.turn < drawn[slot]) continue;
        if (matches_clue(ev.action, id) != matches_clue(ev.action, truth)) ok = false;
      }
      if (ok) mask |= 1u << id;
    }
    out.push_back(mask);
  }
  return out;
}

/// The physical cards `viewer` cannot see: own hand plus the draw pile.
inline std::vector<Card> unseen_cards(const GameState& s, int viewer) {
  std::vector<Card> out = s.hand(viewer);
  for (const Card& c : s.deck()) out.push_back(c);
  return out;
}

inline bool ref_playable(const GameState& s, Card c) {
  return s.fireworks().top[static_cast<int>(c.color)] + 1 == c.rank;
}

inline int ref_discarded(const GameState& s, Card c) {
  int n = 0;
  for (const Card& d : s.discard_pile()) n += d == c;
  return n;
}

inline bool ref_endangered(const GameState& s, Card c) {
  const int copies[6] = {0, 3, 2, 2, 2, 1};
  const bool played = c.rank <= s.fireworks().top[static_cast<int>(c.color)];
  return !played && copies[c.rank] - ref_discarded(s, c) == 1;
}

inline double ref_curve(int s) { return 1.0 + 4.5 * std::pow(s / 40.0, 0.4); }

inline bool ref_unneeded(const GameState& s, Card c) {
  const int top = s.fireworks().top[static_cast<int>(c.color)];
  if (c.rank <= top) return true;
  const int copies[6] = {0, 3, 2, 2, 2, 1};
  for (int r = top + 1; r < c.rank; ++r)
    if (ref_discarded(s, Card{c.color, r}) == copies[r]) return true;
  return (c.rank - top) > ref_curve(s.deck_size());
}

/// Counts over the unseen physical cards inside `mask`.
template <typename Pred>
Rational enumerate(const GameState& s, int viewer, std::uint32_t mask, Pred pred) {
  int num = 0, den = 0;
  for (const Card& c : unseen_cards(s, viewer)) {
    if (!((mask >> c.index()) & 1u)) continue;
    ++den;
    if (pred(c)) ++num;
  }
  return {num, den};
}

}  // namespace oracle
