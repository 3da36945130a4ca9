#include "cyclone/knowledge.hpp"

#include <cmath>
#include <string>

namespace cyclone {

std::optional<Color> CardKnowledge::known_color() const {
  for (int c = 0; c < kNumColors; ++c) {
    const auto color = static_cast<Color>(c);
    if ((possible & ~IdentityMask::of_color(color)).empty()) return color;
  }
  return std::nullopt;
}

std::optional<int> CardKnowledge::known_rank() const {
  for (int r = 1; r <= kNumRanks; ++r)
    if ((possible & ~IdentityMask::of_rank(r)).empty()) return r;
  return std::nullopt;
}

CardCounts unseen_counts(const PlayerView& view) {
  CardCounts counts = CardCounts::full_deck();
  for (const Card& c : view.partner_cards) counts.remove(c);
  for (int i = 0; i < kNumIdentities; ++i) counts.remove(Card::from_index(i), view.discards[i]);
  for (int c = 0; c < kNumColors; ++c)
    for (int r = 1; r <= view.fireworks.top[c]; ++r) counts.remove(Card{static_cast<Color>(c), r});
  return counts;
}

PlayerView initial_view(const GameState& state, int viewer) {
  PlayerView view;
  view.viewer = viewer;
  const auto& deck = state.deck_order();
  const int hand = state.config().hand_size;
  const int partner = 1 - viewer;
  view.own.assign(hand, CardKnowledge{});
  for (int i = 0; i < hand; ++i) view.partner_cards.push_back(deck[partner * hand + i]);
  view.partner_knowledge.assign(hand, CardKnowledge{});
  view.deck_size = kDeckSize - kNumPlayers * hand;
  return view;
}

PlayerView make_view(const GameState& state, int viewer) {
  PlayerView view = initial_view(state, viewer);
  for (const auto& ev : state.history()) update_knowledge(view, ev);
  return view;
}

std::optional<int> single_out_target(const std::vector<CardKnowledge>& hand_before,
                                     const ActionSpec& clue, std::uint8_t touched) {
  std::optional<int> found;
  for (int i = 0; i < static_cast<int>(hand_before.size()); ++i) {
    if (!((touched >> i) & 1u)) continue;
    const bool already_known = clue.kind == ActionKind::ClueColor
                                   ? hand_before[i].known_color().has_value()
                                   : hand_before[i].known_rank().has_value();
    if (already_known) continue;
    if (found) return std::nullopt;
    found = i;
  }
  return found;
}

std::optional<int> single_out_target(const PlayerView& view, const ActionSpec& clue) {
  return single_out_target(view.partner_knowledge, clue, touched_slots(view.partner_cards, clue));
}

void apply_clue(std::vector<CardKnowledge>& hand, const ActionSpec& clue, std::uint8_t touched) {
  const auto target = single_out_target(hand, clue, touched);
  const IdentityMask mask = clue.clue_mask();
  for (int i = 0; i < static_cast<int>(hand.size()); ++i) {
    if ((touched >> i) & 1u) {
      hand[i].possible = hand[i].possible & mask;
      hand[i].clued = true;
    } else {
      hand[i].possible = hand[i].possible & ~mask;
    }
  }
  if (target) {
    for (auto& k : hand) k.singled_out = false;
    hand[*target].singled_out = true;
  }
}

namespace {

[[noreturn]] void desync(const std::string& what) { throw KnowledgeDesyncError(what); }

void check_masks(const std::vector<CardKnowledge>& hand) {
  for (const auto& k : hand)
    if (k.possible.empty()) desync("clue left a card with no possible identity");
}

}  // namespace

void update_knowledge(PlayerView& view, const ResolvedEvent& ev) {
  if (view.terminal) desync("event after the game ended");
  if (ev.turn != view.turn)
    desync("event turn " + std::to_string(ev.turn) + " != view turn " + std::to_string(view.turn));
  if (ev.actor != view.current_player) desync("event actor is not the player to move");

  const bool deck_was_empty = view.deck_size == 0;
  const bool self = ev.actor == view.viewer;
  const ActionSpec& a = ev.action;

  switch (a.kind) {
    case ActionKind::Play:
    case ActionKind::Discard: {
      if (!ev.card) desync("play/discard event without a revealed card");
      const Card card = *ev.card;
      if (self) {
        if (a.slot < 0 || a.slot >= static_cast<int>(view.own.size())) desync("slot out of range");
        if (!view.own[a.slot].possible.contains(card)) desync("revealed card contradicts clues");
        view.own.erase(view.own.begin() + a.slot);
      } else {
        if (a.slot < 0 || a.slot >= static_cast<int>(view.partner_cards.size()))
          desync("slot out of range");
        if (!(view.partner_cards[a.slot] == card)) desync("revealed card differs from visible card");
        view.partner_cards.erase(view.partner_cards.begin() + a.slot);
        view.partner_knowledge.erase(view.partner_knowledge.begin() + a.slot);
      }
      if (a.kind == ActionKind::Play) {
        if (ev.success != view.fireworks.playable(card)) desync("play outcome mismatch");
        if (ev.success) {
          view.fireworks.top[color_index(card.color)] = card.rank;
          if (card.rank == kNumRanks && view.info_tokens < kMaxInfoTokens) ++view.info_tokens;
        } else {
          ++view.strikes;
          view.discard_pile.push_back(card);
          view.discards.add(card);
        }
      } else {
        if (view.info_tokens >= kMaxInfoTokens) desync("discard at max tokens");
        ++view.info_tokens;
        view.discard_pile.push_back(card);
        view.discards.add(card);
      }
      if (view.deck_size > 0) {
        --view.deck_size;
        CardKnowledge fresh;
        fresh.drawn_turn = ev.turn;
        if (self) {
          view.own.push_back(fresh);
        } else {
          if (!ev.drawn) desync("partner draw without a card");
          view.partner_cards.push_back(*ev.drawn);
          view.partner_knowledge.push_back(fresh);
        }
      }
      break;
    }
    case ActionKind::ClueColor:
    case ActionKind::ClueRank: {
      if (view.info_tokens <= 0) desync("clue without info tokens");
      if (a.target == view.viewer) {
        if (self) desync("clue to self");
        apply_clue(view.own, a, ev.touched);
        check_masks(view.own);
      } else {
        if (!self) desync("clue target is not a player");
        if (touched_slots(view.partner_cards, a) != ev.touched) desync("clue touch mismatch");
        apply_clue(view.partner_knowledge, a, ev.touched);
      }
      --view.info_tokens;
      break;
    }
  }
  if (ev.deck_size_after != view.deck_size) desync("deck size mismatch");

  ResolvedEvent stored = ev;
  if (self) stored.drawn.reset();
  view.history.push_back(stored);
  ++view.turn;
  view.current_player = 1 - view.current_player;

  if (deck_was_empty) ++view.turns_after_deck_empty;
  view.terminal = view.strikes >= kMaxStrikes || view.fireworks.score() == kMaxScore ||
                  view.turns_after_deck_empty >= kNumPlayers;
}

double GiveUpCurve::operator()(int deck_size) const {
  if (deck_size < 0 || deck_size > kInitialDeckSize)
    throw ContractViolation("deck size out of range: " + std::to_string(deck_size));
  return floor + amplitude * std::pow(static_cast<double>(deck_size) / kInitialDeckSize, exponent);
}

double give_up_threshold(int deck_size, const GiveUpCurve& curve) { return curve(deck_size); }

int deficit(Card card, const Fireworks& fireworks) {
  const int d = card.rank - fireworks[card.color];
  return d > 0 ? d : 0;
}

bool is_endangered(Card card, const Fireworks& fireworks, const CardCounts& discards) {
  if (fireworks.already_played(card)) return false;
  return copies_of_rank(card.rank) - discards[card] == 1;
}

bool is_dead(Card card, const Fireworks& fireworks, const CardCounts& discards) {
  if (fireworks.already_played(card)) return true;
  for (int r = fireworks[card.color] + 1; r < card.rank; ++r)
    if (discards[Card{card.color, r}] == copies_of_rank(r)) return true;
  return false;
}

bool is_unneeded(Card card, const Fireworks& fireworks, const CardCounts& discards,
                 int deck_size, const GiveUpCurve& curve) {
  if (is_dead(card, fireworks, discards)) return true;
  return deficit(card, fireworks) > curve(deck_size);
}

namespace {

const CardKnowledge& own_slot(const PlayerView& view, int slot) {
  if (slot < 0 || slot >= static_cast<int>(view.own.size()))
    throw ContractViolation("slot " + std::to_string(slot) + " is not occupied");
  return view.own[slot];
}

}  // namespace

Rational prob_playable(const PlayerView& view, int slot) {
  const auto& k = own_slot(view, slot);
  return mask_probability(k.possible, unseen_counts(view),
                          [&](Card c) { return view.fireworks.playable(c); });
}

Rational prob_non_endangered(const PlayerView& view, int slot) {
  const auto& k = own_slot(view, slot);
  return mask_probability(k.possible, unseen_counts(view), [&](Card c) {
    return !is_endangered(c, view.fireworks, view.discards);
  });
}

Rational prob_unneeded(const PlayerView& view, int slot, const GiveUpCurve& curve) {
  const auto& k = own_slot(view, slot);
  return mask_probability(k.possible, unseen_counts(view), [&](Card c) {
    return is_unneeded(c, view.fireworks, view.discards, view.deck_size, curve);
  });
}

}  // namespace cyclone
