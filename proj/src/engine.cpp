#include "cyclone/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <random>
#include <sstream>

namespace cyclone {

IdentityMask ActionSpec::clue_mask() const {
  if (kind == ActionKind::ClueColor && value >= 0 && value < kNumColors)
    return IdentityMask::of_color(static_cast<Color>(value));
  if (kind == ActionKind::ClueRank && value >= 1 && value <= kNumRanks)
    return IdentityMask::of_rank(value);
  return {};
}

std::string to_string(const ActionSpec& action) {
  switch (action.kind) {
    case ActionKind::Play:
      return "P" + std::to_string(action.slot);
    case ActionKind::Discard:
      return "D" + std::to_string(action.slot);
    case ActionKind::ClueColor:
      if (action.value < 0 || action.value >= kNumColors) return "C?";
      return std::string{'C', kColorChar[action.value]};
    case ActionKind::ClueRank:
      return "C" + std::to_string(action.value);
  }
  return "?";
}

std::optional<ActionSpec> parse_action(std::string_view text, int actor) {
  if (text.size() != 2) return std::nullopt;
  const char kind = text[0];
  const char arg = text[1];
  if (kind == 'P' || kind == 'D') {
    if (arg < '0' || arg > '9') return std::nullopt;
    int slot = arg - '0';
    return kind == 'P' ? ActionSpec::play(slot) : ActionSpec::discard(slot);
  }
  if (kind == 'C') {
    const int target = 1 - actor;
    if (auto color = parse_color(arg)) return ActionSpec::clue_color(target, *color);
    if (arg >= '1' && arg <= '5') return ActionSpec::clue_rank(target, arg - '0');
  }
  return std::nullopt;
}

void RulesConfig::validate() const {
  if (hand_size != kHandSize)
    throw ConfigError("hand size must be " + std::to_string(kHandSize) +
                      " for two-player games, got " + std::to_string(hand_size));
}

std::string RulesConfig::canonical() const {
  return "hand=" + std::to_string(hand_size) +
         " strikeout=" + (strike_out == StrikeOutScoring::Zero ? "zero" : "keep");
}

std::uint32_t RulesConfig::hash() const {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::GameOver: return "game_over";
    case RejectReason::SlotOutOfRange: return "slot_out_of_range";
    case RejectReason::DiscardAtMaxTokens: return "discard_at_max_tokens";
    case RejectReason::NoInfoTokens: return "no_info_tokens";
    case RejectReason::BadClueTarget: return "bad_clue_target";
    case RejectReason::BadClueValue: return "bad_clue_value";
    case RejectReason::ClueTouchesNothing: return "clue_touches_nothing";
  }
  return "unknown";
}

IllegalActionError::IllegalActionError(RejectReason reason, const ActionSpec& action)
    : std::runtime_error("illegal action " + to_string(action) + ": " +
                         std::string(to_string(reason))),
      reason_(reason) {}

DeckOrder standard_deck() {
  DeckOrder deck{};
  int n = 0;
  for (int c = 0; c < kNumColors; ++c)
    for (int r = 1; r <= kNumRanks; ++r)
      for (int k = 0; k < copies_of_rank(r); ++k) deck[n++] = Card{static_cast<Color>(c), r};
  return deck;
}

namespace {

// Unbiased draw in [0, bound) by rejection.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

DeckOrder shuffled_deck(std::uint64_t seed) {
  DeckOrder deck = standard_deck();
  std::mt19937_64 rng(seed);
  for (int i = kDeckSize - 1; i > 0; --i) {
    auto j = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(deck[i], deck[j]);
  }
  return deck;
}

std::vector<Card> GameState::deck() const {
  return {deck_order_.begin() + next_draw_, deck_order_.end()};
}

bool GameState::terminal() const {
  return strikes_ >= kMaxStrikes || fireworks_.score() == kMaxScore ||
         turns_after_deck_empty_ >= kNumPlayers;
}

int GameState::score() const {
  if (strikes_ >= kMaxStrikes && config_.strike_out == StrikeOutScoring::Zero) return 0;
  return fireworks_.score();
}

std::uint8_t touched_slots(const std::vector<Card>& hand, const ActionSpec& clue) {
  const IdentityMask mask = clue.clue_mask();
  std::uint8_t bits = 0;
  for (std::size_t i = 0; i < hand.size(); ++i)
    if (mask.contains(hand[i])) bits |= static_cast<std::uint8_t>(1u << i);
  return bits;
}

std::optional<RejectReason> check_action(const GameState& state, const ActionSpec& action) {
  if (state.terminal()) return RejectReason::GameOver;
  const int actor = state.current_player();
  switch (action.kind) {
    case ActionKind::Play:
    case ActionKind::Discard: {
      const int n = static_cast<int>(state.hand(actor).size());
      if (action.slot < 0 || action.slot >= n) return RejectReason::SlotOutOfRange;
      if (action.kind == ActionKind::Discard && state.info_tokens() >= kMaxInfoTokens)
        return RejectReason::DiscardAtMaxTokens;
      return std::nullopt;
    }
    case ActionKind::ClueColor:
    case ActionKind::ClueRank: {
      if (action.target != 1 - actor) return RejectReason::BadClueTarget;
      if (action.clue_mask().empty()) return RejectReason::BadClueValue;
      if (state.info_tokens() <= 0) return RejectReason::NoInfoTokens;
      if (touched_slots(state.hand(action.target), action) == 0)
        return RejectReason::ClueTouchesNothing;
      return std::nullopt;
    }
  }
  return RejectReason::BadClueValue;
}

std::vector<ActionSpec> legal_actions(const GameState& state) {
  if (state.terminal()) throw ContractViolation("legal_actions called on a terminal state");
  std::vector<ActionSpec> out;
  const int actor = state.current_player();
  const int target = 1 - actor;
  const int n = static_cast<int>(state.hand(actor).size());
  for (int s = 0; s < n; ++s) out.push_back(ActionSpec::play(s));
  if (state.info_tokens() < kMaxInfoTokens)
    for (int s = 0; s < n; ++s) out.push_back(ActionSpec::discard(s));
  if (state.info_tokens() > 0) {
    const auto& target_hand = state.hand(target);
    for (int c = 0; c < kNumColors; ++c) {
      auto clue = ActionSpec::clue_color(target, static_cast<Color>(c));
      if (touched_slots(target_hand, clue)) out.push_back(clue);
    }
    for (int r = 1; r <= kNumRanks; ++r) {
      auto clue = ActionSpec::clue_rank(target, r);
      if (touched_slots(target_hand, clue)) out.push_back(clue);
    }
  }
  return out;
}

ResolvedEvent GameState::apply(const ActionSpec& action) {
  if (auto reason = check_action(*this, action)) throw IllegalActionError(*reason, action);

  ResolvedEvent ev;
  ev.turn = turn();
  ev.actor = current_player_;
  ev.action = action;

  auto& hand = hands_[current_player_];
  bool draws = false;
  switch (action.kind) {
    case ActionKind::Play: {
      const Card card = hand[action.slot];
      hand.erase(hand.begin() + action.slot);
      ev.card = card;
      if (fireworks_.playable(card)) {
        ev.success = true;
        fireworks_.top[color_index(card.color)] = card.rank;
        if (card.rank == kNumRanks && info_tokens_ < kMaxInfoTokens) ++info_tokens_;
      } else {
        ++strikes_;
        discard_pile_.push_back(card);
        discard_counts_.add(card);
      }
      draws = true;
      break;
    }
    case ActionKind::Discard: {
      const Card card = hand[action.slot];
      hand.erase(hand.begin() + action.slot);
      ev.card = card;
      discard_pile_.push_back(card);
      discard_counts_.add(card);
      ++info_tokens_;
      draws = true;
      break;
    }
    case ActionKind::ClueColor:
    case ActionKind::ClueRank:
      ev.touched = touched_slots(hands_[action.target], action);
      --info_tokens_;
      break;
  }

  // Turns taken after the deck ran out count toward the final round; the
  // turn that draws the last card does not.
  if (deck_emptied_) ++turns_after_deck_empty_;
  if (draws && next_draw_ < kDeckSize) {
    const Card drawn = deck_order_[next_draw_++];
    hand.push_back(drawn);
    ev.drawn = drawn;
    if (next_draw_ == kDeckSize) deck_emptied_ = true;
  }
  ev.deck_size_after = deck_size();
  current_player_ = 1 - current_player_;
  history_.push_back(ev);
  return ev;
}

std::pair<GameState, ResolvedEvent> apply_action(GameState state, const ActionSpec& action) {
  ResolvedEvent ev = state.apply(action);
  return {std::move(state), ev};
}

GameState new_game_with_deck(const DeckOrder& deck, const RulesConfig& config,
                             std::uint64_t seed) {
  config.validate();
  CardCounts counts;
  for (const Card& c : deck) {
    if (c.rank < 1 || c.rank > kNumRanks || color_index(c.color) >= kNumColors)
      throw ConfigError("deck contains an invalid card");
    counts.add(c);
  }
  if (!(counts == CardCounts::full_deck()))
    throw ConfigError("deck is not the standard 50-card composition");

  GameState s;
  s.config_ = config;
  s.seed_ = seed;
  s.deck_order_ = deck;
  for (int p = 0; p < kNumPlayers; ++p)
    for (int i = 0; i < config.hand_size; ++i) s.hands_[p].push_back(deck[s.next_draw_++]);
  return s;
}

GameState new_game(std::uint64_t seed, const RulesConfig& config) {
  config.validate();
  return new_game_with_deck(shuffled_deck(seed), config, seed);
}

// ---------------------------------------------------------------------------

ReplayError::ReplayError(std::size_t index, const std::string& what)
    : std::runtime_error("replay failed at action " + std::to_string(index) + ": " + what),
      index_(index) {}

GameLog make_log(const GameState& state, bool include_deck) {
  GameLog log;
  log.seed = state.seed();
  log.config = state.config();
  if (include_deck) log.deck = state.deck_order();
  log.actions.reserve(state.history().size());
  for (const auto& ev : state.history()) log.actions.push_back(ev.action);
  return log;
}

GameState replay_prefix(const GameLog& log, std::size_t count) {
  GameState state = log.deck ? new_game_with_deck(*log.deck, log.config, log.seed)
                             : new_game(log.seed, log.config);
  if (count > log.actions.size()) throw ReplayError(count, "prefix longer than log");
  for (std::size_t i = 0; i < count; ++i) {
    try {
      state.apply(log.actions[i]);
    } catch (const IllegalActionError& e) {
      throw ReplayError(i, e.what());
    }
  }
  return state;
}

GameState replay(const GameLog& log) { return replay_prefix(log, log.actions.size()); }

namespace {

constexpr std::string_view kLogMagic = "#cyclone-gamelog v1";

std::uint64_t parse_u64(std::string_view s, const char* field) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw LogFormatError(std::string("bad ") + field + ": '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      throw LogFormatError("log must end with a newline");
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string_view expect_prefix(std::string_view line, std::string_view key) {
  if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ')
    throw LogFormatError("expected '" + std::string(key) + "' line, got '" + std::string(line) + "'");
  return line.substr(key.size() + 1);
}

}  // namespace

// Layout (every line newline-terminated):
//   #cyclone-gamelog v1
//   seed <u64>
//   config <canonical> hash=<8 hex>
//   deck <50 cards>            (optional)
//   actions <n>
//   <n lines: "<actor> <compact action>">
//   end
std::string serialize(const GameLog& log) {
  std::ostringstream out;
  out << kLogMagic << '\n';
  out << "seed " << log.seed << '\n';
  char hash[9];
  std::snprintf(hash, sizeof hash, "%08x", log.config.hash());
  out << "config " << log.config.canonical() << " hash=" << hash << '\n';
  if (log.deck) {
    out << "deck";
    for (const Card& c : *log.deck) out << ' ' << to_string(c);
    out << '\n';
  }
  out << "actions " << log.actions.size() << '\n';
  // Two-player games alternate strictly, starting with seat 0.
  for (std::size_t i = 0; i < log.actions.size(); ++i)
    out << (i % kNumPlayers) << ' ' << to_string(log.actions[i]) << '\n';
  out << "end\n";
  return out.str();
}

GameLog parse_game_log(std::string_view text) {
  auto lines = split_lines(text);
  std::size_t li = 0;
  auto next = [&]() -> std::string_view {
    if (li >= lines.size()) throw LogFormatError("unexpected end of log");
    return lines[li++];
  };

  if (next() != kLogMagic) throw LogFormatError("missing or unsupported log header");
  GameLog log;
  log.seed = parse_u64(expect_prefix(next(), "seed"), "seed");

  std::string_view cfg = expect_prefix(next(), "config");
  auto hpos = cfg.rfind(" hash=");
  if (hpos == std::string_view::npos) throw LogFormatError("config line lacks hash");
  std::string_view canon = cfg.substr(0, hpos);
  std::string_view hash_hex = cfg.substr(hpos + 6);
  if (canon == RulesConfig{}.canonical()) {
    log.config = RulesConfig{};
  } else {
    RulesConfig keep;
    keep.strike_out = StrikeOutScoring::KeepFireworks;
    if (canon != keep.canonical()) throw LogFormatError("unsupported config '" + std::string(canon) + "'");
    log.config = keep;
  }
  char expect_hash[9];
  std::snprintf(expect_hash, sizeof expect_hash, "%08x", log.config.hash());
  if (hash_hex != expect_hash) throw LogFormatError("config hash mismatch");

  std::string_view line = next();
  if (line.substr(0, 5) == "deck ") {
    DeckOrder deck{};
    std::string_view rest = line.substr(5);
    for (int i = 0; i < kDeckSize; ++i) {
      std::string_view tok = rest.substr(0, 2);
      auto card = parse_card(tok);
      if (!card) throw LogFormatError("bad deck card '" + std::string(tok) + "'");
      deck[i] = *card;
      rest.remove_prefix(std::min<std::size_t>(rest.size(), 2));
      if (i + 1 < kDeckSize) {
        if (rest.empty() || rest[0] != ' ') throw LogFormatError("deck must list 50 cards");
        rest.remove_prefix(1);
      }
    }
    if (!rest.empty()) throw LogFormatError("deck must list 50 cards");
    log.deck = deck;
    line = next();
  }

  const auto n = parse_u64(expect_prefix(line, "actions"), "action count");
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string_view rec = next();
    const int actor = static_cast<int>(i % kNumPlayers);
    if (rec.size() != 4 || rec[0] != static_cast<char>('0' + actor) || rec[1] != ' ')
      throw LogFormatError("bad action record '" + std::string(rec) + "'");
    auto action = parse_action(rec.substr(2), actor);
    if (!action) throw LogFormatError("bad action '" + std::string(rec.substr(2)) + "'");
    log.actions.push_back(*action);
  }
  if (next() != "end") throw LogFormatError("missing end marker");
  if (li != lines.size()) throw LogFormatError("trailing data after end marker");
  return log;
}

}  // namespace cyclone
