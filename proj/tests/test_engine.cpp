#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"

#include "cyclone/engine.hpp"
#include "support.hpp"

using namespace cyclone;

namespace {

Card C(const char* s) { return *parse_card(s); }

// Fisher-Yates from the top, uniform j in [0, i] by rejection on 64-bit draws.
DeckOrder reference_shuffle(std::uint64_t seed) {
  std::vector<Card> cards;
  const char colors[] = "RYGWB";
  const int copies[] = {0, 3, 2, 2, 2, 1};
  for (int c = 0; c < 5; ++c)
    for (int r = 1; r <= 5; ++r)
      for (int k = 0; k < copies[r]; ++k) cards.push_back(*parse_card(std::string{colors[c], char('0' + r)}));
  std::mt19937_64 rng(seed);
  for (int i = 49; i > 0; --i) {
    const std::uint64_t n = static_cast<std::uint64_t>(i) + 1;
    const std::uint64_t reject_from = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= reject_from) x = rng();
    std::swap(cards[i], cards[x % n]);
  }
  DeckOrder d{};
  std::copy(cards.begin(), cards.end(), d.begin());
  return d;
}

std::string deck_text(const DeckOrder& d, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += to_string(d[i]) + (i + 1 < n ? " " : "");
  return s;
}

GameState fresh_with_hands(std::vector<Card> h0, std::vector<Card> h1) {
  GameState s = new_game(3);
  s.set_hand_for_testing(0, std::move(h0));
  s.set_hand_for_testing(1, std::move(h1));
  return s;
}

}  // namespace

TEST_CASE("cards parse and print") {
  CHECK(to_string(Card{Color::Red, 3}) == "R3");
  CHECK(*parse_card("B5") == Card{Color::Blue, 5});
  CHECK_FALSE(parse_card("X1"));
  CHECK_FALSE(parse_card("R6"));
  CHECK_FALSE(parse_card("R"));
  for (int i = 0; i < kNumIdentities; ++i) CHECK(Card::from_index(i).index() == i);
  CHECK(CardCounts::full_deck().total() == 50);
}

TEST_CASE("new game deals five cards each and leaves forty") {
  const GameState s = new_game(42);
  CHECK(s.deck_size() == 40);
  CHECK(s.info_tokens() == 8);
  CHECK(s.strikes() == 0);
  CHECK(s.fireworks().score() == 0);
  CHECK(s.hand(0).size() == 5);
  CHECK(s.hand(1).size() == 5);
  CHECK(s.current_player() == 0);
  CHECK_FALSE(s.terminal());
  CHECK(s.hand(0)[0] == s.deck_order()[0]);
  CHECK(s.hand(1)[0] == s.deck_order()[5]);
  CHECK(s.deck().front() == s.deck_order()[10]);
}

TEST_CASE("new game is deterministic in the seed") {
  CHECK(new_game(42) == new_game(42));
  CHECK_FALSE(new_game(42) == new_game(43));
  CHECK(oracle::conserved(new_game(7)));
}

TEST_CASE("shuffle matches an independent Fisher-Yates") {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 123456789ULL, ~0ULL}) CHECK(shuffled_deck(seed) == reference_shuffle(seed));
  // Frozen so that a change of generator or algorithm is caught.
  CHECK(deck_text(shuffled_deck(42), 10) == "Y3 B5 G1 R4 Y3 B4 R2 G4 G3 B1");
  CHECK(deck_text(standard_deck(), 12) == "R1 R1 R1 R2 R2 R3 R3 R4 R4 R5 Y1 Y1");
}

TEST_CASE("bad rules configuration is rejected") {
  RulesConfig r;
  r.hand_size = 4;
  CHECK_THROWS_AS(new_game(1, r), ConfigError);
  DeckOrder d = standard_deck();
  d[0] = d[49];
  CHECK_THROWS_AS(new_game_with_deck(d), ConfigError);
}

TEST_CASE("legal actions respect token limits") {
  GameState s = new_game(5);
  for (const auto& a : legal_actions(s)) CHECK(a.kind != ActionKind::Discard);
  s.set_tokens_for_testing(0);
  for (const auto& a : legal_actions(s)) CHECK_FALSE(a.is_clue());
  s.set_tokens_for_testing(3);
  int discards = 0;
  for (const auto& a : legal_actions(s)) discards += a.kind == ActionKind::Discard;
  CHECK(discards == 5);
}

TEST_CASE("legal actions come in canonical order") {
  GameState s = new_game(11);
  s.set_tokens_for_testing(4);
  const auto legal = legal_actions(s);
  auto rank = [](const ActionSpec& a) {
    switch (a.kind) {
      case ActionKind::Play: return 0 * 10 + a.slot;
      case ActionKind::Discard: return 1 * 10 + a.slot;
      case ActionKind::ClueColor: return 2 * 10 + a.value;
      case ActionKind::ClueRank: return 3 * 10 + a.value;
    }
    return 99;
  };
  for (std::size_t i = 1; i < legal.size(); ++i) CHECK(rank(legal[i - 1]) < rank(legal[i]));
}

TEST_CASE("target with five colours and three ranks gives 18 actions once discards are legal") {
  const auto s0 = fresh_with_hands({C("R1"), C("R2"), C("Y3"), C("G4"), C("W1")},
                                   {C("R1"), C("Y1"), C("G2"), C("W2"), C("B3")});
  // With all eight tokens discarding is illegal: 5 plays + 5 colours + 3 ranks.
  CHECK(legal_actions(s0).size() == 13);
  GameState s1 = s0;
  s1.set_tokens_for_testing(7);
  CHECK(legal_actions(s1).size() == 18);
}

TEST_CASE("a seeded deal with five colours and three ranks in the target hand") {
  // Search the seeds for the situation and check both counts on a real deal.
  int found = 0;
  for (std::uint64_t seed = 1; seed < 5000 && found < 3; ++seed) {
    GameState s = new_game(seed);
    std::set<int> colors, ranks;
    for (const Card& c : s.hand(1)) {
      colors.insert(color_index(c.color));
      ranks.insert(c.rank);
    }
    if (colors.size() != 5 || ranks.size() != 3) continue;
    ++found;
    CHECK(legal_actions(s).size() == 13);
    s.set_tokens_for_testing(7);
    CHECK(legal_actions(s).size() == 18);
  }
  CHECK(found == 3);
}

TEST_CASE("playing a red 1 on an empty firework") {
  GameState s = fresh_with_hands({C("R1"), C("R2"), C("Y3"), C("G4"), C("W1")},
                                 {C("R1"), C("Y1"), C("G2"), C("W2"), C("B3")});
  const auto ev = s.apply(ActionSpec::play(0));
  CHECK(ev.success);
  CHECK(s.fireworks()[Color::Red] == 1);
  CHECK(s.info_tokens() == 8);
  CHECK(s.hand(0).size() == 5);
  CHECK(s.hand(0).back() == *ev.drawn);
  CHECK(s.current_player() == 1);
}

TEST_CASE("a 5 restores a token, capped at eight") {
  GameState s = fresh_with_hands({C("B5"), C("R2"), C("Y3"), C("G4"), C("W1")},
                                 {C("R1"), C("Y1"), C("G2"), C("W2"), C("B3")});
  Fireworks f;
  f.top = {0, 0, 0, 0, 4};
  s.set_fireworks_for_testing(f);
  s.set_tokens_for_testing(6);
  s.apply(ActionSpec::play(0));
  CHECK(s.fireworks()[Color::Blue] == 5);
  CHECK(s.info_tokens() == 7);

  GameState t = fresh_with_hands({C("B5"), C("R2"), C("Y3"), C("G4"), C("W1")},
                                 {C("R1"), C("Y1"), C("G2"), C("W2"), C("B3")});
  t.set_fireworks_for_testing(f);
  t.apply(ActionSpec::play(0));
  CHECK(t.info_tokens() == 8);
}

TEST_CASE("a misplay strikes and discards without a token") {
  GameState s = fresh_with_hands({C("R3"), C("R2"), C("Y3"), C("G4"), C("W1")},
                                 {C("R1"), C("Y1"), C("G2"), C("W2"), C("B3")});
  s.set_tokens_for_testing(5);
  const auto ev = s.apply(ActionSpec::play(0));
  CHECK_FALSE(ev.success);
  CHECK(s.strikes() == 1);
  CHECK(s.info_tokens() == 5);
  REQUIRE(s.discard_pile().size() == 1);
  CHECK(s.discard_pile()[0] == C("R3"));
}

TEST_CASE("third strike ends the game, score per strike-out rule") {
  for (auto mode : {StrikeOutScoring::Zero, StrikeOutScoring::KeepFireworks}) {
    RulesConfig rules;
    rules.strike_out = mode;
    GameState s = new_game(3, rules);
    s.set_hand_for_testing(0, {C("R3"), C("R2"), C("Y3"), C("G4"), C("W1")});
    Fireworks f;
    f.top = {1, 2, 0, 0, 0};
    s.set_fireworks_for_testing(f);
    s.set_strikes_for_testing(2);
    s.apply(ActionSpec::play(0));
    CHECK(s.terminal());
    CHECK(s.strikes() == 3);
    CHECK(s.score() == (mode == StrikeOutScoring::Zero ? 0 : 3));
    CHECK_THROWS_AS(legal_actions(s), ContractViolation);
  }
}

TEST_CASE("discard restores a token") {
  GameState s = new_game(9);
  s.set_tokens_for_testing(2);
  const Card c = s.hand(0)[1];
  s.apply(ActionSpec::discard(1));
  CHECK(s.info_tokens() == 3);
  CHECK(s.discard_pile().back() == c);
}

TEST_CASE("clues spend a token and report touched slots") {
  GameState s = fresh_with_hands({C("R3"), C("R2"), C("Y3"), C("G4"), C("W1")},
                                 {C("R1"), C("Y1"), C("R2"), C("W2"), C("B3")});
  const auto ev = s.apply(ActionSpec::clue_color(1, Color::Red));
  CHECK(s.info_tokens() == 7);
  CHECK(ev.touched == 0b00101);
  CHECK(s.deck_size() == 40);
  const auto ev2 = s.apply(ActionSpec::clue_rank(0, 3));
  CHECK(ev2.touched == 0b00101);
}

TEST_CASE("illegal actions are rejected with a reason and no state change") {
  GameState s = fresh_with_hands({C("R3"), C("R2"), C("Y3"), C("G4"), C("W1")},
                                 {C("R1"), C("Y1"), C("R2"), C("W2"), C("B3")});
  const GameState before = s;
  auto reason = [&](const ActionSpec& a) {
    try {
      s.apply(a);
    } catch (const IllegalActionError& e) {
      return std::optional<RejectReason>(e.reason());
    }
    return std::optional<RejectReason>();
  };
  CHECK(reason(ActionSpec::discard(0)) == RejectReason::DiscardAtMaxTokens);
  CHECK(reason(ActionSpec::play(5)) == RejectReason::SlotOutOfRange);
  CHECK(reason(ActionSpec::clue_rank(1, 4)) == RejectReason::ClueTouchesNothing);
  CHECK(reason(ActionSpec::clue_rank(0, 3)) == RejectReason::BadClueTarget);
  CHECK(reason(ActionSpec::clue_rank(1, 6)) == RejectReason::BadClueValue);
  CHECK(s == before);
  s.set_tokens_for_testing(0);
  CHECK(reason(ActionSpec::clue_rank(1, 1)) == RejectReason::NoInfoTokens);
}

TEST_CASE("after the last draw each player moves exactly once more") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GameState s = new_game(seed);
    std::mt19937_64 rng(seed);
    int last_draw_turn = -1;
    while (!s.terminal()) {
      auto legal = legal_actions(s);
      // Prefer discards so the deck runs out without strikes.
      std::vector<ActionSpec> safe;
      for (const auto& a : legal)
        if (a.kind != ActionKind::Play) safe.push_back(a);
      const auto& pool = safe.empty() ? legal : safe;
      const auto ev = s.apply(pool[rng() % pool.size()]);
      if (ev.drawn && ev.deck_size_after == 0) last_draw_turn = ev.turn;
    }
    if (s.strikes() == 3 || s.fireworks().score() == 25) continue;
    ++checked;
    REQUIRE(last_draw_turn >= 0);
    CHECK(s.turn() == last_draw_turn + 1 + kNumPlayers);
  }
  CHECK(checked > 40);
}

TEST_CASE("random play keeps conservation and resource bounds") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    GameState s = new_game(seed);
    std::mt19937_64 rng(seed);
    int strikes = 0, score = 0;
    while (!s.terminal()) {
      const auto legal = legal_actions(s);
      s.apply(legal[rng() % legal.size()]);
      CHECK(oracle::conserved(s));
      CHECK(s.info_tokens() >= 0);
      CHECK(s.info_tokens() <= 8);
      CHECK(s.strikes() >= strikes);
      CHECK(s.strikes() <= 3);
      CHECK(s.fireworks_total() >= score);
      strikes = s.strikes();
      score = s.fireworks_total();
    }
  }
}

TEST_CASE("legal actions equal the brute-force rules on random states") {
  const auto candidates = oracle::all_candidate_actions();
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const GameState s = oracle::random_state(seed, static_cast<int>(seed % 70));
    if (s.terminal()) continue;
    std::vector<ActionSpec> expected;
    for (const auto& a : candidates)
      if (oracle::brute_legal(s, a)) expected.push_back(a);
    auto legal = legal_actions(s);
    auto key = [](const ActionSpec& a) { return std::tuple(int(a.kind), a.slot, a.value, a.target); };
    auto sorted = [&](std::vector<ActionSpec> v) {
      std::sort(v.begin(), v.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
      return v;
    };
    CHECK(sorted(legal) == sorted(expected));
    for (const auto& a : candidates) CHECK(check_action(s, a).has_value() == !oracle::brute_legal(s, a));
  }
}

TEST_CASE("pure apply_action leaves its input alone") {
  const GameState s = new_game(4);
  auto [next, ev] = apply_action(s, legal_actions(s).front());
  CHECK(s == new_game(4));
  CHECK(next.turn() == 1);
  CHECK(ev.turn == 0);
}

TEST_CASE("compact action text round-trips") {
  for (const char* t : {"P0", "P4", "D2", "CR", "CB", "C1", "C5"}) {
    auto a = parse_action(t, 1);
    REQUIRE(a);
    CHECK(to_string(*a) == t);
    if (a->is_clue()) CHECK(a->target == 0);
  }
  CHECK_FALSE(parse_action("P", 0));
  CHECK_FALSE(parse_action("C6", 0));
  CHECK_FALSE(parse_action("X1", 0));
}

TEST_CASE("game logs replay and round-trip") {
  GameState live = new_game(77);
  std::mt19937_64 rng(77);
  while (!live.terminal()) {
    const auto legal = legal_actions(live);
    live.apply(legal[rng() % legal.size()]);
  }
  for (bool with_deck : {false, true}) {
    const GameLog log = make_log(live, with_deck);
    CHECK(replay(log) == live);
    CHECK(replay(log).score() == live.score());
    const std::string text = serialize(log);
    CHECK(parse_game_log(text) == log);
    CHECK(serialize(parse_game_log(text)) == text);
  }
  GameLog empty;
  empty.seed = 77;
  CHECK(replay(empty) == new_game(77));

  // An explicit deck wins over the seed.
  GameLog with_deck = make_log(live, true);
  with_deck.seed = 999;
  GameState replayed = replay(with_deck);
  CHECK(replayed.hand(0) == live.hand(0));
  CHECK(replayed.fireworks() == live.fireworks());
  CHECK(replayed.score() == live.score());
}

TEST_CASE("replay names the first illegal action") {
  GameLog log;
  log.seed = 5;
  log.actions = {ActionSpec::play(0), ActionSpec::discard(9)};
  try {
    replay(log);
    FAIL("expected ReplayError");
  } catch (const ReplayError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("malformed logs are rejected") {
  GameLog log;
  log.seed = 5;
  log.actions = {ActionSpec::play(0), ActionSpec::clue_rank(0, 1)};
  const std::string good = serialize(log);
  CHECK(good.rfind("#cyclone-gamelog v1\nseed 5\nconfig hand=5 strikeout=zero hash=", 0) == 0);
  CHECK_NOTHROW(parse_game_log(good));
  CHECK_THROWS_AS(parse_game_log(good.substr(0, good.size() - 1)), LogFormatError);
  std::string bad_hash = good;
  bad_hash.replace(bad_hash.find("hash=") + 5, 8, "00000000");
  CHECK_THROWS_AS(parse_game_log(bad_hash), LogFormatError);
  std::string bad_actor = good;
  bad_actor.replace(bad_actor.find("\n0 P0") + 1, 1, "1");
  CHECK_THROWS_AS(parse_game_log(bad_actor), LogFormatError);
  CHECK_THROWS_AS(parse_game_log(good + "junk\n"), LogFormatError);
  CHECK_THROWS_AS(parse_game_log("nonsense\n"), LogFormatError);
}

TEST_CASE("config hash is FNV-1a of the canonical string") {
  auto fnv = [](const std::string& s) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : s) {
      h ^= c;
      h *= 16777619u;
    }
    return h;
  };
  RulesConfig r;
  CHECK(r.canonical() == "hand=5 strikeout=zero");
  CHECK(r.hash() == fnv("hand=5 strikeout=zero"));
  r.strike_out = StrikeOutScoring::KeepFireworks;
  CHECK(r.hash() == fnv("hand=5 strikeout=keep"));
}
