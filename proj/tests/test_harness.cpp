#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>

#include "cyclone/harness.hpp"
#include "support.hpp"

using namespace cyclone;

TEST_CASE("stats match the closed form") {
  std::mt19937_64 rng(3);
  for (int n : {1, 2, 7, 100, 1000}) {
    std::vector<int> scores(n);
    for (int& s : scores) s = static_cast<int>(rng() % 26);
    const auto st = compute_stats(scores, "a", "b");
    double mean = 0;
    for (int s : scores) mean += s;
    mean /= n;
    double var = 0;
    for (int s : scores) var += (s - mean) * (s - mean);
    const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    CHECK(st.n == n);
    CHECK(std::abs(st.mean - mean) < 1e-12);
    CHECK(std::abs(st.sd - sd) < 1e-12);
    CHECK(std::abs(st.ci95 - 1.96 * sd / std::sqrt(n)) < 1e-12);
    CHECK(std::accumulate(st.histogram.begin(), st.histogram.end(), 0) == n);
    for (int v = 0; v <= kMaxScore; ++v)
      CHECK(st.histogram[v] == std::count(scores.begin(), scores.end(), v));
    std::shuffle(scores.begin(), scores.end(), rng);
    CHECK(compute_stats(scores, "a", "b") == st);
  }
  const std::vector<int> ex{10, 20};
  const auto st = compute_stats(ex);
  CHECK(st.mean == 15.0);
  CHECK(st.sd == doctest::Approx(std::sqrt(50.0)));
}

TEST_CASE("bootstrap interval brackets the mean") {
  std::vector<int> scores;
  for (int i = 0; i < 200; ++i) scores.push_back(i % 21);
  const auto [lo, hi] = bootstrap_ci95(scores, 2000, 5);
  const double mean = compute_stats(scores).mean;
  CHECK(lo < mean);
  CHECK(mean < hi);
  CHECK(bootstrap_ci95(scores, 2000, 5) == std::pair{lo, hi});
  CHECK_THROWS_AS(bootstrap_ci95(std::vector<int>{}, 10, 1), ContractViolation);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  for (int threads : {1, 3, 8}) {
    std::vector<int> hit(97, 0);
    parallel_for(hit.size(), threads, [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  }
  CHECK_THROWS_AS(parallel_for(10, 2,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("play_game agrees with views rebuilt from scratch") {
  const auto hl = preset(Preset::HumanLike);
  const auto sp = preset(Preset::SelfPlay);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GameState s = new_game(seed);
    while (!s.terminal()) {
      const auto& w = s.current_player() == 0 ? hl : sp;
      s.apply(choose_action(make_view(s, s.current_player()), w));
    }
    const GameState fast = play_game(hl, sp, seed);
    CHECK(fast.history().size() == s.history().size());
    CHECK(fast.score() == s.score());
    CHECK(make_log(fast) == make_log(s));
  }
}

TEST_CASE("simulation is deterministic and seat-alternating") {
  const auto hl = preset(Preset::HumanLike);
  const auto hc = preset(Preset::HumanComplementary);
  SimulationOptions opts;
  opts.keep_logs = true;
  const auto r1 = simulate_games(hl, hc, 12, 100, opts);
  opts.threads = 4;
  const auto r2 = simulate_games(hl, hc, 12, 100, opts);
  CHECK(r1.scores == r2.scores);
  CHECK(r1.stats == r2.stats);
  REQUIRE(r1.logs.size() == 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(r1.logs[i].seed == 100u + i);
    const GameState g = i % 2 == 0 ? play_game(hl, hc, 100 + i) : play_game(hc, hl, 100 + i);
    CHECK(g.score() == r1.scores[i]);
    CHECK(replay(r1.logs[i]).score() == r1.scores[i]);
  }
  CHECK(r1.stats.label_a == "human-like");
  CHECK(r1.stats.label_b == "human-complementary");
  CHECK_THROWS_AS(simulate_games(hl, hc, 0, 1), ContractViolation);
}

TEST_CASE("crossplay table pools seats into six cells") {
  std::vector<WeightVector> ps;
  for (Preset p : kAllPresets) ps.push_back(preset(p));
  const auto t = crossplay_matrix(ps, 6, 50);
  CHECK(t.labels.size() == 3);
  int cells = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) {
      ++cells;
      CHECK(t.at(i, j).n == 6);
      CHECK(t.at(i, j) == t.at(j, i));
      CHECK(t.at(i, j) == simulate_games(ps[i], ps[j], 6, 50).stats);
    }
  CHECK(cells == 6);
  const auto text = crossplay_text(t);
  for (const auto& l : t.labels) CHECK(text.find(l) != std::string::npos);
  CHECK(text.find(" \n") == std::string::npos);
  CHECK(crossplay_json(t).find("\"cells\"") != std::string::npos);
}

TEST_CASE("decision capture and database round-trip") {
  const GameState end = play_game(preset(Preset::HumanLike), preset(Preset::SelfPlay), 9);
  const GameLog log = make_log(end, false);
  const auto recs = capture_decisions(log, "g1", {"human", "agent"});
  REQUIRE(recs.size() == log.actions.size());
  for (std::size_t t = 0; t < recs.size(); ++t) {
    CHECK(recs[t].turn == static_cast<int>(t));
    CHECK(recs[t].seat == static_cast<int>(t % 2));
    CHECK(recs[t].actor_tag == (t % 2 == 0 ? "human" : "agent"));
    CHECK(recs[t].action == log.actions[t]);
  }
  DecisionDatabase db;
  add_game(db, log, "g1", {"human", "agent"});
  add_game(db, make_log(play_game(preset(Preset::SelfPlay), preset(Preset::SelfPlay), 10)), "g2",
           {"x", "x"});
  const auto text = serialize_decisions(db);
  CHECK(parse_decisions(text) == db);
  CHECK(serialize_decisions(parse_decisions(text)) == text);

  CHECK_THROWS_AS(parse_decisions(""), LogFormatError);
  CHECK_THROWS_AS(parse_decisions("{\"format\":\"nope\",\"version\":1}\n"), LogFormatError);
  CHECK_THROWS_AS(parse_decisions(text + "{\"type\":\"mystery\"}\n"), LogFormatError);
  CHECK_THROWS_AS(parse_decisions(text + "not json\n"), LogFormatError);
}

TEST_CASE("materialize names the offending record") {
  DecisionDatabase db = generate_decisions(preset(Preset::HumanLike), 1, 3, "h");
  REQUIRE(db.records.size() > 5);
  auto expect_record = [](const DecisionDatabase& bad, std::size_t idx) {
    try {
      materialize(bad);
      FAIL("expected a validation error");
    } catch (const DecisionValidationError& e) {
      CHECK(e.record() == idx);
    }
  };
  auto bad = db;
  bad.records[3].game_id = "missing";
  expect_record(bad, 3);
  bad = db;
  bad.records[4].turn = 10000;
  expect_record(bad, 4);
  bad = db;
  bad.records[2].seat = 1 - bad.records[2].seat;
  expect_record(bad, 2);
  bad = db;
  bad.records[0].action = ActionSpec::discard(0);  // 8 tokens at the start
  expect_record(bad, 0);
}

TEST_CASE("humanness") {
  const auto hl = preset(Preset::HumanLike);
  const auto sp = preset(Preset::SelfPlay);
  const DecisionDatabase db = generate_decisions(hl, 4, 20, "human");
  const auto rep = evaluate_humanness(hl, db);
  CHECK(rep.fraction == 1.0);
  CHECK(rep.matches == rep.total);
  CHECK(rep.total == static_cast<int>(db.records.size()));
  CHECK(humanness(hl, materialize(db)) == 1.0);
  CHECK(humanness(hl, materialize(db), 4) == 1.0);

  // Four records of which only the first keeps its recorded action.
  DecisionDatabase four = db;
  four.records.resize(4);
  const auto cases = materialize(four);
  for (std::size_t i = 1; i < 4; ++i) {
    const auto legal = legal_actions(cases[i].view);
    const auto rec = choose_action(cases[i].view, hl);
    auto other = std::find_if(legal.begin(), legal.end(), [&](const ActionSpec& a) { return !(a == rec); });
    REQUIRE(other != legal.end());
    four.records[i].action = *other;
  }
  const auto r4 = evaluate_humanness(hl, four);
  CHECK(r4.fraction == 0.25);
  CHECK(r4.matched == std::vector<bool>{true, false, false, false});

  // Order and tags do not matter.
  const double base = evaluate_humanness(sp, db).fraction;
  DecisionDatabase shuffled = db;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);
  for (auto& r : shuffled.records) r.actor_tag = "someone";
  CHECK(evaluate_humanness(sp, shuffled).fraction == base);
  CHECK(base < 1.0);

  CHECK_THROWS_AS(evaluate_humanness(hl, DecisionDatabase{}), ContractViolation);
  CHECK_THROWS_AS(humanness(hl, std::span<const DecisionCase>{}), ContractViolation);
}

TEST_CASE("stats json carries the summary") {
  const std::vector<int> s{3, 4, 5};
  const auto j = stats_json(compute_stats(s, "x", "y"));
  CHECK(j.find("\"mean\"") != std::string::npos);
  CHECK(j.find("\"ci95\"") != std::string::npos);
  CHECK(j.find("\"histogram\"") != std::string::npos);
}
