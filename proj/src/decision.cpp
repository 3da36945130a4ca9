#include "cyclone/decision.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace cyclone {

namespace {

constexpr std::array<std::string_view, kNumFactors> kFactorNames{
    "play_playable",
    "misplay_few_strikes",
    "misplay_two_strikes",
    "other_play_playable",
    "other_misplay",
    "discard_non_endangered",
    "discard_unneeded",
    "play_singled_out",
    "clue_singles_playable",
    "clue_singles_non_playable",
    "discard_singled_out",
    "clue_info_tokens",
};

constexpr std::string_view kWeightsFormat = "cyclone-weights";
constexpr int kWeightsVersion = 1;

}  // namespace

std::string_view factor_name(Factor f) { return kFactorNames[index(f)]; }

std::optional<Factor> parse_factor(std::string_view name) {
  for (int i = 0; i < kNumFactors; ++i)
    if (kFactorNames[i] == name) return static_cast<Factor>(i);
  return std::nullopt;
}

FactorGroup factor_group(Factor f) {
  if (index(f) <= index(Factor::OtherMisplay)) return FactorGroup::Play;
  if (index(f) <= index(Factor::DiscardUnneeded)) return FactorGroup::Discard;
  return FactorGroup::Conventions;
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::HumanLike: return "human-like";
    case Preset::HumanComplementary: return "human-complementary";
    case Preset::SelfPlay: return "self-play";
  }
  return "?";
}

std::optional<Preset> parse_preset(std::string_view name) {
  for (Preset p : kAllPresets)
    if (preset_name(p) == name) return p;
  if (name == "human-compl") return Preset::HumanComplementary;
  return std::nullopt;
}

WeightVector preset(Preset p, bool literal_signs) {
  WeightVector w;
  w.name = std::string(preset_name(p));
  const double two_strike = literal_signs ? 3.0 : -3.0;
  using F = Factor;
  switch (p) {
    case Preset::HumanLike:
      w[F::PlayPlayable] = 1;
      w[F::MisplayFewStrikes] = -1;
      w[F::MisplayTwoStrikes] = two_strike;
      w[F::OtherPlayPlayable] = 1.5;
      w[F::OtherMisplay] = 0;
      w[F::DiscardNonEndangered] = 0.1;
      w[F::DiscardUnneeded] = 0.25;
      w[F::PlaySingledOut] = 3;
      w[F::ClueSinglesPlayable] = 3;
      w[F::ClueSinglesNonPlayable] = 0;
      w[F::DiscardSingledOut] = -0.5;
      w[F::ClueInfoTokens] = 0.5;
      break;
    case Preset::HumanComplementary:
      w.dominance[index(F::PlayPlayable)] = +1;
      w[F::MisplayFewStrikes] = -1;
      w.dominance[index(F::MisplayTwoStrikes)] = -1;
      w[F::OtherPlayPlayable] = 10;
      w[F::OtherMisplay] = 0;
      w[F::DiscardNonEndangered] = 0.55;
      w[F::DiscardUnneeded] = 1;
      w[F::PlaySingledOut] = 1.5;
      w[F::ClueSinglesPlayable] = 3;
      w[F::ClueSinglesNonPlayable] = -5;
      w[F::DiscardSingledOut] = -2;
      w[F::ClueInfoTokens] = 0.1;
      break;
    case Preset::SelfPlay:
      w[F::PlayPlayable] = 11;
      w[F::MisplayFewStrikes] = -1;
      w[F::MisplayTwoStrikes] = two_strike;
      w[F::OtherPlayPlayable] = 2;
      w[F::OtherMisplay] = 1;
      w[F::DiscardNonEndangered] = 0.8;
      w[F::DiscardUnneeded] = 0;
      w[F::PlaySingledOut] = 5;
      w[F::ClueSinglesPlayable] = 2;
      w[F::ClueSinglesNonPlayable] = -4;
      w[F::DiscardSingledOut] = -3;
      w[F::ClueInfoTokens] = 0;
      break;
  }
  return w;
}

std::string serialize_weights(const WeightVector& w) {
  nlohmann::ordered_json j;
  j["format"] = kWeightsFormat;
  j["version"] = kWeightsVersion;
  j["name"] = w.name;
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  for (int i = 0; i < kNumFactors; ++i) {
    const std::string key(kFactorNames[i]);
    if (w.dominance[i] > 0)
      weights[key] = "+inf";
    else if (w.dominance[i] < 0)
      weights[key] = "-inf";
    else
      weights[key] = w.w[i];
  }
  j["weights"] = weights;
  j["give_up_curve"] = {{"floor", w.curve.floor},
                        {"amplitude", w.curve.amplitude},
                        {"exponent", w.curve.exponent}};
  j["options"] = {
      {"dominance_mode", w.options.dominance == DominanceMode::Tier ? "tier" : "large_finite"},
      {"large_finite", w.options.large_finite},
      {"clue_aggregate", w.options.clue_aggregate == ClueAggregate::Sum ? "sum" : "max"}};
  return j.dump(2) + "\n";
}

WeightVector parse_weights(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw WeightFormatError(std::string("weights file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kWeightsFormat)
      throw WeightFormatError("not a weights file");
    if (j.at("version").get<int>() != kWeightsVersion)
      throw WeightFormatError("unsupported weights version");
    WeightVector w;
    w.name = j.value("name", "");
    const auto& weights = j.at("weights");
    for (auto it = weights.begin(); it != weights.end(); ++it) {
      auto f = parse_factor(it.key());
      if (!f) throw WeightFormatError("unknown factor '" + it.key() + "'");
      const int i = index(*f);
      if (it->is_string()) {
        const auto s = it->get<std::string>();
        if (s == "+inf" || s == "inf")
          w.dominance[i] = +1;
        else if (s == "-inf")
          w.dominance[i] = -1;
        else
          throw WeightFormatError("bad weight '" + s + "' for " + it.key());
        w.w[i] = 0;
      } else {
        w.w[i] = it->get<double>();
        if (!std::isfinite(w.w[i])) throw WeightFormatError("non-finite weight for " + it.key());
      }
    }
    if (j.contains("give_up_curve")) {
      const auto& c = j["give_up_curve"];
      w.curve.floor = c.value("floor", w.curve.floor);
      w.curve.amplitude = c.value("amplitude", w.curve.amplitude);
      w.curve.exponent = c.value("exponent", w.curve.exponent);
    }
    if (j.contains("options")) {
      const auto& o = j["options"];
      const auto mode = o.value("dominance_mode", std::string("tier"));
      if (mode == "tier")
        w.options.dominance = DominanceMode::Tier;
      else if (mode == "large_finite")
        w.options.dominance = DominanceMode::LargeFinite;
      else
        throw WeightFormatError("unknown dominance_mode '" + mode + "'");
      w.options.large_finite = o.value("large_finite", w.options.large_finite);
      const auto agg = o.value("clue_aggregate", std::string("sum"));
      if (agg == "sum")
        w.options.clue_aggregate = ClueAggregate::Sum;
      else if (agg == "max")
        w.options.clue_aggregate = ClueAggregate::Max;
      else
        throw WeightFormatError("unknown clue_aggregate '" + agg + "'");
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw WeightFormatError(std::string("malformed weights file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<ActionSpec> legal_actions(const PlayerView& view) {
  if (view.terminal) throw ContractViolation("legal_actions called on a terminal view");
  if (view.current_player != view.viewer)
    throw ContractViolation("view does not belong to the player to move");
  std::vector<ActionSpec> out;
  const int n = static_cast<int>(view.own.size());
  for (int s = 0; s < n; ++s) out.push_back(ActionSpec::play(s));
  if (view.info_tokens < kMaxInfoTokens)
    for (int s = 0; s < n; ++s) out.push_back(ActionSpec::discard(s));
  if (view.info_tokens > 0) {
    const int target = view.partner();
    for (int c = 0; c < kNumColors; ++c) {
      auto clue = ActionSpec::clue_color(target, static_cast<Color>(c));
      if (touched_slots(view.partner_cards, clue)) out.push_back(clue);
    }
    for (int r = 1; r <= kNumRanks; ++r) {
      auto clue = ActionSpec::clue_rank(target, r);
      if (touched_slots(view.partner_cards, clue)) out.push_back(clue);
    }
  }
  return out;
}

CardCounts partner_unseen_estimate(const PlayerView& view) {
  CardCounts counts = CardCounts::full_deck();
  for (int i = 0; i < kNumIdentities; ++i) counts.remove(Card::from_index(i), view.discards[i]);
  for (int c = 0; c < kNumColors; ++c)
    for (int r = 1; r <= view.fireworks.top[c]; ++r) counts.remove(Card{static_cast<Color>(c), r});
  for (const auto& k : view.own)
    if (k.possible.size() == 1)
      for (int i = 0; i < kNumIdentities; ++i)
        if (k.possible.contains(i) && counts[i] > 0) counts.remove(Card::from_index(i));
  return counts;
}

TeammateProbs teammate_play_probs(const PlayerView& view,
                                  const std::optional<ActionSpec>& hypothetical_clue) {
  std::vector<CardKnowledge> knowledge = view.partner_knowledge;
  if (hypothetical_clue) {
    if (!hypothetical_clue->is_clue() || hypothetical_clue->target != view.partner())
      throw ContractViolation("hypothetical event must be a clue to the partner");
    apply_clue(knowledge, *hypothetical_clue,
               touched_slots(view.partner_cards, *hypothetical_clue));
  }
  const CardCounts unseen = partner_unseen_estimate(view);
  TeammateProbs out;
  out.play.reserve(knowledge.size());
  out.discard.reserve(knowledge.size());
  for (const auto& k : knowledge) {
    out.play.push_back(
        mask_probability(k.possible, unseen, [&](Card c) { return view.fireworks.playable(c); }));
    out.discard.push_back(mask_probability(k.possible, unseen, [&](Card c) {
      return !is_endangered(c, view.fireworks, view.discards);
    }));
  }
  return out;
}

namespace {

FactorVector factors_of_legal(const PlayerView& view, const ActionSpec& action,
                              const GiveUpCurve& curve, ClueAggregate aggregate) {
  FactorVector h;
  using F = Factor;
  switch (action.kind) {
    case ActionKind::Play: {
      const double p = prob_playable(view, action.slot).value();
      h[F::PlayPlayable] = p;
      h[F::MisplayFewStrikes] = view.strikes < 2 ? 1.0 - p : 0.0;
      h[F::MisplayTwoStrikes] = view.strikes == 2 ? 1.0 - p : 0.0;
      h[F::PlaySingledOut] = view.own[action.slot].singled_out ? 1.0 : 0.0;
      break;
    }
    case ActionKind::Discard:
      h[F::DiscardNonEndangered] = prob_non_endangered(view, action.slot).value();
      h[F::DiscardUnneeded] = prob_unneeded(view, action.slot, curve).value();
      h[F::DiscardSingledOut] = view.own[action.slot].singled_out ? 1.0 : 0.0;
      break;
    case ActionKind::ClueColor:
    case ActionKind::ClueRank: {
      const TeammateProbs probs = teammate_play_probs(view, action);
      double playable = 0.0, unplayable = 0.0;
      for (std::size_t i = 0; i < probs.play.size(); ++i) {
        const double p = probs.play[i].value();
        double& bucket = view.fireworks.playable(view.partner_cards[i]) ? playable : unplayable;
        bucket = aggregate == ClueAggregate::Sum ? bucket + p : std::max(bucket, p);
      }
      h[F::OtherPlayPlayable] = playable;
      h[F::OtherMisplay] = unplayable;
      if (auto target = single_out_target(view, action)) {
        if (view.fireworks.playable(view.partner_cards[*target]))
          h[F::ClueSinglesPlayable] = 1.0;
        else
          h[F::ClueSinglesNonPlayable] = 1.0;
      }
      h[F::ClueInfoTokens] = view.info_tokens;
      break;
    }
  }
  return h;
}

}  // namespace

FactorVector factor_vector(const PlayerView& view, const ActionSpec& action,
                           const GiveUpCurve& curve, ClueAggregate aggregate) {
  const auto legal = legal_actions(view);
  if (std::find(legal.begin(), legal.end(), action) == legal.end())
    throw ContractViolation("factor_vector: illegal action " + to_string(action));
  return factors_of_legal(view, action, curve, aggregate);
}

double finite_value(const FactorVector& h, const WeightVector& w) {
  double ev = 0.0;
  for (int i = 0; i < kNumFactors; ++i) {
    if (w.dominance[i] == 0)
      ev += w.w[i] * h.h[i];
    else if (w.options.dominance == DominanceMode::LargeFinite)
      ev += w.dominance[i] * w.options.large_finite * h.h[i];
  }
  return ev;
}

double dominant_value(const FactorVector& h, const WeightVector& w) {
  if (w.options.dominance != DominanceMode::Tier) return 0.0;
  double tier = 0.0;
  for (int i = 0; i < kNumFactors; ++i)
    if (w.dominance[i] != 0) tier += w.dominance[i] * h.h[i];
  return tier;
}

std::vector<ActionEvaluation> expected_values(const PlayerView& view, const WeightVector& w) {
  const auto actions = legal_actions(view);
  if (actions.empty()) throw ContractViolation("no legal actions");
  std::vector<ActionEvaluation> out;
  out.reserve(actions.size());
  for (const auto& a : actions) {
    ActionEvaluation e;
    e.action = a;
    e.h = factors_of_legal(view, a, w.curve, w.options.clue_aggregate);
    e.dominant_tier = dominant_value(e.h, w);
    e.ev = finite_value(e.h, w);
    out.push_back(e);
  }
  return out;
}

std::size_t best_index(const std::vector<ActionEvaluation>& evals) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < evals.size(); ++i) {
    const auto& a = evals[i];
    const auto& b = evals[best];
    if (a.dominant_tier > b.dominant_tier ||
        (a.dominant_tier == b.dominant_tier && a.ev > b.ev))
      best = i;
  }
  return best;
}

ActionSpec choose_action(const PlayerView& view, const WeightVector& w) {
  const auto evals = expected_values(view, w);
  return evals[best_index(evals)].action;
}

}  // namespace cyclone
