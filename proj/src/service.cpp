#include "cyclone/service.hpp"

#include <cstdio>
#include <fstream>

namespace cyclone {

using Json = nlohmann::ordered_json;

ServiceError::ServiceError(int status, std::string code, const std::string& message,
                           std::string reason)
    : std::runtime_error(message), status_(status), code_(std::move(code)),
      reason_(std::move(reason)) {}

Json ServiceError::to_json() const {
  Json e;
  e["code"] = code_;
  if (!reason_.empty()) e["reason"] = reason_;
  e["message"] = what();
  Json j;
  j["error"] = e;
  return j;
}

namespace {

ServiceError bad_request(const std::string& message) {
  return ServiceError(400, "bad_request", message);
}

std::string color_string(Color c) { return std::string(1, color_char(c)); }

Json fireworks_json(const Fireworks& f) {
  Json j = Json::object();
  for (int c = 0; c < kNumColors; ++c) j[color_string(static_cast<Color>(c))] = f.top[c];
  return j;
}

Json cards_json(const std::vector<Card>& cards) {
  auto a = Json::array();
  for (const Card& c : cards) a.push_back(to_string(c));
  return a;
}

Json event_json(const ResolvedEvent& ev) {
  Json j;
  j["turn"] = ev.turn;
  j["actor"] = ev.actor;
  j["action"] = to_string(ev.action);
  if (ev.card) {
    j["card"] = to_string(*ev.card);
    if (ev.action.kind == ActionKind::Play) j["success"] = ev.success;
  }
  if (ev.action.is_clue()) {
    auto slots = Json::array();
    for (int i = 0; i < 8; ++i)
      if ((ev.touched >> i) & 1u) slots.push_back(i);
    j["touched"] = slots;
  }
  if (ev.drawn) j["drawn"] = to_string(*ev.drawn);
  j["deck_size"] = ev.deck_size_after;
  return j;
}

}  // namespace

Json knowledge_json(const CardKnowledge& k) {
  Json j;
  auto possible = Json::array();
  for (int i = 0; i < kNumIdentities; ++i)
    if (k.possible.contains(i)) possible.push_back(to_string(Card::from_index(i)));
  j["possible"] = possible;
  if (auto c = k.known_color())
    j["known_color"] = color_string(*c);
  else
    j["known_color"] = nullptr;
  if (auto r = k.known_rank())
    j["known_rank"] = *r;
  else
    j["known_rank"] = nullptr;
  j["clued"] = k.clued;
  j["singled_out"] = k.singled_out;
  j["drawn_turn"] = k.drawn_turn;
  return j;
}

Json view_json(const PlayerView& view) {
  Json j;
  j["seat"] = view.viewer;
  j["turn"] = view.turn;
  j["current_player"] = view.current_player;
  j["info_tokens"] = view.info_tokens;
  j["strikes"] = view.strikes;
  j["deck_size"] = view.deck_size;
  j["fireworks"] = fireworks_json(view.fireworks);
  j["discard_pile"] = cards_json(view.discard_pile);
  auto own = Json::array();
  for (std::size_t i = 0; i < view.own.size(); ++i) {
    Json c = knowledge_json(view.own[i]);
    c["slot"] = i;
    own.push_back(c);
  }
  j["own_hand"] = own;
  auto partner = Json::array();
  for (std::size_t i = 0; i < view.partner_cards.size(); ++i) {
    Json c;
    c["slot"] = i;
    c["card"] = to_string(view.partner_cards[i]);
    c["knowledge"] = knowledge_json(view.partner_knowledge[i]);
    partner.push_back(c);
  }
  j["partner_hand"] = partner;
  auto history = Json::array();
  for (const auto& ev : view.history) history.push_back(event_json(ev));
  j["history"] = history;
  return j;
}

ActionSpec parse_action_json(const nlohmann::json& body, int actor) {
  if (!body.is_object()) throw bad_request("action body must be a JSON object");
  if (body.contains("action")) {
    if (!body["action"].is_string()) throw bad_request("'action' must be a string");
    auto a = parse_action(body["action"].get<std::string>(), actor);
    if (!a) throw bad_request("cannot parse action '" + body["action"].get<std::string>() + "'");
    return *a;
  }
  if (!body.contains("kind") || !body["kind"].is_string()) throw bad_request("missing 'kind'");
  const auto kind = body["kind"].get<std::string>();
  const int partner = 1 - actor;
  auto slot = [&] {
    if (!body.contains("slot") || !body["slot"].is_number_integer())
      throw bad_request("'" + kind + "' needs an integer 'slot'");
    return body["slot"].get<int>();
  };
  if (kind == "play") return ActionSpec::play(slot());
  if (kind == "discard") return ActionSpec::discard(slot());
  if (kind == "clue") {
    if (body.contains("color")) {
      const auto& v = body["color"];
      if (!v.is_string() || v.get<std::string>().size() != 1) throw bad_request("bad clue color");
      auto c = parse_color(v.get<std::string>()[0]);
      if (!c) throw bad_request("bad clue color");
      return ActionSpec::clue_color(partner, *c);
    }
    if (body.contains("rank")) {
      if (!body["rank"].is_number_integer()) throw bad_request("bad clue rank");
      return ActionSpec::clue_rank(partner, body["rank"].get<int>());
    }
    throw bad_request("clue needs 'color' or 'rank'");
  }
  throw bad_request("unknown action kind '" + kind + "'");
}

SessionConfig parse_session_config(const nlohmann::json& body) {
  SessionConfig cfg;
  if (body.is_null()) return cfg;
  if (!body.is_object()) throw bad_request("session body must be a JSON object");
  try {
    if (body.contains("agent")) cfg.agent = body["agent"].get<std::string>();
    if (body.contains("seed") && !body["seed"].is_null()) cfg.seed = body["seed"].get<std::uint64_t>();
    if (body.contains("human_seat")) cfg.human_seat = body["human_seat"].get<int>();
    if (body.contains("capture")) cfg.capture = body["capture"].get<bool>();
    if (body.contains("human_tag")) cfg.human_tag = body["human_tag"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw bad_request(std::string("bad session field: ") + e.what());
  }
  if (cfg.human_seat != 0 && cfg.human_seat != 1) throw bad_request("human_seat must be 0 or 1");
  return cfg;
}

// ---------------------------------------------------------------------------

struct SessionManager::Session {
  mutable std::mutex mutex;
  std::string id;
  std::uint64_t seed = 0;
  WeightVector agent;
  int human_seat = 0;
  bool capture = true;
  std::string human_tag;
  GameState state;
  PlayerView human_view;
  PlayerView agent_view;
  std::vector<DecisionRecord> records;

  int agent_seat() const { return 1 - human_seat; }

  void apply(const ActionSpec& a) {
    const ResolvedEvent ev = state.apply(a);
    update_knowledge(human_view, ev);
    update_knowledge(agent_view, ev);
  }

  void run_agent() {
    while (!state.terminal() && state.current_player() == agent_seat())
      apply(choose_action(agent_view, agent));
  }

  GameLog log() const { return make_log(state, false); }

  DecisionDatabase database() const {
    DecisionDatabase db;
    db.games[id] = log();
    db.records = records;
    return db;
  }

  Json snapshot() const {
    Json j;
    j["schema"] = kSessionSchema;
    j["session"] = id;
    j["agent"] = agent.name;
    j["seed"] = seed;
    j["human_seat"] = human_seat;
    const bool over = state.terminal();
    j["status"] = over ? "finished" : "in_progress";
    j["your_turn"] = !over && state.current_player() == human_seat;
    j["score"] = over ? state.score() : state.fireworks_total();
    j["view"] = view_json(human_view);
    auto legal = Json::array();
    if (!over && state.current_player() == human_seat)
      for (const auto& a : legal_actions(state)) legal.push_back(to_string(a));
    j["legal_actions"] = legal;
    return j;
  }
};

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

SessionManager::SessionManager() : SessionManager(Options{}) {}

SessionManager::SessionManager(Options opts) : opts_(std::move(opts)) {
  opts_.rules.validate();
  for (Preset p : kAllPresets) add_agent(preset(p));
  if (opts_.capture_dir) std::filesystem::create_directories(*opts_.capture_dir);
}

SessionManager::~SessionManager() = default;

void SessionManager::add_agent(const WeightVector& w) {
  if (w.name.empty()) throw ConfigError("agent weights need a name");
  std::unique_lock lock(mutex_);
  agents_[w.name] = w;
}

std::vector<std::string> SessionManager::agent_names() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, w] : agents_) out.push_back(name);
  return out;
}

std::size_t SessionManager::size() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "not_found", "no session '" + id + "'");
  return it->second;
}

namespace {

void persist(const std::optional<std::filesystem::path>& dir, const std::string& id,
             const GameLog& log, const DecisionDatabase& db) {
  if (!dir) return;
  write_atomically(*dir / (id + ".gamelog"), serialize(log));
  write_atomically(*dir / (id + ".decisions.jsonl"), serialize_decisions(db));
}

}  // namespace

Json SessionManager::create(const SessionConfig& config) {
  if (config.human_seat != 0 && config.human_seat != 1)
    throw bad_request("human_seat must be 0 or 1");
  auto s = std::make_shared<Session>();
  {
    std::unique_lock lock(mutex_);
    std::string name = config.agent;
    if (auto p = parse_preset(name)) name = std::string(preset_name(*p));
    auto it = agents_.find(name);
    if (it == agents_.end()) throw ServiceError(400, "unknown_agent", "unknown agent '" + config.agent + "'");
    s->agent = it->second;
    ++counter_;
    char id[32];
    std::snprintf(id, sizeof id, "s%06llu", static_cast<unsigned long long>(counter_));
    s->id = id;
    s->seed = config.seed.value_or(opts_.seed_base + counter_ - 1);
  }
  s->human_seat = config.human_seat;
  s->capture = config.capture;
  s->human_tag = config.human_tag;
  try {
    s->state = config.deck ? new_game_with_deck(*config.deck, opts_.rules, s->seed)
                           : new_game(s->seed, opts_.rules);
  } catch (const ConfigError& e) {
    throw bad_request(e.what());
  }
  s->human_view = initial_view(s->state, s->human_seat);
  s->agent_view = initial_view(s->state, s->agent_seat());
  std::lock_guard session_lock(s->mutex);
  s->run_agent();
  if (s->capture) persist(opts_.capture_dir, s->id, s->log(), s->database());
  {
    std::unique_lock lock(mutex_);
    sessions_[s->id] = s;
  }
  return s->snapshot();
}

Json SessionManager::view(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  return s->snapshot();
}

Json SessionManager::act(const std::string& id, const ActionSpec& action) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->state.terminal()) throw ServiceError(409, "game_over", "the game is over", "game_over");
  if (s->state.current_player() != s->human_seat)
    throw ServiceError(409, "not_your_turn", "it is the agent's turn");
  if (action.is_clue() && action.target != s->agent_seat())
    throw ServiceError(400, "illegal_action", "clues must target the agent",
                       std::string(to_string(RejectReason::BadClueTarget)));
  if (auto reason = check_action(s->state, action))
    throw ServiceError(400, "illegal_action",
                       "illegal action " + to_string(action) + ": " + std::string(to_string(*reason)),
                       std::string(to_string(*reason)));
  if (s->capture)
    s->records.push_back({s->id, s->state.turn(), s->human_seat, action, s->human_tag});
  s->apply(action);
  s->run_agent();
  if (s->capture) persist(opts_.capture_dir, s->id, s->log(), s->database());
  return s->snapshot();
}

Json SessionManager::end(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::unique_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "not_found", "no session '" + id + "'");
    s = it->second;
    sessions_.erase(it);
  }
  std::lock_guard lock(s->mutex);
  Json j;
  j["schema"] = kSessionSchema;
  j["session"] = s->id;
  j["status"] = s->state.terminal() ? "finished" : "abandoned";
  j["score"] = s->state.terminal() ? s->state.score() : s->state.fireworks_total();
  j["turns"] = s->state.turn();
  j["log"] = serialize(s->log());
  j["decisions"] = serialize_decisions(s->database());
  j["records"] = s->records.size();
  return j;
}

}  // namespace cyclone
