#pragma once

// Live human-vs-agent sessions. The human only ever receives their own
// PlayerView: clue knowledge for their hand, the agent's hand face up.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cyclone/decision.hpp"
#include "cyclone/engine.hpp"
#include "cyclone/harness.hpp"
#include "cyclone/knowledge.hpp"

namespace cyclone {

inline constexpr const char* kSessionSchema = "cyclone-session/1";

/// Carries an HTTP-style status and a stable error code.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message,
               std::string reason = {});
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const std::string& reason() const { return reason_; }
  nlohmann::ordered_json to_json() const;

 private:
  int status_;
  std::string code_;
  std::string reason_;
};

struct SessionConfig {
  std::string agent = "human-like";
  std::optional<std::uint64_t> seed;
  int human_seat = 0;
  bool capture = true;
  std::optional<DeckOrder> deck;  // overrides the seeded shuffle
  std::string human_tag = "human";
};

/// Accepts {"action": "P0"} or {"kind": "play"|"discard", "slot": n} or
/// {"kind": "clue", "color": "R"} / {"kind": "clue", "rank": 3}.
ActionSpec parse_action_json(const nlohmann::json& body, int actor);
SessionConfig parse_session_config(const nlohmann::json& body);

/// JSON for one player's view. Contains no field derived from the viewer's
/// own card identities.
nlohmann::ordered_json view_json(const PlayerView& view);
nlohmann::ordered_json knowledge_json(const CardKnowledge& k);

class SessionManager {
 public:
  struct Options {
    std::optional<std::filesystem::path> capture_dir;
    RulesConfig rules;
    std::uint64_t seed_base = 1;  // seed of session k when none is given: seed_base + k - 1
  };

  SessionManager();
  explicit SessionManager(Options opts);
  ~SessionManager();

  /// Registers an additional agent; presets are registered by default.
  void add_agent(const WeightVector& w);
  std::vector<std::string> agent_names() const;

  nlohmann::ordered_json create(const SessionConfig& config);
  nlohmann::ordered_json view(const std::string& id) const;
  /// Applies the human's action, then the agent's replies until it is the
  /// human's turn again or the game is over.
  nlohmann::ordered_json act(const std::string& id, const ActionSpec& action);
  /// Closes the session: final score, game log and captured decisions.
  nlohmann::ordered_json end(const std::string& id);

  std::size_t size() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;

  Options opts_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, WeightVector> agents_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

/// HTTP front end. Routes under /api/v1; CORS enabled.
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions, std::string cors_origin = "*");
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Blocks serving requests; false if the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cyclone
