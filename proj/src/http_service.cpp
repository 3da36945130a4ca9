#include "httplib.h"

#include "cyclone/service.hpp"

namespace cyclone {

using Json = nlohmann::ordered_json;

struct HttpService::Impl {
  SessionManager& sessions;
  std::string cors_origin;
  httplib::Server server;

  Impl(SessionManager& s, std::string origin) : sessions(s), cors_origin(std::move(origin)) {}

  void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename F>
  void guarded(httplib::Response& res, F&& fn) {
    try {
      fn();
    } catch (const ServiceError& e) {
      reply(res, e.status(), e.to_json());
    } catch (const std::exception& e) {
      reply(res, 500, ServiceError(500, "internal", e.what()).to_json());
    }
  }

  static nlohmann::json body_of(const httplib::Request& req) {
    if (req.body.empty()) return nullptr;
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      throw ServiceError(400, "bad_request", std::string("body is not JSON: ") + e.what());
    }
  }

  void install() {
    server.set_default_headers({
        {"Access-Control-Allow-Origin", cors_origin},
        {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type"},
    });
    server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Get("/api/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      Json j;
      j["schema"] = kSessionSchema;
      j["status"] = "ok";
      j["sessions"] = sessions.size();
      reply(res, 200, j);
    });

    server.Get("/api/v1/agents", [this](const httplib::Request&, httplib::Response& res) {
      Json j;
      j["agents"] = sessions.agent_names();
      reply(res, 200, j);
    });

    server.Post("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 201, sessions.create(parse_session_config(body_of(req)))); });
    });

    server.Get(R"(/api/v1/sessions/([A-Za-z0-9_-]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { reply(res, 200, sessions.view(req.matches[1])); });
               });

    server.Post(R"(/api/v1/sessions/([A-Za-z0-9_-]+)/actions)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const std::string id = req.matches[1];
                    const int seat = sessions.view(id)["human_seat"].get<int>();
                    const auto action = parse_action_json(body_of(req), seat);
                    reply(res, 200, sessions.act(id, action));
                  });
                });

    auto end = [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, sessions.end(req.matches[1])); });
    };
    server.Post(R"(/api/v1/sessions/([A-Za-z0-9_-]+)/end)", end);
    server.Delete(R"(/api/v1/sessions/([A-Za-z0-9_-]+))", end);
  }
};

HttpService::HttpService(SessionManager& sessions, std::string cors_origin)
    : impl_(std::make_unique<Impl>(sessions, std::move(cors_origin))) {
  impl_->install();
}

HttpService::~HttpService() { stop(); }

bool HttpService::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int HttpService::bind_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpService::running() const { return impl_->server.is_running(); }

}  // namespace cyclone
