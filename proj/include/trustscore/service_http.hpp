// HTTP routes for Service. Bodies are JSON objects in both directions.
#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "common.hpp"
#include "service.hpp"

namespace trust {

namespace detail {

inline void send(httplib::Response& res, const Reply& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

// Empty bodies parse as an empty object.
inline bool parse_body(const httplib::Request& req, httplib::Response& res, nlohmann::json& out) {
  if (req.body.empty()) {
    out = nlohmann::json::object();
    return true;
  }
  try {
    out = nlohmann::json::parse(req.body);
    return true;
  } catch (const nlohmann::json::exception& e) {
    send(res, error_reply(400, std::string("malformed JSON body: ") + e.what()));
    return false;
  }
}

}  // namespace detail

// Registers every endpoint on `server`. When `ui_dir` is non-empty its
// files are served under /ui.
inline void mount_routes(httplib::Server& server, Service& svc, const std::string& ui_dir = "") {
  using httplib::Request;
  using httplib::Response;

  server.Get("/healthz", [&svc](const Request&, Response& res) { detail::send(res, svc.healthz()); });

  server.Post("/sessions", [&svc](const Request& req, Response& res) {
    nlohmann::json body;
    if (detail::parse_body(req, res, body)) detail::send(res, svc.create_session(body));
  });

  server.Get(R"(/sessions/([^/]+)/batch)", [&svc](const Request& req, Response& res) {
    detail::send(res, svc.get_batch(req.matches[1]));
  });

  server.Post(R"(/sessions/([^/]+)/labels)", [&svc](const Request& req, Response& res) {
    nlohmann::json body;
    if (detail::parse_body(req, res, body)) detail::send(res, svc.post_labels(req.matches[1], body));
  });

  server.Get(R"(/sessions/([^/]+)/curve)", [&svc](const Request& req, Response& res) {
    detail::send(res, svc.get_curve(req.matches[1]));
  });

  server.Get(R"(/users/([^/]+)/scorecard)", [&svc](const Request& req, Response& res) {
    detail::send(res, svc.get_scorecard(req.matches[1]));
  });

  server.set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    detail::send(res, error_reply(500, msg));
  });

  // SO_REUSEPORT is left off so binding an occupied port fails.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });

  if (!ui_dir.empty() && !server.set_mount_point("/ui", ui_dir))
    throw not_found("UI directory '" + ui_dir + "' does not exist");
}

// Splits "host:port"; a bare port binds to 127.0.0.1.
inline std::pair<std::string, int> parse_listen(const std::string& listen) {
  std::string host = "127.0.0.1", port = listen;
  if (auto colon = listen.rfind(':'); colon != std::string::npos) {
    host = listen.substr(0, colon);
    port = listen.substr(colon + 1);
  }
  int p = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), p);
  if (ec != std::errc{} || ptr != port.data() + port.size() || p < 0 || p > 65535 || host.empty())
    throw invalid_argument("invalid listen address '" + listen + "'");
  return {host, p};
}

}  // namespace trust
