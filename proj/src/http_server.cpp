#include <httplib.h>

#include "levelscope/error.hpp"
#include "levelscope/service.hpp"

namespace levelscope {

struct HttpServer::Impl {
  SessionService& service;
  HttpOptions options;
  httplib::Server server;
  int port = -1;

  Impl(SessionService& s, HttpOptions o) : service(s), options(std::move(o)) {}

  static void reply(httplib::Response& res, const ServiceResponse& out) {
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  }

  static std::optional<nlohmann::json> body_of(const httplib::Request& req, httplib::Response& res) {
    auto doc = nlohmann::json::parse(req.body, nullptr, false);
    if (doc.is_discarded()) {
      reply(res, {400, {{"error", "request body is not valid JSON"}}});
      return std::nullopt;
    }
    return doc;
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Cache-Control", "no-store"}});
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, service.health());
    });
    server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto doc = body_of(req, res);
      if (!doc) return;
      const auto out = service.create(*doc);
      if (out.status == 201) res.set_header("Location", "/v1/sessions/" + out.body["id"].get<std::string>());
      reply(res, out);
    });
    server.Get(R"(/v1/sessions/([^/]+)/round)", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.round(req.matches[1]));
    });
    server.Post(R"(/v1/sessions/([^/]+)/choice)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto doc = body_of(req, res);
      if (!doc) return;
      reply(res, service.choice(req.matches[1], *doc));
    });
    server.Get(R"(/v1/sessions/([^/]+)/result)", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.result(req.matches[1]));
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      reply(res, {500, {{"error", message}}});
    });
    if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir)) {
      throw ConfigError("static directory not found: " + options.static_dir);
    }
  }
};

HttpServer::HttpServer(SessionService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& s = *impl_;
  if (s.options.port == 0) {
    s.port = s.server.bind_to_any_port(s.options.host);
  } else if (s.server.bind_to_port(s.options.host, s.options.port)) {
    s.port = s.options.port;
  }
  if (s.port < 0) throw Error("cannot bind " + s.options.host + ":" + std::to_string(s.options.port));
  return s.port;
}

void HttpServer::listen() {
  if (impl_->port < 0) bind();
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace levelscope
