#include "evnet/service.h"

#include <charconv>
#include <cstdlib>
#include <functional>

#include "httplib.h"

namespace evnet {

using nlohmann::json;

struct Service::Impl {
  const Artifacts& artifacts;
  httplib::Server server;

  Impl(const Artifacts& a, const std::string& origin) : artifacts(a) {
    server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    routes();
  }

  static void send_error(httplib::Response& res, const ApiError& e) {
    res.status = e.http_status();
    res.set_content(e.to_json().dump(2) + "\n", "application/json");
  }

  // Repeated query keys are joined with commas, matching the list syntax.
  static QueryParams params(const httplib::Request& req) {
    QueryParams out;
    for (const auto& [k, v] : req.params) {
      auto [it, inserted] = out.emplace(k, v);
      if (!inserted) it->second += "," + v;
    }
    return out;
  }

  void handle(const std::string& path, std::function<json(const httplib::Request&)> f) {
    server.Get(path, [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        res.set_content(f(req).dump(2) + "\n", "application/json");
      } catch (const ApiError& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_error(res, ApiError(ApiError::Code::kInternal, e.what()));
      }
    });
  }

  void routes() {
    handle("/slices", [this](const httplib::Request& req) {
      if (!req.params.empty()) {
        throw ApiError(ApiError::Code::kBadRequest, "/slices takes no parameters");
      }
      return list_slices(artifacts);
    });
    handle(R"(/slices/([^/]+)/events)", [this](const httplib::Request& req) {
      return slice_events(artifacts, req.matches[1]);
    });
    handle(R"(/events/([^/]+))", [this](const httplib::Request& req) {
      return event_json(artifacts, req.matches[1]);
    });
    handle(R"(/events/([^/]+)/network)", [this](const httplib::Request& req) {
      return event_network(artifacts, req.matches[1]);
    });
    handle(R"(/events/([^/]+)/analyze/([^/]+))", [this](const httplib::Request& req) {
      return run_analysis(artifacts, req.matches[1], req.matches[2], params(req));
    });
    handle("/analyze/plt", [this](const httplib::Request& req) {
      return run_global_plt(artifacts, params(req));
    });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        send_error(res, ApiError(ApiError::Code::kNotFound, "no route for " + req.path));
      } else if (res.status >= 400 && res.status < 500) {
        send_error(res, ApiError(ApiError::Code::kBadRequest,
                                 std::string(httplib::status_message(res.status))));
      } else {
        send_error(res, ApiError(ApiError::Code::kInternal,
                                 std::string(httplib::status_message(res.status))));
      }
    });
    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string message = "unknown error";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            message = e.what();
          } catch (...) {
          }
          send_error(res, ApiError(ApiError::Code::kInternal, message));
        });
  }
};

Service::Service(const Artifacts& artifacts, std::string cors_origin)
    : impl_(std::make_unique<Impl>(artifacts, cors_origin)) {}

Service::~Service() = default;

int Service::bind_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool Service::bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

bool Service::is_running() const { return impl_->server.is_running(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

int service_port_from_env(int fallback) {
  const char* env = std::getenv("EVNET_PORT");
  if (!env || !*env) return fallback;
  const std::string text(env);
  int port = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), port);
  if (ec != std::errc() || ptr != text.data() + text.size() || port < 0 || port > 65535) {
    throw std::invalid_argument("EVNET_PORT is not a valid port: " + text);
  }
  return port;
}

}  // namespace evnet
