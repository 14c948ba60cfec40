// Read-only HTTP service over loaded artifacts.
//
//   GET /slices
//   GET /slices/{i}/events
//   GET /events/{id}
//   GET /events/{id}/network
//   GET /events/{id}/analyze/{filter|plt|action|path|ego}?...
//   GET /analyze/plt?person=...
//
// Errors are {"error": {"code", "message"}} with a matching status.

#ifndef EVNET_SERVICE_H_
#define EVNET_SERVICE_H_

#include <memory>
#include <string>

#include "evnet/query.h"

namespace evnet {

class Service {
 public:
  // `artifacts` must outlive the service.
  explicit Service(const Artifacts& artifacts, std::string cors_origin = "*");
  ~Service();

  // Binds to an OS-chosen port and returns it; -1 on failure.
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Port from EVNET_PORT, or `fallback` when unset. Throws on a bad value.
int service_port_from_env(int fallback = 8080);

}  // namespace evnet

#endif  // EVNET_SERVICE_H_
