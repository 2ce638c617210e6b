#pragma once

#include <memory>
#include <string>

#include "tracknlu/service.hpp"

namespace tracknlu {

/// JSON/HTTP front of a CaptureService.
///
///   POST  /api/trackers                   create (201)
///   GET   /api/trackers                   list
///   GET   /api/trackers/{id}              one schema
///   POST  /api/trackers/{id}/extract      {phrase, reference_time?} -> session
///   POST  /api/trackers/{id}/items        {values, source_phrase?} -> item (201)
///   GET   /api/trackers/{id}/items        committed items
///   PATCH /api/items/{id}                 {values} -> corrected item
///
/// Errors are {code, message, details[]} with 400/404/409/502/503.
class ApiServer {
 public:
  explicit ApiServer(CaptureService& service);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds an ephemeral port and returns it (or -1).
  int bind_to_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "host:port", ":port" or "port"; host defaults to 127.0.0.1.
std::pair<std::string, int> parse_bind_addr(const std::string& addr);

}  // namespace tracknlu
