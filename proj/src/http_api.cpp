#include "tracknlu/http_api.hpp"

#include <httplib.h>

#include <fmt/format.h>

namespace tracknlu {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, const ServiceError& e) {
  if (e.retry_after()) {
    const auto secs = (e.retry_after()->count() + 999) / 1000;
    res.set_header("Retry-After", std::to_string(std::max<long long>(secs, 1)));
  }
  send_json(res, e.http_status(), error_to_json(e));
}

json parse_body(const httplib::Request& req) {
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ServiceError(ServiceError::Code::invalid, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ServiceError(ServiceError::Code::invalid, "request body is not valid JSON", {e.what()});
  }
}

std::map<std::string, FieldValue> body_values(const TrackerSchema& schema, const json& body) {
  if (!body.contains("values") || !body["values"].is_object()) {
    throw ServiceError(ServiceError::Code::invalid, "'values' must be an object");
  }
  return values_from_json(schema, body["values"]);
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e);
    } catch (const std::invalid_argument& e) {
      send_error(res, ServiceError(ServiceError::Code::invalid, e.what()));
    } catch (const json::exception& e) {
      send_error(res, ServiceError(ServiceError::Code::invalid, e.what()));
    } catch (const std::exception& e) {
      send_error(res, ServiceError(ServiceError::Code::internal, e.what()));
    }
  };
}

}  // namespace

struct ApiServer::Impl {
  CaptureService& service;
  httplib::Server server;

  explicit Impl(CaptureService& s) : service(s) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/api/trackers", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req);
      if (!body.contains("tracker_id")) body["tracker_id"] = "";
      const auto created = service.create_tracker(schema_from_json(body));
      send_json(res, 201, tracker_to_json(created));
    }));

    server.Get("/api/trackers", guarded([this](const httplib::Request&, httplib::Response& res) {
      json out = json::array();
      for (const auto& t : service.list_trackers()) out.push_back(tracker_to_json(t));
      send_json(res, 200, out);
    }));

    server.Get(R"(/api/trackers/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, tracker_to_json(service.get_tracker(req.matches[1].str())));
    }));

    server.Post(R"(/api/trackers/([^/]+)/extract)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      if (!body.contains("phrase") || !body["phrase"].is_string()) {
        throw ServiceError(ServiceError::Code::invalid, "'phrase' must be a string");
      }
      std::optional<TimePoint> ref;
      if (body.contains("reference_time") && !body["reference_time"].is_null()) {
        ref = parse_time_point(body["reference_time"].get<std::string>());
        if (!ref) throw ServiceError(ServiceError::Code::invalid, "'reference_time' is not YYYY-MM-DDTHH:MM");
      }
      const auto id = req.matches[1].str();
      const auto session = service.extract(id, body["phrase"].get<std::string>(), ref);
      send_json(res, 200, session_to_json(service.get_tracker(id), session));
    }));

    server.Post(R"(/api/trackers/([^/]+)/items)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.matches[1].str();
      const auto schema = service.get_tracker(id);
      const auto body = parse_body(req);
      std::optional<std::string> phrase;
      if (body.contains("source_phrase") && body["source_phrase"].is_string()) {
        phrase = body["source_phrase"].get<std::string>();
      }
      const auto item = service.commit_item(id, body_values(schema, body), phrase);
      send_json(res, 201, item_to_json(schema, item));
    }));

    server.Get(R"(/api/trackers/([^/]+)/items)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.matches[1].str();
      const auto schema = service.get_tracker(id);
      json out = json::array();
      for (const auto& item : service.list_items(id)) out.push_back(item_to_json(schema, item));
      send_json(res, 200, out);
    }));

    server.Patch(R"(/api/items/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto current = service.get_item(req.matches[1].str());
      const auto schema = service.get_tracker(current.tracker_id);
      const auto item = service.correct_item(current.item_id, body_values(schema, parse_body(req)));
      send_json(res, 200, item_to_json(schema, item));
    }));
  }
};

ApiServer::ApiServer(CaptureService& service) : impl_(std::make_unique<Impl>(service)) {}
ApiServer::~ApiServer() = default;

int ApiServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool ApiServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool ApiServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void ApiServer::stop() { impl_->server.stop(); }
void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::pair<std::string, int> parse_bind_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  std::string host = colon == std::string::npos ? "" : addr.substr(0, colon);
  const auto port_text = colon == std::string::npos ? addr : addr.substr(colon + 1);
  if (host.empty()) host = "127.0.0.1";
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw std::invalid_argument("range");
  } catch (const std::exception&) {
    throw std::invalid_argument(fmt::format("bad bind address '{}'", addr));
  }
  return {host, port};
}

}  // namespace tracknlu
