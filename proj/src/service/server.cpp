#include "service/server.hpp"

#include "common/errors.hpp"
#include "spec/model_spec.hpp"

// After Eigen: resolv.h defines a macro named _res.
#include <httplib.h>

namespace dcmsg::service {
namespace {

using nlohmann::json;
using session::Phase;

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

std::string session_url(const std::string& id) { return "/v1/sessions/" + id; }

int model_id_param(const httplib::Request& req) {
  const auto& text = req.path_params.at("mid");
  try {
    std::size_t used = 0;
    const int id = std::stoi(text, &used);
    if (used == text.size()) return id;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::UnknownModelId, "no model " + text);
}

// Wraps a handler so library errors become JSON error bodies.
httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> f) {
  return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const spec::InvalidSpecError& e) {
      json v = json::array();
      for (const auto& x : e.violations()) v.push_back({{"constraint", x.constraint}, {"detail", x.detail}});
      send(res, 422, {{"error", "InvalidSpec"}, {"message", e.what()}, {"violations", v}});
    } catch (const Error& e) {
      send(res, http_status(e.code()), {{"error", error_code_name(e.code())}, {"message", e.what()}});
    } catch (const std::exception& e) {
      send(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownModelId:
    case ErrorCode::UnknownDataset:
      return 404;
    case ErrorCode::SessionClosed:
    case ErrorCode::ModelPending:
      return 409;
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

Service::Service(const ServiceConfig& config) : config_(config), server_(std::make_unique<httplib::Server>()) {
  std::shared_ptr<const dataset::ChoiceDataset> data;
  if (config_.dataset.empty()) {
    dataset::SyntheticConfig sc;
    sc.seed = config_.seed;
    data = std::make_shared<const dataset::ChoiceDataset>(dataset::generate_synthetic(sc));
  } else {
    data = std::make_shared<const dataset::ChoiceDataset>(dataset::load_dataset(config_.dataset));
  }
  auto repo = std::make_shared<session::ModelRepository>(
      config_.repository.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_.repository));
  manager_ = std::make_unique<session::SessionManager>(manager_options(config_), std::move(repo));
  manager_->add_dataset(kDefaultDataset, std::move(data));
  recovered_ = manager_->recover();
  routes();
}

Service::~Service() { stop(); }

int Service::bind(int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(config_.host) : (server_->bind_to_port(config_.host, port) ? port : -1);
  if (bound < 0) fail(ErrorCode::Io, "cannot listen on " + config_.host + ":" + std::to_string(port));
  return bound;
}

void Service::run() { server_->listen_after_bind(); }

void Service::start() {
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
}

void Service::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void Service::routes() {
  auto& s = *server_;
  auto& m = *manager_;

  auto health = guarded([](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"status", "ok"}}); });
  s.Get("/healthz", health);
  s.Get("/v1/healthz", health);

  s.Post("/v1/sessions", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string user = body.value("user_id", "");
    const std::string ds = body.value("dataset", kDefaultDataset);
    const std::string id = m.create_session(user, ds);
    res.set_header("Location", session_url(id));
    send(res, 201, {{"session_id", id}});
  }));

  s.Get("/v1/sessions/:id", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, m.summary(req.path_params.at("id")));
  }));

  auto action = [&m](Phase phase) {
    return guarded([&m, phase](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, m.record_action(req.path_params.at("id"), phase, req.path_params.at("tool"), parse_body(req)));
    });
  };
  s.Post("/v1/sessions/:id/da/:tool", action(Phase::DA));
  s.Post("/v1/sessions/:id/ms/:tool", action(Phase::MS));
  s.Post("/v1/sessions/:id/oi/:tool", action(Phase::OI));

  s.Post("/v1/sessions/:id/models", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const auto spec = spec::spec_from_json(parse_body(req));
    const auto ticket = m.request_estimation(id, spec, req.get_header_value("Idempotency-Key"));
    const std::string url = session_url(id) + "/models/" + std::to_string(ticket.model_id);
    json body = {{"model_id", ticket.model_id},
                 {"status", session::model_status_name(ticket.status)},
                 {"cached", ticket.cached}};
    res.set_header("Location", url);
    if (ticket.status == session::ModelStatus::Pending) {
      body["poll"] = url;
      send(res, 202, body);
    } else {
      send(res, 201, body);
    }
  }));

  s.Get("/v1/sessions/:id/models", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    json out = json::array();
    for (const auto& e : m.models(req.path_params.at("id"))) out.push_back(session::entry_brief(e));
    send(res, 200, out);
  }));

  s.Get("/v1/sessions/:id/models/:mid", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, m.model_view(req.path_params.at("id"), model_id_param(req)));
  }));

  s.Post("/v1/sessions/:id/report", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("model_ids") || !body["model_ids"].is_array())
      fail(ErrorCode::InvalidArgument, "report needs a model_ids array");
    std::vector<int> ids;
    for (const auto& v : body["model_ids"]) {
      if (!v.is_number_integer()) fail(ErrorCode::InvalidArgument, "model_ids must be integers");
      ids.push_back(v.get<int>());
    }
    const std::string id = req.path_params.at("id");
    m.submit_report(id, std::move(ids), body.value("text", ""));
    send(res, 200, {{"session_id", id}, {"status", "closed"}});
  }));

  s.Get("/v1/telemetry", guarded([&m](const httplib::Request& req, httplib::Response& res) {
    std::string scope = req.get_param_value("scope");
    if (scope == "all") scope.clear();
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "csv";
    const auto events = m.export_telemetry(scope);
    res.status = 200;
    if (format == "csv") res.set_content(session::to_csv(events), "text/csv");
    else if (format == "jsonl") res.set_content(session::to_jsonl(events), "application/x-ndjson");
    else fail(ErrorCode::InvalidArgument, "format must be csv or jsonl");
  }));
}

}  // namespace dcmsg::service
