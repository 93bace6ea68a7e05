#include "dcmsg/dcmsg.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "analytics/workflow.hpp"
#include "common/errors.hpp"
#include "post/post_estimation.hpp"
#include "service/server.hpp"
#include "session/manager.hpp"
#include "session/precompute.hpp"

using nlohmann::json;
using namespace dcmsg;

struct dcm_dataset {
  std::shared_ptr<const dataset::ChoiceDataset> data;
};

struct dcm_manager {
  std::unique_ptr<session::SessionManager> manager;
};

struct dcm_service {
  std::unique_ptr<service::Service> service;
};

namespace {

thread_local std::string last_error;

dcm_status status_of(ErrorCode code) { return static_cast<dcm_status>(static_cast<int>(code) + 1); }

template <class F>
dcm_status guard(F&& f) {
  last_error.clear();
  try {
    f();
    return DCM_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    last_error = e.what();
    return DCM_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DCM_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return DCM_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

json parse(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " is not JSON: " + e.what());
  }
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  require(out, "output pointer");
  *out = dup(s);
}

std::optional<std::filesystem::path> optional_path(const char* p) {
  if (!p || !*p) return std::nullopt;
  return std::filesystem::path(p);
}

est::EstimationOptions estimation_options(const char* options_json) {
  return session::session_config_from_json(parse(options_json, "options")).estimation;
}

dataset::SyntheticConfig synthetic_config(const json& j) {
  dataset::SyntheticConfig c;
  c.n_individuals = j.value("n_individuals", c.n_individuals);
  c.n_tasks = j.value("n_tasks", c.n_tasks);
  c.seed = j.value("seed", c.seed);
  c.missing_rate = j.value("missing_rate", c.missing_rate);
  if (j.contains("true_params")) c.true_params = j["true_params"].get<std::map<std::string, double>>();
  if (j.contains("random_sd")) c.random_sd = j["random_sd"].get<std::map<std::string, double>>();
  if (j.contains("classes")) {
    for (const auto& k : j["classes"]) {
      dataset::LatentClassTruth t;
      t.share = k.at("share").get<double>();
      if (k.contains("params")) t.params = k["params"].get<std::map<std::string, double>>();
      c.classes.push_back(std::move(t));
    }
  }
  return c;
}

std::string export_text(const std::vector<session::TelemetryEvent>& events, const char* format) {
  const std::string f = format ? format : "csv";
  if (f == "csv") return session::to_csv(events);
  if (f == "jsonl") return session::to_jsonl(events);
  fail(ErrorCode::InvalidArgument, "format must be csv or jsonl");
}

}  // namespace

extern "C" {

const char* dcm_version(void) { return "0.1.0"; }

const char* dcm_last_error(void) { return last_error.c_str(); }

const char* dcm_status_name(dcm_status status) {
  if (status == DCM_OK) return "Ok";
  if (status == DCM_INTERNAL) return "Internal";
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(ErrorCode::DegenerateGroups)) return "Unknown";
  return error_code_name(static_cast<ErrorCode>(code)).data();
}

void dcm_string_free(char* s) { std::free(s); }

dcm_status dcm_dataset_generate(const char* config_json, dcm_dataset** out) {
  return guard([&] {
    require(out, "output pointer");
    auto data = dataset::generate_synthetic(synthetic_config(parse(config_json, "config")));
    *out = new dcm_dataset{std::make_shared<const dataset::ChoiceDataset>(std::move(data))};
  });
}

dcm_status dcm_dataset_load(const char* path, dcm_dataset** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output pointer");
    *out = new dcm_dataset{std::make_shared<const dataset::ChoiceDataset>(dataset::load_dataset(path))};
  });
}

dcm_status dcm_dataset_save(const dcm_dataset* data, const char* path) {
  return guard([&] {
    require(data, "dataset");
    require(path, "path");
    dataset::save_dataset(*data->data, path);
  });
}

dcm_status dcm_dataset_describe(const dcm_dataset* data, char** out_json) {
  return guard([&] {
    require(data, "dataset");
    const auto& d = *data->data;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(dataset::fingerprint(d)));
    put(out_json, json{{"n_individuals", d.n_individuals},
                       {"n_tasks", d.n_tasks_per_individual},
                       {"n_rows", d.rows.size()},
                       {"complete", dataset::is_complete(d)},
                       {"fingerprint", hex}}
                      .dump());
  });
}

void dcm_dataset_free(dcm_dataset* data) { delete data; }

dcm_status dcm_spec_validate(const char* spec_json, char** violations_json) {
  return guard([&] {
    json out = json::array();
    for (const auto& v : spec::validate_spec(spec::spec_from_json(parse(spec_json, "spec"))))
      out.push_back({{"constraint", v.constraint}, {"detail", v.detail}});
    put(violations_json, out.dump());
  });
}

dcm_status dcm_estimate(const dcm_dataset* data, const char* spec_json, const char* options_json,
                        char** result_json) {
  return guard([&] {
    require(data, "dataset");
    const auto res = est::estimate(spec::spec_from_json(parse(spec_json, "spec")), *data->data,
                                   estimation_options(options_json));
    put(result_json, post::result_to_json(res).dump());
  });
}

dcm_status dcm_precompute(const dcm_dataset* data, const char* options_json, const char* repository_path,
                          unsigned workers, size_t limit, char** stats_json) {
  return guard([&] {
    require(data, "dataset");
    auto specs = session::precompute_specs();
    if (limit > 0 && limit < specs.size()) specs.resize(limit);
    session::ModelRepository repo(optional_path(repository_path));
    const auto stats = session::precompute(specs, *data->data, estimation_options(options_json), repo, workers);
    put(stats_json, json{{"specs", specs.size()},
                         {"estimated", stats.estimated},
                         {"cached", stats.cached},
                         {"failed", stats.failed}}
                        .dump());
  });
}

dcm_status dcm_manager_create(const char* options_json, const char* repository_path, dcm_manager** out) {
  return guard([&] {
    require(out, "output pointer");
    const json j = parse(options_json, "options");
    session::ManagerOptions o;
    o.session = session::session_config_from_json(j);
    o.workers = j.value("workers", 0u);
    o.pending_threshold = std::chrono::milliseconds(j.value("pending_threshold_ms", 2000));
    if (j.contains("journal_dir")) o.journal_dir = j["journal_dir"].get<std::string>();
    auto repo = std::make_shared<session::ModelRepository>(optional_path(repository_path));
    *out = new dcm_manager{std::make_unique<session::SessionManager>(std::move(o), std::move(repo))};
  });
}

dcm_status dcm_manager_add_dataset(dcm_manager* m, const char* name, const dcm_dataset* data) {
  return guard([&] {
    require(m, "manager");
    require(name, "name");
    require(data, "dataset");
    m->manager->add_dataset(name, data->data);
  });
}

dcm_status dcm_manager_recover(dcm_manager* m, size_t* restored) {
  return guard([&] {
    require(m, "manager");
    const auto n = m->manager->recover();
    if (restored) *restored = n;
  });
}

dcm_status dcm_manager_wait_idle(dcm_manager* m) {
  return guard([&] {
    require(m, "manager");
    m->manager->wait_idle();
  });
}

dcm_status dcm_manager_export(dcm_manager* m, const char* session_id, const char* format, char** out) {
  return guard([&] {
    require(m, "manager");
    put(out, export_text(m->manager->export_telemetry(session_id ? session_id : ""), format));
  });
}

void dcm_manager_free(dcm_manager* m) { delete m; }

dcm_status dcm_session_create(dcm_manager* m, const char* user_id, const char* dataset, char** session_id) {
  return guard([&] {
    require(m, "manager");
    require(user_id, "user_id");
    put(session_id, m->manager->create_session(user_id, dataset ? dataset : "default"));
  });
}

dcm_status dcm_session_summary(dcm_manager* m, const char* session_id, char** out_json) {
  return guard([&] {
    require(m, "manager");
    require(session_id, "session_id");
    put(out_json, m->manager->summary(session_id).dump());
  });
}

dcm_status dcm_session_action(dcm_manager* m, const char* session_id, const char* phase, const char* action,
                              const char* payload_json, char** result_json) {
  return guard([&] {
    require(m, "manager");
    require(session_id, "session_id");
    require(phase, "phase");
    require(action, "action");
    const auto result =
        m->manager->record_action(session_id, session::parse_phase(phase), action, parse(payload_json, "payload"));
    put(result_json, result.dump());
  });
}

dcm_status dcm_session_estimate(dcm_manager* m, const char* session_id, const char* spec_json,
                                const char* idempotency_key, char** ticket_json) {
  return guard([&] {
    require(m, "manager");
    require(session_id, "session_id");
    const auto t = m->manager->request_estimation(session_id, spec::spec_from_json(parse(spec_json, "spec")),
                                                  idempotency_key ? idempotency_key : "");
    put(ticket_json,
        json{{"model_id", t.model_id}, {"status", session::model_status_name(t.status)}, {"cached", t.cached}}.dump());
  });
}

dcm_status dcm_session_model(dcm_manager* m, const char* session_id, int model_id, char** out_json) {
  return guard([&] {
    require(m, "manager");
    require(session_id, "session_id");
    put(out_json, m->manager->model_view(session_id, model_id).dump());
  });
}

dcm_status dcm_session_report(dcm_manager* m, const char* session_id, const char* report_json) {
  return guard([&] {
    require(m, "manager");
    require(session_id, "session_id");
    const json r = parse(report_json, "report");
    m->manager->submit_report(session_id, r.value("model_ids", std::vector<int>{}), r.value("text", ""));
  });
}

dcm_status dcm_replay_journal(const char* journal_path, const dcm_dataset* data, const char* repository_path,
                              char** out_json) {
  return guard([&] {
    require(journal_path, "journal path");
    require(data, "dataset");
    session::ModelRepository repo(optional_path(repository_path));
    const auto s = session::replay(
        session::read_journal(journal_path), [&](const std::string&) { return data->data; }, repo);
    json models = json::array();
    for (const auto& e : s->models()) models.push_back(session::entry_brief(e));
    json events = json::array();
    for (const auto& e : s->telemetry()) events.push_back(session::to_json(e));
    put(out_json, json{{"summary", s->summary()}, {"models", models}, {"telemetry", events}}.dump());
  });
}

dcm_status dcm_analyze(const char* export_path, const char* options_json, const char* out_dir,
                       char** summary_json) {
  return guard([&] {
    require(export_path, "export path");
    require(out_dir, "output directory");
    const json j = parse(options_json, "options");
    analytics::AnalyzeOptions o;
    o.min_support = j.value("min_support", o.min_support);
    o.max_len = j.value("max_len", o.max_len);
    o.alpha = j.value("alpha", o.alpha);
    if (j.contains("rule")) o.rule = analytics::parse_rule(j["rule"].get<std::string>());
    if (j.contains("level")) {
      const auto level = j["level"].get<std::string>();
      if (level == "phase") o.level = analytics::SymbolLevel::Phase;
      else if (level == "action") o.level = analytics::SymbolLevel::Action;
      else fail(ErrorCode::InvalidArgument, "level must be phase or action");
    }
    const auto report = analytics::analyze(analytics::load_export(export_path), o);
    analytics::write_report(report, out_dir, o.alpha);

    std::size_t improved = 0, significant = 0;
    for (const auto& u : report.groups.users) improved += u.improved;
    for (const auto& r : report.comparisons.rows) significant += r.test.p < o.alpha;
    put(summary_json, json{{"users", report.groups.users.size()},
                           {"improved", improved},
                           {"patterns", report.patterns.size()},
                           {"comparisons", report.comparisons.rows.size()},
                           {"significant", significant},
                           {"warnings", report.warnings}}
                          .dump());
  });
}

dcm_status dcm_service_create(const char* config_path, dcm_service** out) {
  return guard([&] {
    require(out, "output pointer");
    *out = new dcm_service{std::make_unique<service::Service>(service::load_config(optional_path(config_path)))};
  });
}

dcm_status dcm_service_bind(dcm_service* s, int port, int* bound_port) {
  return guard([&] {
    require(s, "service");
    const int bound = port < 0 ? s->service->bind() : s->service->bind(port);
    if (bound_port) *bound_port = bound;
  });
}

dcm_status dcm_service_start(dcm_service* s) {
  return guard([&] {
    require(s, "service");
    s->service->start();
  });
}

dcm_status dcm_service_stop(dcm_service* s) {
  return guard([&] {
    require(s, "service");
    s->service->stop();
  });
}

void dcm_service_free(dcm_service* s) { delete s; }

}  // extern "C"
