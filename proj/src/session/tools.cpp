#include "session/tools.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "common/errors.hpp"
#include "common/special.hpp"
#include "post/post_estimation.hpp"

namespace dcmsg::session {
namespace {

using nlohmann::json;
namespace ds = dcmsg::dataset;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string require_string(const json& payload, const char* key) {
  const auto it = payload.find(key);
  if (it == payload.end() || !it->is_string())
    fail(ErrorCode::InvalidArgument, std::string("payload needs a string field '") + key + "'");
  return it->get<std::string>();
}

int require_int(const json& payload, const char* key) {
  const auto it = payload.find(key);
  if (it == payload.end() || !it->is_number_integer())
    fail(ErrorCode::InvalidArgument, std::string("payload needs an integer field '") + key + "'");
  return it->get<int>();
}

std::vector<std::string> string_list(const json& payload, const char* key) {
  const auto it = payload.find(key);
  if (it == payload.end() || !it->is_array())
    fail(ErrorCode::InvalidArgument, std::string("payload needs an array field '") + key + "'");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) fail(ErrorCode::InvalidArgument, std::string(key) + " must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json summary_json(const ds::Summary& s) {
  return {{"count", s.count}, {"missing", s.missing}, {"mean", num(s.mean)}, {"median", num(s.median)},
          {"min", num(s.min)}, {"max", num(s.max)},   {"sd", num(s.sd)}};
}

json row_json(const ds::ChoiceRow& row) {
  const auto& cols = ds::file_columns();
  json j = json::object();
  std::size_t c = 0;
  j[cols[c++]] = row.respondent_id;
  j[cols[c++]] = row.task_id;
  for (const auto& alt : row.attr)
    for (double v : alt) j[cols[c++]] = v;
  j[cols[c++]] = row.choice;
  for (const auto& v : row.covariates) j[cols[c++]] = v ? json(*v) : json(nullptr);
  return j;
}

json chart_json(const ds::ChartData& chart) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ds::HistogramData>) {
          return {{"chart", "histogram"}, {"variable", d.variable}, {"edges", d.edges}, {"counts", d.counts}};
        } else if constexpr (std::is_same_v<T, ds::BoxplotData>) {
          return {{"chart", "boxplot"}, {"variable", d.variable}, {"min", d.min},   {"q1", d.q1},
                  {"median", d.median}, {"q3", d.q3},             {"max", d.max},   {"outliers", d.outliers}};
        } else if constexpr (std::is_same_v<T, ds::CategoryData>) {
          return {{"variable", d.variable}, {"labels", d.labels},   {"values", d.values},
                  {"counts", d.counts},     {"fractions", d.fractions}};
        } else {
          return {{"chart", "scatter"}, {"x_variable", d.x_variable}, {"y_variable", d.y_variable},
                  {"x", d.x},           {"y", d.y}};
        }
      },
      chart);
}

json dictionary_json(const std::vector<ds::AttributeDef>& dict) {
  json out = json::array();
  for (const auto& d : dict) {
    std::string kind;
    switch (d.kind) {
      case ds::VariableKind::Attribute: kind = "attribute"; break;
      case ds::VariableKind::Covariate: kind = "covariate"; break;
      case ds::VariableKind::Id: kind = "id"; break;
      case ds::VariableKind::Choice: kind = "choice"; break;
    }
    out.push_back({{"name", d.name},
                   {"description", d.description},
                   {"kind", kind},
                   {"levels", d.levels},
                   {"numeric_codes", d.numeric_codes},
                   {"units", d.units}});
  }
  return out;
}

json dataset_info(const ds::ChoiceDataset& d) {
  return {{"rows", d.rows.size()}, {"n_individuals", d.n_individuals}, {"complete", ds::is_complete(d)}};
}

ds::MissingStrategy replace_strategy(const json& payload) {
  const std::string method = payload.value("method", std::string("mean"));
  if (method == "mean") return ds::MissingStrategy::ReplaceMean;
  if (method == "mode") return ds::MissingStrategy::ReplaceMode;
  if (method == "median") return ds::MissingStrategy::ReplaceMedian;
  fail(ErrorCode::InvalidArgument, "replacement method must be mean, mode or median");
}

// ---- outcome interpretation ----

const ModelEntry& fitted_entry(const std::vector<ModelEntry>& models, int model_id) {
  for (const auto& e : models) {
    if (e.model_id != model_id) continue;
    if (e.status == ModelStatus::Pending)
      fail(ErrorCode::ModelPending, "model " + std::to_string(model_id) + " is still being estimated");
    if (!e.result) fail(ErrorCode::UnknownModelId, "model " + std::to_string(model_id) + " has no estimates");
    return e;
  }
  fail(ErrorCode::UnknownModelId, "no model with id " + std::to_string(model_id));
}

std::vector<int> model_id_list(const json& payload) {
  const auto it = payload.find("model_ids");
  if (it == payload.end() || !it->is_array())
    fail(ErrorCode::InvalidArgument, "payload needs an array field 'model_ids'");
  std::vector<int> ids;
  for (const auto& v : *it) {
    if (!v.is_number_integer()) fail(ErrorCode::InvalidArgument, "model_ids must hold integers");
    ids.push_back(v.get<int>());
  }
  return ids;
}

spec::Attribute parse_attribute(const std::string& name) {
  for (std::size_t k = 0; k < ds::kNumAttributes; ++k) {
    const auto a = static_cast<spec::Attribute>(k);
    if (name == ds::attribute_name(a) || name == ds::attribute_key(a)) return a;
  }
  fail(ErrorCode::UnknownVariable, "unknown attribute " + name);
}

json scalar_metric(const std::string& tool, const ModelEntry& e) {
  const auto m = post::fit_metrics(*e.result);
  json j = {{"model_id", e.model_id}, {"status", model_status_name(e.status)}};
  if (tool == "ll_final") j["ll_final"] = num(m.ll_final);
  else if (tool == "ll_init") j["ll_init"] = num(m.ll_init);
  else if (tool == "n_params") j["n_params"] = m.n_params;
  else if (tool == "n_individuals") j["n_individuals"] = m.n_individuals;
  else if (tool == "ll_null") j["ll_null"] = num(m.ll_null);
  else if (tool == "rho2") j["rho2"] = num(m.rho2);
  else if (tool == "adj_rho2") j["adj_rho2"] = num(m.adj_rho2);
  else if (tool == "cpu_cores") j["cpu_cores"] = e.result->n_cores;
  else if (tool == "sample_size") j["sample_size"] = m.sample_size;
  else if (tool == "aic") j["aic"] = num(m.aic);
  else if (tool == "bic") j["bic"] = num(m.bic);
  else if (tool == "est_time") j["est_time"] = num(m.est_time);
  else if (tool == "gradient_norm") j["gradient_norm"] = num(m.gradient_norm);
  else if (tool == "lr_test") {
    j["statistic"] = num(m.lr_test_null);
    j["df"] = m.n_params;
    j["p_value"] = num(chi_square_sf(m.lr_test_null, static_cast<double>(m.n_params)));
  } else {
    fail(ErrorCode::UnknownAction, "unknown outcome tool " + tool);
  }
  return j;
}

}  // namespace

json run_da_tool(std::string_view tool_name, const json& payload,
                 std::shared_ptr<const ds::ChoiceDataset>& data) {
  const std::string tool(tool_name);
  const ds::ChoiceDataset& d = *data;
  if (!payload.is_object() && !payload.is_null())
    fail(ErrorCode::InvalidArgument, "tool payload must be a JSON object");
  const json args = payload.is_null() ? json::object() : payload;

  if (tool == "summary_statistics") {
    std::optional<std::string> variable;
    if (args.contains("variable")) variable = require_string(args, "variable");
    json out = json::array();
    const auto stats = variable ? ds::summary_statistics(d, *variable) : ds::summary_statistics(d);
    for (const auto& s : stats) {
      json row = summary_json(s.stats);
      row["variable"] = s.variable;
      out.push_back(std::move(row));
    }
    return {{"summary", out}};
  }
  if (tool == "data_dictionary") return {{"dictionary", dictionary_json(ds::data_dictionary(d))}};
  if (tool == "missing_report") {
    json out = json::array();
    for (const auto& [name, count] : ds::missing_report(d)) out.push_back({{"variable", name}, {"missing", count}});
    return {{"missing", out}, {"rows", d.rows.size()}};
  }
  if (tool == "head") {
    const int n = args.contains("n") ? require_int(args, "n") : 5;
    if (n < 0) fail(ErrorCode::InvalidArgument, "n must be non-negative");
    json rows = json::array();
    for (const auto& r : ds::head(d, static_cast<std::size_t>(n))) rows.push_back(row_json(r));
    return {{"columns", ds::file_columns()}, {"rows", rows}};
  }
  if (tool == "choice_shares") {
    const auto shares = ds::choice_shares(d);
    json out = json::object();
    for (std::size_t a = 0; a < shares.size(); ++a) out[std::string(ds::alternative_label(a))] = shares[a];
    return {{"shares", out}};
  }
  if (tool == "choice_task_example") {
    int respondent = d.rows.empty() ? 0 : d.rows.front().respondent_id;
    int task = d.rows.empty() ? 0 : d.rows.front().task_id;
    if (args.contains("respondent_id")) respondent = require_int(args, "respondent_id");
    if (args.contains("task_id")) task = require_int(args, "task_id");
    const auto view = ds::choice_task_example(d, respondent, task);
    json alts = json::array();
    for (std::size_t a = 0; a < view.labels.size(); ++a) {
      json levels = json::object();
      for (std::size_t k = 0; k < ds::kNumAttributes; ++k)
        levels[std::string(ds::attribute_name(static_cast<ds::Attribute>(k)))] = view.labels[a][k];
      alts.push_back({{"alternative", ds::alternative_label(a)}, {"levels", levels}});
    }
    return {{"respondent_id", view.respondent_id},
            {"task_id", view.task_id},
            {"alternatives", alts},
            {"choice", view.choice},
            {"text", view.text}};
  }
  if (tool == "histogram" || tool == "boxplot" || tool == "pie" || tool == "bar") {
    const auto kind = tool == "histogram" ? ds::ChartKind::Histogram
                      : tool == "boxplot" ? ds::ChartKind::Boxplot
                      : tool == "pie"     ? ds::ChartKind::Pie
                                          : ds::ChartKind::Bar;
    json out = chart_json(ds::chart_data(d, kind, {require_string(args, "variable")}));
    if (kind == ds::ChartKind::Pie || kind == ds::ChartKind::Bar) out["chart"] = tool;
    return out;
  }
  if (tool == "scatter")
    return chart_json(ds::chart_data(d, ds::ChartKind::Scatter, {require_string(args, "x"), require_string(args, "y")}));
  if (tool == "correlation") {
    const auto m = ds::correlation_matrix(d, string_list(args, "variables"));
    json r = json::array();
    for (const auto& row : m.r) {
      json jr = json::array();
      for (double v : row) jr.push_back(num(v));
      r.push_back(std::move(jr));
    }
    return {{"variables", m.variables}, {"r", r}};
  }
  if (tool == "delete_missing" || tool == "replace_missing") {
    const auto strategy = tool == "delete_missing" ? ds::MissingStrategy::Delete : replace_strategy(args);
    const std::size_t before = d.rows.size();
    data = std::make_shared<const ds::ChoiceDataset>(ds::handle_missing(d, strategy));
    json out = dataset_info(*data);
    out["rows_removed"] = before - data->rows.size();
    return out;
  }
  if (tool == "sort") {
    const std::string order = args.value("order", std::string("asc"));
    if (order != "asc" && order != "desc") fail(ErrorCode::InvalidArgument, "order must be asc or desc");
    const auto variable = require_string(args, "variable");
    data = std::make_shared<const ds::ChoiceDataset>(
        ds::sort_dataset(d, variable, order == "asc" ? ds::SortOrder::Ascending : ds::SortOrder::Descending));
    json out = dataset_info(*data);
    out["variable"] = variable;
    out["order"] = order;
    return out;
  }
  fail(ErrorCode::UnknownAction, "unknown descriptive tool " + tool);
}

json run_oi_tool(std::string_view tool_name, const json& payload, const std::vector<ModelEntry>& models) {
  const std::string tool(tool_name);
  if (!payload.is_object() && !payload.is_null())
    fail(ErrorCode::InvalidArgument, "tool payload must be a JSON object");
  const json args = payload.is_null() ? json::object() : payload;

  if (tool == "compare") {
    std::vector<post::ComparedModel> compared;
    for (int id : model_id_list(args)) {
      const auto& e = fitted_entry(models, id);
      compared.push_back({std::to_string(id), e.result.get()});
    }
    return post::to_json(post::compare_models(compared));
  }
  if (tool == "elbow") {
    std::vector<const est::EstimationResult*> results;
    if (args.contains("model_ids")) {
      for (int id : model_id_list(args)) results.push_back(fitted_entry(models, id).result.get());
    } else {
      for (const auto& e : models)
        if (e.result) results.push_back(e.result.get());
    }
    return {{"series", post::to_json(post::elbow_data(results))}};
  }
  if (tool == "n_outputs") {
    std::size_t fitted = 0, misspecified = 0, pending = 0;
    for (const auto& e : models) {
      if (e.status == ModelStatus::Estimated) ++fitted;
      else if (e.status == ModelStatus::Misspecified) ++misspecified;
      else ++pending;
    }
    return {{"n_outputs", fitted}, {"misspecified", misspecified}, {"pending", pending}};
  }

  const auto& e = fitted_entry(models, require_int(args, "model_id"));
  if (tool == "wtp") {
    json out = json::array();
    if (args.contains("attribute")) {
      const int cls = args.contains("latent_class") ? require_int(args, "latent_class") : 0;
      out.push_back(post::to_json(post::wtp(*e.result, parse_attribute(require_string(args, "attribute")), cls)));
    } else {
      for (const auto& w : post::wtp_all(*e.result)) out.push_back(post::to_json(w));
    }
    return {{"model_id", e.model_id}, {"wtp", out}};
  }
  return scalar_metric(tool, e);
}

}  // namespace dcmsg::session
