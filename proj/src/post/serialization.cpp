#include <cmath>
#include <limits>

#include "common/errors.hpp"
#include "post/post_estimation.hpp"

namespace dcmsg::post {

using est::EstimationResult;
using nlohmann::json;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double to_double(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Eigen::VectorXd vector_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(a[i]);
  return v;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = n ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(n, k);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != k)
      fail(ErrorCode::MalformedFile, "ragged matrix");
    m.row(r) = vector_from(rows[static_cast<std::size_t>(r)]).transpose();
  }
  return m;
}

json optional_row(const std::vector<std::optional<double>>& row) {
  json a = json::array();
  for (const auto& v : row) a.push_back(v ? num(*v) : json(nullptr));
  return a;
}

est::EstimationStatus status_from(const std::string& name) {
  for (auto s : {est::EstimationStatus::Ok, est::EstimationStatus::NotConverged,
                 est::EstimationStatus::SingularHessian, est::EstimationStatus::BoundaryClassShare})
    if (name == est::status_name(s)) return s;
  fail(ErrorCode::MalformedFile, "unknown estimation status " + name);
}

}  // namespace

json to_json(const FitMetrics& m) {
  return {{"n_params", m.n_params},       {"sample_size", m.sample_size},
          {"n_individuals", m.n_individuals}, {"ll_null", num(m.ll_null)},
          {"ll_init", num(m.ll_init)},     {"ll_final", num(m.ll_final)},
          {"lr_test_null", num(m.lr_test_null)}, {"rho2", num(m.rho2)},
          {"adj_rho2", num(m.adj_rho2)},   {"aic", num(m.aic)},
          {"bic", num(m.bic)},             {"gradient_norm", num(m.gradient_norm)},
          {"est_time", num(m.est_time)}};
}

json to_json(const WtpEntry& w) {
  json j = {{"attribute", w.attribute}, {"wtp", num(w.wtp)},      {"se", num(w.se)},
            {"t_stat", num(w.t_stat)},   {"defined", w.defined}};
  if (w.latent_class > 0) j["class"] = w.latent_class;
  return j;
}

json to_json(const ComparisonTable& t) {
  json params = json::array();
  for (std::size_t i = 0; i < t.parameters.size(); ++i)
    params.push_back({{"name", t.parameters[i]},
                      {"estimates", optional_row(t.estimates[i])},
                      {"robust_se", optional_row(t.robust_se[i])}});
  json metrics = json::array();
  for (const auto& m : t.metrics) {
    json values = json::array(), diffs = json::array();
    for (double v : m.values) values.push_back(num(v));
    for (double v : m.differences) diffs.push_back(num(v));
    metrics.push_back({{"metric", m.metric}, {"values", values}, {"differences", diffs},
                       {"best", m.best}, {"tie", m.tie}});
  }
  return {{"models", t.model_ids}, {"parameters", params}, {"metrics", metrics}};
}

json to_json(const std::vector<ElbowSeries>& series) {
  json out = json::array();
  for (const auto& s : series) {
    json values = json::array();
    for (double v : s.values) values.push_back(num(v));
    out.push_back({{"metric", s.metric}, {"n_class", s.n_class}, {"values", values}});
  }
  return out;
}

json result_summary(const EstimationResult& res) {
  json rows = json::array();
  for (std::size_t i = 0; i < res.n_params; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    rows.push_back({{"name", res.param_names[i]},
                    {"estimate", num(res.estimates[k])},
                    {"robust_se", num(res.robust_se[k])},
                    {"t_stat", num(res.t_stat[k])},
                    {"p_value", num(res.p_value[k])}});
  }
  json j = {{"spec_key", res.spec_key},
            {"family", std::string(spec::family_name(res.spec.family))},
            {"status", est::status_name(res.status)},
            {"misspecified", est::is_misspecified(res.status)},
            {"converged", res.converged},
            {"message", res.message},
            {"parameters", rows},
            {"metrics", to_json(fit_metrics(res))},
            {"draws_used", res.draws_used},
            {"n_starts", res.n_starts},
            {"cpu_cores", res.n_cores}};
  if (!res.class_shares.empty()) j["class_shares"] = res.class_shares;
  return j;
}

json result_to_json(const EstimationResult& res) {
  json start_ll = json::array();
  for (double v : res.start_ll) start_ll.push_back(num(v));
  return {{"spec_key", res.spec_key},
          {"spec", spec::to_json(res.spec)},
          {"param_names", res.param_names},
          {"estimates", vector_json(res.estimates)},
          {"robust_se", vector_json(res.robust_se)},
          {"classical_se", vector_json(res.classical_se)},
          {"t_stat", vector_json(res.t_stat)},
          {"p_value", vector_json(res.p_value)},
          {"ll_null", num(res.ll_null)},
          {"ll_init", num(res.ll_init)},
          {"ll_final", num(res.ll_final)},
          {"gradient_norm", num(res.gradient_norm)},
          {"hessian", matrix_json(res.hessian)},
          {"robust_covariance", matrix_json(res.robust_covariance)},
          {"n_obs", res.n_obs},
          {"n_individuals", res.n_individuals},
          {"n_params", res.n_params},
          {"draws_used", res.draws_used},
          {"n_starts", res.n_starts},
          {"start_ll", start_ll},
          {"class_shares", res.class_shares},
          {"converged", res.converged},
          {"iterations", res.iterations},
          {"status", est::status_name(res.status)},
          {"message", res.message},
          {"n_cores", res.n_cores},
          {"wall_time", num(res.wall_time)}};
}

EstimationResult result_from_json(const json& j) {
  try {
    EstimationResult r;
    r.spec_key = j.at("spec_key").get<std::string>();
    r.spec = spec::spec_from_json(j.at("spec"));
    r.param_names = j.at("param_names").get<std::vector<std::string>>();
    r.estimates = vector_from(j.at("estimates"));
    r.robust_se = vector_from(j.at("robust_se"));
    r.classical_se = vector_from(j.at("classical_se"));
    r.t_stat = vector_from(j.at("t_stat"));
    r.p_value = vector_from(j.at("p_value"));
    r.ll_null = to_double(j.at("ll_null"));
    r.ll_init = to_double(j.at("ll_init"));
    r.ll_final = to_double(j.at("ll_final"));
    r.gradient_norm = to_double(j.at("gradient_norm"));
    r.hessian = matrix_from(j.at("hessian"));
    r.robust_covariance = matrix_from(j.at("robust_covariance"));
    r.n_obs = j.at("n_obs").get<std::size_t>();
    r.n_individuals = j.at("n_individuals").get<std::size_t>();
    r.n_params = j.at("n_params").get<std::size_t>();
    r.draws_used = j.at("draws_used").get<std::size_t>();
    r.n_starts = j.at("n_starts").get<std::size_t>();
    for (const auto& v : j.at("start_ll")) r.start_ll.push_back(to_double(v));
    r.class_shares = j.at("class_shares").get<std::vector<double>>();
    r.converged = j.at("converged").get<bool>();
    r.iterations = j.at("iterations").get<int>();
    r.status = status_from(j.at("status").get<std::string>());
    r.message = j.at("message").get<std::string>();
    r.n_cores = j.at("n_cores").get<unsigned>();
    r.wall_time = to_double(j.at("wall_time"));
    if (r.param_names.size() != r.n_params || static_cast<std::size_t>(r.estimates.size()) != r.n_params)
      fail(ErrorCode::MalformedFile, "parameter vectors disagree in length");
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedFile, std::string("invalid estimation result: ") + e.what());
  }
}

}  // namespace dcmsg::post
