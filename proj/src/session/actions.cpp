#include "session/actions.hpp"

#include "common/errors.hpp"

namespace dcmsg::session {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::DA: return "DA";
    case Phase::MS: return "MS";
    case Phase::OI: return "OI";
    case Phase::R: return "R";
  }
  return "?";
}

Phase parse_phase(std::string_view name) {
  for (auto p : {Phase::DA, Phase::MS, Phase::OI, Phase::R})
    if (phase_name(p) == name) return p;
  fail(ErrorCode::UnknownAction, "unknown phase " + std::string(name));
}

namespace {

std::vector<ActionDef> build_catalog() {
  std::vector<ActionDef> c;
  const std::pair<const char*, const char*> da[] = {
      {"summary_statistics", "View summary statistics"},
      {"data_dictionary", "View data dictionary"},
      {"missing_report", "Check missing data"},
      {"head", "View first 5 rows of data"},
      {"choice_shares", "View percentage of choices"},
      {"choice_task_example", "View choice task example"},
      {"histogram", "View histogram"},
      {"delete_missing", "Delete missing values"},
      {"boxplot", "View boxplot"},
      {"sort", "Sort dataset by variable"},
      {"correlation", "View correlation"},
      {"scatter", "View two-variables scatter plot"},
      {"replace_missing", "Replace missing values"},
      {"pie", "View pie chart"},
      {"bar", "View bar chart"},
  };
  int code = 1;
  for (const auto& [name, label] : da) c.push_back({name, Phase::DA, code++, label});

  c.push_back({"model", Phase::MS, 0, "Model family"});
  c.push_back({"ASC", Phase::MS, 0, "Alternative-specific constants"});
  for (const char* prefix : {"att_", "s_", "t_", "int_", "dist_"})
    for (int i = 1; i <= 6; ++i) {
      const std::string name = prefix + std::to_string(i);
      c.push_back({name, Phase::MS, 0, name});
    }
  c.push_back({"n_class", Phase::MS, 0, "Number of classes"});
  c.push_back({"covariates", Phase::MS, 0, "Class membership covariates"});
  c.push_back({std::string(kEstimateAction), Phase::MS, 0, "Estimate model"});

  const std::pair<const char*, const char*> oi[] = {
      {"ll_final", "View final log-likelihood"},
      {"ll_init", "View initial log-likelihood"},
      {"wtp", "Calculate Willingness-to-Pay"},
      {"compare", "Model comparison"},
      {"n_params", "View number of parameters"},
      {"n_individuals", "View number of individuals"},
      {"ll_null", "View log-likelihood at equal shares"},
      {"rho2", "View rho-squared"},
      {"adj_rho2", "View adjusted rho-squared"},
      {"cpu_cores", "View number of CPU cores"},
      {"sample_size", "View number of data rows"},
      {"n_outputs", "View number of outputs"},
      {"aic", "View Akaike Information Criterion"},
      {"bic", "View Bayesian Information Criterion"},
      {"est_time", "View time taken for estimation"},
      {"lr_test", "View likelihood ratio test"},
      {"gradient_norm", "View final gradient norm"},
      {"elbow", "View latent class elbow graph"},
  };
  for (const auto& [name, label] : oi) c.push_back({name, Phase::OI, code++, label});

  c.push_back({std::string(kReportAction), Phase::R, 0, "Submit report"});
  return c;
}

}  // namespace

const std::vector<ActionDef>& action_catalog() {
  static const std::vector<ActionDef> catalog = build_catalog();
  return catalog;
}

const ActionDef& find_action(std::string_view name) {
  for (const auto& a : action_catalog())
    if (a.name == name) return a;
  fail(ErrorCode::UnknownAction, "unknown action " + std::string(name));
}

const ActionDef& find_action(Phase phase, std::string_view name) {
  const ActionDef& a = find_action(name);
  if (a.phase != phase)
    fail(ErrorCode::UnknownAction, std::string(name) + " is not a " + std::string(phase_name(phase)) + " action");
  return a;
}

const ActionDef* action_by_task(int task_id) {
  if (task_id <= 0) return nullptr;
  for (const auto& a : action_catalog())
    if (a.task_id == task_id) return &a;
  return nullptr;
}

}  // namespace dcmsg::session
