#include <algorithm>
#include <map>
#include <tuple>

#include "analytics/workflow.hpp"
#include "common/errors.hpp"

namespace dcmsg::analytics {
namespace {

struct Fitted {
  std::string session_id;
  int model_id = 0;
  double value = 0.0;
};

std::optional<double> metric(const TelemetryEvent& e, ImprovementRule rule) {
  switch (rule) {
    case ImprovementRule::Bic: return e.bic;
    case ImprovementRule::Aic: return e.aic;
    case ImprovementRule::LogLik: return e.ll_final;
    case ImprovementRule::Rho2: return e.rho2;
  }
  return std::nullopt;
}

bool lower_is_better(ImprovementRule rule) {
  return rule == ImprovementRule::Bic || rule == ImprovementRule::Aic;
}

}  // namespace

ImprovementRule parse_rule(std::string_view name) {
  if (name == "bic") return ImprovementRule::Bic;
  if (name == "aic") return ImprovementRule::Aic;
  if (name == "ll") return ImprovementRule::LogLik;
  if (name == "rho2") return ImprovementRule::Rho2;
  fail(ErrorCode::InvalidArgument, "unknown improvement rule " + std::string(name) + " (bic, aic, ll, rho2)");
}

ImprovementGroups classify_improvement(const std::vector<TelemetryEvent>& rows, ImprovementRule rule) {
  std::map<std::string, std::vector<const TelemetryEvent*>> by_user;
  for (const auto& r : rows) by_user[r.user_id].push_back(&r);

  const bool lower = lower_is_better(rule);
  auto better = [lower](double a, double b) { return lower ? a < b : a > b; };

  ImprovementGroups out;
  for (auto& [user, events] : by_user) {
    std::sort(events.begin(), events.end(), [](const TelemetryEvent* a, const TelemetryEvent* b) {
      return std::tie(a->timestamp_ms, a->session_id, a->seq) < std::tie(b->timestamp_ms, b->session_id, b->seq);
    });
    std::vector<Fitted> fitted;
    const TelemetryEvent* report = nullptr;
    for (const auto* e : events) {
      if (e->action == session::kEstimateAction && e->status == "estimated") {
        if (const auto v = metric(*e, rule)) fitted.push_back({e->session_id, e->model_id, *v});
      }
      if (e->phase == Phase::R && !e->r_models.empty()) report = e;
    }
    if (fitted.empty()) {
      out.warnings.push_back("user " + user + " has no successfully estimated model");
      continue;
    }

    UserImprovement u;
    u.user_id = user;
    u.first_value = fitted.front().value;
    std::optional<double> final_value;
    if (report) {
      for (int id : report->r_models) {
        const auto it = std::find_if(fitted.begin(), fitted.end(), [&](const Fitted& f) {
          return f.session_id == report->session_id && f.model_id == id;
        });
        if (it != fitted.end() && (!final_value || better(it->value, *final_value))) final_value = it->value;
      }
      if (!final_value) out.warnings.push_back("user " + user + " reported no fitted model; using the last models");
    }
    u.reported = final_value.has_value();
    if (!final_value) {
      const std::size_t from = fitted.size() > 3 ? fitted.size() - 3 : 0;
      for (std::size_t i = from; i < fitted.size(); ++i)
        if (!final_value || better(fitted[i].value, *final_value)) final_value = fitted[i].value;
    }
    u.final_value = *final_value;
    u.improved = better(u.final_value, u.first_value);
    out.users.push_back(std::move(u));
  }
  if (out.users.empty()) fail(ErrorCode::NoModels, "no user has a successfully estimated model");
  return out;
}

}  // namespace dcmsg::analytics
