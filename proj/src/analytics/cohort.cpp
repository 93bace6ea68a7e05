#include <algorithm>
#include <cmath>
#include <cstdio>

#include "analytics/workflow.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"

namespace dcmsg::analytics {
namespace {

constexpr std::int64_t kCohortStart = 1715590800000;  // 2024-05-13T09:00:00Z
constexpr double kBaseUses = 2.0;
constexpr double kSampleSize = 9720.0;

std::size_t poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  std::size_t k = 0;
  double p = rng.uniform();
  while (p > limit) {
    ++k;
    p *= rng.uniform();
  }
  return k;
}

void fill_fit(TelemetryEvent& e, double bic, int n_params) {
  const double k = n_params;
  const double ll_null = -kSampleSize * std::log(3.0);
  const double ll = -(bic - k * std::log(kSampleSize)) / 2.0;
  e.n_params = k;
  e.ll_final = ll;
  e.bic = bic;
  e.aic = -2.0 * ll + 2.0 * k;
  e.rho2 = 1.0 - ll / ll_null;
  e.adj_rho2 = 1.0 - (ll - k) / ll_null;
}

}  // namespace

Cohort generate_cohort(const CohortConfig& config) {
  const auto& effect = session::find_action(config.effect_tool);
  if (effect.task_id == 0) fail(ErrorCode::InvalidArgument, "the effect tool must be a DA or OI tool");
  if (!(config.effect_ratio > 0.0)) fail(ErrorCode::InvalidArgument, "effect ratio must be positive");

  Rng rng(config.seed);
  Cohort cohort;
  const std::size_t n_users = config.improved + config.not_improved;
  std::vector<bool> labels(n_users, false);
  for (std::size_t i = 0; i < config.improved; ++i) labels[i] = true;
  for (std::size_t i = n_users; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

  std::vector<const session::ActionDef*> tools;
  for (const auto& a : session::action_catalog())
    if (a.task_id > 0) tools.push_back(&a);

  for (std::size_t u = 0; u < n_users; ++u) {
    char name[32];
    std::snprintf(name, sizeof name, "user%02zu", u + 1);
    const std::string user = name;
    const bool improved = labels[u];
    cohort.improved[user] = improved;

    // Tool uses, shuffled; estimation requests are spliced in afterwards.
    std::vector<const session::ActionDef*> steps;
    for (const auto* t : tools) {
      double mean = kBaseUses;
      if (t == &effect) mean = improved ? kBaseUses * config.effect_ratio : kBaseUses;
      for (std::size_t k = poisson(rng, mean); k > 0; --k) steps.push_back(t);
    }
    for (std::size_t i = steps.size(); i > 1; --i) std::swap(steps[i - 1], steps[rng.below(i)]);

    const int n_models = 2 + static_cast<int>(rng.below(4));
    std::vector<std::size_t> slots;
    for (int m = 0; m < n_models; ++m) slots.push_back(rng.below(steps.size() + 1));
    std::sort(slots.begin(), slots.end());

    const double first_bic = 20000.0 + rng.uniform(-300.0, 300.0);
    std::vector<double> bics = {first_bic};
    for (int m = 1; m < n_models; ++m) bics.push_back(first_bic + rng.uniform(-400.0, 400.0));
    int reported = 1;
    if (improved) {
      reported = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_models - 1)));
      bics[static_cast<std::size_t>(reported - 1)] = first_bic - rng.uniform(50.0, 400.0);
    } else if (rng.bernoulli(0.5)) {
      reported = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_models - 1)));
      bics[static_cast<std::size_t>(reported - 1)] = first_bic + rng.uniform(10.0, 400.0);
    }

    const std::string session_id = "cohort-" + user;
    std::int64_t clock = kCohortStart + static_cast<std::int64_t>(u) * 3600000;
    std::int64_t seq = 0;
    auto push = [&](TelemetryEvent e) {
      clock += 5000 + static_cast<std::int64_t>(rng.below(55000));
      e.timestamp_ms = clock;
      e.user_id = user;
      e.session_id = session_id;
      e.seq = ++seq;
      cohort.events.push_back(std::move(e));
    };

    std::size_t next_slot = 0;
    int model_id = 0;
    for (std::size_t i = 0; i <= steps.size(); ++i) {
      while (next_slot < slots.size() && slots[next_slot] == i) {
        ++next_slot;
        ++model_id;
        auto s = spec::full_linear(spec::Family::MNL);
        for (auto& a : s.attributes) a.include = rng.bernoulli(0.8);
        s.at(spec::Attribute::Cost).include = true;
        TelemetryEvent e;
        e.phase = Phase::MS;
        e.action = std::string(session::kEstimateAction);
        e.model_id = model_id;
        e.spec = session::spec_codes(s);
        e.status = "estimated";
        int k = 2;
        for (const auto& a : s.attributes) k += a.include ? 1 : 0;
        fill_fit(e, bics[static_cast<std::size_t>(model_id - 1)], k);
        push(std::move(e));
      }
      if (i == steps.size()) break;
      TelemetryEvent e;
      e.phase = steps[i]->phase;
      e.action = steps[i]->name;
      e.task_id = steps[i]->task_id;
      push(std::move(e));
    }

    TelemetryEvent r;
    r.phase = Phase::R;
    r.action = std::string(session::kReportAction);
    r.r_models = {reported};
    r.reporting = "Report of " + user + ".";
    push(std::move(r));
  }
  session::sort_for_export(cohort.events);
  return cohort;
}

}  // namespace dcmsg::analytics
