#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "dataset/dataset.hpp"

namespace dcmsg::dataset {
namespace {

// Index of a synthetic parameter name: 0 asc_B, 1 asc_C, 2.. b_<attribute>.
std::size_t param_slot(const std::string& name) {
  const auto& names = synthetic_param_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(ErrorCode::InvalidConfig, "unknown synthetic parameter: " + name);
  return static_cast<std::size_t>(it - names.begin());
}

using ParamVector = std::array<double, 2 + kNumAttributes>;

ParamVector to_vector(const std::map<std::string, double>& params, ParamVector base) {
  for (const auto& [name, value] : params) {
    if (!std::isfinite(value)) fail(ErrorCode::InvalidConfig, "non-finite value for " + name);
    base[param_slot(name)] = value;
  }
  return base;
}

void validate(const SyntheticConfig& cfg) {
  if (cfg.n_individuals == 0 || cfg.n_tasks == 0)
    fail(ErrorCode::InvalidConfig, "n_individuals and n_tasks must be positive");
  if (!(cfg.missing_rate >= 0.0 && cfg.missing_rate < 1.0))
    fail(ErrorCode::InvalidConfig, "missing_rate must lie in [0, 1)");
  for (const auto& [name, sd] : cfg.random_sd) {
    if (param_slot(name) < 2) fail(ErrorCode::InvalidConfig, "constants cannot be random: " + name);
    if (!(sd >= 0.0) || !std::isfinite(sd))
      fail(ErrorCode::InvalidConfig, "random_sd must be a finite nonnegative value");
  }
  if (!cfg.classes.empty()) {
    double total = 0.0;
    for (const auto& c : cfg.classes) {
      if (!(c.share > 0.0)) fail(ErrorCode::InvalidConfig, "class shares must be positive");
      total += c.share;
    }
    if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::InvalidConfig, "class shares must sum to 1");
  }
}

double draw_level(Rng& rng, Attribute a) {
  const auto& codes = attribute_def(a).numeric_codes;
  return codes[rng.below(codes.size())];
}

}  // namespace

const std::vector<std::string>& synthetic_param_names() {
  static const std::vector<std::string> names = {
      "asc_B", "asc_C", "b_stores", "b_transport", "b_city", "b_noise", "b_green", "b_cost"};
  return names;
}

ChoiceDataset generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  const ParamVector base = to_vector(cfg.true_params, ParamVector{});
  std::vector<ParamVector> class_params;
  for (const auto& c : cfg.classes) class_params.push_back(to_vector(c.params, base));
  std::vector<std::pair<std::size_t, double>> random;
  for (const auto& [name, sd] : cfg.random_sd) random.emplace_back(param_slot(name), sd);

  Rng rng(cfg.seed);
  std::vector<ChoiceRow> rows;
  rows.reserve(cfg.n_individuals * cfg.n_tasks);

  for (std::size_t n = 0; n < cfg.n_individuals; ++n) {
    CovariateValues person{};
    person[static_cast<std::size_t>(Covariate::Age)] = 1.0 + static_cast<double>(rng.below(3));
    person[static_cast<std::size_t>(Covariate::Woman)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    person[static_cast<std::size_t>(Covariate::Homeowner)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    person[static_cast<std::size_t>(Covariate::Carowner)] = rng.bernoulli(0.6) ? 1.0 : 0.0;
    person[static_cast<std::size_t>(Covariate::Respcity)] = 1.0 + static_cast<double>(rng.below(4));
    person[static_cast<std::size_t>(Covariate::Job)] = rng.bernoulli(0.7) ? 1.0 : 0.0;

    ParamVector beta = base;
    if (!class_params.empty()) {
      const double u = rng.uniform();
      double cum = 0.0;
      std::size_t c = 0;
      for (; c + 1 < cfg.classes.size(); ++c) {
        cum += cfg.classes[c].share;
        if (u < cum) break;
      }
      beta = class_params[c];
    }
    for (const auto& [slot, sd] : random) beta[slot] = rng.normal(beta[slot], sd);

    for (std::size_t t = 0; t < cfg.n_tasks; ++t) {
      ChoiceRow row;
      row.respondent_id = static_cast<int>(n + 1);
      row.task_id = static_cast<int>(t + 1);
      std::array<double, kNumAlternatives> v{};
      for (std::size_t alt = 0; alt < kNumAlternatives; ++alt) {
        v[alt] = alt == 0 ? 0.0 : beta[alt - 1];
        for (std::size_t k = 0; k < kNumAttributes; ++k) {
          row.attr[alt][k] = draw_level(rng, static_cast<Attribute>(k));
          v[alt] += beta[2 + k] * row.attr[alt][k];
        }
      }
      const double vmax = *std::max_element(v.begin(), v.end());
      std::array<double, kNumAlternatives> p{};
      double denom = 0.0;
      for (std::size_t alt = 0; alt < kNumAlternatives; ++alt) denom += (p[alt] = std::exp(v[alt] - vmax));
      const double u = rng.uniform() * denom;
      double cum = 0.0;
      row.choice = static_cast<int>(kNumAlternatives);
      for (std::size_t alt = 0; alt + 1 < kNumAlternatives; ++alt) {
        cum += p[alt];
        if (u < cum) {
          row.choice = static_cast<int>(alt + 1);
          break;
        }
      }
      row.covariates = person;
      if (cfg.missing_rate > 0.0) {
        for (auto& c : row.covariates)
          if (rng.bernoulli(cfg.missing_rate)) c.reset();
      }
      rows.push_back(std::move(row));
    }
  }
  return make_dataset(std::move(rows));
}

}  // namespace dcmsg::dataset
