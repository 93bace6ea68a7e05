#include "spec/design_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace dcmsg::spec {
namespace {

using dataset::Covariate;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLambdaLower = -2.0;
constexpr double kLambdaUpper = 3.0;

std::vector<DummyCoding> dummies_for(Covariate c) {
  switch (c) {
    case Covariate::Age:
      return {{c, 2.0, false}, {c, 3.0, false}};
    case Covariate::Respcity:
      return {{c, 2.0, false}, {c, 3.0, false}, {c, 4.0, false}};
    default:
      return {{c, 1.0, true}};
  }
}

std::string dummy_label(const DummyCoding& d) {
  std::string base;
  switch (d.covariate) {
    case Covariate::Age: base = "age"; break;
    case Covariate::Woman: base = "woman"; break;
    case Covariate::Homeowner: base = "homeowner"; break;
    case Covariate::Carowner: base = "carowner"; break;
    case Covariate::Respcity: base = "respcity"; break;
    case Covariate::Job: base = "job"; break;
  }
  if (!d.binary) base += std::to_string(static_cast<int>(d.level));
  return base;
}

std::size_t level_count(Covariate c) { return dummies_for(c).size(); }

struct Builder {
  DesignMatrix dm;

  std::size_t add_param(std::string name, double start = 0.0, double lo = -kInf, double hi = kInf) {
    dm.param_names.push_back(std::move(name));
    dm.start.push_back(start);
    dm.lower.push_back(lo);
    dm.upper.push_back(hi);
    return dm.param_names.size() - 1;
  }

  // Constants and attribute terms of one utility block. Names get `suffix`.
  void add_utility_block(const ModelSpecification& spec, const std::string& suffix) {
    if (spec.asc) {
      dm.terms.push_back({add_param("asc_B" + suffix), std::nullopt, 0b010, std::nullopt,
                          Transform::Linear, std::nullopt});
      dm.terms.push_back({add_param("asc_C" + suffix), std::nullopt, 0b100, std::nullopt,
                          Transform::Linear, std::nullopt});
    }
    for (std::size_t k = 0; k < kNumAttributes; ++k) {
      const auto& a = spec.attributes[k];
      if (!a.include) continue;
      const auto attr = static_cast<Attribute>(k);
      const std::string key = "b_" + std::string(dataset::attribute_key(attr));

      std::vector<std::pair<std::uint8_t, std::string>> alts;
      if (a.alt_specific) {
        for (std::size_t alt = 0; alt < dataset::kNumAlternatives; ++alt)
          alts.emplace_back(static_cast<std::uint8_t>(1u << alt),
                            "_" + std::string(dataset::alternative_label(alt)));
      } else {
        alts.emplace_back(0b111, "");
      }

      const std::size_t first_term = dm.terms.size();
      for (const auto& [mask, alt_suffix] : alts)
        dm.terms.push_back({add_param(key + alt_suffix + suffix), attr, mask, std::nullopt,
                            a.transform, std::nullopt});
      if (a.interaction != Interaction::None) {
        for (const auto& d : dummies_for(interaction_covariate(a.interaction)))
          for (const auto& [mask, alt_suffix] : alts)
            dm.terms.push_back({add_param(key + "_" + dummy_label(d) + alt_suffix + suffix), attr,
                                mask, d, a.transform, std::nullopt});
      }
      if (a.transform == Transform::BoxCox) {
        const std::size_t lambda = add_param(
            "lambda_" + std::string(dataset::attribute_key(attr)) + suffix, 1.0, kLambdaLower,
            kLambdaUpper);
        for (std::size_t t = first_term; t < dm.terms.size(); ++t) dm.terms[t].lambda_param = lambda;
      }
    }
  }
};

void attach_data(DesignMatrix& dm, const ModelSpecification& spec,
                 const dataset::ChoiceDataset& ds) {
  std::vector<bool> used(dataset::kNumCovariates, false);
  for (const auto& a : spec.attributes)
    if (a.include && a.interaction != Interaction::None)
      used[static_cast<std::size_t>(interaction_covariate(a.interaction))] = true;
  if (spec.family == Family::LC)
    for (std::size_t c = 0; c < kNumMembershipCovariates; ++c)
      if (spec.covariates[c])
        used[static_cast<std::size_t>(membership_covariate(static_cast<MembershipCovariate>(c)))] =
            true;

  std::vector<std::size_t> order(ds.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = ds.rows[a];
    const auto& rb = ds.rows[b];
    return std::tie(ra.respondent_id, ra.task_id) < std::tie(rb.respondent_id, rb.task_id);
  });

  dm.attributes.reserve(order.size());
  dm.covariates.reserve(order.size());
  dm.choice.reserve(order.size());
  for (std::size_t idx : order) {
    const auto& row = ds.rows[idx];
    std::array<double, dataset::kNumCovariates> cov{};
    for (std::size_t j = 0; j < dataset::kNumCovariates; ++j) {
      if (row.covariates[j]) {
        cov[j] = *row.covariates[j];
      } else if (used[j]) {
        fail(ErrorCode::IncompleteData,
             "covariate " + std::string(dataset::covariate_name(static_cast<Covariate>(j))) +
                 " has missing values; handle missing data first");
      } else {
        cov[j] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    if (dm.respondent_ids.empty() || dm.respondent_ids.back() != row.respondent_id) {
      dm.respondent_ids.push_back(row.respondent_id);
      dm.panel_offsets.push_back(dm.choice.size());
    }
    dm.attributes.push_back(row.attr);
    dm.covariates.push_back(cov);
    dm.choice.push_back(row.choice - 1);
  }
  dm.panel_offsets.push_back(dm.choice.size());

  for (const auto& term : dm.terms) {
    if (!term.attribute || term.transform == Transform::Linear) continue;
    for (const auto& grid : dm.attributes)
      for (const auto& alt : grid)
        if (alt[static_cast<std::size_t>(*term.attribute)] <= 0.0)
          fail(ErrorCode::NonPositiveForLog,
               std::string(dataset::attribute_name(*term.attribute)) +
                   " has nonpositive levels; log and Box-Cox need positive values");
  }
}

}  // namespace

double transform_value(Transform t, double x, double lambda) {
  switch (t) {
    case Transform::Linear:
      return x;
    case Transform::Log:
      return std::log(x);
    case Transform::BoxCox: {
      const double lx = std::log(x);
      if (std::abs(lambda) < 1e-8) return lx + 0.5 * lambda * lx * lx;
      return std::expm1(lambda * lx) / lambda;
    }
  }
  return x;
}

double transform_dlambda(double x, double lambda) {
  const double lx = std::log(x);
  if (std::abs(lambda) < 1e-8) return 0.5 * lx * lx + lambda * lx * lx * lx / 3.0;
  const double xl = std::exp(lambda * lx);
  return (xl * lx * lambda - std::expm1(lambda * lx)) / (lambda * lambda);
}

double lognormal_sign(Attribute a) { return a == Attribute::Green ? 1.0 : -1.0; }

DesignMatrix design_matrix(const ModelSpecification& spec, const dataset::ChoiceDataset& ds) {
  Builder b;
  b.dm.spec_key = canonical_key(spec);  // validates
  b.dm.family = spec.family;

  if (spec.family == Family::LC) {
    b.dm.n_classes = static_cast<std::size_t>(spec.n_class);
    for (std::size_t c = 0; c < b.dm.n_classes; ++c) {
      const std::size_t before = b.dm.terms.size();
      b.add_utility_block(spec, "_" + std::to_string(c + 1));
      if (c == 0) {
        b.dm.class_block = b.dm.param_names.size();
      } else {
        b.dm.terms.resize(before);  // class c reuses class 0 terms with an offset
      }
    }
    for (std::size_t c = 1; c < b.dm.n_classes; ++c) {
      const std::string suffix = "_" + std::to_string(c + 1);
      b.dm.membership.push_back({b.add_param("const" + suffix), c, std::nullopt});
      for (std::size_t j = 0; j < kNumMembershipCovariates; ++j) {
        if (!spec.covariates[j]) continue;
        for (const auto& d : dummies_for(membership_covariate(static_cast<MembershipCovariate>(j))))
          b.dm.membership.push_back({b.add_param(dummy_label(d) + suffix), c, d});
      }
    }
  } else {
    b.add_utility_block(spec, "");
  }

  if (spec.family == Family::MMNL) {
    for (std::size_t k = 0; k < kNumAttributes; ++k) {
      const auto& a = spec.attributes[k];
      if (!a.include || a.distribution == Distribution::Fixed) continue;
      const auto attr = static_cast<Attribute>(k);
      const std::string key(dataset::attribute_key(attr));
      const auto mean_it = std::find(b.dm.param_names.begin(), b.dm.param_names.end(), "b_" + key);
      RandomCoefficient rc;
      rc.mean_param = static_cast<std::size_t>(mean_it - b.dm.param_names.begin());
      rc.sd_param = b.add_param("sd_" + key, 0.1, 0.0);
      rc.attribute = attr;
      rc.distribution = a.distribution;
      rc.sign = a.distribution == Distribution::Lognormal ? lognormal_sign(attr) : 1.0;
      b.dm.random.push_back(rc);
    }
  }

  attach_data(b.dm, spec, ds);
  return std::move(b.dm);
}

std::size_t expected_parameter_count(const ModelSpecification& spec) {
  if (spec.family == Family::LC) {
    std::size_t per_class = spec.asc ? 2 : 0;
    for (const auto& a : spec.attributes) per_class += a.include ? 1 : 0;
    std::size_t membership = 1;
    for (std::size_t j = 0; j < kNumMembershipCovariates; ++j)
      if (spec.covariates[j])
        membership += level_count(membership_covariate(static_cast<MembershipCovariate>(j)));
    const auto c = static_cast<std::size_t>(spec.n_class);
    return c * per_class + (c - 1) * membership;
  }
  std::size_t k = spec.asc ? 2 : 0;
  for (const auto& a : spec.attributes) {
    if (!a.include) continue;
    const std::size_t width = a.alt_specific ? 3 : 1;
    const std::size_t levels =
        a.interaction == Interaction::None ? 0 : level_count(interaction_covariate(a.interaction));
    k += width * (1 + levels);
    if (a.transform == Transform::BoxCox) k += 1;
    if (spec.family == Family::MMNL && a.distribution != Distribution::Fixed) k += 1;
  }
  return k;
}

std::vector<std::string> unidentified_parameters(const DesignMatrix& dm) {
  std::vector<bool> identified(dm.n_params(), false);
  for (const auto& rc : dm.random) identified[rc.sd_param] = true;

  auto term_value = [&](const UtilityTerm& t, std::size_t row, std::size_t alt) {
    if (!(t.alt_mask & (1u << alt))) return 0.0;
    double v = 1.0;
    if (t.attribute) {
      const double lambda = t.lambda_param ? dm.start[*t.lambda_param] : 1.0;
      v = transform_value(t.transform, dm.attributes[row][alt][static_cast<std::size_t>(*t.attribute)],
                          lambda);
      if (t.transform == Transform::BoxCox) {
        // the shifted (x - 1) form can vanish where x is constant; judge the raw level instead
        v = dm.attributes[row][alt][static_cast<std::size_t>(*t.attribute)];
      }
    }
    if (t.dummy) v *= t.dummy->value(dm.covariates[row][static_cast<std::size_t>(t.dummy->covariate)]);
    return v;
  };

  for (const auto& t : dm.terms) {
    if (t.lambda_param) identified[*t.lambda_param] = true;
    bool found = false;
    for (std::size_t row = 0; row < dm.n_rows() && !found; ++row) {
      const double ref = term_value(t, row, dm.reference_alternative);
      for (std::size_t alt = 0; alt < dataset::kNumAlternatives; ++alt)
        if (term_value(t, row, alt) != ref) {
          found = true;
          break;
        }
    }
    if (!found) continue;
    for (std::size_t c = 0; c < dm.n_classes; ++c) identified[t.param + c * dm.class_block] = true;
  }
  for (const auto& m : dm.membership) {
    if (!m.dummy) {
      identified[m.param] = true;
      continue;
    }
    for (std::size_t n = 0; n < dm.n_individuals(); ++n) {
      const auto& cov = dm.covariates[dm.panel_offsets[n]];
      if (m.dummy->value(cov[static_cast<std::size_t>(m.dummy->covariate)]) != 0.0) {
        identified[m.param] = true;
        break;
      }
    }
  }
  std::vector<std::string> out;
  for (std::size_t p = 0; p < dm.n_params(); ++p)
    if (!identified[p]) out.push_back(dm.param_names[p]);
  return out;
}

}  // namespace dcmsg::spec
