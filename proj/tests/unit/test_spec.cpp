#include <doctest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "oracles.hpp"
#include "spec/design_matrix.hpp"
#include "spec/model_spec.hpp"

using namespace dcmsg;
using namespace dcmsg::spec;

namespace {

bool has_violation(const ModelSpecification& s, const char* constraint) {
  for (const auto& v : validate_spec(s))
    if (v.constraint == constraint) return true;
  return false;
}

ModelSpecification mixed(std::initializer_list<Attribute> random) {
  auto s = full_linear(Family::MMNL);
  for (auto a : random) s.at(a).distribution = Distribution::Normal;
  return s;
}

ModelSpecification random_valid_spec(Rng& rng) {
  const auto family = static_cast<Family>(1 + rng.below(3));
  ModelSpecification s = full_linear(family);
  if (family == Family::MNL) {
    s.asc = rng.bernoulli(0.5);
    for (std::size_t k = 0; k < kNumAttributes; ++k) {
      auto& a = s.attributes[k];
      a.include = rng.bernoulli(0.7);
      a.alt_specific = rng.bernoulli(0.3);
      const bool cost = static_cast<Attribute>(k) == Attribute::Cost;
      a.transform = cost ? Transform::Linear : static_cast<Transform>(1 + rng.below(3));
      a.interaction = static_cast<Interaction>(rng.below(6));
    }
    if (!s.asc) s.at(Attribute::Noise).include = true;
  } else if (family == Family::MMNL) {
    const auto first = static_cast<std::size_t>(rng.below(6));
    const auto second = static_cast<std::size_t>(rng.below(6));
    s.attributes[first].distribution = static_cast<Distribution>(1 + rng.below(2));
    s.attributes[second].distribution = static_cast<Distribution>(1 + rng.below(2));
    for (auto& a : s.attributes)
      if (a.distribution == Distribution::Fixed) a.interaction = static_cast<Interaction>(rng.below(6));
  } else {
    s.n_class = 2 + static_cast<int>(rng.below(2));
    for (auto& c : s.covariates) c = rng.bernoulli(0.4);
  }
  return s;
}

}  // namespace

TEST_SUITE("validation") {
  TEST_CASE("mixed logit constraints") {
    CHECK(has_violation(mixed({Attribute::Noise, Attribute::Green, Attribute::Cost}), constraint::kMaxTwoRandom));
    CHECK(validate_spec(mixed({Attribute::Noise, Attribute::Cost})).empty());
    CHECK(has_violation(mixed({}), constraint::kAtLeastOneRandom));

    auto s = mixed({Attribute::Noise});
    s.at(Attribute::Noise).interaction = Interaction::Age;
    CHECK(has_violation(s, constraint::kRandomNoInteraction));
    s.at(Attribute::Noise).interaction = Interaction::None;
    s.at(Attribute::Green).interaction = Interaction::Age;
    CHECK(validate_spec(s).empty());

    s.at(Attribute::Stores).alt_specific = true;
    CHECK(has_violation(s, constraint::kAllAttributesGeneric));
    s = mixed({Attribute::Noise});
    s.asc = false;
    CHECK(has_violation(s, constraint::kAscRequired));
    s = mixed({Attribute::Noise});
    s.at(Attribute::City).transform = Transform::Log;
    CHECK(has_violation(s, constraint::kLinearOnly));
  }

  TEST_CASE("latent class constraints") {
    auto s = full_linear(Family::LC);
    s.n_class = 4;
    CHECK(has_violation(s, constraint::kMaxThreeClasses));
    s.n_class = 3;
    CHECK(validate_spec(s).empty());
    s.at(Attribute::Noise).interaction = Interaction::Woman;
    CHECK(has_violation(s, constraint::kLatentNoInteraction));
    s = full_linear(Family::LC);
    s.at(Attribute::Cost).include = false;
    CHECK(has_violation(s, constraint::kAllAttributesGeneric));
  }

  TEST_CASE("MNL allows any combination") {
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
      ModelSpecification s;
      s.asc = true;
      for (auto& a : s.attributes) {
        a.include = rng.bernoulli(0.5);
        a.alt_specific = rng.bernoulli(0.5);
        a.transform = static_cast<Transform>(1 + rng.below(3));
        a.interaction = static_cast<Interaction>(rng.below(6));
        a.distribution = static_cast<Distribution>(rng.below(3));
      }
      CHECK(validate_spec(s).empty());
    }
    CHECK(has_violation(ModelSpecification{}, constraint::kNoParameters));
  }

  TEST_CASE("validation is pure and idempotent") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      auto s = random_valid_spec(rng);
      if (rng.bernoulli(0.3)) s.n_class = 7;
      const auto copy = s;
      const auto first = validate_spec(s);
      CHECK(s == copy);
      CHECK(validate_spec(s) == first);
      if (first.empty()) CHECK_NOTHROW(canonical_key(s));
    }
  }

  TEST_CASE("invalid specs raise InvalidSpec downstream") {
    try {
      canonical_key(mixed({}));
      FAIL("expected InvalidSpec");
    } catch (const InvalidSpecError& e) {
      CHECK(e.code() == ErrorCode::InvalidSpec);
      CHECK(e.violations().front().constraint == constraint::kAtLeastOneRandom);
    }
  }
}

TEST_SUITE("canonical key") {
  TEST_CASE("order of construction does not matter") {
    auto a = full_linear(Family::MMNL);
    a.at(Attribute::Noise).distribution = Distribution::Normal;
    a.at(Attribute::Cost).distribution = Distribution::Lognormal;
    a.at(Attribute::Green).interaction = Interaction::Woman;
    ModelSpecification b;
    b.at(Attribute::Green).interaction = Interaction::Woman;
    b.at(Attribute::Cost).distribution = Distribution::Lognormal;
    b.family = Family::MMNL;
    b.at(Attribute::Noise).distribution = Distribution::Normal;
    b.asc = true;
    for (auto& x : b.attributes) x.include = true;
    CHECK(canonical_key(a) == canonical_key(b));

    auto c = a;
    c.at(Attribute::Cost).distribution = Distribution::Normal;
    CHECK(canonical_key(c) != canonical_key(a));

    auto m = full_linear(Family::MNL);
    auto mm = full_linear(Family::MMNL);
    mm.at(Attribute::Noise).distribution = Distribution::Normal;
    auto mf = mm;
    mf.family = Family::MNL;
    CHECK(canonical_key(mf) == canonical_key(m));
    CHECK(canonical_key(mm) != canonical_key(m));
  }

  TEST_CASE("no collisions over an enumerated MNL space") {
    std::set<std::string> keys;
    std::size_t count = 0;
    auto add = [&](const ModelSpecification& s) {
      keys.insert(canonical_key(s));
      ++count;
    };
    // every option for two attributes at a time, others excluded
    std::vector<AttributeSpec> options;
    for (int s = 0; s < 2; ++s)
      for (int t = 1; t <= 3; ++t)
        for (int i = 0; i <= 5; ++i)
          options.push_back({true, s == 1, static_cast<Transform>(t), static_cast<Interaction>(i), Distribution::Fixed});
    for (std::size_t p = 0; p < kNumAttributes; ++p)
      for (std::size_t q = p + 1; q < kNumAttributes; ++q)
        for (const auto& op : options)
          for (const auto& oq : options)
            for (bool asc : {false, true}) {
              ModelSpecification s;
              s.asc = asc;
              s.attributes[p] = op;
              s.attributes[q] = oq;
              add(s);
            }
    const std::size_t pair_specs = count;
    // every subset/coding of all six attributes without interactions
    const AttributeSpec codings[] = {{}, {true, false, Transform::Linear, Interaction::None, Distribution::Fixed},
                                     {true, true, Transform::Linear, Interaction::None, Distribution::Fixed},
                                     {true, false, Transform::Log, Interaction::None, Distribution::Fixed},
                                     {true, false, Transform::BoxCox, Interaction::None, Distribution::Fixed}};
    std::size_t subset_specs = 0;
    for (int code = 0; code < 5 * 5 * 5 * 5 * 5 * 5; ++code) {
      ModelSpecification s;
      s.asc = true;
      int c = code;
      int included = 0;
      for (auto& a : s.attributes) {
        a = codings[c % 5];
        included += a.include;
        c /= 5;
      }
      if (included > 2) {  // smaller ones were covered above
        add(s);
        ++subset_specs;
      }
    }
    CHECK(keys.size() == pair_specs + subset_specs);
  }
}

TEST_SUITE("json") {
  TEST_CASE("field names and round trip") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      const auto s = random_valid_spec(rng);
      const auto j = to_json(s);
      for (const char* key : {"model", "ASC", "att_1", "s_6", "t_3", "int_2", "dist_5", "n_class", "covariates_6"})
        CHECK(j.contains(key));
      CHECK(spec_from_json(j) == s);
    }
  }

  TEST_CASE("bad codes") {
    auto j = to_json(full_linear(Family::MNL));
    j["int_2"] = 9;
    CHECK_THROWS_AS(spec_from_json(j), Error);
    j = to_json(full_linear(Family::MNL));
    j["model"] = 4;
    CHECK_THROWS_AS(spec_from_json(j), Error);
    CHECK_THROWS_AS(spec_from_json(nlohmann::json::array()), Error);
  }
}

TEST_SUITE("design matrix") {
  const auto ds = testing::small_dataset(40);

  TEST_CASE("worked parameter counts") {
    auto s = full_linear(Family::MNL);
    const auto dm = design_matrix(s, ds);
    CHECK(dm.param_names == std::vector<std::string>{"asc_B", "asc_C", "b_stores", "b_transport", "b_city",
                                                     "b_noise", "b_green", "b_cost"});
    s.at(Attribute::Cost).alt_specific = true;
    CHECK(design_matrix(s, ds).n_params() == 10);

    auto lc = full_linear(Family::LC);
    lc.covariates[static_cast<std::size_t>(MembershipCovariate::Woman)] = true;
    const auto ldm = design_matrix(lc, ds);
    CHECK(ldm.n_params() == 18);
    CHECK(ldm.param_names[16] == "const_2");
    CHECK(ldm.param_names[17] == "woman_2");
  }

  TEST_CASE("closed-form counts over random specs") {
    Rng rng(4);
    for (int i = 0; i < 300; ++i) {
      const auto s = random_valid_spec(rng);
      const auto dm = design_matrix(s, ds);
      CHECK(dm.n_params() == expected_parameter_count(s));
      CHECK(dm.start.size() == dm.n_params());
      CHECK(unidentified_parameters(dm).empty());
    }
  }

  TEST_CASE("Box-Cox adds a bounded lambda") {
    ModelSpecification s;
    s.asc = true;
    s.at(Attribute::City).include = true;
    s.at(Attribute::City).transform = Transform::BoxCox;
    const auto dm = design_matrix(s, ds);
    REQUIRE(dm.n_params() == 4);
    CHECK(dm.param_names[3] == "lambda_city");
    CHECK(dm.start[3] == 1.0);
    CHECK(dm.lower[3] == -2.0);
    CHECK(dm.upper[3] == 3.0);
    CHECK(transform_value(Transform::BoxCox, 4.0, 1.0) == doctest::Approx(3.0));
    CHECK(transform_value(Transform::BoxCox, 4.0, 0.0) == doctest::Approx(std::log(4.0)));
    CHECK(transform_value(Transform::BoxCox, 4.0, 2.0) == doctest::Approx(7.5));
  }

  TEST_CASE("interaction terms") {
    ModelSpecification s;
    s.at(Attribute::Noise).include = true;
    s.at(Attribute::Noise).interaction = Interaction::Respcity;
    const auto dm = design_matrix(s, ds);
    CHECK(dm.param_names == std::vector<std::string>{"b_noise", "b_noise_respcity2", "b_noise_respcity3",
                                                     "b_noise_respcity4"});
  }

  TEST_CASE("data errors") {
    auto s = full_linear(Family::MNL);
    s.at(Attribute::Cost).transform = Transform::Log;
    CHECK(validate_spec(s).empty());
    try {
      design_matrix(s, ds);
      FAIL("expected NonPositiveForLog");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonPositiveForLog);
    }

    auto holes = ds;
    holes.rows[3].covariates[static_cast<std::size_t>(dataset::Covariate::Woman)].reset();
    CHECK_NOTHROW(design_matrix(full_linear(Family::MNL), holes));
    auto inter = full_linear(Family::MNL);
    inter.at(Attribute::Green).interaction = Interaction::Woman;
    try {
      design_matrix(inter, holes);
      FAIL("expected IncompleteData");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IncompleteData);
    }
  }

  TEST_CASE("panel structure") {
    const auto dm = design_matrix(full_linear(Family::MNL), ds);
    CHECK(dm.n_individuals() == 40);
    CHECK(dm.panel_offsets.size() == 41);
    CHECK(dm.panel_offsets.back() == dm.n_rows());
    for (std::size_t n = 0; n < 40; ++n) CHECK(dm.panel_offsets[n + 1] - dm.panel_offsets[n] == 4);
  }
}
