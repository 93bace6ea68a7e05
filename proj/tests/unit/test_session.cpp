#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include <doctest.h>

#include "common/errors.hpp"
#include "oracles.hpp"
#include "post/post_estimation.hpp"
#include "scripted_session.hpp"
#include "session/manager.hpp"
#include "session/precompute.hpp"
#include "session/tools.hpp"

using namespace dcmsg;
using namespace dcmsg::session;
using nlohmann::json;
using spec::Attribute;
using spec::Family;

namespace {

constexpr std::int64_t kStart = 1715592600000;  // 2024-05-13T09:30:00.000Z

std::shared_ptr<const dataset::ChoiceDataset> shared_small(std::size_t n = 120, std::uint64_t seed = 3) {
  return std::make_shared<const dataset::ChoiceDataset>(testing::small_dataset(n, seed));
}

struct Fixture {
  std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(kStart);
  std::shared_ptr<ModelRepository> repo = std::make_shared<ModelRepository>();
  std::shared_ptr<const dataset::ChoiceDataset> data = shared_small();

  Session make(const std::string& user = "u1") {
    return Session("s-" + user, user, "default", data, testing::quick_config(), clock);
  }

  void fit(Session& s, const EstimationJob& job) { s.finish(job.model_id, execute(job, *repo)); }
};

template <class F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("actions") {
  TEST_CASE("inventory sizes and codes") {
    std::size_t da = 0, ms = 0, oi = 0;
    std::set<int> codes;
    std::set<std::string> names;
    for (const auto& a : action_catalog()) {
      CHECK(names.insert(a.name).second);
      if (a.task_id) CHECK(codes.insert(a.task_id).second);
      if (a.phase == Phase::DA) {
        ++da;
        CHECK(a.task_id >= 1);
        CHECK(a.task_id <= 15);
      }
      if (a.phase == Phase::MS && a.name != kEstimateAction) {
        ++ms;
        CHECK(a.task_id == 0);
      }
      if (a.phase == Phase::OI) {
        ++oi;
        CHECK(a.task_id >= 16);
        CHECK(a.task_id <= 33);
      }
    }
    CHECK(da == 15);
    CHECK(ms == 34);
    CHECK(oi == 18);
    CHECK(find_action("histogram").task_id == 7);
    CHECK(action_by_task(19)->name == "compare");
    CHECK(action_by_task(0) == nullptr);
    CHECK(error_of([] { find_action("juggle"); }) == ErrorCode::UnknownAction);
    CHECK(error_of([] { find_action(Phase::OI, "histogram"); }) == ErrorCode::UnknownAction);
  }
}

TEST_SUITE("telemetry") {
  TEST_CASE("timestamps") {
    CHECK(format_timestamp(kStart) == "2024-05-13T09:30:00.000Z");
    CHECK(format_timestamp(kStart + 1250) == "2024-05-13T09:30:01.250Z");
    CHECK(format_timestamp(0) == "1970-01-01T00:00:00.000Z");
    CHECK(parse_timestamp("2024-05-13T09:30:01.250Z") == kStart + 1250);
    CHECK(parse_timestamp("2024-05-13T09:30:01.25Z") == kStart + 1250);
    CHECK(parse_timestamp("2024-05-13T09:30:01") == kStart + 1000);
    for (std::int64_t t : {std::int64_t{1}, kStart + 999, std::int64_t{4102444800123}})
      CHECK(parse_timestamp(format_timestamp(t)) == t);
    CHECK(error_of([] { parse_timestamp("13/05/2024"); }) == ErrorCode::MalformedFile);
  }

  TEST_CASE("spec codes round trip") {
    auto s = spec::full_linear(Family::LC);
    s.at(Attribute::Cost).transform = spec::Transform::Log;
    s.covariates[2] = true;
    const auto codes = spec_codes(s);
    CHECK(codes[0] == 3);
    CHECK(codes[1] == 1);
    CHECK(spec_field_names()[32] == "n_class");
    CHECK(codes[32] == 2);
    CHECK(spec_from_codes(codes) == s);
  }

  TEST_CASE("core columns are the telemetry table fields") {
    const auto& cols = core_columns();
    CHECK(cols.size() == 4 + kSpecFieldCount + 2);
    CHECK(cols.front() == "timestamp");
    CHECK(cols[4] == "model");
    CHECK(cols[5] == "ASC");
    CHECK(cols[6] == "att_1");
    CHECK(cols[cols.size() - 2] == "r_models");
    CHECK(cols.back() == "reporting");
  }
}

TEST_SUITE("session") {
  TEST_CASE("fresh session") {
    Fixture f;
    auto s = f.make();
    CHECK(s.events().empty());
    CHECK(s.phase() == Phase::DA);
    CHECK(s.init_time_ms() == kStart);
    CHECK_FALSE(s.closed());
    CHECK(s.summary()["n_events"] == 0);
  }

  TEST_CASE("descriptive tool event has zeroed model fields") {
    Fixture f;
    auto s = f.make();
    f.clock->advance(5000);
    const auto out = s.record_action(Phase::DA, "histogram", {{"variable", "Cost"}});
    CHECK(out["chart"] == "histogram");
    REQUIRE(s.events().size() == 1);
    const auto& e = s.events()[0];
    CHECK(e.task_id == 7);
    CHECK(e.model_id == 0);
    CHECK(std::all_of(e.spec.begin(), e.spec.end(), [](int c) { return c == 0; }));
    CHECK(e.timestamp_ms == kStart + 5000);
    CHECK(e.phase == Phase::DA);
  }

  TEST_CASE("failed tools leave no trace") {
    Fixture f;
    auto s = f.make();
    CHECK(error_of([&] { s.record_action(Phase::DA, "histogram", {{"variable", "Shoe size"}}); }) ==
          ErrorCode::UnknownVariable);
    CHECK(error_of([&] { s.record_action(Phase::DA, "juggle", json::object()); }) == ErrorCode::UnknownAction);
    CHECK(error_of([&] { s.record_action(Phase::DA, "bic", json::object()); }) == ErrorCode::UnknownAction);
    CHECK(s.events().empty());
  }

  TEST_CASE("model estimate event carries the spec") {
    Fixture f;
    auto s = f.make();
    f.clock->advance(1000);
    const auto mnl = spec::full_linear(Family::MNL);
    s.record_action(Phase::MS, "model", spec::to_json(mnl));
    const auto job = s.begin_estimation(mnl);
    CHECK(job.model_id == 1);
    REQUIRE(s.events().size() == 2);
    for (const auto& e : s.events()) {
      CHECK(e.phase == Phase::MS);
      CHECK(e.model_id == 1);
      CHECK(e.spec[0] == 1);
      CHECK(e.spec[1] == 1);
      for (int k = 0; k < 6; ++k) CHECK(e.spec[2 + k] == 1);
    }
    CHECK(s.model(1).status == ModelStatus::Pending);
    f.fit(s, job);
    CHECK(s.model(1).status == ModelStatus::Estimated);
    CHECK(s.telemetry()[1].status == "estimated");
    CHECK(s.telemetry()[1].bic.has_value());
    CHECK(s.telemetry()[0].status.empty());
  }

  TEST_CASE("invalid specs are client errors and not logged") {
    Fixture f;
    auto s = f.make();
    auto lc = spec::full_linear(Family::LC);
    lc.n_class = 4;
    try {
      s.begin_estimation(lc);
      FAIL("expected violations");
    } catch (const spec::InvalidSpecError& e) {
      CHECK(e.violations().front().constraint == std::string(spec::constraint::kMaxThreeClasses));
    }
    CHECK(s.events().empty());
    CHECK(s.models().empty());
    CHECK(error_of([&] { s.record_action(Phase::MS, "model", {{"model", 9}}); }) == ErrorCode::InvalidSpec);
  }

  TEST_CASE("cache hit returns identical estimates") {
    Fixture f;
    auto s = f.make();
    const auto mnl = spec::full_linear(Family::MNL);
    f.fit(s, s.begin_estimation(mnl));
    f.fit(s, s.begin_estimation(mnl));
    CHECK_FALSE(s.model(1).cached);
    CHECK(s.model(2).cached);
    CHECK(s.model(1).result->estimates == s.model(2).result->estimates);
    CHECK(f.repo->size() == 1);
  }

  TEST_CASE("collinear spec is misspecified but logged") {
    Fixture f;
    auto d = testing::small_dataset(200, 16);
    for (auto& row : d.rows) row.covariates[static_cast<std::size_t>(dataset::Covariate::Woman)] = 1.0;
    Session s("s", "u", "const", std::make_shared<const dataset::ChoiceDataset>(d), testing::quick_config(), f.clock);
    auto sp = spec::full_linear(Family::MNL);
    sp.at(Attribute::Noise).interaction = spec::Interaction::Woman;
    f.fit(s, s.begin_estimation(sp));
    CHECK(s.model(1).status == ModelStatus::Misspecified);
    CHECK(s.events().size() == 1);
    CHECK(s.telemetry()[0].status == "misspecified");
  }

  TEST_CASE("estimation faults on the data become misspecified entries") {
    Fixture f;
    auto d = testing::small_dataset(60, 5);
    d.rows[3].covariates[static_cast<std::size_t>(dataset::Covariate::Age)].reset();
    Session s("s", "u", "gaps", std::make_shared<const dataset::ChoiceDataset>(d), testing::quick_config(), f.clock);
    auto sp = spec::full_linear(Family::MNL);
    sp.at(Attribute::Cost).interaction = spec::Interaction::Age;
    f.fit(s, s.begin_estimation(sp));
    CHECK(s.model(1).status == ModelStatus::Misspecified);
    CHECK_FALSE(s.model(1).result);
    CHECK(s.model(1).message.find("IncompleteData") == 0);
    CHECK(error_of([&] { s.record_action(Phase::OI, "bic", {{"model_id", 1}}); }) == ErrorCode::UnknownModelId);
  }

  TEST_CASE("mixed logit request uses the configured draws") {
    Fixture f;
    auto cfg = testing::quick_config();
    cfg.estimation.draws = 250;
    Session s("s", "u", "default", shared_small(60, 11), cfg, f.clock);
    auto sp = spec::full_linear(Family::MMNL);
    sp.at(Attribute::Noise).distribution = spec::Distribution::Normal;
    f.fit(s, s.begin_estimation(sp));
    REQUIRE(s.model(1).result);
    CHECK(s.model(1).result->draws_used == 250);
  }

  TEST_CASE("reports") {
    Fixture f;
    auto s = f.make();
    for (int i = 0; i < 5; ++i) {
      auto sp = spec::full_linear(Family::MNL);
      if (i > 0) sp.at(static_cast<Attribute>(i - 1)).include = false;
      f.fit(s, s.begin_estimation(sp));
    }
    CHECK(error_of([&] { s.submit_report({3, 5}, "  \n"); }) == ErrorCode::EmptyReport);
    CHECK(error_of([&] { s.submit_report({3, 9}, "text"); }) == ErrorCode::UnknownModelId);
    CHECK(error_of([&] { s.submit_report({}, "text"); }) == ErrorCode::UnknownModelId);
    f.clock->advance(60000);
    s.submit_report({3, 5}, "Model 5 fits best.");
    CHECK(s.closed());
    CHECK(s.end_time_ms() == kStart + 60000);
    CHECK(s.report()->model_ids == std::vector<int>{3, 5});
    const auto& last = s.events().back();
    CHECK(last.phase == Phase::R);
    CHECK(last.r_models == std::vector<int>{3, 5});
    CHECK(last.reporting == "Model 5 fits best.");
    CHECK(error_of([&] { s.record_action(Phase::DA, "head", json::object()); }) == ErrorCode::SessionClosed);
    CHECK(error_of([&] { s.begin_estimation(spec::full_linear(Family::MNL)); }) == ErrorCode::SessionClosed);
    CHECK(error_of([&] { s.submit_report({3}, "again"); }) == ErrorCode::SessionClosed);
  }

  TEST_CASE("misspecified models cannot be reported") {
    Fixture f;
    auto d = testing::small_dataset(200, 16);
    for (auto& row : d.rows) row.covariates[static_cast<std::size_t>(dataset::Covariate::Woman)] = 1.0;
    Session s("s", "u", "const", std::make_shared<const dataset::ChoiceDataset>(d), testing::quick_config(), f.clock);
    auto sp = spec::full_linear(Family::MNL);
    sp.at(Attribute::Noise).interaction = spec::Interaction::Woman;
    f.fit(s, s.begin_estimation(sp));
    CHECK(error_of([&] { s.submit_report({1}, "text"); }) == ErrorCode::UnknownModelId);
  }

  TEST_CASE("soft time limit and monotone timestamps") {
    Fixture f;
    auto s = f.make();
    s.record_action(Phase::DA, "head", json::object());
    f.clock->advance(2700 * 1000);
    s.record_action(Phase::DA, "head", json::object());
    f.clock->advance(1);
    s.record_action(Phase::DA, "head", json::object());
    f.clock->advance(-50000);
    s.record_action(Phase::DA, "head", json::object());
    const auto& ev = s.events();
    CHECK_FALSE(ev[0].overtime);
    CHECK_FALSE(ev[1].overtime);
    CHECK(ev[2].overtime);
    CHECK(ev[3].timestamp_ms == ev[2].timestamp_ms);
    for (std::size_t i = 0; i < ev.size(); ++i) CHECK(ev[i].seq == static_cast<std::int64_t>(i + 1));
  }

  TEST_CASE("free phase order") {
    Fixture f;
    auto s = f.make();
    f.fit(s, s.begin_estimation(spec::full_linear(Family::MNL)));
    CHECK(s.phase() == Phase::MS);
    s.record_action(Phase::OI, "aic", {{"model_id", 1}});
    CHECK(s.phase() == Phase::OI);
    s.record_action(Phase::DA, "choice_shares", json::object());
    CHECK(s.phase() == Phase::DA);
    s.record_action(Phase::OI, "bic", {{"model_id", 1}});
    CHECK(s.phase() == Phase::OI);
  }

  TEST_CASE("data editing tools replace the working data") {
    Fixture f;
    dataset::SyntheticConfig cfg;
    cfg.n_individuals = 80;
    cfg.missing_rate = 0.05;
    cfg.true_params = {{"b_cost", -0.01}};
    Session s("s", "u", "gaps", std::make_shared<const dataset::ChoiceDataset>(dataset::generate_synthetic(cfg)),
              testing::quick_config(), f.clock);
    const auto before = s.data().rows.size();
    const auto job = s.begin_estimation(spec::full_linear(Family::MNL));
    const auto out = s.record_action(Phase::DA, "delete_missing", json::object());
    CHECK(out["rows_removed"].get<std::size_t>() > 0);
    CHECK(s.data().rows.size() < before);
    CHECK(job.data->rows.size() == before);  // dispatched snapshot untouched
    CHECK(dataset::is_complete(s.data()));
  }

  TEST_CASE("outcome tools agree with the fit metrics") {
    Fixture f;
    auto s = f.make();
    f.fit(s, s.begin_estimation(spec::full_linear(Family::MNL)));
    const auto m = post::fit_metrics(*s.model(1).result);
    CHECK(s.record_action(Phase::OI, "bic", {{"model_id", 1}})["bic"].get<double>() == m.bic);
    CHECK(s.record_action(Phase::OI, "rho2", {{"model_id", 1}})["rho2"].get<double>() == m.rho2);
    CHECK(s.record_action(Phase::OI, "sample_size", {{"model_id", 1}})["sample_size"] == 480);
    const auto lr = s.record_action(Phase::OI, "lr_test", {{"model_id", 1}});
    CHECK(lr["statistic"].get<double>() == doctest::Approx(2.0 * (m.ll_final - m.ll_null)));
    CHECK(lr["df"] == m.n_params);
    CHECK(lr["p_value"].get<double>() < 1e-6);
    const auto w = s.record_action(Phase::OI, "wtp", {{"model_id", 1}, {"attribute", "Noise"}});
    CHECK(w["wtp"].size() == 1);
    CHECK(w["wtp"][0]["attribute"] == "Noise");
    CHECK(s.record_action(Phase::OI, "n_outputs", json::object())["n_outputs"] == 1);
    CHECK(error_of([&] { s.record_action(Phase::OI, "bic", {{"model_id", 7}}); }) == ErrorCode::UnknownModelId);
    CHECK(error_of([&] { s.record_action(Phase::OI, "bic", json::object()); }) == ErrorCode::InvalidArgument);
    s.begin_estimation(spec::full_linear(Family::MNL, false));
    CHECK(error_of([&] { s.record_action(Phase::OI, "bic", {{"model_id", 2}}); }) == ErrorCode::ModelPending);
    CHECK(error_of([&] { s.record_action(Phase::OI, "compare", {{"model_ids", {1}}}); }) == ErrorCode::TooFewModels);
  }

  TEST_CASE("every registry entry has a matching MS event") {
    Fixture f;
    auto s = f.make();
    for (int i = 0; i < 3; ++i) {
      auto sp = spec::full_linear(Family::MNL);
      sp.at(Attribute::Stores).transform = static_cast<spec::Transform>(1 + i);
      s.record_action(Phase::MS, "t_1", spec::to_json(sp));
      f.fit(s, s.begin_estimation(sp));
      s.record_action(Phase::OI, "aic", {{"model_id", i + 1}});
    }
    for (const auto& m : s.models()) {
      const bool found = std::any_of(s.events().begin(), s.events().end(), [&](const TelemetryEvent& e) {
        return e.phase == Phase::MS && e.model_id == m.model_id && e.spec == spec_codes(m.spec);
      });
      CHECK(found);
    }
  }
}

TEST_SUITE("export") {
  TEST_CASE("empty session exports a header only") {
    Fixture f;
    auto s = f.make();
    const auto text = to_csv(s.telemetry());
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    CHECK(text.rfind("timestamp,user_id,task_id,model_id,model,ASC,att_1", 0) == 0);
    CHECK(to_jsonl(s.telemetry()).empty());
  }

  TEST_CASE("rows sorted by user then time") {
    Fixture f;
    auto a = f.make("zoe");
    auto b = f.make("adam");
    for (int i = 0; i < 3; ++i) {
      f.clock->advance(1000);
      a.record_action(Phase::DA, "head", json::object());
      f.clock->advance(1000);
      b.record_action(Phase::DA, "choice_shares", json::object());
    }
    auto events = a.telemetry();
    const auto more = b.telemetry();
    events.insert(events.end(), more.begin(), more.end());
    sort_for_export(events);
    REQUIRE(events.size() == 6);
    for (int i = 0; i < 3; ++i) CHECK(events[static_cast<std::size_t>(i)].user_id == "adam");
    for (std::size_t i = 1; i < events.size(); ++i)
      if (events[i].user_id == events[i - 1].user_id) CHECK(events[i].timestamp_ms >= events[i - 1].timestamp_ms);
  }

  TEST_CASE("CSV and JSON lines round trip") {
    Fixture f;
    auto s = f.make();
    s.record_action(Phase::DA, "summary_statistics", json::object());
    f.clock->advance(1234);
    auto sp = spec::full_linear(Family::MNL);
    sp.at(Attribute::Green).alt_specific = true;
    s.record_action(Phase::MS, "s_5", spec::to_json(sp));
    f.fit(s, s.begin_estimation(sp));
    f.clock->advance(777);
    s.submit_report({1}, "Green space, \"quoted\", and\na second line.");
    const auto events = s.telemetry();
    CHECK(parse_telemetry_csv(to_csv(events)) == events);
    CHECK(parse_telemetry_jsonl(to_jsonl(events)) == events);
  }

  TEST_CASE("schema mismatches") {
    CHECK(error_of([] { parse_telemetry_csv("timestamp,user_id\n"); }) == ErrorCode::SchemaMismatch);
    CHECK(error_of([] { parse_telemetry_jsonl("{\"timestamp\": 1}\n"); }) == ErrorCode::SchemaMismatch);
    CHECK(error_of([] { parse_telemetry_jsonl("not json\n"); }) == ErrorCode::SchemaMismatch);
    CHECK(error_of([] { parse_telemetry_csv(""); }) == ErrorCode::SchemaMismatch);
  }
}

TEST_SUITE("repository") {
  TEST_CASE("persists across instances") {
    testing::TempDir dir;
    const auto file = dir.path / "repo.jsonl";
    const auto data = shared_small(80, 4);
    const auto sp = spec::full_linear(Family::MNL);
    const auto key = repository_key(*data, sp, {});
    ResultPtr first;
    {
      ModelRepository repo(file);
      first = repo.get_or_compute(key, [&] { return est::estimate(sp, *data); }).first;
    }
    ModelRepository again(file);
    CHECK(again.size() == 1);
    const auto hit = again.find(key);
    REQUIRE(hit);
    CHECK(hit->estimates == first->estimates);
    CHECK(hit->hessian == first->hessian);
  }

  TEST_CASE("keys separate data, spec and options") {
    const auto a = shared_small(40, 1);
    const auto b = shared_small(40, 2);
    const auto sp = spec::full_linear(Family::MNL);
    est::EstimationOptions o;
    auto o2 = o;
    o2.draws = 100;
    CHECK(repository_key(*a, sp, o) != repository_key(*b, sp, o));
    CHECK(repository_key(*a, sp, o) != repository_key(*a, spec::full_linear(Family::MNL, false), o));
    CHECK(repository_key(*a, sp, o) != repository_key(*a, sp, o2));
    auto noisy = sp;
    noisy.n_class = 3;  // ignored outside latent class
    CHECK(repository_key(*a, sp, o) == repository_key(*a, noisy, o));
  }

  TEST_CASE("concurrent requests compute once") {
    ModelRepository repo;
    std::atomic<int> calls{0};
    std::vector<std::jthread> threads;
    std::vector<ResultPtr> seen(4);
    for (int t = 0; t < 4; ++t)
      threads.emplace_back([&, t] {
        seen[static_cast<std::size_t>(t)] = repo.get_or_compute("k", [&] {
          ++calls;
          std::this_thread::sleep_for(std::chrono::milliseconds(50));
          est::EstimationResult r;
          r.ll_final = -1.0;
          return r;
        }).first;
      });
    threads.clear();
    CHECK(calls == 1);
    for (const auto& r : seen) CHECK(r == seen[0]);
  }

  TEST_CASE("failed computations are not stored") {
    ModelRepository repo;
    CHECK_THROWS_AS(repo.get_or_compute("k", []() -> est::EstimationResult { fail(ErrorCode::IncompleteData, "x"); }),
                    Error);
    CHECK(repo.size() == 0);
  }
}

TEST_SUITE("manager") {
  ManagerOptions options(std::shared_ptr<Clock> clock, std::optional<std::filesystem::path> journal = {}) {
    ManagerOptions o;
    o.session = testing::quick_config();
    o.workers = 2;
    o.clock = std::move(clock);
    o.journal_dir = std::move(journal);
    return o;
  }

  TEST_CASE("sessions are independent") {
    SessionManager m(options(std::make_shared<ManualClock>(kStart)), nullptr);
    m.add_dataset("default", shared_small());
    const auto a = m.create_session("u", "default");
    const auto b = m.create_session("u", "default");
    CHECK(a != b);
    CHECK(error_of([&] { m.create_session("u", "nope"); }) == ErrorCode::UnknownDataset);
    CHECK(error_of([&] { m.summary("missing"); }) == ErrorCode::UnknownSession);
    m.record_action(a, Phase::DA, "head", json::object());
    CHECK(m.summary(a)["n_events"] == 1);
    CHECK(m.summary(b)["n_events"] == 0);
  }

  TEST_CASE("slow estimations report pending, then finish") {
    auto o = options(std::make_shared<ManualClock>(kStart));
    o.pending_threshold = std::chrono::milliseconds(0);
    SessionManager m(o, nullptr);
    m.add_dataset("default", shared_small());
    const auto id = m.create_session("u", "default");
    auto lc = spec::full_linear(Family::LC);
    const auto t = m.request_estimation(id, lc);
    CHECK(t.model_id == 1);
    m.wait_idle();
    CHECK(m.models(id)[0].status != ModelStatus::Pending);
    const auto again = m.request_estimation(id, lc);
    CHECK(again.cached);
    CHECK(again.status == m.models(id)[0].status);
  }

  TEST_CASE("idempotency keys prevent duplicate entries") {
    SessionManager m(options(std::make_shared<ManualClock>(kStart)), nullptr);
    m.add_dataset("default", shared_small());
    const auto id = m.create_session("u", "default");
    const auto sp = spec::full_linear(Family::MNL);
    const auto first = m.request_estimation(id, sp, "req-1");
    const auto retry = m.request_estimation(id, sp, "req-1");
    CHECK(first.model_id == retry.model_id);
    CHECK(m.models(id).size() == 1);
    CHECK(m.export_telemetry(id).size() == 1);
  }

  TEST_CASE("journal replay restores sessions") {
    testing::TempDir dir;
    auto clock = std::make_shared<ManualClock>(kStart);
    const auto data = shared_small();
    std::string id;
    std::vector<TelemetryEvent> before;
    std::vector<ModelEntry> models;
    {
      SessionManager m(options(clock, dir.path), nullptr);
      m.add_dataset("default", data);
      id = testing::play_scripted_session(m, *clock, "player-7", "default");
      m.create_session("other", "default");
      m.wait_idle();
      before = m.export_telemetry();
      models = m.models(id);
    }
    SessionManager restored(options(clock, dir.path), nullptr);
    restored.add_dataset("default", data);
    CHECK(restored.recover() == 2);
    restored.wait_idle();
    CHECK(restored.export_telemetry() == before);
    const auto after = restored.models(id);
    REQUIRE(after.size() == models.size());
    for (std::size_t i = 0; i < after.size(); ++i) CHECK(same_outcome(after[i], models[i]));
    CHECK(error_of([&] { restored.record_action(id, Phase::DA, "head", json::object()); }) ==
          ErrorCode::SessionClosed);
  }

  TEST_CASE("scripted session has fifty events") {
    auto clock = std::make_shared<ManualClock>(kStart);
    SessionManager m(options(clock), nullptr);
    m.add_dataset("default", shared_small());
    const auto id = testing::play_scripted_session(m, *clock, "p", "default");
    const auto events = m.export_telemetry(id);
    CHECK(events.size() == 50);
    std::set<Phase> phases;
    for (const auto& e : events) phases.insert(e.phase);
    CHECK(phases.size() == 4);
  }
}

TEST_SUITE("precompute") {
  TEST_CASE("enumeration covers the valid mixed and latent class space once") {
    const auto specs = precompute_specs();
    CHECK(specs.size() == 6 * 2 + 15 * 4 + 2 * 64);
    std::set<std::string> keys;
    for (const auto& s : specs) {
      CHECK(spec::validate_spec(s).empty());
      CHECK(s.family != Family::MNL);
      keys.insert(spec::canonical_key(s));
    }
    CHECK(keys.size() == specs.size());
  }

  TEST_CASE("fills the repository and skips known entries") {
    Fixture f;
    const auto all = precompute_specs();
    const std::vector<spec::ModelSpecification> some = {all.front(), all.back()};
    auto opts = testing::quick_config().estimation;
    std::size_t calls = 0;
    const auto first = precompute(some, *f.data, opts, *f.repo, 1, [&](std::size_t n) { calls = n; });
    CHECK(first.estimated + first.failed == 2);
    CHECK(calls == 2);
    CHECK(f.repo->size() == first.estimated);
    const auto again = precompute(some, *f.data, opts, *f.repo, 1);
    CHECK(again.cached == first.estimated);
    CHECK(again.estimated == 0);
  }
}
