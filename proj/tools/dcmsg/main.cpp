// dcmsg command line: service, data generation, repository precompute,
// workflow analysis and journal replay. Links only the C API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dcmsg/dcmsg.h"

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct Failure {
  dcm_status status;
  std::string message;
};

void check(dcm_status s) {
  if (s != DCM_OK) throw Failure{s, dcm_last_error()};
}

// Owns a string returned by the library.
std::string take(char* s) {
  std::unique_ptr<char, decltype(&dcm_string_free)> guard(s, dcm_string_free);
  return s ? std::string(s) : std::string();
}

struct DatasetHandle {
  dcm_dataset* ptr = nullptr;
  ~DatasetHandle() { dcm_dataset_free(ptr); }
};

// --data PATH, or the synthetic default for --seed.
void open_dataset(DatasetHandle& h, const std::string& path, long long seed) {
  if (!path.empty()) check(dcm_dataset_load(path.c_str(), &h.ptr));
  else check(dcm_dataset_generate(("{\"seed\":" + std::to_string(seed) + "}").c_str(), &h.ptr));
}

std::string options_json(std::size_t draws, int starts, long long seed, unsigned threads) {
  return "{\"draws\":" + std::to_string(draws) + ",\"n_starts\":" + std::to_string(starts) +
         ",\"seed\":" + std::to_string(seed) + ",\"threads\":" + std::to_string(threads) + "}";
}

int serve(const std::string& config, int port) {
  dcm_service* s = nullptr;
  check(dcm_service_create(config.empty() ? nullptr : config.c_str(), &s));
  std::unique_ptr<dcm_service, decltype(&dcm_service_free)> owner(s, dcm_service_free);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // worker threads inherit the mask

  int bound = 0;
  check(dcm_service_bind(s, port, &bound));
  check(dcm_service_start(s));
  std::cout << "listening on port " << bound << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  check(dcm_service_stop(s));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete choice modelling game: service and tools"};
  app.require_subcommand(1);

  std::string config;
  int port = -1;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", config, "Key-value config file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "Override the configured port (0 = any free port)")->check(CLI::Range(0, 65535));

  long long seed = 1;
  std::size_t individuals = 2430, tasks = 4;
  double missing_rate = 0.0;
  std::string out;
  auto* gen = app.add_subcommand("generate-data", "Write a synthetic choice dataset");
  gen->add_option("--seed", seed, "Random seed")->check(CLI::PositiveNumber);
  gen->add_option("--individuals", individuals, "Number of respondents")->check(CLI::PositiveNumber);
  gen->add_option("--tasks", tasks, "Choice tasks per respondent")->check(CLI::PositiveNumber);
  gen->add_option("--missing-rate", missing_rate, "Share of blanked attribute cells")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", out, "Output CSV")->required();

  std::string data_path, repository;
  std::size_t draws = 250, limit = 0;
  int starts = 5;
  unsigned workers = 0;
  auto* pre = app.add_subcommand("precompute", "Fit every valid mixed logit and latent class model");
  pre->add_option("--data", data_path, "Dataset CSV (default: synthetic data for --seed)")->check(CLI::ExistingFile);
  pre->add_option("--seed", seed, "Dataset and estimation seed")->check(CLI::PositiveNumber);
  pre->add_option("--repository", repository, "Repository file to fill")->required();
  pre->add_option("--draws", draws, "Mixed logit draws")->check(CLI::PositiveNumber);
  pre->add_option("--starts", starts, "Latent class starts")->check(CLI::PositiveNumber);
  pre->add_option("--workers", workers, "Parallel fits (0 = all cores)");
  pre->add_option("--limit", limit, "Fit only the first N specifications");

  std::string export_path, rule = "bic", level = "phase";
  double min_support = 0.7, alpha = 0.05;
  std::size_t max_len = 6;
  auto* ana = app.add_subcommand("analyze", "Workflow analysis of a telemetry export");
  ana->add_option("--export", export_path, "Telemetry export (.csv or .jsonl)")->required()->check(CLI::ExistingFile);
  ana->add_option("--min-support", min_support, "Pattern support threshold")->check(CLI::Range(0.0, 1.0));
  ana->add_option("--max-len", max_len, "Longest pattern")->check(CLI::PositiveNumber);
  ana->add_option("--rule", rule, "Improvement metric")->check(CLI::IsMember({"bic", "aic", "ll", "rho2"}));
  ana->add_option("--level", level, "Pattern symbols")->check(CLI::IsMember({"phase", "action"}));
  ana->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  ana->add_option("--out", out, "Report directory")->required();

  std::string journal;
  auto* rep = app.add_subcommand("replay", "Rebuild a session from its journal");
  rep->add_option("--journal", journal, "Session journal (.jsonl)")->required()->check(CLI::ExistingFile);
  rep->add_option("--data", data_path, "Dataset CSV (default: synthetic data for --seed)")->check(CLI::ExistingFile);
  rep->add_option("--seed", seed, "Seed of the synthetic dataset")->check(CLI::PositiveNumber);
  rep->add_option("--repository", repository, "Repository of fitted models");
  rep->add_option("--out", out, "Write the rebuilt state here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*serve_cmd) return serve(config, port);

    if (*gen) {
      const std::string cfg = "{\"seed\":" + std::to_string(seed) + ",\"n_individuals\":" + std::to_string(individuals) +
                              ",\"n_tasks\":" + std::to_string(tasks) +
                              ",\"missing_rate\":" + std::to_string(missing_rate) + "}";
      DatasetHandle d;
      check(dcm_dataset_generate(cfg.c_str(), &d.ptr));
      check(dcm_dataset_save(d.ptr, out.c_str()));
      char* info = nullptr;
      check(dcm_dataset_describe(d.ptr, &info));
      std::cout << take(info) << "\n";
      return 0;
    }

    if (*pre) {
      DatasetHandle d;
      open_dataset(d, data_path, seed);
      char* stats = nullptr;
      check(dcm_precompute(d.ptr, options_json(draws, starts, seed, 1).c_str(), repository.c_str(), workers, limit,
                           &stats));
      std::cout << take(stats) << "\n";
      return 0;
    }

    if (*ana) {
      const std::string opts = "{\"min_support\":" + std::to_string(min_support) + ",\"max_len\":" +
                               std::to_string(max_len) + ",\"rule\":\"" + rule + "\",\"level\":\"" + level +
                               "\",\"alpha\":" + std::to_string(alpha) + "}";
      char* summary = nullptr;
      check(dcm_analyze(export_path.c_str(), opts.c_str(), out.c_str(), &summary));
      std::cout << take(summary) << "\n";
      return 0;
    }

    if (*rep) {
      DatasetHandle d;
      open_dataset(d, data_path, seed);
      char* state = nullptr;
      check(dcm_replay_journal(journal.c_str(), d.ptr, repository.empty() ? nullptr : repository.c_str(), &state));
      const std::string text = take(state);
      if (out.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream f(out);
        if (!(f << text << "\n")) throw Failure{DCM_IO, "cannot write " + out};
      }
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << dcm_status_name(f.status) << ": " << f.message << "\n";
    return kRuntime;
  }
  return kUsage;
}
