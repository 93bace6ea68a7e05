#include "session/precompute.hpp"

#include <mutex>

#include "common/errors.hpp"
#include "common/worker_pool.hpp"

namespace dcmsg::session {

using spec::Distribution;
using spec::Family;
using spec::ModelSpecification;

std::vector<ModelSpecification> precompute_specs() {
  std::vector<ModelSpecification> out;
  constexpr Distribution kDists[] = {Distribution::Normal, Distribution::Lognormal};
  const std::size_t n = spec::kNumAttributes;

  for (std::size_t i = 0; i < n; ++i) {
    for (auto di : kDists) {
      auto s = spec::full_linear(Family::MMNL);
      s.attributes[i].distribution = di;
      out.push_back(s);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (auto di : kDists) {
        for (auto dj : kDists) {
          auto s = spec::full_linear(Family::MMNL);
          s.attributes[i].distribution = di;
          s.attributes[j].distribution = dj;
          out.push_back(s);
        }
      }
    }
  }
  for (int classes = 2; classes <= 3; ++classes) {
    for (unsigned mask = 0; mask < (1u << spec::kNumMembershipCovariates); ++mask) {
      auto s = spec::full_linear(Family::LC);
      s.n_class = classes;
      for (std::size_t c = 0; c < spec::kNumMembershipCovariates; ++c) s.covariates[c] = (mask >> c) & 1u;
      out.push_back(s);
    }
  }
  return out;
}

PrecomputeStats precompute(const std::vector<ModelSpecification>& specs, const dataset::ChoiceDataset& data,
                           const est::EstimationOptions& options, ModelRepository& repo, unsigned workers,
                           const std::function<void(std::size_t)>& progress) {
  PrecomputeStats stats;
  std::mutex mutex;
  std::size_t done = 0;
  {
    WorkerPool pool(workers);
    for (const auto& s : specs) {
      pool.submit([&, s] {
        bool hit = false, ok = true;
        try {
          hit = repo.get_or_compute(repository_key(data, s, options), [&] { return est::estimate(s, data, options); })
                    .second;
        } catch (const Error&) {
          ok = false;
        }
        std::lock_guard lock(mutex);
        if (!ok) ++stats.failed;
        else if (hit) ++stats.cached;
        else ++stats.estimated;
        if (progress) progress(++done);
      });
    }
    pool.wait_idle();
  }
  return stats;
}

}  // namespace dcmsg::session
