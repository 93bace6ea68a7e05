#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "session/repository.hpp"

namespace dcmsg::session {

// Every valid mixed logit (one or two random attributes, normal or
// lognormal, no interactions) and latent class (2 or 3 classes, any subset of
// membership covariates) specification.
std::vector<spec::ModelSpecification> precompute_specs();

struct PrecomputeStats {
  std::size_t estimated = 0;
  std::size_t cached = 0;  // already in the repository
  std::size_t failed = 0;
};

// Fits `specs` into `repo`, `workers` at a time (0 = hardware threads).
// `progress` is called after each spec with the number done so far.
PrecomputeStats precompute(const std::vector<spec::ModelSpecification>& specs, const dataset::ChoiceDataset& data,
                           const est::EstimationOptions& options, ModelRepository& repo, unsigned workers = 0,
                           const std::function<void(std::size_t)>& progress = {});

}  // namespace dcmsg::session
