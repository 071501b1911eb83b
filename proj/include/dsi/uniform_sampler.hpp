#pragma once

#include "dsi/sampler.hpp"

namespace dsi {

/// Baseline: serves exactly what was requested. Fetched samples fill free cache slots
/// and are never evicted afterwards.
class UniformSampler final : public Sampler {
public:
    using Sampler::Sampler;

private:
    BatchResponse serve(JobId job, std::span<const SampleId> requested) override;
};

}  // namespace dsi
