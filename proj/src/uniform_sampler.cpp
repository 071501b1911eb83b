#include "dsi/uniform_sampler.hpp"

namespace dsi {

BatchResponse UniformSampler::serve(JobId job, std::span<const SampleId> requested) {
    BatchResponse response;
    response.samples.reserve(requested.size());
    for (SampleId id : requested) {
        const Tier tier = cache_.lookup(id);
        mark_served(job, id);
        response.samples.push_back({id, tier, 0, false});
        if (tier == Tier::storage) admit_fetched(id);
    }
    return response;
}

}  // namespace dsi
