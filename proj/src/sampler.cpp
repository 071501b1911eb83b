#include "dsi/sampler.hpp"

#include "dsi/errors.hpp"

#include <bit>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dsi {

std::uint64_t BitVector::popcount() const noexcept {
    std::uint64_t total = 0;
    for (auto w : words_) total += static_cast<std::uint64_t>(std::popcount(w));
    return total;
}

Sampler::Job::Job(std::uint64_t n, std::uint64_t seed, std::uint64_t stream)
    : pending(n), pending_pos(n), rng(seed, stream) {
    state.seen = BitVector(n);
    std::iota(pending.begin(), pending.end(), SampleId{0});
    std::iota(pending_pos.begin(), pending_pos.end(), std::uint32_t{0});
}

Sampler::Sampler(TieredCache cache, std::uint64_t seed)
    : cache_(std::move(cache)),
      n_total_(cache_.n_total()),
      seed_(seed),
      maintenance_rng_(seed, 0),
      scratch_(n_total_) {}

JobId Sampler::register_job() {
    std::lock_guard lock(mutex_);
    if (jobs_.size() >= max_jobs()) {
        throw std::length_error("at most " + std::to_string(max_jobs()) + " jobs per dataset");
    }
    const auto id = static_cast<JobId>(jobs_.size());
    jobs_.push_back(std::make_unique<Job>(n_total_, seed_, std::uint64_t{id} + 1));
    on_membership_change();
    return id;
}

void Sampler::deregister_job(JobId job) {
    std::lock_guard lock(mutex_);
    job_ref(job).active = false;
    on_membership_change();
}

Sampler::Job& Sampler::job_ref(JobId job) {
    if (job >= jobs_.size() || !jobs_[job]->active) {
        throw std::invalid_argument("unknown job " + std::to_string(job));
    }
    return *jobs_[job];
}

const Sampler::Job& Sampler::job_ref(JobId job) const {
    if (job >= jobs_.size() || !jobs_[job]->active) {
        throw std::invalid_argument("unknown job " + std::to_string(job));
    }
    return *jobs_[job];
}

bool Sampler::any_job_mid_epoch() const {
    for (const auto& j : jobs_) {
        if (j->active && j->state.consumed_count > 0) return true;
    }
    return false;
}

std::uint32_t Sampler::active_jobs() const {
    std::lock_guard lock(mutex_);
    std::uint32_t count = 0;
    for (const auto& j : jobs_) count += j->active ? 1 : 0;
    return count;
}

JobEpochState Sampler::job_state(JobId job) const {
    std::lock_guard lock(mutex_);
    return job_ref(job).state;
}

std::vector<SampleId> Sampler::next_request(JobId job, std::size_t batch_size) {
    std::lock_guard lock(mutex_);
    auto& j = job_ref(job);
    const std::size_t count = std::min<std::size_t>(batch_size, j.pending.size());
    // partial Fisher-Yates over the front of the pending pool
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = i + static_cast<std::size_t>(j.rng.below(j.pending.size() - i));
        std::swap(j.pending[i], j.pending[k]);
        j.pending_pos[j.pending[i]] = static_cast<std::uint32_t>(i);
        j.pending_pos[j.pending[k]] = static_cast<std::uint32_t>(k);
    }
    return {j.pending.begin(), j.pending.begin() + static_cast<std::ptrdiff_t>(count)};
}

BatchResponse Sampler::request_batch(JobId job, std::span<const SampleId> requested) {
    std::lock_guard lock(mutex_);
    auto& j = job_ref(job);

    std::size_t checked = 0;
    auto unmark = [&] {
        for (std::size_t i = 0; i < checked; ++i) scratch_.reset(requested[i]);
    };
    for (; checked < requested.size(); ++checked) {
        const SampleId id = requested[checked];
        std::string problem;
        if (id >= n_total_) {
            problem = "sample " + std::to_string(id) + " out of range";
        } else if (j.state.seen.test(id)) {
            problem = "sample " + std::to_string(id) + " already seen by job " + std::to_string(job) + " this epoch";
        } else if (scratch_.test(id)) {
            problem = "sample " + std::to_string(id) + " requested twice in one batch";
        }
        if (!problem.empty()) {
            unmark();
            throw ProtocolViolation(problem);
        }
        scratch_.set(id);
    }
    unmark();

    BatchResponse response = serve(job, requested);
    if (response.samples.size() != requested.size()) {
        throw std::logic_error("sampler returned a batch of the wrong size");
    }
    response.job = job;
    return response;
}

std::vector<SampleId> Sampler::maintain() {
    std::lock_guard lock(mutex_);
    return do_maintain();
}

void Sampler::end_epoch(JobId job) {
    std::lock_guard lock(mutex_);
    auto& j = job_ref(job);
    if (j.state.consumed_count != n_total_) {
        throw InvalidState("job " + std::to_string(job) + " has consumed " + std::to_string(j.state.consumed_count) +
                           " of " + std::to_string(n_total_) + " samples this epoch");
    }
    j.state.seen.clear();
    j.state.consumed_count = 0;
    ++j.state.epoch_index;
    j.pending.resize(n_total_);
    std::iota(j.pending.begin(), j.pending.end(), SampleId{0});
    std::iota(j.pending_pos.begin(), j.pending_pos.end(), std::uint32_t{0});
    on_membership_change();
}

void Sampler::mark_served(JobId job, SampleId id) {
    auto& j = *jobs_[job];
    j.state.seen.set(id);
    ++j.state.consumed_count;

    const std::uint32_t slot = j.pending_pos[id];
    const SampleId last = j.pending.back();
    j.pending[slot] = last;
    j.pending_pos[last] = slot;
    j.pending.pop_back();
}

Tier Sampler::admit_fetched(SampleId id) {
    for (Tier tier : kCacheTiers) {
        if (cache_.has_room(tier) && cache_.admit(id, tier)) return tier;
    }
    return Tier::storage;
}

std::uint64_t metadata_bytes(std::uint64_t n_total, std::uint64_t jobs) {
    if (n_total == 0) throw std::invalid_argument("n_total must be >= 1");
    return jobs * ((n_total + 7) / 8) + n_total;
}

}  // namespace dsi
