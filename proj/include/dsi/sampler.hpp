/**
 * @file sampler.hpp
 * @brief Shared machinery for multi-job batch samplers over a TieredCache.
 *
 * Every registered job walks the dataset once per epoch. The base class owns
 * the per-job `seen` bit-vector, the pool of samples not yet delivered this
 * epoch, and the seeded request stream drawn from that pool. Subclasses decide
 * what a batch request is answered with.
 *
 * All public members serialize on one mutex, so batch requests from several
 * threads are applied atomically one after another.
 */
#pragma once

#include "dsi/rng.hpp"
#include "dsi/tiered_cache.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace dsi {

using JobId = std::uint32_t;

class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::uint64_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    bool test(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::uint64_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::uint64_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void clear() noexcept { std::fill(words_.begin(), words_.end(), 0); }
    std::uint64_t size() const noexcept { return bits_; }
    std::uint64_t popcount() const noexcept;

private:
    std::uint64_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

struct JobEpochState {
    BitVector seen;
    std::uint64_t consumed_count = 0;
    std::uint32_t epoch_index = 0;
};

struct ServedSample {
    SampleId id = 0;
    Tier tier = Tier::storage;   ///< where the delivered sample came from
    std::uint32_t generation = 0;  ///< augmented entries only: which cached copy was served
    bool replaced = false;         ///< true if this sample stood in for a requested miss
};

struct BatchResponse {
    JobId job = 0;
    std::vector<ServedSample> samples;
};

class Sampler {
public:
    Sampler(TieredCache cache, std::uint64_t seed);
    virtual ~Sampler() = default;

    Sampler(const Sampler&) = delete;
    Sampler& operator=(const Sampler&) = delete;

    JobId register_job();
    void deregister_job(JobId job);

    /// Next `batch_size` ids (fewer at the end of an epoch) drawn uniformly without
    /// replacement from the samples `job` has not yet been delivered this epoch.
    std::vector<SampleId> next_request(JobId job, std::size_t batch_size);

    /// Answers a batch request. `requested` must be distinct and unseen by `job` this epoch.
    /// Throws std::invalid_argument for an unknown job, ProtocolViolation otherwise.
    BatchResponse request_batch(JobId job, std::span<const SampleId> requested);

    /// Batch-boundary maintenance. Returns the evicted sample ids.
    std::vector<SampleId> maintain();

    /// Clears `job`'s seen bits. Throws InvalidState unless the epoch was fully consumed.
    void end_epoch(JobId job);

    /// Snapshot copy; the live state may change as soon as the lock is released.
    JobEpochState job_state(JobId job) const;
    std::uint32_t active_jobs() const;
    std::uint64_t n_total() const noexcept { return n_total_; }

    /// Unsynchronized view for single-threaded drivers and tests.
    const TieredCache& cache() const noexcept { return cache_; }

protected:
    struct Job {
        JobEpochState state;
        std::vector<SampleId> pending;  // undelivered this epoch
        std::vector<std::uint32_t> pending_pos;
        Rng rng;
        bool active = true;

        Job(std::uint64_t n, std::uint64_t seed, std::uint64_t stream);
    };

    virtual BatchResponse serve(JobId job, std::span<const SampleId> requested) = 0;
    virtual std::vector<SampleId> do_maintain() { return {}; }
    /// Called under the lock whenever the registered job set changes or an epoch ends.
    virtual void on_membership_change() {}
    virtual std::size_t max_jobs() const { return SIZE_MAX; }

    /// Records delivery of `id` to `job`: sets the seen bit and drops it from the pending pool.
    void mark_served(JobId job, SampleId id);
    /// Greedy admission of a sample just fetched from storage: first tier with room, in readiness order.
    Tier admit_fetched(SampleId id);

    Job& job_ref(JobId job);
    const Job& job_ref(JobId job) const;
    bool any_job_mid_epoch() const;

    TieredCache cache_;
    std::uint64_t n_total_;
    std::uint64_t seed_;
    std::vector<std::unique_ptr<Job>> jobs_;
    Rng maintenance_rng_;
    BitVector scratch_;  // per-call distinctness marks, always left cleared

private:
    mutable std::mutex mutex_;
};

/// Bytes of sampling metadata: one seen bit per sample per job plus one status/refcount byte per sample.
std::uint64_t metadata_bytes(std::uint64_t n_total, std::uint64_t jobs);

}  // namespace dsi
