/**
 * @file ods_sampler.hpp
 * @brief Opportunistic sampling: serve cached, unseen samples in place of requested misses.
 *
 * Per batch request:
 *  1. requested ids are split into hits and misses by their cache status;
 *  2. each miss is replaced by a cached sample the job has not seen this epoch,
 *     trying the augmented, decoded and encoded tiers in that order and picking
 *     uniformly within a tier; misses with no candidate are fetched from storage;
 *  3. every augmented entry served gets its reference count bumped;
 *  4. seen bits are set for everything delivered.
 * At batch boundaries maintain() evicts augmented entries whose reference count
 * reached the threshold and refills the freed slots with random storage-resident
 * samples (fresh entries, count zero). Decoded and encoded entries are never
 * reference-counted.
 *
 * The threshold defaults to the number of registered jobs. Changes in job count
 * take effect at the next epoch boundary.
 */
#pragma once

#include "dsi/sampler.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace dsi {

/// Per-sample dataset metadata, packed into one byte: two status bits, six reference-count bits.
class SampleState {
public:
    static constexpr std::uint32_t kMaxReferenceCount = 63;

    SampleState() = default;
    SampleState(Tier status, std::uint32_t reference_count);

    Tier status() const noexcept { return static_cast<Tier>(packed_ & 0x3u); }
    std::uint32_t reference_count() const noexcept { return packed_ >> 2; }
    std::uint8_t packed() const noexcept { return packed_; }

private:
    std::uint8_t packed_ = static_cast<std::uint8_t>(Tier::storage);
};

struct OdsOptions {
    /// 0 means "number of registered jobs".
    std::uint32_t eviction_threshold = 0;
};

class OdsSampler final : public Sampler {
public:
    static constexpr std::uint32_t kMaxJobs = SampleState::kMaxReferenceCount;

    OdsSampler(TieredCache cache, std::uint64_t seed, OdsOptions options = {});

    SampleState state(SampleId id) const { return state_.at(id); }
    std::uint32_t threshold() const noexcept { return threshold_; }
    std::uint64_t refills() const noexcept { return refills_; }

    /// Generation of the augmented entry currently cached for `id` (bumped on every admission).
    std::uint32_t generation(SampleId id) const { return generation_.at(id); }

private:
    BatchResponse serve(JobId job, std::span<const SampleId> requested) override;
    std::vector<SampleId> do_maintain() override;
    void on_membership_change() override;
    std::size_t max_jobs() const override { return kMaxJobs; }

    bool usable(JobId job, SampleId id, Tier tier) const;
    std::optional<SampleId> pick_replacement(JobId job, Tier tier);
    /// Records a new member of `tier` in every job's candidate pool.
    void note_admission(SampleId id, Tier tier);
    /// Rebuilds `job`'s candidate pools if it has started a new epoch since they were built.
    void refresh_pools(JobId job);
    void deliver_cached(JobId job, SampleId id, Tier tier, bool replaced, ServedSample& out);
    void admit_augmented(SampleId id, std::uint32_t reference_count, std::uint64_t served_mask);
    void set_status(SampleId id, Tier tier, std::uint32_t reference_count);

    OdsOptions options_;
    std::uint32_t threshold_ = 1;
    std::vector<SampleState> state_;
    // Jobs each augmented entry has been delivered to. Reference counts track its popcount; the
    // mask keeps an entry that outlives an epoch from being served to the same job again.
    std::vector<std::uint64_t> served_mask_;
    std::vector<std::uint32_t> generation_;
    std::uint64_t refills_ = 0;

    // Per job and cache tier: ids that may still be servable this epoch. Entries go stale when
    // served or evicted and are dropped when drawn, so a draw is uniform over the valid ones.
    struct CandidatePool {
        std::vector<SampleId> ids;
        BitVector listed;
    };
    struct JobPools {
        std::uint32_t epoch_index = UINT32_MAX;
        std::array<CandidatePool, 3> tiers;
    };
    std::vector<JobPools> pools_;

    // Augmented entries that reached the threshold since the last maintain().
    std::vector<SampleId> due_;
    bool rescan_due_ = false;  // threshold changed: find due entries by scanning the tier
};

}  // namespace dsi
