#include "dsi/ods_sampler.hpp"

#include <stdexcept>
#include <string>

namespace dsi {

namespace {

std::uint64_t job_bit(JobId job) { return std::uint64_t{1} << job; }

}  // namespace

SampleState::SampleState(Tier status, std::uint32_t reference_count) {
    if (reference_count > kMaxReferenceCount) throw std::out_of_range("reference count does not fit in six bits");
    packed_ = static_cast<std::uint8_t>((reference_count << 2) | static_cast<std::uint32_t>(status));
}

OdsSampler::OdsSampler(TieredCache cache, std::uint64_t seed, OdsOptions options)
    : Sampler(std::move(cache), seed),
      options_(options),
      state_(n_total_),
      served_mask_(n_total_, 0),
      generation_(n_total_, 0) {
    if (options_.eviction_threshold > SampleState::kMaxReferenceCount) {
        throw std::invalid_argument("eviction threshold above " + std::to_string(SampleState::kMaxReferenceCount));
    }
    if (cache_.cached_count() != 0) throw std::invalid_argument("sampler expects an empty cache");
}

void OdsSampler::on_membership_change() {
    std::uint32_t active = 0;
    for (const auto& j : jobs_) active += j->active ? 1 : 0;
    // A new threshold only lands when no job is partway through an epoch.
    if (!any_job_mid_epoch()) {
        const std::uint32_t next =
            options_.eviction_threshold != 0 ? options_.eviction_threshold : std::max<std::uint32_t>(active, 1);
        if (next != threshold_) rescan_due_ = true;
        threshold_ = next;
    }
}

void OdsSampler::set_status(SampleId id, Tier tier, std::uint32_t reference_count) {
    state_[id] = SampleState(tier, reference_count);
}

bool OdsSampler::usable(JobId job, SampleId id, Tier tier) const {
    if (jobs_[job]->state.seen.test(id)) return false;
    return tier != Tier::augmented || (served_mask_[id] & job_bit(job)) == 0;
}

void OdsSampler::admit_augmented(SampleId id, std::uint32_t reference_count, std::uint64_t served_mask) {
    served_mask_[id] = served_mask;
    ++generation_[id];
    set_status(id, Tier::augmented, reference_count);
    if (reference_count >= threshold_) due_.push_back(id);
}

void OdsSampler::deliver_cached(JobId job, SampleId id, Tier tier, bool replaced, ServedSample& out) {
    mark_served(job, id);
    if (tier == Tier::augmented) {
        served_mask_[id] |= job_bit(job);
        const std::uint32_t count = state_[id].reference_count() + 1;
        set_status(id, tier, count);
        if (count == threshold_) due_.push_back(id);
    }
    out = {id, tier, tier == Tier::augmented ? generation_[id] : 0, replaced};
}

void OdsSampler::refresh_pools(JobId job) {
    if (pools_.size() <= job) pools_.resize(job + 1);
    auto& pools = pools_[job];
    const std::uint32_t epoch = jobs_[job]->state.epoch_index;
    if (pools.epoch_index == epoch) return;
    pools.epoch_index = epoch;
    for (Tier tier : kCacheTiers) {
        auto& pool = pools.tiers[static_cast<std::size_t>(tier)];
        if (pool.listed.size() != n_total_) pool.listed = BitVector(n_total_);
        pool.listed.clear();
        pool.ids.clear();
        for (SampleId id : cache_.members(tier)) {
            pool.ids.push_back(id);
            pool.listed.set(id);
        }
    }
}

void OdsSampler::note_admission(SampleId id, Tier tier) {
    for (auto& pools : pools_) {
        if (pools.epoch_index == UINT32_MAX) continue;
        auto& pool = pools.tiers[static_cast<std::size_t>(tier)];
        if (!pool.listed.test(id)) {
            pool.listed.set(id);
            pool.ids.push_back(id);
        }
    }
}

std::optional<SampleId> OdsSampler::pick_replacement(JobId job, Tier tier) {
    auto& rng = jobs_[job]->rng;
    auto& pool = pools_[job].tiers[static_cast<std::size_t>(tier)];
    while (!pool.ids.empty()) {
        const std::size_t k = rng.below(pool.ids.size());
        const SampleId id = pool.ids[k];
        pool.ids[k] = pool.ids.back();
        pool.ids.pop_back();
        pool.listed.reset(id);
        if (cache_.lookup(id) == tier && usable(job, id, tier)) return id;
    }
    return std::nullopt;
}

BatchResponse OdsSampler::serve(JobId job, std::span<const SampleId> requested) {
    refresh_pools(job);
    BatchResponse response;
    response.samples.resize(requested.size());

    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < requested.size(); ++i) {
        const SampleId id = requested[i];
        const Tier tier = cache_.lookup(id);
        if (tier != Tier::storage && usable(job, id, tier)) {
            deliver_cached(job, id, tier, false, response.samples[i]);
        } else {
            misses.push_back(i);
        }
    }

    for (std::size_t i : misses) {
        bool replaced = false;
        for (Tier tier : kCacheTiers) {
            auto candidate = pick_replacement(job, tier);
            if (candidate) {
                deliver_cached(job, *candidate, tier, true, response.samples[i]);
                replaced = true;
                break;
            }
        }
        if (replaced) continue;

        const SampleId id = requested[i];
        mark_served(job, id);
        response.samples[i] = {id, Tier::storage, 0, false};
        if (cache_.lookup(id) == Tier::storage) {
            const Tier admitted = admit_fetched(id);
            if (admitted != Tier::storage) note_admission(id, admitted);
            if (admitted == Tier::augmented) {
                // The fetching job already holds this augmentation.
                admit_augmented(id, 1, job_bit(job));
            } else if (admitted != Tier::storage) {
                set_status(id, admitted, 0);
            }
        }
    }
    return response;
}

std::vector<SampleId> OdsSampler::do_maintain() {
    std::vector<SampleId> evicted;
    auto consider = [&](SampleId id) {
        if (scratch_.test(id) || cache_.lookup(id) != Tier::augmented) return;
        if (state_[id].reference_count() < threshold_) return;
        scratch_.set(id);
        evicted.push_back(id);
    };
    if (rescan_due_) {
        for (SampleId id : cache_.members(Tier::augmented)) consider(id);
        rescan_due_ = false;
    } else {
        for (SampleId id : due_) consider(id);
    }
    due_.clear();
    for (SampleId id : evicted) scratch_.reset(id);
    if (evicted.empty()) return evicted;

    // Draw distinct replacements before the evicted ids rejoin storage, so a slot is
    // refilled with a different sample whenever storage has one to offer.
    std::vector<SampleId> chosen;
    {
        const auto storage = cache_.members(Tier::storage);
        if (storage.size() <= evicted.size()) {
            chosen.assign(storage.begin(), storage.end());
        } else {
            while (chosen.size() < evicted.size()) {
                const SampleId id = storage[maintenance_rng_.below(storage.size())];
                if (!scratch_.test(id)) {
                    scratch_.set(id);
                    chosen.push_back(id);
                }
            }
            for (SampleId id : chosen) scratch_.reset(id);
        }
    }

    for (SampleId id : evicted) {
        cache_.evict(id);
        served_mask_[id] = 0;
        set_status(id, Tier::storage, 0);
    }
    auto refill = [this](SampleId id) {
        cache_.admit(id, Tier::augmented);
        admit_augmented(id, 0, 0);
        note_admission(id, Tier::augmented);
        ++refills_;
    };
    for (SampleId id : chosen) refill(id);
    for (std::size_t missing = evicted.size() - chosen.size(); missing > 0; --missing) {
        const auto storage = cache_.members(Tier::storage);
        if (storage.empty() || !cache_.has_room(Tier::augmented)) break;
        refill(storage[maintenance_rng_.below(storage.size())]);
    }
    return evicted;
}

}  // namespace dsi
