/**
 * @file tiered_cache.hpp
 * @brief Capacity-accounted cache with one partition per data form.
 *
 * Entries are uniform in size: s_data for the encoded tier and
 * inflation * s_data for the decoded and augmented tiers. No payload is
 * stored; the cache tracks membership and occupancy only. Samples not in
 * any tier are storage-resident, and that set is indexable as well so that
 * random refills can draw from it in constant time.
 */
#pragma once

#include "dsi/perf_model.hpp"

#include <array>
#include <cstdint>
#include <shared_mutex>
#include <span>
#include <string_view>
#include <vector>

namespace dsi {

using SampleId = std::uint32_t;

enum class Tier : std::uint8_t { augmented = 0, decoded = 1, encoded = 2, storage = 3 };

inline constexpr std::array<Tier, 3> kCacheTiers = {Tier::augmented, Tier::decoded, Tier::encoded};

std::string_view to_string(Tier tier) noexcept;

struct TierLayout {
    std::uint64_t capacity_entries = 0;
    double entry_bytes = 0;
};

class TieredCache {
public:
    /// `layout` is indexed by tier (augmented, decoded, encoded).
    TieredCache(std::uint64_t n_total, const std::array<TierLayout, 3>& layout);

    /// Moves membership; the source must not be in use by other threads.
    TieredCache(TieredCache&& other) noexcept;
    TieredCache& operator=(TieredCache&& other) noexcept;
    TieredCache(const TieredCache&) = delete;
    TieredCache& operator=(const TieredCache&) = delete;

    /// Tier capacities derived from a split of `hw.cache_capacity`.
    static TieredCache for_split(const HardwareProfile& hw, const DatasetProfile& ds, const PartitionSplit& split);

    /// Inserts `id` into `tier` iff the tier has a free slot. Throws InvalidState if `id` is already cached.
    bool admit(SampleId id, Tier tier);

    /// Returns `id` to storage. Throws InvalidState if it is not cached.
    void evict(SampleId id);

    Tier lookup(SampleId id) const;

    /// Current members of a tier (or of storage). Not synchronized: valid until the next mutation.
    std::span<const SampleId> members(Tier tier) const noexcept { return members_[index(tier)]; }

    std::uint64_t size(Tier tier) const noexcept { return members_[index(tier)].size(); }
    std::uint64_t capacity_entries(Tier tier) const;
    double entry_bytes(Tier tier) const;
    double capacity_bytes(Tier tier) const { return static_cast<double>(capacity_entries(tier)) * entry_bytes(tier); }
    double occupancy_bytes(Tier tier) const { return static_cast<double>(size(tier)) * entry_bytes(tier); }
    bool has_room(Tier tier) const { return size(tier) < capacity_entries(tier); }

    std::uint64_t n_total() const noexcept { return status_.size(); }
    std::uint64_t cached_count() const noexcept;

private:
    static constexpr std::size_t index(Tier tier) noexcept { return static_cast<std::size_t>(tier); }
    void check_id(SampleId id) const;
    void move_to(SampleId id, Tier to);

    std::array<TierLayout, 3> layout_;
    std::array<std::vector<SampleId>, 4> members_;
    std::vector<std::uint32_t> position_;  // index of each sample inside its tier's member list
    std::vector<Tier> status_;
    mutable std::shared_mutex mutex_;
};

}  // namespace dsi
