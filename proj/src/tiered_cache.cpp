#include "dsi/tiered_cache.hpp"

#include "dsi/errors.hpp"

#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dsi {

std::string_view to_string(Tier tier) noexcept {
    switch (tier) {
        case Tier::augmented: return "augmented";
        case Tier::decoded: return "decoded";
        case Tier::encoded: return "encoded";
        case Tier::storage: return "storage";
    }
    return "unknown";
}

TieredCache::TieredCache(std::uint64_t n_total, const std::array<TierLayout, 3>& layout) : layout_(layout) {
    if (n_total == 0) throw std::invalid_argument("cache needs at least one sample");
    if (n_total > std::numeric_limits<SampleId>::max()) {
        throw std::invalid_argument("dataset too large for 32-bit sample ids");
    }
    for (const auto& tier : layout_) {
        if (tier.capacity_entries > 0 && !(tier.entry_bytes > 0)) {
            throw std::invalid_argument("tier entry size must be positive");
        }
    }
    auto& storage = members_[index(Tier::storage)];
    storage.resize(n_total);
    std::iota(storage.begin(), storage.end(), SampleId{0});
    position_.resize(n_total);
    std::iota(position_.begin(), position_.end(), std::uint32_t{0});
    status_.assign(n_total, Tier::storage);
}

TieredCache::TieredCache(TieredCache&& other) noexcept
    : layout_(other.layout_),
      members_(std::move(other.members_)),
      position_(std::move(other.position_)),
      status_(std::move(other.status_)) {}

TieredCache& TieredCache::operator=(TieredCache&& other) noexcept {
    if (this != &other) {
        std::unique_lock lock(mutex_);
        layout_ = other.layout_;
        members_ = std::move(other.members_);
        position_ = std::move(other.position_);
        status_ = std::move(other.status_);
    }
    return *this;
}

TieredCache TieredCache::for_split(const HardwareProfile& hw, const DatasetProfile& ds, const PartitionSplit& split) {
    split.validate();
    const double tensor = ds.tensor_bytes();
    return TieredCache(ds.n_total,
                       {TierLayout{tier_capacity_entries(hw.cache_capacity, split.x_augmented, tensor), tensor},
                        TierLayout{tier_capacity_entries(hw.cache_capacity, split.x_decoded, tensor), tensor},
                        TierLayout{tier_capacity_entries(hw.cache_capacity, split.x_encoded, ds.s_data), ds.s_data}});
}

void TieredCache::check_id(SampleId id) const {
    if (id >= status_.size()) throw std::out_of_range("sample id " + std::to_string(id) + " out of range");
}

void TieredCache::move_to(SampleId id, Tier to) {
    auto& from_list = members_[index(status_[id])];
    const std::uint32_t slot = position_[id];
    const SampleId last = from_list.back();
    from_list[slot] = last;
    position_[last] = slot;
    from_list.pop_back();

    auto& to_list = members_[index(to)];
    position_[id] = static_cast<std::uint32_t>(to_list.size());
    to_list.push_back(id);
    status_[id] = to;
}

bool TieredCache::admit(SampleId id, Tier tier) {
    if (tier == Tier::storage) throw std::invalid_argument("cannot admit into storage");
    std::unique_lock lock(mutex_);
    check_id(id);
    if (status_[id] != Tier::storage) {
        throw InvalidState("sample " + std::to_string(id) + " already cached in " +
                           std::string(to_string(status_[id])));
    }
    if (members_[index(tier)].size() >= layout_[index(tier)].capacity_entries) return false;
    move_to(id, tier);
    return true;
}

void TieredCache::evict(SampleId id) {
    std::unique_lock lock(mutex_);
    check_id(id);
    if (status_[id] == Tier::storage) {
        throw InvalidState("sample " + std::to_string(id) + " is not cached");
    }
    move_to(id, Tier::storage);
}

Tier TieredCache::lookup(SampleId id) const {
    std::shared_lock lock(mutex_);
    check_id(id);
    return status_[id];
}

std::uint64_t TieredCache::capacity_entries(Tier tier) const {
    if (tier == Tier::storage) return n_total();
    return layout_[index(tier)].capacity_entries;
}

double TieredCache::entry_bytes(Tier tier) const {
    if (tier == Tier::storage) return 0;
    return layout_[index(tier)].entry_bytes;
}

std::uint64_t TieredCache::cached_count() const noexcept {
    return members_[0].size() + members_[1].size() + members_[2].size();
}

}  // namespace dsi
