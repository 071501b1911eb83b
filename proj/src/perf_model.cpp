#include "dsi/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dsi {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0)) {
        throw std::invalid_argument(std::string(name) + " must be strictly positive");
    }
}

/// Running minimum over candidate terms; the first strictly smaller term wins ties.
class MinTerms {
public:
    void add(double value, LimitingFactor factor) {
        if (std::isnan(value)) return;
        if (!seen_ || value < best_.samples_per_s) {
            best_ = {value, factor};
            seen_ = true;
        }
    }

    // Zero-valued denominators drop the term instead of producing infinity.
    void add_ratio(double numerator, double denominator, LimitingFactor factor) {
        if (denominator <= 0) return;
        add(numerator / denominator, factor);
    }

    TierThroughput result() const {
        if (!seen_) return {std::numeric_limits<double>::infinity(), LimitingFactor::gpu};
        return best_;
    }

private:
    TierThroughput best_{};
    bool seen_ = false;
};

}  // namespace

void HardwareProfile::validate() const {
    require_positive(t_gpu, "t_gpu");
    require_positive(t_decode_augment, "t_decode_augment");
    require_positive(t_augment, "t_augment");
    require_positive(b_nic, "b_nic");
    require_positive(b_pcie, "b_pcie");
    require_positive(b_cache, "b_cache");
    require_positive(b_storage, "b_storage");
    // zero capacity models a cache-less deployment
    if (!(cache_capacity >= 0) || std::isinf(cache_capacity)) {
        throw std::invalid_argument("cache_capacity must be finite and non-negative");
    }
    if (nodes < 1) throw std::invalid_argument("nodes must be >= 1");
    if (gpus_per_node < 1) throw std::invalid_argument("gpus_per_node must be >= 1");
}

void DatasetProfile::validate() const {
    if (n_total < 1) throw std::invalid_argument("n_total must be >= 1");
    require_positive(s_data, "s_data");
    if (std::isinf(s_data)) throw std::invalid_argument("s_data must be finite");
    if (!(inflation >= 1) || std::isinf(inflation)) {
        throw std::invalid_argument("inflation must be finite and >= 1");
    }
}

void JobProfile::validate() const {
    if (!(model_size >= 0) || std::isinf(model_size)) {
        throw std::invalid_argument("model_size must be finite and non-negative");
    }
}

void PartitionSplit::validate() const {
    for (double x : {x_encoded, x_decoded, x_augmented}) {
        if (!(x >= 0 && x <= 1)) throw std::invalid_argument("split fractions must lie in [0, 1]");
    }
    if (x_encoded + x_decoded + x_augmented > 1 + kSumTolerance) {
        throw std::invalid_argument("split fractions must sum to at most 1");
    }
}

std::string_view to_string(LimitingFactor factor) noexcept {
    switch (factor) {
        case LimitingFactor::cache_bw: return "cache-bw";
        case LimitingFactor::nic: return "nic";
        case LimitingFactor::pcie: return "pcie";
        case LimitingFactor::cpu_augment: return "cpu-augment";
        case LimitingFactor::cpu_decode_augment: return "cpu-decode-augment";
        case LimitingFactor::gpu: return "gpu";
        case LimitingFactor::storage_bw: return "storage-bw";
    }
    return "unknown";
}

double comm_overhead(std::uint64_t participants, double model_size) {
    if (participants == 0) throw std::invalid_argument("participants must be >= 1");
    const auto n = static_cast<double>(participants);
    return 2.0 * (n - 1.0) / n * model_size;
}

CommOverheads comm_overheads(const HardwareProfile& hw, const JobProfile& job) {
    const bool nodes_for_network = hw.comm_mapping == CommParticipantMapping::nodes_for_network;
    const std::uint64_t network_participants = nodes_for_network ? hw.nodes : hw.gpus_per_node;
    const std::uint64_t pcie_participants = nodes_for_network ? hw.gpus_per_node : hw.nodes;

    CommOverheads out;
    out.network = comm_overhead(network_participants, job.model_size);
    out.pcie = comm_overhead(pcie_participants, job.model_size);
    if (hw.nvlink_intra || hw.nvlink_inter) out.pcie = 0;
    if (hw.nvlink_inter) out.network = 0;
    return out;
}

TierThroughput dsi_augmented(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job) {
    const auto comm = comm_overheads(hw, job);
    const double n = hw.nodes;
    const double tensor = ds.tensor_bytes();

    MinTerms terms;
    terms.add_ratio(hw.b_cache, tensor, LimitingFactor::cache_bw);
    terms.add_ratio(n * hw.b_nic, tensor + comm.network, LimitingFactor::nic);
    terms.add_ratio(n * hw.b_pcie, tensor + comm.pcie, LimitingFactor::pcie);
    terms.add(n * hw.t_gpu, LimitingFactor::gpu);
    return terms.result();
}

TierThroughput dsi_decoded(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job) {
    const auto comm = comm_overheads(hw, job);
    const double n = hw.nodes;
    const double tensor = ds.tensor_bytes();

    MinTerms terms;
    terms.add_ratio(hw.b_cache, tensor, LimitingFactor::cache_bw);
    terms.add_ratio(n * hw.b_nic, tensor + comm.network, LimitingFactor::nic);
    terms.add(n * hw.t_augment, LimitingFactor::cpu_augment);
    terms.add_ratio(n * hw.b_pcie, tensor + comm.pcie, LimitingFactor::pcie);
    terms.add(n * hw.t_gpu, LimitingFactor::gpu);
    return terms.result();
}

TierThroughput dsi_encoded(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job) {
    const auto comm = comm_overheads(hw, job);
    const double n = hw.nodes;

    // Encoded bytes cross the cache link and the NIC; the decoded tensor crosses PCIe.
    MinTerms terms;
    terms.add_ratio(hw.b_cache, ds.s_data, LimitingFactor::cache_bw);
    terms.add_ratio(n * hw.b_nic, ds.s_data + comm.network, LimitingFactor::nic);
    terms.add(n * hw.t_decode_augment, LimitingFactor::cpu_decode_augment);
    terms.add_ratio(n * hw.b_pcie, ds.tensor_bytes() + comm.pcie, LimitingFactor::pcie);
    terms.add(n * hw.t_gpu, LimitingFactor::gpu);
    return terms.result();
}

TierThroughput dsi_storage(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job) {
    const auto encoded = dsi_encoded(hw, ds, job);
    MinTerms terms;
    terms.add(encoded.samples_per_s, encoded.limit);
    terms.add_ratio(hw.b_storage, ds.s_data, LimitingFactor::storage_bw);
    return terms.result();
}

std::uint64_t tier_capacity_entries(double cache_capacity, double fraction, double entry_bytes) {
    if (!(entry_bytes > 0) || !(fraction > 0) || !(cache_capacity > 0)) return 0;
    const double exact = fraction * cache_capacity / entry_bytes;
    // Absorb representation error so that e.g. 0.2 * (k * e) / e still yields k.
    const double floored = std::floor(exact + exact * 1e-12);
    constexpr auto kMax = static_cast<double>(std::numeric_limits<std::uint64_t>::max());
    if (!(floored < kMax)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(floored);
}

CachedCounts cached_counts(const HardwareProfile& hw, const DatasetProfile& ds, const PartitionSplit& split) {
    const std::uint64_t total = ds.n_total;
    const double tensor = ds.tensor_bytes();

    CachedCounts c;
    c.augmented = std::min(total, tier_capacity_entries(hw.cache_capacity, split.x_augmented, tensor));
    c.decoded = std::min(total - c.augmented,
                         tier_capacity_entries(hw.cache_capacity, split.x_decoded, tensor));
    c.encoded = std::min(total - (c.augmented + c.decoded),
                         tier_capacity_entries(hw.cache_capacity, split.x_encoded, ds.s_data));
    c.storage = total - c.augmented - c.decoded - c.encoded;
    return c;
}

ModelOutput dsi_overall(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job,
                        const PartitionSplit& split) {
    ModelOutput out;
    out.augmented = dsi_augmented(hw, ds, job);
    out.decoded = dsi_decoded(hw, ds, job);
    out.encoded = dsi_encoded(hw, ds, job);
    out.storage = dsi_storage(hw, ds, job);
    out.counts = cached_counts(hw, ds, split);

    const auto total = static_cast<double>(ds.n_total);
    auto weighted = [total](std::uint64_t count, const TierThroughput& tier) {
        // An empty tier contributes nothing, even if its rate is unbounded.
        return count == 0 ? 0.0 : static_cast<double>(count) / total * tier.samples_per_s;
    };
    out.overall = weighted(out.counts.augmented, out.augmented) + weighted(out.counts.decoded, out.decoded) +
                  weighted(out.counts.encoded, out.encoded) + weighted(out.counts.storage, out.storage);
    return out;
}

}  // namespace dsi
