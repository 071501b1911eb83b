/**
 * @file perf_model.hpp
 * @brief Analytical throughput model of the data storage and ingestion (DSI) pipeline.
 *
 * Each cache tier (augmented, decoded, encoded) and the storage path has a
 * throughput that is the minimum over the hardware components it touches.
 * The overall throughput weights every path by the share of the dataset it
 * serves, given a split of the cache between the three data forms.
 *
 * Units are canonical throughout: bytes, bytes/second, samples/second.
 * Conversion from Gb/s, MB/s, KB etc. happens in the profile layer.
 */
#pragma once

#include <cstdint>
#include <string_view>

namespace dsi {

/// Which node count the ring-reduce overhead of each interconnect is computed over.
enum class CommParticipantMapping {
    nodes_for_network,  ///< C_nw over nodes, C_PCIe over GPUs per node (default)
    gpus_for_network,   ///< C_nw over GPUs per node, C_PCIe over nodes
};

struct HardwareProfile {
    double t_gpu = 0;             ///< samples/s per node, GPU ingestion
    double t_decode_augment = 0;  ///< samples/s per node, CPU decode + augment
    double t_augment = 0;         ///< samples/s per node, CPU augment only
    double b_nic = 0;             ///< bytes/s per node
    double b_pcie = 0;            ///< bytes/s per node
    double b_cache = 0;           ///< bytes/s, remote cache, cluster-wide
    double b_storage = 0;         ///< bytes/s, remote storage, cluster-wide
    double cache_capacity = 0;    ///< bytes
    std::uint32_t nodes = 1;
    std::uint32_t gpus_per_node = 1;
    bool nvlink_intra = false;
    bool nvlink_inter = false;
    CommParticipantMapping comm_mapping = CommParticipantMapping::nodes_for_network;

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
    bool operator==(const HardwareProfile&) const = default;
};

struct DatasetProfile {
    std::uint64_t n_total = 0;
    double s_data = 0;     ///< mean encoded sample size, bytes
    double inflation = 1;  ///< decoded/augmented size = inflation * s_data

    void validate() const;
    double tensor_bytes() const noexcept { return inflation * s_data; }
    bool operator==(const DatasetProfile&) const = default;
};

struct JobProfile {
    double model_size = 0;  ///< gradient payload per synchronization, bytes

    void validate() const;
    bool operator==(const JobProfile&) const = default;
};

/// Fractions of cache capacity given to each data form.
struct PartitionSplit {
    double x_encoded = 0;
    double x_decoded = 0;
    double x_augmented = 0;

    static constexpr double kSumTolerance = 1e-9;

    void validate() const;
    bool operator==(const PartitionSplit&) const = default;
};

enum class LimitingFactor {
    cache_bw,
    nic,
    pcie,
    cpu_augment,
    cpu_decode_augment,
    gpu,
    storage_bw,
};

std::string_view to_string(LimitingFactor factor) noexcept;

struct TierThroughput {
    double samples_per_s = 0;
    LimitingFactor limit = LimitingFactor::gpu;
};

struct CachedCounts {
    std::uint64_t augmented = 0;
    std::uint64_t decoded = 0;
    std::uint64_t encoded = 0;
    std::uint64_t storage = 0;

    std::uint64_t total() const noexcept { return augmented + decoded + encoded + storage; }
    bool operator==(const CachedCounts&) const = default;
};

struct ModelOutput {
    TierThroughput augmented;
    TierThroughput decoded;
    TierThroughput encoded;
    TierThroughput storage;
    CachedCounts counts;
    double overall = 0;
};

/// Per-batch gradient synchronization payload, in bytes (zeroing for NVLink is up to the caller).
double comm_overhead(std::uint64_t participants, double model_size);

struct CommOverheads {
    double network = 0;  ///< C_nw
    double pcie = 0;     ///< C_PCIe
};

/// Both interconnect overheads for a job on the given hardware, NVLink zeroing applied.
CommOverheads comm_overheads(const HardwareProfile& hw, const JobProfile& job);

TierThroughput dsi_augmented(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job);
TierThroughput dsi_decoded(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job);
TierThroughput dsi_encoded(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job);
TierThroughput dsi_storage(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job);

/// Whole samples that fit in `fraction` of `cache_capacity` at `entry_bytes` each.
/// Partially cached samples do not count.
std::uint64_t tier_capacity_entries(double cache_capacity, double fraction, double entry_bytes);

CachedCounts cached_counts(const HardwareProfile& hw, const DatasetProfile& ds, const PartitionSplit& split);

ModelOutput dsi_overall(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job,
                        const PartitionSplit& split);

}  // namespace dsi
