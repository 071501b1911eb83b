/**
 * @file workload_sim.hpp
 * @brief Deterministic multi-job epoch simulator over a shared TieredCache.
 *
 * Jobs advance in round-robin batch steps on one logical timeline; maintain()
 * runs after every batch. Each delivered sample is classified by the tier it
 * came from. Epoch times come from the analytical tier rates: a job-epoch's
 * throughput is the tier rates weighted by the share of deliveries each tier
 * served (the same aggregation the model uses), and its epoch time is
 * deliveries / throughput. The serial sum of count / rate is reported too.
 */
#pragma once

#include "dsi/perf_model.hpp"
#include "dsi/tiered_cache.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsi {

enum class SamplerKind { ods, baseline_uniform };

std::string_view to_string(SamplerKind kind) noexcept;
/// Accepts `ods`, `baseline` and `baseline-uniform`.
SamplerKind parse_sampler_kind(std::string_view text);

struct SimConfig {
    HardwareProfile hardware;
    DatasetProfile dataset;
    JobProfile job;
    std::uint32_t jobs = 1;
    std::optional<PartitionSplit> split;  ///< empty: the planner chooses
    std::uint32_t batch_size = 64;
    std::uint32_t epochs = 2;
    std::uint64_t seed = 0;
    SamplerKind sampler = SamplerKind::ods;
    std::uint32_t eviction_threshold = 0;  ///< 0: number of jobs

    void validate() const;
};

struct TierCounts {
    std::uint64_t augmented = 0;
    std::uint64_t decoded = 0;
    std::uint64_t encoded = 0;
    std::uint64_t storage = 0;

    void add(Tier tier, std::uint64_t n = 1) noexcept;
    std::uint64_t hits() const noexcept { return augmented + decoded + encoded; }
    std::uint64_t delivered() const noexcept { return hits() + storage; }
    TierCounts& operator+=(const TierCounts& other) noexcept;
    bool operator==(const TierCounts&) const = default;
};

struct PreprocessingOps {
    std::uint64_t decode_augment = 0;  ///< storage fetches + encoded hits
    std::uint64_t augment_only = 0;    ///< decoded hits

    std::uint64_t total() const noexcept { return decode_augment + augment_only; }
    bool operator==(const PreprocessingOps&) const = default;
};

PreprocessingOps preprocessing_ops(const TierCounts& served) noexcept;

/// Mix-weighted throughput of a set of deliveries under the model's tier rates.
double mix_throughput(const TierCounts& served, const ModelOutput& model) noexcept;
/// Sum over tiers of count / rate.
double serial_time(const TierCounts& served, const ModelOutput& model) noexcept;

struct JobEpochRecord {
    std::uint32_t job = 0;
    std::uint32_t epoch = 0;  ///< 1-based
    TierCounts served;
    PreprocessingOps ops;
    double hit_rate = 0;
    double throughput = 0;  ///< samples/s
    double epoch_time_s = 0;
    double serial_time_s = 0;
    std::uint64_t digest = 0;  ///< FNV-1a over the delivered (id, tier) sequence
};

struct PhaseSummary {
    std::uint64_t job_epochs = 0;
    TierCounts served;
    PreprocessingOps ops;
    double hit_rate = 0;
    double throughput = 0;
    double mean_epoch_time_s = 0;
};

struct SimMetrics {
    PartitionSplit split;
    ModelOutput model;
    std::vector<JobEpochRecord> records;
    PhaseSummary first_epoch;
    std::optional<PhaseSummary> stable;  ///< epochs after the first; empty for single-epoch runs
    std::uint64_t refills = 0;           ///< background augmented refills (not counted as deliveries)
    std::uint64_t transcript_digest = 0;
};

SimMetrics run(const SimConfig& config);

/// Preprocessing operations over every job-epoch of a run.
PreprocessingOps preprocessing_ops(const SimMetrics& metrics) noexcept;

struct CompareRow {
    std::string label;
    SamplerKind sampler = SamplerKind::ods;
    std::uint32_t jobs = 0;
    std::uint64_t seed = 0;
    PartitionSplit split;
    std::uint64_t delivered = 0;
    double first_hit_rate = 0;
    std::optional<double> stable_hit_rate;
    PreprocessingOps ops;
    double first_epoch_time_s = 0;
    std::optional<double> stable_epoch_time_s;
    std::uint64_t digest = 0;
};

CompareRow summarize(const SimConfig& config, const SimMetrics& metrics);

/// Runs every config and lines the results up row by row.
std::vector<CompareRow> compare(std::span<const SimConfig> configs);

}  // namespace dsi
