/**
 * @file planner.hpp
 * @brief Model-driven cache partitioning: exhaustive search over integer-percent splits.
 */
#pragma once

#include "dsi/perf_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsi {

/// A split expressed in whole percents, written `E-D-A` (e.g. `58-42-0`).
struct SplitPercent {
    int encoded = 0;
    int decoded = 0;
    int augmented = 0;

    PartitionSplit fractions() const noexcept;
    std::string to_string() const;

    /// Parses `E-D-A`. Each part must be an integer in [0, 100] and the parts must sum to 100.
    static SplitPercent parse(std::string_view text);

    bool operator==(const SplitPercent&) const = default;
};

struct GridPoint {
    SplitPercent split;
    double samples_per_s = 0;
};

struct PlanOptions {
    bool keep_grid = false;
};

struct PlanResult {
    SplitPercent best;
    PartitionSplit best_split;
    double predicted_throughput = 0;
    std::size_t evaluated = 0;
    std::optional<std::vector<GridPoint>> full_grid;
    double search_time_s = 0;
};

/// Number of integer-percent splits summing to 100: (102 * 101) / 2.
inline constexpr std::size_t kSplitGridSize = 5151;

/// All splits with E + D + A = 100, ordered by descending encoded then descending decoded share.
std::vector<SplitPercent> enumerate_splits();

/// Argmax of the overall throughput over the split grid. Among splits within 1e-12 relative of
/// each other the higher encoded share wins, then the higher decoded share.
PlanResult plan(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job,
                PlanOptions options = {});

struct SweepCell {
    PartitionSplit split;
    std::uint64_t n_total = 0;
    double samples_per_s = 0;
};

/// Throughput for every (split, dataset size) pair; the dataset is rescaled by sample count
/// at fixed sample size. Rows are ordered split-major.
std::vector<SweepCell> sweep(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job,
                             std::span<const PartitionSplit> splits, std::span<const std::uint64_t> sizes);

}  // namespace dsi
