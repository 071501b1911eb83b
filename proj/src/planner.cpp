#include "dsi/planner.hpp"

#include <charconv>
#include <chrono>
#include <stdexcept>

namespace dsi {

PartitionSplit SplitPercent::fractions() const noexcept {
    return {encoded / 100.0, decoded / 100.0, augmented / 100.0};
}

std::string SplitPercent::to_string() const {
    return std::to_string(encoded) + "-" + std::to_string(decoded) + "-" + std::to_string(augmented);
}

SplitPercent SplitPercent::parse(std::string_view text) {
    int parts[3] = {0, 0, 0};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        if (i > 0) {
            if (pos >= text.size() || text[pos] != '-') {
                throw std::invalid_argument("split must look like E-D-A, got '" + std::string(text) + "'");
            }
            ++pos;
        }
        const char* begin = text.data() + pos;
        const char* end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(begin, end, parts[i]);
        if (ec != std::errc() || ptr == begin || parts[i] < 0 || parts[i] > 100) {
            throw std::invalid_argument("split must look like E-D-A, got '" + std::string(text) + "'");
        }
        pos = static_cast<std::size_t>(ptr - text.data());
    }
    if (pos != text.size()) {
        throw std::invalid_argument("split must look like E-D-A, got '" + std::string(text) + "'");
    }
    if (parts[0] + parts[1] + parts[2] != 100) {
        throw std::invalid_argument("split percents must sum to 100, got '" + std::string(text) + "'");
    }
    return {parts[0], parts[1], parts[2]};
}

std::vector<SplitPercent> enumerate_splits() {
    std::vector<SplitPercent> splits;
    splits.reserve(kSplitGridSize);
    for (int e = 100; e >= 0; --e) {
        for (int d = 100 - e; d >= 0; --d) {
            splits.push_back({e, d, 100 - e - d});
        }
    }
    return splits;
}

PlanResult plan(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job, PlanOptions options) {
    hw.validate();
    ds.validate();
    job.validate();

    const auto start = std::chrono::steady_clock::now();
    const auto splits = enumerate_splits();

    PlanResult result;
    if (options.keep_grid) {
        result.full_grid.emplace();
        result.full_grid->reserve(splits.size());
    }

    bool have_best = false;
    for (const auto& split : splits) {
        const double throughput = dsi_overall(hw, ds, job, split.fractions()).overall;
        // Grid order already encodes the tie-break, so only a clear improvement replaces the incumbent.
        if (!have_best || throughput > result.predicted_throughput + 1e-12 * result.predicted_throughput) {
            result.best = split;
            result.predicted_throughput = throughput;
            have_best = true;
        }
        if (options.keep_grid) result.full_grid->push_back({split, throughput});
        ++result.evaluated;
    }
    result.best_split = result.best.fractions();
    result.search_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<SweepCell> sweep(const HardwareProfile& hw, const DatasetProfile& ds, const JobProfile& job,
                             std::span<const PartitionSplit> splits, std::span<const std::uint64_t> sizes) {
    if (splits.empty()) throw std::invalid_argument("sweep needs at least one split");
    if (sizes.empty()) throw std::invalid_argument("sweep needs at least one dataset size");
    hw.validate();
    job.validate();

    std::vector<SweepCell> cells;
    cells.reserve(splits.size() * sizes.size());
    for (const auto& split : splits) {
        split.validate();
        for (std::uint64_t n : sizes) {
            DatasetProfile scaled = ds;
            scaled.n_total = n;
            scaled.validate();
            cells.push_back({split, n, dsi_overall(hw, scaled, job, split).overall});
        }
    }
    return cells;
}

}  // namespace dsi
