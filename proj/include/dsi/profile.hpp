/**
 * @file profile.hpp
 * @brief Profile documents: hardware, dataset, job and simulation settings in one JSON file.
 *
 * Every dimensioned key carries its unit as a suffix, e.g. `b_nic_gbit_per_s`,
 * `b_storage_mb_per_s`, `cache_capacity_gb`, `s_data_kb`. Decimal prefixes are
 * used throughout (1 KB = 1e3 B, 1 Gbit/s = 1.25e8 B/s). `//` comments are
 * allowed. Unknown keys and missing required keys are rejected with the dotted
 * key path in the error.
 */
#pragma once

#include "dsi/perf_model.hpp"
#include "dsi/workload_sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace dsi {

struct SimSettings {
    std::uint32_t jobs = 1;
    std::uint32_t batch_size = 64;
    std::uint32_t epochs = 2;
    std::optional<std::uint64_t> seed;
    SamplerKind sampler = SamplerKind::ods;
    std::optional<PartitionSplit> split;  ///< empty: "auto"
    std::uint32_t eviction_threshold = 0;

    bool operator==(const SimSettings&) const = default;
};

struct Profile {
    std::string name;
    HardwareProfile hardware;
    DatasetProfile dataset;
    JobProfile job;
    SimSettings sim;

    bool operator==(const Profile&) const = default;
};

/// Throws ProfileError on malformed documents and on invariant violations.
Profile parse_profile(std::string_view text);
Profile load_profile(const std::filesystem::path& path);

/// Canonical form: bytes, bytes/s and samples/s. Parses back to an identical Profile.
std::string serialize_profile(const Profile& profile);

/// Simulation config from a profile; `seed_fallback` is used when the profile sets no seed.
SimConfig to_sim_config(const Profile& profile, std::uint64_t seed_fallback = 0);

}  // namespace dsi
