// Profiles shared by the unit tests, written out by hand in canonical units.
#pragma once

#include "dsi/perf_model.hpp"

#include <limits>

namespace fixtures {

inline constexpr double kHuge = std::numeric_limits<double>::infinity();

inline dsi::HardwareProfile inhouse() {
    dsi::HardwareProfile hw;
    hw.t_gpu = 4550;
    hw.t_decode_augment = 2132;
    hw.t_augment = 4050;
    hw.b_nic = 10e9 / 8;
    hw.b_pcie = 32e9;
    hw.b_cache = 10e9 / 8;
    hw.b_storage = 500e6;
    hw.cache_capacity = 64e9;
    hw.nodes = 1;
    hw.gpus_per_node = 2;
    return hw;
}

inline dsi::HardwareProfile aws() {
    dsi::HardwareProfile hw = inhouse();
    hw.t_gpu = 9989;
    hw.t_decode_augment = 3432;
    hw.t_augment = 6520;
    hw.b_storage = 256e6;
    hw.gpus_per_node = 4;
    return hw;
}

inline dsi::HardwareProfile azure() {
    dsi::HardwareProfile hw;
    hw.t_gpu = 14301;
    hw.t_decode_augment = 9783;
    hw.t_augment = 12930;
    hw.b_nic = 80e9 / 8;
    hw.b_pcie = 64e9;
    hw.b_cache = 30e9 / 8;
    hw.b_storage = 250e6;
    hw.cache_capacity = 64e9;
    hw.nodes = 1;
    hw.gpus_per_node = 4;
    return hw;
}

inline dsi::DatasetProfile imagenet1k() { return {1'300'000, 114e3, 5.12}; }
inline dsi::DatasetProfile imagenet22k() { return {14'000'000, 91.39e3, 5.12}; }

/// Everything unbounded except what the caller sets.
inline dsi::HardwareProfile unbounded() {
    dsi::HardwareProfile hw;
    hw.t_gpu = kHuge;
    hw.t_decode_augment = kHuge;
    hw.t_augment = kHuge;
    hw.b_nic = kHuge;
    hw.b_pcie = kHuge;
    hw.b_cache = kHuge;
    hw.b_storage = kHuge;
    hw.cache_capacity = 64e9;
    return hw;
}

}  // namespace fixtures
