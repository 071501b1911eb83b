#include "dsi/tiered_cache.hpp"

#include "dsi/errors.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

using namespace dsi;

namespace {

TieredCache small_cache(std::uint64_t n = 10) {
    return TieredCache(n, {TierLayout{2, 500}, TierLayout{1, 500}, TierLayout{3, 100}});
}

std::set<SampleId> as_set(std::span<const SampleId> ids) { return {ids.begin(), ids.end()}; }

}  // namespace

TEST_CASE("a fresh cache holds everything in storage") {
    auto c = small_cache();
    CHECK(c.n_total() == 10);
    CHECK(c.cached_count() == 0);
    CHECK(c.size(Tier::storage) == 10);
    for (SampleId id = 0; id < 10; ++id) CHECK(c.lookup(id) == Tier::storage);
    CHECK(c.capacity_bytes(Tier::augmented) == 1000);
    CHECK(c.capacity_bytes(Tier::encoded) == 300);
    CHECK(c.occupancy_bytes(Tier::augmented) == 0);
}

TEST_CASE("admit fills up to capacity and moves samples out of storage") {
    auto c = small_cache();
    CHECK(c.admit(0, Tier::augmented));
    CHECK(c.admit(1, Tier::augmented));
    CHECK_FALSE(c.admit(2, Tier::augmented));
    CHECK(c.lookup(2) == Tier::storage);
    CHECK_FALSE(c.has_room(Tier::augmented));
    CHECK(c.occupancy_bytes(Tier::augmented) == 1000);

    CHECK(c.admit(2, Tier::decoded));
    CHECK(c.lookup(2) == Tier::decoded);
    CHECK(c.size(Tier::storage) == 7);
    CHECK(as_set(c.members(Tier::augmented)) == std::set<SampleId>{0, 1});
    CHECK(c.cached_count() == 3);
}

TEST_CASE("admit rejects already-cached samples and the storage tier") {
    auto c = small_cache();
    REQUIRE(c.admit(4, Tier::encoded));
    CHECK_THROWS_AS(c.admit(4, Tier::encoded), InvalidState);
    CHECK_THROWS_AS(c.admit(4, Tier::augmented), InvalidState);
    CHECK_THROWS_AS(c.admit(5, Tier::storage), std::invalid_argument);
    CHECK_THROWS_AS(c.admit(10, Tier::encoded), std::out_of_range);
    CHECK_THROWS_AS(c.lookup(99), std::out_of_range);
}

TEST_CASE("evict returns a sample to storage") {
    auto c = small_cache();
    REQUIRE(c.admit(3, Tier::augmented));
    c.evict(3);
    CHECK(c.lookup(3) == Tier::storage);
    CHECK(c.size(Tier::augmented) == 0);
    CHECK(c.size(Tier::storage) == 10);
    CHECK_THROWS_AS(c.evict(3), InvalidState);
    CHECK(c.admit(3, Tier::decoded));
}

TEST_CASE("zero-capacity tiers never admit") {
    TieredCache c(5, {TierLayout{0, 1}, TierLayout{0, 1}, TierLayout{0, 1}});
    for (Tier t : kCacheTiers) CHECK_FALSE(c.admit(0, t));
}

TEST_CASE("for_split sizes tiers like the model") {
    auto hw = fixtures::inhouse();
    hw.cache_capacity = 1.16736e9;
    const DatasetProfile ds{10'000, 114e3, 5.12};
    auto c = TieredCache::for_split(hw, ds, {0, 0, 1});
    CHECK(c.capacity_entries(Tier::augmented) == 2000);
    CHECK(c.capacity_entries(Tier::decoded) == 0);
    CHECK(c.entry_bytes(Tier::encoded) == 114e3);
    CHECK(c.entry_bytes(Tier::decoded) == doctest::Approx(5.12 * 114e3));

    auto d = TieredCache::for_split(hw, ds, {0.5, 0.5, 0});
    const auto counts = cached_counts(hw, ds, {0.5, 0.5, 0});
    CHECK(d.capacity_entries(Tier::decoded) == counts.decoded);
    CHECK(d.capacity_entries(Tier::encoded) >= counts.encoded);
}

TEST_CASE("membership bookkeeping survives random churn") {
    auto c = TieredCache(200, {TierLayout{30, 1}, TierLayout{20, 1}, TierLayout{50, 1}});
    std::uint64_t state = 12345;
    auto next = [&] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<std::uint32_t>(state >> 33);
    };
    for (int step = 0; step < 20'000; ++step) {
        const SampleId id = next() % 200;
        if (c.lookup(id) == Tier::storage) {
            c.admit(id, kCacheTiers[next() % 3]);
        } else {
            c.evict(id);
        }
    }
    std::uint64_t total = 0;
    for (Tier t : {Tier::augmented, Tier::decoded, Tier::encoded, Tier::storage}) {
        for (SampleId id : c.members(t)) CHECK(c.lookup(id) == t);
        total += c.size(t);
    }
    CHECK(total == 200);
    CHECK(c.size(Tier::augmented) <= 30);
    CHECK(c.size(Tier::decoded) <= 20);
}

TEST_CASE("concurrent admit, evict and lookup keep the cache consistent") {
    constexpr SampleId kN = 4000;
    constexpr int kThreads = 4;
    TieredCache c(kN, {TierLayout{600, 1}, TierLayout{600, 1}, TierLayout{600, 1}});
    std::atomic<bool> go{false};
    std::atomic<std::uint64_t> bad_reads{0};

    std::vector<std::thread> writers;
    for (int t = 0; t < kThreads; ++t) {
        writers.emplace_back([&, t] {
            while (!go) {
            }
            // each writer owns the ids congruent to t, so admit/evict on them never conflict
            for (int round = 0; round < 20; ++round) {
                for (SampleId id = static_cast<SampleId>(t); id < kN; id += kThreads) {
                    if (c.lookup(id) == Tier::storage) {
                        c.admit(id, kCacheTiers[(id + round) % 3]);
                    } else if ((id + round) % 2 == 0) {
                        c.evict(id);
                    }
                }
            }
        });
    }
    std::thread reader([&] {
        while (!go) {
        }
        for (int i = 0; i < 200'000; ++i) {
            const Tier t = c.lookup(static_cast<SampleId>(i % kN));
            if (static_cast<int>(t) > 3) ++bad_reads;
        }
    });
    go = true;
    for (auto& w : writers) w.join();
    reader.join();

    CHECK(bad_reads == 0);
    std::uint64_t total = 0;
    for (Tier t : {Tier::augmented, Tier::decoded, Tier::encoded, Tier::storage}) {
        for (SampleId id : c.members(t)) REQUIRE(c.lookup(id) == t);
        total += c.size(t);
    }
    CHECK(total == kN);
    for (Tier t : kCacheTiers) CHECK(c.size(t) <= 600);
}
