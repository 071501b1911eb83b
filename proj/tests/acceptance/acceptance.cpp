// Acceptance checks: one PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include "dsi/cli.hpp"
#include "dsi/ods_sampler.hpp"
#include "dsi/perf_model.hpp"
#include "dsi/planner.hpp"
#include "dsi/profile.hpp"
#include "dsi/workload_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dsi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

Profile bundled(const std::string& name) { return load_profile(bundled_profile_dir() / (name + ".json")); }

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

// ------------------------------------------------------------------ 1

Outcome model_anchors() {
    // Hand evaluation of every min-term from the profiled values, in bytes and bytes/s.
    const double tensor_in = 5.12 * 114e3;
    const double enc_in = std::min({1.25e9 / 114e3, 1.25e9 / 114e3, 2132.0, 32e9 / tensor_in, 4550.0});
    const double tensor_az = 5.12 * 91.39e3;
    const double enc_az = std::min({3.75e9 / 91.39e3, 10e9 / 91.39e3, 9783.0, 64e9 / tensor_az, 14301.0});
    const double sto_az = std::min(enc_az, 250e6 / 91.39e3);

    const auto in = bundled("inhouse");
    const auto az = bundled("imagenet22k-azure");
    const auto e_in = dsi_encoded(in.hardware, in.dataset, in.job);
    const auto e_az = dsi_encoded(az.hardware, az.dataset, az.job);
    const auto s_az = dsi_storage(az.hardware, az.dataset, az.job);

    const bool ok = rel_close(e_in.samples_per_s, enc_in, 1e-6) && enc_in == 2132 &&
                    e_in.limit == LimitingFactor::cpu_decode_augment && rel_close(e_az.samples_per_s, enc_az, 1e-6) &&
                    enc_az == 9783 && rel_close(s_az.samples_per_s, sto_az, 1e-6) &&
                    s_az.limit == LimitingFactor::storage_bw && std::lround(sto_az) == 2736;
    return {ok, fmt("encoded in-house %.3f, encoded azure %.3f, storage azure %.3f (oracle %.3f)", e_in.samples_per_s,
                    e_az.samples_per_s, s_az.samples_per_s, sto_az)};
}

// ------------------------------------------------------------------ 2

Outcome planner_anchor() {
    const auto p = bundled("imagenet22k-azure");
    const auto start = std::chrono::steady_clock::now();
    const auto r = plan(p.hardware, p.dataset, p.job);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = r.best == SplitPercent{100, 0, 0} && r.evaluated == kSplitGridSize && wall < 1.0;
    return {ok, "split " + r.best.to_string() + ", " + std::to_string(r.evaluated) + " splits in " +
                    fmt("%.2f ms", wall * 1e3)};
}

// ------------------------------------------------------------------ 3

Outcome curve_shapes() {
    const std::vector<std::string> names = {"inhouse", "inhouse-2x", "aws", "azure", "imagenet22k-azure",
                                            "openimages-azure"};
    const std::vector<SplitPercent> fixed = {{100, 0, 0}, {0, 100, 0}, {0, 0, 100},
                                             {50, 50, 0}, {50, 0, 50}, {0, 50, 50}};
    std::vector<std::string> rising;
    for (const auto& name : names) {
        const auto p = bundled(name);
        std::vector<std::uint64_t> sizes;
        for (int gb = 8; gb <= 512; gb += 8) {
            sizes.push_back(static_cast<std::uint64_t>(std::llround(gb * 1e9 / p.dataset.s_data)));
        }
        for (const auto& split : fixed) {
            const PartitionSplit s = split.fractions();
            double prev = INFINITY;
            for (auto n : sizes) {
                DatasetProfile ds = p.dataset;
                ds.n_total = n;
                const double rate = dsi_overall(p.hardware, ds, p.job, s).overall;
                if (rate > prev * (1 + 1e-12)) {
                    rising.push_back(name + ":" + split.to_string());
                    break;
                }
                prev = rate;
            }
        }
    }

    // Crossings of the augmented-only and encoded-only curves on the in-house profile,
    // from the augmented full-fit size out to 512 GB.
    const auto in = bundled("inhouse");
    const double fit_gb = in.hardware.cache_capacity / in.dataset.inflation / 1e9;
    int crossings = 0;
    int prev_sign = 0;
    double max_gap = 0;
    for (double gb = fit_gb; gb <= 512.0 + 1e-9; gb += (512.0 - fit_gb) / 400) {
        DatasetProfile ds = in.dataset;
        ds.n_total = static_cast<std::uint64_t>(std::llround(gb * 1e9 / ds.s_data));
        const double aug = dsi_overall(in.hardware, ds, in.job, {0, 0, 1}).overall;
        const double enc = dsi_overall(in.hardware, ds, in.job, {1, 0, 0}).overall;
        const double gap = aug - enc;
        max_gap = std::max(max_gap, std::abs(gap));
        const int sign = gap > 1e-9 ? 1 : (gap < -1e-9 ? -1 : 0);
        if (sign != 0 && prev_sign != 0 && sign != prev_sign) ++crossings;
        if (sign != 0) prev_sign = sign;
    }

    std::string detail = std::to_string(rising.size()) + " fixed-split curves rise with size";
    if (!rising.empty()) {
        detail += " (";
        for (std::size_t i = 0; i < rising.size() && i < 4; ++i) detail += (i ? ", " : "") + rising[i];
        if (rising.size() > 4) detail += ", ...";
        detail += ")";
    }
    detail += "; in-house augmented-only vs encoded-only cross " + std::to_string(crossings) +
              " time(s), augmented-only never below encoded-only (encoded-only flat at " +
              fmt("%.1f", dsi_encoded(in.hardware, in.dataset, in.job).samples_per_s) + ")";
    return {rising.empty() && crossings == 1, detail};
}

// ------------------------------------------------------------------ 4

struct InvariantRun {
    std::uint64_t digest = 0xcbf29ce484222325ull;
    std::vector<std::string> violations;
};

void mix(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
}

/// Drives an OdsSampler directly and checks every delivery against an independent record.
InvariantRun check_ods_run(std::uint64_t n, std::uint32_t jobs, std::uint64_t seed, double frac_a, double frac_d,
                           double frac_e, std::uint32_t epochs, std::size_t batch) {
    const auto slots = [&](double f) { return static_cast<std::uint64_t>(f * static_cast<double>(n)); };
    OdsSampler s(TieredCache(n, {TierLayout{slots(frac_a), 5}, TierLayout{slots(frac_d), 5}, TierLayout{slots(frac_e), 1}}),
                 seed);
    for (std::uint32_t j = 0; j < jobs; ++j) s.register_job();

    InvariantRun run;
    auto fail = [&](const std::string& what) {
        if (run.violations.size() < 5) run.violations.push_back(what);
    };
    std::vector<std::vector<std::uint32_t>> per_epoch_count(jobs, std::vector<std::uint32_t>(n, 0));
    std::vector<std::set<std::pair<SampleId, std::uint32_t>>> augmented_served(jobs);
    std::vector<std::uint64_t> consumed(jobs, 0);
    std::vector<std::uint32_t> epoch(jobs, 0);

    bool busy = true;
    while (busy) {
        busy = false;
        for (JobId j = 0; j < jobs; ++j) {
            if (epoch[j] == epochs) continue;
            busy = true;
            const auto seen_before = s.job_state(j).seen;
            const auto req = s.next_request(j, batch);
            const auto resp = s.request_batch(j, req);
            if (resp.samples.size() != req.size()) fail("short batch");
            std::vector<SampleId> touched;
            for (const auto& x : resp.samples) {
                mix(run.digest, (std::uint64_t{x.id} << 8) | static_cast<std::uint64_t>(x.tier));
                if (seen_before.test(x.id)) fail("delivered a sample whose seen bit was already set");
                ++per_epoch_count[j][x.id];
                if (x.tier == Tier::augmented) {
                    if (!augmented_served[j].insert({x.id, x.generation}).second) {
                        fail("augmented entry served twice to one job");
                    }
                    touched.push_back(x.id);
                }
            }
            consumed[j] += resp.samples.size();
            s.maintain();
            for (SampleId id : touched) {
                if (s.cache().lookup(id) == Tier::augmented && s.state(id).reference_count() >= jobs) {
                    fail("augmented entry survived reaching the job count");
                }
            }
            if (consumed[j] == n) {
                for (std::uint64_t id = 0; id < n; ++id) {
                    if (per_epoch_count[j][id] != 1) {
                        fail("epoch delivered sample " + std::to_string(id) + " " +
                             std::to_string(per_epoch_count[j][id]) + " times");
                        break;
                    }
                }
                std::fill(per_epoch_count[j].begin(), per_epoch_count[j].end(), 0);
                consumed[j] = 0;
                s.end_epoch(j);
                ++epoch[j];
            }
        }
    }
    for (SampleId id : s.cache().members(Tier::augmented)) {
        if (s.state(id).reference_count() >= jobs) fail("augmented entry at the job count after the run");
    }
    return run;
}

Outcome ods_invariants() {
    const std::uint64_t sizes[] = {1000, 9973, 100000};
    const double fractions[][3] = {{0.2, 0, 0}, {0.1, 0.1, 0.2}, {0.5, 0, 0}};
    int runs = 0;
    std::vector<std::string> problems;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        for (std::uint32_t jobs = 1; jobs <= 4; ++jobs) {
            const auto n = sizes[(seed + jobs) % 3];
            const auto& f = fractions[seed % 3];
            const std::size_t batch = 16 << (seed % 3);
            const auto a = check_ods_run(n, jobs, seed, f[0], f[1], f[2], 3, batch);
            const auto b = check_ods_run(n, jobs, seed, f[0], f[1], f[2], 3, batch);
            ++runs;
            for (const auto& v : a.violations) problems.push_back(v);
            if (a.digest != b.digest) problems.push_back("rerun differs for seed " + std::to_string(seed));
        }
    }
    std::string detail = std::to_string(runs) + " runs (10 seeds, J = 1..4, N up to 1e5), each rerun once";
    if (!problems.empty()) detail += "; first problem: " + problems.front();
    return {problems.empty(), detail};
}

// ------------------------------------------------------------------ 5

Outcome hit_rate_uplift() {
    const auto p = bundled("sim-small");
    double min_uplift = 1, base_lo = 1, base_hi = 0, ods_lo = 1;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SimConfig c = to_sim_config(p, seed);
        c.seed = seed;
        c.jobs = 3;
        c.split = PartitionSplit{0, 0, 1};
        c.sampler = SamplerKind::ods;
        const auto ods = run(c);
        c.sampler = SamplerKind::baseline_uniform;
        const auto base = run(c);
        const double o = ods.stable->hit_rate;
        const double b = base.stable->hit_rate;
        min_uplift = std::min(min_uplift, o - b);
        base_lo = std::min(base_lo, b);
        base_hi = std::max(base_hi, b);
        ods_lo = std::min(ods_lo, o);
        ok = ok && o - b >= 0.10 && std::abs(b - 0.20) <= 0.02;
    }
    const double cached = static_cast<double>(tier_capacity_entries(p.hardware.cache_capacity, 1,
                                                                    p.dataset.tensor_bytes())) /
                          static_cast<double>(p.dataset.n_total);
    ok = ok && std::abs(cached - 0.2) < 1e-12;
    return {ok, fmt("10 seeds, %.0f%% cached: ODS stable hit rate >= %.4f, ", cached * 100, ods_lo) +
                    fmt("baseline in [%.4f, %.4f], min uplift %.1f pts", base_lo, base_hi, min_uplift * 100)};
}

// ------------------------------------------------------------------ 6

Outcome metadata() {
    const auto bytes = metadata_bytes(1'300'000, 8);
    return {bytes == 2'600'000, std::to_string(bytes) + " bytes for 1.3M samples and 8 jobs"};
}

// ------------------------------------------------------------------ 7

Outcome preprocessing() {
    SimConfig c = to_sim_config(bundled("inhouse"));
    c.dataset.n_total = 1'790'000;
    c.hardware.cache_capacity = 0;
    c.split = PartitionSplit{0, 0, 0};
    c.jobs = 4;
    c.epochs = 1;
    c.batch_size = 256;
    c.seed = 1;
    const auto m = run(c);
    const auto ops = preprocessing_ops(m);
    return {ops.decode_augment == 7'160'000 && ops.augment_only == 0,
            std::to_string(ops.decode_augment) + " decode+augment ops for 4 jobs x 1.79M samples"};
}

// ------------------------------------------------------------------ 8

Outcome consistency() {
    // Static tiers (decoded/encoded, or the non-evicting baseline) reproduce the model's mix.
    struct Case {
        const char* profile;
        PartitionSplit split;
        SamplerKind sampler;
    };
    const Case cases[] = {
        {"aws", {0.4, 0.6, 0}, SamplerKind::ods},
        {"aws", {0.4, 0.6, 0}, SamplerKind::baseline_uniform},
        {"azure", {0.5, 0.2, 0.3}, SamplerKind::baseline_uniform},
        {"inhouse-2x", {1, 0, 0}, SamplerKind::ods},
        {"openimages-azure", {0.3, 0.7, 0}, SamplerKind::ods},
    };
    double worst = 0;
    bool ok = true;
    for (const auto& k : cases) {
        SimConfig c = to_sim_config(bundled(k.profile), 7);
        c.dataset.n_total = 20'000;
        c.hardware.cache_capacity = 0.25 * 20'000 * c.dataset.tensor_bytes();
        c.split = k.split;
        c.sampler = k.sampler;
        c.jobs = 2;
        c.epochs = 3;
        c.batch_size = 64;
        const auto m = run(c);
        const auto model = dsi_overall(c.hardware, c.dataset, c.job, k.split);
        // the check only applies where the stable mix matches the model's counts
        for (const auto& r : m.records) {
            if (r.epoch == 1) continue;
            const bool aligned = r.served.augmented == model.counts.augmented &&
                                 r.served.decoded == model.counts.decoded &&
                                 r.served.encoded == model.counts.encoded && r.served.storage == model.counts.storage;
            if (!aligned) ok = false;
        }
        const double err = std::abs(m.stable->throughput - model.overall) / model.overall;
        worst = std::max(worst, err);
        ok = ok && err <= 0.01;
    }
    return {ok, fmt("5 configurations, worst relative gap %.2e", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"model anchors", model_anchors},
        {"planner split and runtime", planner_anchor},
        {"throughput curve shapes", curve_shapes},
        {"sampling protocol invariants", ods_invariants},
        {"hit-rate uplift over baseline", hit_rate_uplift},
        {"metadata accounting", metadata},
        {"preprocessing-op accounting", preprocessing},
        {"model/simulator consistency", consistency},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu %s: %s: %s [%.2fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
