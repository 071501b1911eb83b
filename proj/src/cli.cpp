#include "dsi/cli.hpp"

#include "dsi/errors.hpp"
#include "dsi/planner.hpp"
#include "dsi/profile.hpp"
#include "dsi/workload_sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#ifndef DSI_PROFILE_DIR
#define DSI_PROFILE_DIR "profiles"
#endif

namespace dsi {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Thrown for bad flag values detected after CLI11 has parsed the command line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

std::string hex64(std::uint64_t v) {
    return fmt("%016llx", static_cast<unsigned long long>(v));
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("DSI_BENCH_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (errno != 0 || *end != '\0' || raw[0] == '-') {
        throw UsageError(std::string("DSI_BENCH_SEED is not an unsigned integer: '") + raw + "'");
    }
    return v;
}

PartitionSplit parse_split_flag(const std::string& text, const char* flag) {
    try {
        return SplitPercent::parse(text).fractions();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
}

std::string split_label(const PartitionSplit& s) {
    return SplitPercent{static_cast<int>(std::lround(s.x_encoded * 100)),
                        static_cast<int>(std::lround(s.x_decoded * 100)),
                        static_cast<int>(std::lround(s.x_augmented * 100))}
        .to_string();
}

struct CommonArgs {
    std::string profile;
    std::optional<double> cache_gb;
};

Profile load_with_overrides(const CommonArgs& args) {
    Profile p = load_profile(resolve_profile(args.profile));
    if (args.cache_gb) {
        if (!(*args.cache_gb >= 0) || !std::isfinite(*args.cache_gb)) {
            throw UsageError("--cache-gb must be a non-negative number");
        }
        p.hardware.cache_capacity = *args.cache_gb * 1e9;
    }
    return p;
}

void add_common(CLI::App& cmd, CommonArgs& args) {
    cmd.add_option("profile", args.profile, "Profile file or bundled profile name")->required();
    cmd.add_option("--cache-gb", args.cache_gb, "Override the cache capacity (GB)");
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
    CommonArgs common;
    bool grid = false;
};

void cmd_plan(const PlanArgs& args, std::ostream& out) {
    const Profile p = load_with_overrides(args.common);
    const PlanResult r = plan(p.hardware, p.dataset, p.job, PlanOptions{.keep_grid = args.grid});
    if (args.grid) {
        out << "split,encoded_pct,decoded_pct,augmented_pct,samples_per_s\n";
        for (const auto& g : *r.full_grid) {
            out << g.split.to_string() << ',' << g.split.encoded << ',' << g.split.decoded << ','
                << g.split.augmented << ',' << fmt("%.6f", g.samples_per_s) << '\n';
        }
        return;
    }
    const ModelOutput m = dsi_overall(p.hardware, p.dataset, p.job, r.best_split);
    out << "split " << r.best.to_string() << '\n';
    out << "predicted_samples_per_s " << fmt("%.3f", r.predicted_throughput) << '\n';
    const auto tier = [&](const char* name, const TierThroughput& t, std::uint64_t count) {
        out << fmt("  %-9s %12llu samples  %12.3f samples/s  limit %s\n", name,
                   static_cast<unsigned long long>(count), t.samples_per_s, std::string(to_string(t.limit)).c_str());
    };
    tier("augmented", m.augmented, m.counts.augmented);
    tier("decoded", m.decoded, m.counts.decoded);
    tier("encoded", m.encoded, m.counts.encoded);
    tier("storage", m.storage, m.counts.storage);
    out << "evaluated " << r.evaluated << " splits in " << fmt("%.3f", r.search_time_s * 1e3) << " ms\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    CommonArgs common;
    std::optional<std::uint32_t> jobs;
    std::optional<std::uint32_t> epochs;
    std::optional<std::uint32_t> batch_size;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> eviction_threshold;
    std::string sampler;
    std::string split;
    std::string format = "both";
};

ordered_json counts_json(ordered_json j, const TierCounts& c, const PreprocessingOps& ops) {
    j["delivered"] = c.delivered();
    j["augmented"] = c.augmented;
    j["decoded"] = c.decoded;
    j["encoded"] = c.encoded;
    j["storage"] = c.storage;
    j["decode_augment_ops"] = ops.decode_augment;
    j["augment_ops"] = ops.augment_only;
    return j;
}

void emit_phase(std::ostream& out, const char* sampler, const char* phase, const PhaseSummary& s) {
    ordered_json j;
    j["record"] = "phase";
    j["sampler"] = sampler;
    j["phase"] = phase;
    j["job_epochs"] = s.job_epochs;
    j = counts_json(std::move(j), s.served, s.ops);
    j["hit_rate"] = s.hit_rate;
    j["samples_per_s"] = s.throughput;
    j["mean_epoch_time_s"] = s.mean_epoch_time_s;
    out << j.dump() << '\n';
}

void emit_records(std::ostream& out, const SimConfig& config, const SimMetrics& m) {
    const std::string sampler(to_string(config.sampler));
    for (const auto& r : m.records) {
        ordered_json j;
        j["record"] = "job_epoch";
        j["sampler"] = sampler;
        j["job"] = r.job;
        j["epoch"] = r.epoch;
        j = counts_json(std::move(j), r.served, r.ops);
        j["hit_rate"] = r.hit_rate;
        j["samples_per_s"] = r.throughput;
        j["epoch_time_s"] = r.epoch_time_s;
        j["serial_time_s"] = r.serial_time_s;
        j["digest"] = hex64(r.digest);
        out << j.dump() << '\n';
    }
    emit_phase(out, sampler.c_str(), "first", m.first_epoch);
    if (m.stable) emit_phase(out, sampler.c_str(), "stable", *m.stable);

    ordered_json j;
    j["record"] = "run";
    j["sampler"] = sampler;
    j["split"] = split_label(m.split);
    j["jobs"] = config.jobs;
    j["epochs"] = config.epochs;
    j["batch_size"] = config.batch_size;
    j["seed"] = config.seed;
    j["n_total"] = config.dataset.n_total;
    j["predicted_samples_per_s"] = m.model.overall;
    j["refills"] = m.refills;
    j["digest"] = hex64(m.transcript_digest);
    out << j.dump() << '\n';
}

void emit_table(std::ostream& out, const std::vector<CompareRow>& rows) {
    out << fmt("%-10s %4s %7s %10s %10s %10s %14s %14s %14s\n", "sampler", "jobs", "split", "hit@1", "hit@stable",
               "ops", "epoch1_s", "stable_s", "digest");
    for (const auto& r : rows) {
        const std::string stable_hit = r.stable_hit_rate ? fmt("%.4f", *r.stable_hit_rate) : "-";
        const std::string stable_t = r.stable_epoch_time_s ? fmt("%.3f", *r.stable_epoch_time_s) : "-";
        out << fmt("%-10s %4u %7s %10.4f %10s %10llu %14.3f %14s %14s\n", std::string(to_string(r.sampler)).c_str(),
                   r.jobs, split_label(r.split).c_str(), r.first_hit_rate, stable_hit.c_str(),
                   static_cast<unsigned long long>(r.ops.total()), r.first_epoch_time_s, stable_t.c_str(),
                   hex64(r.digest).substr(0, 12).c_str());
    }
}

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    Profile p = load_with_overrides(args.common);
    if (args.jobs) p.sim.jobs = *args.jobs;
    if (args.epochs) p.sim.epochs = *args.epochs;
    if (args.batch_size) p.sim.batch_size = *args.batch_size;
    if (args.eviction_threshold) p.sim.eviction_threshold = *args.eviction_threshold;
    if (!args.split.empty()) {
        if (args.split == "auto") {
            p.sim.split.reset();
        } else {
            p.sim.split = parse_split_flag(args.split, "--split");
        }
    }

    std::uint64_t seed = 0;
    if (args.seed) {
        seed = *args.seed;
    } else if (p.sim.seed) {
        seed = *p.sim.seed;
    } else if (auto e = env_seed()) {
        seed = *e;
    }
    p.sim.seed = seed;

    std::vector<SamplerKind> kinds;
    if (args.sampler.empty()) {
        kinds.push_back(p.sim.sampler);
    } else if (args.sampler == "both") {
        kinds = {SamplerKind::ods, SamplerKind::baseline_uniform};
    } else {
        try {
            kinds.push_back(parse_sampler_kind(args.sampler));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--sampler: ") + e.what());
        }
    }

    std::vector<SimConfig> configs;
    for (auto kind : kinds) {
        SimConfig c = to_sim_config(p);
        c.sampler = kind;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        configs.push_back(c);
    }

    std::vector<CompareRow> rows;
    std::vector<SimMetrics> metrics;
    for (const auto& c : configs) {
        metrics.push_back(run(c));
        rows.push_back(summarize(c, metrics.back()));
    }
    const bool table = args.format != "jsonl";
    const bool lines = args.format != "table";
    if (table) emit_table(out, rows);
    if (table && lines) out << '\n';
    if (lines) {
        for (std::size_t i = 0; i < configs.size(); ++i) emit_records(out, configs[i], metrics[i]);
    }
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    CommonArgs common;
    std::vector<std::string> splits{"100-0-0", "0-100-0", "0-0-100", "50-50-0", "50-0-50", "0-50-50"};
    std::vector<double> sizes_gb{64, 128, 192, 256, 320, 384, 448, 512};
};

void cmd_sweep(const SweepArgs& args, std::ostream& out) {
    const Profile p = load_with_overrides(args.common);
    std::vector<PartitionSplit> splits;
    for (const auto& s : args.splits) splits.push_back(parse_split_flag(s, "--splits"));
    std::vector<std::uint64_t> sizes;
    for (double gb : args.sizes_gb) {
        if (!(gb > 0) || !std::isfinite(gb)) throw UsageError("--sizes: dataset sizes must be positive");
        const auto n = static_cast<std::uint64_t>(std::llround(gb * 1e9 / p.dataset.s_data));
        if (n == 0) throw UsageError("--sizes: " + fmt("%g", gb) + " GB holds no whole sample");
        sizes.push_back(n);
    }
    const auto cells = sweep(p.hardware, p.dataset, p.job, splits, sizes);
    out << "split,dataset_gb,n_total,samples_per_s\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double gb = args.sizes_gb[i % sizes.size()];
        out << split_label(cells[i].split) << ',' << fmt("%g", gb) << ',' << cells[i].n_total << ','
            << fmt("%.6f", cells[i].samples_per_s) << '\n';
    }
}

}  // namespace

std::filesystem::path bundled_profile_dir() {
    if (const char* env = std::getenv("DSI_BENCH_PROFILE_DIR"); env != nullptr && *env != '\0') return env;
    return DSI_PROFILE_DIR;
}

std::filesystem::path resolve_profile(std::string_view arg) {
    const std::filesystem::path direct(arg);
    std::error_code ec;
    if (std::filesystem::is_regular_file(direct, ec)) return direct;
    if (direct.has_parent_path()) return direct;
    auto bundled = bundled_profile_dir() / direct;
    if (!bundled.has_extension()) bundled += ".json";
    if (std::filesystem::is_regular_file(bundled, ec)) return bundled;
    return direct;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Data-ingestion throughput model, cache planner and sampling simulator", "dsi-bench"};
    app.require_subcommand(1);

    PlanArgs plan_args;
    auto* plan_cmd = app.add_subcommand("plan", "Pick the cache split that maximizes modeled throughput");
    add_common(*plan_cmd, plan_args.common);
    plan_cmd->add_flag("--grid", plan_args.grid, "Print every evaluated split as CSV");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate concurrent jobs sharing the tiered cache");
    add_common(*sim_cmd, sim_args.common);
    sim_cmd->add_option("--jobs", sim_args.jobs, "Concurrent jobs")->check(CLI::Range(1, 63));
    sim_cmd->add_option("--epochs", sim_args.epochs, "Epochs per job")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--batch-size", sim_args.batch_size, "Samples per request")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_args.seed, "RNG seed (default: profile, then DSI_BENCH_SEED, then 0)");
    sim_cmd->add_option("--sampler", sim_args.sampler, "ods, baseline or both");
    sim_cmd->add_option("--split", sim_args.split, "Cache split as E-D-A percents, or auto");
    sim_cmd->add_option("--eviction-threshold", sim_args.eviction_threshold, "ODS refcount threshold (0: jobs)");
    sim_cmd->add_option("--format", sim_args.format, "table, jsonl or both")
        ->check(CLI::IsMember({"table", "jsonl", "both"}));

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Throughput per split across dataset sizes, as CSV");
    add_common(*sweep_cmd, sweep_args.common);
    sweep_cmd->add_option("--splits", sweep_args.splits, "Comma-separated E-D-A splits")->delimiter(',');
    sweep_cmd->add_option("--sizes", sweep_args.sizes_gb, "Comma-separated dataset sizes in GB")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (plan_cmd->parsed()) cmd_plan(plan_args, out);
        if (sim_cmd->parsed()) cmd_simulate(sim_args, out);
        if (sweep_cmd->parsed()) cmd_sweep(sweep_args, out);
    } catch (const ProfileError& e) {
        err << "error: profile: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace dsi
