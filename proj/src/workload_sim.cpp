#include "dsi/workload_sim.hpp"

#include "dsi/ods_sampler.hpp"
#include "dsi/planner.hpp"
#include "dsi/uniform_sampler.hpp"

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace dsi {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

void fnv_mix(std::uint64_t& hash, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        hash ^= (value >> (8 * i)) & 0xffu;
        hash *= kFnvPrime;
    }
}

double tier_rate(Tier tier, const ModelOutput& model) {
    switch (tier) {
        case Tier::augmented: return model.augmented.samples_per_s;
        case Tier::decoded: return model.decoded.samples_per_s;
        case Tier::encoded: return model.encoded.samples_per_s;
        case Tier::storage: return model.storage.samples_per_s;
    }
    return 0;
}

std::uint64_t count_of(const TierCounts& c, Tier tier) {
    switch (tier) {
        case Tier::augmented: return c.augmented;
        case Tier::decoded: return c.decoded;
        case Tier::encoded: return c.encoded;
        case Tier::storage: return c.storage;
    }
    return 0;
}

constexpr Tier kAllTiers[] = {Tier::augmented, Tier::decoded, Tier::encoded, Tier::storage};

PhaseSummary summarize_phase(std::span<const JobEpochRecord> records, const ModelOutput& model) {
    PhaseSummary phase;
    double time_sum = 0;
    for (const auto& r : records) {
        phase.served += r.served;
        time_sum += r.epoch_time_s;
        ++phase.job_epochs;
    }
    phase.ops = preprocessing_ops(phase.served);
    const auto delivered = phase.served.delivered();
    phase.hit_rate = delivered == 0 ? 0 : static_cast<double>(phase.served.hits()) / static_cast<double>(delivered);
    phase.throughput = mix_throughput(phase.served, model);
    phase.mean_epoch_time_s = phase.job_epochs == 0 ? 0 : time_sum / static_cast<double>(phase.job_epochs);
    return phase;
}

}  // namespace

std::string_view to_string(SamplerKind kind) noexcept {
    return kind == SamplerKind::ods ? "ods" : "baseline";
}

SamplerKind parse_sampler_kind(std::string_view text) {
    if (text == "ods") return SamplerKind::ods;
    if (text == "baseline" || text == "baseline-uniform") return SamplerKind::baseline_uniform;
    throw std::invalid_argument("unknown sampler '" + std::string(text) + "' (expected ods or baseline)");
}

void SimConfig::validate() const {
    hardware.validate();
    dataset.validate();
    job.validate();
    if (split) split->validate();
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (sampler == SamplerKind::ods && jobs > OdsSampler::kMaxJobs) {
        throw std::invalid_argument("ods supports at most " + std::to_string(OdsSampler::kMaxJobs) + " jobs");
    }
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (dataset.n_total > std::numeric_limits<SampleId>::max()) {
        throw std::invalid_argument("n_total too large to simulate");
    }
}

void TierCounts::add(Tier tier, std::uint64_t n) noexcept {
    switch (tier) {
        case Tier::augmented: augmented += n; break;
        case Tier::decoded: decoded += n; break;
        case Tier::encoded: encoded += n; break;
        case Tier::storage: storage += n; break;
    }
}

TierCounts& TierCounts::operator+=(const TierCounts& other) noexcept {
    augmented += other.augmented;
    decoded += other.decoded;
    encoded += other.encoded;
    storage += other.storage;
    return *this;
}

PreprocessingOps preprocessing_ops(const TierCounts& served) noexcept {
    return {served.storage + served.encoded, served.decoded};
}

PreprocessingOps preprocessing_ops(const SimMetrics& metrics) noexcept {
    PreprocessingOps total;
    for (const auto& r : metrics.records) {
        total.decode_augment += r.ops.decode_augment;
        total.augment_only += r.ops.augment_only;
    }
    return total;
}

double mix_throughput(const TierCounts& served, const ModelOutput& model) noexcept {
    const auto delivered = static_cast<double>(served.delivered());
    if (delivered == 0) return 0;
    double rate = 0;
    for (Tier tier : kAllTiers) {
        const auto n = count_of(served, tier);
        if (n != 0) rate += static_cast<double>(n) / delivered * tier_rate(tier, model);
    }
    return rate;
}

double serial_time(const TierCounts& served, const ModelOutput& model) noexcept {
    double seconds = 0;
    for (Tier tier : kAllTiers) {
        const auto n = count_of(served, tier);
        if (n != 0) seconds += static_cast<double>(n) / tier_rate(tier, model);
    }
    return seconds;
}

SimMetrics run(const SimConfig& config) {
    config.validate();

    SimMetrics metrics;
    metrics.split = config.split ? *config.split : plan(config.hardware, config.dataset, config.job).best_split;
    metrics.model = dsi_overall(config.hardware, config.dataset, config.job, metrics.split);

    auto cache = TieredCache::for_split(config.hardware, config.dataset, metrics.split);
    std::unique_ptr<Sampler> sampler;
    OdsSampler* ods = nullptr;
    if (config.sampler == SamplerKind::ods) {
        auto owned = std::make_unique<OdsSampler>(std::move(cache), config.seed,
                                                  OdsOptions{config.eviction_threshold});
        ods = owned.get();
        sampler = std::move(owned);
    } else {
        sampler = std::make_unique<UniformSampler>(std::move(cache), config.seed);
    }
    for (std::uint32_t j = 0; j < config.jobs; ++j) sampler->register_job();

    const std::uint64_t n_total = config.dataset.n_total;
    struct Progress {
        JobEpochRecord record;
        bool finished = false;
    };
    std::vector<Progress> progress(config.jobs);
    for (std::uint32_t j = 0; j < config.jobs; ++j) {
        progress[j].record.job = j;
        progress[j].record.epoch = 1;
        progress[j].record.digest = kFnvOffset;
    }

    std::uint32_t finished = 0;
    while (finished < config.jobs) {
        for (std::uint32_t j = 0; j < config.jobs; ++j) {
            auto& p = progress[j];
            if (p.finished) continue;

            const auto request = sampler->next_request(j, config.batch_size);
            const auto response = sampler->request_batch(j, request);
            for (const auto& s : response.samples) {
                p.record.served.add(s.tier);
                fnv_mix(p.record.digest, (std::uint64_t{s.id} << 2) | static_cast<std::uint64_t>(s.tier));
            }
            sampler->maintain();

            if (p.record.served.delivered() < n_total) continue;

            auto& r = p.record;
            r.ops = preprocessing_ops(r.served);
            r.hit_rate = static_cast<double>(r.served.hits()) / static_cast<double>(r.served.delivered());
            r.throughput = mix_throughput(r.served, metrics.model);
            r.epoch_time_s = static_cast<double>(r.served.delivered()) / r.throughput;
            r.serial_time_s = serial_time(r.served, metrics.model);
            metrics.records.push_back(r);

            sampler->end_epoch(j);
            if (r.epoch == config.epochs) {
                p.finished = true;
                ++finished;
            } else {
                const std::uint32_t next_epoch = r.epoch + 1;
                r = JobEpochRecord{};
                r.job = j;
                r.epoch = next_epoch;
                r.digest = kFnvOffset;
            }
        }
    }

    std::vector<JobEpochRecord> first, stable;
    metrics.transcript_digest = kFnvOffset;
    for (const auto& r : metrics.records) {
        (r.epoch == 1 ? first : stable).push_back(r);
        fnv_mix(metrics.transcript_digest, r.digest);
    }
    metrics.first_epoch = summarize_phase(first, metrics.model);
    if (!stable.empty()) metrics.stable = summarize_phase(stable, metrics.model);
    metrics.refills = ods ? ods->refills() : 0;
    return metrics;
}

CompareRow summarize(const SimConfig& config, const SimMetrics& metrics) {
    CompareRow row;
    row.sampler = config.sampler;
    row.jobs = config.jobs;
    row.seed = config.seed;
    row.split = metrics.split;
    row.label = std::string(to_string(config.sampler)) + "/j" + std::to_string(config.jobs) + "/s" +
                std::to_string(config.seed);
    for (const auto& r : metrics.records) row.delivered += r.served.delivered();
    row.first_hit_rate = metrics.first_epoch.hit_rate;
    row.first_epoch_time_s = metrics.first_epoch.mean_epoch_time_s;
    if (metrics.stable) {
        row.stable_hit_rate = metrics.stable->hit_rate;
        row.stable_epoch_time_s = metrics.stable->mean_epoch_time_s;
    }
    row.ops = preprocessing_ops(metrics);
    row.digest = metrics.transcript_digest;
    return row;
}

std::vector<CompareRow> compare(std::span<const SimConfig> configs) {
    if (configs.empty()) throw std::invalid_argument("compare needs at least one config");
    std::vector<CompareRow> rows;
    rows.reserve(configs.size());
    for (const auto& config : configs) rows.push_back(summarize(config, run(config)));
    return rows;
}

}  // namespace dsi
