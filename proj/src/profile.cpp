#include "dsi/profile.hpp"

#include "dsi/errors.hpp"
#include "dsi/planner.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <vector>

namespace dsi {

namespace {

using nlohmann::json;

struct Unit {
    std::string_view suffix;
    double to_canonical;
};

constexpr Unit kBandwidthUnits[] = {
    {"b_per_s", 1},       {"kb_per_s", 1e3},          {"mb_per_s", 1e6},         {"gb_per_s", 1e9},
    {"mbit_per_s", 1e6 / 8}, {"gbit_per_s", 1e9 / 8},
};
constexpr Unit kSizeUnits[] = {{"b", 1}, {"kb", 1e3}, {"mb", 1e6}, {"gb", 1e9}, {"tb", 1e12}};
constexpr Unit kRateUnits[] = {{"samples_per_s", 1}};

enum class Kind { bandwidth, size, rate, count, ratio, flag, text };

std::span<const Unit> units_for(Kind kind) {
    switch (kind) {
        case Kind::bandwidth: return kBandwidthUnits;
        case Kind::size: return kSizeUnits;
        case Kind::rate: return kRateUnits;
        default: return {};
    }
}

/// One field of a section: how it is spelled, whether it must be present, and where it lands.
struct Field {
    std::string_view base;
    Kind kind;
    bool required;
    std::function<void(const json&, double scale, const std::string& path)> assign;
};

std::string join_path(std::string_view section, std::string_view key) {
    return std::string(section) + "." + std::string(key);
}

double read_number(const json& value, const std::string& path) {
    if (!value.is_number()) throw ProfileError(path, "expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw ProfileError(path, "expected a finite number");
    return v;
}

std::uint64_t read_count(const json& value, const std::string& path) {
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    if (value.is_number_integer()) {
        if (value.get<std::int64_t>() < 0) throw ProfileError(path, "expected a non-negative integer");
        return static_cast<std::uint64_t>(value.get<std::int64_t>());
    }
    if (value.is_number_float()) {
        // Allow 1.3e6-style literals as long as they are whole.
        const double v = value.get<double>();
        if (v >= 0 && std::floor(v) == v && v < 1.8e19) return static_cast<std::uint64_t>(v);
    }
    throw ProfileError(path, "expected a non-negative integer");
}

std::uint32_t read_count32(const json& value, const std::string& path) {
    const auto v = read_count(value, path);
    if (v > std::numeric_limits<std::uint32_t>::max()) throw ProfileError(path, "value too large");
    return static_cast<std::uint32_t>(v);
}

bool read_flag(const json& value, const std::string& path) {
    if (!value.is_boolean()) throw ProfileError(path, "expected true or false");
    return value.get<bool>();
}

std::string read_text(const json& value, const std::string& path) {
    if (!value.is_string()) throw ProfileError(path, "expected a string");
    return value.get<std::string>();
}

void parse_section(const json& doc, std::string_view section, bool section_required, std::vector<Field> fields) {
    const std::string section_name(section);
    if (!doc.contains(section_name)) {
        if (section_required) throw ProfileError(section_name, "missing required section");
        for (const auto& f : fields) {
            if (f.required) throw ProfileError(join_path(section, f.base), "missing required key");
        }
        return;
    }
    const json& body = doc.at(section_name);
    if (!body.is_object()) throw ProfileError(section_name, "expected an object");

    std::map<std::string_view, std::string> matched;  // field base -> key that set it
    for (const auto& [key, value] : body.items()) {
        const std::string path = join_path(section, key);
        const Field* hit = nullptr;
        double scale = 1;
        for (const auto& f : fields) {
            const auto units = units_for(f.kind);
            if (units.empty()) {
                if (key == f.base) hit = &f;
            } else if (key.size() > f.base.size() + 1 && key.compare(0, f.base.size(), f.base) == 0 &&
                       key[f.base.size()] == '_') {
                const std::string_view suffix = std::string_view(key).substr(f.base.size() + 1);
                for (const auto& u : units) {
                    if (suffix == u.suffix) {
                        hit = &f;
                        scale = u.to_canonical;
                    }
                }
                if (!hit) {
                    std::string expected;
                    for (const auto& u : units) expected += (expected.empty() ? "" : ", ") + std::string(u.suffix);
                    throw ProfileError(path, "unknown unit suffix (expected one of: " + expected + ")");
                }
            }
            if (hit) break;
        }
        if (!hit) throw ProfileError(path, "unknown key");
        if (auto it = matched.find(hit->base); it != matched.end()) {
            throw ProfileError(path, "duplicates " + join_path(section, it->second));
        }
        matched.emplace(hit->base, key);
        hit->assign(value, scale, path);
    }
    for (const auto& f : fields) {
        if (f.required && !matched.contains(f.base)) {
            std::string hint;
            if (!units_for(f.kind).empty()) {
                hint = " (e.g. " + std::string(f.base) + "_" + std::string(units_for(f.kind).front().suffix) + ")";
            }
            throw ProfileError(join_path(section, f.base), "missing required key" + hint);
        }
    }
}

Field number_field(std::string_view base, Kind kind, double& target, bool required = true) {
    return {base, kind, required, [&target](const json& v, double scale, const std::string& path) {
                target = read_number(v, path) * scale;
            }};
}

template <typename Check>
void checked(std::string_view section, Check&& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        throw ProfileError(std::string(section), e.what());
    }
}

std::string mapping_name(CommParticipantMapping m) {
    return m == CommParticipantMapping::nodes_for_network ? "nodes-for-network" : "gpus-for-network";
}

std::string split_name(const std::optional<PartitionSplit>& split) {
    if (!split) return "auto";
    return SplitPercent{static_cast<int>(std::lround(split->x_encoded * 100)),
                        static_cast<int>(std::lround(split->x_decoded * 100)),
                        static_cast<int>(std::lround(split->x_augmented * 100))}
        .to_string();
}

}  // namespace

Profile parse_profile(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ProfileError("", std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ProfileError("", "profile must be a JSON object");

    for (const auto& [key, value] : doc.items()) {
        if (key != "name" && key != "hardware" && key != "dataset" && key != "job" && key != "sim") {
            throw ProfileError(key, "unknown key");
        }
    }

    Profile p;
    if (doc.contains("name")) p.name = read_text(doc.at("name"), "name");

    auto& hw = p.hardware;
    parse_section(doc, "hardware", true,
                  {
                      number_field("t_gpu", Kind::rate, hw.t_gpu),
                      number_field("t_decode_augment", Kind::rate, hw.t_decode_augment),
                      number_field("t_augment", Kind::rate, hw.t_augment),
                      number_field("b_nic", Kind::bandwidth, hw.b_nic),
                      number_field("b_pcie", Kind::bandwidth, hw.b_pcie),
                      number_field("b_cache", Kind::bandwidth, hw.b_cache),
                      number_field("b_storage", Kind::bandwidth, hw.b_storage),
                      number_field("cache_capacity", Kind::size, hw.cache_capacity),
                      {"nodes", Kind::count, true,
                       [&hw](const json& v, double, const std::string& path) { hw.nodes = read_count32(v, path); }},
                      {"gpus_per_node", Kind::count, true,
                       [&hw](const json& v, double, const std::string& path) {
                           hw.gpus_per_node = read_count32(v, path);
                       }},
                      {"nvlink_intra", Kind::flag, false,
                       [&hw](const json& v, double, const std::string& path) { hw.nvlink_intra = read_flag(v, path); }},
                      {"nvlink_inter", Kind::flag, false,
                       [&hw](const json& v, double, const std::string& path) { hw.nvlink_inter = read_flag(v, path); }},
                      {"comm_participant_mapping", Kind::text, false,
                       [&hw](const json& v, double, const std::string& path) {
                           const auto s = read_text(v, path);
                           if (s == "nodes-for-network") {
                               hw.comm_mapping = CommParticipantMapping::nodes_for_network;
                           } else if (s == "gpus-for-network") {
                               hw.comm_mapping = CommParticipantMapping::gpus_for_network;
                           } else {
                               throw ProfileError(path, "expected nodes-for-network or gpus-for-network");
                           }
                       }},
                  });

    auto& ds = p.dataset;
    parse_section(doc, "dataset", true,
                  {
                      {"n_total", Kind::count, true,
                       [&ds](const json& v, double, const std::string& path) { ds.n_total = read_count(v, path); }},
                      number_field("s_data", Kind::size, ds.s_data),
                      {"inflation", Kind::ratio, true,
                       [&ds](const json& v, double, const std::string& path) { ds.inflation = read_number(v, path); }},
                  });

    parse_section(doc, "job", true, {number_field("model_size", Kind::size, p.job.model_size)});

    auto& sim = p.sim;
    auto count_into = [](std::uint32_t& target) {
        return [&target](const json& v, double, const std::string& path) { target = read_count32(v, path); };
    };
    parse_section(doc, "sim", false,
                  {
                      {"jobs", Kind::count, false, count_into(sim.jobs)},
                      {"batch_size", Kind::count, false, count_into(sim.batch_size)},
                      {"epochs", Kind::count, false, count_into(sim.epochs)},
                      {"eviction_threshold", Kind::count, false, count_into(sim.eviction_threshold)},
                      {"seed", Kind::count, false,
                       [&sim](const json& v, double, const std::string& path) { sim.seed = read_count(v, path); }},
                      {"sampler", Kind::text, false,
                       [&sim](const json& v, double, const std::string& path) {
                           try {
                               sim.sampler = parse_sampler_kind(read_text(v, path));
                           } catch (const std::invalid_argument& e) {
                               throw ProfileError(path, e.what());
                           }
                       }},
                      {"split", Kind::text, false,
                       [&sim](const json& v, double, const std::string& path) {
                           const auto s = read_text(v, path);
                           if (s == "auto") {
                               sim.split.reset();
                               return;
                           }
                           try {
                               sim.split = SplitPercent::parse(s).fractions();
                           } catch (const std::invalid_argument& e) {
                               throw ProfileError(path, e.what());
                           }
                       }},
                  });

    checked("hardware", [&] { p.hardware.validate(); });
    checked("dataset", [&] { p.dataset.validate(); });
    checked("job", [&] { p.job.validate(); });
    checked("sim", [&] {
        if (sim.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
        if (sim.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (sim.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    });
    return p;
}

Profile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ProfileError("", "cannot open profile " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_profile(buffer.str());
}

std::string serialize_profile(const Profile& p) {
    nlohmann::ordered_json doc;
    if (!p.name.empty()) doc["name"] = p.name;

    const auto& hw = p.hardware;
    auto& h = doc["hardware"];
    h["t_gpu_samples_per_s"] = hw.t_gpu;
    h["t_decode_augment_samples_per_s"] = hw.t_decode_augment;
    h["t_augment_samples_per_s"] = hw.t_augment;
    h["b_nic_b_per_s"] = hw.b_nic;
    h["b_pcie_b_per_s"] = hw.b_pcie;
    h["b_cache_b_per_s"] = hw.b_cache;
    h["b_storage_b_per_s"] = hw.b_storage;
    h["cache_capacity_b"] = hw.cache_capacity;
    h["nodes"] = hw.nodes;
    h["gpus_per_node"] = hw.gpus_per_node;
    h["nvlink_intra"] = hw.nvlink_intra;
    h["nvlink_inter"] = hw.nvlink_inter;
    h["comm_participant_mapping"] = mapping_name(hw.comm_mapping);

    auto& d = doc["dataset"];
    d["n_total"] = p.dataset.n_total;
    d["s_data_b"] = p.dataset.s_data;
    d["inflation"] = p.dataset.inflation;

    doc["job"]["model_size_b"] = p.job.model_size;

    auto& s = doc["sim"];
    s["jobs"] = p.sim.jobs;
    s["batch_size"] = p.sim.batch_size;
    s["epochs"] = p.sim.epochs;
    if (p.sim.seed) s["seed"] = *p.sim.seed;
    s["sampler"] = std::string(to_string(p.sim.sampler));
    s["split"] = split_name(p.sim.split);
    s["eviction_threshold"] = p.sim.eviction_threshold;
    return doc.dump(2) + "\n";
}

SimConfig to_sim_config(const Profile& profile, std::uint64_t seed_fallback) {
    SimConfig c;
    c.hardware = profile.hardware;
    c.dataset = profile.dataset;
    c.job = profile.job;
    c.jobs = profile.sim.jobs;
    c.split = profile.sim.split;
    c.batch_size = profile.sim.batch_size;
    c.epochs = profile.sim.epochs;
    c.seed = profile.sim.seed.value_or(seed_fallback);
    c.sampler = profile.sim.sampler;
    c.eviction_threshold = profile.sim.eviction_threshold;
    return c;
}

}  // namespace dsi
