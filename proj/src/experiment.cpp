#include "bufprobe/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bufprobe/capture_io.hpp"
#include "bufprobe/core_model.hpp"

namespace bufprobe {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::filesystem::path& path, const std::string& what) {
    throw config_error(path.string() + ": " + what);
}

std::int64_t require_int(const json& j, const char* key, const std::filesystem::path& path) {
    if (!j.contains(key) || !j[key].is_number()) {
        config_fail(path, std::string("missing or non-numeric field '") + key + "'");
    }
    return j[key].get<std::int64_t>();
}

RateProfile parse_profile(const json& buffer, const std::filesystem::path& path) {
    RateProfile profile;
    if (buffer.contains("output_profile")) {
        for (const json& seg : buffer["output_profile"]) {
            RateSegment s;
            s.start = us_to_ticks(seg.value("start_us", 0.0));
            s.rate_bps = require_int(seg, "rate_bps", path);
            profile.segments.push_back(s);
        }
        if (buffer.contains("output_end_us")) {
            profile.end_time = us_to_ticks(buffer["output_end_us"].get<double>());
        }
    } else if (buffer.contains("output_rate_bps")) {
        profile = RateProfile::constant(require_int(buffer, "output_rate_bps", path));
    } else {
        config_fail(path, "buffer needs 'output_rate_bps' or 'output_profile'");
    }
    return profile;
}

GroundTruth parse_truth(const json& j, const std::filesystem::path& path) {
    GroundTruth truth;
    truth.ll = require_int(j, "ll", path);
    truth.ul = require_int(j, "ul", path);
    std::string unit = j.value("unit", "packets");
    auto parsed = capacity_unit_from_string(unit);
    if (!parsed) config_fail(path, "unknown capacity unit '" + unit + "'");
    truth.unit = *parsed;
    return truth;
}

std::string flood_dir_name(std::size_t index, const FlowSpec& flood) {
    std::ostringstream name;
    name << "flood_" << index << "_" << flood.packet_size_bytes << "B_" << flood.input_rate_bps
         << "bps";
    return name.str();
}

struct SizeEstimates {
    std::optional<PhysicalAnalysis> physical;
    std::optional<RemoteEstimate> remote;
    std::int64_t physical_rate{-1};    // input rate the estimate came from
    std::int64_t remote_rate{-1};
};

}  // namespace

void ExperimentConfig::validate() const {
    if (buffer) {
        buffer->validate();
        if (floods.empty()) throw config_error("experiment lists no floods");
    } else if (capture_sets.empty()) {
        throw config_error("experiment has neither a buffer model nor capture files");
    }
    for (const FlowSpec& flood : floods) {
        flood.validate();
        if (std::find(allowed_packet_sizes.begin(), allowed_packet_sizes.end(),
                      flood.packet_size_bytes) == allowed_packet_sizes.end()) {
            throw config_error("flood packet size " + std::to_string(flood.packet_size_bytes) +
                               " is not in the declared packet size set");
        }
    }
    for (const CaptureSet& set : capture_sets) {
        if (set.packet_size_bytes <= 0) {
            throw config_error("capture set needs a positive packet size");
        }
        bool physical = set.in_path && set.out_path;
        if (!physical && !set.dest_path) {
            throw config_error("capture set needs in+out paths or a dest path");
        }
    }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        config_fail(path, std::string("invalid JSON: ") + e.what());
    }

    ExperimentConfig config;
    config.experiment_id = doc.value("experiment", "");
    if (doc.contains("out_dir")) config.out_dir = doc["out_dir"].get<std::string>();
    if (doc.contains("allowed_packet_sizes")) {
        config.allowed_packet_sizes.clear();
        for (const json& s : doc["allowed_packet_sizes"]) {
            config.allowed_packet_sizes.push_back(s.get<std::int64_t>());
        }
    }
    if (doc.contains("buffer")) {
        const json& b = doc["buffer"];
        BufferConfig buffer;
        std::string unit = b.value("unit", "packets");
        auto parsed_unit = capacity_unit_from_string(unit);
        if (!parsed_unit) config_fail(path, "unknown capacity unit '" + unit + "'");
        buffer.unit = *parsed_unit;
        buffer.upper_limit = require_int(b, "upper_limit", path);
        buffer.lower_limit = require_int(b, "lower_limit", path);
        buffer.propagation_delay = us_to_ticks(b.value("propagation_delay_us", 0.0));
        buffer.output = parse_profile(b, path);
        config.buffer = buffer;
    }
    if (doc.contains("truth")) config.truth = parse_truth(doc["truth"], path);
    if (doc.contains("floods")) {
        for (const json& f : doc["floods"]) {
            FlowSpec flood;
            flood.packet_size_bytes = require_int(f, "packet_size_bytes", path);
            flood.input_rate_bps = require_int(f, "input_rate_bps", path);
            flood.packet_count = require_int(f, "packet_count", path);
            flood.start_time = us_to_ticks(f.value("start_us", 0.0));
            config.floods.push_back(flood);
        }
    }
    if (doc.contains("captures")) {
        for (const json& c : doc["captures"]) {
            CaptureSet set;
            set.packet_size_bytes = require_int(c, "packet_size_bytes", path);
            if (c.contains("in")) set.in_path = c["in"].get<std::string>();
            if (c.contains("out")) set.out_path = c["out"].get<std::string>();
            if (c.contains("dest")) set.dest_path = c["dest"].get<std::string>();
            config.capture_sets.push_back(set);
        }
    }
    config.validate();
    return config;
}

UnitVerdict infer_unit(const std::map<std::int64_t, double>& ul_pkts_by_size) {
    if (ul_pkts_by_size.size() < 2) {
        throw estimate_error("unit inference needs estimates for at least two packet sizes");
    }
    double pkt_min = 0.0, pkt_max = 0.0, byte_min = 0.0, byte_max = 0.0;
    bool first = true;
    for (const auto& [size, ul] : ul_pkts_by_size) {
        if (!(ul > 0.0)) throw estimate_error("unit inference needs positive estimates");
        double bytes = ul * static_cast<double>(size);
        if (first) {
            pkt_min = pkt_max = ul;
            byte_min = byte_max = bytes;
            first = false;
        } else {
            pkt_min = std::min(pkt_min, ul);
            pkt_max = std::max(pkt_max, ul);
            byte_min = std::min(byte_min, bytes);
            byte_max = std::max(byte_max, bytes);
        }
    }
    constexpr double kRatioTolerance = 1.10;
    if (pkt_max / pkt_min <= kRatioTolerance) return UnitVerdict::packets;
    if (byte_max / byte_min <= kRatioTolerance) return UnitVerdict::bytes;
    return UnitVerdict::inconclusive;
}

std::vector<SimulateSummary> run_simulate(const ExperimentConfig& config) {
    config.validate();
    if (!config.buffer) throw config_error("simulation needs a buffer model in the config");

    std::vector<SimulateSummary> summaries;
    for (std::size_t i = 0; i < config.floods.size(); ++i) {
        const FlowSpec& flood = config.floods[i];
        SimResult sim = simulate(build_schedule(flood), *config.buffer);

        SimulateSummary summary;
        summary.flood_index = i;
        summary.flood = flood;
        summary.delivered = sim.out_capture.records.size();
        summary.dropped = sim.drops.size();
        summary.overflowed = !sim.drops.empty();
        summary.dir = config.out_dir / flood_dir_name(i, flood);

        write_capture(sim.in_capture, summary.dir / "in.csv", config.experiment_id);
        write_capture(sim.out_capture, summary.dir / "out.csv", config.experiment_id);
        write_capture(sim.dest_capture, summary.dir / "dest.csv", config.experiment_id);
        write_occupancy_trace(sim.occupancy_trace, summary.dir / "trace.csv");
        summaries.push_back(summary);
    }
    return summaries;
}

MethodReport method_report_from(const PhysicalAnalysis& analysis) {
    MethodReport m;
    m.ll = analysis.limits.ll_pkts;
    m.ul = analysis.limits.ul_pkts;
    m.unit = "packets";
    m.r_in_bps = analysis.r_in_bps;
    m.r_out_bps = analysis.r_out_bps;
    m.fill_rate_bps = analysis.fill_rate_bps;
    return m;
}

MethodReport method_report_from(const RemoteEstimate& estimate) {
    MethodReport m;
    m.ll = estimate.ll_pkts;
    m.ul = estimate.ul_pkts;
    m.unit = "packets";
    m.r_in_bps = estimate.r_in_bps;
    m.r_out_bps = estimate.r_out_bps;
    m.l_buffer_bytes = estimate.l_buffer_bytes;
    return m;
}

CharacterizationReport characterize(const ExperimentConfig& config,
                                    const CharacterizeOptions& options) {
    config.validate();

    std::map<std::int64_t, SizeEstimates> by_size;
    std::string first_failure;

    auto note_failure = [&first_failure](const std::exception& e) {
        if (first_failure.empty()) first_failure = e.what();
    };

    if (config.buffer) {
        for (std::size_t i = 0; i < config.floods.size(); ++i) {
            const FlowSpec& flood = config.floods[i];
            SimResult sim = simulate(build_schedule(flood), *config.buffer);
            if (options.write_captures) {
                std::filesystem::path dir = config.out_dir / flood_dir_name(i, flood);
                write_capture(sim.in_capture, dir / "in.csv", config.experiment_id);
                write_capture(sim.out_capture, dir / "out.csv", config.experiment_id);
                write_capture(sim.dest_capture, dir / "dest.csv", config.experiment_id);
                write_occupancy_trace(sim.occupancy_trace, dir / "trace.csv");
            }
            SizeEstimates& slot = by_size[flood.packet_size_bytes];
            try {
                PhysicalAnalysis phys = analyze_physical(sim.in_capture, sim.out_capture);
                if (flood.input_rate_bps > slot.physical_rate) {
                    slot.physical = phys;
                    slot.physical_rate = flood.input_rate_bps;
                }
            } catch (const estimate_error& e) {
                note_failure(e);
            }
            try {
                RemoteEstimate remote = analyze_remote(sim.dest_capture);
                if (flood.input_rate_bps > slot.remote_rate) {
                    slot.remote = remote;
                    slot.remote_rate = flood.input_rate_bps;
                }
            } catch (const estimate_error& e) {
                note_failure(e);
            }
        }
    } else {
        for (const CaptureSet& set : config.capture_sets) {
            SizeEstimates& slot = by_size[set.packet_size_bytes];
            try {
                if (set.in_path && set.out_path) {
                    PhysicalAnalysis phys =
                        analyze_physical(read_capture(*set.in_path), read_capture(*set.out_path));
                    if (!slot.physical) slot.physical = phys;
                }
                if (set.dest_path) {
                    RemoteEstimate remote = analyze_remote(read_capture(*set.dest_path));
                    if (!slot.remote) slot.remote = remote;
                }
            } catch (const estimate_error& e) {
                note_failure(e);
            }
        }
    }

    // Headline estimates come from the largest packet size that produced
    // any result; large packets give the most accurate limits.
    std::optional<std::int64_t> headline_size;
    for (const auto& [size, slot] : by_size) {
        if ((slot.physical || slot.remote) && (!headline_size || size > *headline_size)) {
            headline_size = size;
        }
    }
    if (!headline_size) {
        throw estimate_error(first_failure.empty() ? "no flood produced an estimate"
                                                   : first_failure);
    }

    CharacterizationReport report;
    const SizeEstimates& headline = by_size[*headline_size];
    if (headline.physical) {
        report.methods.emplace_back("method1", method_report_from(*headline.physical));
    }
    if (headline.remote) {
        report.methods.emplace_back("method2", method_report_from(*headline.remote));
    }

    std::map<std::int64_t, double> ul_by_size;
    for (const auto& [size, slot] : by_size) {
        if (slot.physical) {
            ul_by_size[size] = static_cast<double>(slot.physical->limits.ul_pkts);
        } else if (slot.remote) {
            ul_by_size[size] = static_cast<double>(slot.remote->ul_pkts);
        }
    }
    if (ul_by_size.size() >= 2) {
        UnitVerdict verdict = infer_unit(ul_by_size);
        report.unit_inference = verdict;
        if (verdict == UnitVerdict::bytes) {
            // Re-express the counted limits in the buffer's own unit.
            for (auto& [name, method] : report.methods) {
                method.ll *= *headline_size;
                method.ul *= *headline_size;
                method.unit = "bytes";
            }
        }
    }

    if (config.buffer) {
        report.ground_truth =
            GroundTruth{config.buffer->lower_limit, config.buffer->upper_limit,
                        config.buffer->unit};
    } else if (config.truth) {
        report.ground_truth = config.truth;
    }
    return report;
}

}  // namespace bufprobe
