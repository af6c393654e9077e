// Experiment orchestration shared by the CLI and the tests: config files,
// flood matrices, unit inference and report aggregation.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bufprobe/method1.hpp"
#include "bufprobe/method2.hpp"
#include "bufprobe/report.hpp"
#include "bufprobe/simulator.hpp"
#include "bufprobe/types.hpp"

namespace bufprobe {

// Capture files for one analyze-only matrix entry.
struct CaptureSet {
    std::int64_t packet_size_bytes{0};
    std::optional<std::filesystem::path> in_path;
    std::optional<std::filesystem::path> out_path;
    std::optional<std::filesystem::path> dest_path;
};

struct ExperimentConfig {
    std::optional<BufferConfig> buffer;    // ground truth; enables simulation
    std::vector<FlowSpec> floods;
    std::vector<CaptureSet> capture_sets;    // analyze-only mode
    std::optional<GroundTruth> truth;        // explicit truth for analyze-only runs
    std::vector<std::int64_t> allowed_packet_sizes{1500, 800, 200};
    std::string experiment_id;
    std::filesystem::path out_dir{"bufprobe-out"};

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Capacity-unit verdict from upper-limit estimates taken at two or more
// packet sizes: stable packet counts mean a packet-counted buffer, stable
// byte totals a byte-counted one.
UnitVerdict infer_unit(const std::map<std::int64_t, double>& ul_pkts_by_size);

struct FloodRun {
    FlowSpec flood;
    SimResult sim;
    std::filesystem::path dir;    // empty unless captures were written
};

struct SimulateSummary {
    std::size_t flood_index{0};
    FlowSpec flood;
    std::size_t delivered{0};
    std::size_t dropped{0};
    bool overflowed{false};
    std::filesystem::path dir;
};

// Runs every flood through the simulator and writes the capture triple plus
// the occupancy trace under <out_dir>/flood_<k>_<size>B_<rate>bps/.
std::vector<SimulateSummary> run_simulate(const ExperimentConfig& config);

MethodReport method_report_from(const PhysicalAnalysis& analysis);
MethodReport method_report_from(const RemoteEstimate& estimate);

struct CharacterizeOptions {
    bool write_captures{false};
};

// Full matrix: simulate each flood when ground truth is configured,
// otherwise analyze the listed capture files; aggregate per-size estimates,
// infer the capacity unit and report headline limits from the largest
// packet size.
CharacterizationReport characterize(const ExperimentConfig& config,
                                    const CharacterizeOptions& options = {});

}  // namespace bufprobe
