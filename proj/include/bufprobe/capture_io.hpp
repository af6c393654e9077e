// Stable on-disk formats: capture CSV v1, occupancy-trace CSV v1 and the
// report JSON/CSV documents. Analyses run on these files whether they were
// produced by the simulator or by external tooling.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bufprobe/report.hpp"
#include "bufprobe/simulator.hpp"
#include "bufprobe/types.hpp"

namespace bufprobe {

// # bufprobe-capture v1 point=<label>[ experiment=<id>]
// seq,timestamp_us,size_bytes
// <seq>,<us with one decimal>,<bytes>
void write_capture(const Capture& capture, const std::filesystem::path& path,
                   std::string_view experiment_id = "");

// Parses capture CSV v1. Rejects unknown versions, malformed rows,
// duplicate seqs and non-monotone timestamps, naming the offending line.
Capture read_capture(const std::filesystem::path& path);

// # bufprobe-trace v1
// timestamp_us,occupancy
void write_occupancy_trace(const std::vector<OccupancyPoint>& trace,
                           const std::filesystem::path& path);

// Canonical JSON rendering of a report; byte-stable for identical inputs.
std::string report_to_json(const CharacterizationReport& report);

// Flat CSV rendering: one row per method.
std::string report_to_csv(const CharacterizationReport& report);

void write_report(const CharacterizationReport& report, const std::filesystem::path& path);
void write_report_csv(const CharacterizationReport& report, const std::filesystem::path& path);

}  // namespace bufprobe
