// Physical-access analysis: match the captures taken on both sides of the
// device per sequence number, reconstruct per-packet queue occupancy and
// read the buffer limits and fill rate off the reconstruction.

#pragma once

#include <optional>
#include <vector>

#include "bufprobe/types.hpp"

namespace bufprobe {

struct MatchedPacket {
    std::int64_t seq{0};
    tick_t arrival{0};
    std::optional<tick_t> departure;    // absent if the packet was dropped
    std::int64_t size_bytes{0};

    bool dropped() const { return !departure.has_value(); }
    std::optional<tick_t> delay() const {
        if (!departure) return std::nullopt;
        return *departure - arrival;
    }
};

enum class OccupancyPhase { filling, post_drop };

// Packets in queue at the moment seq was accepted, the sampled packet
// included: the departures falling in (arrival, departure] of seq.
struct OccupancySample {
    std::int64_t seq{0};
    std::int64_t occupancy_pkts{0};
    OccupancyPhase phase{OccupancyPhase::filling};
};

// One MatchedPacket per in-capture record, in arrival order. Every
// out-capture seq must exist in the in-capture.
std::vector<MatchedPacket> match_captures(const Capture& in_cap, const Capture& out_cap);

std::vector<OccupancySample> occupancy_samples(const std::vector<MatchedPacket>& matched);

OccupancySample occupancy_for(std::int64_t seq, const std::vector<MatchedPacket>& matched);

struct OccupancyLimits {
    std::int64_t ll_pkts{0};
    std::int64_t ul_pkts{0};
    double mean_occupancy_pkts{0.0};    // diagnostic; not a limit estimate
};

// ul: max occupancy over all samples. ll: min occupancy observed by the
// first packet accepted after each drop run, minus the packet itself.
// Requires contiguous flood seq numbering so drop runs appear as gaps.
OccupancyLimits limits_from_occupancy(const std::vector<OccupancySample>& samples);

// Net buffer fill rate (input minus output) over the longest drop-free
// interval in which occupancy rises.
double fill_rate_bps(const std::vector<MatchedPacket>& matched);

struct PhysicalAnalysis {
    OccupancyLimits limits;
    double r_in_bps{0.0};
    double r_out_bps{0.0};
    std::optional<double> fill_rate_bps;
};

PhysicalAnalysis analyze_physical(const Capture& in_cap, const Capture& out_cap);

}  // namespace bufprobe
