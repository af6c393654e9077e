// Discrete-event emulation of the system under test: a FIFO buffer that
// rejects arrivals once full and accepts again only after draining to the
// lower limit, serviced at a configurable (possibly time-varying) rate.

#pragma once

#include <vector>

#include "bufprobe/types.hpp"

namespace bufprobe {

struct DropRecord {
    std::int64_t seq{0};
    tick_t timestamp{0};

    friend bool operator==(const DropRecord&, const DropRecord&) = default;
};

struct OccupancyPoint {
    tick_t timestamp{0};
    std::int64_t occupancy{0};    // in the buffer's capacity unit

    friend bool operator==(const OccupancyPoint&, const OccupancyPoint&) = default;
};

struct SimResult {
    Capture in_capture;      // every arriving packet, drops included
    Capture out_capture;     // departures, stamped at service completion
    Capture dest_capture;    // out_capture shifted by the propagation delay
    std::vector<DropRecord> drops;
    std::vector<OccupancyPoint> occupancy_trace;    // one point per change

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

// Departure time of a packet whose service starts at service_start: the
// instant by which the profile has transmitted size_bytes*8 bits, rounded
// to the nearest tick (at least one tick of service).
tick_t apply_rate_profile(const RateProfile& profile, std::int64_t size_bytes,
                          tick_t service_start);

// Runs the schedule through the buffer model. Arrival and departure events
// sharing a tick are ordered departure first. Arrivals are accepted while
// the packet fits under the upper limit; the first rejected arrival starts
// a dropping phase that ends once occupancy has fallen to the lower limit.
SimResult simulate(const std::vector<PacketRecord>& schedule, const BufferConfig& config);

// Degenerate case lower_limit == upper_limit: a standard tail-drop FIFO
// where each arrival is independently accepted iff it fits.
SimResult classic_droptail(const std::vector<PacketRecord>& schedule,
                           const BufferConfig& config);

}  // namespace bufprobe
