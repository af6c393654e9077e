// Rate/time arithmetic and capture-level metrics.

#pragma once

#include <vector>

#include "bufprobe/types.hpp"

namespace bufprobe {

// Inter-packet gap, in microseconds, of a constant flood of
// packet_size_bytes packets at rate_bps.
double rate_to_gap_us(std::int64_t packet_size_bytes, std::int64_t rate_bps);

// Inverse of rate_to_gap_us.
double gap_to_rate_bps(std::int64_t packet_size_bytes, double gap_us);

// Send time of the k-th packet of a flood, rounded to the nearest tick.
// Each index is rounded independently from the exact rational k*size*8/rate,
// so long schedules accumulate no drift.
tick_t schedule_send_time(const FlowSpec& flow, std::int64_t k);

// One record per packet: seq 0..packet_count-1, constant size, send times
// spaced by the flood's inter-packet gap.
std::vector<PacketRecord> build_schedule(const FlowSpec& flow);

// Loss, delay, jitter, interarrival and goodput of `received` relative to
// `sent`. Both captures must share the seq namespace; a received seq that
// was never sent is an inconsistency.
CaptureMetrics compute_metrics(const Capture& sent, const Capture& received);

// Rate implied by the dispersion of a back-to-back record sequence:
// all bits after the first record over the first-to-last time span.
double dispersion_rate_bps(const std::vector<PacketRecord>& records);

// Most frequent packet size in a capture; ties resolve to the smaller size.
std::int64_t modal_size_bytes(const std::vector<PacketRecord>& records);

}  // namespace bufprobe
