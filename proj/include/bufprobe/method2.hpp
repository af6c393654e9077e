// Remote analysis: everything is derived from the destination capture
// alone. Losses show up as sequence gaps; the time from the first
// reception to the gap onset, together with the input and output rates,
// yields the buffer size, and steady-state drop cycles yield the lower
// limit.

#pragma once

#include <optional>
#include <vector>

#include "bufprobe/rational.hpp"
#include "bufprobe/types.hpp"

namespace bufprobe {

// One maximal run of consecutively missing seqs, bracketed by receptions.
struct LossEpoch {
    std::int64_t first_lost_seq{0};
    std::int64_t m_lost{0};
    tick_t t_last_before{0};
    tick_t t_first_after{0};
};

struct EpochScan {
    std::vector<LossEpoch> epochs;
    // Losses after the last reception form an open epoch whose extent is
    // only known when the caller supplies the flood's packet count.
    std::optional<std::int64_t> trailing_lost;
};

EpochScan detect_loss_epochs(const Capture& dest,
                             std::optional<std::int64_t> expected_packet_count = std::nullopt);

// Service rate from the dispersion of the longest gap-free reception burst;
// departures are back to back while the buffer stays occupied.
double estimate_r_out(const Capture& dest);

// Input rate from a destination-side window: (received + lost) packets
// carried in the window over its duration.
double r_in_from_counts(std::int64_t n_received, std::int64_t m_lost, double window_us,
                        std::int64_t packet_size_bytes);

// Applies the count-based estimate to the receptions inside
// [window_start, window_end]. The window must close at or before the last
// reception; past it the number of lost packets is unknowable.
double estimate_r_in(const Capture& dest, tick_t window_start, tick_t window_end);

// Time from the first reception to the onset of the first loss, plus one
// service time so the first packet's own traversal does not bias the value.
struct TrMeasurement {
    tick_t t_r{0};
};

TrMeasurement measure_tr(const Capture& dest, double r_out_bps);

// Buffer size in bytes implied by t_r: the ramp splits into the time to
// fill at (r_in - r_out) and the time the last accepted packet needs to
// cross the full buffer at r_out.
double estimate_buffer_bytes(double t_r_us, double r_in_bps, double r_out_bps);

// Same algebra on exact rationals; rates in bytes per second, t_r in
// seconds. Returns the buffer size in bytes.
Rational estimate_buffer_exact(const Rational& t_r_seconds, const Rational& r_in_Bps,
                               const Rational& r_out_Bps);

// During a drop phase the buffer drains from UL to LL at r_out while the
// m lost packets arrive at r_in, so with rho = r_in/r_out each steady epoch
// implies ul - ll = (m + rho - 1) / rho; the rho-1 term compensates the
// service phase at the drop-run endpoints. Epochs with anomalous m (over
// 3x the median) are discarded as rate-switch artifacts.
std::int64_t estimate_lower_limit(const std::vector<LossEpoch>& steady_epochs, double r_in_bps,
                                  double r_out_bps, std::int64_t ul_pkts);

std::int64_t round_half_up(double value);

struct RemoteEstimate {
    double r_out_bps{0.0};
    double r_in_bps{0.0};
    double l_buffer_bytes{0.0};
    std::int64_t ul_pkts{0};
    std::int64_t ll_pkts{0};
};

// Full remote pipeline over a destination capture. Needs at least two loss
// epochs: the first anchors the upper limit, later ones the lower limit.
RemoteEstimate analyze_remote(const Capture& dest);

}  // namespace bufprobe
