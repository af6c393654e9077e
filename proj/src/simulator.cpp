#include "bufprobe/simulator.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

namespace bufprobe {

namespace {

std::int64_t div_round_nearest(unsigned __int128 num, std::int64_t den) {
    unsigned __int128 d = static_cast<unsigned __int128>(den);
    return static_cast<std::int64_t>((num + d / 2) / d);
}

struct QueuedPacket {
    std::int64_t seq;
    std::int64_t size_bytes;
};

}  // namespace

tick_t apply_rate_profile(const RateProfile& profile, std::int64_t size_bytes,
                          tick_t service_start) {
    if (size_bytes <= 0) throw config_error("packet size must be positive");
    if (service_start < 0) throw config_error("service start must be non-negative");

    if (profile.end_time && service_start >= *profile.end_time) {
        throw config_error("service starts at or after the rate profile end");
    }

    // Work left, scaled so that rate_bps * ticks is directly comparable:
    // bits * ticks-per-second.
    unsigned __int128 remaining = static_cast<unsigned __int128>(size_bytes) * 8u *
                                  static_cast<unsigned __int128>(kTicksPerSecond);

    const auto& segs = profile.segments;
    std::size_t i = 0;
    while (i + 1 < segs.size() && segs[i + 1].start <= service_start) ++i;

    tick_t t = service_start;
    for (;; ++i) {
        std::int64_t rate = segs[i].rate_bps;
        bool last = (i + 1 == segs.size());
        tick_t seg_end = last ? (profile.end_time ? *profile.end_time
                                                  : std::numeric_limits<tick_t>::max())
                              : segs[i + 1].start;
        if (last && !profile.end_time) {
            tick_t dt = div_round_nearest(remaining, rate);
            return t + std::max<tick_t>(dt, 1);
        }
        unsigned __int128 capacity = static_cast<unsigned __int128>(rate) *
                                     static_cast<unsigned __int128>(seg_end - t);
        if (capacity >= remaining) {
            tick_t dt = div_round_nearest(remaining, rate);
            return t + std::max<tick_t>(dt, 1);
        }
        remaining -= capacity;
        t = seg_end;
        if (last) {
            throw config_error("rate profile ends at " + format_timestamp_us(*profile.end_time) +
                               " us before service completes");
        }
    }
}

SimResult simulate(const std::vector<PacketRecord>& schedule, const BufferConfig& config) {
    config.validate();
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i].size_bytes <= 0) {
            throw config_error("schedule entry " + std::to_string(i) + " has non-positive size");
        }
        if (i > 0 && schedule[i].timestamp <= schedule[i - 1].timestamp) {
            throw config_error("schedule times must strictly increase");
        }
        if (config.unit == CapacityUnit::bytes && schedule[i].size_bytes > config.upper_limit) {
            throw config_error("packet of " + std::to_string(schedule[i].size_bytes) +
                               " bytes exceeds the buffer capacity of " +
                               std::to_string(config.upper_limit) + " bytes");
        }
    }

    SimResult result;
    result.in_capture.point = CapturePoint::sut_in;
    result.out_capture.point = CapturePoint::sut_out;
    result.dest_capture.point = CapturePoint::destination;
    result.in_capture.records.reserve(schedule.size());

    std::deque<QueuedPacket> queue;
    std::int64_t occupancy = 0;
    bool dropping = false;
    bool serving = false;
    tick_t head_departure = 0;

    auto cost = [&config](std::int64_t size_bytes) {
        return config.unit == CapacityUnit::packets ? 1 : size_bytes;
    };

    auto depart_head = [&]() {
        QueuedPacket head = queue.front();
        queue.pop_front();
        occupancy -= cost(head.size_bytes);
        result.out_capture.records.push_back({head.seq, head_departure, head.size_bytes});
        result.occupancy_trace.push_back({head_departure, occupancy});
        if (queue.empty()) {
            serving = false;
        } else {
            head_departure =
                apply_rate_profile(config.output, queue.front().size_bytes, head_departure);
        }
    };

    for (const PacketRecord& arrival : schedule) {
        while (serving && head_departure <= arrival.timestamp) depart_head();

        result.in_capture.records.push_back(arrival);
        if (dropping && occupancy <= config.lower_limit) dropping = false;

        if (!dropping && occupancy + cost(arrival.size_bytes) <= config.upper_limit) {
            queue.push_back({arrival.seq, arrival.size_bytes});
            occupancy += cost(arrival.size_bytes);
            result.occupancy_trace.push_back({arrival.timestamp, occupancy});
            if (!serving) {
                serving = true;
                head_departure =
                    apply_rate_profile(config.output, arrival.size_bytes, arrival.timestamp);
            }
        } else {
            result.drops.push_back({arrival.seq, arrival.timestamp});
            dropping = true;
        }
    }
    while (serving) depart_head();

    result.dest_capture.records = result.out_capture.records;
    for (PacketRecord& r : result.dest_capture.records) r.timestamp += config.propagation_delay;
    return result;
}

SimResult classic_droptail(const std::vector<PacketRecord>& schedule,
                           const BufferConfig& config) {
    if (config.lower_limit != config.upper_limit) {
        throw config_error("classic drop-tail requires lower_limit == upper_limit");
    }
    return simulate(schedule, config);
}

}  // namespace bufprobe
