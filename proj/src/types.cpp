#include "bufprobe/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace bufprobe {

tick_t us_to_ticks(double us) {
    double ticks = us * kTicksPerUs;
    if (!std::isfinite(ticks)) {
        throw config_error("time value is not finite");
    }
    return static_cast<tick_t>(std::llround(ticks));
}

std::string format_timestamp_us(tick_t t) {
    tick_t whole = t / kTicksPerUs;
    tick_t tenth = t % kTicksPerUs;
    if (tenth < 0) {    // negative timestamps only appear in hostile input
        tenth = -tenth;
        if (whole == 0) {
            return "-" + std::to_string(whole) + "." + std::to_string(tenth);
        }
    }
    return std::to_string(whole) + "." + std::to_string(tenth);
}

std::string_view to_string(CapturePoint point) {
    switch (point) {
        case CapturePoint::source: return "source";
        case CapturePoint::sut_in: return "sut_in";
        case CapturePoint::sut_out: return "sut_out";
        case CapturePoint::destination: return "destination";
    }
    return "unknown";
}

std::optional<CapturePoint> capture_point_from_string(std::string_view label) {
    if (label == "source") return CapturePoint::source;
    if (label == "sut_in") return CapturePoint::sut_in;
    if (label == "sut_out") return CapturePoint::sut_out;
    if (label == "destination") return CapturePoint::destination;
    return std::nullopt;
}

std::string_view to_string(CapacityUnit unit) {
    return unit == CapacityUnit::packets ? "packets" : "bytes";
}

std::optional<CapacityUnit> capacity_unit_from_string(std::string_view label) {
    if (label == "packets") return CapacityUnit::packets;
    if (label == "bytes") return CapacityUnit::bytes;
    return std::nullopt;
}

void Capture::validate() const {
    std::unordered_set<std::int64_t> seen;
    seen.reserve(records.size());
    tick_t prev = -1;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PacketRecord& r = records[i];
        if (r.seq < 0) {
            throw capture_error("record " + std::to_string(i) + ": negative seq");
        }
        if (r.size_bytes <= 0) {
            throw capture_error("record " + std::to_string(i) + ": non-positive size");
        }
        if (r.timestamp < 0) {
            throw capture_error("record " + std::to_string(i) + ": negative timestamp");
        }
        if (r.timestamp < prev) {
            throw capture_error("record " + std::to_string(i) + ": timestamps decrease");
        }
        if (!seen.insert(r.seq).second) {
            throw capture_error("record " + std::to_string(i) + ": duplicate seq " +
                                std::to_string(r.seq));
        }
        prev = r.timestamp;
    }
}

RateProfile RateProfile::constant(std::int64_t rate_bps) {
    RateProfile profile;
    profile.segments.push_back({0, rate_bps});
    return profile;
}

void RateProfile::validate() const {
    if (segments.empty()) {
        throw config_error("rate profile has no segments");
    }
    if (segments.front().start != 0) {
        throw config_error("rate profile must start at time 0");
    }
    tick_t prev = -1;
    for (const RateSegment& seg : segments) {
        if (seg.rate_bps <= 0) {
            throw config_error("rate profile segment has non-positive rate");
        }
        if (seg.start <= prev) {
            throw config_error("rate profile segment starts must strictly increase");
        }
        prev = seg.start;
    }
    if (end_time && *end_time <= segments.back().start) {
        throw config_error("rate profile end time precedes its last segment");
    }
}

std::int64_t RateProfile::rate_at(tick_t t) const {
    std::int64_t rate = segments.front().rate_bps;
    for (const RateSegment& seg : segments) {
        if (seg.start > t) break;
        rate = seg.rate_bps;
    }
    return rate;
}

std::int64_t RateProfile::min_rate_bps() const {
    std::int64_t best = segments.front().rate_bps;
    for (const RateSegment& seg : segments) best = std::min(best, seg.rate_bps);
    return best;
}

std::int64_t RateProfile::max_rate_bps() const {
    std::int64_t best = segments.front().rate_bps;
    for (const RateSegment& seg : segments) best = std::max(best, seg.rate_bps);
    return best;
}

void FlowSpec::validate() const {
    if (packet_size_bytes <= 0) throw config_error("flow packet size must be positive");
    if (input_rate_bps <= 0) throw config_error("flow input rate must be positive");
    if (packet_count < 1) throw config_error("flow packet count must be at least 1");
    if (start_time < 0) throw config_error("flow start time must be non-negative");
    // Gap below one tick would collapse adjacent send times.
    if (static_cast<double>(packet_size_bytes) * 8.0 * kTicksPerSecond <
        static_cast<double>(input_rate_bps)) {
        throw config_error("input rate too high for 0.1 us timestamp resolution");
    }
}

void BufferConfig::validate() const {
    if (lower_limit <= 0) throw config_error("buffer lower limit must be positive");
    if (lower_limit > upper_limit) {
        throw config_error("buffer lower limit exceeds upper limit");
    }
    if (propagation_delay < 0) throw config_error("propagation delay must be non-negative");
    output.validate();
}

}  // namespace bufprobe
