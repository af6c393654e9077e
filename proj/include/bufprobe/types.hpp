// Domain types shared by the simulator, the analyses and the CLI.
//
// All timestamps are integer ticks of 0.1 us. Keeping time integral makes
// event ordering exact and simulation results bit-reproducible; the I/O
// layer renders ticks as microseconds with one decimal digit.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bufprobe {

using tick_t = std::int64_t;

constexpr tick_t kTicksPerUs = 10;
constexpr std::int64_t kTicksPerSecond = 10'000'000;

inline double ticks_to_us(tick_t t) { return static_cast<double>(t) / kTicksPerUs; }
inline double ticks_to_seconds(tick_t t) { return static_cast<double>(t) / kTicksPerSecond; }
tick_t us_to_ticks(double us);

// "1200.0" style rendering used by the capture CSV format.
std::string format_timestamp_us(tick_t t);

// Invalid configuration, invalid argument values, inconsistent domain state.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable, malformed or mutually inconsistent capture data.
struct capture_error : std::runtime_error {
    explicit capture_error(const std::string& what) : std::runtime_error(what) {}
};

// The data is well formed but does not support the requested estimate
// (e.g. no overflow was observed). Carries advice for the operator.
struct estimate_error : std::runtime_error {
    explicit estimate_error(const std::string& what) : std::runtime_error(what) {}
};

enum class CapturePoint { source, sut_in, sut_out, destination };

std::string_view to_string(CapturePoint point);
std::optional<CapturePoint> capture_point_from_string(std::string_view label);

// One packet observation: flood-unique sequence id, observation time and
// on-wire size. Size is a single scalar; no header modelling.
struct PacketRecord {
    std::int64_t seq{0};
    tick_t timestamp{0};    // ticks of 0.1 us since experiment start
    std::int64_t size_bytes{0};

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

// Ordered packet observations at one measurement point.
struct Capture {
    CapturePoint point{CapturePoint::source};
    std::vector<PacketRecord> records;

    // Enforces non-decreasing timestamps, unique seqs, positive sizes.
    void validate() const;

    friend bool operator==(const Capture&, const Capture&) = default;
};

enum class CapacityUnit { packets, bytes };

std::string_view to_string(CapacityUnit unit);
std::optional<CapacityUnit> capacity_unit_from_string(std::string_view label);

struct RateSegment {
    tick_t start{0};
    std::int64_t rate_bps{0};

    friend bool operator==(const RateSegment&, const RateSegment&) = default;
};

// Piecewise-constant output rate. The last segment extends forever unless
// end_time is set, in which case service past end_time is a horizon error.
struct RateProfile {
    std::vector<RateSegment> segments;
    std::optional<tick_t> end_time;

    static RateProfile constant(std::int64_t rate_bps);

    void validate() const;
    std::int64_t rate_at(tick_t t) const;
    std::int64_t min_rate_bps() const;
    std::int64_t max_rate_bps() const;

    friend bool operator==(const RateProfile&, const RateProfile&) = default;
};

// A constant-size, constant-rate packet flood.
struct FlowSpec {
    std::int64_t packet_size_bytes{0};
    std::int64_t input_rate_bps{0};
    std::int64_t packet_count{0};
    tick_t start_time{0};

    void validate() const;
};

// Ground-truth model of the device under test: a FIFO buffer that stops
// accepting packets once full (upper limit) and resumes only after the
// occupancy has fallen to the lower limit.
struct BufferConfig {
    CapacityUnit unit{CapacityUnit::packets};
    std::int64_t upper_limit{0};
    std::int64_t lower_limit{0};
    RateProfile output;
    tick_t propagation_delay{0};    // SUT output to destination

    void validate() const;
};

struct InterarrivalStats {
    double min_us{0.0};
    double mean_us{0.0};
    double max_us{0.0};
};

struct CaptureMetrics {
    std::int64_t loss_count{0};
    double mean_delay_us{0.0};
    double jitter_us{0.0};    // mean absolute delta of consecutive delays
    InterarrivalStats interarrival;
    double goodput_bps{0.0};
};

}  // namespace bufprobe
