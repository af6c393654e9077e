// Shared test utilities: simulation invariant checks (independent of the
// simulator's internals — they only look at captures, drops and the trace),
// config builders and a scratch-directory guard.

#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "bufprobe/core_model.hpp"
#include "bufprobe/simulator.hpp"
#include "bufprobe/types.hpp"

namespace testutil {

using namespace bufprobe;

// Checks the structural invariants every simulation must satisfy:
// conservation, FIFO order, the occupancy bound, and the rule that no
// packet is accepted between a drop and the occupancy falling to the
// lower limit. Returns an empty string when everything holds.
inline std::string check_sim_invariants(const std::vector<PacketRecord>& schedule,
                                        const BufferConfig& config, const SimResult& result) {
    // Conservation: every scheduled seq appears in exactly one of out/drops.
    if (result.in_capture.records.size() != schedule.size()) return "in-capture size mismatch";
    if (result.out_capture.records.size() + result.drops.size() != schedule.size()) {
        return "out + drops != scheduled";
    }
    std::set<std::int64_t> seen;
    for (const auto& r : result.out_capture.records) seen.insert(r.seq);
    for (const auto& d : result.drops) {
        if (!seen.insert(d.seq).second) return "seq both departed and dropped";
    }
    for (const auto& r : schedule) {
        if (seen.count(r.seq) == 0) return "scheduled seq vanished";
    }

    // FIFO: departures keep arrival order (seqs strictly increase because
    // the schedule emits them in order).
    for (std::size_t i = 1; i < result.out_capture.records.size(); ++i) {
        if (result.out_capture.records[i].seq <= result.out_capture.records[i - 1].seq) {
            return "departure order violates FIFO";
        }
        if (result.out_capture.records[i].timestamp <
            result.out_capture.records[i - 1].timestamp) {
            return "departure timestamps decrease";
        }
    }

    // Occupancy bound.
    for (const auto& p : result.occupancy_trace) {
        if (p.occupancy > config.upper_limit) return "occupancy exceeded the upper limit";
        if (p.occupancy < 0) return "negative occupancy";
    }

    // Hysteresis: between any drop and the next acceptance the occupancy
    // must have fallen to the lower limit. Acceptance times are the
    // arrival times of packets that later departed.
    std::set<std::int64_t> dropped;
    for (const auto& d : result.drops) dropped.insert(d.seq);
    struct Event {
        tick_t t;
        int kind;    // 0 = drop, 1 = acceptance
    };
    std::vector<Event> events;
    for (const auto& r : result.in_capture.records) {
        events.push_back({r.timestamp, dropped.count(r.seq) ? 0 : 1});
    }
    std::size_t trace_i = 0;
    std::int64_t min_since_drop = -1;
    bool in_drop_phase = false;
    for (const Event& e : events) {
        // Advance the trace to just before/at this arrival; the trace holds
        // post-event occupancies, so departures at the same tick (which are
        // processed first) are already reflected.
        while (trace_i < result.occupancy_trace.size() &&
               result.occupancy_trace[trace_i].timestamp <= e.t) {
            if (in_drop_phase) {
                min_since_drop =
                    std::min(min_since_drop, result.occupancy_trace[trace_i].occupancy);
            }
            ++trace_i;
        }
        if (e.kind == 0) {
            if (!in_drop_phase) {
                in_drop_phase = true;
                min_since_drop = config.upper_limit;
            }
        } else if (in_drop_phase) {
            if (min_since_drop > config.lower_limit) {
                return "acceptance resumed before occupancy reached the lower limit";
            }
            in_drop_phase = false;
        }
    }
    return "";
}

inline BufferConfig make_buffer(std::int64_t ll, std::int64_t ul, std::int64_t rate_bps,
                                CapacityUnit unit = CapacityUnit::packets) {
    BufferConfig config;
    config.unit = unit;
    config.lower_limit = ll;
    config.upper_limit = ul;
    config.output = RateProfile::constant(rate_bps);
    return config;
}

inline FlowSpec make_flood(std::int64_t size_bytes, std::int64_t rate_bps,
                           std::int64_t count, tick_t start = 0) {
    FlowSpec flow;
    flow.packet_size_bytes = size_bytes;
    flow.input_rate_bps = rate_bps;
    flow.packet_count = count;
    flow.start_time = start;
    return flow;
}

inline SimResult run_flood(std::int64_t ll, std::int64_t ul, std::int64_t r_out_bps,
                           std::int64_t size_bytes, std::int64_t r_in_bps,
                           std::int64_t count) {
    return simulate(build_schedule(make_flood(size_bytes, r_in_bps, count)),
                    make_buffer(ll, ul, r_out_bps));
}

// Packet count that comfortably covers the initial fill plus a few
// steady-state drop cycles.
inline std::int64_t flood_count_for(std::int64_t ul, double rate_ratio, int cycles = 4) {
    double fill = static_cast<double>(ul) * rate_ratio / (rate_ratio - 1.0);
    double per_cycle = static_cast<double>(ul) * (rate_ratio + rate_ratio / (rate_ratio - 1.0));
    return static_cast<std::int64_t>(fill + per_cycle * cycles) + 50;
}

// Self-cleaning scratch directory under the system temp dir.
class ScratchDir {
  public:
    explicit ScratchDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("bufprobe-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

}  // namespace testutil
