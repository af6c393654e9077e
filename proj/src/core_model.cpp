#include "bufprobe/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace bufprobe {

namespace {

// Nearest-integer division for non-negative 128-bit numerators, ties up.
std::int64_t div_round_nearest(unsigned __int128 num, std::int64_t den) {
    unsigned __int128 d = static_cast<unsigned __int128>(den);
    return static_cast<std::int64_t>((num + d / 2) / d);
}

}  // namespace

double rate_to_gap_us(std::int64_t packet_size_bytes, std::int64_t rate_bps) {
    if (packet_size_bytes <= 0) throw config_error("packet size must be positive");
    if (rate_bps <= 0) throw config_error("rate must be positive");
    return static_cast<double>(packet_size_bytes) * 8.0 * 1e6 / static_cast<double>(rate_bps);
}

double gap_to_rate_bps(std::int64_t packet_size_bytes, double gap_us) {
    if (packet_size_bytes <= 0) throw config_error("packet size must be positive");
    if (!(gap_us > 0.0)) throw config_error("gap must be positive");
    return static_cast<double>(packet_size_bytes) * 8.0 * 1e6 / gap_us;
}

tick_t schedule_send_time(const FlowSpec& flow, std::int64_t k) {
    // k * size * 8 * ticks-per-second / rate, rounded once.
    unsigned __int128 num = static_cast<unsigned __int128>(k) *
                            static_cast<unsigned __int128>(flow.packet_size_bytes) * 8u *
                            static_cast<unsigned __int128>(kTicksPerSecond);
    return flow.start_time + div_round_nearest(num, flow.input_rate_bps);
}

std::vector<PacketRecord> build_schedule(const FlowSpec& flow) {
    flow.validate();
    std::vector<PacketRecord> schedule;
    schedule.reserve(static_cast<std::size_t>(flow.packet_count));
    for (std::int64_t k = 0; k < flow.packet_count; ++k) {
        schedule.push_back({k, schedule_send_time(flow, k), flow.packet_size_bytes});
    }
    return schedule;
}

CaptureMetrics compute_metrics(const Capture& sent, const Capture& received) {
    std::unordered_map<std::int64_t, tick_t> sent_time;
    sent_time.reserve(sent.records.size());
    for (const PacketRecord& r : sent.records) sent_time.emplace(r.seq, r.timestamp);

    CaptureMetrics metrics;
    metrics.loss_count = static_cast<std::int64_t>(sent.records.size()) -
                         static_cast<std::int64_t>(received.records.size());

    std::vector<double> delays;
    delays.reserve(received.records.size());
    std::int64_t received_bytes = 0;
    for (const PacketRecord& r : received.records) {
        auto it = sent_time.find(r.seq);
        if (it == sent_time.end()) {
            throw capture_error("received seq " + std::to_string(r.seq) +
                                " is absent from the sent capture");
        }
        delays.push_back(ticks_to_us(r.timestamp - it->second));
        received_bytes += r.size_bytes;
    }

    if (!delays.empty()) {
        double sum = 0.0;
        for (double d : delays) sum += d;
        metrics.mean_delay_us = sum / static_cast<double>(delays.size());
    }
    if (delays.size() >= 2) {
        double jitter_sum = 0.0;
        for (std::size_t i = 1; i < delays.size(); ++i) {
            jitter_sum += std::fabs(delays[i] - delays[i - 1]);
        }
        metrics.jitter_us = jitter_sum / static_cast<double>(delays.size() - 1);
    }

    const auto& rx = received.records;
    if (rx.size() >= 2) {
        double min_gap = 0.0, max_gap = 0.0, gap_sum = 0.0;
        for (std::size_t i = 1; i < rx.size(); ++i) {
            double gap = ticks_to_us(rx[i].timestamp - rx[i - 1].timestamp);
            if (i == 1 || gap < min_gap) min_gap = gap;
            if (i == 1 || gap > max_gap) max_gap = gap;
            gap_sum += gap;
        }
        metrics.interarrival = {min_gap, gap_sum / static_cast<double>(rx.size() - 1), max_gap};

        tick_t span = rx.back().timestamp - rx.front().timestamp;
        if (span > 0) {
            metrics.goodput_bps =
                static_cast<double>(received_bytes) * 8.0 / ticks_to_seconds(span);
        }
    }
    return metrics;
}

double dispersion_rate_bps(const std::vector<PacketRecord>& records) {
    if (records.size() < 2) {
        throw estimate_error("need at least two records to derive a rate from dispersion");
    }
    tick_t span = records.back().timestamp - records.front().timestamp;
    if (span <= 0) {
        throw estimate_error("record time span is zero; cannot derive a rate");
    }
    std::int64_t bits = 0;
    for (std::size_t i = 1; i < records.size(); ++i) bits += records[i].size_bytes * 8;
    return static_cast<double>(bits) / ticks_to_seconds(span);
}

std::int64_t modal_size_bytes(const std::vector<PacketRecord>& records) {
    if (records.empty()) throw estimate_error("cannot derive packet size from empty capture");
    std::map<std::int64_t, std::int64_t> counts;
    for (const PacketRecord& r : records) ++counts[r.size_bytes];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

}  // namespace bufprobe
