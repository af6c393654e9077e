#include "bufprobe/method1.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "bufprobe/core_model.hpp"

namespace bufprobe {

std::vector<MatchedPacket> match_captures(const Capture& in_cap, const Capture& out_cap) {
    in_cap.validate();
    out_cap.validate();

    std::unordered_map<std::int64_t, const PacketRecord*> out_by_seq;
    out_by_seq.reserve(out_cap.records.size());
    for (const PacketRecord& r : out_cap.records) out_by_seq.emplace(r.seq, &r);

    std::vector<MatchedPacket> matched;
    matched.reserve(in_cap.records.size());
    std::size_t matched_count = 0;
    for (const PacketRecord& in_rec : in_cap.records) {
        MatchedPacket m;
        m.seq = in_rec.seq;
        m.arrival = in_rec.timestamp;
        m.size_bytes = in_rec.size_bytes;
        auto it = out_by_seq.find(in_rec.seq);
        if (it != out_by_seq.end()) {
            if (it->second->timestamp < in_rec.timestamp) {
                throw capture_error("seq " + std::to_string(in_rec.seq) +
                                    " departs before it arrives");
            }
            m.departure = it->second->timestamp;
            ++matched_count;
        }
        matched.push_back(m);
    }
    if (matched_count != out_cap.records.size()) {
        throw capture_error("out-capture contains seqs absent from the in-capture");
    }
    return matched;
}

std::vector<OccupancySample> occupancy_samples(const std::vector<MatchedPacket>& matched) {
    std::vector<tick_t> departures;
    departures.reserve(matched.size());
    std::optional<tick_t> first_drop_arrival;
    for (const MatchedPacket& m : matched) {
        if (m.departure) {
            departures.push_back(*m.departure);
        } else if (!first_drop_arrival) {
            first_drop_arrival = m.arrival;
        }
    }
    std::sort(departures.begin(), departures.end());

    std::vector<OccupancySample> samples;
    samples.reserve(departures.size());
    for (const MatchedPacket& m : matched) {
        if (!m.departure) continue;
        auto lo = std::upper_bound(departures.begin(), departures.end(), m.arrival);
        auto hi = std::upper_bound(departures.begin(), departures.end(), *m.departure);
        OccupancySample s;
        s.seq = m.seq;
        s.occupancy_pkts = static_cast<std::int64_t>(hi - lo);
        s.phase = (first_drop_arrival && m.arrival > *first_drop_arrival)
                      ? OccupancyPhase::post_drop
                      : OccupancyPhase::filling;
        samples.push_back(s);
    }
    return samples;
}

OccupancySample occupancy_for(std::int64_t seq, const std::vector<MatchedPacket>& matched) {
    for (const MatchedPacket& m : matched) {
        if (m.seq != seq) continue;
        if (m.dropped()) {
            throw estimate_error("seq " + std::to_string(seq) +
                                 " was dropped; it has no occupancy sample");
        }
        for (const OccupancySample& s : occupancy_samples(matched)) {
            if (s.seq == seq) return s;
        }
    }
    throw estimate_error("seq " + std::to_string(seq) + " is not present in the matched list");
}

OccupancyLimits limits_from_occupancy(const std::vector<OccupancySample>& samples) {
    if (samples.empty()) throw estimate_error("no occupancy samples");

    bool saw_post_drop = false;
    for (const OccupancySample& s : samples) {
        if (s.phase == OccupancyPhase::post_drop) saw_post_drop = true;
    }
    if (!saw_post_drop) {
        throw estimate_error("no drops observed; raise the input rate or packet count "
                             "until the buffer overflows");
    }

    OccupancyLimits limits;
    double sum = 0.0;
    std::optional<std::int64_t> reacceptance_min;
    std::int64_t prev_seq = samples.front().seq;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const OccupancySample& s = samples[i];
        limits.ul_pkts = std::max(limits.ul_pkts, s.occupancy_pkts);
        sum += static_cast<double>(s.occupancy_pkts);
        // A seq gap between consecutive accepted packets is a drop run;
        // this sample is the first acceptance after it.
        if (i > 0 && s.seq > prev_seq + 1) {
            if (!reacceptance_min || s.occupancy_pkts < *reacceptance_min) {
                reacceptance_min = s.occupancy_pkts;
            }
        }
        prev_seq = s.seq;
    }
    if (!reacceptance_min) {
        throw estimate_error("drops observed but the flood ended before acceptance resumed; "
                             "raise the packet count");
    }
    limits.ll_pkts = *reacceptance_min - 1;
    limits.mean_occupancy_pkts = sum / static_cast<double>(samples.size());
    return limits;
}

double fill_rate_bps(const std::vector<MatchedPacket>& matched) {
    std::vector<OccupancySample> samples = occupancy_samples(matched);
    std::unordered_map<std::int64_t, const MatchedPacket*> by_seq;
    by_seq.reserve(matched.size());
    for (const MatchedPacket& m : matched) by_seq.emplace(m.seq, &m);

    struct Phase {
        std::size_t first, last;    // sample indices, inclusive
    };
    std::vector<Phase> phases;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (phases.empty() || samples[i].seq != samples[phases.back().last].seq + 1) {
            phases.push_back({i, i});
        } else {
            phases.back().last = i;
        }
    }

    std::optional<double> best_rate;
    tick_t best_span = 0;
    for (const Phase& p : phases) {
        const OccupancySample& a = samples[p.first];
        const OccupancySample& b = samples[p.last];
        std::int64_t delta_occ = b.occupancy_pkts - a.occupancy_pkts;
        tick_t span = by_seq.at(b.seq)->arrival - by_seq.at(a.seq)->arrival;
        if (delta_occ <= 0 || span <= 0) continue;
        if (span > best_span) {
            std::int64_t size = by_seq.at(a.seq)->size_bytes;
            best_span = span;
            best_rate = static_cast<double>(delta_occ * size) * 8.0 / ticks_to_seconds(span);
        }
    }
    if (!best_rate) {
        throw estimate_error("no drop-free filling interval; the buffer never built up");
    }
    return *best_rate;
}

PhysicalAnalysis analyze_physical(const Capture& in_cap, const Capture& out_cap) {
    std::vector<MatchedPacket> matched = match_captures(in_cap, out_cap);
    std::vector<OccupancySample> samples = occupancy_samples(matched);

    PhysicalAnalysis analysis;
    analysis.limits = limits_from_occupancy(samples);
    analysis.r_in_bps = dispersion_rate_bps(in_cap.records);
    analysis.r_out_bps = dispersion_rate_bps(out_cap.records);
    try {
        analysis.fill_rate_bps = fill_rate_bps(matched);
    } catch (const estimate_error&) {
        // The limit estimates stand on their own; the fill rate is optional.
    }
    return analysis;
}

}  // namespace bufprobe
