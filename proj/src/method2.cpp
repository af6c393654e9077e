#include "bufprobe/method2.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bufprobe/core_model.hpp"

namespace bufprobe {

namespace {

void require_strictly_increasing_seqs(const Capture& dest) {
    for (std::size_t i = 1; i < dest.records.size(); ++i) {
        if (dest.records[i].seq <= dest.records[i - 1].seq) {
            throw capture_error("destination seqs are not strictly increasing (reordering "
                                "is out of scope)");
        }
    }
}

}  // namespace

std::int64_t round_half_up(double value) {
    return static_cast<std::int64_t>(std::floor(value + 0.5));
}

EpochScan detect_loss_epochs(const Capture& dest,
                             std::optional<std::int64_t> expected_packet_count) {
    dest.validate();
    require_strictly_increasing_seqs(dest);

    EpochScan scan;
    const auto& rx = dest.records;
    for (std::size_t i = 1; i < rx.size(); ++i) {
        std::int64_t gap = rx[i].seq - rx[i - 1].seq - 1;
        if (gap > 0) {
            scan.epochs.push_back(
                {rx[i - 1].seq + 1, gap, rx[i - 1].timestamp, rx[i].timestamp});
        }
    }
    if (expected_packet_count && !rx.empty()) {
        std::int64_t tail = *expected_packet_count - 1 - rx.back().seq;
        if (tail > 0) scan.trailing_lost = tail;
    }
    return scan;
}

double estimate_r_out(const Capture& dest) {
    dest.validate();
    require_strictly_increasing_seqs(dest);
    const auto& rx = dest.records;

    // Longest run of consecutive seqs.
    std::size_t best_first = 0, best_len = 0;
    std::size_t run_first = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        if (i > 0 && rx[i].seq != rx[i - 1].seq + 1) run_first = i;
        std::size_t len = i - run_first + 1;
        if (len > best_len) {
            best_len = len;
            best_first = run_first;
        }
    }
    if (best_len < 2) {
        throw estimate_error("need at least two back-to-back receptions to estimate the "
                             "output rate");
    }
    std::vector<PacketRecord> burst(rx.begin() + static_cast<std::ptrdiff_t>(best_first),
                                    rx.begin() + static_cast<std::ptrdiff_t>(best_first + best_len));
    return dispersion_rate_bps(burst);
}

double r_in_from_counts(std::int64_t n_received, std::int64_t m_lost, double window_us,
                        std::int64_t packet_size_bytes) {
    if (n_received < 0 || m_lost < 0) throw config_error("packet counts must be non-negative");
    if (packet_size_bytes <= 0) throw config_error("packet size must be positive");
    if (!(window_us > 0.0)) throw estimate_error("window duration must be positive");
    return static_cast<double>(n_received + m_lost) * static_cast<double>(packet_size_bytes) *
           8.0 * 1e6 / window_us;
}

double estimate_r_in(const Capture& dest, tick_t window_start, tick_t window_end) {
    dest.validate();
    require_strictly_increasing_seqs(dest);
    if (window_end <= window_start) throw config_error("window end must follow window start");
    const auto& rx = dest.records;
    if (rx.empty() || window_end > rx.back().timestamp) {
        throw estimate_error("window extends past the last reception; the count of trailing "
                             "losses is unknown");
    }

    auto first = std::lower_bound(rx.begin(), rx.end(), window_start,
                                  [](const PacketRecord& r, tick_t t) { return r.timestamp < t; });
    auto last = std::upper_bound(rx.begin(), rx.end(), window_end,
                                 [](tick_t t, const PacketRecord& r) { return t < r.timestamp; });
    if (last - first < 2) {
        throw estimate_error("window covers fewer than two receptions");
    }
    const PacketRecord& a = *first;
    const PacketRecord& b = *(last - 1);

    // Half-open accounting: of the seq span [a, b), n landed and m were
    // lost, over the destination-side time from a to b.
    std::int64_t sent = b.seq - a.seq;
    std::int64_t n = static_cast<std::int64_t>(last - first) - 1;
    std::int64_t m = sent - n;
    return r_in_from_counts(n, m, ticks_to_us(b.timestamp - a.timestamp),
                            modal_size_bytes(rx));
}

TrMeasurement measure_tr(const Capture& dest, double r_out_bps) {
    if (!(r_out_bps > 0.0)) throw config_error("output rate must be positive");
    EpochScan scan = detect_loss_epochs(dest);
    if (scan.epochs.empty()) {
        throw estimate_error("no loss observed; the buffer never overflowed");
    }
    std::int64_t size = modal_size_bytes(dest.records);
    tick_t service = us_to_ticks(static_cast<double>(size) * 8.0 * 1e6 / r_out_bps);
    TrMeasurement tr;
    tr.t_r = scan.epochs.front().t_last_before - dest.records.front().timestamp + service;
    return tr;
}

double estimate_buffer_bytes(double t_r_us, double r_in_bps, double r_out_bps) {
    if (!(t_r_us > 0.0)) throw estimate_error("ramp time must be positive");
    if (!(r_out_bps > 0.0)) throw config_error("output rate must be positive");
    if (r_in_bps <= r_out_bps) {
        throw estimate_error("input rate does not exceed the output rate; the buffer "
                             "cannot overflow");
    }
    double r_in_Bps = r_in_bps / 8.0;
    double r_out_Bps = r_out_bps / 8.0;
    double denom = 1.0 / (r_in_Bps - r_out_Bps) + 1.0 / r_out_Bps;
    return (t_r_us * 1e-6) / denom;
}

Rational estimate_buffer_exact(const Rational& t_r_seconds, const Rational& r_in_Bps,
                               const Rational& r_out_Bps) {
    Rational fill = r_in_Bps - r_out_Bps;
    if (fill.num <= 0) {
        throw estimate_error("input rate does not exceed the output rate; the buffer "
                             "cannot overflow");
    }
    Rational denom = Rational(1) / fill + Rational(1) / r_out_Bps;
    return t_r_seconds / denom;
}

std::int64_t estimate_lower_limit(const std::vector<LossEpoch>& steady_epochs, double r_in_bps,
                                  double r_out_bps, std::int64_t ul_pkts) {
    if (steady_epochs.empty()) {
        throw estimate_error("no steady-state loss epoch; extend the flood so the buffer "
                             "overflows more than once");
    }
    if (!(r_in_bps > r_out_bps) || !(r_out_bps > 0.0)) {
        throw estimate_error("lower-limit estimation needs r_in > r_out > 0");
    }

    std::vector<std::int64_t> ms;
    ms.reserve(steady_epochs.size());
    for (const LossEpoch& e : steady_epochs) ms.push_back(e.m_lost);
    std::vector<std::int64_t> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    std::int64_t median = sorted[sorted.size() / 2];

    // The drop phase spans m+1 arrival gaps (from the last acceptance to
    // the next one) while the buffer loses ul-ll packets; the service phase
    // at the endpoints contributes a further (rho-2)/rho of a service time,
    // so the drained count inverts as (m + rho - 1) / rho.
    double rho = r_in_bps / r_out_bps;
    double delta_sum = 0.0;
    std::int64_t kept = 0;
    for (std::int64_t m : ms) {
        if (m > 3 * median) continue;    // rate-switch artifact
        delta_sum += (static_cast<double>(m) + rho - 1.0) / rho;
        ++kept;
    }
    if (kept == 0) throw estimate_error("all loss epochs were discarded as anomalous");

    std::int64_t drained = round_half_up(delta_sum / static_cast<double>(kept));
    return std::clamp<std::int64_t>(ul_pkts - drained, 0, ul_pkts);
}

RemoteEstimate analyze_remote(const Capture& dest) {
    EpochScan scan = detect_loss_epochs(dest);
    if (scan.epochs.empty()) {
        throw estimate_error("no overflow observed; raise the input rate or packet count");
    }

    RemoteEstimate est;
    est.r_out_bps = estimate_r_out(dest);

    if (scan.epochs.size() >= 2) {
        // Cycle-aligned window: both endpoints are the first reception after
        // an epoch, so the buffer state (and hence the queueing delay) is the
        // same at both and the destination-side span equals the send span.
        est.r_in_bps = estimate_r_in(dest, scan.epochs.front().t_first_after,
                                     scan.epochs.back().t_first_after);
    } else {
        est.r_in_bps = estimate_r_in(dest, dest.records.front().timestamp,
                                     dest.records.back().timestamp);
    }

    TrMeasurement tr = measure_tr(dest, est.r_out_bps);
    est.l_buffer_bytes = estimate_buffer_bytes(ticks_to_us(tr.t_r), est.r_in_bps, est.r_out_bps);
    std::int64_t size = modal_size_bytes(dest.records);
    est.ul_pkts = round_half_up(est.l_buffer_bytes / static_cast<double>(size));

    if (scan.epochs.size() < 2) {
        throw estimate_error("only one loss epoch; extend the flood to cover steady-state "
                             "cycles for the lower limit");
    }
    std::vector<LossEpoch> steady(scan.epochs.begin() + 1, scan.epochs.end());
    est.ll_pkts = estimate_lower_limit(steady, est.r_in_bps, est.r_out_bps, est.ul_pkts);
    return est;
}

}  // namespace bufprobe
