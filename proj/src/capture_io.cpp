#include "bufprobe/capture_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace bufprobe {

namespace {

constexpr std::string_view kCaptureMagic = "# bufprobe-capture v1 point=";
constexpr std::string_view kColumnLine = "seq,timestamp_us,size_bytes";

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line,
                            const std::string& what) {
    throw capture_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw capture_error("cannot open " + path.string() + " for writing");
    return out;
}

std::string format_rate(double bps) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", bps);
    return buf;
}

nlohmann::ordered_json method_to_json(const MethodReport& m) {
    nlohmann::ordered_json j;
    j["ll"] = m.ll;
    j["ul"] = m.ul;
    j["unit"] = m.unit;
    j["r_in_bps"] = m.r_in_bps;
    j["r_out_bps"] = m.r_out_bps;
    if (m.l_buffer_bytes) j["l_buffer_bytes"] = *m.l_buffer_bytes;
    if (m.fill_rate_bps) j["fill_rate_bps"] = *m.fill_rate_bps;
    return j;
}

}  // namespace

std::string_view to_string(UnitVerdict verdict) {
    switch (verdict) {
        case UnitVerdict::packets: return "packets";
        case UnitVerdict::bytes: return "bytes";
        case UnitVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const MethodReport* CharacterizationReport::find(const std::string& name) const {
    for (const auto& [key, method] : methods) {
        if (key == name) return &method;
    }
    return nullptr;
}

double error_percent(double estimate, double truth) {
    if (truth == 0.0) throw config_error("ground truth value of zero has no relative error");
    double percent = 100.0 * std::fabs(estimate - truth) / std::fabs(truth);
    // Truncate to two decimals; the epsilon keeps exact two-decimal values
    // from slipping a cent under floating point.
    return std::trunc(percent * 100.0 + 1e-9) / 100.0;
}

void write_capture(const Capture& capture, const std::filesystem::path& path,
                   std::string_view experiment_id) {
    capture.validate();
    std::ofstream out = open_for_write(path);
    out << kCaptureMagic << to_string(capture.point);
    if (!experiment_id.empty()) out << " experiment=" << experiment_id;
    out << "\n" << kColumnLine << "\n";
    for (const PacketRecord& r : capture.records) {
        out << r.seq << ',' << format_timestamp_us(r.timestamp) << ',' << r.size_bytes << "\n";
    }
    out.flush();
    if (!out) throw capture_error("write to " + path.string() + " failed");
}

Capture read_capture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw capture_error("cannot open capture file " + path.string());

    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) fail_line(path, line_no, "empty file, expected header");
    if (line.rfind("# bufprobe-capture ", 0) != 0) {
        fail_line(path, line_no, "not a bufprobe capture file");
    }
    if (line.rfind(kCaptureMagic, 0) != 0) {
        fail_line(path, line_no, "unsupported capture format version");
    }
    std::string rest = line.substr(kCaptureMagic.size());
    std::string label = rest.substr(0, rest.find(' '));
    auto point = capture_point_from_string(label);
    if (!point) fail_line(path, line_no, "unknown capture point '" + label + "'");

    ++line_no;
    if (!std::getline(in, line) || line != kColumnLine) {
        fail_line(path, line_no, "expected column line '" + std::string(kColumnLine) + "'");
    }

    Capture capture;
    capture.point = *point;
    std::unordered_set<std::int64_t> seen;
    tick_t prev_ts = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            fail_line(path, line_no, "expected 3 comma-separated fields");
        }
        PacketRecord r;
        try {
            r.seq = std::stoll(line.substr(0, c1));
            r.timestamp = us_to_ticks(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
            r.size_bytes = std::stoll(line.substr(c2 + 1));
        } catch (const std::exception&) {
            fail_line(path, line_no, "malformed row '" + line + "'");
        }
        if (r.seq < 0) fail_line(path, line_no, "negative seq");
        if (r.size_bytes <= 0) fail_line(path, line_no, "non-positive size");
        if (r.timestamp < 0) fail_line(path, line_no, "negative timestamp");
        if (r.timestamp < prev_ts) fail_line(path, line_no, "timestamps decrease");
        if (!seen.insert(r.seq).second) {
            fail_line(path, line_no, "duplicate seq " + std::to_string(r.seq));
        }
        prev_ts = r.timestamp;
        capture.records.push_back(r);
    }
    return capture;
}

void write_occupancy_trace(const std::vector<OccupancyPoint>& trace,
                           const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << "# bufprobe-trace v1\ntimestamp_us,occupancy\n";
    for (const OccupancyPoint& p : trace) {
        out << format_timestamp_us(p.timestamp) << ',' << p.occupancy << "\n";
    }
    out.flush();
    if (!out) throw capture_error("write to " + path.string() + " failed");
}

std::string report_to_json(const CharacterizationReport& report) {
    nlohmann::ordered_json j;
    j["format"] = "bufprobe-report";
    j["version"] = 1;
    nlohmann::ordered_json methods = nlohmann::ordered_json::object();
    for (const auto& [name, method] : report.methods) {
        methods[name] = method_to_json(method);
    }
    j["methods"] = methods;
    if (report.unit_inference) j["unit_inference"] = to_string(*report.unit_inference);
    if (report.ground_truth) {
        nlohmann::ordered_json truth;
        truth["ll"] = report.ground_truth->ll;
        truth["ul"] = report.ground_truth->ul;
        truth["unit"] = to_string(report.ground_truth->unit);
        j["ground_truth"] = truth;

        // Errors are only meaningful when the estimate and the truth are
        // counted in the same unit.
        nlohmann::ordered_json errors = nlohmann::ordered_json::object();
        for (const auto& [name, method] : report.methods) {
            if (method.unit != to_string(report.ground_truth->unit)) continue;
            nlohmann::ordered_json e;
            e["ll"] = error_percent(static_cast<double>(method.ll),
                                    static_cast<double>(report.ground_truth->ll));
            e["ul"] = error_percent(static_cast<double>(method.ul),
                                    static_cast<double>(report.ground_truth->ul));
            errors[name] = e;
        }
        if (!errors.empty()) j["error_percent"] = errors;
    }
    return j.dump(2) + "\n";
}

std::string report_to_csv(const CharacterizationReport& report) {
    std::ostringstream out;
    out << "# bufprobe-report v1\n";
    if (report.unit_inference) {
        out << "# unit_inference=" << to_string(*report.unit_inference) << "\n";
    }
    if (report.ground_truth) {
        out << "# ground_truth ll=" << report.ground_truth->ll
            << " ul=" << report.ground_truth->ul
            << " unit=" << to_string(report.ground_truth->unit) << "\n";
    }
    out << "method,ll,ul,unit,r_in_bps,r_out_bps,error_ll_percent,error_ul_percent\n";
    for (const auto& [name, method] : report.methods) {
        out << name << ',' << method.ll << ',' << method.ul << ',' << method.unit << ','
            << format_rate(method.r_in_bps) << ',' << format_rate(method.r_out_bps) << ',';
        if (report.ground_truth && method.unit == to_string(report.ground_truth->unit)) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", error_percent(static_cast<double>(method.ll),
                          static_cast<double>(report.ground_truth->ll)));
            out << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.2f", error_percent(static_cast<double>(method.ul),
                          static_cast<double>(report.ground_truth->ul)));
            out << buf;
        } else {
            out << ',';
        }
        out << "\n";
    }
    return out.str();
}

void write_report(const CharacterizationReport& report, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << report_to_json(report);
    out.flush();
    if (!out) throw capture_error("write to " + path.string() + " failed");
}

void write_report_csv(const CharacterizationReport& report, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << report_to_csv(report);
    out.flush();
    if (!out) throw capture_error("write to " + path.string() + " failed");
}

}  // namespace bufprobe
