// bufprobe: flood a simulated bottleneck buffer and estimate its size,
// limits and rates from packet captures, with or without access to both
// sides of the device.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bufprobe/capture_io.hpp"
#include "bufprobe/core_model.hpp"
#include "bufprobe/experiment.hpp"
#include "bufprobe/method1.hpp"
#include "bufprobe/method2.hpp"
#include "bufprobe/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;       // bad usage, config or input files
constexpr int kExitNoEstimate = 3;  // analysis impossible on this data

struct AnalyzeArgs {
    std::string mode;
    std::vector<std::string> capture_paths;
    std::string out_dir = ".";
    std::string format = "json";
    std::int64_t truth_ll = 0;
    std::int64_t truth_ul = 0;
    std::string truth_unit = "packets";
    bool has_truth = false;
};

void print_summary(const bufprobe::CharacterizationReport& report) {
    const bufprobe::MethodReport* m = report.find("method1");
    if (!m) m = report.find("method2");
    if (!m) return;
    std::string unit = m->unit;
    if (report.unit_inference) unit = std::string(to_string(*report.unit_inference));
    std::cout << "LL=" << m->ll << " UL=" << m->ul << " unit=" << unit << "\n";
}

void emit_report(const bufprobe::CharacterizationReport& report,
                 const std::filesystem::path& out_dir, const std::string& format) {
    std::filesystem::path path =
        out_dir / (format == "csv" ? "report.csv" : "report.json");
    if (format == "csv") {
        bufprobe::write_report_csv(report, path);
    } else {
        bufprobe::write_report(report, path);
    }
    print_summary(report);
    std::cout << "report written to " << path.string() << "\n";
}

int run_simulate(const std::string& config_path, const std::string& out_override) {
    bufprobe::ExperimentConfig config = bufprobe::load_experiment_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    auto summaries = bufprobe::run_simulate(config);
    for (const auto& s : summaries) {
        std::cout << "flood " << s.flood_index << ": size=" << s.flood.packet_size_bytes
                  << "B rate=" << s.flood.input_rate_bps << "bps sent="
                  << s.flood.packet_count << " delivered=" << s.delivered << " dropped="
                  << s.dropped;
        if (!s.overflowed) std::cout << " (no overflow)";
        std::cout << " -> " << s.dir.string() << "\n";
    }
    return kExitOk;
}

int run_analyze(const AnalyzeArgs& args) {
    bufprobe::CharacterizationReport report;

    if (args.mode == "physical") {
        if (args.capture_paths.size() != 2) {
            std::cerr << "physical mode needs exactly two captures: in and out\n";
            return kExitUsage;
        }
        bufprobe::Capture first = bufprobe::read_capture(args.capture_paths[0]);
        bufprobe::Capture second = bufprobe::read_capture(args.capture_paths[1]);
        // Use the point labels when they identify the sides; otherwise trust
        // the argument order (in first).
        if (first.point == bufprobe::CapturePoint::sut_out &&
            second.point == bufprobe::CapturePoint::sut_in) {
            std::swap(first, second);
        }
        bufprobe::PhysicalAnalysis analysis = bufprobe::analyze_physical(first, second);
        report.methods.emplace_back("method1", bufprobe::method_report_from(analysis));
    } else {
        if (args.capture_paths.size() != 1) {
            std::cerr << "remote mode needs exactly one destination capture\n";
            return kExitUsage;
        }
        bufprobe::Capture dest = bufprobe::read_capture(args.capture_paths[0]);
        bufprobe::RemoteEstimate estimate = bufprobe::analyze_remote(dest);
        report.methods.emplace_back("method2", bufprobe::method_report_from(estimate));
    }

    if (args.has_truth) {
        auto unit = bufprobe::capacity_unit_from_string(args.truth_unit);
        if (!unit) {
            std::cerr << "unknown truth unit '" << args.truth_unit << "'\n";
            return kExitUsage;
        }
        report.ground_truth = bufprobe::GroundTruth{args.truth_ll, args.truth_ul, *unit};
    }
    emit_report(report, args.out_dir, args.format);
    return kExitOk;
}

int run_characterize(const std::string& config_path, const std::string& out_override,
                     const std::string& format) {
    bufprobe::ExperimentConfig config = bufprobe::load_experiment_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    bufprobe::CharacterizeOptions options;
    options.write_captures = config.buffer.has_value();
    bufprobe::CharacterizationReport report = bufprobe::characterize(config, options);
    emit_report(report, config.out_dir, format);
    return kExitOk;
}

int run_gen_schedule(std::int64_t size_bytes, std::int64_t rate_bps, std::int64_t count,
                     double start_us, const std::string& out_path) {
    bufprobe::FlowSpec flow;
    flow.packet_size_bytes = size_bytes;
    flow.input_rate_bps = rate_bps;
    flow.packet_count = count;
    flow.start_time = bufprobe::us_to_ticks(start_us);

    bufprobe::Capture capture;
    capture.point = bufprobe::CapturePoint::source;
    capture.records = bufprobe::build_schedule(flow);
    bufprobe::write_capture(capture, out_path);
    std::cout << count << " packets scheduled every "
              << bufprobe::rate_to_gap_us(size_bytes, rate_bps) << " us -> " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bufprobe: bottleneck buffer characterization toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string format = "json";

    CLI::App* simulate = app.add_subcommand(
        "simulate", "run the flood matrix through the buffer model and write captures");
    simulate->add_option("--config", config_path, "experiment config JSON")->required();
    simulate->add_option("--out", out_override, "output directory (overrides the config)");

    AnalyzeArgs analyze_args;
    CLI::App* analyze =
        app.add_subcommand("analyze", "estimate buffer limits from capture files");
    analyze->add_option("--mode", analyze_args.mode, "physical (in+out) or remote (dest)")
        ->required()
        ->check(CLI::IsMember({"physical", "remote"}));
    analyze->add_option("captures", analyze_args.capture_paths, "capture CSV files")
        ->required();
    analyze->add_option("--out", analyze_args.out_dir, "report output directory");
    analyze->add_option("--format", analyze_args.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    auto* tll = analyze->add_option("--truth-ll", analyze_args.truth_ll,
                                    "ground-truth lower limit");
    auto* tul = analyze->add_option("--truth-ul", analyze_args.truth_ul,
                                    "ground-truth upper limit");
    tll->needs(tul);
    tul->needs(tll);
    analyze->add_option("--truth-unit", analyze_args.truth_unit, "packets or bytes");

    CLI::App* characterize = app.add_subcommand(
        "characterize", "full matrix: simulate (or read captures), analyze, infer the unit");
    characterize->add_option("--config", config_path, "experiment config JSON")->required();
    characterize->add_option("--out", out_override, "output directory (overrides the config)");
    characterize->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));

    std::int64_t gs_size = 1500, gs_rate = 10'000'000, gs_count = 1000;
    double gs_start_us = 0.0;
    std::string gs_out = "schedule.csv";
    CLI::App* gen = app.add_subcommand("gen-schedule", "write a flood schedule as a capture CSV");
    gen->add_option("--size-bytes", gs_size, "packet size in bytes");
    gen->add_option("--rate-bps", gs_rate, "input rate in bits per second");
    gen->add_option("--count", gs_count, "number of packets");
    gen->add_option("--start-us", gs_start_us, "time of the first packet");
    gen->add_option("--out", gs_out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(config_path, out_override);
        if (analyze->parsed()) {
            analyze_args.has_truth = tll->count() > 0 && tul->count() > 0;
            return run_analyze(analyze_args);
        }
        if (characterize->parsed()) return run_characterize(config_path, out_override, format);
        if (gen->parsed()) return run_gen_schedule(gs_size, gs_rate, gs_count, gs_start_us, gs_out);
    } catch (const bufprobe::estimate_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoEstimate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
