#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "bufprobe/capture_io.hpp"
#include "helpers.hpp"

using namespace bufprobe;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("write_capture emits the v1 format") {
    testutil::ScratchDir dir("io-golden");
    Capture capture;
    capture.point = CapturePoint::sut_out;
    capture.records = {{7, us_to_ticks(1200.0), 1500}};
    write_capture(capture, dir.path() / "cap.csv");
    CHECK(slurp(dir.path() / "cap.csv") ==
          "# bufprobe-capture v1 point=sut_out\n"
          "seq,timestamp_us,size_bytes\n"
          "7,1200.0,1500\n");
}

TEST_CASE("write_capture of an empty capture is header plus column line") {
    testutil::ScratchDir dir("io-empty");
    Capture capture;
    capture.point = CapturePoint::destination;
    write_capture(capture, dir.path() / "cap.csv", "exp-1");
    CHECK(slurp(dir.path() / "cap.csv") ==
          "# bufprobe-capture v1 point=destination experiment=exp-1\n"
          "seq,timestamp_us,size_bytes\n");
}

TEST_CASE("capture round-trip preserves every record") {
    testutil::ScratchDir dir("io-roundtrip");
    std::mt19937 rng(31);
    std::uniform_int_distribution<std::int64_t> sizes(1, 9000);
    std::uniform_int_distribution<tick_t> steps(0, 50'000);
    std::uniform_int_distribution<int> counts(0, 200);

    for (int trial = 0; trial < 100; ++trial) {
        Capture capture;
        capture.point = static_cast<CapturePoint>(trial % 4);
        tick_t t = 0;
        int count = counts(rng);
        for (int i = 0; i < count; ++i) {
            t += steps(rng);
            capture.records.push_back({i, t, sizes(rng)});
        }
        auto path = dir.path() / ("cap" + std::to_string(trial) + ".csv");
        write_capture(capture, path);
        CHECK(read_capture(path) == capture);
    }
}

TEST_CASE("read_capture names the offending line") {
    testutil::ScratchDir dir("io-errors");
    auto path = dir.path() / "bad.csv";

    SUBCASE("duplicate seq") {
        spit(path,
             "# bufprobe-capture v1 point=sut_in\nseq,timestamp_us,size_bytes\n"
             "0,0.0,100\n1,5.0,100\n1,9.0,100\n");
        CHECK_THROWS_WITH_AS(read_capture(path), doctest::Contains(":5:"), capture_error);
    }
    SUBCASE("decreasing timestamp") {
        spit(path,
             "# bufprobe-capture v1 point=sut_in\nseq,timestamp_us,size_bytes\n"
             "0,10.0,100\n1,5.0,100\n");
        CHECK_THROWS_WITH_AS(read_capture(path), doctest::Contains(":4:"), capture_error);
    }
    SUBCASE("malformed row") {
        spit(path,
             "# bufprobe-capture v1 point=sut_in\nseq,timestamp_us,size_bytes\n"
             "0,zero,100\n");
        CHECK_THROWS_WITH_AS(read_capture(path), doctest::Contains(":3:"), capture_error);
    }
    SUBCASE("wrong field count") {
        spit(path,
             "# bufprobe-capture v1 point=sut_in\nseq,timestamp_us,size_bytes\n0,1.0\n");
        CHECK_THROWS_AS(read_capture(path), capture_error);
    }
    SUBCASE("unknown version") {
        spit(path, "# bufprobe-capture v9 point=sut_in\nseq,timestamp_us,size_bytes\n");
        CHECK_THROWS_WITH_AS(read_capture(path), doctest::Contains("version"), capture_error);
    }
    SUBCASE("not a capture file") {
        spit(path, "seq,timestamp_us,size_bytes\n0,0.0,100\n");
        CHECK_THROWS_AS(read_capture(path), capture_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_capture(dir.path() / "nope.csv"), capture_error);
    }
}

TEST_CASE("error_percent truncates to two decimals") {
    CHECK(error_percent(30.0, 30.0) == 0.0);
    CHECK(error_percent(53.0, 55.0) == 3.63);
    CHECK(error_percent(84.0, 85.0) == 1.17);
    CHECK(error_percent(111.0, 115.0) == 3.47);
    CHECK(error_percent(27.0, 30.0) == 10.0);
}

namespace {

CharacterizationReport sample_report() {
    CharacterizationReport report;
    MethodReport m1;
    m1.ll = 30;
    m1.ul = 55;
    m1.r_in_bps = 20e6;
    m1.r_out_bps = 10e6;
    m1.fill_rate_bps = 10e6;
    MethodReport m2;
    m2.ll = 30;
    m2.ul = 53;
    m2.r_in_bps = 19.9e6;
    m2.r_out_bps = 10.1e6;
    m2.l_buffer_bytes = 79500.0;
    report.methods.emplace_back("method1", m1);
    report.methods.emplace_back("method2", m2);
    report.unit_inference = UnitVerdict::packets;
    report.ground_truth = GroundTruth{30, 55, CapacityUnit::packets};
    return report;
}

}  // namespace

TEST_CASE("report JSON is byte-stable and carries truncated errors") {
    CharacterizationReport report = sample_report();
    std::string a = report_to_json(report);
    std::string b = report_to_json(report);
    CHECK(a == b);
    CHECK(a.find("\"unit_inference\": \"packets\"") != std::string::npos);
    CHECK(a.find("\"ul\": 3.63") != std::string::npos);    // 53 vs 55
    CHECK(a.find("\"ll\": 0.0") != std::string::npos);

    testutil::ScratchDir dir("io-report");
    write_report(report, dir.path() / "report.json");
    write_report(report, dir.path() / "again.json");
    CHECK(slurp(dir.path() / "report.json") == slurp(dir.path() / "again.json"));
    CHECK(slurp(dir.path() / "report.json") == a);
}

TEST_CASE("report without ground truth omits the error block") {
    CharacterizationReport report = sample_report();
    report.ground_truth.reset();
    std::string text = report_to_json(report);
    CHECK(text.find("error_percent") == std::string::npos);
    CHECK(text.find("ground_truth") == std::string::npos);
}

TEST_CASE("report CSV renders one row per method") {
    std::string csv = report_to_csv(sample_report());
    CHECK(csv.find("method,ll,ul,unit,r_in_bps,r_out_bps,error_ll_percent,error_ul_percent\n") !=
          std::string::npos);
    CHECK(csv.find("method1,30,55,packets,20000000,10000000,0.00,0.00\n") != std::string::npos);
    CHECK(csv.find("method2,30,53,packets,19900000,10100000,0.00,3.63\n") != std::string::npos);
}

TEST_CASE("occupancy trace file renders timestamps and occupancy") {
    testutil::ScratchDir dir("io-trace");
    write_occupancy_trace({{0, 1}, {us_to_ticks(1200.0), 0}}, dir.path() / "trace.csv");
    CHECK(slurp(dir.path() / "trace.csv") ==
          "# bufprobe-trace v1\ntimestamp_us,occupancy\n0.0,1\n1200.0,0\n");
}
