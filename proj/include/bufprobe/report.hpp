// Characterization report: the estimates each method produced, the inferred
// capacity unit and, when ground truth is known, relative errors.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bufprobe/types.hpp"

namespace bufprobe {

enum class UnitVerdict { packets, bytes, inconclusive };

std::string_view to_string(UnitVerdict verdict);

struct GroundTruth {
    std::int64_t ll{0};
    std::int64_t ul{0};
    CapacityUnit unit{CapacityUnit::packets};
};

struct MethodReport {
    std::int64_t ll{0};
    std::int64_t ul{0};
    std::string unit{"packets"};    // unit the ll/ul estimates are counted in
    double r_in_bps{0.0};
    double r_out_bps{0.0};
    std::optional<double> l_buffer_bytes;    // remote method only
    std::optional<double> fill_rate_bps;     // physical method only
};

struct CharacterizationReport {
    // Insertion order is the serialization order; keys are "method1"
    // (physical access) and "method2" (remote).
    std::vector<std::pair<std::string, MethodReport>> methods;
    std::optional<UnitVerdict> unit_inference;
    std::optional<GroundTruth> ground_truth;

    const MethodReport* find(const std::string& name) const;
};

// 100 * |estimate - truth| / truth, truncated to two decimals the way the
// result tables print it.
double error_percent(double estimate, double truth);

}  // namespace bufprobe
