#pragma once

#include "fbmavg/config.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fbmavg {

struct CheckResult {
    std::string id;
    std::string title;
    bool pass = false;
    std::string detail;  // measured values; never timings, so reports stay reproducible
};

struct ValidationReport {
    std::string level;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_pass() const;
    std::string to_text() const;
    std::string to_json() const;
};

struct ValidationOptions {
    std::uint64_t seed = 42;  // matches the default noise.seed
    std::size_t jobs = 1;
};

// Structural checks on the configured system; seconds to a minute.
ValidationReport run_quick(const ExperimentConfig& cfg, const ValidationOptions& opt = {});

// Quick checks followed by the twelve acceptance criteria.
ValidationReport run_full(const ExperimentConfig& cfg, const ValidationOptions& opt = {});

inline constexpr int kCriterionCount = 12;

// Criterion k in 1..12 on the system of cfg. Exceptions become failures.
CheckResult run_criterion(int k, const ExperimentConfig& cfg, const ValidationOptions& opt = {});

}  // namespace fbmavg
