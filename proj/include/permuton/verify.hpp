#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace permuton::verify {

enum class Suite {
    /// Reduced workloads, a couple of minutes in total.
    quick,
    /// The acceptance workloads (minutes on one core).
    full,
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    Suite suite = Suite::full;
    std::uint64_t seed = 20240611;
    /// Empty means all of 1..11.
    std::vector<int> only;
};

/// Runs the checks in order; `on_result` is called as each one finishes.
std::vector<CriterionResult> run(const Options& options,
                                 const std::function<void(const CriterionResult&)>& on_result = {});

/// One line per result, e.g. "[PASS] 1 cone duration normalization: ...".
std::string format_line(const CriterionResult& result);

std::string to_json(const std::vector<CriterionResult>& results, Suite suite);

inline constexpr int kCriteria = 11;

}  // namespace permuton::verify
