#pragma once

// Acceptance criteria with their brute-force cross-checks. Shared by the acceptance
// binary and the `verify` command. Every criterion runs at both levels; `full` adds
// the n=5 brute force to the ratio trend.

#include <cstdint>
#include <string>
#include <vector>

namespace acceptance {

enum class Level { quick, full };

struct Options {
    Level level = Level::quick;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
};

struct Result {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string observed;
    std::string expected;
    std::string tolerance;
    double seconds = 0;
};

constexpr int criterion_count = 11;

std::string criterion_title(int id);
Result run_criterion(int id, const Options& opt);

// "PASS  5 asymptotic ratio trend | observed ... | expected ... | tol ... | 0.4s"
std::string format_line(const Result& r);

}  // namespace acceptance
