#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnet/simulate.hpp"

namespace qnet {

enum class Verdict { StableConsistent, UnstableConsistent, Inconclusive };
const char* verdict_name(Verdict v);

// Finite simulation cannot certify positive recurrence, so verdicts are
// "-consistent": unstable-consistent needs the whole slope confidence band
// above zero; stable-consistent needs the band to contain zero and the
// nested-horizon time averages to agree within `nested_tolerance`.
struct StabilityThresholds {
    double nested_tolerance = 0.15;
    double confidence = 0.95;       // two-sided band for the growth slope
    double average_floor = 0.05;    // near-empty averages compare within this
    std::uint32_t segments = 8;     // single-trace fallback slope samples
};

struct StabilityReport {
    // Per-server time averages of queue length over the first quarter, first
    // half and the full horizon, pooled across seeds.
    std::vector<double> avg_quarter;
    std::vector<double> avg_half;
    std::vector<double> avg_full;
    double max_nested_gap = 0.0;

    double slope = 0.0;  // total-count growth per epoch
    double slope_ci_low = 0.0;
    double slope_ci_high = 0.0;
    double r_squared_mean = 0.0;
    double r_squared_min = 0.0;

    std::uint32_t num_seeds = 0;
    std::uint64_t horizon = 0;
    Verdict verdict = Verdict::Inconclusive;
};

// Verdict from one trace per seed. With several seeds the slope band is the
// t-interval over per-seed slopes; a single trace falls back to slopes over
// contiguous segments of itself.
StabilityReport assess_stability(const std::vector<Trace>& traces,
                                 const StabilityThresholds& thresholds = {});

// Least-squares helpers (exposed for tests).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

double t_quantile_975(std::uint32_t df);

}  // namespace qnet
