#include <doctest.h>

#include <cmath>

#include "qnet/stability.hpp"
#include "test_support.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

std::vector<Trace> traces_for(const NetworkSpec& spec, const Policy& policy,
                              std::uint64_t horizon, std::uint32_t seeds,
                              std::uint64_t stride) {
    std::vector<Trace> out;
    for (std::uint32_t s = 0; s < seeds; ++s)
        out.push_back(run(spec, policy, horizon, s + 1, {.record_stride = stride}));
    return out;
}

}  // namespace

TEST_CASE("fit_line recovers an exact line") {
    const std::vector<double> xs = {0, 1, 2, 3, 4};
    const std::vector<double> ys = {1, 3, 5, 7, 9};
    const auto fit = fit_line(xs, ys);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("stable M/M/1 is judged stable-consistent") {
    const auto traces = traces_for(mm1(), Policy::fifo(), 400000, 5, 200);
    const auto report = assess_stability(traces);
    INFO("slope ", report.slope, " ci [", report.slope_ci_low, ", ", report.slope_ci_high,
         "] gap ", report.max_nested_gap);
    CHECK(report.verdict == Verdict::StableConsistent);
}

TEST_CASE("overloaded M/M/1 is judged unstable-consistent") {
    const auto traces = traces_for(mm1(3.0, 2.0), Policy::fifo(), 400000, 5, 200);
    const auto report = assess_stability(traces);
    CHECK(report.verdict == Verdict::UnstableConsistent);
    CHECK(report.slope > 0.0);
    CHECK(report.r_squared_min > 0.9);
}

TEST_CASE("single-trace fallback still separates the regimes") {
    const auto stable = assess_stability({run(mm1(), Policy::fifo(), 400000, 3, {.record_stride = 200})});
    CHECK(stable.verdict != Verdict::UnstableConsistent);
    const auto unstable =
        assess_stability({run(mm1(3.0, 2.0), Policy::fifo(), 400000, 3, {.record_stride = 200})});
    CHECK(unstable.verdict == Verdict::UnstableConsistent);
}

TEST_CASE("near-critical load is not called unstable") {
    // rho = 0.95: averages drift upward over any finite window; the verdict
    // may be stable or inconclusive but must not claim instability.
    const auto traces = traces_for(mm1(1.9, 2.0), Policy::fifo(), 400000, 5, 200);
    const auto report = assess_stability(traces);
    CHECK(report.verdict != Verdict::UnstableConsistent);
}
