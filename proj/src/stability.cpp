#include "qnet/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnet/errors.hpp"

namespace qnet {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::StableConsistent: return "stable-consistent";
        case Verdict::UnstableConsistent: return "unstable-consistent";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

double t_quantile_975(std::uint32_t df) {
    // Two-sided 95% t quantiles; beyond the table the normal value serves.
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                       2.306,  2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
                                       2.131,  2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
                                       2.074,  2.069, 2.064, 2.060, 2.056, 2.052, 2.048,
                                       2.045,  2.042};
    if (df == 0) return std::numeric_limits<double>::infinity();
    if (df <= 30) return table[df - 1];
    return 1.96;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n != ys.size() || n < 2) throw DimensionMismatch("fit_line needs >= 2 points");
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
    return fit;
}

namespace {

LineFit fit_trace(const Trace& trace, std::size_t begin, std::size_t end) {
    std::vector<double> xs, ys;
    xs.reserve(end - begin);
    ys.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        xs.push_back(static_cast<double>(trace.epochs[i]));
        ys.push_back(static_cast<double>(trace.totals[i]));
    }
    return fit_line(xs, ys);
}

}  // namespace

StabilityReport assess_stability(const std::vector<Trace>& traces,
                                 const StabilityThresholds& thresholds) {
    if (traces.empty()) throw ConfigError("assess_stability needs at least one trace");
    const std::uint32_t J = traces[0].num_servers;
    const std::uint32_t A = traces[0].num_classes;

    StabilityReport report;
    report.num_seeds = static_cast<std::uint32_t>(traces.size());
    report.avg_quarter.assign(J, 0.0);
    report.avg_half.assign(J, 0.0);
    report.avg_full.assign(J, 0.0);

    std::vector<double> slopes;
    double r2_sum = 0.0;
    double r2_min = std::numeric_limits<double>::infinity();

    for (const Trace& trace : traces) {
        const std::size_t rows = trace.rows();
        if (rows < 8) throw ConfigError("trace too short to assess");
        if (trace.num_servers != J || trace.num_classes != A)
            throw DimensionMismatch("traces disagree in shape");
        report.horizon = std::max(report.horizon, trace.epochs.back());

        // Per-server prefix averages of queue length at the sampled epochs.
        for (std::uint32_t j = 0; j < J; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                std::int64_t q = 0;
                for (std::uint32_t a = 0; a < A; ++a) q += trace.count_at(i, a, j);
                acc += static_cast<double>(q);
                if (i + 1 == rows / 4) report.avg_quarter[j] += acc / static_cast<double>(i + 1);
                if (i + 1 == rows / 2) report.avg_half[j] += acc / static_cast<double>(i + 1);
            }
            report.avg_full[j] += acc / static_cast<double>(rows);
        }

        const LineFit fit = fit_trace(trace, 0, rows);
        r2_sum += fit.r_squared;
        r2_min = std::min(r2_min, fit.r_squared);
        if (traces.size() > 1) {
            slopes.push_back(fit.slope);
        } else {
            // Single trace: slopes of contiguous segments stand in for seeds.
            const std::uint32_t segs = std::max<std::uint32_t>(2, thresholds.segments);
            for (std::uint32_t s = 0; s < segs; ++s) {
                const std::size_t b = rows * s / segs;
                const std::size_t e = rows * (s + 1) / segs;
                if (e - b >= 2) slopes.push_back(fit_trace(trace, b, e).slope);
            }
        }
    }

    const double inv_seeds = 1.0 / static_cast<double>(traces.size());
    for (std::uint32_t j = 0; j < J; ++j) {
        report.avg_quarter[j] *= inv_seeds;
        report.avg_half[j] *= inv_seeds;
        report.avg_full[j] *= inv_seeds;
    }
    report.r_squared_mean = r2_sum * inv_seeds;
    report.r_squared_min = r2_min;

    double mean = 0.0;
    for (double s : slopes) mean += s;
    mean /= static_cast<double>(slopes.size());
    double var = 0.0;
    for (double s : slopes) var += (s - mean) * (s - mean);
    var = slopes.size() > 1 ? var / static_cast<double>(slopes.size() - 1) : 0.0;
    const double half_width = slopes.size() > 1
                                  ? t_quantile_975(static_cast<std::uint32_t>(slopes.size() - 1)) *
                                        std::sqrt(var / static_cast<double>(slopes.size()))
                                  : std::numeric_limits<double>::infinity();
    report.slope = mean;
    report.slope_ci_low = mean - half_width;
    report.slope_ci_high = mean + half_width;

    report.max_nested_gap = 0.0;
    for (std::uint32_t j = 0; j < J; ++j) {
        const auto gap = [&](double a, double b) {
            const double denom = std::max({std::fabs(a), std::fabs(b), thresholds.average_floor});
            return std::fabs(a - b) / denom;
        };
        report.max_nested_gap = std::max(
            {report.max_nested_gap, gap(report.avg_quarter[j], report.avg_half[j]),
             gap(report.avg_half[j], report.avg_full[j])});
    }

    if (report.slope_ci_low > 0.0) {
        report.verdict = Verdict::UnstableConsistent;
    } else if (report.slope_ci_low <= 0.0 && report.slope_ci_high >= 0.0 &&
               report.max_nested_gap <= thresholds.nested_tolerance) {
        report.verdict = Verdict::StableConsistent;
    } else {
        report.verdict = Verdict::Inconclusive;
    }
    return report;
}

}  // namespace qnet
