#include "qnet/mc_drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

// V_j(X^k) for all j after k steps from x on the replication substream.
std::vector<double> terminal_values(const NetworkSpec& spec, const Matrix& gamma,
                                    const Policy& policy, const CountVector& x,
                                    std::uint32_t k, std::uint64_t rep_seed) {
    rng::Streams streams(rep_seed, spec.num_servers);
    NetworkState state(x);
    for (std::uint32_t n = 0; n < k; ++n) step(state, spec, policy, streams);
    std::vector<double> v(spec.num_servers);
    for (std::uint32_t j = 0; j < spec.num_servers; ++j)
        v[j] = lyapunov_value(state.counts, gamma, j);
    return v;
}

}  // namespace

std::vector<DriftEstimate> multi_step_drift(const NetworkSpec& spec,
                                            const TrafficSolution& sol, const Policy& policy,
                                            const CountVector& x, std::uint32_t k,
                                            std::uint32_t replications, std::uint64_t seed) {
    require_valid(spec);
    if (k < 1) throw ConfigError("k must be >= 1");
    if (replications < 1) throw ConfigError("replications must be >= 1");

    const std::uint32_t J = spec.num_servers;
    std::vector<double> base(J);
    for (std::uint32_t j = 0; j < J; ++j) base[j] = lyapunov_value(x, sol.visit_counts, j);

    std::vector<double> sum(J, 0.0), sum_sq(J, 0.0);
    for (std::uint32_t r = 0; r < replications; ++r) {
        const auto v = terminal_values(spec, sol.visit_counts, policy, x, k,
                                        rng::replication_seed(seed, r));
        for (std::uint32_t j = 0; j < J; ++j) {
            const double d = v[j] - base[j];
            sum[j] += d;
            sum_sq[j] += d * d;
        }
    }
    std::vector<DriftEstimate> out(J);
    const double n = static_cast<double>(replications);
    for (std::uint32_t j = 0; j < J; ++j) {
        const double mean = sum[j] / n;
        const double var = replications > 1 ? (sum_sq[j] - n * mean * mean) / (n - 1.0) : 0.0;
        out[j] = {mean, std::sqrt(std::max(0.0, var) / n)};
    }
    return out;
}

UubReport uub_estimate(const NetworkSpec& spec, const TrafficSolution& sol,
                       const Policy& policy, const std::vector<CountVector>& states_in,
                       const std::vector<std::uint32_t>& ks, std::uint32_t replications,
                       std::uint64_t seed) {
    require_valid(spec);
    if (states_in.empty()) throw ConfigError("uub_estimate needs at least one state");
    if (ks.empty()) throw ConfigError("uub_estimate needs at least one k");

    std::vector<CountVector> states = states_in;
    const bool has_zero =
        std::any_of(states.begin(), states.end(), [](const CountVector& s) { return s.total() == 0; });
    if (!has_zero)
        states.insert(states.begin(), CountVector(spec.num_classes, spec.num_servers));

    std::vector<std::uint32_t> sorted_ks = ks;
    std::sort(sorted_ks.begin(), sorted_ks.end());
    const std::uint32_t k_max = sorted_ks.back();
    const std::uint32_t J = spec.num_servers;
    const bool single = spec.single_rate();

    // mean/stderr of Delta^k V_j per (state, k, server)
    const std::size_t cells = states.size() * sorted_ks.size() * J;
    std::vector<double> sum(cells, 0.0), sum_sq(cells, 0.0);
    auto cell = [&](std::size_t s, std::size_t ki, std::uint32_t j) {
        return (s * sorted_ks.size() + ki) * J + j;
    };

    std::vector<double> base(J);
    for (std::size_t s = 0; s < states.size(); ++s) {
        if (states[s].num_classes != spec.num_classes ||
            states[s].num_servers != spec.num_servers)
            throw DimensionMismatch("uub_estimate state shape disagrees with spec");
        for (std::uint32_t j = 0; j < J; ++j)
            base[j] = lyapunov_value(states[s], sol.visit_counts, j);
        for (std::uint32_t r = 0; r < replications; ++r) {
            // Substreams shared across states: the same replication index
            // reads the same random numbers from every start.
            rng::Streams streams(rng::replication_seed(seed, r), J);
            NetworkState state(states[s]);
            std::size_t ki = 0;
            for (std::uint32_t n = 1; n <= k_max; ++n) {
                step(state, spec, policy, streams);
                while (ki < sorted_ks.size() && sorted_ks[ki] == n) {
                    for (std::uint32_t j = 0; j < J; ++j) {
                        const double d =
                            lyapunov_value(state.counts, sol.visit_counts, j) - base[j];
                        sum[cell(s, ki, j)] += d;
                        sum_sq[cell(s, ki, j)] += d * d;
                    }
                    ++ki;
                }
            }
        }
    }

    UubReport report;
    const double n = static_cast<double>(replications);
    std::vector<double> means(cells), errs(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        means[c] = sum[c] / n;
        const double var = replications > 1 ? (sum_sq[c] - n * means[c] * means[c]) / (n - 1.0) : 0.0;
        errs[c] = std::sqrt(std::max(0.0, var) / n);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t s = 0; s < states.size(); ++s) {
        for (std::size_t ki = 0; ki < sorted_ks.size(); ++ki) {
            const double k = static_cast<double>(sorted_ks[ki]);
            for (std::uint32_t j = 0; j < J; ++j) {
                UubRow row;
                row.server = j;
                row.state_id = s;
                row.k = sorted_ks[ki];
                row.estimate = means[cell(s, ki, j)] / k;
                row.stderr_ = errs[cell(s, ki, j)] / k;
                row.analytic = (sorted_ks[ki] == 1 && single)
                                   ? analytic_drift(spec, sol, states[s], j)
                                   : nan;
                report.rows.push_back(row);
            }
        }
    }

    // Companion check against the zero state.
    std::size_t zero_id = 0;
    for (std::size_t s = 0; s < states.size(); ++s)
        if (states[s].total() == 0) zero_id = s;
    for (std::size_t s = 0; s < states.size(); ++s) {
        if (s == zero_id) continue;
        for (std::size_t ki = 0; ki < sorted_ks.size(); ++ki) {
            const double k = static_cast<double>(sorted_ks[ki]);
            for (std::uint32_t j = 0; j < J; ++j) {
                const double est_x = means[cell(s, ki, j)] / k;
                const double est_0 = means[cell(zero_id, ki, j)] / k;
                const double pooled = std::sqrt(errs[cell(s, ki, j)] * errs[cell(s, ki, j)] +
                                                errs[cell(zero_id, ki, j)] *
                                                    errs[cell(zero_id, ki, j)]) /
                                      k;
                if (est_x > est_0 + 3.0 * pooled) {
                    report.comparison_ok = false;
                    report.comparison_violations.push_back(
                        "state " + std::to_string(s) + ", k=" + std::to_string(sorted_ks[ki]) +
                        ", server " + std::to_string(j + 1));
                }
            }
        }
    }

    // cstar from the two largest k at the zero state.
    report.cstar.assign(J, nan);
    if (sorted_ks.size() >= 2) {
        const std::size_t ki2 = sorted_ks.size() - 1;
        const std::size_t ki1 = sorted_ks.size() - 2;
        const double dk = static_cast<double>(sorted_ks[ki2] - sorted_ks[ki1]);
        if (dk > 0) {
            for (std::uint32_t j = 0; j < J; ++j)
                report.cstar[j] =
                    (means[cell(zero_id, ki2, j)] - means[cell(zero_id, ki1, j)]) / dk;
        }
    }
    return report;
}

}  // namespace qnet
