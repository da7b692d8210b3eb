#include "qnet/exactkernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>

#include "qnet/errors.hpp"
#include "qnet/kernels.hpp"

namespace qnet {

namespace {

std::size_t resolve_max_states(std::size_t requested) {
    if (requested != 0) return requested;
    if (const char* env = std::getenv("QNET_MAX_STATES")) {
        const long long v = std::atoll(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 200000;
}

std::uint64_t pack_state(const TruncatedChain::State& s, std::uint32_t bits) {
    std::uint64_t key = 0;
    for (const std::uint32_t c : s) key = (key << bits) | c;
    return key;
}

// States with total in {0, 1, ..., cap}, total-major then lexicographic.
void enumerate_states(std::uint32_t num_servers, std::uint32_t cap, std::size_t max_states,
                      std::vector<TruncatedChain::State>& out) {
    TruncatedChain::State current(num_servers, 0);
    for (std::uint32_t total = 0; total <= cap; ++total) {
        // Recursive fill of `current` so that entries sum to `total`.
        auto rec = [&](auto&& self, std::uint32_t pos, std::uint32_t remaining) -> void {
            if (pos + 1 == num_servers) {
                current[pos] = remaining;
                if (out.size() >= max_states)
                    throw StateSpaceTooLarge("state enumeration exceeds " +
                                             std::to_string(max_states) + " states");
                out.push_back(current);
                return;
            }
            for (std::uint32_t c = 0; c <= remaining; ++c) {
                current[pos] = c;
                self(self, pos + 1, remaining - c);
            }
            current[pos] = 0;
        };
        rec(rec, 0, total);
    }
}

}  // namespace

std::size_t TruncatedChain::index_of(const State& s) const {
    const std::uint64_t key = pack_state(s, pack_bits_);
    const auto it = std::lower_bound(packed_.begin(), packed_.end(), key);
    if (it == packed_.end() || *it != key)
        throw DimensionMismatch("state not present in truncated chain");
    return order_[static_cast<std::size_t>(it - packed_.begin())];
}

std::size_t TruncatedChain::index_of(const CountVector& x) const {
    if (x.num_classes != 1 || x.num_servers != spec_.num_servers)
        throw DimensionMismatch("truncated chain states are single-class count vectors");
    State s(spec_.num_servers);
    for (std::uint32_t j = 0; j < spec_.num_servers; ++j) {
        if (x.at(0, j) < 0) throw DimensionMismatch("negative count");
        s[j] = static_cast<std::uint32_t>(x.at(0, j));
    }
    return index_of(s);
}

void TruncatedChain::apply(const double* in, double* out) const {
    const std::size_t n = states_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t begin = row_ptr_[i];
        out[i] = simd::sparse_dot(vals_.data() + begin, cols_.data() + begin,
                                  row_ptr_[i + 1] - begin, in);
    }
}

void TruncatedChain::apply_left(const double* in, double* out) const {
    const std::size_t n = states_.size();
    std::fill(out, out + n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = in[i];
        if (w == 0.0) continue;
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
            out[cols_[e]] += w * vals_[e];
    }
}

std::vector<double> TruncatedChain::row_sums() const {
    std::vector<double> sums(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
        sums[i] = simd::sum(vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    return sums;
}

double TruncatedChain::probability(std::size_t from, std::size_t to) const {
    for (std::size_t e = row_ptr_[from]; e < row_ptr_[from + 1]; ++e)
        if (cols_[e] == to) return vals_[e];
    return 0.0;
}

std::vector<double> TruncatedChain::empty_indicator(std::uint32_t server) const {
    std::vector<double> u(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
        u[i] = states_[i][server] == 0 ? 1.0 : 0.0;
    return u;
}

std::vector<double> TruncatedChain::boundary_indicator() const {
    std::vector<double> u(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const std::uint64_t total =
            std::accumulate(states_[i].begin(), states_[i].end(), std::uint64_t{0});
        u[i] = total == cap_ ? 1.0 : 0.0;
    }
    return u;
}

std::vector<double> TruncatedChain::lyapunov_vector(const Matrix& visit_counts,
                                                    std::uint32_t server) const {
    std::vector<double> v(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        double acc = 0.0;
        for (std::uint32_t k = 0; k < spec_.num_servers; ++k)
            acc += static_cast<double>(states_[i][k]) * visit_counts(k, server);
        v[i] = acc;
    }
    return v;
}

TruncatedChain build_kernel(const NetworkSpec& spec, std::uint32_t cap,
                            std::size_t max_states) {
    require_valid(spec);
    if (spec.num_classes != 1)
        throw ConfigError("build_kernel requires a single-class spec");
    if (cap < 1) throw ConfigError("cap must be >= 1");

    TruncatedChain chain;
    chain.spec_ = spec;
    chain.cap_ = cap;
    chain.q_ = spec.uniformization_rate();

    const std::size_t bound = resolve_max_states(max_states);
    enumerate_states(spec.num_servers, cap, bound, chain.states_);

    // Packed lookup table. Bits per coordinate must hold values up to cap.
    std::uint32_t bits = 1;
    while ((1ull << bits) <= cap) ++bits;
    if (static_cast<std::uint64_t>(bits) * spec.num_servers > 64)
        throw StateSpaceTooLarge("state packing exceeds 64 bits");
    chain.pack_bits_ = bits;
    const std::size_t n = chain.states_.size();
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed(n);
    for (std::size_t i = 0; i < n; ++i) keyed[i] = {pack_state(chain.states_[i], bits), i};
    std::sort(keyed.begin(), keyed.end());
    chain.packed_.resize(n);
    chain.order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        chain.packed_[i] = keyed[i].first;
        chain.order_[i] = keyed[i].second;
    }

    const std::uint32_t J = spec.num_servers;
    const double q = chain.q_;
    chain.row_ptr_.reserve(n + 1);
    chain.row_ptr_.push_back(0);
    TruncatedChain::State scratch;
    std::map<std::size_t, double> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        const auto& x = chain.states_[i];
        const std::uint64_t total = std::accumulate(x.begin(), x.end(), std::uint64_t{0});
        double placed = 0.0;

        // Arrivals (class 1 at server k). Blocked at the cap: reflecting
        // truncation folds the probability into the self-loop.
        if (total < cap) {
            for (std::uint32_t k = 0; k < J; ++k) {
                const double p = spec.arrival_rate(0, k) / q;
                if (p == 0.0) continue;
                scratch = x;
                ++scratch[k];
                row[chain.index_of(scratch)] += p;
                placed += p;
            }
        }

        // Departures from each busy server: route to l or exit.
        for (std::uint32_t j = 0; j < J; ++j) {
            if (x[j] == 0) continue;
            const double mu = spec.service_rate(0, j);
            double route_mass = 0.0;
            for (std::uint32_t l = 0; l < J; ++l) {
                const double r = spec.routing(j, l);
                route_mass += r;
                if (r == 0.0) continue;
                scratch = x;
                --scratch[j];
                ++scratch[l];
                const double p = mu * r / q;
                row[chain.index_of(scratch)] += p;
                placed += p;
            }
            const double exit_p = mu * (1.0 - route_mass) / q;
            if (exit_p > 0.0) {
                scratch = x;
                --scratch[j];
                row[chain.index_of(scratch)] += exit_p;
                placed += exit_p;
            }
        }

        row[i] += 1.0 - placed;  // self-loop absorbs the residual mass
        for (const auto& [col, p] : row) {
            chain.cols_.push_back(static_cast<std::uint32_t>(col));
            chain.vals_.push_back(p);
        }
        chain.row_ptr_.push_back(chain.cols_.size());
    }
    return chain;
}

double n_step_empty_prob(const TruncatedChain& chain, const CountVector& x,
                         std::uint32_t server, std::uint32_t n) {
    if (server >= chain.spec().num_servers)
        throw DimensionMismatch("server index out of range");
    std::vector<double> u = chain.empty_indicator(server);
    std::vector<double> next(u.size());
    for (std::uint32_t step = 0; step < n; ++step) {
        chain.apply(u.data(), next.data());
        u.swap(next);
    }
    return u[chain.index_of(x)];
}

namespace {

// p^n(x, empty_j) for every state, n = 1..n_max; `probe` receives (n, values).
template <typename Probe>
void iterate_empty_probs(const TruncatedChain& chain, std::uint32_t server,
                         std::uint32_t n_max, Probe&& probe) {
    std::vector<double> u = chain.empty_indicator(server);
    std::vector<double> next(u.size());
    for (std::uint32_t n = 1; n <= n_max; ++n) {
        chain.apply(u.data(), next.data());
        u.swap(next);
        probe(n, u);
    }
}

}  // namespace

LemmaReport verify_lemma(const TruncatedChain& chain, std::uint32_t server,
                         std::uint32_t n_max, double sensitivity_tol) {
    LemmaReport report;
    report.sensitivity_tol = sensitivity_tol;
    report.min_slack = std::numeric_limits<double>::infinity();
    report.min_artifact_slack = std::numeric_limits<double>::infinity();
    const std::size_t zero = chain.zero_state();

    // Same probes on a cap+5 chain; the total-major state enumeration makes
    // this chain's states a prefix of the wider one.
    const TruncatedChain wider = build_kernel(chain.spec(), chain.cap() + 5);
    std::vector<double> mine = chain.empty_indicator(server);
    std::vector<double> mine_next(mine.size());
    std::vector<double> theirs = wider.empty_indicator(server);
    std::vector<double> theirs_next(theirs.size());

    for (std::uint32_t n = 1; n <= n_max; ++n) {
        chain.apply(mine.data(), mine_next.data());
        mine.swap(mine_next);
        wider.apply(theirs.data(), theirs_next.data());
        theirs.swap(theirs_next);
        const double at_zero = mine[zero];
        const bool zero_stable = std::fabs(mine[zero] - theirs[zero]) <= sensitivity_tol;
        for (std::size_t i = 0; i < mine.size(); ++i) {
            const double slack = at_zero - mine[i];
            const double disc = std::fabs(mine[i] - theirs[i]);
            report.truncation_discrepancy = std::max(report.truncation_discrepancy, disc);
            if (zero_stable && disc <= sensitivity_tol) {
                ++report.stable_probes;
                if (slack < report.min_slack) {
                    report.min_slack = slack;
                    report.argmin_state = i;
                    report.argmin_n = n;
                }
                if (slack < -1e-12) ++report.violations;
            } else {
                ++report.artifact_probes;
                report.min_artifact_slack = std::min(report.min_artifact_slack, slack);
                if (slack < -1e-12) ++report.artifact_violations;
            }
        }
    }
    return report;
}

ExactKDriftTable exact_k_drift_all(const TruncatedChain& chain, const Matrix& visit_counts,
                                   std::uint32_t server, std::uint32_t k) {
    const NetworkSpec& spec = chain.spec();
    if (!spec.single_rate())
        throw NotSingleRate("exact_k_drift requires a single-rate spec");
    if (k < 1) throw ConfigError("k must be >= 1");
    const std::size_t n = chain.num_states();
    const double q = chain.uniformization();
    const double mu = spec.service_rate(0, 0);

    // Direct path: V expectations through kernel powers.
    const std::vector<double> v0 = chain.lyapunov_vector(visit_counts, server);
    std::vector<double> v = v0;
    std::vector<double> scratch(n);
    for (std::uint32_t step = 0; step < k; ++step) {
        chain.apply(v.data(), scratch.data());
        v.swap(scratch);
    }

    // Identity path: running occupancy of the busy set, corrected for the
    // arrival probability lost at the truncation boundary (states at the cap
    // see no E1 mass, so their one-step drift lacks the Lambda_j term).
    double lambda_j = 0.0;  // sum_a Lambda(a,j) = lambda * sum_k q(0,k) Gamma(k,j)
    for (std::uint32_t c = 0; c < spec.num_servers; ++c)
        lambda_j += spec.arrival_rate(0, c) * visit_counts(c, server);

    std::vector<double> busy(n);
    {
        const std::vector<double> empty = chain.empty_indicator(server);
        for (std::size_t i = 0; i < n; ++i) busy[i] = 1.0 - empty[i];
    }
    std::vector<double> blocked = chain.boundary_indicator();
    std::vector<double> busy_acc(n, 0.0);
    std::vector<double> blocked_acc(n, 0.0);
    for (std::uint32_t step = 0; step < k; ++step) {
        simd::axpy(1.0, busy.data(), busy_acc.data(), n);
        simd::axpy(1.0, blocked.data(), blocked_acc.data(), n);
        if (step + 1 == k) break;
        chain.apply(busy.data(), scratch.data());
        busy.swap(scratch);
        chain.apply(blocked.data(), scratch.data());
        blocked.swap(scratch);
    }

    ExactKDriftTable table;
    table.direct.resize(n);
    table.identity.resize(n);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        table.direct[i] = (v[i] - v0[i]) * inv_k;
        table.identity[i] =
            (lambda_j * (1.0 - blocked_acc[i] * inv_k) - mu * busy_acc[i] * inv_k) / q;
    }
    return table;
}

ExactKDrift exact_k_drift(const TruncatedChain& chain, const Matrix& visit_counts,
                          const CountVector& x, std::uint32_t server, std::uint32_t k) {
    const auto table = exact_k_drift_all(chain, visit_counts, server, k);
    const std::size_t idx = chain.index_of(x);
    ExactKDrift out{table.direct[idx], table.identity[idx]};
    if (std::fabs(out.direct - out.identity) > 1e-10)
        throw std::logic_error("exact_k_drift paths disagree beyond 1e-10");
    return out;
}

std::vector<double> stationary_distribution(const TruncatedChain& chain,
                                            std::uint32_t max_iters, double tol) {
    const std::size_t n = chain.num_states();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (std::uint32_t it = 0; it < max_iters; ++it) {
        chain.apply_left(pi.data(), next.data());
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::fabs(next[i] - pi[i]));
        pi.swap(next);
        if (delta < tol) break;
    }
    const double mass = simd::sum(pi.data(), n);
    simd::scale(1.0 / mass, pi.data(), n);
    return pi;
}

}  // namespace qnet
