#include "test_support.hpp"

#include <algorithm>

namespace qnet::testing {

NetworkSpec scale_to_max_load(NetworkSpec spec, double target) {
    const TrafficSolution sol = solve_traffic(spec);
    double max_load = 0.0;
    for (double rho : sol.server_load) max_load = std::max(max_load, rho);
    spec.lambda *= target / max_load;
    return spec;
}

NetworkSpec random_spec(SpecSampler& sampler, std::uint32_t max_servers,
                        std::uint32_t max_classes) {
    NetworkSpec spec;
    spec.num_servers = sampler.uniform_int(1, max_servers);
    spec.num_classes = sampler.uniform_int(1, max_classes);
    spec.lambda = sampler.uniform(0.1, 2.0);

    spec.assign_prob = Matrix(spec.num_classes, spec.num_servers);
    double mass = 0.0;
    for (std::uint32_t a = 0; a < spec.num_classes; ++a)
        for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
            spec.assign_prob(a, j) = sampler.uniform();
            mass += spec.assign_prob(a, j);
        }
    for (std::uint32_t a = 0; a < spec.num_classes; ++a)
        for (std::uint32_t j = 0; j < spec.num_servers; ++j) spec.assign_prob(a, j) /= mass;

    spec.service_rate = Matrix(spec.num_classes, spec.num_servers);
    for (std::uint32_t a = 0; a < spec.num_classes; ++a)
        for (std::uint32_t j = 0; j < spec.num_servers; ++j)
            spec.service_rate(a, j) = sampler.uniform(0.5, 5.0);

    spec.routing = Matrix(spec.num_servers, spec.num_servers);
    for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
        double row = 0.0;
        for (std::uint32_t k = 0; k < spec.num_servers; ++k) {
            spec.routing(j, k) = sampler.uniform();
            row += spec.routing(j, k);
        }
        const double scale = sampler.uniform(0.2, 0.9) / row;
        for (std::uint32_t k = 0; k < spec.num_servers; ++k) spec.routing(j, k) *= scale;
    }
    return spec;
}

NetworkSpec random_single_rate_spec(SpecSampler& sampler, std::uint32_t max_servers,
                                    std::uint32_t max_classes) {
    NetworkSpec spec = random_spec(sampler, max_servers, max_classes);
    const double mu = sampler.uniform(0.5, 5.0);
    spec.service_rate = Matrix(spec.num_classes, spec.num_servers, mu);
    return spec;
}

Matrix neumann_visit_counts(const Matrix& routing, std::uint32_t depth) {
    const std::size_t J = routing.rows();
    Matrix acc = Matrix::identity(J);
    Matrix power = Matrix::identity(J);
    for (std::uint32_t n = 1; n <= depth; ++n) {
        power = power * routing;
        for (std::size_t i = 0; i < J; ++i)
            for (std::size_t k = 0; k < J; ++k) acc(i, k) += power(i, k);
    }
    return acc;
}

std::vector<CountVector> enumerate_states(std::uint32_t num_classes,
                                          std::uint32_t num_servers, std::uint32_t cap,
                                          std::size_t limit) {
    std::vector<CountVector> out;
    const std::uint32_t dims = num_classes * num_servers;
    CountVector current(num_classes, num_servers);
    auto rec = [&](auto&& self, std::uint32_t pos, std::uint32_t remaining) -> void {
        if (pos + 1 == dims) {
            current.counts[pos] = remaining;
            out.push_back(current);
            current.counts[pos] = 0;
            return;
        }
        for (std::uint32_t c = 0; c <= remaining; ++c) {
            current.counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
        current.counts[pos] = 0;
    };
    for (std::uint32_t total = 0; total <= cap; ++total) rec(rec, 0, total);

    if (limit > 0 && out.size() > limit) {
        // Deterministic thinning: keep every stride-th state plus the first.
        std::vector<CountVector> thin;
        const std::size_t stride = out.size() / limit + 1;
        for (std::size_t i = 0; i < out.size(); i += stride) thin.push_back(out[i]);
        out = std::move(thin);
    }
    return out;
}

}  // namespace qnet::testing
