#pragma once

#include <cstdint>
#include <vector>

// Counter-based random streams. Every draw is a pure function of
// (master seed, stream tag, stream parameter, draw index), so two
// simulations sharing a seed see identical streams regardless of network
// parameters, thread schedule, or how many draws other streams consumed.
// The generator is the splitmix64 finalizer over golden-ratio increments,
// accessed by index instead of by stepping hidden state.
namespace qnet::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

enum class StreamTag : std::uint64_t {
    Arrival = 1,      // per-epoch event uniform (the A_n stream)
    Assign = 2,       // class/server choice given an arrival
    Route = 3,        // per-server routing decisions (the B_{j,k} streams)
    Service = 4,      // per-server departure uniforms
    Policy = 5,       // tie-breaking randomness inside policies
    Replication = 6,  // derivation of per-replication master seeds
    Generic = 7,      // test corpora and spec samplers
};

// Key for a named substream: (seed, tag, param). `param` is the server
// index for Route/Service and zero elsewhere.
inline std::uint64_t stream_key(std::uint64_t seed, StreamTag tag, std::uint64_t param = 0) {
    const std::uint64_t t = static_cast<std::uint64_t>(tag);
    return mix(mix(seed + kGolden * (t + 1)) + kGolden * (param + 1));
}

inline std::uint64_t draw_bits(std::uint64_t key, std::uint64_t index) {
    return mix(key + kGolden * (index + 1));
}

// Uniform on [0, 1) with 53 random bits.
inline double draw_uniform(std::uint64_t key, std::uint64_t index) {
    return static_cast<double>(draw_bits(key, index) >> 11) * 0x1.0p-53;
}

// Derives an independent master seed for replication r of a Monte-Carlo
// estimator; replications can then run in any order or in parallel.
inline std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r) {
    return draw_bits(stream_key(seed, StreamTag::Replication), r);
}

// Named substreams of one simulation. Values are random-access: the engine
// supplies the draw index (epoch counters, departure counts, ...) so coupled
// chains sharing a seed read the very same numbers.
class Streams {
public:
    Streams(std::uint64_t master_seed, std::uint32_t num_servers)
        : arrival_(stream_key(master_seed, StreamTag::Arrival)),
          assign_(stream_key(master_seed, StreamTag::Assign)),
          policy_(stream_key(master_seed, StreamTag::Policy)),
          seed_(master_seed) {
        route_.reserve(num_servers);
        service_.reserve(num_servers);
        for (std::uint32_t j = 0; j < num_servers; ++j) {
            route_.push_back(stream_key(master_seed, StreamTag::Route, j));
            service_.push_back(stream_key(master_seed, StreamTag::Service, j));
        }
    }

    std::uint64_t master_seed() const { return seed_; }

    double arrival(std::uint64_t epoch) const { return draw_uniform(arrival_, epoch); }
    double assign(std::uint64_t arrival_count) const {
        return draw_uniform(assign_, arrival_count);
    }
    double policy(std::uint64_t index) const { return draw_uniform(policy_, index); }
    double route(std::uint32_t server, std::uint64_t index) const {
        return draw_uniform(route_[server], index);
    }
    double service(std::uint32_t server, std::uint64_t epoch) const {
        return draw_uniform(service_[server], epoch);
    }

private:
    std::uint64_t arrival_;
    std::uint64_t assign_;
    std::uint64_t policy_;
    std::uint64_t seed_;
    std::vector<std::uint64_t> route_;
    std::vector<std::uint64_t> service_;
};

}  // namespace qnet::rng
