#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include "qnet/errors.hpp"
#include "qnet/exactkernel.hpp"
#include "qnet/json_io.hpp"
#include "qnet/mc_drift.hpp"
#include "qnet/model.hpp"
#include "qnet/reduction.hpp"
#include "qnet/scenario.hpp"
#include "qnet/simulate.hpp"
#include "qnet/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssertion = 3;

struct CommonOptions {
    std::string spec_path;
    std::string policy = "fifo";
    std::uint64_t horizon = 1000000;
    std::string seeds = "1";
    std::uint64_t stride = 1000;
    std::string out_dir;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

// "fifo" | "lifo" | "random" | "priority" | "priority:2,1" |
// "priority:s1=2,1;s2=1,2" (1-based classes and servers).
Policy parse_policy(const std::string& text) {
    if (text == "fifo") return Policy::fifo();
    if (text == "lifo") return Policy::lifo();
    if (text == "random") return Policy::random_order();
    if (text == "priority") return Policy::priority({});
    const std::string prefix = "priority:";
    if (text.rfind(prefix, 0) != 0)
        throw ConfigError("unknown policy: " + text +
                          " (expected fifo|lifo|random|priority[:...])");
    const std::string body = text.substr(prefix.size());

    auto parse_order = [](const std::string& csv) {
        std::vector<std::uint32_t> order;
        std::size_t pos = 0;
        while (pos < csv.size()) {
            std::size_t next = csv.find(',', pos);
            if (next == std::string::npos) next = csv.size();
            const int v = std::stoi(csv.substr(pos, next - pos));
            if (v < 1) throw ConfigError("priority classes are 1-based");
            order.push_back(static_cast<std::uint32_t>(v - 1));
            pos = next + 1;
        }
        return order;
    };

    if (body.find('=') == std::string::npos) return Policy::priority(parse_order(body));

    std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>> per_server;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t next = body.find(';', pos);
        if (next == std::string::npos) next = body.size();
        const std::string item = body.substr(pos, next - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || item.empty() || item[0] != 's')
            throw ConfigError("per-server priority syntax: s<j>=c1,c2;...");
        const int server = std::stoi(item.substr(1, eq - 1));
        if (server < 1) throw ConfigError("priority servers are 1-based");
        per_server.emplace_back(static_cast<std::uint32_t>(server - 1),
                                parse_order(item.substr(eq + 1)));
        pos = next + 1;
    }
    std::uint32_t max_server = 0;
    for (const auto& [s, _] : per_server) max_server = std::max(max_server, s);
    std::vector<std::vector<std::uint32_t>> orders(max_server + 1);
    for (auto& [s, order] : per_server) orders[s] = std::move(order);
    return Policy::priority_per_server(std::move(orders));
}

// Either a count N (seeds 1..N) or an explicit comma list.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    if (text.find(',') == std::string::npos) {
        const long long n = std::stoll(text);
        if (n < 1) throw ConfigError("seed count must be >= 1");
        for (long long s = 1; s <= n; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
        return seeds;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        seeds.push_back(std::stoull(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (seeds.empty()) throw ConfigError("no seeds given");
    return seeds;
}

fs::path ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw ConfigError("--out directory is required for this command");
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

json with_timestamp(json j) {
    j["generated_at"] = std::time(nullptr);
    return j;
}

// Deterministic fan-out: one task per seed, results merged by index.
template <typename Fn>
auto run_per_seed(const std::vector<std::uint64_t>& seeds, unsigned jobs, Fn&& fn) {
    using Result = decltype(fn(std::uint64_t{0}));
    std::vector<Result> results(seeds.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= seeds.size()) return;
            results[i] = fn(seeds[i]);
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size()));
    for (unsigned t = 0; t + 1 < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

void print_matrix(const char* title, const Matrix& m) {
    std::printf("%s\n", title);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::printf("  ");
        for (std::size_t c = 0; c < m.cols(); ++c)
            std::printf("%12.8f", m(r, c));
        std::printf("\n");
    }
}

// --- commands ---------------------------------------------------------------

int cmd_analyze(const CommonOptions& opt) {
    const NetworkSpec spec = load_spec(opt.spec_path);
    const auto report = validate_network(spec);
    if (!report.valid()) {
        for (const auto& f : report.failures)
            std::fprintf(stderr, "invalid spec [%s]: %s\n", f.check.c_str(), f.detail.c_str());
        return kExitConfig;
    }
    for (const auto& w : report.warnings)
        std::printf("warning [%s]: %s\n", w.check.c_str(), w.detail.c_str());

    const TrafficSolution sol = solve_traffic(spec);
    print_matrix("Lambda (equilibrium arrival rates, class x server):", sol.arrival_rate);
    print_matrix("rho (loads, class x server):", sol.load);
    print_matrix("Gamma (visit counts, from x to):", sol.visit_counts);
    for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
        const bool ok = sol.server_load[j] < 1.0;
        std::printf("server %u: sum_a rho = %.8f -> traffic condition %s\n", j + 1,
                    sol.server_load[j], ok ? "holds" : "FAILS");
        std::printf("  conservation residual %.3e (exogenous reading %.3e)\n",
                    sol.conservation_residual[j], sol.conservation_residual_exogenous[j]);
    }
    if (spec.single_rate()) {
        const auto profile = drift_profile(spec, sol);
        for (std::uint32_t j = 0; j < spec.num_servers; ++j)
            std::printf("server %u: eta = %.8f, epsilon = %.8f\n", j + 1, profile.eta[j],
                        profile.epsilon[j]);
    } else {
        std::printf("(mixed service rates: eta/epsilon closed forms need the reduced network;"
                    " run `qnet reduce`)\n");
    }
    if (!opt.out_dir.empty()) {
        const auto dir = ensure_out_dir(opt.out_dir);
        json j;
        j["spec"] = spec_to_json(spec);
        json rows = json::array();
        for (std::uint32_t a = 0; a < spec.num_classes; ++a) {
            json row = json::array();
            for (std::uint32_t s = 0; s < spec.num_servers; ++s)
                row.push_back(sol.arrival_rate(a, s));
            rows.push_back(std::move(row));
        }
        j["arrival_rate"] = std::move(rows);
        j["server_load"] = sol.server_load;
        j["conservation_residual"] = sol.conservation_residual;
        j["conservation_residual_exogenous"] = sol.conservation_residual_exogenous;
        write_json(with_timestamp(j), dir / "analysis.json");
    }
    return kExitOk;
}

int cmd_reduce(const CommonOptions& opt, double eta) {
    const NetworkSpec spec = load_spec(opt.spec_path);
    require_valid(spec);
    const TrafficSolution sol = solve_traffic(spec);
    const Matrix eta_matrix = eta > 0.0 ? Matrix(1, 1, eta) : Matrix();
    const ReducedNetwork red = build_reduction(spec, sol, eta_matrix);
    const ReductionReport report = verify_reduction(red);

    json j = reduction_to_json(red);
    j["verification"] = reduction_report_to_json(report);
    std::cout << j.dump(2) << "\n";

    std::printf("\ninequality ledger:\n");
    for (const auto& c : report.checks)
        std::printf("  [%s] %-45s margin %.6e%s\n", c.ok ? "ok" : "VIOLATED", c.name.c_str(),
                    c.margin, c.detail.empty() ? "" : (" (" + c.detail + ")").c_str());
    if (!opt.out_dir.empty())
        write_json(with_timestamp(j), ensure_out_dir(opt.out_dir) / "reduction.json");
    return report.all_ok() ? kExitOk : kExitAssertion;
}

int cmd_simulate(const CommonOptions& opt, const std::string& x0_json) {
    const NetworkSpec spec = load_spec(opt.spec_path);
    require_valid(spec);
    const Policy policy = parse_policy(opt.policy);
    const auto seeds = parse_seeds(opt.seeds);
    const auto dir = ensure_out_dir(opt.out_dir);

    CountVector x0(spec.num_classes, spec.num_servers);
    if (!x0_json.empty()) {
        const json j = json::parse(x0_json);
        for (std::uint32_t a = 0; a < spec.num_classes; ++a)
            for (std::uint32_t s = 0; s < spec.num_servers; ++s)
                x0.at(a, s) = j.at(a).at(s).get<std::int64_t>();
    }

    const auto traces = run_per_seed(seeds, opt.jobs, [&](std::uint64_t seed) {
        RunOptions options;
        options.record_stride = opt.stride;
        options.initial_state = &x0;
        return run(spec, policy, opt.horizon, seed, options);
    });

    std::ofstream summary(dir / "summary.csv");
    summary << "seed,slope,r_squared,final_total";
    for (std::uint32_t j = 0; j < spec.num_servers; ++j) summary << ",avg_full_" << (j + 1);
    summary << "\n";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        write_trace_csv(traces[i], dir / ("trace_" + std::to_string(seeds[i]) + ".csv"));
        const auto solo = assess_stability({traces[i]});
        summary << seeds[i] << ',' << format_double(solo.slope) << ','
                << format_double(solo.r_squared_mean) << ',' << traces[i].totals.back();
        for (std::uint32_t j = 0; j < spec.num_servers; ++j)
            summary << ',' << format_double(solo.avg_full[j]);
        summary << "\n";
    }
    summary.close();

    const StabilityReport pooled = assess_stability(traces);
    json j = stability_to_json(pooled);
    j["policy"] = policy.name();
    j["seeds"] = seeds;
    write_json(with_timestamp(j), dir / "report.json");
    std::printf("verdict: %s (slope %.3e in [%.3e, %.3e], nested gap %.3f)\n",
                verdict_name(pooled.verdict), pooled.slope, pooled.slope_ci_low,
                pooled.slope_ci_high, pooled.max_nested_gap);
    return kExitOk;
}

int cmd_couple(const CommonOptions& opt, double eta) {
    const NetworkSpec spec = load_spec(opt.spec_path);
    require_valid(spec);
    const TrafficSolution sol = solve_traffic(spec);
    const ReducedNetwork red =
        build_reduction(spec, sol, eta > 0.0 ? Matrix(1, 1, eta) : Matrix());
    const ReductionReport verification = verify_reduction(red);
    if (!verification.all_ok()) {
        std::fprintf(stderr, "reduction failed verification\n");
        return kExitAssertion;
    }
    const Policy policy = parse_policy(opt.policy);
    const auto seeds = parse_seeds(opt.seeds);
    const auto dir = ensure_out_dir(opt.out_dir);

    const auto reports = run_per_seed(seeds, opt.jobs, [&](std::uint64_t seed) {
        return coupled_run(red, policy, opt.horizon, seed, opt.horizon).report;
    });

    json arr = json::array();
    bool all_ok = true;
    for (const auto& r : reports) {
        arr.push_back(dominance_to_json(r));
        all_ok &= r.dominance_ok;
    }
    json j;
    j["dominance_ok"] = all_ok;
    j["runs"] = std::move(arr);
    j["reduction"] = reduction_to_json(red);
    write_json(with_timestamp(j), dir / "report.json");
    std::printf("coupling dominance: %s over %zu seeds x %llu epochs\n",
                all_ok ? "ok" : "VIOLATED", seeds.size(),
                static_cast<unsigned long long>(opt.horizon));
    return all_ok ? kExitOk : kExitAssertion;
}

int cmd_dominate(const CommonOptions& opt, const std::string& x0_json) {
    const NetworkSpec spec = load_spec(opt.spec_path);
    require_valid(spec);
    const Policy policy = parse_policy(opt.policy);
    const auto seeds = parse_seeds(opt.seeds);
    const auto dir = ensure_out_dir(opt.out_dir);

    CountVector x0(spec.num_classes, spec.num_servers);
    if (x0_json.empty()) throw ConfigError("--x0 is required (JSON class x server counts)");
    {
        const json j = json::parse(x0_json);
        for (std::uint32_t a = 0; a < spec.num_classes; ++a)
            for (std::uint32_t s = 0; s < spec.num_servers; ++s)
                x0.at(a, s) = j.at(a).at(s).get<std::int64_t>();
    }

    const auto reports = run_per_seed(seeds, opt.jobs, [&](std::uint64_t seed) {
        return monotone_coupled_run(spec, policy, x0, opt.horizon, seed);
    });
    json arr = json::array();
    bool all_ok = true;
    for (const auto& r : reports) {
        arr.push_back(dominance_to_json(r));
        all_ok &= r.dominance_ok;
    }
    json j;
    j["dominance_ok"] = all_ok;
    j["runs"] = std::move(arr);
    write_json(with_timestamp(j), dir / "report.json");
    std::printf("per-queue dominance: %s over %zu seeds x %llu epochs\n",
                all_ok ? "ok" : "VIOLATED", seeds.size(),
                static_cast<unsigned long long>(opt.horizon));
    return all_ok ? kExitOk : kExitAssertion;
}

int cmd_kernel(const CommonOptions& opt, std::uint32_t cap, std::uint32_t n_max,
               const std::string& ks_text) {
    const NetworkSpec spec = load_spec(opt.spec_path);
    require_valid(spec);
    const TrafficSolution sol = solve_traffic(spec);
    const TruncatedChain chain = build_kernel(spec, cap);
    std::vector<std::uint32_t> ks;
    for (const auto s : parse_seeds(ks_text)) ks.push_back(static_cast<std::uint32_t>(s));

    json j;
    j["cap"] = cap;
    j["n_max"] = n_max;
    j["num_states"] = chain.num_states();
    j["uniformization"] = chain.uniformization();

    json lemma = json::array();
    for (std::uint32_t server = 0; server < spec.num_servers; ++server) {
        const LemmaReport rep = verify_lemma(chain, server, n_max);
        json r;
        r["server"] = server + 1;
        r["passed"] = rep.passed();
        r["min_slack"] = rep.min_slack;
        r["argmin_n"] = rep.argmin_n;
        r["stable_probes"] = rep.stable_probes;
        r["artifact_probes"] = rep.artifact_probes;
        r["artifact_violations"] = rep.artifact_violations;
        r["min_artifact_slack"] = rep.min_artifact_slack;
        r["truncation_discrepancy"] = rep.truncation_discrepancy;
        lemma.push_back(std::move(r));
        std::printf("lemma server %u: %s (min stable slack %.3e over %zu probes; %zu boundary"
                    " probes excluded, %zu of them inverted)\n",
                    server + 1, rep.passed() ? "passed" : "FAILED", rep.min_slack,
                    rep.stable_probes, rep.artifact_probes, rep.artifact_violations);
    }
    j["lemma"] = std::move(lemma);

    if (!spec.single_rate()) {
        std::printf("(drift tables need a single-rate spec; skipped)\n");
    } else {
        json drift = json::array();
        for (std::uint32_t server = 0; server < spec.num_servers; ++server) {
            for (const std::uint32_t k : ks) {
                const auto table = exact_k_drift_all(chain, sol.visit_counts, server, k);
                double max_gap = 0.0;       // |direct - identity|
                double max_excess = -1e300;  // value(x) - value(0), interior states
                std::size_t monotone_violations = 0;
                double worst_monotone = 0.0;
                const double at_zero = table.direct[chain.zero_state()];
                for (std::size_t i = 0; i < chain.num_states(); ++i) {
                    max_gap = std::max(max_gap,
                                       std::fabs(table.direct[i] - table.identity[i]));
                    std::uint64_t total = 0;
                    for (const auto c : chain.state(i)) total += c;
                    if (total + 5 <= cap)
                        max_excess = std::max(max_excess, table.direct[i] - at_zero);
                    // Componentwise monotonicity, reported only: adjacent pairs.
                    if (total + 1 <= cap) {
                        auto up = chain.state(i);
                        for (std::uint32_t d = 0; d < spec.num_servers; ++d) {
                            ++up[d];
                            const double excess = table.direct[chain.index_of(up)] -
                                                  table.direct[i];
                            if (excess > 1e-10) {
                                ++monotone_violations;
                                worst_monotone = std::max(worst_monotone, excess);
                            }
                            --up[d];
                        }
                    }
                }
                json r;
                r["server"] = server + 1;
                r["k"] = k;
                r["value_at_zero"] = at_zero;
                r["max_path_gap"] = max_gap;
                r["max_excess_over_zero_interior"] = max_excess;
                r["componentwise_monotone_violations"] = monotone_violations;
                r["worst_componentwise_excess"] = worst_monotone;
                drift.push_back(std::move(r));
            }
        }
        j["drift"] = std::move(drift);
    }

    if (!opt.out_dir.empty())
        write_json(with_timestamp(j), ensure_out_dir(opt.out_dir) / "kernel.json");
    else
        std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonOptions& opt, const std::string& grid_text) {
    const NetworkSpec base = load_spec(opt.spec_path);
    require_valid(base);
    const Policy policy = parse_policy(opt.policy);
    const auto seeds = parse_seeds(opt.seeds);
    const auto dir = ensure_out_dir(opt.out_dir);

    std::vector<double> grid;
    std::size_t pos = 0;
    while (pos < grid_text.size()) {
        std::size_t next = grid_text.find(',', pos);
        if (next == std::string::npos) next = grid_text.size();
        grid.push_back(std::stod(grid_text.substr(pos, next - pos)));
        pos = next + 1;
    }

    std::ofstream summary(dir / "summary.csv");
    summary << "multiplier,verdict,slope,slope_ci_low,slope_ci_high,r_squared_min,"
               "max_nested_gap\n";
    json all = json::array();
    for (const double m : grid) {
        NetworkSpec spec = base;
        spec.lambda *= m;
        require_valid(spec);
        const auto traces = run_per_seed(seeds, opt.jobs, [&](std::uint64_t seed) {
            return run(spec, policy, opt.horizon, seed, {.record_stride = opt.stride});
        });
        const StabilityReport rep = assess_stability(traces);
        summary << format_double(m) << ',' << verdict_name(rep.verdict) << ','
                << format_double(rep.slope) << ',' << format_double(rep.slope_ci_low) << ','
                << format_double(rep.slope_ci_high) << ',' << format_double(rep.r_squared_min)
                << ',' << format_double(rep.max_nested_gap) << "\n";
        json entry = stability_to_json(rep);
        entry["multiplier"] = m;
        all.push_back(std::move(entry));
        std::printf("multiplier %.3f: %s\n", m, verdict_name(rep.verdict));
    }
    json j;
    j["grid"] = std::move(all);
    write_json(with_timestamp(j), dir / "report.json");
    return kExitOk;
}

int cmd_demo(const CommonOptions& opt, const std::string& scenario_path, bool analogue,
             const std::string& policy_override) {
    const RoutedScenario scenario = load_scenario(scenario_path);
    const auto seeds = parse_seeds(opt.seeds);
    const auto dir = ensure_out_dir(opt.out_dir);

    std::vector<Trace> traces;
    json meta;
    if (analogue) {
        const NetworkSpec spec = class_independent_analogue(scenario);
        require_valid(spec);
        const Policy policy = policy_override.empty() ? analogue_priority_policy(scenario)
                                                      : parse_policy(policy_override);
        traces = run_per_seed(seeds, opt.jobs, [&](std::uint64_t seed) {
            return run(spec, policy, opt.horizon, seed, {.record_stride = opt.stride});
        });
        meta["mode"] = "class_independent_analogue";
        meta["analogue_spec"] = spec_to_json(spec);
    } else {
        RoutedScenario sc = scenario;
        if (!policy_override.empty()) {
            if (policy_override == "fifo") sc.policy = ScenarioPolicy::Fifo;
            else if (policy_override == "later_leg_priority")
                sc.policy = ScenarioPolicy::LaterLegPriority;
            else
                throw ConfigError("scenario policy override must be fifo or later_leg_priority");
        }
        traces = run_per_seed(seeds, opt.jobs, [&](std::uint64_t seed) {
            return demo_route_run(sc, opt.horizon, seed, opt.stride);
        });
        meta["mode"] = "fixed_routes";
        const auto loads = sc.nominal_loads();
        meta["nominal_loads"] = loads;
    }

    for (std::size_t i = 0; i < seeds.size(); ++i)
        write_trace_csv(traces[i], dir / ("trace_" + std::to_string(seeds[i]) + ".csv"));
    const StabilityReport rep = assess_stability(traces);
    json j = stability_to_json(rep);
    j["demo"] = std::move(meta);
    write_json(with_timestamp(j), dir / "report.json");
    std::printf("verdict: %s (slope %.3e, min r^2 %.3f)\n", verdict_name(rep.verdict),
                rep.slope, rep.r_squared_min);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiclass queueing network analysis and simulation"};
    app.require_subcommand(1);

    CommonOptions opt;
    double eta = 0.0;
    std::string x0_json;
    std::uint32_t cap = 20, n_max = 100;
    std::string ks_text = "1,10,100";
    std::string grid_text = "0.5,0.8,0.95,1.2";
    std::string scenario_path;
    std::string policy_override;
    bool analogue = false;

    auto add_common = [&](CLI::App* cmd, bool needs_spec = true) {
        if (needs_spec)
            cmd->add_option("--spec", opt.spec_path, "network spec JSON file")->required();
        cmd->add_option("--policy", opt.policy, "fifo|lifo|random|priority[:order]");
        cmd->add_option("--horizon", opt.horizon, "number of uniformized epochs");
        cmd->add_option("--seeds", opt.seeds, "seed count N (1..N) or comma list");
        cmd->add_option("--stride", opt.stride, "record every stride-th epoch");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--jobs", opt.jobs, "parallel seed workers");
    };

    auto* analyze = app.add_subcommand("analyze", "traffic solution and drift profile");
    add_common(analyze);
    auto* reduce = app.add_subcommand("reduce", "single-rate companion network");
    add_common(reduce);
    reduce->add_option("--eta", eta, "scalar slack (default: derived)");
    auto* simulate = app.add_subcommand("simulate", "uniformized simulation per seed");
    add_common(simulate);
    simulate->add_option("--x0", x0_json, "initial counts, JSON class x server");
    auto* couple = app.add_subcommand("couple", "coupled fast/slow dominance run");
    add_common(couple);
    couple->add_option("--eta", eta, "scalar slack (default: derived)");
    auto* dominate = app.add_subcommand("dominate", "from-x0 versus from-empty dominance");
    add_common(dominate);
    dominate->add_option("--x0", x0_json, "initial counts, JSON class x server")->required();
    auto* kernel = app.add_subcommand("kernel", "exact truncated-chain checks");
    add_common(kernel);
    kernel->add_option("--cap", cap, "total-count truncation cap");
    kernel->add_option("--nmax", n_max, "monotonicity horizon");
    kernel->add_option("--ks", ks_text, "drift step counts, comma list");
    auto* sweep = app.add_subcommand("sweep", "stability verdicts over a load grid");
    add_common(sweep);
    sweep->add_option("--grid", grid_text, "lambda multipliers, comma list");
    auto* demo = app.add_subcommand("demo", "fixed-route scenario runs");
    demo->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    demo->add_flag("--analogue", analogue, "run the class-independent analogue instead");
    demo->add_option("--policy", policy_override, "override the scenario policy");
    demo->add_option("--horizon", opt.horizon, "number of uniformized epochs");
    demo->add_option("--seeds", opt.seeds, "seed count N (1..N) or comma list");
    demo->add_option("--stride", opt.stride, "record every stride-th epoch");
    demo->add_option("--out", opt.out_dir, "output directory")->required();
    demo->add_option("--jobs", opt.jobs, "parallel seed workers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(opt);
        if (reduce->parsed()) return cmd_reduce(opt, eta);
        if (simulate->parsed()) return cmd_simulate(opt, x0_json);
        if (couple->parsed()) return cmd_couple(opt, eta);
        if (dominate->parsed()) return cmd_dominate(opt, x0_json);
        if (kernel->parsed()) return cmd_kernel(opt, cap, n_max, ks_text);
        if (sweep->parsed()) return cmd_sweep(opt, grid_text);
        if (demo->parsed()) return cmd_demo(opt, scenario_path, analogue, policy_override);
    } catch (const CouplingBroken& e) {
        std::fprintf(stderr, "coupling assertion failed: %s\n", e.what());
        return kExitAssertion;
    } catch (const std::logic_error& e) {
        std::fprintf(stderr, "internal assertion failed: %s\n", e.what());
        return kExitAssertion;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
