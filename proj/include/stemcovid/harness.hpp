#pragma once
/**
 * Scenario batches and evaluation.
 *
 * Each run simulates a world, encodes the traces into a collective memory,
 * and ranks untested agents with both the memory search and the brute-force
 * baseline. Simulation and encoding of different runs may proceed in
 * parallel; the timed similarity computations always run one at a time.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "stemcovid/errors.hpp"
#include "stemcovid/io.hpp"
#include "stemcovid/memory.hpp"
#include "stemcovid/search.hpp"
#include "stemcovid/sim.hpp"

namespace stemcovid::harness {

using search::Method;
using search::RankedCandidate;
using search::Seconds;

inline const std::vector<std::size_t> kDefaultKGrid{1, 3, 5, 15, 25};

enum class Target { ACC, Index };

inline std::string_view to_string(Target t) { return t == Target::ACC ? "acc" : "index"; }

struct RunResult {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<sim::HourCounts> counts;
    std::vector<RankedCandidate> stem;
    std::vector<RankedCandidate> baseline;
    Seconds stem_time{0.0};
    Seconds baseline_time{0.0};
    std::vector<AgentId> acc_set;    // sorted; index cases included
    std::vector<AgentId> index_set;  // sorted
    std::size_t untested = 0;
    std::size_t positives = 0;
    std::size_t registry_size = 0;
    std::size_t registry_bound = 0;
    double index_secondary = 0.0;

    const std::vector<RankedCandidate>& ranked(Method m) const { return m == Method::Stem ? stem : baseline; }
    const std::vector<AgentId>& targets(Target t) const { return t == Target::ACC ? acc_set : index_set; }
};

struct BatchOptions {
    search::SearchConfig search{};
    bool timing = true;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Run seed for the i-th run of a batch.
inline std::uint64_t run_seed(std::uint64_t master, int run_index) {
    return master + static_cast<std::uint64_t>(run_index);
}

namespace detail {

struct Prepared {
    sim::SimulationOutput output;
    CollectiveMemory memory;
    search::BaselineInput baseline_input;
};

inline Prepared prepare(const sim::ScenarioConfig& cfg, std::uint64_t seed) {
    Prepared p{sim::run_simulation(cfg, seed), {}, {}};
    const auto dataset = p.output.dataset();
    p.memory = build_memory(dataset);
    p.baseline_input = search::split_by_label(dataset);
    return p;
}

inline RunResult evaluate(const Prepared& p, const search::SearchConfig& cfg, bool timing) {
    RunResult r;
    r.scenario = p.output.config.name;
    r.seed = p.output.seed;
    r.counts = p.output.counts;
    r.acc_set = p.output.acc_agents();
    r.index_set = p.output.index_agents();
    r.untested = p.output.untested_count();
    r.positives = p.output.labels.size() - r.untested;
    r.registry_size = p.memory.registry().size();
    r.registry_bound = registry_bound(p.memory.T(), p.memory.P(), p.memory.size());
    r.index_secondary = p.output.index_secondary_infections();

    auto stem = search::timing_probe(p.memory, cfg);
    auto base = search::timing_probe(p.baseline_input);
    r.stem = std::move(stem.ranked);
    r.baseline = std::move(base.ranked);
    if (timing) {
        r.stem_time = stem.elapsed;
        r.baseline_time = base.elapsed;
    }
    return r;
}

}  // namespace detail

/// Simulate, encode and search every run of the batch. Output depends only on (cfg, cfg.seed).
inline std::vector<RunResult> run_scenario_batch(const sim::ScenarioConfig& cfg, const BatchOptions& opt = {}) {
    cfg.validate();
    opt.search.validate();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned threads = std::max(1u, std::min(opt.threads == 0 ? hw : opt.threads, static_cast<unsigned>(cfg.runs)));

    std::vector<RunResult> results(static_cast<std::size_t>(cfg.runs));
    for (int first = 0; first < cfg.runs; first += static_cast<int>(threads)) {
        const int last = std::min(cfg.runs, first + static_cast<int>(threads));
        std::vector<std::future<detail::Prepared>> jobs;
        for (int i = first; i < last; ++i) {
            jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                      [&cfg, seed = run_seed(cfg.seed, i)] { return detail::prepare(cfg, seed); }));
        }
        // Timed sections run sequentially on this thread.
        for (int i = first; i < last; ++i) {
            const auto prepared = jobs[static_cast<std::size_t>(i - first)].get();
            results[static_cast<std::size_t>(i)] = detail::evaluate(prepared, opt.search, opt.timing);
        }
    }
    return results;
}

inline bool hit_in_topk(const RunResult& r, std::size_t k, Target target, Method method) {
    const auto& ranked = r.ranked(method);
    const auto& truth = r.targets(target);
    const auto n = std::min(k, ranked.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (std::binary_search(truth.begin(), truth.end(), ranked[i].agent_id)) return true;
    }
    return false;
}

/// Fraction of runs with at least one target among the top k candidates.
inline double topk_success(std::span<const RunResult> results, std::size_t k, Target target,
                           Method method = Method::Stem) {
    if (results.empty()) throw ValidationError("topk_success: empty batch");
    if (k == 0) throw ValidationError("topk_success: k must be >= 1");
    std::size_t hits = 0;
    for (const auto& r : results) hits += hit_in_topk(r, k, target, method) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

/// Chance of a target among k uniform picks with replacement, 1 - (1 - n_target/n_untested)^k.
inline double random_topk_success(const RunResult& r, std::size_t k, Target target) {
    if (r.untested == 0) return 0.0;
    const double frac = static_cast<double>(r.targets(target).size()) / static_cast<double>(r.untested);
    return 1.0 - std::pow(1.0 - std::min(1.0, frac), static_cast<double>(k));
}

/// Top-k agent sets of both methods coincide.
inline bool methods_agree(const RunResult& r, std::size_t k) {
    auto top = [k](const std::vector<RankedCandidate>& v) {
        std::vector<AgentId> ids;
        for (std::size_t i = 0; i < std::min(k, v.size()); ++i) ids.push_back(v[i].agent_id);
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    return top(r.stem) == top(r.baseline);
}

struct SuccessEntry {
    std::string scenario;
    std::size_t k = 0;
    Target target = Target::ACC;
    Method method = Method::Stem;
    double success_rate = 0.0;
    std::size_t runs = 0;
};

using SuccessTable = std::vector<SuccessEntry>;

inline SuccessTable success_table(std::span<const RunResult> results, std::span<const std::size_t> k_grid) {
    SuccessTable t;
    for (auto method : {Method::Stem, Method::Baseline}) {
        for (auto target : {Target::ACC, Target::Index}) {
            for (auto k : k_grid) {
                t.push_back({results.front().scenario, k, target, method, topk_success(results, k, target, method),
                             results.size()});
            }
        }
    }
    return t;
}

struct GrowthRow {
    int hour = 0;
    double acc = 0.0;
    double tscc = 0.0;
    double scc = 0.0;
};

/// Mean cumulative counts across runs at every hour.
inline std::vector<GrowthRow> growth_series(std::span<const RunResult> results) {
    if (results.empty()) throw ValidationError("growth_series: empty batch");
    const auto hours = results.front().counts.size();
    std::vector<GrowthRow> rows(hours);
    for (std::size_t h = 0; h < hours; ++h) rows[h].hour = static_cast<int>(h);
    for (const auto& r : results) {
        if (r.counts.size() != hours) throw ContractViolation("growth_series: runs have different horizons");
        for (std::size_t h = 0; h < hours; ++h) {
            rows[h].acc += r.counts[h].acc;
            rows[h].tscc += r.counts[h].tscc;
            rows[h].scc += r.counts[h].scc;
        }
    }
    const double n = static_cast<double>(results.size());
    for (auto& row : rows) {
        row.acc /= n;
        row.tscc /= n;
        row.scc /= n;
    }
    return rows;
}

/// First hour at which the mean SCC count reaches `level`, or -1.
inline int first_hour_at_least(std::span<const GrowthRow> series, double level) {
    for (const auto& row : series) {
        if (row.scc >= level) return row.hour;
    }
    return -1;
}

struct TimingRow {
    std::string scenario;
    Method method = Method::Stem;
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

inline std::vector<TimingRow> timing_summary(std::span<const RunResult> results) {
    if (results.empty()) throw ValidationError("timing_summary: empty batch");
    std::vector<TimingRow> rows;
    for (auto method : {Method::Stem, Method::Baseline}) {
        TimingRow row{results.front().scenario, method, 0.0, 0.0, 0.0};
        std::vector<double> v;
        for (const auto& r : results) v.push_back((method == Method::Stem ? r.stem_time : r.baseline_time).count());
        row.min = *std::min_element(v.begin(), v.end());
        row.max = *std::max_element(v.begin(), v.end());
        double sum = 0.0;
        for (double x : v) sum += x;
        row.mean = std::clamp(sum / static_cast<double>(v.size()), row.min, row.max);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Tables

inline void write_results_rows(std::ostream& out, std::span<const RunResult> results,
                               std::span<const std::size_t> k_grid, bool header = true) {
    if (header) out << "scenario,seed,method,k,target,hit\n";
    for (const auto& r : results) {
        for (auto method : {Method::Stem, Method::Baseline}) {
            for (auto k : k_grid) {
                for (auto target : {Target::ACC, Target::Index}) {
                    out << r.scenario << ',' << r.seed << ',' << search::to_string(method) << ',' << k << ','
                        << to_string(target) << ',' << (hit_in_topk(r, k, target, method) ? 1 : 0) << '\n';
                }
            }
        }
    }
}

inline void write_success_table(std::ostream& out, std::span<const SuccessEntry> table, bool header = true) {
    if (header) out << "scenario,method,target,k,success_rate,runs\n";
    for (const auto& e : table) {
        out << e.scenario << ',' << search::to_string(e.method) << ',' << to_string(e.target) << ',' << e.k << ','
            << io::format_double(e.success_rate) << ',' << e.runs << '\n';
    }
}

inline void write_growth_series(std::ostream& out, std::string_view scenario, std::span<const GrowthRow> rows,
                                bool header = true) {
    if (header) out << "scenario,hour,acc_mean,tscc_mean,scc_mean\n";
    for (const auto& r : rows) {
        out << scenario << ',' << r.hour << ',' << io::format_double(r.acc) << ',' << io::format_double(r.tscc) << ','
            << io::format_double(r.scc) << '\n';
    }
}

inline void write_timing_table(std::ostream& out, std::span<const TimingRow> rows, bool header = true) {
    if (header) out << "scenario,method,min,mean,max\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << search::to_string(r.method) << ',' << io::format_double(r.min) << ','
            << io::format_double(r.mean) << ',' << io::format_double(r.max) << '\n';
    }
}

/// Per-run summary: population split, memory size and index-case reach.
inline void write_run_summary(std::ostream& out, std::span<const RunResult> results, bool header = true) {
    if (header) {
        out << "scenario,seed,untested,positives,acc,index,final_acc,final_tscc,final_scc,index_secondary,"
               "registry_size,registry_bound\n";
    }
    for (const auto& r : results) {
        const auto& last = r.counts.back();
        out << r.scenario << ',' << r.seed << ',' << r.untested << ',' << r.positives << ',' << r.acc_set.size() << ','
            << r.index_set.size() << ',' << last.acc << ',' << last.tscc << ',' << last.scc << ','
            << io::format_double(r.index_secondary) << ',' << r.registry_size << ',' << r.registry_bound << '\n';
    }
}

}  // namespace stemcovid::harness
