// stemcovid: simulate epidemics, encode traces into a collective episodic
// memory, and search the memory for likely asymptomatic carriers.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal invariant violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stemcovid/stemcovid.hpp"

namespace fs = std::filesystem;
using namespace stemcovid;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

bool verbose() {
    const char* v = std::getenv("STEMCOVID_VERBOSE");
    return v && *v && std::string(v) != "0";
}

void log(const std::string& msg) {
    if (verbose()) std::cerr << "[stemcovid] " << msg << '\n';
}

/// Scenario from a preset name, or from a JSON file holding a configuration or a run manifest.
struct ResolvedScenario {
    sim::ScenarioConfig config;
    std::optional<std::uint64_t> manifest_seed;
};

ResolvedScenario resolve_scenario(const std::string& name, const std::string& config_path) {
    if (name.empty() == config_path.empty()) throw ValidationError("give exactly one of a scenario name or --config");
    if (!name.empty()) return {sim::preset(name), std::nullopt};

    const auto j = io::read_json(config_path);
    if (j.contains("config")) {
        ResolvedScenario r{io::config_from_json(j.at("config")), std::nullopt};
        if (j.contains("seed")) r.manifest_seed = j.at("seed").get<std::uint64_t>();
        return r;
    }
    sim::ScenarioConfig base;
    if (j.contains("name") && j.at("name").is_string()) {
        const auto n = j.at("name").get<std::string>();
        for (auto p : sim::kPresetNames) {
            if (n == p) base = sim::preset(n);
        }
    }
    return {io::config_from_json(j, base), std::nullopt};
}

std::ostream& output_stream(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file = io::open_out(path);
    return file;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario, config, out;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
    auto resolved = resolve_scenario(a.scenario, a.config);
    const auto seed = a.seed ? *a.seed : resolved.manifest_seed.value_or(resolved.config.seed);
    log("simulating " + resolved.config.name + " seed " + std::to_string(seed));
    const auto out = sim::run_simulation(resolved.config, seed);
    io::write_dataset(out, a.out);
    std::cout << "wrote " << a.out << ": agents=" << out.traces.size() << " positives="
              << (out.labels.size() - out.untested_count()) << " infections=" << out.infection_log.size() << '\n';
    return kOk;
}

struct EncodeArgs {
    std::string dataset, out;
};

int cmd_encode(const EncodeArgs& a) {
    const auto dataset = io::read_dataset(a.dataset);
    CollectiveMemory memory;
    try {
        memory = build_memory(dataset);
    } catch (const ValidationError& e) {
        throw DataError(a.dataset, 0, e.what());
    }
    io::save_snapshot(a.out, memory);
    io::write_json(a.out + ".manifest.json", json{{"command", "encode"},
                                                  {"dataset", a.dataset},
                                                  {"snapshot", a.out},
                                                  {"T", memory.T()},
                                                  {"P", memory.P()}});
    // The saved file must load back to the same memory.
    if (!(io::load_snapshot(a.out) == memory)) throw ContractViolation("snapshot round trip mismatch");
    std::cout << "registry_size=" << memory.registry().size() << " individuals=" << memory.size()
              << " bound=" << registry_bound(memory.T(), memory.P(), memory.size()) << '\n';
    return kOk;
}

struct SearchArgs {
    std::string dataset, snapshot, out, method = "stem", pooling = "fuzzy_or", selection = "topk";
    std::size_t k = 5;
    double delta_c = 0.0;
};

int cmd_search(const SearchArgs& a) {
    if (a.dataset.empty() == a.snapshot.empty()) throw ValidationError("give exactly one of a dataset directory or --snapshot");
    search::SearchConfig cfg;
    cfg.method = search::parse_method(a.method);
    cfg.pooling = search::parse_pooling(a.pooling);
    if (a.selection == "topk") {
        cfg.selection = search::Selection::TopK;
    } else if (a.selection == "threshold") {
        cfg.selection = search::Selection::Threshold;
    } else {
        throw ValidationError("unknown selection '" + a.selection + "' (expected topk|threshold)");
    }
    cfg.k = a.k;
    cfg.delta_c = a.delta_c;
    cfg.validate();

    io::ResultMetadata meta;
    meta.k = cfg.k;
    meta.delta_c = cfg.delta_c;
    meta.method = cfg.method;
    meta.pooling = cfg.pooling;
    meta.selection = cfg.selection;

    CollectiveMemory memory;
    std::optional<std::vector<AgentId>> hits;
    if (!a.dataset.empty()) {
        const auto manifest = io::read_manifest(a.dataset);
        meta.scenario = manifest.config.name;
        meta.seed = manifest.seed;
        try {
            memory = build_memory(io::read_dataset(a.dataset));
        } catch (const ValidationError& e) {
            throw DataError(a.dataset, 0, e.what());
        }
        if (auto truth = io::read_ground_truth(a.dataset)) {
            hits.emplace();
            for (const auto& g : *truth) {
                if (g.status == sim::Status::ACC || g.status == sim::Status::Index) hits->push_back(g.agent_id);
            }
            std::sort(hits->begin(), hits->end());
        }
    } else {
        memory = io::load_snapshot(a.snapshot);
        meta.scenario = fs::path(a.snapshot).stem().string();
    }

    std::vector<search::RankedCandidate> ranked;
    if (cfg.method == search::Method::Stem) {
        ranked = search::rank_untested(memory, search::pool(memory, cfg), cfg);
    } else {
        const auto in = search::split_by_label(memory);
        ranked = search::rank_similarities(search::baseline_similarities(in.positives, in.untested, in.T));
    }

    const bool no_positives = std::none_of(memory.individuals().begin(), memory.individuals().end(),
                                           [](const IndividualNode& n) { return n.cp == Positivity::Positive; });
    std::vector<search::RankedCandidate> rows;
    std::string note;
    if (no_positives) {
        note = "no tested-positive individuals; evidence is empty and no candidate can be ranked";
    } else {
        const auto ids = search::select_candidates(ranked, cfg);
        rows.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(ids.size()));
    }

    std::ofstream file;
    auto& out = output_stream(a.out, file);
    io::write_results_table(out, meta, rows, hits ? &*hits : nullptr, note);
    if (!a.out.empty() && a.out != "-") {
        io::write_json(a.out + ".manifest.json",
                       json{{"command", "search"},
                            {"dataset", a.dataset},
                            {"snapshot", a.snapshot},
                            {"method", search::to_string(cfg.method)},
                            {"pooling", search::to_string(cfg.pooling)},
                            {"selection", search::to_string(cfg.selection)},
                            {"k", cfg.k},
                            {"delta_c", cfg.delta_c},
                            {"alpha", cfg.alpha}});
    }
    return kOk;
}

struct ExperimentArgs {
    std::string scenario, config, out = "experiment_out";
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::vector<std::size_t> k_list = harness::kDefaultKGrid;
    unsigned threads = 0;
};

int cmd_experiment(const ExperimentArgs& a) {
    auto cfg = resolve_scenario(a.scenario, a.config).config;
    if (a.runs) cfg.runs = *a.runs;
    if (a.seed) cfg.seed = *a.seed;
    for (auto k : a.k_list) {
        if (k == 0) throw ValidationError("k values must be >= 1");
    }
    cfg.validate();

    log("running " + std::to_string(cfg.runs) + " runs of " + cfg.name);
    harness::BatchOptions opt;
    opt.threads = a.threads;
    const auto results = harness::run_scenario_batch(cfg, opt);

    fs::create_directories(a.out);
    const fs::path dir(a.out);
    {
        auto f = io::open_out(dir / "results.csv");
        harness::write_results_rows(f, results, a.k_list);
    }
    {
        auto f = io::open_out(dir / "success.csv");
        harness::write_success_table(f, harness::success_table(results, a.k_list));
    }
    {
        auto f = io::open_out(dir / "growth.csv");
        harness::write_growth_series(f, cfg.name, harness::growth_series(results));
    }
    {
        auto f = io::open_out(dir / "timing.csv");
        harness::write_timing_table(f, harness::timing_summary(results));
    }
    {
        auto f = io::open_out(dir / "runs.csv");
        harness::write_run_summary(f, results);
    }
    io::write_json(dir / "manifest.json",
                   json{{"command", "experiment"}, {"k", a.k_list}, {"config", io::config_to_json(cfg)}});

    harness::write_success_table(std::cout, harness::success_table(results, a.k_list));
    return kOk;
}

struct BenchArgs {
    std::vector<std::string> scenarios;
    std::string out;
    std::optional<int> runs;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

int cmd_bench(const BenchArgs& a) {
    std::vector<harness::TimingRow> rows;
    json configs = json::array();
    for (const auto& name : a.scenarios) {
        auto cfg = sim::preset(name);
        if (a.runs) cfg.runs = *a.runs;
        cfg.seed = a.seed;
        cfg.validate();
        configs.push_back(io::config_to_json(cfg));
        log("benchmarking " + name);
        harness::BatchOptions opt;
        opt.threads = a.threads;
        const auto results = harness::run_scenario_batch(cfg, opt);
        const auto t = harness::timing_summary(results);
        rows.insert(rows.end(), t.begin(), t.end());
    }
    std::ofstream file;
    auto& out = output_stream(a.out, file);
    harness::write_timing_table(out, rows);
    if (!a.out.empty() && a.out != "-") {
        io::write_json(a.out + ".manifest.json", json{{"command", "bench"}, {"configs", configs}});
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatio-temporal episodic memory search for asymptomatic COVID-19 carriers"};
    app.require_subcommand(1);
    app.allow_extras(false);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Run one simulation and export its dataset directory");
    simulate->add_option("scenario", sim_args.scenario, "Preset: S200N, S200H or S1000N");
    simulate->add_option("--config", sim_args.config, "Scenario JSON or a dataset manifest");
    simulate->add_option("--seed", sim_args.seed, "Run seed");
    simulate->add_option("--out", sim_args.out, "Output directory")->required();

    EncodeArgs enc_args;
    auto* encode = app.add_subcommand("encode", "Build the collective memory of a dataset and save a snapshot");
    encode->add_option("dataset", enc_args.dataset, "Dataset directory")->required();
    encode->add_option("--out", enc_args.out, "Snapshot file")->required();

    SearchArgs search_args;
    auto* search_cmd = app.add_subcommand("search", "Rank untested agents by similarity to tested positives");
    search_cmd->add_option("dataset", search_args.dataset, "Dataset directory");
    search_cmd->add_option("--snapshot", search_args.snapshot, "Memory snapshot instead of a dataset");
    search_cmd->add_option("--method", search_args.method, "stem or baseline");
    search_cmd->add_option("--pooling", search_args.pooling, "fuzzy_or or weighted");
    search_cmd->add_option("--select", search_args.selection, "topk or threshold");
    search_cmd->add_option("-k,--k", search_args.k, "Number of candidates in top-k mode");
    search_cmd->add_option("--delta-c", search_args.delta_c, "Activation threshold in threshold mode");
    search_cmd->add_option("--out", search_args.out, "Output file (default stdout)");

    ExperimentArgs exp_args;
    auto* experiment = app.add_subcommand("experiment", "Run a scenario batch and write all evaluation tables");
    experiment->add_option("scenario", exp_args.scenario, "Preset: S200N, S200H or S1000N");
    experiment->add_option("--config", exp_args.config, "Scenario JSON or manifest");
    experiment->add_option("--runs", exp_args.runs, "Number of runs");
    experiment->add_option("--seed", exp_args.seed, "Master seed; run i uses seed + i");
    experiment->add_option("-k,--k", exp_args.k_list, "k values, comma separated")->delimiter(',');
    experiment->add_option("--out", exp_args.out, "Output directory");
    experiment->add_option("--threads", exp_args.threads, "Worker threads for simulation (0: all cores)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Time the similarity computation of both methods");
    bench->add_option("scenarios", bench_args.scenarios, "Presets to benchmark")->required();
    bench->add_option("--runs", bench_args.runs, "Runs per scenario");
    bench->add_option("--seed", bench_args.seed, "Master seed");
    bench->add_option("--out", bench_args.out, "Output file (default stdout)");
    bench->add_option("--threads", bench_args.threads, "Worker threads for simulation (0: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*simulate) return cmd_simulate(sim_args);
        if (*encode) return cmd_encode(enc_args);
        if (*search_cmd) return cmd_search(search_args);
        if (*experiment) return cmd_experiment(exp_args);
        if (*bench) return cmd_bench(bench_args);
    } catch (const ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ContractViolation& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
