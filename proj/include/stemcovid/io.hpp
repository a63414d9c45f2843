#pragma once
/**
 * Text file formats.
 *
 * Dataset directory (one simulation run):
 *   traces.csv         agent_id,t,place_id
 *   labels.csv         agent_id,cp
 *   ground_truth.csv   agent_id,status,destiny,infection_hour
 *   infection_log.csv  hour,place_id,source_id,target_id
 *   manifest.json      resolved scenario configuration and seed
 *
 * Memory snapshot: line-delimited text, versioned, exact round trip.
 * Search results: '#'-prefixed metadata line, then a CSV table.
 */

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stemcovid/errors.hpp"
#include "stemcovid/memory.hpp"
#include "stemcovid/search.hpp"
#include "stemcovid/sim.hpp"

namespace stemcovid::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::string_view kTracesFile = "traces.csv";
inline constexpr std::string_view kLabelsFile = "labels.csv";
inline constexpr std::string_view kGroundTruthFile = "ground_truth.csv";
inline constexpr std::string_view kInfectionLogFile = "infection_log.csv";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kSnapshotMagic = "stemcovid-memory";
inline constexpr int kSnapshotVersion = 1;

// ---------------------------------------------------------------------------
// Low-level helpers

inline std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string(), 0, "cannot open for writing");
    return out;
}

inline std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string(), 0, "cannot open for reading");
    return in;
}

/// Shortest decimal representation that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Line-oriented CSV reader with a mandatory header and line-numbered errors.
class CsvReader {
public:
    CsvReader(const fs::path& path, std::string_view expected_header) : path_(path), in_(open_in(path)) {
        std::string header;
        if (!next_line(header)) fail("missing header line");
        if (header != expected_header) fail("unexpected header '" + header + "', expected '" + std::string(expected_header) + "'");
    }

    /// Next record split on commas, with the expected field count.
    bool next(std::vector<std::string_view>& fields, std::size_t count) {
        while (next_line(line_)) {
            if (line_.empty()) continue;
            fields = split(line_, ',');
            if (fields.size() != count) {
                fail("expected " + std::to_string(count) + " fields, got " + std::to_string(fields.size()));
            }
            return true;
        }
        return false;
    }

    template <class Int>
    Int integer(std::string_view s) const {
        Int v{};
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) fail("not an integer: '" + std::string(s) + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const { throw DataError(path_.string(), line_no_, what); }

private:
    bool next_line(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    fs::path path_;
    std::ifstream in_;
    std::string line_;
    std::size_t line_no_ = 0;
};

// ---------------------------------------------------------------------------
// Scenario configuration <-> JSON

inline std::string_view to_string(sim::IndexProfile p) { return p == sim::IndexProfile::Normal ? "normal" : "high_risk"; }

inline sim::IndexProfile parse_index_profile(std::string_view s) {
    if (s == "normal") return sim::IndexProfile::Normal;
    if (s == "high_risk") return sim::IndexProfile::HighRisk;
    throw ValidationError("unknown index profile '" + std::string(s) + "'");
}

inline json config_to_json(const sim::ScenarioConfig& c) {
    return json{
        {"name", c.name},
        {"N", c.N},
        {"P_vh", c.P_vh},
        {"P_h", c.P_h},
        {"P_m", c.P_m},
        {"P_l", c.P_l},
        {"N_u0", c.N_u0},
        {"index_profile", to_string(c.index_profile)},
        {"T", c.T},
        {"acc_fraction", c.acc_fraction},
        {"rates", {{"very_high", c.rates.very_high}, {"high", c.rates.high}, {"middle", c.rates.middle}, {"low", c.rates.low}}},
        {"incubation_mean", c.incubation_mean},
        {"incubation_sd", c.incubation_sd},
        {"latent_fraction", c.latent_fraction},
        {"household_size", c.household_size},
        {"runs", c.runs},
        {"seed", c.seed},
        {"schedule_jitter", c.schedule_jitter},
        {"daily_phase", to_string(c.daily_phase)},
        // High-risk index hours displace work and outdoor blocks entirely; home keeps the rest.
        {"high_risk_index_hours", sim::kHighRiskIndexHours},
        {"high_risk_index_displaces", "work,high,low"},
    };
}

/// Missing keys keep the defaults of `base`; unknown keys are rejected.
inline sim::ScenarioConfig config_from_json(const json& j, sim::ScenarioConfig base = {}) {
    static const std::vector<std::string> known{
        "name",        "N",       "P_vh",           "P_h",           "P_m",           "P_l",
        "N_u0",        "index_profile", "T",        "acc_fraction",  "rates",         "incubation_mean",
        "incubation_sd", "latent_fraction", "household_size", "runs", "seed",         "schedule_jitter",
        "daily_phase", "high_risk_index_hours", "high_risk_index_displaces"};
    if (!j.is_object()) throw ValidationError("scenario configuration must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ValidationError("unknown configuration key '" + key + "'");
        }
    }
    try {
        auto c = base;
        if (j.contains("name")) c.name = j.at("name").get<std::string>();
        if (j.contains("N")) c.N = j.at("N").get<int>();
        if (j.contains("P_vh")) c.P_vh = j.at("P_vh").get<int>();
        if (j.contains("P_h")) c.P_h = j.at("P_h").get<int>();
        if (j.contains("P_m")) c.P_m = j.at("P_m").get<int>();
        if (j.contains("P_l")) c.P_l = j.at("P_l").get<int>();
        if (j.contains("N_u0")) c.N_u0 = j.at("N_u0").get<int>();
        if (j.contains("index_profile")) c.index_profile = parse_index_profile(j.at("index_profile").get<std::string>());
        if (j.contains("T")) c.T = j.at("T").get<int>();
        if (j.contains("acc_fraction")) c.acc_fraction = j.at("acc_fraction").get<double>();
        if (j.contains("rates")) {
            const auto& r = j.at("rates");
            c.rates.very_high = r.value("very_high", c.rates.very_high);
            c.rates.high = r.value("high", c.rates.high);
            c.rates.middle = r.value("middle", c.rates.middle);
            c.rates.low = r.value("low", c.rates.low);
        }
        if (j.contains("incubation_mean")) c.incubation_mean = j.at("incubation_mean").get<double>();
        if (j.contains("incubation_sd")) c.incubation_sd = j.at("incubation_sd").get<double>();
        if (j.contains("latent_fraction")) c.latent_fraction = j.at("latent_fraction").get<double>();
        if (j.contains("household_size")) c.household_size = j.at("household_size").get<int>();
        if (j.contains("runs")) c.runs = j.at("runs").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("schedule_jitter")) c.schedule_jitter = j.at("schedule_jitter").get<bool>();
        if (j.contains("daily_phase")) c.daily_phase = sim::parse_daily_phase(j.at("daily_phase").get<std::string>());
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad scenario configuration: ") + e.what());
    }
}

inline json read_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path.string(), 0, e.what());
    }
}

inline void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Dataset directory

struct DatasetManifest {
    sim::ScenarioConfig config;
    std::uint64_t seed = 0;
    int T = 0;
    int P = 0;
};

inline void write_dataset(const sim::SimulationOutput& out, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError(dir.string(), 0, "cannot create directory: " + ec.message());

    {
        auto f = open_out(dir / kTracesFile);
        f << "agent_id,t,place_id\n";
        for (const auto& tr : out.traces) {
            for (const auto& e : tr.events) f << tr.agent_id << ',' << e.time_step << ',' << e.place_id << '\n';
        }
    }
    {
        auto f = open_out(dir / kLabelsFile);
        f << "agent_id,cp\n";
        for (std::size_t i = 0; i < out.labels.size(); ++i) f << i << ',' << to_int(out.labels[i]) << '\n';
    }
    {
        auto f = open_out(dir / kGroundTruthFile);
        f << "agent_id,status,destiny,infection_hour\n";
        for (std::size_t i = 0; i < out.truth.size(); ++i) {
            const auto& g = out.truth[i];
            f << i << ',' << sim::to_string(g.status) << ',' << sim::to_string(g.destiny) << ',' << g.infection_hour << '\n';
        }
    }
    {
        auto f = open_out(dir / kInfectionLogFile);
        f << "hour,place_id,source_id,target_id\n";
        for (const auto& e : out.infection_log) f << e.hour << ',' << e.place << ',' << e.source << ',' << e.target << '\n';
    }
    write_json(dir / kManifestFile, json{{"format", "stemcovid-dataset"},
                                         {"version", 1},
                                         {"seed", out.seed},
                                         {"T", out.T()},
                                         {"P", out.P()},
                                         {"config", config_to_json(out.config)}});
}

inline DatasetManifest read_manifest(const fs::path& dir) {
    const auto path = dir / kManifestFile;
    const auto j = read_json(path);
    try {
        if (j.at("format").get<std::string>() != "stemcovid-dataset") throw DataError(path.string(), 0, "not a dataset manifest");
        DatasetManifest m;
        m.seed = j.at("seed").get<std::uint64_t>();
        m.T = j.at("T").get<int>();
        m.P = j.at("P").get<int>();
        m.config = config_from_json(j.at("config"));
        return m;
    } catch (const json::exception& e) {
        throw DataError(path.string(), 0, e.what());
    } catch (const ValidationError& e) {
        throw DataError(path.string(), 0, e.what());
    }
}

/// Traces and labels of a dataset directory. Agents are ordered as in labels.csv.
inline Dataset read_dataset(const fs::path& dir) {
    const auto manifest = read_manifest(dir);
    Dataset d{manifest.T, manifest.P, {}};

    std::map<AgentId, std::size_t> slot;
    {
        CsvReader r(dir / kLabelsFile, "agent_id,cp");
        std::vector<std::string_view> f;
        while (r.next(f, 2)) {
            const auto id = r.integer<AgentId>(f[0]);
            const auto cp = r.integer<long>(f[1]);
            if (cp != 0 && cp != 1) r.fail("cp must be 0 or 1");
            if (!slot.emplace(id, d.records.size()).second) r.fail("duplicate agent " + std::to_string(id));
            d.records.push_back({EpisodicTrace{id, {}}, positivity_from_int(cp)});
        }
    }
    {
        CsvReader r(dir / kTracesFile, "agent_id,t,place_id");
        std::vector<std::string_view> f;
        while (r.next(f, 3)) {
            const auto id = r.integer<AgentId>(f[0]);
            const auto t = r.integer<int>(f[1]);
            const auto p = r.integer<int>(f[2]);
            const auto it = slot.find(id);
            if (it == slot.end()) r.fail("agent " + std::to_string(id) + " has no label");
            if (t < 0 || t >= d.T || p < 0 || p >= d.P) r.fail("event outside [0,T) x [0,P)");
            auto& events = d.records[it->second].trace.events;
            if (!events.empty() && events.back().time_step >= t) r.fail("trace times must be strictly increasing");
            events.push_back({t, p});
        }
    }
    return d;
}

struct GroundTruthRecord {
    AgentId agent_id = 0;
    sim::Status status = sim::Status::Healthy;
    sim::Destiny destiny = sim::Destiny::None;
    int infection_hour = -1;
};

inline sim::Status parse_status(std::string_view s) {
    for (auto st : {sim::Status::Healthy, sim::Status::ACC, sim::Status::SCC_presymptomatic, sim::Status::SCC_isolated,
                    sim::Status::Index}) {
        if (sim::to_string(st) == s) return st;
    }
    throw ValidationError("unknown status '" + std::string(s) + "'");
}

inline sim::Destiny parse_destiny(std::string_view s) {
    for (auto d : {sim::Destiny::None, sim::Destiny::WillBeSymptomatic, sim::Destiny::Asymptomatic}) {
        if (sim::to_string(d) == s) return d;
    }
    throw ValidationError("unknown destiny '" + std::string(s) + "'");
}

/// Ground truth if the directory has it.
inline std::optional<std::vector<GroundTruthRecord>> read_ground_truth(const fs::path& dir) {
    if (!fs::exists(dir / kGroundTruthFile)) return std::nullopt;
    CsvReader r(dir / kGroundTruthFile, "agent_id,status,destiny,infection_hour");
    std::vector<GroundTruthRecord> out;
    std::vector<std::string_view> f;
    while (r.next(f, 4)) {
        GroundTruthRecord g;
        g.agent_id = r.integer<AgentId>(f[0]);
        try {
            g.status = parse_status(f[1]);
            g.destiny = parse_destiny(f[2]);
        } catch (const ValidationError& e) {
            r.fail(e.what());
        }
        g.infection_hour = r.integer<int>(f[3]);
        out.push_back(g);
    }
    return out;
}

inline std::vector<sim::InfectionEvent> read_infection_log(const fs::path& dir) {
    CsvReader r(dir / kInfectionLogFile, "hour,place_id,source_id,target_id");
    std::vector<sim::InfectionEvent> out;
    std::vector<std::string_view> f;
    while (r.next(f, 4)) {
        out.push_back({r.integer<int>(f[0]), r.integer<int>(f[1]), r.integer<int>(f[2]), r.integer<int>(f[3])});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Memory snapshot

inline void write_snapshot(std::ostream& out, const CollectiveMemory& memory) {
    const auto& reg = memory.registry();
    out << kSnapshotMagic << ' ' << kSnapshotVersion << '\n';
    out << "T " << memory.T() << '\n' << "P " << memory.P() << '\n';
    out << "events " << reg.size() << '\n';
    for (const auto& n : reg.nodes()) out << n.raw_time << ' ' << n.raw_place << '\n';
    out << "individuals " << memory.size() << '\n';
    for (const auto& ind : memory.individuals()) {
        out << ind.agent_id << ' ' << to_int(ind.cp) << ' ' << ind.episode.size();
        for (auto j : ind.episode) out << ' ' << j;
        out << '\n';
    }
}

inline void save_snapshot(const fs::path& path, const CollectiveMemory& memory) {
    auto out = open_out(path);
    write_snapshot(out, memory);
    if (!out) throw DataError(path.string(), 0, "write failed");
}

inline CollectiveMemory read_snapshot(std::istream& in, const std::string& name = "<snapshot>") {
    std::size_t line_no = 0;
    std::string line;
    auto next = [&]() -> std::istringstream {
        if (!std::getline(in, line)) throw DataError(name, line_no + 1, "unexpected end of file");
        ++line_no;
        return std::istringstream(line);
    };
    auto fail = [&](const std::string& what) { throw DataError(name, line_no, what); };
    auto expect_end = [&](std::istringstream& s) {
        std::string extra;
        if (s >> extra) fail("trailing data '" + extra + "'");
    };

    std::string word;
    int version = 0;
    {
        auto s = next();
        if (!(s >> word >> version) || word != kSnapshotMagic) fail("not a memory snapshot");
        if (version != kSnapshotVersion) fail("unsupported snapshot version " + std::to_string(version));
    }
    int T = 0, P = 0;
    {
        auto s = next();
        if (!(s >> word >> T) || word != "T") fail("expected 'T <int>'");
    }
    {
        auto s = next();
        if (!(s >> word >> P) || word != "P") fail("expected 'P <int>'");
    }
    if (T <= 0 || P <= 0) fail("T and P must be positive");
    CollectiveMemory memory(T, P);

    std::size_t n_events = 0;
    {
        auto s = next();
        if (!(s >> word >> n_events) || word != "events") fail("expected 'events <count>'");
    }
    for (std::size_t i = 0; i < n_events; ++i) {
        auto s = next();
        int t = 0, p = 0;
        if (!(s >> t >> p)) fail("expected '<t> <p>'");
        expect_end(s);
        if (t < 0 || t >= T || p < 0 || p >= P) fail("event outside [0,T) x [0,P)");
        if (memory.registry().find(t, p)) fail("duplicate event node");
        memory.mutable_registry().encode(t, p);
    }

    std::size_t n_ind = 0;
    {
        auto s = next();
        if (!(s >> word >> n_ind) || word != "individuals") fail("expected 'individuals <count>'");
    }
    for (std::size_t i = 0; i < n_ind; ++i) {
        auto s = next();
        IndividualNode node;
        int cp = 0;
        std::size_t count = 0;
        if (!(s >> node.agent_id >> cp >> count)) fail("expected '<agent_id> <cp> <count> <indices...>'");
        if (cp != 0 && cp != 1) fail("cp must be 0 or 1");
        node.cp = static_cast<Positivity>(cp);
        if (count > memory.registry().size()) fail("episode longer than the registry");
        node.episode.resize(count);
        for (auto& j : node.episode) {
            if (!(s >> j)) fail("missing episode index");
        }
        expect_end(s);
        try {
            memory.restore_individual(std::move(node));
        } catch (const ValidationError& e) {
            fail(e.what());
        }
    }
    if (std::getline(in, line) && !line.empty()) {
        ++line_no;
        fail("unexpected content after last individual");
    }
    return memory;
}

inline CollectiveMemory load_snapshot(const fs::path& path) {
    auto in = open_in(path);
    return read_snapshot(in, path.string());
}

// ---------------------------------------------------------------------------
// Search result table

struct ResultMetadata {
    std::string scenario = "unknown";
    std::uint64_t seed = 0;
    std::size_t k = 0;
    double delta_c = 0.0;
    search::Method method = search::Method::Stem;
    search::Pooling pooling = search::Pooling::FuzzyOr;
    search::Selection selection = search::Selection::TopK;
};

/// `hits`, when given, marks candidates that are true ACCs (index cases included).
inline void write_results_table(std::ostream& out, const ResultMetadata& meta,
                                std::span<const search::RankedCandidate> rows,
                                const std::vector<AgentId>* hits = nullptr, std::string_view note = {}) {
    out << "# scenario=" << meta.scenario << " seed=" << meta.seed << " method=" << search::to_string(meta.method)
        << " k=" << meta.k << " delta_c=" << format_double(meta.delta_c) << " pooling=" << search::to_string(meta.pooling)
        << " selection=" << search::to_string(meta.selection) << '\n';
    if (!note.empty()) out << "# note: " << note << '\n';
    out << "agent_id,activation,rank,method" << (hits ? ",hit" : "") << '\n';
    for (const auto& c : rows) {
        out << c.agent_id << ',' << format_double(c.activation) << ',' << c.rank << ',' << search::to_string(meta.method);
        if (hits) out << ',' << (std::binary_search(hits->begin(), hits->end(), c.agent_id) ? 1 : 0);
        out << '\n';
    }
}

struct ResultsTable {
    std::map<std::string, std::string> metadata;
    std::vector<search::RankedCandidate> rows;
};

inline ResultsTable read_results_table(std::istream& in, const std::string& name = "<results>") {
    ResultsTable t;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream s(line.substr(1));
            std::string kv;
            while (s >> kv) {
                const auto eq = kv.find('=');
                if (eq != std::string::npos) t.metadata[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            continue;
        }
        if (!header_seen) {
            if (line.rfind("agent_id,activation,rank,method", 0) != 0) throw DataError(name, line_no, "bad header");
            header_seen = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() < 4) throw DataError(name, line_no, "expected at least 4 fields");
        search::RankedCandidate c;
        auto parse = [&](std::string_view s, auto& v) {
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size()) throw DataError(name, line_no, "bad number");
        };
        parse(f[0], c.agent_id);
        parse(f[1], c.activation);
        parse(f[2], c.rank);
        t.rows.push_back(c);
    }
    return t;
}

}  // namespace stemcovid::io
