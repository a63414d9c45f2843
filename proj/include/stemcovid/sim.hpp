#pragma once
/**
 * Agent-based COVID-19 spreading simulator.
 *
 * Places fall into four risk categories with per-hour infection rates. Agents
 * live in households of four, keep a fixed workplace, and follow a daily life
 * cycle of contiguous blocks: home, work, a high-risk venue, a low-risk venue.
 * Each hour a susceptible agent sharing a place with k infectious agents is
 * infected with probability min(1, rate * k).
 *
 * Symptomatic cases (SCC) are silent for 0.2 * T_in hours, then infectious
 * until symptom onset at T_in, when they are tested, isolated and leave the
 * map. Asymptomatic cases (ACC) are infectious from infection to the end.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stemcovid/errors.hpp"
#include "stemcovid/memory.hpp"
#include "stemcovid/rng.hpp"

namespace stemcovid::sim {

inline constexpr int kHoursPerDay = 24;

enum class PlaceCategory : std::uint8_t { VeryHigh, High, Middle, Low };

inline std::string_view to_string(PlaceCategory c) {
    switch (c) {
        case PlaceCategory::VeryHigh: return "very_high";
        case PlaceCategory::High: return "high";
        case PlaceCategory::Middle: return "middle";
        case PlaceCategory::Low: return "low";
    }
    return "?";
}

struct InfectionRates {
    double very_high = 0.01;
    double high = 0.005;
    double middle = 0.001;
    double low = 0.0001;

    double of(PlaceCategory c) const {
        switch (c) {
            case PlaceCategory::VeryHigh: return very_high;
            case PlaceCategory::High: return high;
            case PlaceCategory::Middle: return middle;
            case PlaceCategory::Low: return low;
        }
        return 0.0;
    }
};

struct Place {
    int id = 0;
    PlaceCategory category = PlaceCategory::VeryHigh;
    double rate = 0.0;
};

/// Life cycle of the scenario's index cases.
enum class IndexProfile { Normal, HighRisk };

/// Life cycle of one agent.
enum class AgentProfile { Normal, HighRiskIndex };

/// Where in the 24-hour clock an agent's cycle starts.
enum class DailyPhase {
    Synchronized,  // every cycle starts at hour 0 of the day
    PerHousehold,  // one start hour per household, shared by its members
    PerAgent,      // one start hour per agent
};

inline std::string_view to_string(DailyPhase p) {
    switch (p) {
        case DailyPhase::Synchronized: return "synchronized";
        case DailyPhase::PerHousehold: return "per_household";
        case DailyPhase::PerAgent: return "per_agent";
    }
    return "?";
}

inline DailyPhase parse_daily_phase(std::string_view s) {
    if (s == "synchronized") return DailyPhase::Synchronized;
    if (s == "per_household") return DailyPhase::PerHousehold;
    if (s == "per_agent") return DailyPhase::PerAgent;
    throw ValidationError("unknown daily phase '" + std::string(s) + "'");
}

enum class Destiny : std::uint8_t { None, WillBeSymptomatic, Asymptomatic };

inline std::string_view to_string(Destiny d) {
    switch (d) {
        case Destiny::None: return "none";
        case Destiny::WillBeSymptomatic: return "symptomatic";
        case Destiny::Asymptomatic: return "asymptomatic";
    }
    return "?";
}

namespace state {
struct Susceptible {};
struct LatentSCC {
    int shed_at = 0;
    int onset_at = 0;
};
struct InfectiousPresymptomatic {
    int onset_at = 0;
};
struct IsolatedPositive {
    int since = 0;
};
struct InfectiousAsymptomatic {
    int since = 0;
};
}  // namespace state

using DiseaseState = std::variant<state::Susceptible, state::LatentSCC, state::InfectiousPresymptomatic,
                                  state::IsolatedPositive, state::InfectiousAsymptomatic>;

inline bool is_infectious(const DiseaseState& s) {
    return std::holds_alternative<state::InfectiousPresymptomatic>(s) ||
           std::holds_alternative<state::InfectiousAsymptomatic>(s);
}
inline bool is_isolated(const DiseaseState& s) { return std::holds_alternative<state::IsolatedPositive>(s); }
inline bool is_susceptible(const DiseaseState& s) { return std::holds_alternative<state::Susceptible>(s); }

struct Agent {
    int id = 0;
    int household = 0;
    int home = 0;
    int workplace = 0;
    DiseaseState disease = state::Susceptible{};
    Destiny destiny = Destiny::None;
    AgentProfile profile = AgentProfile::Normal;
    bool index_case = false;
    int infection_hour = -1;
    double incubation_hours = 0.0;
    std::uint64_t schedule_seed = 0;
    int phase = 0;
};

struct ScenarioConfig {
    std::string name = "custom";
    int N = 0;
    int P_vh = 0;
    int P_h = 0;
    int P_m = 0;
    int P_l = 0;
    int N_u0 = 0;
    IndexProfile index_profile = IndexProfile::Normal;
    int T = 480;
    double acc_fraction = 0.2;
    InfectionRates rates{};
    double incubation_mean = 120.0;
    double incubation_sd = 12.0;
    double latent_fraction = 0.2;
    int household_size = 4;
    int runs = 15;
    std::uint64_t seed = 1;
    bool schedule_jitter = true;
    DailyPhase daily_phase = DailyPhase::PerAgent;

    int P() const noexcept { return P_vh + P_h + P_m + P_l; }
    int households() const noexcept { return (N + household_size - 1) / household_size; }

    void validate() const {
        if (N < 0) throw ValidationError("N must be >= 0");
        if (P_h < 1 || P_m < 1 || P_l < 1) throw ValidationError("each non-home place category needs >= 1 place");
        if (household_size < 1) throw ValidationError("household size must be >= 1");
        if (P_vh < households()) {
            throw ValidationError("P_vh = " + std::to_string(P_vh) + " homes cannot hold " + std::to_string(households()) +
                                  " households");
        }
        if (N_u0 < 0 || N_u0 > N) throw ValidationError("N_u0 must lie in [0, N]");
        if (T <= 0) throw ValidationError("T must be positive");
        if (!(acc_fraction >= 0.0 && acc_fraction <= 1.0)) throw ValidationError("acc_fraction must lie in [0,1]");
        if (!(latent_fraction >= 0.0 && latent_fraction <= 1.0)) {
            throw ValidationError("latent_fraction must lie in [0,1]");
        }
        if (!(incubation_mean > 0.0) || !(incubation_sd >= 0.0)) throw ValidationError("bad incubation distribution");
        for (double r : {rates.very_high, rates.high, rates.middle, rates.low}) {
            if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("infection rates must lie in [0,1]");
        }
        if (runs < 1) throw ValidationError("runs must be >= 1");
    }
};

inline ScenarioConfig preset(std::string_view name) {
    ScenarioConfig c;
    c.name = std::string(name);
    if (name == "S200N" || name == "S200H") {
        c.N = 200, c.P_vh = 50, c.P_h = 2, c.P_m = 10, c.P_l = 2, c.N_u0 = 1;
        c.index_profile = name == "S200H" ? IndexProfile::HighRisk : IndexProfile::Normal;
    } else if (name == "S1000N") {
        c.N = 1000, c.P_vh = 250, c.P_h = 10, c.P_m = 50, c.P_l = 10, c.N_u0 = 5;
    } else {
        throw ValidationError("unknown scenario '" + std::string(name) + "' (expected S200N|S200H|S1000N)");
    }
    return c;
}

inline constexpr std::array<std::string_view, 3> kPresetNames{"S200N", "S200H", "S1000N"};

/// Place ids: homes first, then high-, middle- and low-risk places.
struct PlaceLayout {
    int first_high = 0, n_high = 0;
    int first_middle = 0, n_middle = 0;
    int first_low = 0, n_low = 0;

    explicit PlaceLayout(const ScenarioConfig& c)
        : first_high(c.P_vh),
          n_high(c.P_h),
          first_middle(c.P_vh + c.P_h),
          n_middle(c.P_m),
          first_low(c.P_vh + c.P_h + c.P_m),
          n_low(c.P_l) {}

    PlaceLayout() = default;
};

// ---------------------------------------------------------------------------
// Daily life cycle

struct BlockHours {
    int home = 0;
    int work = 0;
    int high = 0;
    int low = 0;

    int total() const noexcept { return home + work + high + low; }
    friend bool operator==(const BlockHours&, const BlockHours&) = default;
};

inline constexpr BlockHours kNormalDay{10, 8, 3, 3};
inline constexpr int kHighRiskIndexHours = 10;

/// Block durations for one day. Each non-home block moves by -1, 0 or +1 hour
/// (never below 1); home takes whatever remains of the 24 hours.
inline BlockHours daily_block_hours(AgentProfile profile, bool jitter, Rng& rng) {
    auto jit = [&](int base) { return jitter ? std::max(1, base + rng.uniform_int(-1, 1)) : base; };
    BlockHours b{};
    if (profile == AgentProfile::HighRiskIndex) {
        b.high = jit(kHighRiskIndexHours);
    } else {
        b.work = jit(kNormalDay.work);
        b.high = jit(kNormalDay.high);
        b.low = jit(kNormalDay.low);
    }
    b.home = kHoursPerDay - b.work - b.high - b.low;
    return b;
}

struct DailySchedule {
    std::array<int, kHoursPerDay> place{};  // indexed by hour of day
    BlockHours hours{};
};

/// One day of an agent's life cycle: blocks in the order home, work, high, low,
/// starting at the agent's phase hour and wrapping around midnight.
inline DailySchedule generate_daily_schedule(const Agent& agent, const PlaceLayout& layout, bool jitter, Rng& rng) {
    DailySchedule d;
    d.hours = daily_block_hours(agent.profile, jitter, rng);
    const int high_venue = layout.first_high + static_cast<int>(rng.below(static_cast<std::uint64_t>(layout.n_high)));
    const int low_venue = layout.first_low + static_cast<int>(rng.below(static_cast<std::uint64_t>(layout.n_low)));

    std::array<int, kHoursPerDay> cycle{};
    int pos = 0;
    auto fill = [&](int count, int place) {
        for (int i = 0; i < count; ++i) cycle[static_cast<std::size_t>(pos++)] = place;
    };
    fill(d.hours.home, agent.home);
    fill(d.hours.work, agent.workplace);
    fill(d.hours.high, high_venue);
    fill(d.hours.low, low_venue);

    for (int h = 0; h < kHoursPerDay; ++h) {
        const int offset = ((h - agent.phase) % kHoursPerDay + kHoursPerDay) % kHoursPerDay;
        d.place[static_cast<std::size_t>(h)] = cycle[static_cast<std::size_t>(offset)];
    }
    return d;
}

/// Schedule stream for (agent, day), independent of all infection draws.
inline Rng schedule_rng(const Agent& agent, int day) {
    return Rng(mix_seed({agent.schedule_seed, static_cast<std::uint64_t>(day)}));
}

// ---------------------------------------------------------------------------
// Outputs

enum class Status : std::uint8_t { Healthy, ACC, SCC_presymptomatic, SCC_isolated, Index };

inline std::string_view to_string(Status s) {
    switch (s) {
        case Status::Healthy: return "healthy";
        case Status::ACC: return "acc";
        case Status::SCC_presymptomatic: return "scc_presymptomatic";
        case Status::SCC_isolated: return "scc_isolated";
        case Status::Index: return "index";
    }
    return "?";
}

struct GroundTruth {
    Status status = Status::Healthy;
    Destiny destiny = Destiny::None;
    int infection_hour = -1;
    double incubation_hours = 0.0;  // sampled T_in, 0 when not symptomatic

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct InfectionEvent {
    int hour = 0;
    int place = 0;
    int source = 0;
    int target = 0;

    friend bool operator==(const InfectionEvent&, const InfectionEvent&) = default;
};

/// Cumulative case counts.
struct HourCounts {
    int acc = 0;   // asymptomatic infections including index cases
    int tscc = 0;  // tested (isolated) symptomatic cases
    int scc = 0;   // all symptomatic-destined infections

    friend bool operator==(const HourCounts&, const HourCounts&) = default;
};

struct SimulationOutput {
    ScenarioConfig config;
    std::uint64_t seed = 0;
    std::vector<EpisodicTrace> traces;
    std::vector<Positivity> labels;
    std::vector<GroundTruth> truth;
    std::vector<InfectionEvent> infection_log;
    std::vector<HourCounts> counts;  // counts[h] at the start of hour h; counts[T] at the end

    int T() const noexcept { return config.T; }
    int P() const noexcept { return config.P(); }

    Dataset dataset() const {
        Dataset d{config.T, config.P(), {}};
        d.records.reserve(traces.size());
        for (std::size_t i = 0; i < traces.size(); ++i) d.records.push_back({traces[i], labels[i]});
        return d;
    }

    std::vector<AgentId> index_agents() const {
        std::vector<AgentId> ids;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i].status == Status::Index) ids.push_back(static_cast<AgentId>(i));
        }
        return ids;
    }

    /// Evaluation targets: non-index ACCs plus index cases.
    std::vector<AgentId> acc_agents() const {
        std::vector<AgentId> ids;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i].status == Status::ACC || truth[i].status == Status::Index) ids.push_back(static_cast<AgentId>(i));
        }
        return ids;
    }

    std::size_t untested_count() const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Positivity::Untested));
    }

    /// Mean number of infections caused by each index case.
    double index_secondary_infections() const {
        const auto idx = index_agents();
        if (idx.empty()) return 0.0;
        std::size_t n = 0;
        for (const auto& ev : infection_log) {
            if (truth[static_cast<std::size_t>(ev.source)].status == Status::Index) ++n;
        }
        return static_cast<double>(n) / static_cast<double>(idx.size());
    }
};

// ---------------------------------------------------------------------------
// World

class World {
public:
    World(ScenarioConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed), layout_(cfg_), rng_(0) {
        cfg_.validate();
        rng_ = Rng(mix_seed({seed_, 0x5EEDULL}));
        build_places();
        build_agents();
        seed_index_cases();
        traces_.resize(agents_.size());
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            traces_[i].agent_id = static_cast<AgentId>(i);
            traces_[i].events.reserve(static_cast<std::size_t>(cfg_.T));
        }
        today_.resize(agents_.size());
        counts_.reserve(static_cast<std::size_t>(cfg_.T) + 1);
    }

    const ScenarioConfig& config() const noexcept { return cfg_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const PlaceLayout& layout() const noexcept { return layout_; }
    std::span<const Place> places() const noexcept { return places_; }
    std::span<const Agent> agents() const noexcept { return agents_; }
    std::span<const InfectionEvent> infection_log() const noexcept { return log_; }
    std::span<const EpisodicTrace> traces() const noexcept { return traces_; }
    int hour() const noexcept { return hour_; }
    bool done() const noexcept { return hour_ >= cfg_.T; }

    /// Place of every agent during the most recent hour, -1 when isolated.
    std::span<const int> positions() const noexcept { return positions_; }

    HourCounts current_counts() const {
        HourCounts c;
        for (const auto& a : agents_) {
            if (a.destiny == Destiny::Asymptomatic) ++c.acc;
            if (a.destiny == Destiny::WillBeSymptomatic) ++c.scc;
            if (is_isolated(a.disease)) ++c.tscc;
        }
        return c;
    }

    /// Advance one hour: disease progression, movement, then transmission.
    void step() {
        if (done()) throw ContractViolation("step_hour: simulation already reached T");
        const int h = hour_;
        if (h % kHoursPerDay == 0) plan_day(h / kHoursPerDay);

        progress(h);
        counts_.push_back(current_counts());
        move(h);
        transmit(h);
        ++hour_;
        if (done()) counts_.push_back(current_counts());
    }

    SimulationOutput finish() && {
        if (!done()) throw ContractViolation("finish: simulation has not reached T");
        SimulationOutput out;
        out.config = cfg_;
        out.seed = seed_;
        out.traces = std::move(traces_);
        out.infection_log = std::move(log_);
        out.counts = std::move(counts_);
        out.labels.reserve(agents_.size());
        out.truth.reserve(agents_.size());
        for (const auto& a : agents_) {
            GroundTruth g;
            g.destiny = a.destiny;
            g.infection_hour = a.infection_hour;
            g.incubation_hours = a.incubation_hours;
            if (a.index_case) {
                g.status = Status::Index;
            } else if (a.destiny == Destiny::Asymptomatic) {
                g.status = Status::ACC;
            } else if (is_isolated(a.disease)) {
                g.status = Status::SCC_isolated;
            } else if (a.destiny == Destiny::WillBeSymptomatic) {
                g.status = Status::SCC_presymptomatic;
            }
            out.truth.push_back(g);
            out.labels.push_back(g.status == Status::SCC_isolated ? Positivity::Positive : Positivity::Untested);
        }
        return out;
    }

    /// Incubation period T_in ~ N(mean, sd^2), redrawn while non-positive.
    static double sample_incubation(const ScenarioConfig& cfg, Rng& rng) {
        double t = 0.0;
        do {
            t = rng.normal(cfg.incubation_mean, cfg.incubation_sd);
        } while (t <= 0.0);
        return t;
    }

private:
    void build_places() {
        places_.reserve(static_cast<std::size_t>(cfg_.P()));
        auto add = [&](int count, PlaceCategory cat) {
            for (int i = 0; i < count; ++i) {
                places_.push_back({static_cast<int>(places_.size()), cat, cfg_.rates.of(cat)});
            }
        };
        add(cfg_.P_vh, PlaceCategory::VeryHigh);
        add(cfg_.P_h, PlaceCategory::High);
        add(cfg_.P_m, PlaceCategory::Middle);
        add(cfg_.P_l, PlaceCategory::Low);
    }

    void build_agents() {
        std::vector<int> household_phase(static_cast<std::size_t>(cfg_.households()));
        for (auto& p : household_phase) p = static_cast<int>(rng_.below(kHoursPerDay));

        agents_.resize(static_cast<std::size_t>(cfg_.N));
        for (int i = 0; i < cfg_.N; ++i) {
            auto& a = agents_[static_cast<std::size_t>(i)];
            a.id = i;
            a.household = i / cfg_.household_size;
            a.home = a.household;
            a.workplace = layout_.first_middle + static_cast<int>(rng_.below(static_cast<std::uint64_t>(layout_.n_middle)));
            a.schedule_seed = mix_seed({seed_, 0xDA11ULL, static_cast<std::uint64_t>(i)});
            switch (cfg_.daily_phase) {
                case DailyPhase::Synchronized: a.phase = 0; break;
                case DailyPhase::PerHousehold: a.phase = household_phase[static_cast<std::size_t>(a.household)]; break;
                case DailyPhase::PerAgent: a.phase = static_cast<int>(rng_.below(kHoursPerDay)); break;
            }
        }
    }

    void seed_index_cases() {
        // Partial Fisher-Yates: the first N_u0 entries are a uniform sample.
        std::vector<int> ids(agents_.size());
        std::iota(ids.begin(), ids.end(), 0);
        for (int i = 0; i < cfg_.N_u0; ++i) {
            const auto j = static_cast<std::size_t>(i) + rng_.below(ids.size() - static_cast<std::size_t>(i));
            std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
            auto& a = agents_[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])];
            a.index_case = true;
            a.destiny = Destiny::Asymptomatic;
            a.disease = state::InfectiousAsymptomatic{0};
            a.infection_hour = 0;
            if (cfg_.index_profile == IndexProfile::HighRisk) a.profile = AgentProfile::HighRiskIndex;
        }
    }

    void plan_day(int day) {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            auto rng = schedule_rng(agents_[i], day);
            today_[i] = generate_daily_schedule(agents_[i], layout_, cfg_.schedule_jitter, rng).place;
        }
    }

    void progress(int h) {
        for (auto& a : agents_) {
            if (auto* s = std::get_if<state::LatentSCC>(&a.disease)) {
                if (s->onset_at <= h) {
                    a.disease = state::IsolatedPositive{s->onset_at};
                } else if (s->shed_at <= h) {
                    a.disease = state::InfectiousPresymptomatic{s->onset_at};
                }
            } else if (auto* p = std::get_if<state::InfectiousPresymptomatic>(&a.disease)) {
                if (p->onset_at <= h) a.disease = state::IsolatedPositive{p->onset_at};
            }
        }
    }

    void move(int h) {
        positions_.assign(agents_.size(), -1);
        const auto hod = static_cast<std::size_t>(h % kHoursPerDay);
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            if (is_isolated(agents_[i].disease)) continue;
            positions_[i] = today_[i][hod];
            traces_[i].events.push_back({h, positions_[i]});
        }
    }

    void transmit(int h) {
        carriers_.assign(places_.size(), {});
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            if (positions_[i] >= 0 && is_infectious(agents_[i].disease)) {
                carriers_[static_cast<std::size_t>(positions_[i])].push_back(static_cast<int>(i));
            }
        }

        struct Pending {
            int target, source, place;
        };
        std::vector<Pending> pending;
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            const int q = positions_[i];
            if (q < 0 || !is_susceptible(agents_[i].disease)) continue;
            const auto& here = carriers_[static_cast<std::size_t>(q)];
            if (here.empty()) continue;
            const double p = std::min(1.0, places_[static_cast<std::size_t>(q)].rate * static_cast<double>(here.size()));
            if (!rng_.bernoulli(p)) continue;
            const int source = here[rng_.below(here.size())];
            pending.push_back({static_cast<int>(i), source, q});
        }

        for (const auto& inf : pending) {
            infect(agents_[static_cast<std::size_t>(inf.target)], h);
            log_.push_back({h, inf.place, inf.source, inf.target});
        }
    }

    void infect(Agent& a, int h) {
        a.infection_hour = h;
        if (rng_.bernoulli(cfg_.acc_fraction)) {
            a.destiny = Destiny::Asymptomatic;
            a.disease = state::InfectiousAsymptomatic{h};
            return;
        }
        a.destiny = Destiny::WillBeSymptomatic;
        a.incubation_hours = sample_incubation(cfg_, rng_);
        // Transitions fire at the start of an hour, so the earliest is h + 1.
        const int onset = h + std::max(1, static_cast<int>(std::lround(a.incubation_hours)));
        const int shed = h + std::max(1, static_cast<int>(std::lround(cfg_.latent_fraction * a.incubation_hours)));
        a.disease = state::LatentSCC{std::min(shed, onset), onset};
    }

    ScenarioConfig cfg_;
    std::uint64_t seed_;
    PlaceLayout layout_;
    Rng rng_;
    std::vector<Place> places_;
    std::vector<Agent> agents_;
    std::vector<std::array<int, kHoursPerDay>> today_;
    std::vector<int> positions_;
    std::vector<std::vector<int>> carriers_;
    std::vector<EpisodicTrace> traces_;
    std::vector<InfectionEvent> log_;
    std::vector<HourCounts> counts_;
    int hour_ = 0;
};

inline World build_world(const ScenarioConfig& cfg, std::uint64_t seed) { return World(cfg, seed); }

inline void step_hour(World& world, int hour) {
    if (hour != world.hour()) {
        throw ContractViolation("step_hour: expected hour " + std::to_string(world.hour()) + ", got " +
                                std::to_string(hour));
    }
    world.step();
}

inline SimulationOutput run_simulation(const ScenarioConfig& cfg, std::uint64_t seed) {
    World world(cfg, seed);
    while (!world.done()) world.step();
    return std::move(world).finish();
}

}  // namespace stemcovid::sim
