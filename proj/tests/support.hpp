#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "stemcovid/memory.hpp"
#include "stemcovid/sim.hpp"

namespace testing_support {

/// Strictly increasing trace over [0,T) with places in [0,P); every hour kept when `full`.
inline stemcovid::EpisodicTrace random_trace(std::mt19937_64& g, stemcovid::AgentId id, int T, int P, bool full) {
    stemcovid::EpisodicTrace tr{id, {}};
    std::uniform_int_distribution<int> place(0, P - 1);
    for (int t = 0; t < T; ++t) {
        if (full || g() % 3 != 0) tr.events.push_back({t, place(g)});
    }
    return tr;
}

inline stemcovid::Dataset random_dataset(std::mt19937_64& g, int max_n, int max_t, int max_p) {
    stemcovid::Dataset d;
    d.T = 1 + static_cast<int>(g() % max_t);
    d.P = 1 + static_cast<int>(g() % max_p);
    const int n = static_cast<int>(g() % (max_n + 1));
    for (int i = 0; i < n; ++i) {
        const auto cp = g() % 3 == 0 ? stemcovid::Positivity::Positive : stemcovid::Positivity::Untested;
        d.records.push_back({random_trace(g, 100 + 7 * i, d.T, d.P, cp == stemcovid::Positivity::Untested), cp});
    }
    return d;
}

/// Two-agent world where one carrier and one susceptible share a single stay at a place of
/// the given category, every other category having rate zero.
struct StayProbe {
    stemcovid::sim::PlaceCategory category;
    int hours;
    double rate;
};

inline std::vector<StayProbe> stay_probes() {
    using stemcovid::sim::PlaceCategory;
    return {{PlaceCategory::VeryHigh, 10, 0.01},
            {PlaceCategory::High, 3, 0.005},
            {PlaceCategory::Middle, 8, 0.001},
            {PlaceCategory::Low, 3, 0.0001}};
}

inline stemcovid::sim::ScenarioConfig stay_config(const StayProbe& probe) {
    using namespace stemcovid::sim;
    ScenarioConfig c;
    c.name = "stay";
    c.N = 2, c.household_size = 2, c.P_vh = 1, c.P_h = 1, c.P_m = 1, c.P_l = 1, c.N_u0 = 1;
    c.schedule_jitter = false;
    c.daily_phase = DailyPhase::Synchronized;
    c.rates = InfectionRates{0.0, 0.0, 0.0, 0.0};
    switch (probe.category) {
        case PlaceCategory::VeryHigh: c.rates.very_high = probe.rate, c.T = 10; break;
        case PlaceCategory::High: c.rates.high = probe.rate, c.T = 21; break;
        case PlaceCategory::Middle: c.rates.middle = probe.rate, c.T = 18; break;
        case PlaceCategory::Low: c.rates.low = probe.rate, c.T = 24; break;
    }
    return c;
}

/// Number of infected susceptibles over `stays` independent simulated stays.
inline long simulate_stays(const StayProbe& probe, long stays, std::uint64_t seed) {
    const auto cfg = stay_config(probe);
    long infected = 0;
    for (long i = 0; i < stays; ++i) {
        const auto out = stemcovid::sim::run_simulation(cfg, seed + static_cast<std::uint64_t>(i));
        infected += static_cast<long>(out.infection_log.size());
    }
    return infected;
}

}  // namespace testing_support
