// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "stemcovid/stemcovid.hpp"
#include "support.hpp"

using namespace stemcovid;
using harness::Method;
using harness::Target;

namespace {

constexpr std::uint64_t kMasterSeed = 1;
constexpr int kRuns = 15;
constexpr int kPropertyCases = 1000;

int failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
    std::cout << "criterion " << id << ' ' << (pass ? "PASS" : "FAIL") << "  " << title << " | " << detail << std::endl;
    if (!pass) ++failures;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<harness::RunResult> batch(const std::string& name) {
    auto cfg = sim::preset(name);
    cfg.runs = kRuns;
    cfg.seed = kMasterSeed;
    return harness::run_scenario_batch(cfg);
}

double mean_of(const std::vector<harness::RunResult>& rs, double (*f)(const harness::RunResult&)) {
    double s = 0.0;
    for (const auto& r : rs) s += f(r);
    return s / static_cast<double>(rs.size());
}

// --- 1 ---------------------------------------------------------------------

void per_stay_probabilities() {
    const auto t0 = std::chrono::steady_clock::now();
    const long stays = 100000;
    const std::map<sim::PlaceCategory, double> stated{{sim::PlaceCategory::VeryHigh, 0.096},
                                                      {sim::PlaceCategory::High, 0.015},
                                                      {sim::PlaceCategory::Middle, 0.008},
                                                      {sim::PlaceCategory::Low, 0.0003}};
    bool pass = true;
    std::string detail;
    std::uint64_t seed = 1000;
    for (const auto& probe : testing_support::stay_probes()) {
        const double exact = 1.0 - std::pow(1.0 - probe.rate, probe.hours);
        const double freq = static_cast<double>(testing_support::simulate_stays(probe, stays, seed)) / stays;
        seed += static_cast<std::uint64_t>(stays);
        const double se = std::sqrt(exact * (1.0 - exact) / stays);
        const double paper = stated.at(probe.category);
        const bool ok = std::abs(freq - paper) <= 3 * se && std::abs(freq - exact) <= 3 * se;
        pass = pass && ok;
        detail += std::string(sim::to_string(probe.category)) + " " + fmt(freq) + " (stated " + fmt(paper) +
                  ", exact " + fmt(exact) + ", 3se " + fmt(3 * se, 2) + ") ";
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 10.0;
    report(1, pass, "per-stay infection probabilities", detail + "time " + fmt(elapsed, 3) + "s");
}

// --- 2 ---------------------------------------------------------------------

struct Doubling {
    int from = -1;
    int to = -1;
    int hours() const { return from < 0 || to < 0 ? -1 : to - from; }
};

Doubling doubling(const std::vector<harness::RunResult>& rs, double level) {
    const auto g = harness::growth_series(rs);
    return {harness::first_hour_at_least(g, level), harness::first_hour_at_least(g, 2 * level)};
}

void epidemic_growth(const std::vector<harness::RunResult>& s200n, double t200n,
                     const std::vector<harness::RunResult>& s200h, double t200h) {
    const auto n = doubling(s200n, 20);
    const auto h = doubling(s200h, 35);
    const double final_n = harness::growth_series(s200n).back().scc;
    const double final_h = harness::growth_series(s200h).back().scc;
    auto ok = [](const Doubling& d) { return d.hours() >= 0 && within(d.hours(), 160.0, 0.25); };
    const bool pass = ok(n) && ok(h) && t200n < 60.0 && t200h < 60.0;
    report(2, pass, "epidemic doubling time 160h +-25%",
           "S200N 20->40: h" + std::to_string(n.from) + "->h" + std::to_string(n.to) + " = " +
               (n.hours() < 0 ? std::string("never reached") : std::to_string(n.hours()) + "h") +
               " (mean SCC at T " + fmt(final_n) + "); S200H 35->70: h" + std::to_string(h.from) + "->h" +
               std::to_string(h.to) + " = " + (h.hours() < 0 ? std::string("never reached") : std::to_string(h.hours()) + "h") +
               " (mean SCC at T " + fmt(final_h) + "); batch time " + fmt(t200n, 3) + "s / " + fmt(t200h, 3) + "s");
}

// --- 3 ---------------------------------------------------------------------

void scale_consistency(const std::vector<harness::RunResult>& s1000n) {
    const auto last = harness::growth_series(s1000n).back();
    const bool pass = within(last.acc, 63, 0.3) && within(last.tscc, 121, 0.3) && within(last.scc, 225, 0.3);
    report(3, pass, "S1000N cumulative ACC/t-SCC/SCC within 30% of 63/121/225",
           "ACC " + fmt(last.acc) + ", t-SCC " + fmt(last.tscc) + ", SCC " + fmt(last.scc));
}

// --- 4 ---------------------------------------------------------------------

void superspreading(const std::vector<harness::RunResult>& s200n, const std::vector<harness::RunResult>& s200h) {
    auto sec = [](const harness::RunResult& r) { return r.index_secondary; };
    const double n = mean_of(s200n, sec);
    const double h = mean_of(s200h, sec);
    const bool pass = h > n && within(h, 12.8, 0.4) && within(n, 5.0, 0.4);
    report(4, pass, "index secondary infections S200H > S200N, within 40% of 12.8 / 5.0",
           "S200H " + fmt(h) + ", S200N " + fmt(n));
}

// --- 5 ---------------------------------------------------------------------

void detection_quality(const std::map<std::string, std::vector<harness::RunResult>>& all) {
    const auto& s200n = all.at("S200N");
    const double top3 = harness::topk_success(s200n, 3, Target::ACC);
    double random3 = 0.0;
    for (const auto& r : s200n) random3 += harness::random_topk_success(r, 3, Target::ACC);
    random3 /= static_cast<double>(s200n.size());
    const double index5 = harness::topk_success(s200n, 5, Target::Index);

    bool monotone = true;
    for (const auto& [name, rs] : all) {
        for (auto method : {Method::Stem, Method::Baseline}) {
            for (auto target : {Target::ACC, Target::Index}) {
                double last = 0.0;
                for (auto k : harness::kDefaultKGrid) {
                    const double s = harness::topk_success(rs, k, target, method);
                    monotone = monotone && s >= last;
                    last = s;
                }
            }
        }
    }
    double untested = 0.0, accs = 0.0;
    for (const auto& r : s200n) {
        untested += static_cast<double>(r.untested);
        accs += static_cast<double>(r.acc_set.size());
    }
    const bool pass = top3 >= 2 * random3 && index5 > 0.15 && monotone;
    report(5, pass, "S200N top-3 ACC >= 2x random, index top-5 > 15%, monotone in k",
           "top-3 ACC " + fmt(top3) + " vs random " + fmt(random3) + ", index top-5 " + fmt(index5) +
               ", monotone " + (monotone ? "yes" : "no") + ", mean ACCs " + fmt(accs / kRuns) + " of " +
               fmt(untested / kRuns) + " untested");
}

// --- 6 ---------------------------------------------------------------------

std::vector<std::pair<AgentId, int>> brute_force_overlap(const Dataset& d) {
    std::vector<std::pair<AgentId, int>> out;
    for (const auto& u : d.records) {
        if (u.cp != Positivity::Untested) continue;
        int c = 0;
        for (const auto& e : u.trace.events) {
            bool shared = false;
            for (const auto& p : d.records) {
                if (p.cp != Positivity::Positive) continue;
                for (const auto& f : p.trace.events) shared = shared || (f.time_step == e.time_step && f.place_id == e.place_id);
            }
            c += shared ? 1 : 0;
        }
        out.emplace_back(u.trace.agent_id, c);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

void oracle_equivalence(const std::map<std::string, std::vector<harness::RunResult>>& all) {
    std::size_t instances = 0, disagreements = 0;
    for (const auto& [name, rs] : all) {
        for (const auto& r : rs) {
            ++instances;
            for (auto k : harness::kDefaultKGrid) disagreements += harness::methods_agree(r, k) ? 0 : 1;
        }
    }

    std::mt19937_64 g(61);
    std::size_t micro_mismatch = 0;
    for (int c = 0; c < kPropertyCases; ++c) {
        const auto d = testing_support::random_dataset(g, 10, 20, 4);
        const auto m = build_memory(d);
        const auto stem = search::rank_untested(m, search::pool_evidence(m), search::SearchConfig{});
        const auto oracle = brute_force_overlap(d);
        bool same = stem.size() == oracle.size();
        for (std::size_t i = 0; same && i < oracle.size(); ++i) {
            same = stem[i].agent_id == oracle[i].first;
            if (same && i > 0) {
                same = (stem[i].activation == stem[i - 1].activation) == (oracle[i].second == oracle[i - 1].second);
            }
        }
        micro_mismatch += same ? 0 : 1;
    }
    report(6, disagreements == 0 && micro_mismatch == 0, "STEM and baseline top-k sets identical; brute-force oracle",
           std::to_string(instances) + " simulation instances x 5 k values, " + std::to_string(disagreements) +
               " disagreements; " + std::to_string(kPropertyCases) + " micro-instances, " +
               std::to_string(micro_mismatch) + " mismatches");
}

// --- 7 ---------------------------------------------------------------------

void complexity(const std::map<std::string, std::vector<harness::RunResult>>& all) {
    bool bounded = true;
    std::size_t instances = 0;
    for (const auto& [name, rs] : all) {
        for (const auto& r : rs) {
            ++instances;
            bounded = bounded && r.registry_size <= r.registry_bound;
        }
    }
    auto ratio = [&](const std::string& name) {
        const auto rows = harness::timing_summary(all.at(name));
        return rows[1].mean / rows[0].mean;
    };
    const auto t200 = harness::timing_summary(all.at("S200N"));
    const auto t1000 = harness::timing_summary(all.at("S1000N"));
    const double r200 = ratio("S200N"), r1000 = ratio("S1000N");
    report(7, bounded && r1000 > r200, "registry <= T*min(N,P); baseline/stem time ratio grows with scale",
           std::to_string(instances) + " instances bounded: " + (bounded ? "yes" : "no") + "; S200N stem " +
               fmt(t200[0].mean, 3) + "s baseline " + fmt(t200[1].mean, 3) + "s ratio " + fmt(r200) + "; S1000N stem " +
               fmt(t1000[0].mean, 3) + "s baseline " + fmt(t1000[1].mean, 3) + "s ratio " + fmt(r1000));
}

// --- 8 ---------------------------------------------------------------------

struct Suite {
    std::string name;
    int cases = 0;
    int failed = 0;
};

Suite art_properties() {
    Suite s{"fusion ART erosion/bounds/idempotence", 0, 0};
    std::mt19937_64 g(71);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int c = 0; c < kPropertyCases; ++c, ++s.cases) {
        const auto n = 1 + g() % 10;
        std::vector<double> w(n), x(n);
        for (auto& v : w) v = u(g);
        for (auto& v : x) v = u(g);
        const double beta = u(g);
        const auto w2 = art::template_learn(w, x, beta);
        bool ok = true;
        for (std::size_t j = 0; j < n; ++j) ok = ok && w2[j] <= w[j];
        const auto fast = art::template_learn(w, x, 1.0);
        ok = ok && art::template_learn(fast, x, 1.0) == fast;
        const double t = art::choice_term(x, w, art::kDefaultAlpha);
        const auto m = art::template_match(x, w, 0.5);
        ok = ok && t >= 0.0 && t <= 1.0 && m.m >= 0.0 && m.m <= 1.0;
        s.failed += ok ? 0 : 1;
    }
    return s;
}

Suite memory_properties() {
    Suite s{"memory losslessness/order invariance", 0, 0};
    std::mt19937_64 g(72);
    for (int c = 0; c < kPropertyCases; ++c, ++s.cases) {
        auto d = testing_support::random_dataset(g, 8, 30, 6);
        const auto m = build_memory(d);
        bool ok = true;
        for (const auto& r : d.records) {
            const auto* node = m.find(r.trace.agent_id);
            ok = ok && node && m.events_of(*node) == r.trace.events && node->cp == r.cp;
        }
        std::shuffle(d.records.begin(), d.records.end(), g);
        const auto m2 = build_memory(d);
        for (const auto& node : m.individuals()) {
            const auto* other = m2.find(node.agent_id);
            ok = ok && other && m2.events_of(*other) == m.events_of(node) && other->cp == node.cp;
        }
        ok = ok && m.registry().size() == m2.registry().size() &&
             m.registry().size() <= registry_bound(d.T, d.P, d.records.size());
        s.failed += ok ? 0 : 1;
    }
    return s;
}

Suite search_properties() {
    Suite s{"pooling algebra/CP exclusion", 0, 0};
    std::mt19937_64 g(73);
    for (int c = 0; c < kPropertyCases; ++c, ++s.cases) {
        auto d = testing_support::random_dataset(g, 10, 20, 4);
        const auto m = build_memory(d);
        const auto e = search::pool_evidence(m);
        bool ok = true;
        for (double v : e.values) ok = ok && (v == 0.0 || v == 1.0);

        // A duplicate of an existing positive leaves E unchanged.
        for (const auto& r : d.records) {
            if (r.cp != Positivity::Positive) continue;
            auto dup = d;
            dup.records.push_back({EpisodicTrace{-1, r.trace.events}, Positivity::Positive});
            ok = ok && search::pool_evidence(build_memory(dup)) == e;
            break;
        }
        std::set<AgentId> positives;
        for (const auto& r : d.records) {
            if (r.cp == Positivity::Positive) positives.insert(r.trace.agent_id);
        }
        search::SearchStats stats;
        for (const auto& cand : search::rank_untested(m, e, search::SearchConfig{}, &stats)) {
            ok = ok && !positives.contains(cand.agent_id);
        }
        ok = ok && stats.activations == m.size();
        s.failed += ok ? 0 : 1;
    }
    return s;
}

Suite sim_properties() {
    Suite s{"simulator determinism/ACC fraction", 0, 0};
    // Determinism over many small worlds.
    auto cfg = sim::preset("S200N");
    cfg.T = 96;
    for (int c = 0; c < kPropertyCases; ++c, ++s.cases) {
        const auto a = sim::run_simulation(cfg, 5000 + static_cast<std::uint64_t>(c));
        const auto b = sim::run_simulation(cfg, 5000 + static_cast<std::uint64_t>(c));
        bool ok = a.infection_log == b.infection_log && a.counts == b.counts && a.truth == b.truth && a.labels == b.labels;
        for (std::size_t i = 0; ok && i < a.traces.size(); ++i) ok = a.traces[i].events == b.traces[i].events;
        s.failed += ok ? 0 : 1;
    }
    // Binomial test of the asymptomatic share over pooled S1000N infections, 1% level.
    long infections = 0, acc = 0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto out = sim::run_simulation(sim::preset("S1000N"), seed);
        for (const auto& gt : out.truth) {
            if (gt.status == sim::Status::Index || gt.destiny == sim::Destiny::None) continue;
            ++infections;
            acc += gt.destiny == sim::Destiny::Asymptomatic ? 1 : 0;
        }
    }
    const double z = (static_cast<double>(acc) - 0.2 * static_cast<double>(infections)) /
                     std::sqrt(static_cast<double>(infections) * 0.2 * 0.8);
    s.name += " (z=" + fmt(z, 3) + " over " + std::to_string(infections) + " infections)";
    ++s.cases;
    s.failed += (infections >= 1000 && std::abs(z) < 2.5758) ? 0 : 1;
    return s;
}

void property_suites() {
    std::string detail;
    bool pass = true;
    for (const auto& s : {art_properties(), memory_properties(), search_properties(), sim_properties()}) {
        pass = pass && s.failed == 0 && s.cases >= kPropertyCases;
        detail += s.name + ": " + std::to_string(s.cases - s.failed) + "/" + std::to_string(s.cases) + "; ";
    }
    report(8, pass, "property suites", detail);
}

}  // namespace

int main() {
    std::cout << "acceptance: master seed " << kMasterSeed << ", " << kRuns << " runs per scenario" << std::endl;
    per_stay_probabilities();

    std::map<std::string, std::vector<harness::RunResult>> all;
    std::map<std::string, double> batch_seconds;
    for (const auto* name : {"S200N", "S200H", "S1000N"}) {
        const auto t0 = std::chrono::steady_clock::now();
        all[name] = batch(name);
        batch_seconds[name] = seconds_since(t0);
    }

    epidemic_growth(all.at("S200N"), batch_seconds.at("S200N"), all.at("S200H"), batch_seconds.at("S200H"));
    scale_consistency(all.at("S1000N"));
    superspreading(all.at("S200N"), all.at("S200H"));
    detection_quality(all);
    oracle_equivalence(all);
    complexity(all);
    property_suites();

    std::cout << "acceptance: " << (8 - failures) << "/8 criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
