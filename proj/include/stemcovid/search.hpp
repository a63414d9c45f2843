#pragma once
/**
 * Asymptomatic-carrier search over a collective episodic memory.
 *
 * Step 1 pools the episode weights of every tested-positive individual into
 * one evidence vector (fuzzy OR). Step 2 activates every individual node with
 * that evidence and ranks the untested ones by activation. A brute-force
 * trace-overlap baseline computes the same ordering the slow way.
 */

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stemcovid/errors.hpp"
#include "stemcovid/fusion_art.hpp"
#include "stemcovid/memory.hpp"

namespace stemcovid::search {

enum class Method { Stem, Baseline };
enum class Pooling { FuzzyOr, Weighted };
enum class Selection { TopK, Threshold };

inline std::string_view to_string(Method m) { return m == Method::Stem ? "stem" : "baseline"; }
inline std::string_view to_string(Pooling p) { return p == Pooling::FuzzyOr ? "fuzzy_or" : "weighted"; }
inline std::string_view to_string(Selection s) { return s == Selection::TopK ? "topk" : "threshold"; }

inline Method parse_method(std::string_view s) {
    if (s == "stem") return Method::Stem;
    if (s == "baseline") return Method::Baseline;
    throw ValidationError("unknown method '" + std::string(s) + "' (expected stem|baseline)");
}

inline Pooling parse_pooling(std::string_view s) {
    if (s == "fuzzy_or") return Pooling::FuzzyOr;
    if (s == "weighted") return Pooling::Weighted;
    throw ValidationError("unknown pooling '" + std::string(s) + "' (expected fuzzy_or|weighted)");
}

struct SearchConfig {
    double delta_c = 0.0;
    std::size_t k = 5;
    Method method = Method::Stem;
    Pooling pooling = Pooling::FuzzyOr;
    Selection selection = Selection::TopK;
    double alpha = art::kDefaultAlpha;
    double gamma_e = 1.0;
    double gamma_c = 1.0;

    void validate() const {
        if (!(delta_c >= 0.0)) throw ValidationError("delta_c must be >= 0");
        if (k == 0) throw ValidationError("k must be a positive integer");
        // Reuse the channel-parameter bounds.
        (void)art::ChannelParams{alpha, 1.0, gamma_e, 0.0};
        (void)art::ChannelParams{alpha, 1.0, gamma_c, 0.0};
    }
};

/// Pooled evidence over the episode field. Binary for fuzzy-OR pooling.
struct EvidenceVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double norm() const { return art::norm(values); }
    friend bool operator==(const EvidenceVector&, const EvidenceVector&) = default;
};

struct RankedCandidate {
    AgentId agent_id = 0;
    double activation = 0.0;
    std::size_t rank = 0;  // 1-based
};

/// Optional instrumentation for complexity checks.
struct SearchStats {
    std::size_t activations = 0;
    std::size_t pooled = 0;
};

namespace detail {

/// Activation of an individual node on the positivity channel alone: input c, weight w_c.
inline double positivity_term(double c, Positivity stored, double alpha) {
    const double x[1] = {c};
    const double w[1] = {static_cast<double>(to_int(stored))};
    return art::choice_term(x, w, alpha);
}

}  // namespace detail

/**
 * Step 1. Activate F3 with gamma_e = 0, gamma_c = 1 and c = (1); every node
 * with 0 < T_j <= 1 is read out and merged by element-wise max.
 */
inline EvidenceVector pool_evidence(const CollectiveMemory& memory, double alpha = art::kDefaultAlpha,
                                    SearchStats* stats = nullptr) {
    EvidenceVector evidence{std::vector<double>(memory.registry().size(), 0.0)};
    for (const auto& node : memory.individuals()) {
        const double t = detail::positivity_term(1.0, node.cp, alpha);
        if (stats) ++stats->activations;
        if (!(t > 0.0 && t <= 1.0)) continue;
        if (stats) ++stats->pooled;
        // Readout of a binary w_e followed by fuzzy OR.
        for (auto j : node.episode) evidence.values[j] = 1.0;
    }
    return evidence;
}

/// Frequency-weighted pooling: fraction of positives whose trace contains each event.
inline EvidenceVector pool_evidence_weighted(const CollectiveMemory& memory) {
    std::vector<double> counts(memory.registry().size(), 0.0);
    std::size_t positives = 0;
    for (const auto& node : memory.individuals()) {
        if (node.cp != Positivity::Positive) continue;
        ++positives;
        for (auto j : node.episode) counts[j] += 1.0;
    }
    if (positives > 0) {
        for (auto& v : counts) v /= static_cast<double>(positives);
    }
    return {std::move(counts)};
}

inline EvidenceVector pool(const CollectiveMemory& memory, const SearchConfig& cfg, SearchStats* stats = nullptr) {
    return cfg.pooling == Pooling::FuzzyOr ? pool_evidence(memory, cfg.alpha, stats) : pool_evidence_weighted(memory);
}

/// Candidate order: activation descending, then agent id ascending.
inline void sort_candidates(std::vector<RankedCandidate>& c) {
    std::sort(c.begin(), c.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.activation != b.activation) return a.activation > b.activation;
        return a.agent_id < b.agent_id;
    });
    for (std::size_t i = 0; i < c.size(); ++i) c[i].rank = i + 1;
}

/**
 * Step 2 without ordering. Every F3 node is activated once with (E, c = (0));
 * only nodes whose stored positivity is 0 become candidates.
 */
inline std::vector<RankedCandidate> activate_untested(const CollectiveMemory& memory, const EvidenceVector& evidence,
                                                      const SearchConfig& cfg, SearchStats* stats = nullptr) {
    if (evidence.size() != memory.registry().size()) {
        throw ContractViolation("rank_untested: evidence length " + std::to_string(evidence.size()) +
                                " does not match registry size " + std::to_string(memory.registry().size()));
    }
    std::vector<RankedCandidate> out;
    out.reserve(memory.size());
    for (const auto& node : memory.individuals()) {
        double t = 0.0;
        if (cfg.gamma_e > 0.0) t += cfg.gamma_e * art::sparse_choice_term(evidence.values, node.episode, cfg.alpha);
        if (cfg.gamma_c > 0.0) t += cfg.gamma_c * detail::positivity_term(0.0, node.cp, cfg.alpha);
        if (stats) ++stats->activations;
        if (node.cp != Positivity::Untested) continue;
        out.push_back({node.agent_id, t, 0});
    }
    return out;
}

inline std::vector<RankedCandidate> rank_untested(const CollectiveMemory& memory, const EvidenceVector& evidence,
                                                  const SearchConfig& cfg, SearchStats* stats = nullptr) {
    auto out = activate_untested(memory, evidence, cfg, stats);
    sort_candidates(out);
    return out;
}

/// Top-k prefix, or everything strictly above delta_c.
inline std::vector<AgentId> select_candidates(std::span<const RankedCandidate> ranked, const SearchConfig& cfg) {
    std::vector<AgentId> ids;
    if (cfg.selection == Selection::TopK) {
        const auto n = std::min(cfg.k, ranked.size());
        for (std::size_t i = 0; i < n; ++i) ids.push_back(ranked[i].agent_id);
    } else {
        for (const auto& c : ranked) {
            if (c.activation > cfg.delta_c) ids.push_back(c.agent_id);
        }
    }
    return ids;
}

// ---------------------------------------------------------------------------
// Baseline: merged positive events, then a nested-loop count per untested trace.

struct Similarity {
    AgentId agent_id = 0;
    double s = 0.0;
};

/// Distinct events over all positive traces, in (t, p) order.
inline std::vector<Event> merge_events(std::span<const EpisodicTrace> positives) {
    std::vector<Event> merged;
    for (const auto& tr : positives) merged.insert(merged.end(), tr.events.begin(), tr.events.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return merged;
}

/// s_i = c_i / T where c_i counts events of trace i found in the merged set by linear scan.
inline std::vector<Similarity> baseline_similarities(std::span<const Event> merged,
                                                     std::span<const EpisodicTrace> untested, int T) {
    if (T <= 0) throw ValidationError("baseline_similarities: T must be positive");
    std::vector<Similarity> out;
    out.reserve(untested.size());
    for (const auto& tr : untested) {
        std::size_t c = 0;
        for (const auto& e : tr.events) {
            for (const auto& m : merged) {
                if (e == m) {
                    ++c;
                    break;
                }
            }
        }
        out.push_back({tr.agent_id, static_cast<double>(c) / T});
    }
    return out;
}

inline std::vector<Similarity> baseline_similarities(std::span<const EpisodicTrace> positives,
                                                     std::span<const EpisodicTrace> untested, int T) {
    const auto merged = merge_events(positives);
    return baseline_similarities(merged, untested, T);
}

inline std::vector<RankedCandidate> rank_similarities(std::span<const Similarity> sims) {
    std::vector<RankedCandidate> out;
    out.reserve(sims.size());
    for (const auto& s : sims) out.push_back({s.agent_id, s.s, 0});
    sort_candidates(out);
    return out;
}

/// Untested and positive traces, split by label.
struct BaselineInput {
    int T = 0;
    std::vector<EpisodicTrace> positives;
    std::vector<EpisodicTrace> untested;
};

inline BaselineInput split_by_label(const Dataset& dataset) {
    BaselineInput in{dataset.T, {}, {}};
    for (const auto& r : dataset.records) {
        (r.cp == Positivity::Positive ? in.positives : in.untested).push_back(r.trace);
    }
    return in;
}

/// Traces recovered losslessly from the memory, split by stored positivity.
inline BaselineInput split_by_label(const CollectiveMemory& memory) {
    BaselineInput in{memory.T(), {}, {}};
    for (const auto& node : memory.individuals()) {
        EpisodicTrace tr{node.agent_id, memory.events_of(node)};
        (node.cp == Positivity::Positive ? in.positives : in.untested).push_back(std::move(tr));
    }
    return in;
}

// ---------------------------------------------------------------------------
// Timing. Inputs are prepared by the caller; only the similarity computation is timed.

using Seconds = std::chrono::duration<double>;

template <class F>
Seconds time_call(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    std::forward<F>(f)();
    return std::chrono::steady_clock::now() - t0;
}

struct TimedRanking {
    std::vector<RankedCandidate> ranked;
    Seconds elapsed{0.0};
};

/// Pooling plus activation of every individual node. Sorting happens after the clock stops.
inline TimedRanking timing_probe(const CollectiveMemory& memory, const SearchConfig& cfg) {
    TimedRanking r;
    r.elapsed = time_call([&] {
        const auto evidence = pool(memory, cfg);
        r.ranked = activate_untested(memory, evidence, cfg);
    });
    sort_candidates(r.ranked);
    return r;
}

/// Event merging plus the nested counting loop of the baseline.
inline TimedRanking timing_probe(const BaselineInput& input) {
    std::vector<Similarity> sims;
    TimedRanking r;
    r.elapsed = time_call([&] { sims = baseline_similarities(input.positives, input.untested, input.T); });
    r.ranked = rank_similarities(sims);
    return r;
}

}  // namespace stemcovid::search
