#pragma once
/**
 * Collective spatio-temporal episodic memory.
 *
 * Bottom network: each unique (time, place) event becomes one node of the
 * episode field, holding normalized weights (t/T, p/P). Top network: one node
 * per individual, holding a binary episode vector over the episode field and
 * the individual's positivity label.
 *
 * Episode vectors are stored sparsely as the sorted indices of their ones;
 * when the episode field grows, older vectors are implicitly zero-padded.
 */

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stemcovid/errors.hpp"
#include "stemcovid/fusion_art.hpp"

namespace stemcovid {

using AgentId = std::int64_t;
using NodeIndex = std::uint32_t;

struct Event {
    int time_step = 0;
    int place_id = 0;

    friend bool operator==(const Event&, const Event&) = default;
    friend auto operator<=>(const Event&, const Event&) = default;
};

struct EpisodicTrace {
    AgentId agent_id = 0;
    std::vector<Event> events;
};

enum class Positivity : std::uint8_t { Untested = 0, Positive = 1 };

inline int to_int(Positivity cp) { return static_cast<int>(cp); }

inline Positivity positivity_from_int(long v) {
    if (v != 0 && v != 1) throw ValidationError("positivity label must be 0 or 1, got " + std::to_string(v));
    return static_cast<Positivity>(v);
}

struct LabeledTrace {
    EpisodicTrace trace;
    Positivity cp = Positivity::Untested;
};

/// Traces of a whole population over a horizon of T hours and P places.
struct Dataset {
    int T = 0;
    int P = 0;
    std::vector<LabeledTrace> records;
};

/// Time strictly increasing, every event inside [0,T) x [0,P), length <= T.
inline void validate_trace(const EpisodicTrace& trace, int T, int P) {
    const auto who = "agent " + std::to_string(trace.agent_id);
    if (trace.events.size() > static_cast<std::size_t>(T)) throw ValidationError(who + ": trace longer than T");
    int last = -1;
    for (const auto& e : trace.events) {
        if (e.time_step < 0 || e.time_step >= T || e.place_id < 0 || e.place_id >= P) {
            throw ValidationError(who + ": event (" + std::to_string(e.time_step) + "," +
                                  std::to_string(e.place_id) + ") out of range");
        }
        if (e.time_step <= last) throw ValidationError(who + ": trace times must be strictly increasing");
        last = e.time_step;
    }
}

struct EventNode {
    int raw_time = 0;
    int raw_place = 0;
    double w_time = 0.0;
    double w_place = 0.0;
};

/// Episode field of the bottom network with exact (t,p) lookup.
class EventNodeRegistry {
public:
    EventNodeRegistry() = default;
    EventNodeRegistry(int T, int P) : T_(T), P_(P) {
        if (T <= 0 || P <= 0) throw ValidationError("registry bounds T and P must be positive");
    }

    int T() const noexcept { return T_; }
    int P() const noexcept { return P_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::span<const EventNode> nodes() const noexcept { return nodes_; }
    const EventNode& node(NodeIndex j) const { return nodes_.at(j); }
    Event event(NodeIndex j) const { return {nodes_.at(j).raw_time, nodes_.at(j).raw_place}; }

    /// Index of the node for (t,p), committing a new node when the event is novel.
    NodeIndex encode(int t, int p) {
        if (t < 0 || t >= T_) throw ValidationError("time step " + std::to_string(t) + " outside [0,T)");
        if (p < 0 || p >= P_) throw ValidationError("place id " + std::to_string(p) + " outside [0,P)");
        const auto [it, inserted] = index_.try_emplace(key(t, p), static_cast<NodeIndex>(nodes_.size()));
        if (inserted) {
            nodes_.push_back({t, p, static_cast<double>(t) / T_, static_cast<double>(p) / P_});
        }
        return it->second;
    }

    std::optional<NodeIndex> find(int t, int p) const {
        if (t < 0 || t >= T_ || p < 0 || p >= P_) return std::nullopt;
        const auto it = index_.find(key(t, p));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Bottom-network view of node j: channel 0 time, channel 1 place.
    art::CategoryNode as_category(NodeIndex j) const {
        const auto& n = nodes_.at(j);
        return art::CategoryNode{{{n.w_time}, {n.w_place}}, true};
    }

    art::ActivityVector normalized_time(int t) const { return {static_cast<double>(t) / T_}; }
    art::ActivityVector normalized_place(int p) const { return {static_cast<double>(p) / P_}; }

private:
    std::uint64_t key(int t, int p) const {
        return static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(P_) + static_cast<std::uint64_t>(p);
    }

    int T_ = 1;
    int P_ = 1;
    std::vector<EventNode> nodes_;
    std::unordered_map<std::uint64_t, NodeIndex> index_;
};

/// F3 code of one individual. `episode` is the sorted support of w_e.
struct IndividualNode {
    AgentId agent_id = 0;
    std::vector<NodeIndex> episode;
    Positivity cp = Positivity::Untested;

    /// |w_e|
    std::size_t episode_norm() const noexcept { return episode.size(); }

    friend bool operator==(const IndividualNode&, const IndividualNode&) = default;
};

/// Dense binary episode vector of the given length from a sparse support.
inline std::vector<double> densify(std::span<const NodeIndex> support, std::size_t length) {
    std::vector<double> v(length, 0.0);
    for (auto j : support) {
        if (j >= length) throw ContractViolation("densify: support index beyond vector length");
        v[j] = 1.0;
    }
    return v;
}

inline std::vector<NodeIndex> encode_trace_events(const EpisodicTrace& trace, EventNodeRegistry& registry) {
    std::vector<NodeIndex> js;
    js.reserve(trace.events.size());
    for (const auto& e : trace.events) js.push_back(registry.encode(e.time_step, e.place_id));
    std::sort(js.begin(), js.end());
    js.erase(std::unique(js.begin(), js.end()), js.end());
    return js;
}

inline NodeIndex encode_event(int t, int p, EventNodeRegistry& registry) { return registry.encode(t, p); }

/// Binary episode vector E over the current registry. Events are encoded on the fly.
inline std::vector<double> episode_vector(const EpisodicTrace& trace, EventNodeRegistry& registry) {
    const auto js = encode_trace_events(trace, registry);
    return densify(js, registry.size());
}

class CollectiveMemory {
public:
    CollectiveMemory() = default;
    CollectiveMemory(int T, int P) : registry_(T, P) {}

    const EventNodeRegistry& registry() const noexcept { return registry_; }
    std::span<const IndividualNode> individuals() const noexcept { return individuals_; }
    std::size_t size() const noexcept { return individuals_.size(); }
    int T() const noexcept { return registry_.T(); }
    int P() const noexcept { return registry_.P(); }

    const IndividualNode* find(AgentId id) const {
        const auto it = by_agent_.find(id);
        return it == by_agent_.end() ? nullptr : &individuals_[it->second];
    }

    /// Encode the trace bottom-up, then recruit one F3 node by overwrite learning.
    const IndividualNode& encode_individual(const EpisodicTrace& trace, Positivity cp) {
        if (by_agent_.contains(trace.agent_id)) {
            throw ValidationError("agent " + std::to_string(trace.agent_id) + " is already encoded");
        }
        validate_trace(trace, registry_.T(), registry_.P());
        IndividualNode node{trace.agent_id, encode_trace_events(trace, registry_), cp};
        by_agent_.emplace(node.agent_id, individuals_.size());
        individuals_.push_back(std::move(node));
        return individuals_.back();
    }

    /// Restore an individual whose episode support is already expressed in registry indices.
    const IndividualNode& restore_individual(IndividualNode node) {
        if (by_agent_.contains(node.agent_id)) {
            throw ValidationError("agent " + std::to_string(node.agent_id) + " is already encoded");
        }
        std::sort(node.episode.begin(), node.episode.end());
        if (std::adjacent_find(node.episode.begin(), node.episode.end()) != node.episode.end()) {
            throw ValidationError("duplicate episode index for agent " + std::to_string(node.agent_id));
        }
        if (!node.episode.empty() && node.episode.back() >= registry_.size()) {
            throw ValidationError("episode index beyond registry for agent " + std::to_string(node.agent_id));
        }
        by_agent_.emplace(node.agent_id, individuals_.size());
        individuals_.push_back(std::move(node));
        return individuals_.back();
    }

    EventNodeRegistry& mutable_registry() noexcept { return registry_; }

    /// Events recovered from an individual's stored code, in time order.
    std::vector<Event> events_of(const IndividualNode& node) const {
        std::vector<Event> out;
        out.reserve(node.episode.size());
        for (auto j : node.episode) out.push_back(registry_.event(j));
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Top-network view of an individual: channel 0 episode (dense), channel 1 positivity.
    art::CategoryNode as_category(const IndividualNode& node) const {
        return art::CategoryNode{{densify(node.episode, registry_.size()), {static_cast<double>(to_int(node.cp))}},
                                 true};
    }

    friend bool operator==(const CollectiveMemory& a, const CollectiveMemory& b) {
        if (a.T() != b.T() || a.P() != b.P() || a.registry_.size() != b.registry_.size()) return false;
        for (std::size_t j = 0; j < a.registry_.size(); ++j) {
            if (a.registry_.event(static_cast<NodeIndex>(j)) != b.registry_.event(static_cast<NodeIndex>(j))) {
                return false;
            }
        }
        return a.individuals_ == b.individuals_;
    }

private:
    EventNodeRegistry registry_;
    std::vector<IndividualNode> individuals_;
    std::unordered_map<AgentId, std::size_t> by_agent_;
};

inline const IndividualNode& encode_individual(const EpisodicTrace& trace, Positivity cp, CollectiveMemory& memory) {
    return memory.encode_individual(trace, cp);
}

/// Worst-case episode field size: T * min(N, P).
inline std::size_t registry_bound(int T, int P, std::size_t N) {
    return static_cast<std::size_t>(T) * std::min<std::size_t>(N, static_cast<std::size_t>(P));
}

inline CollectiveMemory build_memory(const Dataset& dataset) {
    if (dataset.T <= 0 || dataset.P <= 0) throw ValidationError("dataset bounds T and P must be positive");
    CollectiveMemory memory(dataset.T, dataset.P);
    for (const auto& rec : dataset.records) memory.encode_individual(rec.trace, rec.cp);
    return memory;
}

}  // namespace stemcovid
