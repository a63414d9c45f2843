#pragma once
/**
 * Multi-channel fusion ART primitives.
 *
 * A fusion ART field holds category nodes with one weight vector per input
 * channel. Norms are L1 (sum of elements) and the fuzzy AND is the
 * element-wise min. No complement coding is applied anywhere.
 *
 *   choice    T_j = sum_k gamma_k * |x_k ^ w_jk| / (alpha_k + |w_jk|)
 *   match     m_k = |x_k ^ w_Jk| / |x_k|        (m_k = 1 when |x_k| = 0)
 *   learning  w' = (1 - beta) w + beta (x ^ w)
 */

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stemcovid/errors.hpp"

namespace stemcovid::art {

inline constexpr double kDefaultAlpha = 0.001;

using ActivityVector = std::vector<double>;
using WeightVector = std::vector<double>;

/// Per-channel dynamics parameters. Bounds are enforced on every write.
class ChannelParams {
public:
    ChannelParams() = default;
    ChannelParams(double alpha, double beta, double gamma, double rho) {
        set_alpha(alpha);
        set_beta(beta);
        set_gamma(gamma);
        set_rho(rho);
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }
    double rho() const noexcept { return rho_; }

    void set_alpha(double v) {
        if (!(v >= 0.0)) throw ValidationError("choice parameter alpha must be >= 0");
        alpha_ = v;
    }
    void set_beta(double v) { beta_ = unit("learning rate beta", v); }
    void set_gamma(double v) { gamma_ = unit("contribution gamma", v); }
    void set_rho(double v) { rho_ = unit("vigilance rho", v); }

private:
    static double unit(const char* name, double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0,1]");
        return v;
    }

    double alpha_ = kDefaultAlpha;
    double beta_ = 1.0;
    double gamma_ = 1.0;
    double rho_ = 1.0;
};

inline bool in_unit_interval(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double e) { return e >= 0.0 && e <= 1.0; });
}

inline void require_activity(std::span<const double> v, const std::string& what) {
    if (!in_unit_interval(v)) throw ValidationError(what + ": activity values must lie in [0,1]");
}

inline double norm(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

namespace detail {
inline void require_same_length(std::size_t a, std::size_t b, const std::string& where) {
    if (a != b) {
        throw ContractViolation(where + ": dimension mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
    }
}
}  // namespace detail

/// |x ^ w|
inline double fuzzy_and_norm(std::span<const double> x, std::span<const double> w) {
    detail::require_same_length(x.size(), w.size(), "fuzzy_and_norm");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::min(x[i], w[i]);
    return s;
}

/// Single-channel term of the choice function, without gamma.
inline double choice_term(std::span<const double> x, std::span<const double> w, double alpha) {
    const double overlap = fuzzy_and_norm(x, w);
    const double denom = alpha + norm(w);
    return denom > 0.0 ? overlap / denom : 0.0;
}

/// Choice term against a binary weight vector given by its support (indices of ones).
/// Equal to choice_term(x, dense(w), alpha) for any x in [0,1]^n; O(|support|).
inline double sparse_choice_term(std::span<const double> x, std::span<const std::uint32_t> support,
                                 double alpha) {
    double overlap = 0.0;
    for (auto j : support) {
        if (j >= x.size()) throw ContractViolation("sparse_choice_term: support index out of range");
        overlap += x[j];
    }
    const double denom = alpha + static_cast<double>(support.size());
    return denom > 0.0 ? overlap / denom : 0.0;
}

struct CategoryNode {
    std::vector<WeightVector> weights;
    bool committed = false;

    /// All-ones weights so that a first fast-learning step stores the input exactly.
    static CategoryNode uncommitted(std::span<const std::size_t> dims) {
        CategoryNode n;
        n.weights.reserve(dims.size());
        for (auto d : dims) n.weights.emplace_back(d, 1.0);
        return n;
    }

    std::size_t channels() const noexcept { return weights.size(); }
};

inline double choice_activation(std::span<const ActivityVector> inputs, const CategoryNode& node,
                                std::span<const ChannelParams> params) {
    if (inputs.size() != node.weights.size() || params.size() != node.weights.size()) {
        throw ContractViolation("choice_activation: channel count mismatch");
    }
    double t = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (inputs[k].size() != node.weights[k].size()) {
            throw ContractViolation("choice_activation: dimension mismatch on channel " + std::to_string(k));
        }
        if (params[k].gamma() == 0.0) continue;
        t += params[k].gamma() * choice_term(inputs[k], node.weights[k], params[k].alpha());
    }
    return t;
}

struct MatchResult {
    double m = 1.0;
    bool resonant = true;
};

inline MatchResult template_match(std::span<const double> x, std::span<const double> w, double rho) {
    detail::require_same_length(x.size(), w.size(), "template_match");
    const double nx = norm(x);
    // A zero input places no constraint on the template.
    const double m = nx > 0.0 ? fuzzy_and_norm(x, w) / nx : 1.0;
    return {m, m >= rho};
}

inline WeightVector template_learn(std::span<const double> w, std::span<const double> x, double beta) {
    detail::require_same_length(w.size(), x.size(), "template_learn");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ContractViolation("template_learn: beta outside [0,1]");
    WeightVector out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = std::min(w[i], (1.0 - beta) * w[i] + beta * std::min(x[i], w[i]));
    }
    return out;
}

inline ActivityVector readout(const CategoryNode& node, std::size_t channel) {
    if (channel >= node.weights.size()) {
        throw ContractViolation("readout: unknown channel " + std::to_string(channel));
    }
    return node.weights[channel];
}

/**
 * A category field with the generic ART cycle: code competition over all
 * committed nodes, template matching on every channel, learning on the first
 * resonant node, otherwise recruitment of a new node. Nodes keep creation order.
 */
class FusionField {
public:
    FusionField(std::vector<std::size_t> dims, std::vector<ChannelParams> params)
        : dims_(std::move(dims)), params_(std::move(params)) {
        if (dims_.size() != params_.size()) {
            throw ContractViolation("FusionField: one ChannelParams per channel required");
        }
    }

    std::size_t channels() const noexcept { return dims_.size(); }
    std::span<const std::size_t> dims() const noexcept { return dims_; }
    std::span<const ChannelParams> params() const noexcept { return params_; }
    ChannelParams& params(std::size_t k) { return params_.at(k); }
    std::span<const CategoryNode> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    std::vector<double> activate(std::span<const ActivityVector> inputs) const {
        std::vector<double> t(nodes_.size());
        for (std::size_t j = 0; j < nodes_.size(); ++j) t[j] = choice_activation(inputs, nodes_[j], params_);
        return t;
    }

    bool resonates(std::span<const ActivityVector> inputs, std::size_t j) const {
        const auto& node = nodes_.at(j);
        for (std::size_t k = 0; k < channels(); ++k) {
            if (!template_match(inputs[k], node.weights[k], params_[k].rho()).resonant) return false;
        }
        return true;
    }

    /// Present an input, learn, and return the index of the node that encoded it.
    std::size_t learn(std::span<const ActivityVector> inputs) {
        check_inputs(inputs);
        const auto t = activate(inputs);
        std::vector<std::size_t> order(nodes_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] > t[b]; });

        for (auto j : order) {
            if (!resonates(inputs, j)) continue;
            update(nodes_[j], inputs);
            return j;
        }
        auto node = CategoryNode::uncommitted(dims_);
        update(node, inputs);
        node.committed = true;
        nodes_.push_back(std::move(node));
        return nodes_.size() - 1;
    }

private:
    void check_inputs(std::span<const ActivityVector> inputs) const {
        if (inputs.size() != channels()) throw ContractViolation("FusionField: channel count mismatch");
        for (std::size_t k = 0; k < channels(); ++k) {
            if (inputs[k].size() != dims_[k]) {
                throw ContractViolation("FusionField: dimension mismatch on channel " + std::to_string(k));
            }
            require_activity(inputs[k], "channel " + std::to_string(k));
        }
    }

    void update(CategoryNode& node, std::span<const ActivityVector> inputs) const {
        for (std::size_t k = 0; k < channels(); ++k) {
            // A fresh node always learns at full rate so it stores the input.
            const double beta = node.committed ? params_[k].beta() : 1.0;
            node.weights[k] = template_learn(node.weights[k], inputs[k], beta);
        }
    }

    std::vector<std::size_t> dims_;
    std::vector<ChannelParams> params_;
    std::vector<CategoryNode> nodes_;
};

}  // namespace stemcovid::art
