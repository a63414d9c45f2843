#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "stemcovid/fusion_art.hpp"

using namespace stemcovid;
using namespace stemcovid::art;

namespace {

constexpr int kCases = 2000;

std::vector<double> random_unit(std::mt19937_64& g, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& e : v) e = u(g);
    return v;
}

/// Values on a 1/8 grid so sums are exact in floating point.
std::vector<double> random_grid(std::mt19937_64& g, std::size_t n) {
    std::uniform_int_distribution<int> u(0, 8);
    std::vector<double> v(n);
    for (auto& e : v) e = u(g) / 8.0;
    return v;
}

ChannelParams params(double alpha, double gamma) { return ChannelParams{alpha, 1.0, gamma, 0.0}; }

}  // namespace

TEST(ChoiceActivation, IdentityOnTwoChannels) {
    CategoryNode node{{{0.2, 0.7}, {1.0}}, true};
    const std::vector<ActivityVector> x{{0.2, 0.7}, {1.0}};
    const std::vector<ChannelParams> p{params(0.0, 1.0), params(0.0, 1.0)};
    EXPECT_DOUBLE_EQ(choice_activation(x, node, p), 2.0);
}

TEST(ChoiceActivation, HalfOverlap) {
    CategoryNode node{{{1.0}}, true};
    const std::vector<ActivityVector> x{{0.5}};
    const std::vector<ChannelParams> p{params(0.0, 1.0)};
    EXPECT_DOUBLE_EQ(choice_activation(x, node, p), 0.5);
}

TEST(ChoiceActivation, DisjointSupports) {
    CategoryNode node{{{0.0, 1.0}}, true};
    const std::vector<ActivityVector> x{{1.0, 0.0}};
    const std::vector<ChannelParams> p{params(0.0, 1.0)};
    EXPECT_DOUBLE_EQ(choice_activation(x, node, p), 0.0);
}

TEST(ChoiceActivation, DimensionMismatchNamesChannel) {
    CategoryNode node{{{1.0}, {1.0, 0.0}}, true};
    const std::vector<ActivityVector> x{{1.0}, {1.0}};
    const std::vector<ChannelParams> p{params(0.0, 1.0), params(0.0, 1.0)};
    try {
        choice_activation(x, node, p);
        FAIL() << "expected ContractViolation";
    } catch (const ContractViolation& e) {
        EXPECT_NE(std::string(e.what()).find("channel 1"), std::string::npos);
    }
}

TEST(TemplateMatch, Examples) {
    const std::vector<double> x{0.3, 0.6};
    EXPECT_DOUBLE_EQ(template_match(x, x, 1.0).m, 1.0);
    EXPECT_TRUE(template_match(x, x, 1.0).resonant);

    const auto contained = template_match(std::vector<double>{1, 0}, std::vector<double>{1, 1}, 1.0);
    EXPECT_DOUBLE_EQ(contained.m, 1.0);

    const auto half = template_match(std::vector<double>{1, 1}, std::vector<double>{1, 0}, 0.9);
    EXPECT_DOUBLE_EQ(half.m, 0.5);
    EXPECT_FALSE(half.resonant);
}

TEST(TemplateMatch, ZeroInputIsUnconstrained) {
    const auto r = template_match(std::vector<double>{0, 0}, std::vector<double>{0, 1}, 1.0);
    EXPECT_DOUBLE_EQ(r.m, 1.0);
    EXPECT_TRUE(r.resonant);
}

TEST(TemplateMatch, DimensionMismatch) {
    EXPECT_THROW(template_match(std::vector<double>{1}, std::vector<double>{1, 1}, 0.5), ContractViolation);
}

TEST(TemplateLearn, Examples) {
    const std::vector<double> w{0.4, 0.9};
    EXPECT_EQ(template_learn(w, std::vector<double>{0.1, 0.1}, 0.0), w);
    EXPECT_EQ(template_learn(std::vector<double>{1, 1}, std::vector<double>{1, 0}, 1.0), (WeightVector{1, 0}));
    EXPECT_EQ(template_learn(std::vector<double>{1.0}, std::vector<double>{0.0}, 0.5), (WeightVector{0.5}));
    EXPECT_THROW(template_learn(std::vector<double>{1.0}, std::vector<double>{0.0, 1.0}, 0.5), ContractViolation);
}

TEST(Readout, CopiesWeights) {
    CategoryNode node{{{1, 0, 1}}, true};
    auto out = readout(node, 0);
    EXPECT_EQ(out, (ActivityVector{1, 0, 1}));
    out[0] = 0.0;
    EXPECT_EQ(node.weights[0], (WeightVector{1, 0, 1}));
    EXPECT_THROW(readout(node, 1), ContractViolation);
}

TEST(Readout, UncommittedIsAllOnes) {
    const std::size_t dims[] = {3};
    const auto node = CategoryNode::uncommitted(dims);
    EXPECT_FALSE(node.committed);
    EXPECT_EQ(readout(node, 0), (ActivityVector{1, 1, 1}));
}

TEST(Readout, AfterFastLearning) {
    const std::size_t dims[] = {3};
    auto node = CategoryNode::uncommitted(dims);
    node.weights[0] = template_learn(node.weights[0], std::vector<double>{0, 1, 1}, 1.0);
    EXPECT_EQ(readout(node, 0), (ActivityVector{0, 1, 1}));
}

TEST(ChannelParams, BoundsEnforced) {
    EXPECT_THROW(ChannelParams(-0.1, 0.5, 0.5, 0.5), ValidationError);
    EXPECT_THROW(ChannelParams(0.0, 1.5, 0.5, 0.5), ValidationError);
    EXPECT_THROW(ChannelParams(0.0, 0.5, -0.5, 0.5), ValidationError);
    EXPECT_THROW(ChannelParams(0.0, 0.5, 0.5, 2.0), ValidationError);
    ChannelParams p;
    EXPECT_DOUBLE_EQ(p.alpha(), kDefaultAlpha);
    EXPECT_THROW(p.set_rho(1.01), ValidationError);
    EXPECT_DOUBLE_EQ(p.rho(), 1.0);
}

// --- properties ------------------------------------------------------------

TEST(FusionArtProperty, MonotoneErosion) {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < kCases; ++i) {
        const auto n = 1 + g() % 12;
        const auto w = random_unit(g, n);
        const auto x = random_unit(g, n);
        const auto w2 = template_learn(w, x, u(g));
        for (std::size_t j = 0; j < n; ++j) ASSERT_LE(w2[j], w[j]);
    }
}

TEST(FusionArtProperty, ChoiceBound) {
    std::mt19937_64 g(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < kCases; ++i) {
        const auto channels = 1 + g() % 3;
        CategoryNode node;
        std::vector<ActivityVector> x;
        std::vector<ChannelParams> p;
        double gamma_sum = 0.0;
        for (std::size_t k = 0; k < channels; ++k) {
            const auto n = 1 + g() % 8;
            node.weights.push_back(random_unit(g, n));
            x.push_back(random_unit(g, n));
            p.push_back(params(u(g) * 0.1, u(g)));
            gamma_sum += p.back().gamma();
        }
        const double t = choice_activation(x, node, p);
        ASSERT_GE(t, 0.0);
        ASSERT_LE(t, gamma_sum + 1e-12);
    }
}

TEST(FusionArtProperty, MatchBoundAndContainment) {
    std::mt19937_64 g(13);
    for (int i = 0; i < kCases; ++i) {
        const auto n = 1 + g() % 10;
        const auto x = random_unit(g, n);
        auto w = random_unit(g, n);
        const auto r = template_match(x, w, 0.5);
        ASSERT_GE(r.m, 0.0);
        ASSERT_LE(r.m, 1.0);
        for (std::size_t j = 0; j < n; ++j) w[j] = std::max(w[j], x[j]);
        ASSERT_DOUBLE_EQ(template_match(x, w, 1.0).m, 1.0);
    }
}

TEST(FusionArtProperty, FastLearningIdempotent) {
    std::mt19937_64 g(14);
    for (int i = 0; i < kCases; ++i) {
        const auto n = 1 + g() % 10;
        const auto w = random_unit(g, n);
        const auto x = random_unit(g, n);
        const auto once = template_learn(w, x, 1.0);
        ASSERT_EQ(template_learn(once, x, 1.0), once);
    }
}

TEST(FusionArtProperty, PerfectVigilanceExactness) {
    std::mt19937_64 g(15);
    for (int i = 0; i < kCases; ++i) {
        const auto n = 1 + g() % 6;
        const auto x = random_grid(g, n);
        const auto w = random_grid(g, n);
        bool contained = true;
        for (std::size_t j = 0; j < n; ++j) contained = contained && x[j] <= w[j];
        ASSERT_EQ(template_match(x, w, 1.0).resonant, contained);
    }
}

TEST(FusionArtProperty, SparseChoiceMatchesDense) {
    std::mt19937_64 g(16);
    for (int i = 0; i < kCases; ++i) {
        const auto n = 1 + g() % 20;
        const auto x = random_unit(g, n);
        std::vector<std::uint32_t> support;
        std::vector<double> dense(n, 0.0);
        for (std::uint32_t j = 0; j < n; ++j) {
            if (g() % 2) {
                support.push_back(j);
                dense[j] = 1.0;
            }
        }
        ASSERT_NEAR(sparse_choice_term(x, support, kDefaultAlpha), choice_term(x, dense, kDefaultAlpha), 1e-12);
    }
}

// --- generic resonance cycle --------------------------------------------------

TEST(FusionField, RecruitsAndReusesNodes) {
    FusionField field({2, 1}, {ChannelParams{kDefaultAlpha, 1.0, 1.0, 1.0}, ChannelParams{kDefaultAlpha, 1.0, 1.0, 1.0}});
    const std::vector<ActivityVector> a{{1.0, 0.0}, {1.0}};
    const std::vector<ActivityVector> b{{0.0, 1.0}, {1.0}};
    EXPECT_EQ(field.learn(a), 0u);
    EXPECT_EQ(field.learn(b), 1u);
    EXPECT_EQ(field.learn(a), 0u);
    EXPECT_EQ(field.size(), 2u);
    EXPECT_TRUE(field.nodes()[0].committed);
    EXPECT_EQ(field.nodes()[1].weights[0], (WeightVector{0.0, 1.0}));
}

TEST(FusionField, LowVigilanceGeneralizes) {
    FusionField field({2}, {ChannelParams{kDefaultAlpha, 1.0, 1.0, 0.4}});
    EXPECT_EQ(field.learn(std::vector<ActivityVector>{{1.0, 1.0}}), 0u);
    EXPECT_EQ(field.learn(std::vector<ActivityVector>{{1.0, 0.0}}), 0u);
    EXPECT_EQ(field.nodes()[0].weights[0], (WeightVector{1.0, 0.0}));
}

TEST(FusionField, RejectsOutOfRangeActivity) {
    FusionField field({1}, {ChannelParams{}});
    EXPECT_THROW(field.learn(std::vector<ActivityVector>{{1.5}}), ValidationError);
    EXPECT_THROW(field.learn(std::vector<ActivityVector>{{0.5, 0.5}}), ContractViolation);
}
