#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <mapelites/domains/retina.hpp>

#include "oracles.hpp"

using namespace mapelites;

namespace {

// Forward pass written independently: nested layer arrays instead of the
// flat connection list. Connection order is layer pair, destination, source.
double oracle_fitness(const RetinaDomain& d, const RetinaGenome& g)
{
    const auto& layers = g.layers;
    const auto objects = d.params().objects;
    auto is_left = [&](unsigned p) {
        return std::find(objects.left.begin(), objects.left.end(), p) != objects.left.end();
    };
    auto is_right = [&](unsigned p) {
        return std::find(objects.right.begin(), objects.right.end(), p) != objects.right.end();
    };
    int correct = 0;
    for (unsigned pattern = 0; pattern < 256; ++pattern) {
        std::vector<double> act(8);
        for (int i = 0; i < 8; ++i)
            act[static_cast<std::size_t>(i)] = ((pattern >> (7 - i)) & 1u) ? 1.0 : -1.0;
        std::size_t conn = 0, bias = 0;
        double output = 0.0;
        for (std::size_t l = 1; l < layers.size(); ++l) {
            std::vector<double> next(layers[l]);
            for (std::size_t j = 0; j < layers[l]; ++j) {
                double s = g.biases[bias++];
                for (std::size_t i = 0; i < layers[l - 1]; ++i, ++conn)
                    s += g.present[conn] ? g.weights[conn] * act[i] : 0.0;
                next[j] = l + 1 == layers.size() ? s : std::tanh(s);
            }
            if (l + 1 == layers.size())
                output = next[0];
            act = std::move(next);
        }
        const bool target = is_left(pattern >> 4) && is_right(pattern & 0xF);
        correct += (output >= 0.0) == target;
    }
    return correct / 256.0;
}

// Target-true patterns, counted by enumerating pattern halves.
double oracle_positive_fraction(const ObjectSets& s)
{
    int n = 0;
    for (unsigned l = 0; l < 16; ++l)
        for (unsigned r = 0; r < 16; ++r)
            n += std::count(s.left.begin(), s.left.end(), l) && std::count(s.right.begin(), s.right.end(), r);
    return n / 256.0;
}

} // namespace

TEST(Retina, TopologyAndCoordinates)
{
    const RetinaDomain d;
    EXPECT_EQ(d.connection_count(), 8u * 4 + 4 * 2 + 2 * 1);
    EXPECT_EQ(d.bias_count(), 7u);
    ASSERT_EQ(d.nodes().size(), 15u);
    EXPECT_DOUBLE_EQ(d.nodes()[0].x, -3.5);
    EXPECT_DOUBLE_EQ(d.nodes()[7].x, 3.5);
    EXPECT_DOUBLE_EQ(d.nodes()[8].x, -1.5);
    EXPECT_DOUBLE_EQ(d.nodes()[8].y, 1.0);
    EXPECT_DOUBLE_EQ(d.nodes()[14].x, 0.0);
    EXPECT_DOUBLE_EQ(d.nodes()[14].y, 3.0);
}

TEST(Retina, ZeroGenomeAnswersTrueEverywhere)
{
    // With no connections and zero bias, the output is 0 >= 0, i.e. "true",
    // so fitness is the fraction of target-true patterns.
    const RetinaDomain d;
    const auto g = d.zero_genome();
    EXPECT_DOUBLE_EQ(d.fitness(g), oracle_positive_fraction(d.params().objects));
    EXPECT_DOUBLE_EQ(d.fitness(g), 0.25);
    const auto e = d.evaluate(g);
    EXPECT_EQ(e.descriptor, (std::vector<double>{0.0, 0.0}));
}

TEST(Retina, ConnectionCostExamples)
{
    const RetinaDomain d;
    auto g = d.zero_genome();
    // Layer-0 node 2 sits at x = -1.5, layer-1 node 0 at x = -1.5: vertical, length 1.
    std::size_t idx = 0;
    for (std::size_t c = 0; c < d.connections().size(); ++c)
        if (d.connections()[c].from == 2 && d.connections()[c].to == 8)
            idx = c;
    g.present[idx] = 1;
    EXPECT_DOUBLE_EQ(d.connection_cost(g), 1.0);

    // Squared lengths of a full network summed by hand over the layer geometry.
    double full = 0.0;
    const std::vector<std::size_t> layers{8, 4, 2, 1};
    for (std::size_t l = 0; l + 1 < layers.size(); ++l)
        for (std::size_t i = 0; i < layers[l]; ++i)
            for (std::size_t j = 0; j < layers[l + 1]; ++j) {
                const double dx = (i - (layers[l] - 1) / 2.0) - (j - (layers[l + 1] - 1) / 2.0);
                full += dx * dx + 1.0;
            }
    EXPECT_DOUBLE_EQ(d.max_connection_cost(), full);
    std::fill(g.present.begin(), g.present.end(), 1);
    EXPECT_DOUBLE_EQ(d.normalized_connection_cost(g), 1.0);
}

TEST(Retina, FitnessMatchesIndependentForwardPass)
{
    const RetinaDomain d;
    Rng rng(17);
    for (int i = 0; i < 300; ++i) {
        const auto g = d.random_genome(rng);
        const double f = d.fitness(g);
        EXPECT_DOUBLE_EQ(f, oracle_fitness(d, g));
        EXPECT_DOUBLE_EQ(f * 256.0, std::round(f * 256.0));
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
}

TEST(Retina, EvaluateIsPureAndDescriptorInBounds)
{
    const RetinaDomain d;
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const auto g = d.random_genome(rng);
        const auto a = d.evaluate(g), b = d.evaluate(g);
        EXPECT_EQ(a, b);
        ASSERT_EQ(a.descriptor.size(), 2u);
        for (double v : a.descriptor) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Retina, MutationKeepsRangesAndAlwaysChanges)
{
    RetinaParams p;
    const RetinaDomain d(p);
    Rng rng(4);
    auto g = d.random_genome(rng);
    for (int i = 0; i < 100000; ++i) {
        auto child = d.mutate(g, rng);
        ASSERT_NE(child, g);
        g = std::move(child);
    }
    for (double w : g.weights) {
        EXPECT_GE(w, -p.weight_range);
        EXPECT_LE(w, p.weight_range);
    }
    for (double b : g.biases) {
        EXPECT_GE(b, -p.bias_range);
        EXPECT_LE(b, p.bias_range);
    }

    RetinaParams frozen;
    frozen.toggle_rate = frozen.weight_rate = frozen.bias_rate = 0.0;
    const RetinaDomain still(frozen);
    for (int i = 0; i < 1000; ++i) {
        const auto child = still.mutate(g, rng);
        ASSERT_NE(child, g);
        std::size_t changed = 0;
        for (std::size_t c = 0; c < g.present.size(); ++c)
            changed += (child.present[c] != g.present[c]) + (child.weights[c] != g.weights[c]);
        for (std::size_t b = 0; b < g.biases.size(); ++b)
            changed += child.biases[b] != g.biases[b];
        EXPECT_EQ(changed, 1u);
    }
}

TEST(Retina, RandomGenomeDensity)
{
    RetinaParams fixed;
    fixed.connection_probability = 0.3;
    const RetinaDomain d(fixed);
    Rng rng(8);
    double on = 0.0, total = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const auto g = d.random_genome(rng);
        on += std::count(g.present.begin(), g.present.end(), 1);
        total += static_cast<double>(g.present.size());
    }
    EXPECT_NEAR(on / total, 0.3, 0.01);

    // Without a fixed rate each genome has its own density, so densities spread out.
    const RetinaDomain spread;
    int sparse = 0, dense = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto g = spread.random_genome(rng);
        const double rate = std::count(g.present.begin(), g.present.end(), 1) / 42.0;
        sparse += rate < 0.2;
        dense += rate > 0.8;
    }
    EXPECT_GT(sparse, 200);
    EXPECT_GT(dense, 200);

    RetinaParams bad;
    bad.connection_probability = 1.5;
    EXPECT_THROW(RetinaDomain{bad}, ConfigError);
}

TEST(Retina, EncodeDecodeRoundTrip)
{
    const RetinaDomain d;
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
        const auto g = d.random_genome(rng);
        const auto text = d.encode(g);
        EXPECT_EQ(d.decode(text), g);
        EXPECT_EQ(d.encode(d.decode(text)), text);
    }
    EXPECT_THROW(d.decode("8-4-2-1||"), FormatError);
    EXPECT_THROW(d.decode("8-4-1|1:0|0"), FormatError);
    EXPECT_THROW(d.decode("garbage"), FormatError);
}

TEST(Retina, ObjectSetsParse)
{
    std::istringstream in("# objects\n[left]\n0111\n1011\n\n[right]\n1110 # mirrored\n");
    const auto s = ObjectSets::parse(in);
    EXPECT_EQ(s.left, (std::vector<std::uint8_t>{0b0111, 0b1011}));
    EXPECT_EQ(s.right, (std::vector<std::uint8_t>{0b1110}));
    std::istringstream round(s.to_text());
    const auto again = ObjectSets::parse(round);
    EXPECT_EQ(again.left, s.left);
    EXPECT_EQ(again.right, s.right);

    std::istringstream no_header("0111\n");
    EXPECT_THROW(ObjectSets::parse(no_header), ConfigError);
    std::istringstream bad_pixel("[left]\n01a1\n[right]\n0001\n");
    EXPECT_THROW(ObjectSets::parse(bad_pixel), ConfigError);
    std::istringstream one_side("[left]\n0111\n");
    EXPECT_THROW(ObjectSets::parse(one_side), ConfigError);
}

TEST(Retina, CustomObjectsChangeTheTarget)
{
    RetinaParams p;
    p.objects.left = {0b1111};
    p.objects.right = {0b1111};
    const RetinaDomain d(p);
    // Only the all-on pattern is a target, so "always false" scores 255/256.
    auto g = d.zero_genome();
    g.biases.back() = -1.0;
    EXPECT_DOUBLE_EQ(d.fitness(g), 255.0 / 256.0);
    EXPECT_DOUBLE_EQ(d.fitness(g), oracle_fitness(d, g));
}

TEST(Modularity, TwoDisjointTwoCycles)
{
    const Digraph g{4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}}};
    EXPECT_NEAR(oracle::exhaustive_q(4, g.edges), 0.5, 1e-12);
    const auto p = greedy_modularity(g);
    EXPECT_NEAR(p.q, 0.5, 1e-12);
    EXPECT_EQ(p.community[0], p.community[1]);
    EXPECT_EQ(p.community[2], p.community[3]);
    EXPECT_NE(p.community[0], p.community[2]);
}

TEST(Modularity, SingleEdgeAndEdgeless)
{
    const Digraph edge{2, {{0, 1}}};
    EXPECT_NEAR(greedy_modularity(edge).q, 0.0, 1e-12);
    EXPECT_NEAR(oracle::exhaustive_q(2, edge.edges), 0.0, 1e-12);
    const Digraph none{5, {}};
    EXPECT_EQ(greedy_modularity(none).q, 0.0);
}

TEST(Modularity, FixedPartitionMatchesPairwiseDefinition)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> label(0, 2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 7;
        std::uniform_int_distribution<std::size_t> node(0, n - 1);
        Digraph g{n, {}};
        for (std::size_t e = 0; e < 2 * n; ++e)
            g.edges.emplace_back(node(rng), node(rng));
        std::vector<std::size_t> comm(n);
        for (auto& c : comm)
            c = label(rng);
        EXPECT_NEAR(modularity(g, comm), oracle::directed_q(n, g.edges, comm), 1e-12);
    }
}

TEST(Modularity, GreedyNeverExceedsExhaustive)
{
    EXPECT_EQ(oracle::bell(8), 4140u);
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 8);
        const double density = u(rng);
        Digraph g{n, {}};
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b && u(rng) < density)
                    g.edges.emplace_back(a, b);
        const auto greedy = greedy_modularity(g);
        const double best = oracle::exhaustive_q(n, g.edges);
        EXPECT_LE(greedy.q, best + 1e-12);
        EXPECT_NEAR(greedy.q, oracle::directed_q(n, g.edges, greedy.community), 1e-12);
    }
}

TEST(Modularity, RetinaModularityIsGreedyQClamped)
{
    const RetinaDomain d;
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto g = d.random_genome(rng);
        const auto graph = d.graph(g);
        const auto p = greedy_modularity(graph);
        EXPECT_DOUBLE_EQ(d.evaluate(g).descriptor[1], std::clamp(p.q, 0.0, 1.0));
    }
}
