#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include <mapelites/archive.hpp>

using namespace mapelites;

namespace {

FeatureSpace unit_space(std::size_t dims, std::size_t res)
{
    return FeatureSpace(std::vector<Interval>(dims, {0.0, 1.0}), Resolution(dims, res));
}

Elite<int> elite(double fitness, std::vector<double> descriptor, std::uint64_t id = 0)
{
    Elite<int> e;
    e.genome = static_cast<int>(id);
    e.fitness = fitness;
    e.descriptor = std::move(descriptor);
    e.id = id;
    return e;
}

// Floor-based bin for one coordinate, written directly from the definition.
std::size_t oracle_bin(double v, double lo, double hi, std::size_t res)
{
    if (v <= lo)
        return 0;
    if (v >= hi)
        return res - 1;
    const auto b = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(res)));
    return std::min(b, res - 1);
}

} // namespace

TEST(FeatureSpace, BinsWorkedExamples)
{
    const FeatureSpace s({{0.0, 1.0}}, {4});
    auto at = [&](double v) { return s.bin(std::vector<double>{v}); };
    EXPECT_EQ(at(0.0).cell.coords[0], 0u);
    EXPECT_FALSE(at(0.0).clamped);
    EXPECT_EQ(at(0.25).cell.coords[0], 1u);
    EXPECT_EQ(at(1.0).cell.coords[0], 3u);
    EXPECT_FALSE(at(1.0).clamped);
    EXPECT_EQ(at(-0.1).cell.coords[0], 0u);
    EXPECT_TRUE(at(-0.1).clamped);
    EXPECT_EQ(at(1.5).cell.coords[0], 3u);
    EXPECT_TRUE(at(1.5).clamped);
}

TEST(FeatureSpace, BinsMatchFloorOracle)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const FeatureSpace s({{-3.0, 3.0}, {0.5, 2.5}}, {64, 7});
    for (int i = 0; i < 20000; ++i) {
        const std::vector<double> v{u(rng), u(rng)};
        const auto r = s.bin(v);
        EXPECT_EQ(r.cell.coords[0], oracle_bin(v[0], -3.0, 3.0, 64));
        EXPECT_EQ(r.cell.coords[1], oracle_bin(v[1], 0.5, 2.5, 7));
        const bool outside = v[0] < -3.0 || v[0] > 3.0 || v[1] < 0.5 || v[1] > 2.5;
        EXPECT_EQ(r.clamped, outside);
    }
}

TEST(FeatureSpace, RejectsNonFiniteAndWrongArity)
{
    const auto s = unit_space(2, 4);
    EXPECT_THROW(s.bin(std::vector<double>{0.5}), EvaluationInvalid);
    EXPECT_THROW(s.bin(std::vector<double>{0.5, NAN}), EvaluationInvalid);
    EXPECT_THROW(s.bin(std::vector<double>{INFINITY, 0.5}), EvaluationInvalid);
}

TEST(FeatureSpace, FlatIsRowMajorWithFirstDimensionSlowest)
{
    const FeatureSpace s({{0, 1}, {0, 1}}, {4, 5});
    EXPECT_EQ(s.flat({{1, 0}}), 5u);
    EXPECT_EQ(s.flat({{0, 1}}), 1u);
    EXPECT_EQ(s.flat({{3, 4}}), 19u);
    std::size_t expected = 0;
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 5; ++b, ++expected) {
            EXPECT_EQ(s.flat({{a, b}}), expected);
            EXPECT_EQ(s.unflat(expected), (CellIndex{{a, b}}));
        }
}

TEST(FeatureSpace, RejectsBadScheduleNamingTheEntry)
{
    try {
        FeatureSpace s({{0, 1}, {0, 1}}, {16, 16}, {{10, {32, 32}}, {20, {48, 48}}});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "resolution change program[1]");
    }
    EXPECT_THROW(FeatureSpace({{0, 1}}, {4}, {{10, {8}}, {5, {16}}}), ConfigError);
    EXPECT_THROW(FeatureSpace({{1, 1}}, {4}), ConfigError);
    EXPECT_THROW(FeatureSpace({{0, 1}}, {0}), ConfigError);
    EXPECT_NO_THROW(FeatureSpace({{0, 1}, {0, 1}}, {4, 2}, {{0, {8, 6}}}));
}

TEST(Archive, InsertOutcomes)
{
    Archive<int> a(unit_space(1, 4));
    auto r = a.try_insert(elite(0.5, {0.1}, 1));
    EXPECT_EQ(r.outcome, InsertOutcome::InsertedEmpty);
    r = a.try_insert(elite(0.5, {0.2}, 2));
    EXPECT_EQ(r.outcome, InsertOutcome::RejectedWorseOrTied);
    EXPECT_EQ(a.at({{0}})->id, 1u);
    r = a.try_insert(elite(0.4, {0.2}, 3));
    EXPECT_EQ(r.outcome, InsertOutcome::RejectedWorseOrTied);
    r = a.try_insert(elite(0.6, {0.2}, 4));
    EXPECT_EQ(r.outcome, InsertOutcome::ReplacedIncumbent);
    EXPECT_EQ(a.at({{0}})->id, 4u);
    EXPECT_EQ(a.filled_count(), 1u);
    r = a.try_insert(elite(-3.0, {7.0}, 5));
    EXPECT_EQ(r.outcome, InsertOutcome::InsertedEmpty);
    EXPECT_TRUE(r.clamped);
    EXPECT_EQ(r.cell, (CellIndex{{3}}));
    EXPECT_EQ(a.best_fitness(), 0.6);
}

TEST(Archive, RejectsNonFiniteFitness)
{
    Archive<int> a(unit_space(1, 4));
    EXPECT_THROW(a.try_insert(elite(NAN, {0.1})), EvaluationInvalid);
    EXPECT_THROW(a.try_insert(elite(INFINITY, {0.1})), EvaluationInvalid);
    EXPECT_TRUE(a.empty());
}

TEST(Archive, RandomEliteOnEmptyThrows)
{
    Archive<int> a(unit_space(2, 3));
    Rng rng(1);
    EXPECT_THROW(a.random_elite(rng), EmptyArchiveError);
}

TEST(Archive, RandomEliteIsUniformOverOccupiedCells)
{
    Archive<int> two(unit_space(1, 8));
    two.try_insert(elite(1.0, {0.05}, 1));
    two.try_insert(elite(1.0, {0.95}, 2));
    Rng rng(3);
    const int draws = 100000;
    int first = 0;
    for (int i = 0; i < draws; ++i)
        first += two.random_elite(rng).id == 1;
    EXPECT_NEAR(first / static_cast<double>(draws), 0.5, 0.015);

    // Chi-square over 10 occupied cells; 9 dof, 0.999 quantile is 27.88.
    Archive<int> ten(unit_space(1, 40));
    for (std::uint64_t i = 0; i < 10; ++i)
        ten.try_insert(elite(1.0, {(4.0 * static_cast<double>(i) + 0.5) / 40.0}, i));
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < draws; ++i)
        ++counts[ten.random_elite(rng).id];
    const double expected = draws / 10.0;
    double chi2 = 0.0;
    for (const auto& [id, c] : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_EQ(counts.size(), 10u);
    EXPECT_LT(chi2, 27.88);
}

TEST(Archive, SubdividePreservesElitesAndPlacesThemByDescriptor)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> n_pick(0, 60);
    for (int trial = 0; trial < 1000; ++trial) {
        const Resolution coarse{1 + static_cast<std::size_t>(trial % 4), 2 + static_cast<std::size_t>(trial % 3)};
        const Resolution fine{coarse[0] * (1 + trial % 3), coarse[1] * (2 + trial % 2)};
        Archive<int> a(FeatureSpace({{0, 1}, {0, 1}}, coarse));
        const int n = n_pick(rng);
        for (int i = 0; i < n; ++i)
            a.try_insert(elite(u(rng), {u(rng), u(rng)}, static_cast<std::uint64_t>(i)));
        std::vector<Elite<int>> before;
        for (const auto& c : a.cells())
            if (c)
                before.push_back(*c);
        Archive<int> b = subdivide(a, fine);
        ASSERT_EQ(b.filled_count(), a.filled_count());
        ASSERT_EQ(b.space().resolution(), fine);
        const FeatureSpace fine_space({{0, 1}, {0, 1}}, fine);
        for (const auto& e : before) {
            const auto cell = fine_space.bin(e.descriptor).cell;
            const auto* moved = b.at(cell);
            ASSERT_NE(moved, nullptr);
            EXPECT_EQ(*moved, e);
        }
    }
}

TEST(Archive, SubdivideRejectsNonMultiple)
{
    Archive<int> a(unit_space(2, 4));
    EXPECT_THROW(a.subdivide({6, 8}), ConfigError);
    EXPECT_THROW(a.subdivide({8}), ConfigError);
}

TEST(Archive, DenseMapIsLexicographic)
{
    Archive<int> a(FeatureSpace({{0, 1}, {0, 1}}, {2, 3}));
    a.try_insert(elite(0.7, {0.9, 0.1}));
    a.try_insert(elite(0.2, {0.1, 0.9}));
    const DenseMap m = to_dense_map(a);
    EXPECT_EQ(m.shape, (Resolution{2, 3}));
    ASSERT_EQ(m.cells.size(), 6u);
    EXPECT_EQ(m.cells[2], 0.2);
    EXPECT_EQ(m.cells[3], 0.7);
    EXPECT_EQ(m.filled(), 2u);
}
