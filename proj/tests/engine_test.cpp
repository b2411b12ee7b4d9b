#include <gtest/gtest.h>

#include <map>

#include <mapelites/config.hpp>
#include <mapelites/engine.hpp>
#include <mapelites/io.hpp>

using namespace mapelites;

namespace {

FeatureSpace space_for(const auto& domain, Resolution res, std::vector<ResolutionStep> schedule = {})
{
    return FeatureSpace(domain.bounds(), std::move(res), std::move(schedule), domain.labels());
}

EngineConfig engine(std::size_t init, std::size_t batch, std::size_t iterations, std::uint64_t seed,
                    std::size_t threads = 1)
{
    EngineConfig c;
    c.initial_batch = init;
    c.batch_size = batch;
    c.iterations = iterations;
    c.seed = seed;
    c.threads = threads;
    return c;
}

/// Domain whose evaluation throws for some genomes.
struct FlakyDomain : SyntheticDomain {
    Evaluation evaluate(const Genome& g) const
    {
        if (g.values[2] < 0.2)
            throw std::runtime_error("simulated crash");
        if (g.values[2] < 0.3)
            return {std::nan(""), {g.values[0], g.values[1]}};
        return SyntheticDomain::evaluate(g);
    }
};

} // namespace

TEST(Engine, InitialBatchOnly)
{
    const SyntheticDomain d;
    const auto r = run_map_elites(d, space_for(d, {8, 8}), engine(20, 10, 0, 1));
    EXPECT_EQ(r.log.evaluations, 20u);
    EXPECT_LE(r.archive.filled_count(), 20u);
    EXPECT_GE(r.archive.filled_count(), 1u);
    ASSERT_EQ(r.log.batches.size(), 1u);
    EXPECT_EQ(r.log.batches[0].iteration, 0);
    for (const auto& c : r.archive.cells())
        if (c) {
            EXPECT_EQ(c->birth_iteration, 0);
            EXPECT_FALSE(c->parent_id.has_value());
        }
}

TEST(Engine, ConstantDomainFillsMonotonically)
{
    const SyntheticDomain d;
    const auto r = run_map_elites(d, space_for(d, {10, 10}), engine(50, 25, 40, 2));
    EXPECT_EQ(r.log.evaluations, 50u + 25u * 40u);
    EXPECT_EQ(r.log.batches.size(), 41u);
    for (std::size_t i = 1; i < r.log.batches.size(); ++i) {
        EXPECT_GE(r.log.batches[i].filled, r.log.batches[i - 1].filled);
        EXPECT_EQ(r.log.batches[i].evaluations, 50u + 25u * i);
    }
    for (const auto& c : r.archive.cells())
        if (c)
            EXPECT_EQ(c->fitness, 1.0);
    EXPECT_GT(r.archive.filled_count(), 90u);
}

TEST(Engine, BatchMatchesReplayAgainstSnapshot)
{
    SyntheticParams p;
    p.mode = SyntheticMode::Rastrigin;
    const SyntheticDomain d(p);
    const auto cfg = engine(30, 40, 5, 99);
    MapElites<SyntheticDomain> me(d, space_for(d, {6, 6}), cfg);
    me.initialize();
    std::uint64_t next_id = cfg.initial_batch;
    for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
        const Archive<SyntheticGenome> snapshot = me.archive();
        Archive<SyntheticGenome> expected = snapshot;
        for (std::size_t slot = 0; slot < cfg.batch_size; ++slot) {
            Rng rng = substream(cfg.seed, iter, slot);
            const auto& parent = snapshot.random_elite(rng);
            Elite<SyntheticGenome> child;
            child.genome = d.mutate(parent.genome, rng);
            const auto e = d.evaluate(child.genome);
            child.fitness = e.fitness;
            child.descriptor = e.descriptor;
            child.birth_iteration = static_cast<std::int64_t>(iter);
            child.parent_cell = snapshot.space().bin(parent.descriptor).cell;
            child.parent_descriptor = parent.descriptor;
            child.id = next_id++;
            child.parent_id = parent.id;
            expected.try_insert(std::move(child));
        }
        me.step_batch();
        ASSERT_TRUE(me.archive().same_contents(expected)) << "iteration " << iter;
    }
}

TEST(Engine, InitialBatchUsesStreamZero)
{
    const SyntheticDomain d;
    const auto cfg = engine(15, 5, 0, 7);
    MapElites<SyntheticDomain> me(d, space_for(d, {4, 4}), cfg);
    me.initialize();
    Archive<SyntheticGenome> expected(space_for(d, {4, 4}));
    for (std::size_t slot = 0; slot < 15; ++slot) {
        Rng rng = substream(7, 0, slot);
        Elite<SyntheticGenome> e;
        e.genome = d.random_genome(rng);
        const auto ev = d.evaluate(e.genome);
        e.fitness = ev.fitness;
        e.descriptor = ev.descriptor;
        e.id = slot;
        expected.try_insert(std::move(e));
    }
    EXPECT_TRUE(me.archive().same_contents(expected));
}

TEST(Engine, SingleCellKeepsFirstMaximum)
{
    SyntheticParams p;
    p.mode = SyntheticMode::Rastrigin;
    const SyntheticDomain d(p);
    const auto r = run_map_elites(d, space_for(d, {1, 1}), engine(20, 10, 30, 5));
    ASSERT_EQ(r.archive.filled_count(), 1u);
    const auto& elite = *r.archive.cells()[0];
    // Earliest lineage record reaching the best fitness is the stored one.
    double best = -1e300;
    std::uint64_t first = 0;
    for (const auto& rec : r.log.lineage)
        if (rec.fitness > best) {
            best = rec.fitness;
            first = rec.id;
        }
    EXPECT_EQ(elite.fitness, best);
    EXPECT_EQ(elite.id, first);
}

TEST(Engine, CellFitnessNeverDecreases)
{
    SyntheticParams p;
    p.mode = SyntheticMode::Rastrigin;
    const SyntheticDomain d(p);
    MapElites<SyntheticDomain> me(d, space_for(d, {8, 8}), engine(40, 20, 30, 6));
    me.initialize();
    for (int i = 0; i < 30; ++i) {
        const auto before = to_dense_map(me.archive());
        me.step_batch();
        const auto after = to_dense_map(me.archive());
        for (std::size_t c = 0; c < before.cells.size(); ++c)
            if (before.cells[c]) {
                ASSERT_TRUE(after.cells[c].has_value());
                ASSERT_GE(*after.cells[c], *before.cells[c]);
            }
    }
}

TEST(Engine, InvalidEvaluationsAreCountedAndDiscarded)
{
    const FlakyDomain d;
    const auto r = run_map_elites(d, space_for(d, {5, 5}), engine(200, 50, 10, 3));
    EXPECT_EQ(r.log.evaluations, 700u);
    EXPECT_GT(r.log.invalid, 0u);
    std::size_t per_batch = 0;
    for (const auto& b : r.log.batches)
        per_batch += b.invalid;
    EXPECT_EQ(per_batch, r.log.invalid);
    for (const auto& c : r.archive.cells())
        if (c)
            EXPECT_GE(c->genome.values[2], 0.3);
}

TEST(Engine, SerialAndParallelRunsAreByteIdentical)
{
    {
        const RetinaDomain d;
        const auto space = space_for(d, {8, 8}, {{3, {16, 16}}});
        const auto a = run_map_elites(d, space, engine(200, 50, 6, 11, 1));
        const auto b = run_map_elites(d, space, engine(200, 50, 6, 11, 8));
        EXPECT_EQ(io::archive_csv_string(a.archive, d), io::archive_csv_string(b.archive, d));
    }
    {
        const ArmDomain d;
        const auto space = space_for(d, {64});
        const auto a = run_map_elites(d, space, engine(120, 10, 30, 11, 1));
        const auto b = run_map_elites(d, space, engine(120, 10, 30, 11, 8));
        EXPECT_EQ(io::archive_csv_string(a.archive, d), io::archive_csv_string(b.archive, d));
    }
    {
        SyntheticParams p;
        p.mode = SyntheticMode::Rastrigin;
        const SyntheticDomain d(p);
        const auto space = space_for(d, {16, 16});
        const auto a = run_map_elites(d, space, engine(100, 40, 20, 11, 1));
        const auto b = run_map_elites(d, space, engine(100, 40, 20, 11, 8));
        EXPECT_EQ(io::archive_csv_string(a.archive, d), io::archive_csv_string(b.archive, d));
        const auto c = run_map_elites(d, space, engine(100, 40, 20, 12, 1));
        EXPECT_NE(io::archive_csv_string(a.archive, d), io::archive_csv_string(c.archive, d));
    }
}

TEST(Engine, ScheduleFiresAtThresholdsAndPreservesElites)
{
    const RetinaDomain d;
    const auto space = space_for(d, {4, 4}, {{0, {8, 8}}, {3, {16, 16}}, {5, {32, 32}}});
    const auto r = run_map_elites(d, space, engine(300, 60, 5, 4));
    ASSERT_EQ(r.log.resolution_changes.size(), 3u);
    EXPECT_EQ(r.log.resolution_changes[0].iteration, 0);
    EXPECT_EQ(r.log.resolution_changes[1].iteration, 3);
    EXPECT_EQ(r.log.resolution_changes[2].iteration, 5);
    for (const auto& ch : r.log.resolution_changes)
        EXPECT_EQ(ch.elites_before, ch.elites_after);
    EXPECT_EQ(r.archive.space().resolution(), (Resolution{32, 32}));
    // Batches 1..3 ran at 8x8, 4..5 at 16x16.
    EXPECT_EQ(r.log.batches[0].resolution, (Resolution{4, 4}));
    EXPECT_EQ(r.log.batches[1].resolution, (Resolution{8, 8}));
    EXPECT_EQ(r.log.batches[3].resolution, (Resolution{8, 8}));
    EXPECT_EQ(r.log.batches[4].resolution, (Resolution{16, 16}));
}

TEST(Engine, SubdivisionKeepsEveryElite)
{
    const RetinaDomain d;
    const auto space = space_for(d, {4, 4}, {{2, {8, 8}}, {4, {16, 16}}});
    MapElites<RetinaDomain> me(d, space, engine(300, 60, 6, 8));
    me.initialize();
    while (!me.finished()) {
        if (me.resolution_change_due()) {
            std::map<std::uint64_t, double> before;
            for (const auto& c : me.archive().cells())
                if (c)
                    before[c->id] = c->fitness;
            me.apply_resolution_schedule();
            std::map<std::uint64_t, double> after;
            for (const auto& c : me.archive().cells())
                if (c)
                    after[c->id] = c->fitness;
            EXPECT_EQ(before, after);
        }
        me.step_batch();
    }
    EXPECT_EQ(me.log().resolution_changes.size(), 2u);
}

TEST(Engine, LineageIsSound)
{
    SyntheticParams p;
    p.mode = SyntheticMode::Rastrigin;
    const SyntheticDomain d(p);
    const auto r = run_map_elites(d, space_for(d, {8, 8}), engine(50, 20, 25, 13));
    std::map<std::uint64_t, const LineageRecord*> by_id;
    for (const auto& rec : r.log.lineage)
        by_id[rec.id] = &rec;
    for (const auto& c : r.archive.cells()) {
        if (!c)
            continue;
        const auto chain = export_lineage_trace(r.log.lineage, c->id);
        ASSERT_FALSE(chain.empty());
        EXPECT_EQ(chain.front().birth_iteration, 0);
        EXPECT_FALSE(chain.front().parent_id.has_value());
        EXPECT_EQ(chain.back().id, c->id);
        for (std::size_t i = 1; i < chain.size(); ++i) {
            EXPECT_LT(chain[i - 1].birth_iteration, chain[i].birth_iteration);
            EXPECT_EQ(chain[i].parent_id, chain[i - 1].id);
            EXPECT_EQ(chain[i].parent_fitness, chain[i - 1].fitness);
            EXPECT_EQ(chain[i].parent_descriptor, chain[i - 1].descriptor);
        }
    }
    EXPECT_THROW(export_lineage_trace(r.log.lineage, 1u << 30), NotFoundError);
}

TEST(Engine, ArrowExportAccountsForEverySampledElite)
{
    SyntheticParams p;
    p.mode = SyntheticMode::Rastrigin;
    const SyntheticDomain d(p);
    const auto r = run_map_elites(d, space_for(d, {8, 8}), engine(50, 20, 25, 14));
    std::vector<std::uint64_t> ids;
    for (const auto& c : r.archive.cells())
        if (c)
            ids.push_back(c->id);
    const auto all = export_lineage_arrows(r.log.lineage, ids);
    EXPECT_EQ(all.sampled, ids.size());
    EXPECT_EQ(all.arrows.size() + all.omitted, all.sampled);
    const auto some = export_lineage_arrows(r.log.lineage, ids, 10, 3);
    EXPECT_EQ(some.sampled, 10u);
    EXPECT_EQ(some.arrows.size() + some.omitted, 10u);
    const auto again = export_lineage_arrows(r.log.lineage, ids, 10, 3);
    ASSERT_EQ(again.arrows.size(), some.arrows.size());
    for (std::size_t i = 0; i < some.arrows.size(); ++i)
        EXPECT_EQ(again.arrows[i].elite_id, some.arrows[i].elite_id);
}

TEST(Engine, RejectsBadConfiguration)
{
    const SyntheticDomain d;
    EXPECT_THROW(MapElites<SyntheticDomain>(d, space_for(d, {4, 4}), engine(0, 10, 1, 0)), ConfigError);
    EXPECT_THROW(MapElites<SyntheticDomain>(d, space_for(d, {4, 4}), engine(10, 0, 1, 0)), ConfigError);
    EXPECT_THROW(MapElites<SyntheticDomain>(d, FeatureSpace({{0, 1}}, {4}), engine(10, 10, 1, 0)), ConfigError);
}

TEST(Config, PaperScaleRetinaPreset)
{
    const auto c = load_run_config(std::filesystem::path(MAPELITES_CONFIG_DIR) / "retina_paper.json");
    EXPECT_EQ(c.starting_resolution, (Resolution{16, 16}));
    EXPECT_EQ(c.final_resolution(), (Resolution{512, 512}));
    EXPECT_EQ(c.engine.batch_size, 2000u);
    EXPECT_EQ(c.engine.initial_batch, 20000u);
    EXPECT_EQ(c.engine.iterations, 10000u);
    EXPECT_EQ(c.engine.total_evaluations(), 20'020'000u);
    ASSERT_EQ(c.schedule.size(), 4u);
    EXPECT_EQ(c.schedule[1].iteration, 1250);
}
