#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "archive.hpp"
#include "domains/domain.hpp"
#include "errors.hpp"
#include "lineage.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace mapelites {

struct EngineConfig {
    std::size_t initial_batch = 1000;
    std::size_t batch_size = 100;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    std::size_t total_evaluations() const noexcept { return initial_batch + iterations * batch_size; }

    void validate() const
    {
        if (initial_batch < 1)
            throw ConfigError("initial batch", "must be >= 1");
        if (batch_size < 1)
            throw ConfigError("batch size", "must be >= 1");
        if (threads < 1)
            throw ConfigError("threads", "must be >= 1");
    }
};

struct BatchRecord {
    std::int64_t iteration = 0; // 0 is the initial random batch
    std::size_t evaluations = 0; // cumulative
    std::size_t filled = 0;
    std::optional<double> best_fitness;
    std::size_t clamped = 0; // in this batch
    std::size_t invalid = 0; // in this batch
    std::size_t inserted = 0; // in this batch
    Resolution resolution;
};

struct ResolutionChange {
    std::int64_t iteration = 0;
    Resolution from;
    Resolution to;
    std::size_t elites_before = 0;
    std::size_t elites_after = 0;
};

struct RunLog {
    std::vector<BatchRecord> batches;
    std::vector<LineageRecord> lineage;
    std::vector<ResolutionChange> resolution_changes;
    std::size_t evaluations = 0;
    std::size_t invalid = 0;
    std::size_t clamped = 0;
};

template <class Genome>
struct RunResult {
    Archive<Genome> archive;
    RunLog log;
};

/// Batched, hierarchical MAP-Elites.
///
/// One iteration generates `batch_size` children from parents drawn uniformly
/// from the archive as it stood at the start of the batch, evaluates them
/// (possibly in parallel), then inserts them in slot order. Slot s of
/// iteration i draws only from substream(seed, i, s), so results do not
/// depend on the thread count. Scheduled resolution changes fire once their
/// iteration count of batches has completed.
template <Domain D>
class MapElites {
public:
    using Genome = typename D::Genome;

    MapElites(const D& domain, FeatureSpace space, EngineConfig config)
        : domain_(domain), archive_(std::move(space)), config_(config)
    {
        config_.validate();
        if (archive_.space().dims() != domain_.descriptor_dims())
            throw ConfigError("bounds", "feature space has " + std::to_string(archive_.space().dims()) +
                                            " dimensions but the domain produces " +
                                            std::to_string(domain_.descriptor_dims()));
    }

    const Archive<Genome>& archive() const noexcept { return archive_; }
    const RunLog& log() const noexcept { return log_; }
    const EngineConfig& config() const noexcept { return config_; }
    std::size_t completed_iterations() const noexcept { return completed_; }
    bool initialized() const noexcept { return initialized_; }
    bool finished() const noexcept { return initialized_ && completed_ >= config_.iterations; }

    RunResult<Genome> result() const& { return {archive_, log_}; }
    RunResult<Genome> result() && { return {std::move(archive_), std::move(log_)}; }

    /// Evaluates the initial batch of random genomes.
    void initialize()
    {
        if (initialized_)
            throw std::logic_error("MapElites::initialize called twice");
        std::vector<Candidate> batch(config_.initial_batch);
        for (std::size_t slot = 0; slot < batch.size(); ++slot) {
            Rng rng = substream(config_.seed, 0, slot);
            batch[slot].genome = domain_.random_genome(rng);
        }
        process(batch, 0);
        initialized_ = true;
    }

    /// True when a scheduled resolution change is due now.
    bool resolution_change_due() const
    {
        const auto& schedule = archive_.space().schedule();
        return next_step_ < schedule.size() &&
               schedule[next_step_].iteration <= static_cast<std::int64_t>(completed_);
    }

    /// Applies every scheduled change whose threshold has been reached.
    /// Returns whether anything changed.
    bool apply_resolution_schedule()
    {
        bool changed = false;
        while (resolution_change_due()) {
            const ResolutionStep step = archive_.space().schedule()[next_step_++];
            ResolutionChange change;
            change.iteration = static_cast<std::int64_t>(completed_);
            change.from = archive_.space().resolution();
            change.to = step.resolution;
            change.elites_before = archive_.filled_count();
            archive_.subdivide(step.resolution);
            change.elites_after = archive_.filled_count();
            log_.resolution_changes.push_back(std::move(change));
            changed = true;
        }
        return changed;
    }

    void step_batch()
    {
        if (!initialized_)
            throw std::logic_error("MapElites::step_batch before initialize");
        const std::size_t iteration = completed_ + 1;
        std::vector<Candidate> batch(config_.batch_size);
        // Parents all come from the archive state at batch start.
        for (std::size_t slot = 0; slot < batch.size(); ++slot) {
            Rng rng = substream(config_.seed, iteration, slot);
            auto& c = batch[slot];
            if (archive_.empty()) {
                c.genome = domain_.random_genome(rng);
                continue;
            }
            const auto& parent = archive_.random_elite(rng);
            c.genome = domain_.mutate(parent.genome, rng);
            c.parent_id = parent.id;
            c.parent_descriptor = parent.descriptor;
            c.parent_fitness = parent.fitness;
            c.parent_cell = archive_.space().bin(parent.descriptor).cell;
        }
        process(batch, static_cast<std::int64_t>(iteration));
        ++completed_;
    }

    /// Runs initialization (if needed) and the remaining iterations.
    void run()
    {
        if (!initialized_)
            initialize();
        while (completed_ < config_.iterations) {
            apply_resolution_schedule();
            step_batch();
        }
        apply_resolution_schedule();
    }

private:
    struct Candidate {
        Genome genome{};
        std::optional<std::uint64_t> parent_id;
        std::optional<std::vector<double>> parent_descriptor;
        std::optional<double> parent_fitness;
        std::optional<CellIndex> parent_cell;
    };

    void process(std::vector<Candidate>& batch, std::int64_t iteration)
    {
        std::vector<Genome> genomes;
        genomes.reserve(batch.size());
        for (const auto& c : batch)
            genomes.push_back(c.genome);
        auto evaluations = evaluate_batch(domain_, std::span<const Genome>(genomes), config_.threads);

        BatchRecord record;
        record.iteration = iteration;
        for (std::size_t slot = 0; slot < batch.size(); ++slot) {
            auto& c = batch[slot];
            const std::uint64_t id = next_id_++;
            ++log_.evaluations;
            if (!evaluations[slot]) {
                ++record.invalid;
                continue;
            }
            Elite<Genome> elite;
            elite.genome = std::move(c.genome);
            elite.fitness = evaluations[slot]->fitness;
            elite.descriptor = std::move(evaluations[slot]->descriptor);
            elite.birth_iteration = iteration;
            elite.parent_cell = std::move(c.parent_cell);
            elite.parent_descriptor = c.parent_descriptor;
            elite.id = id;
            elite.parent_id = c.parent_id;
            LineageRecord lineage{id, c.parent_id, iteration, elite.descriptor, elite.fitness,
                                  std::move(c.parent_descriptor), c.parent_fitness};
            InsertResult r;
            try {
                r = archive_.try_insert(std::move(elite));
            } catch (const EvaluationInvalid&) {
                ++record.invalid;
                continue;
            }
            record.clamped += r.clamped;
            if (r.stored()) {
                ++record.inserted;
                log_.lineage.push_back(std::move(lineage));
            }
        }
        record.evaluations = log_.evaluations;
        record.filled = archive_.filled_count();
        record.best_fitness = archive_.best_fitness();
        record.resolution = archive_.space().resolution();
        log_.invalid += record.invalid;
        log_.clamped += record.clamped;
        log_.batches.push_back(std::move(record));
    }

    const D& domain_;
    Archive<Genome> archive_;
    EngineConfig config_;
    RunLog log_;
    std::size_t completed_ = 0;
    std::size_t next_step_ = 0;
    std::uint64_t next_id_ = 0;
    bool initialized_ = false;
};

template <Domain D>
RunResult<typename D::Genome> run_map_elites(const D& domain, FeatureSpace space, const EngineConfig& config)
{
    MapElites<D> engine(domain, std::move(space), config);
    engine.run();
    return std::move(engine).result();
}

} // namespace mapelites
