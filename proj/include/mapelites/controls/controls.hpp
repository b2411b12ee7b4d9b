#pragma once

// Comparison algorithms. Each one spends exactly the configured evaluation
// budget and reports the best evaluated candidate per feature-space cell
// (built from its evaluation log), so its map can be scored like a
// MAP-Elites archive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "../archive.hpp"
#include "../domains/domain.hpp"
#include "../engine.hpp"
#include "../errors.hpp"
#include "../parallel.hpp"
#include "../rng.hpp"
#include "nondominated.hpp"

namespace mapelites {

template <class Genome>
struct EvalLogEntry {
    Genome genome{};
    double fitness = 0.0;
    std::vector<double> descriptor;
    std::size_t index = 0; // evaluation index, dense and increasing

    bool operator==(const EvalLogEntry&) const = default;
};

/// Streaming best-per-cell reduction over evaluated candidates. The first
/// entry wins ties. Entries that cannot be binned are counted and skipped.
template <class Genome>
class EliteCollector {
public:
    explicit EliteCollector(FeatureSpace space) : space_(std::move(space)), best_(space_.cell_count()) {}

    void add(const Genome& genome, double fitness, const std::vector<double>& descriptor, std::size_t index,
             std::int64_t generation = 0)
    {
        if (!std::isfinite(fitness)) {
            ++skipped_;
            return;
        }
        BinResult bin;
        try {
            bin = space_.bin(descriptor);
        } catch (const EvaluationInvalid&) {
            ++skipped_;
            return;
        }
        clamped_ += bin.clamped;
        auto& slot = best_[space_.flat(bin.cell)];
        if (slot && !(slot->fitness < fitness))
            return;
        if (!slot)
            ++filled_;
        Elite<Genome> e;
        e.genome = genome;
        e.fitness = fitness;
        e.descriptor = descriptor;
        e.birth_iteration = generation;
        e.id = index;
        slot = std::move(e);
    }

    void add(const EvalLogEntry<Genome>& entry) { add(entry.genome, entry.fitness, entry.descriptor, entry.index); }

    std::size_t filled() const noexcept { return filled_; }
    std::size_t skipped() const noexcept { return skipped_; }
    std::size_t clamped() const noexcept { return clamped_; }

    std::optional<double> best_fitness() const
    {
        std::optional<double> out;
        for (const auto& s : best_)
            if (s && (!out || s->fitness > *out))
                out = s->fitness;
        return out;
    }

    Archive<Genome> archive() const
    {
        Archive<Genome> out(space_);
        for (const auto& s : best_)
            if (s)
                out.try_insert(*s);
        return out;
    }

private:
    FeatureSpace space_;
    std::vector<std::optional<Elite<Genome>>> best_;
    std::size_t filled_ = 0;
    std::size_t skipped_ = 0;
    std::size_t clamped_ = 0;
};

/// Virtual archive holding, per cell, the best entry of the log.
template <class Genome>
Archive<Genome> elites_from_log(std::span<const EvalLogEntry<Genome>> log, const FeatureSpace& space)
{
    EliteCollector<Genome> collector(space);
    for (const auto& e : log)
        collector.add(e);
    return collector.archive();
}

struct ControlParams {
    std::size_t population_size = 256;
    std::size_t tournament_size = 2;
    std::size_t neighbors = 15;
    double novelty_archive_probability = 0.02;
    std::size_t threads = 1;
    bool record_log = true; // keep every evaluated genome in the result
};

template <class Genome>
struct ControlResult {
    Archive<Genome> archive;
    std::vector<EvalLogEntry<Genome>> log; // empty unless ControlParams::record_log
    RunLog run_log;                        // one batch record per generation
    std::vector<double> best_per_generation;
};

namespace detail {

/// Budget accounting, log recording and best-per-cell collection shared by
/// all controls.
template <Domain D>
class ControlRun {
public:
    using Genome = typename D::Genome;

    ControlRun(const D& domain, const FeatureSpace& space, std::size_t budget, const ControlParams& params)
        : domain_(domain), collector_(space), budget_(budget), params_(params)
    {
        if (budget < 1)
            throw ConfigError("budget", "must be >= 1");
        if (space.dims() != domain.descriptor_dims())
            throw ConfigError("bounds", "feature space dimensionality does not match the domain");
    }

    std::size_t remaining() const noexcept { return budget_ - used_; }

    /// Evaluates the genomes in order and records them; the caller must not
    /// pass more genomes than remain in the budget.
    std::vector<std::optional<Evaluation>> evaluate(const std::vector<Genome>& genomes, std::int64_t generation)
    {
        if (genomes.size() > remaining())
            throw std::logic_error("control exceeded its evaluation budget");
        auto evals = evaluate_batch(domain_, std::span<const Genome>(genomes), params_.threads);
        BatchRecord rec;
        rec.iteration = generation;
        for (std::size_t i = 0; i < genomes.size(); ++i) {
            const std::size_t index = used_++;
            if (!evals[i]) {
                ++rec.invalid;
                continue;
            }
            const std::size_t before = collector_.filled();
            const std::size_t clamped_before = collector_.clamped();
            collector_.add(genomes[i], evals[i]->fitness, evals[i]->descriptor, index, generation);
            rec.inserted += collector_.filled() - before;
            rec.clamped += collector_.clamped() - clamped_before;
            if (params_.record_log)
                log_.push_back({genomes[i], evals[i]->fitness, evals[i]->descriptor, index});
        }
        rec.evaluations = used_;
        rec.filled = collector_.filled();
        rec.best_fitness = collector_.best_fitness();
        run_log_.evaluations = used_;
        run_log_.invalid += rec.invalid;
        run_log_.clamped += rec.clamped;
        run_log_.batches.push_back(std::move(rec));
        return evals;
    }

    ControlResult<Genome> finish(std::vector<double> best_per_generation = {})
    {
        ControlResult<Genome> r;
        r.archive = collector_.archive();
        for (auto& b : run_log_.batches)
            b.resolution = r.archive.space().resolution();
        r.log = std::move(log_);
        r.run_log = std::move(run_log_);
        r.best_per_generation = std::move(best_per_generation);
        return r;
    }

    const D& domain() const noexcept { return domain_; }

private:
    const D& domain_;
    EliteCollector<Genome> collector_;
    std::vector<EvalLogEntry<Genome>> log_;
    RunLog run_log_;
    std::size_t budget_;
    std::size_t used_ = 0;
    const ControlParams& params_;
};

template <class Genome>
struct Individual {
    Genome genome{};
    double fitness = -std::numeric_limits<double>::infinity();
    std::vector<double> descriptor;
    bool valid = false;
};

inline double distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

template <Domain D>
std::vector<Individual<typename D::Genome>> random_population(ControlRun<D>& run, std::uint64_t seed,
                                                              std::size_t size, std::vector<Rng>* rngs = nullptr)
{
    using Genome = typename D::Genome;
    std::vector<Genome> genomes;
    genomes.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        Rng rng = substream(seed, 0, i);
        genomes.push_back(run.domain().random_genome(rng));
        if (rngs)
            rngs->push_back(rng);
    }
    auto evals = run.evaluate(genomes, 0);
    std::vector<Individual<Genome>> pop(size);
    for (std::size_t i = 0; i < size; ++i) {
        pop[i].genome = std::move(genomes[i]);
        if (evals[i]) {
            pop[i].fitness = evals[i]->fitness;
            pop[i].descriptor = std::move(evals[i]->descriptor);
            pop[i].valid = true;
        }
    }
    return pop;
}

template <class Genome>
double best_of(const std::vector<Individual<Genome>>& pop)
{
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& ind : pop)
        best = std::max(best, ind.fitness);
    return best;
}

} // namespace detail

/// `budget` independent random genomes.
template <Domain D>
ControlResult<typename D::Genome> run_random_sampling(const D& domain, const FeatureSpace& space, std::size_t budget,
                                                      std::uint64_t seed, const ControlParams& params = {})
{
    using Genome = typename D::Genome;
    detail::ControlRun<D> run(domain, space, budget, params);
    constexpr std::size_t chunk = 1024;
    std::vector<double> best;
    for (std::int64_t gen = 0; run.remaining() > 0; ++gen) {
        const std::size_t n = std::min(chunk, run.remaining());
        const std::size_t first = budget - run.remaining();
        std::vector<Genome> genomes;
        genomes.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = substream(seed, 0, first + i);
            genomes.push_back(domain.random_genome(rng));
        }
        run.evaluate(genomes, gen);
    }
    return run.finish();
}

/// Generational EA selecting on fitness alone: tournament selection,
/// mutation, full replacement with the single best individual carried over.
template <Domain D>
ControlResult<typename D::Genome> run_traditional_ea(const D& domain, const FeatureSpace& space, std::size_t budget,
                                                     std::uint64_t seed, const ControlParams& params = {})
{
    using Genome = typename D::Genome;
    const std::size_t mu = params.population_size;
    if (mu < 2)
        throw ConfigError("population size", "must be >= 2");
    if (budget < mu)
        throw ConfigError("budget", "must be at least the population size");
    if (params.tournament_size < 1)
        throw ConfigError("tournament size", "must be >= 1");

    detail::ControlRun<D> run(domain, space, budget, params);
    auto pop = detail::random_population(run, seed, mu);
    std::vector<double> best{detail::best_of(pop)};

    for (std::uint64_t gen = 1; run.remaining() > 0; ++gen) {
        const auto elite_it = std::max_element(pop.begin(), pop.end(),
                                               [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
        const std::size_t children = std::min(mu - 1, run.remaining());
        std::vector<Genome> genomes;
        genomes.reserve(children);
        std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
        for (std::size_t slot = 0; slot < children; ++slot) {
            Rng rng = substream(seed, gen, slot);
            std::size_t winner = pick(rng);
            for (std::size_t t = 1; t < params.tournament_size; ++t) {
                const std::size_t other = pick(rng);
                if (pop[other].fitness > pop[winner].fitness)
                    winner = other;
            }
            genomes.push_back(domain.mutate(pop[winner].genome, rng));
        }
        auto evals = run.evaluate(genomes, static_cast<std::int64_t>(gen));

        std::vector<detail::Individual<Genome>> next;
        next.reserve(children + 1);
        next.push_back(*elite_it);
        for (std::size_t i = 0; i < children; ++i) {
            detail::Individual<Genome> ind;
            ind.genome = std::move(genomes[i]);
            if (evals[i]) {
                ind.fitness = evals[i]->fitness;
                ind.descriptor = std::move(evals[i]->descriptor);
                ind.valid = true;
            }
            next.push_back(std::move(ind));
        }
        pop = std::move(next);
        best.push_back(detail::best_of(pop));
    }
    return run.finish(std::move(best));
}

/// Mean descriptor distance from each individual to every other one.
template <class Genome>
std::vector<double> mean_distance_diversity(const std::vector<detail::Individual<Genome>>& pop)
{
    const std::size_t n = pop.size();
    std::vector<double> div(n, 0.0);
    if (n < 2)
        return div;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = detail::distance(pop[i].descriptor, pop[j].descriptor);
            div[i] += d;
            div[j] += d;
        }
    for (auto& d : div)
        d /= static_cast<double>(n - 1);
    return div;
}

/// Local-competition and novelty scores of a set of points against a pool.
struct NeighborhoodScores {
    std::vector<double> local_competition; // # of k nearest with lower fitness
    std::vector<double> novelty;           // mean distance to the k nearest
};

/// For each query point q (an index into the pool), looks at its k nearest
/// other pool members by brute force. Fewer than k others means all of them.
inline NeighborhoodScores neighborhood_scores(std::span<const std::vector<double>> pool_descriptors,
                                              std::span<const double> pool_fitness,
                                              std::span<const std::size_t> queries, std::size_t k)
{
    NeighborhoodScores out;
    out.local_competition.resize(queries.size());
    out.novelty.resize(queries.size());
    const std::size_t n = pool_descriptors.size();
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const std::size_t q = queries[qi];
        dist.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != q)
                dist.emplace_back(detail::distance(pool_descriptors[q], pool_descriptors[j]), j);
        const std::size_t kk = std::min(k, dist.size());
        if (kk == 0) {
            out.local_competition[qi] = 0.0;
            out.novelty[qi] = 0.0;
            continue;
        }
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk - 1), dist.end());
        double sum = 0.0;
        std::size_t beaten = 0;
        for (std::size_t t = 0; t < kk; ++t) {
            sum += dist[t].first;
            beaten += pool_fitness[dist[t].second] < pool_fitness[q];
        }
        out.local_competition[qi] = static_cast<double>(beaten);
        out.novelty[qi] = sum / static_cast<double>(kk);
    }
    return out;
}

namespace detail {

/// Two-objective NSGA-II style loop shared by EA+diversity and NS+LC.
/// `score` maps a population to one objective vector per individual.
template <Domain D, class Score, class OnEvaluated>
ControlResult<typename D::Genome> run_two_objective(const D& domain, const FeatureSpace& space, std::size_t budget,
                                                    std::uint64_t seed, const ControlParams& params, Score&& score,
                                                    OnEvaluated&& on_evaluated)
{
    using Genome = typename D::Genome;
    const std::size_t mu = params.population_size;
    if (mu < 2)
        throw ConfigError("population size", "must be >= 2");
    if (budget < mu)
        throw ConfigError("budget", "must be at least the population size");

    ControlRun<D> run(domain, space, budget, params);
    std::vector<Rng> init_rngs;
    auto pop = random_population(run, seed, mu, &init_rngs);
    for (std::size_t i = 0; i < pop.size(); ++i)
        on_evaluated(pop[i], init_rngs[i]);
    std::erase_if(pop, [](const auto& ind) { return !ind.valid; });
    std::vector<double> best{best_of(pop)};

    for (std::uint64_t gen = 1; run.remaining() > 0; ++gen) {
        if (pop.empty())
            throw EvaluationInvalid("every individual in the population was invalid");
        const auto ranked = rank_population(score(pop));
        const std::size_t lambda = std::min(mu, run.remaining());
        std::vector<Genome> genomes;
        std::vector<Rng> rngs;
        genomes.reserve(lambda);
        std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
        for (std::size_t slot = 0; slot < lambda; ++slot) {
            Rng rng = substream(seed, gen, slot);
            const std::size_t a = pick(rng);
            const std::size_t b = pick(rng);
            const std::size_t parent = ranked.better(b, a) ? b : a;
            genomes.push_back(domain.mutate(pop[parent].genome, rng));
            rngs.push_back(rng);
        }
        auto evals = run.evaluate(genomes, static_cast<std::int64_t>(gen));
        const std::size_t first_child = pop.size();
        std::vector<std::size_t> child_slot;
        for (std::size_t i = 0; i < lambda; ++i) {
            if (!evals[i])
                continue;
            Individual<Genome> ind;
            ind.genome = std::move(genomes[i]);
            ind.fitness = evals[i]->fitness;
            ind.descriptor = std::move(evals[i]->descriptor);
            ind.valid = true;
            pop.push_back(std::move(ind));
            child_slot.push_back(i);
        }
        const auto combined = rank_population(score(pop));
        const auto survivors = select_survivors(combined, mu);
        // Children are offered to the novelty archive only after they were scored.
        for (std::size_t c = 0; c < child_slot.size(); ++c)
            on_evaluated(pop[first_child + c], rngs[child_slot[c]]);
        std::vector<Individual<Genome>> next;
        next.reserve(survivors.size());
        for (std::size_t i : survivors)
            next.push_back(std::move(pop[i]));
        pop = std::move(next);
        best.push_back(best_of(pop));
    }
    return run.finish(std::move(best));
}

} // namespace detail

/// Two objectives: fitness and mean descriptor distance to the rest of the
/// population; NSGA-II ranking and crowding for both selection steps.
template <Domain D>
ControlResult<typename D::Genome> run_ea_diversity(const D& domain, const FeatureSpace& space, std::size_t budget,
                                                   std::uint64_t seed, const ControlParams& params = {})
{
    using Genome = typename D::Genome;
    auto score = [](const std::vector<detail::Individual<Genome>>& pop) {
        const auto div = mean_distance_diversity(pop);
        std::vector<Objectives> obj(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i)
            obj[i] = {pop[i].fitness, div[i]};
        return obj;
    };
    return detail::run_two_objective(domain, space, budget, seed, params, score,
                                     [](const auto&, Rng&) {});
}

/// Novelty search with local competition. Neighbourhoods are drawn from the
/// population together with a novelty archive; each evaluated individual
/// joins that archive with a fixed probability.
template <Domain D>
ControlResult<typename D::Genome> run_ns_lc(const D& domain, const FeatureSpace& space, std::size_t budget,
                                            std::uint64_t seed, const ControlParams& params = {})
{
    using Genome = typename D::Genome;
    if (params.neighbors < 1)
        throw ConfigError("neighbors", "must be >= 1");
    if (params.novelty_archive_probability < 0.0 || params.novelty_archive_probability > 1.0)
        throw ConfigError("novelty archive probability", "must lie in [0, 1]");

    std::vector<std::vector<double>> archive_descriptors;
    std::vector<double> archive_fitness;

    auto score = [&](const std::vector<detail::Individual<Genome>>& pop) {
        std::vector<std::vector<double>> descriptors;
        std::vector<double> fitness;
        descriptors.reserve(pop.size() + archive_descriptors.size());
        fitness.reserve(descriptors.capacity());
        for (const auto& ind : pop) {
            descriptors.push_back(ind.descriptor);
            fitness.push_back(ind.fitness);
        }
        descriptors.insert(descriptors.end(), archive_descriptors.begin(), archive_descriptors.end());
        fitness.insert(fitness.end(), archive_fitness.begin(), archive_fitness.end());
        std::vector<std::size_t> queries(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i)
            queries[i] = i;
        const auto s = neighborhood_scores(descriptors, fitness, queries, params.neighbors);
        std::vector<Objectives> obj(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i)
            obj[i] = {s.local_competition[i], s.novelty[i]};
        return obj;
    };
    auto on_evaluated = [&](const detail::Individual<Genome>& ind, Rng& rng) {
        if (ind.valid && uniform01(rng) < params.novelty_archive_probability) {
            archive_descriptors.push_back(ind.descriptor);
            archive_fitness.push_back(ind.fitness);
        }
    };
    return detail::run_two_objective(domain, space, budget, seed, params, score, on_evaluated);
}

} // namespace mapelites
