#pragma once

// Executes a RunConfig and writes a run directory:
//   archive.csv, archive.space.json, runlog.csv, resolution_changes.csv,
//   lineage.csv, effective_config.json, status.json

#include <filesystem>
#include <string>

#include "config.hpp"
#include "io.hpp"

namespace mapelites {

struct RunOutput {
    FeatureSpace space; // final feature space
    std::string archive_csv;
    DenseMap map;
    RunLog log;
    std::optional<double> best_fitness;
    std::size_t filled = 0;
};

inline FeatureSpace make_space(const RunConfig& c, const std::vector<Interval>& bounds,
                               const std::vector<std::string>& labels)
{
    if (c.algorithm == Algorithm::MapElites)
        return FeatureSpace(bounds, c.starting_resolution, c.schedule, labels);
    return FeatureSpace(bounds, c.final_resolution(), {}, labels);
}

namespace detail {

template <Domain D, class G = typename D::Genome>
RunOutput finish_run(const D& domain, const Archive<G>& archive, RunLog log)
{
    RunOutput out;
    out.space = archive.space();
    out.archive_csv = io::archive_csv_string(archive, domain);
    out.map = to_dense_map(archive);
    out.best_fitness = archive.best_fitness();
    out.filled = archive.filled_count();
    out.log = std::move(log);
    return out;
}

template <Domain D>
RunOutput execute_on(const D& domain, const RunConfig& c)
{
    const FeatureSpace space = make_space(c, domain.bounds(), domain.labels());
    ControlParams params = c.control;
    params.record_log = false;
    switch (c.algorithm) {
    case Algorithm::MapElites: {
        auto r = run_map_elites(domain, space, c.engine);
        return finish_run(domain, r.archive, std::move(r.log));
    }
    case Algorithm::RandomSampling: {
        auto r = run_random_sampling(domain, space, c.budget, c.seed, params);
        return finish_run(domain, r.archive, std::move(r.run_log));
    }
    case Algorithm::TraditionalEa: {
        auto r = run_traditional_ea(domain, space, c.budget, c.seed, params);
        return finish_run(domain, r.archive, std::move(r.run_log));
    }
    case Algorithm::EaDiversity: {
        auto r = run_ea_diversity(domain, space, c.budget, c.seed, params);
        return finish_run(domain, r.archive, std::move(r.run_log));
    }
    case Algorithm::NsLc: {
        auto r = run_ns_lc(domain, space, c.budget, c.seed, params);
        return finish_run(domain, r.archive, std::move(r.run_log));
    }
    case Algorithm::GridSearch:
        if constexpr (std::is_same_v<D, ArmDomain>) {
            auto r = arm_grid_search(domain, c.grid_steps, space);
            RunLog log;
            BatchRecord b;
            b.evaluations = log.evaluations = r.evaluations;
            b.filled = r.archive.filled_count();
            b.best_fitness = r.archive.best_fitness();
            b.inserted = b.filled;
            b.resolution = space.resolution();
            log.batches.push_back(b);
            return finish_run(domain, r.archive, std::move(log));
        }
        throw ConfigError("algorithm", "grid_search is only defined for the arm domain");
    }
    throw std::logic_error("unhandled algorithm");
}

} // namespace detail

inline RunOutput execute(const RunConfig& c)
{
    return std::visit(
        [&](const auto& params) -> RunOutput {
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, RetinaParams>)
                return detail::execute_on(RetinaDomain(params), c);
            else if constexpr (std::is_same_v<P, ArmParams>)
                return detail::execute_on(ArmDomain(params), c);
            else
                return detail::execute_on(SyntheticDomain(params), c);
        },
        c.domain.params);
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = io::open_out(path);
    out << text;
}

inline Json run_status(const RunConfig& c, const RunOutput& r)
{
    Json j;
    j["status"] = "ok";
    j["algorithm"] = to_string(c.algorithm);
    j["seed"] = c.seed;
    j["evaluations"] = r.log.evaluations;
    j["filled"] = r.filled;
    j["invalid"] = r.log.invalid;
    j["clamped"] = r.log.clamped;
    j["best fitness"] = r.best_fitness ? Json(*r.best_fitness) : Json(nullptr);
    j["resolution"] = r.space.resolution();
    return j;
}

inline void write_run_dir(const std::filesystem::path& dir, const RunConfig& c, const RunOutput& r)
{
    std::filesystem::create_directories(dir);
    write_text(dir / "archive.csv", r.archive_csv);
    io::write_space(dir / "archive.space.json", r.space);
    io::write_run_log(dir / "runlog.csv", r.log);
    io::write_resolution_changes(dir / "resolution_changes.csv", r.log);
    io::write_lineage(dir / "lineage.csv", r.log.lineage, r.space.dims());
    write_text(dir / "effective_config.json", effective_config(c).dump(2) + '\n');
    write_text(dir / "status.json", run_status(c, r).dump(2) + '\n');
}

} // namespace mapelites
