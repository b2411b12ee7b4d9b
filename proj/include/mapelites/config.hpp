#pragma once

// Run configuration files (JSON).
//
// {
//   "domain": "retina" | {"name": "retina", ...domain keys},
//   "algorithm": "map_elites",          // or random_sampling, traditional_ea,
//                                       // ea_diversity, ns_lc, grid_search
//   "seed": 1,
//   "budget": 100000,                   // or give "iterations"
//   "initial batch": 1000,
//   "batch size": 100,
//   "iterations": 990,
//   "resolution": [64, 64],             // final resolution
//   "starting resolution": [16, 16],
//   "resolution change program": [{"iteration": 330, "resolution": [32, 32]}, ...],
//   "threads": 1,
//   "population size": 256, "tournament size": 2, "neighbors": 15,
//   "novelty archive probability": 0.02, "grid steps": 8
// }
//
// Unknown keys are rejected. Every error names the offending key.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "controls/controls.hpp"
#include "domains/arm.hpp"
#include "domains/retina.hpp"
#include "domains/synthetic.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "feature_space.hpp"

namespace mapelites {

using Json = nlohmann::json;

enum class Algorithm { MapElites, RandomSampling, TraditionalEa, EaDiversity, NsLc, GridSearch };

inline std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::MapElites: return "map_elites";
    case Algorithm::RandomSampling: return "random_sampling";
    case Algorithm::TraditionalEa: return "traditional_ea";
    case Algorithm::EaDiversity: return "ea_diversity";
    case Algorithm::NsLc: return "ns_lc";
    case Algorithm::GridSearch: return "grid_search";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s)
{
    for (auto a : {Algorithm::MapElites, Algorithm::RandomSampling, Algorithm::TraditionalEa, Algorithm::EaDiversity,
                   Algorithm::NsLc, Algorithm::GridSearch})
        if (to_string(a) == s)
            return a;
    throw ConfigError("algorithm", "unknown algorithm '" + s + "'");
}

using DomainParams = std::variant<RetinaParams, ArmParams, SyntheticParams>;

struct DomainConfig {
    DomainParams params;
    std::optional<std::string> objects_file; // retina only, as written in the config

    std::string name() const
    {
        switch (params.index()) {
        case 0: return "retina";
        case 1: return "arm";
        default: return "synthetic";
        }
    }
};

struct RunConfig {
    DomainConfig domain{RetinaParams{}, std::nullopt};
    Algorithm algorithm = Algorithm::MapElites;
    std::uint64_t seed = 0;
    EngineConfig engine;                 // map_elites only; seed and threads mirrored
    Resolution starting_resolution;
    std::vector<ResolutionStep> schedule;
    std::size_t budget = 0;              // evaluations
    ControlParams control;
    std::size_t grid_steps = 8;

    Resolution final_resolution() const { return schedule.empty() ? starting_resolution : schedule.back().resolution; }
};

namespace detail {

class KeyReader {
public:
    KeyReader(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix))
    {
        if (!j_.is_object())
            throw ConfigError(prefix_.empty() ? "config" : prefix_, "must be a JSON object");
    }

    bool has(const std::string& key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <class T>
    std::optional<T> get(const std::string& key)
    {
        if (!has(key))
            return std::nullopt;
        return convert<T>(j_.at(key), name(key));
    }

    template <class T>
    T get_or(const std::string& key, T fallback)
    {
        auto v = get<T>(key);
        return v ? *v : fallback;
    }

    const Json& raw(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    void reject_unknown() const
    {
        for (const auto& [key, value] : j_.items())
            if (!seen_.contains(key))
                throw ConfigError(name(key), "unknown key");
    }

    template <class T>
    static T convert(const Json& v, const std::string& key)
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                throw ConfigError(key, "must be true or false");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0))
                throw ConfigError(key, std::is_unsigned_v<T> ? "must be a non-negative integer" : "must be an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number())
                throw ConfigError(key, "must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string())
                throw ConfigError(key, "must be a string");
        }
        try {
            return v.get<T>();
        } catch (const Json::exception& e) {
            throw ConfigError(key, e.what());
        }
    }

private:
    const Json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

inline Resolution parse_resolution(const Json& v, const std::string& key)
{
    if (v.is_number_integer()) {
        const auto r = KeyReader::convert<std::size_t>(v, key);
        return {r};
    }
    if (!v.is_array() || v.empty())
        throw ConfigError(key, "must be a non-empty list of cell counts");
    Resolution r;
    for (const auto& x : v)
        r.push_back(KeyReader::convert<std::size_t>(x, key));
    return r;
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file)
{
    std::filesystem::path p(file);
    return p.is_absolute() || base.empty() ? p : base / p;
}

inline DomainConfig parse_domain(const Json& j, const std::filesystem::path& base_dir)
{
    if (j.is_string())
        return parse_domain(Json{{"name", j}}, base_dir);
    KeyReader r(j, "domain");
    const auto name = r.get<std::string>("name");
    if (!name)
        throw ConfigError("domain.name", "missing required key");
    DomainConfig out{RetinaParams{}, std::nullopt};
    if (*name == "retina") {
        RetinaParams p;
        if (auto layers = r.get<std::vector<std::size_t>>("layers"))
            p.layers = *layers;
        p.weight_range = r.get_or("weight range", p.weight_range);
        p.bias_range = r.get_or("bias range", p.bias_range);
        p.connection_probability = r.get<double>("connection probability");
        p.toggle_rate = r.get_or("toggle rate", p.toggle_rate);
        p.weight_rate = r.get_or("weight mutation rate", p.weight_rate);
        p.weight_sigma = r.get_or("weight sigma", p.weight_sigma);
        p.bias_rate = r.get_or("bias mutation rate", p.bias_rate);
        p.bias_sigma = r.get_or("bias sigma", p.bias_sigma);
        for (auto [key, v] : {std::pair{"toggle rate", p.toggle_rate}, {"weight mutation rate", p.weight_rate},
                              {"bias mutation rate", p.bias_rate}})
            if (!(v >= 0.0 && v <= 1.0))
                throw ConfigError(r.name(key), "must lie in [0, 1]");
        if (!(p.weight_sigma >= 0.0) || !(p.bias_sigma >= 0.0))
            throw ConfigError(r.name("weight sigma"), "sigmas must be non-negative");
        if (r.has("objects")) {
            const Json& o = r.raw("objects");
            if (o.is_string()) {
                out.objects_file = o.get<std::string>();
                try {
                    p.objects = ObjectSets::load(resolve(base_dir, *out.objects_file).string());
                } catch (const ConfigError& e) {
                    throw ConfigError("domain.objects", e.message());
                }
            } else {
                KeyReader ro(o, "domain.objects");
                ObjectSets s;
                for (const char* side : {"left", "right"}) {
                    const auto list = ro.get<std::vector<std::string>>(side);
                    if (!list || list->empty())
                        throw ConfigError(ro.name(side), "needs at least one 4-pixel pattern");
                    for (const auto& pat : *list)
                        (std::string(side) == "left" ? s.left : s.right).push_back(ObjectSets::parse_pattern(pat));
                }
                ro.reject_unknown();
                p.objects = std::move(s);
            }
        }
        out.params = std::move(p);
    } else if (*name == "arm") {
        ArmParams p;
        p.min_step = r.get_or("min step", p.min_step);
        p.max_step = r.get_or("max step", p.max_step);
        p.mutation_rate = r.get_or("mutation rate", p.mutation_rate);
        p.mutation_sigma = r.get_or("mutation sigma", p.mutation_sigma);
        p.bins = r.get_or("bins", p.bins);
        if (!(p.mutation_rate >= 0.0 && p.mutation_rate <= 1.0))
            throw ConfigError("domain.mutation rate", "must lie in [0, 1]");
        out.params = p;
    } else if (*name == "synthetic") {
        SyntheticParams p;
        p.length = r.get_or("length", p.length);
        if (auto mode = r.get<std::string>("mode")) {
            if (*mode == "constant")
                p.mode = SyntheticMode::Constant;
            else if (*mode == "rastrigin")
                p.mode = SyntheticMode::Rastrigin;
            else
                throw ConfigError("domain.mode", "must be 'constant' or 'rastrigin'");
        }
        p.mutation_rate = r.get_or("mutation rate", p.mutation_rate);
        p.mutation_sigma = r.get_or("mutation sigma", p.mutation_sigma);
        if (p.length < 2)
            throw ConfigError("domain.length", "must be at least 2");
        out.params = p;
    } else {
        throw ConfigError("domain.name", "unknown domain '" + *name + "'");
    }
    r.reject_unknown();
    return out;
}

inline Resolution default_resolution(const DomainConfig& d)
{
    switch (d.params.index()) {
    case 0: return {64, 64};
    case 1: return {std::get<ArmParams>(d.params).bins};
    default: return {32, 32};
    }
}

inline std::size_t descriptor_dims(const DomainConfig& d) { return d.params.index() == 1 ? 1 : 2; }

} // namespace detail

/// Parses and validates a run configuration, resolving every default.
/// Relative file references are resolved against `base_dir`.
inline RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = {})
{
    detail::KeyReader r(j, "");
    RunConfig c;
    if (!r.has("domain"))
        throw ConfigError("domain", "missing required key");
    c.domain = detail::parse_domain(r.raw("domain"), base_dir);
    if (auto a = r.get<std::string>("algorithm"))
        c.algorithm = parse_algorithm(*a);
    c.seed = r.get_or<std::uint64_t>("seed", 0);

    const std::size_t threads = r.get_or<std::size_t>("threads", 1);
    if (threads < 1)
        throw ConfigError("threads", "must be >= 1");

    // Feature-space resolution and schedule.
    std::optional<Resolution> final_res;
    if (r.has("resolution"))
        final_res = detail::parse_resolution(r.raw("resolution"), "resolution");
    if (r.has("starting resolution"))
        c.starting_resolution = detail::parse_resolution(r.raw("starting resolution"), "starting resolution");
    if (r.has("resolution change program")) {
        const Json& prog = r.raw("resolution change program");
        if (!prog.is_array())
            throw ConfigError("resolution change program", "must be a list of {iteration, resolution} entries");
        for (std::size_t i = 0; i < prog.size(); ++i) {
            const std::string key = "resolution change program[" + std::to_string(i) + "]";
            detail::KeyReader e(prog[i], key);
            const auto it = e.get<std::int64_t>("iteration");
            if (!it || !e.has("resolution"))
                throw ConfigError(key, "needs 'iteration' and 'resolution'");
            c.schedule.push_back({*it, detail::parse_resolution(e.raw("resolution"), key + ".resolution")});
            e.reject_unknown();
        }
    }
    if (c.starting_resolution.empty())
        c.starting_resolution = c.schedule.empty() && final_res ? *final_res : detail::default_resolution(c.domain);
    if (final_res && *final_res != c.final_resolution())
        throw ConfigError("resolution", "does not match the final resolution of the resolution change program");
    if (c.final_resolution().size() != detail::descriptor_dims(c.domain))
        throw ConfigError(c.schedule.empty() ? "resolution" : "starting resolution",
                          "domain '" + c.domain.name() + "' has " +
                              std::to_string(detail::descriptor_dims(c.domain)) + " feature dimensions");

    // Evaluation budget.
    c.engine.initial_batch = r.get_or<std::size_t>("initial batch", 1000);
    c.engine.batch_size = r.get_or<std::size_t>("batch size", 100);
    const auto iterations = r.get<std::size_t>("iterations");
    const auto budget = r.get<std::size_t>("budget");
    c.grid_steps = r.get_or<std::size_t>("grid steps", 8);
    c.control.population_size = r.get_or<std::size_t>("population size", c.control.population_size);
    c.control.tournament_size = r.get_or<std::size_t>("tournament size", c.control.tournament_size);
    c.control.neighbors = r.get_or<std::size_t>("neighbors", c.control.neighbors);
    c.control.novelty_archive_probability =
        r.get_or<double>("novelty archive probability", c.control.novelty_archive_probability);
    c.control.threads = threads;
    r.reject_unknown();

    if (c.algorithm == Algorithm::MapElites) {
        if (c.engine.initial_batch < 1)
            throw ConfigError("initial batch", "must be >= 1");
        if (c.engine.batch_size < 1)
            throw ConfigError("batch size", "must be >= 1");
        if (iterations) {
            c.engine.iterations = *iterations;
            if (budget && *budget != c.engine.total_evaluations())
                throw ConfigError("budget", "must equal initial batch + iterations x batch size (" +
                                                std::to_string(c.engine.total_evaluations()) + ")");
        } else if (budget) {
            if (*budget < c.engine.initial_batch || (*budget - c.engine.initial_batch) % c.engine.batch_size != 0)
                throw ConfigError("budget", "must equal initial batch + a whole number of batches");
            c.engine.iterations = (*budget - c.engine.initial_batch) / c.engine.batch_size;
        } else {
            throw ConfigError("budget", "missing required key (or give 'iterations')");
        }
        c.budget = c.engine.total_evaluations();
        for (std::size_t i = 0; i < c.schedule.size(); ++i)
            if (c.schedule[i].iteration > static_cast<std::int64_t>(c.engine.iterations))
                throw ConfigError("resolution change program[" + std::to_string(i) + "]",
                                  "iteration exceeds the number of iterations");
    } else if (c.algorithm == Algorithm::GridSearch) {
        if (c.domain.params.index() != 1)
            throw ConfigError("algorithm", "grid_search is only defined for the arm domain");
        if (c.grid_steps < 1)
            throw ConfigError("grid steps", "must be >= 1");
        c.budget = c.grid_steps * c.grid_steps * c.grid_steps;
        if (budget && *budget != c.budget)
            throw ConfigError("budget", "grid search always uses grid steps^3 = " + std::to_string(c.budget) +
                                            " evaluations");
    } else {
        if (!budget)
            throw ConfigError("budget", "missing required key");
        if (iterations)
            throw ConfigError("iterations", "only map_elites takes iterations; give a budget");
        c.budget = *budget;
        if (c.budget < 1)
            throw ConfigError("budget", "must be >= 1");
        const bool population_based = c.algorithm != Algorithm::RandomSampling;
        if (population_based && c.control.population_size < 2)
            throw ConfigError("population size", "must be >= 2");
        if (population_based && c.budget < c.control.population_size)
            throw ConfigError("budget", "must be at least the population size");
        if (c.control.tournament_size < 1)
            throw ConfigError("tournament size", "must be >= 1");
        if (c.control.neighbors < 1)
            throw ConfigError("neighbors", "must be >= 1");
        if (!(c.control.novelty_archive_probability >= 0.0 && c.control.novelty_archive_probability <= 1.0))
            throw ConfigError("novelty archive probability", "must lie in [0, 1]");
    }
    c.engine.seed = c.seed;
    c.engine.threads = threads;

    // Validates resolution steps and names the bad entry.
    FeatureSpace(std::vector<Interval>(c.starting_resolution.size(), Interval{0.0, 1.0}), c.starting_resolution,
                 c.schedule);
    return c;
}

inline Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config", "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    return parse_run_config(read_json_file(path), path.parent_path());
}

inline Json domain_to_json(const DomainConfig& d)
{
    Json j;
    j["name"] = d.name();
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, RetinaParams>) {
                j["layers"] = p.layers;
                j["weight range"] = p.weight_range;
                j["bias range"] = p.bias_range;
                if (p.connection_probability)
                    j["connection probability"] = *p.connection_probability;
                j["toggle rate"] = p.toggle_rate;
                j["weight mutation rate"] = p.weight_rate;
                j["weight sigma"] = p.weight_sigma;
                j["bias mutation rate"] = p.bias_rate;
                j["bias sigma"] = p.bias_sigma;
                Json objects;
                for (auto side : {std::pair{"left", &p.objects.left}, {"right", &p.objects.right}}) {
                    objects[side.first] = Json::array();
                    for (auto pat : *side.second)
                        objects[side.first].push_back(ObjectSets::format_pattern(pat));
                }
                j["objects"] = objects;
            } else if constexpr (std::is_same_v<P, ArmParams>) {
                j["min step"] = p.min_step;
                j["max step"] = p.max_step;
                j["mutation rate"] = p.mutation_rate;
                j["mutation sigma"] = p.mutation_sigma;
                j["bins"] = p.bins;
            } else {
                j["length"] = p.length;
                j["mode"] = p.mode == SyntheticMode::Rastrigin ? "rastrigin" : "constant";
                j["mutation rate"] = p.mutation_rate < 0.0 ? 1.0 / static_cast<double>(p.length) : p.mutation_rate;
                j["mutation sigma"] = p.mutation_sigma;
            }
        },
        d.params);
    return j;
}

/// Every setting with defaults resolved. Parsing it back yields the same run.
inline Json effective_config(const RunConfig& c)
{
    Json j;
    j["domain"] = domain_to_json(c.domain);
    j["algorithm"] = to_string(c.algorithm);
    j["seed"] = c.seed;
    j["budget"] = c.budget;
    j["threads"] = c.engine.threads;
    j["resolution"] = c.final_resolution();
    switch (c.algorithm) {
    case Algorithm::MapElites:
        j["initial batch"] = c.engine.initial_batch;
        j["batch size"] = c.engine.batch_size;
        j["iterations"] = c.engine.iterations;
        j["starting resolution"] = c.starting_resolution;
        j["resolution change program"] = Json::array();
        for (const auto& s : c.schedule)
            j["resolution change program"].push_back({{"iteration", s.iteration}, {"resolution", s.resolution}});
        break;
    case Algorithm::GridSearch:
        j["grid steps"] = c.grid_steps;
        break;
    case Algorithm::RandomSampling:
        break;
    case Algorithm::NsLc:
        j["neighbors"] = c.control.neighbors;
        j["novelty archive probability"] = c.control.novelty_archive_probability;
        [[fallthrough]];
    case Algorithm::TraditionalEa:
    case Algorithm::EaDiversity:
        j["population size"] = c.control.population_size;
        if (c.algorithm == Algorithm::TraditionalEa)
            j["tournament size"] = c.control.tournament_size;
        break;
    }
    return j;
}

} // namespace mapelites
