#pragma once

// Experiment manifests, orchestration and reports.
//
// Manifest (JSON):
// {
//   "base seed": 1,                 // replicate r runs with seed base + r
//   "replicates": 10,
//   "parallel replicates": 1,       // runs executed concurrently
//   "output": "retina_scaled",      // optional; relative to the output root
//   "common": { run config keys shared by every treatment },
//   "treatments": [
//     {"name": "map_elites", "algorithm": "map_elites", ...overrides},
//     {"name": "grid", "algorithm": "grid_search", "replicates": 1}
//   ]
// }
// "domain" and "budget" may also be given at top level as shorthand for
// the same keys in "common".
//
// Experiment directory:
//   <treatment>/seed_<seed>/...    one run directory per replicate
//   runs.csv                       every run with its status
//   metrics.csv                    four metrics per successful run
//   significance.csv               pairwise two-tailed Mann-Whitney tests
//   summary.txt                    medians, failed runs, significance table
//   reference.json                 reference-map digest and contributors
//   effective_manifest.json        manifest with all defaults resolved
//   metadata.json                  timestamps; the only non-reproducible file

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

#include "metrics.hpp"
#include "runner.hpp"
#include "stats.hpp"

namespace mapelites {

struct Treatment {
    std::string name;
    std::size_t replicates = 0;
    Json config;   // merged run configuration without seed
    RunConfig run; // parsed with seed 0
};

struct ExperimentManifest {
    std::uint64_t base_seed = 0;
    std::size_t replicates = 1;
    std::size_t parallel_replicates = 1;
    std::optional<std::string> output;
    std::vector<Treatment> treatments;
};

inline std::filesystem::path default_output_root()
{
    if (const char* env = std::getenv("MAPELITES_OUTPUT_ROOT"); env && *env)
        return env;
    return "output";
}

inline ExperimentManifest parse_manifest(const Json& j, const std::filesystem::path& base_dir = {})
{
    detail::KeyReader r(j, "");
    ExperimentManifest m;
    m.base_seed = r.get_or<std::uint64_t>("base seed", 0);
    m.replicates = r.get_or<std::size_t>("replicates", 1);
    m.parallel_replicates = r.get_or<std::size_t>("parallel replicates", 1);
    m.output = r.get<std::string>("output");
    if (m.replicates < 1)
        throw ConfigError("replicates", "must be >= 1");
    if (m.parallel_replicates < 1)
        throw ConfigError("parallel replicates", "must be >= 1");

    Json common = Json::object();
    if (r.has("common")) {
        common = r.raw("common");
        if (!common.is_object())
            throw ConfigError("common", "must be a JSON object");
    }
    for (const char* key : {"domain", "budget"})
        if (r.has(key)) {
            if (common.contains(key))
                throw ConfigError(key, "given both at top level and in 'common'");
            common[key] = r.raw(key);
        }
    if (common.contains("seed"))
        throw ConfigError("common.seed", "seeds are derived from 'base seed'");
    if (!r.has("treatments") || !r.raw("treatments").is_array() || r.raw("treatments").empty())
        throw ConfigError("treatments", "need a non-empty list of treatments");
    r.reject_unknown();

    std::set<std::string> names;
    const Json& list = j.at("treatments");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string key = "treatments[" + std::to_string(i) + "]";
        if (!list[i].is_object())
            throw ConfigError(key, "must be a JSON object");
        Treatment t;
        Json cfg = common;
        for (const auto& [k, v] : list[i].items()) {
            if (k == "name") {
                if (!v.is_string())
                    throw ConfigError(key + ".name", "must be a string");
                t.name = v.get<std::string>();
            } else if (k == "replicates") {
                t.replicates = detail::KeyReader::convert<std::size_t>(v, key + ".replicates");
                if (t.replicates < 1)
                    throw ConfigError(key + ".replicates", "must be >= 1");
            } else if (k == "seed") {
                throw ConfigError(key + ".seed", "seeds are derived from 'base seed'");
            } else {
                cfg[k] = v;
            }
        }
        if (t.name.empty())
            throw ConfigError(key + ".name", "missing required key");
        if (t.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
                std::string::npos ||
            t.name == "." || t.name == "..")
            throw ConfigError(key + ".name", "use letters, digits, '_', '-' and '.' only");
        if (!names.insert(t.name).second)
            throw ConfigError(key + ".name", "duplicate treatment name '" + t.name + "'");
        if (!t.replicates)
            t.replicates = m.replicates;
        try {
            t.run = parse_run_config(cfg, base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError(e.key().empty() ? key : key + "." + e.key(), e.message());
        }
        t.config = std::move(cfg);
        m.treatments.push_back(std::move(t));
    }

    // Every map must be comparable against one reference map.
    const auto& first = m.treatments.front().run;
    for (std::size_t i = 1; i < m.treatments.size(); ++i) {
        const auto& run = m.treatments[i].run;
        const std::string key = "treatments[" + std::to_string(i) + "]";
        if (run.domain.name() != first.domain.name())
            throw ConfigError(key + ".domain", "all treatments must use the same domain");
        if (run.final_resolution() != first.final_resolution())
            throw ConfigError(key + ".resolution", "all treatments must share the final resolution");
    }
    return m;
}

inline ExperimentManifest load_manifest(const std::filesystem::path& path)
{
    return parse_manifest(read_json_file(path), path.parent_path());
}

inline Json effective_manifest(const ExperimentManifest& m)
{
    Json j;
    j["base seed"] = m.base_seed;
    j["replicates"] = m.replicates;
    j["parallel replicates"] = m.parallel_replicates;
    j["treatments"] = Json::array();
    for (const auto& t : m.treatments) {
        Json e = effective_config(t.run);
        e.erase("seed");
        e["name"] = t.name;
        e["replicates"] = t.replicates;
        j["treatments"].push_back(std::move(e));
    }
    return j;
}

// ---------------------------------------------------------------- report

inline constexpr std::array<const char*, 4> kMetricNames{"global_performance", "global_reliability", "precision",
                                                         "coverage"};

inline std::optional<double> metric_value(const MetricsReport& r, std::size_t metric)
{
    switch (metric) {
    case 0: return r.global_performance;
    case 1: return r.global_reliability;
    case 2: return r.precision;
    default: return r.coverage;
    }
}

struct RunRecord {
    std::string treatment;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::size_t evaluations = 0;
    std::size_t filled = 0;
    std::optional<double> best_fitness;
    std::string error;
};

struct RunMetrics {
    std::string treatment;
    std::uint64_t seed = 0;
    MetricsReport metrics;
};

struct SignificanceRow {
    std::string a;
    std::string b;
    std::string metric;
    MannWhitneyResult test;
};

struct Report {
    std::vector<RunRecord> runs;
    std::vector<RunMetrics> metrics;
    std::vector<std::string> treatments; // in manifest order
    std::map<std::string, std::array<std::optional<double>, 4>> medians;
    std::vector<SignificanceRow> significance;
    std::uint64_t reference_digest = 0;
    std::size_t reference_cells = 0;
    std::string summary;

    /// Values of one metric for one treatment, in seed order; absent values skipped.
    std::vector<double> samples(const std::string& treatment, std::size_t metric) const
    {
        std::vector<double> out;
        for (const auto& m : metrics)
            if (m.treatment == treatment)
                if (auto v = metric_value(m.metrics, metric))
                    out.push_back(*v);
        return out;
    }

    const SignificanceRow* find(const std::string& a, const std::string& b, const std::string& metric) const
    {
        for (const auto& s : significance)
            if (s.metric == metric && ((s.a == a && s.b == b) || (s.a == b && s.b == a)))
                return &s;
        return nullptr;
    }
};

inline std::filesystem::path run_dir(const std::filesystem::path& exp, const std::string& treatment,
                                     std::uint64_t seed)
{
    return exp / treatment / ("seed_" + std::to_string(seed));
}

inline void write_runs_csv(const std::filesystem::path& path, const std::vector<RunRecord>& runs)
{
    auto out = io::open_out(path);
    out << "treatment,replicate,seed,status,evaluations,filled,best_fitness,error\n";
    for (const auto& r : runs)
        out << r.treatment << ',' << r.replicate << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ','
            << r.evaluations << ',' << r.filled << ',' << io::optional_real(r.best_fitness) << ','
            << io::quote(r.error) << '\n';
}

inline std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path)
{
    auto in = io::open_in(path);
    std::string line;
    std::getline(in, line);
    std::vector<RunRecord> runs;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = io::parse_csv_line(line);
        if (f.size() != 8)
            throw FormatError("runs.csv row needs 8 fields");
        RunRecord r;
        r.treatment = f[0];
        r.replicate = static_cast<std::size_t>(io::parse_int(f[1]));
        r.seed = static_cast<std::uint64_t>(io::parse_int(f[2]));
        r.ok = f[3] == "ok";
        r.evaluations = static_cast<std::size_t>(io::parse_int(f[4]));
        r.filled = static_cast<std::size_t>(io::parse_int(f[5]));
        r.best_fitness = io::parse_optional_double(f[6]);
        r.error = f[7];
        runs.push_back(std::move(r));
    }
    return runs;
}

inline std::string format_metric(const std::optional<double>& v)
{
    if (!v)
        return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << *v;
    return s.str();
}

inline std::string format_p(double p)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", p);
    return buf;
}

/// Recomputes metrics for every successful run of an experiment directory
/// and writes metrics.csv, significance.csv, reference.json and summary.txt.
inline Report report(const std::filesystem::path& dir)
{
    Report rep;
    rep.runs = read_runs_csv(dir / "runs.csv");
    for (const auto& r : rep.runs)
        if (std::find(rep.treatments.begin(), rep.treatments.end(), r.treatment) == rep.treatments.end())
            rep.treatments.push_back(r.treatment);

    std::vector<DenseMap> maps;
    std::vector<const RunRecord*> contributing;
    for (const auto& r : rep.runs) {
        if (!r.ok)
            continue;
        maps.push_back(io::read_archive_table(run_dir(dir, r.treatment, r.seed) / "archive.csv").dense_map());
        contributing.push_back(&r);
        if (maps.back().shape != maps.front().shape)
            throw FormatError("runs in '" + dir.string() + "' have different map resolutions");
    }

    std::ostringstream summary;
    summary << "experiment: " << dir.filename().string() << '\n';
    summary << "runs: " << rep.runs.size() << " (" << maps.size() << " successful)\n";
    for (const auto& r : rep.runs)
        if (!r.ok)
            summary << "warning: excluded failed run " << r.treatment << " seed " << r.seed << ": " << r.error
                    << '\n';

    if (!maps.empty()) {
        const ReferenceMap ref = reference_map(maps);
        rep.reference_digest = ref.digest();
        rep.reference_cells = ref.present();
        for (std::size_t i = 0; i < maps.size(); ++i) {
            MetricsReport m = evaluate_map(maps[i], ref);
            m.contributing_runs = {contributing[i]->treatment + "/seed_" + std::to_string(contributing[i]->seed)};
            m.reference_digest = rep.reference_digest;
            rep.metrics.push_back({contributing[i]->treatment, contributing[i]->seed, std::move(m)});
        }
        Json refj;
        char digest[32];
        std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(rep.reference_digest));
        refj["digest"] = digest;
        refj["resolution"] = ref.shape;
        refj["filled cells"] = ref.present();
        refj["max fitness"] = ref.max_fitness() ? Json(*ref.max_fitness()) : Json(nullptr);
        refj["contributing runs"] = Json::array();
        for (const auto* r : contributing)
            refj["contributing runs"].push_back(r->treatment + "/seed_" + std::to_string(r->seed));
        write_text(dir / "reference.json", refj.dump(2) + '\n');
        summary << "reference map: " << ref.present() << " filled cells, digest " << digest << '\n';
    }

    {
        auto out = io::open_out(dir / "metrics.csv");
        out << "treatment,seed";
        for (auto n : kMetricNames)
            out << ',' << n;
        out << '\n';
        for (const auto& m : rep.metrics) {
            out << m.treatment << ',' << m.seed;
            for (std::size_t k = 0; k < 4; ++k)
                out << ',' << io::optional_real(metric_value(m.metrics, k));
            out << '\n';
        }
    }

    summary << "\nmedians\n" << std::left << std::setw(24) << "treatment";
    for (auto n : kMetricNames)
        summary << std::setw(20) << n;
    summary << '\n';
    for (const auto& t : rep.treatments) {
        auto& row = rep.medians[t];
        summary << std::setw(24) << t;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto s = rep.samples(t, k);
            if (!s.empty())
                row[k] = median(s);
            summary << std::setw(20) << format_metric(row[k]);
        }
        summary << '\n';
    }

    auto sig = io::open_out(dir / "significance.csv");
    sig << "treatment_a,treatment_b,metric,u,p,method\n";
    if (rep.treatments.size() < 2) {
        summary << "\nsignificance: needs at least two treatments\n";
    } else {
        summary << "\ntwo-tailed Mann-Whitney U\n";
        for (std::size_t i = 0; i < rep.treatments.size(); ++i)
            for (std::size_t j = i + 1; j < rep.treatments.size(); ++j)
                for (std::size_t k = 0; k < 4; ++k) {
                    const auto a = rep.samples(rep.treatments[i], k);
                    const auto b = rep.samples(rep.treatments[j], k);
                    if (a.empty() || b.empty())
                        continue;
                    SignificanceRow row{rep.treatments[i], rep.treatments[j], kMetricNames[k], mann_whitney_u(a, b)};
                    sig << row.a << ',' << row.b << ',' << row.metric << ',' << io::format_real(row.test.u) << ','
                        << io::format_real(row.test.p) << ',' << (row.test.exact ? "exact" : "normal") << '\n';
                    summary << "  " << row.a << " vs " << row.b << "  " << row.metric << "  U=" << row.test.u
                            << "  p=" << format_p(row.test.p) << '\n';
                    rep.significance.push_back(std::move(row));
                }
    }
    rep.summary = summary.str();
    write_text(dir / "summary.txt", rep.summary);
    return rep;
}

// ---------------------------------------------------------------- orchestration

using RunExecutor = std::function<RunOutput(const RunConfig&)>;

struct ExperimentOptions {
    std::optional<std::size_t> parallel_replicates; // overrides the manifest
    std::optional<std::size_t> threads;             // evaluation threads per run
    RunExecutor executor;                           // defaults to execute()
    std::function<void(const RunRecord&)> on_run_finished;
};

inline std::string utc_timestamp()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Runs every (treatment, replicate) pair into `dir`, then writes the report.
/// A run that throws is recorded as failed and left out of the statistics.
inline Report run_experiment(const ExperimentManifest& manifest, const std::filesystem::path& dir,
                             const ExperimentOptions& options = {})
{
    const std::string started = utc_timestamp();
    std::filesystem::create_directories(dir);
    write_text(dir / "effective_manifest.json", effective_manifest(manifest).dump(2) + '\n');

    struct Job {
        const Treatment* treatment;
        std::size_t replicate;
    };
    std::vector<Job> jobs;
    for (const auto& t : manifest.treatments)
        for (std::size_t r = 0; r < t.replicates; ++r)
            jobs.push_back({&t, r});

    std::vector<RunRecord> records(jobs.size());
    std::mutex progress;
    const RunExecutor exec = options.executor ? options.executor : RunExecutor(execute);
    parallel_for(jobs.size(), options.parallel_replicates.value_or(manifest.parallel_replicates),
                 [&](std::size_t i) {
                     const Job& job = jobs[i];
                     RunConfig cfg = job.treatment->run;
                     cfg.seed = cfg.engine.seed = manifest.base_seed + job.replicate;
                     if (options.threads)
                         cfg.engine.threads = cfg.control.threads = *options.threads;
                     RunRecord& rec = records[i];
                     rec.treatment = job.treatment->name;
                     rec.replicate = job.replicate;
                     rec.seed = cfg.seed;
                     const auto out_dir = run_dir(dir, rec.treatment, rec.seed);
                     try {
                         const RunOutput out = exec(cfg);
                         write_run_dir(out_dir, cfg, out);
                         rec.ok = true;
                         rec.evaluations = out.log.evaluations;
                         rec.filled = out.filled;
                         rec.best_fitness = out.best_fitness;
                     } catch (const std::exception& e) {
                         rec.ok = false;
                         rec.error = e.what();
                         std::error_code ec;
                         std::filesystem::create_directories(out_dir, ec);
                         Json status{{"status", "failed"}, {"seed", rec.seed}, {"error", rec.error}};
                         std::ofstream(out_dir / "status.json") << status.dump(2) << '\n';
                     }
                     if (options.on_run_finished) {
                         std::lock_guard lock(progress);
                         options.on_run_finished(rec);
                     }
                 });

    write_runs_csv(dir / "runs.csv", records);
    Report rep = report(dir);
    Json meta{{"started", started},
              {"finished", utc_timestamp()},
              {"hardware threads", std::thread::hardware_concurrency()}};
    write_text(dir / "metadata.json", meta.dump(2) + '\n');
    return rep;
}

} // namespace mapelites
