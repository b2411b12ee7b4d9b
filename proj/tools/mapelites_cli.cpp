// mapelites: run, experiment, heatmap, lineage, report.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <mapelites/experiment.hpp>
#include <mapelites/heatmap.hpp>

namespace fs = std::filesystem;
using namespace mapelites;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

/// Writes to `path`, or to stdout when the path is empty or "-".
template <class F>
void emit(const std::string& path, F&& write)
{
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    auto out = io::open_out(path);
    write(out);
}

int cmd_run(const std::string& config_path, std::string out, std::optional<std::size_t> threads,
            std::optional<std::uint64_t> seed)
{
    RunConfig cfg = load_run_config(config_path);
    if (threads)
        cfg.engine.threads = cfg.control.threads = *threads;
    if (seed)
        cfg.seed = cfg.engine.seed = *seed;
    if (cfg.engine.threads < 1)
        throw ConfigError("threads", "must be >= 1");
    const fs::path dir = out.empty() ? default_output_root() / fs::path(config_path).stem() : fs::path(out);
    const RunOutput result = execute(cfg);
    write_run_dir(dir, cfg, result);
    std::cout << to_string(cfg.algorithm) << " on " << cfg.domain.name() << ", seed " << cfg.seed << ": "
              << result.log.evaluations << " evaluations, " << result.filled << " cells filled, best fitness "
              << (result.best_fitness ? io::format_real(*result.best_fitness) : std::string("-")) << '\n'
              << "wrote " << dir.string() << '\n';
    return 0;
}

int cmd_experiment(const std::string& manifest_path, std::string out, std::optional<std::size_t> parallel,
                   std::optional<std::size_t> threads)
{
    const ExperimentManifest m = load_manifest(manifest_path);
    fs::path dir = out;
    if (dir.empty())
        dir = default_output_root() / (m.output ? fs::path(*m.output) : fs::path(manifest_path).stem());
    ExperimentOptions options;
    options.parallel_replicates = parallel;
    options.threads = threads;
    options.on_run_finished = [](const RunRecord& r) {
        std::cerr << (r.ok ? "done   " : "FAILED ") << r.treatment << " seed " << r.seed;
        if (!r.ok)
            std::cerr << ": " << r.error;
        std::cerr << '\n';
    };
    const Report rep = run_experiment(m, dir, options);
    std::cout << rep.summary << "wrote " << dir.string() << '\n';
    return 0;
}

int cmd_heatmap(const std::string& archive, const std::string& format, const std::vector<std::string>& slices,
                const std::string& out)
{
    if (format != "csv" && format != "pgm")
        throw ConfigError("format", "must be csv or pgm");
    const io::ArchiveTable table = io::read_archive_table(archive);
    const Slice slice = parse_slice(slices);
    const Heatmap h = make_heatmap(table, slice);
    emit(out, [&](std::ostream& os) {
        if (format == "csv")
            write_heatmap_csv(os, h);
        else
            write_heatmap_pgm(os, h);
    });
    if (!out.empty() && out != "-")
        write_text(out + ".meta.json", heatmap_meta(table, h, slice).dump(2) + '\n');
    return 0;
}

int cmd_lineage(const std::string& run, bool arrows, std::optional<std::uint64_t> trace,
                std::optional<std::size_t> sample, std::uint64_t seed, const std::string& out)
{
    const fs::path dir(run);
    const auto records = io::read_lineage(dir / "lineage.csv");
    const io::ArchiveTable table = io::read_archive_table(dir / "archive.csv");
    const std::size_t dims = table.space.dims();
    if (trace) {
        const auto chain = export_lineage_trace(records, *trace);
        emit(out, [&](std::ostream& os) {
            io::write_trace_header(os, dims);
            io::write_trace(os, *trace, chain);
        });
        return 0;
    }
    (void)arrows; // arrows are the default view
    const ArrowExport ex = export_lineage_arrows(records, table.ids(), sample, seed);
    emit(out, [&](std::ostream& os) { io::write_arrows(os, ex, dims); });
    std::cerr << ex.sampled << " elites sampled, " << ex.arrows.size() << " arrows, " << ex.omitted
              << " omitted (no parent)\n";
    return 0;
}

int cmd_report(const std::string& dir)
{
    std::cout << report(dir).summary;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"MAP-Elites runs, experiments and exports"};
    app.require_subcommand(1);

    std::string path, out, format = "csv";
    std::optional<std::size_t> threads, parallel, sample;
    std::optional<std::uint64_t> seed, trace;
    std::uint64_t sample_seed = 0;
    std::vector<std::string> slices;
    bool arrows = false;

    auto* run = app.add_subcommand("run", "Run one configuration");
    run->add_option("config", path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Run directory (default: $MAPELITES_OUTPUT_ROOT/<config name>)");
    run->add_option("--threads", threads, "Evaluation threads");
    run->add_option("--seed", seed, "Override the configured seed");

    auto* exp = app.add_subcommand("experiment", "Run every treatment and replicate of a manifest");
    exp->add_option("manifest", path, "Experiment manifest (JSON)")->required()->check(CLI::ExistingFile);
    exp->add_option("--out", out, "Experiment directory");
    exp->add_option("--parallel", parallel, "Replicates run concurrently");
    exp->add_option("--threads", threads, "Evaluation threads per run");

    auto* heat = app.add_subcommand("heatmap", "Export an archive as a heatmap");
    heat->add_option("archive", path, "archive.csv")->required()->check(CLI::ExistingFile);
    heat->add_option("--format", format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
    heat->add_option("--slice", slices, "Fix dimension d at index i (d=i); repeatable");
    heat->add_option("--out", out, "Output file (default: stdout)");

    auto* lin = app.add_subcommand("lineage", "Export lineage arrows or an ancestor trace");
    lin->add_option("run", path, "Run directory")->required()->check(CLI::ExistingDirectory);
    auto* arrows_flag = lin->add_flag("--arrows", arrows, "Parent-to-elite arrows (default)");
    lin->add_option("--trace", trace, "Ancestor chain of this elite id")->excludes(arrows_flag);
    lin->add_option("--sample", sample, "Random subset of this many elites");
    lin->add_option("--seed", sample_seed, "Seed for --sample");
    lin->add_option("--out", out, "Output file (default: stdout)");

    auto* rep = app.add_subcommand("report", "Recompute metrics and significance for an experiment");
    rep->add_option("experiment", path, "Experiment directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed())
            return cmd_run(path, out, threads, seed);
        if (exp->parsed())
            return cmd_experiment(path, out, parallel, threads);
        if (heat->parsed())
            return cmd_heatmap(path, format, slices, out);
        if (lin->parsed())
            return cmd_lineage(path, arrows, trace, sample, sample_seed, out);
        if (rep->parsed())
            return cmd_report(path);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
