#pragma once

// File formats.
//
// archive.csv         cell_idx_0..,desc_0..,fitness,birth_iteration,id,parent_id,genome
//                     one row per occupied cell in lexicographic cell order; the
//                     genome column is the domain's text encoding, always quoted.
// archive.space.json  bounds, resolution and labels of the archive's feature space.
// runlog.csv          one row per batch (or control generation).
// resolution_changes.csv
// lineage.csv         every candidate that entered the archive, with its parent.
//
// Reals are written with 17 significant digits so they read back exactly.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "archive.hpp"
#include "domains/domain.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "lineage.hpp"

namespace mapelites::io {

using detail::format_real;

inline std::vector<std::string> parse_csv_line(std::string_view line)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted)
        throw FormatError("unterminated quoted CSV field");
    fields.push_back(std::move(field));
    return fields;
}

inline std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline double parse_double(const std::string& s)
{
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw FormatError("not a number: '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& s)
{
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        throw FormatError("not an integer: '" + s + "'");
    return v;
}

inline std::optional<double> parse_optional_double(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    return parse_double(s);
}

inline std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

inline std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw NotFoundError("cannot read '" + path.string() + "'");
    return in;
}

inline std::string resolution_string(const Resolution& r) { return mapelites::detail::resolution_string(r); }

inline Resolution parse_resolution(const std::string& s)
{
    Resolution r;
    for (auto part : mapelites::detail::split(s, 'x'))
        r.push_back(static_cast<std::size_t>(parse_int(std::string(part))));
    return r;
}

// ---------------------------------------------------------------- space

inline std::filesystem::path space_path(const std::filesystem::path& archive_csv)
{
    auto p = archive_csv;
    p.replace_extension(".space.json");
    return p;
}

inline nlohmann::json space_to_json(const FeatureSpace& space)
{
    nlohmann::json j;
    j["bounds"] = nlohmann::json::array();
    for (const auto& b : space.bounds())
        j["bounds"].push_back({b.min, b.max});
    j["resolution"] = space.resolution();
    j["labels"] = space.labels();
    return j;
}

inline FeatureSpace space_from_json(const nlohmann::json& j)
{
    try {
        std::vector<Interval> bounds;
        for (const auto& b : j.at("bounds"))
            bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
        auto labels = j.contains("labels") ? j.at("labels").get<std::vector<std::string>>()
                                           : std::vector<std::string>{};
        return FeatureSpace(std::move(bounds), j.at("resolution").get<Resolution>(), {}, std::move(labels));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad feature-space file: ") + e.what());
    }
}

inline void write_space(const std::filesystem::path& path, const FeatureSpace& space)
{
    auto out = open_out(path);
    out << space_to_json(space).dump(2) << '\n';
}

inline FeatureSpace read_space(const std::filesystem::path& path)
{
    auto in = open_in(path);
    try {
        return space_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("cannot parse '" + path.string() + "': " + e.what());
    }
}

// ---------------------------------------------------------------- archive

struct ArchiveRow {
    CellIndex cell;
    std::vector<double> descriptor;
    double fitness = 0.0;
    std::int64_t birth_iteration = 0;
    std::uint64_t id = 0;
    std::optional<std::uint64_t> parent_id;
    std::string genome;
};

/// Archive contents without decoded genomes; enough for metrics and heatmaps.
struct ArchiveTable {
    FeatureSpace space;
    std::vector<ArchiveRow> rows;

    DenseMap dense_map() const
    {
        DenseMap m;
        m.shape = space.resolution();
        m.cells.assign(space.cell_count(), std::nullopt);
        for (const auto& r : rows)
            m.cells[space.flat(r.cell)] = r.fitness;
        return m;
    }

    std::vector<std::uint64_t> ids() const
    {
        std::vector<std::uint64_t> out;
        for (const auto& r : rows)
            out.push_back(r.id);
        return out;
    }
};

inline std::string archive_header(std::size_t dims)
{
    std::string h;
    for (std::size_t d = 0; d < dims; ++d)
        h += "cell_idx_" + std::to_string(d) + ',';
    for (std::size_t d = 0; d < dims; ++d)
        h += "desc_" + std::to_string(d) + ',';
    return h + "fitness,birth_iteration,id,parent_id,genome";
}

template <class Genome, class Encode>
void write_archive_csv(std::ostream& out, const Archive<Genome>& archive, Encode&& encode)
{
    const auto& space = archive.space();
    out << archive_header(space.dims()) << '\n';
    const auto cells = archive.cells();
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
        if (!cells[idx])
            continue;
        const auto& e = *cells[idx];
        const CellIndex c = space.unflat(idx);
        for (auto v : c.coords)
            out << v << ',';
        for (auto v : e.descriptor)
            out << format_real(v) << ',';
        out << format_real(e.fitness) << ',' << e.birth_iteration << ',' << e.id << ',';
        if (e.parent_id)
            out << *e.parent_id;
        out << ',' << quote(encode(e.genome)) << '\n';
    }
}

template <Domain D>
std::string archive_csv_string(const Archive<typename D::Genome>& archive, const D& domain)
{
    std::ostringstream out;
    write_archive_csv(out, archive, [&](const auto& g) { return domain.encode(g); });
    return out.str();
}

/// Writes archive.csv plus its feature-space sidecar.
template <Domain D>
void save_archive(const std::filesystem::path& path, const Archive<typename D::Genome>& archive, const D& domain)
{
    {
        auto out = open_out(path);
        write_archive_csv(out, archive, [&](const auto& g) { return domain.encode(g); });
    }
    write_space(space_path(path), archive.space());
}

inline std::vector<ArchiveRow> parse_archive_rows(std::istream& in, std::size_t dims)
{
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("archive CSV is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != archive_header(dims))
        throw FormatError("archive CSV header does not match a " + std::to_string(dims) + "-dimensional space");
    std::vector<ArchiveRow> rows;
    const std::size_t expected = 2 * dims + 5;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto f = parse_csv_line(line);
        if (f.size() != expected)
            throw FormatError("archive row has " + std::to_string(f.size()) + " fields, expected " +
                              std::to_string(expected));
        ArchiveRow r;
        std::size_t k = 0;
        for (std::size_t d = 0; d < dims; ++d)
            r.cell.coords.push_back(static_cast<std::size_t>(parse_int(f[k++])));
        for (std::size_t d = 0; d < dims; ++d)
            r.descriptor.push_back(parse_double(f[k++]));
        r.fitness = parse_double(f[k++]);
        r.birth_iteration = parse_int(f[k++]);
        r.id = static_cast<std::uint64_t>(parse_int(f[k++]));
        if (!f[k].empty())
            r.parent_id = static_cast<std::uint64_t>(parse_int(f[k]));
        ++k;
        r.genome = f[k];
        rows.push_back(std::move(r));
    }
    return rows;
}

inline ArchiveTable read_archive_table(const std::filesystem::path& path)
{
    ArchiveTable t;
    t.space = read_space(space_path(path));
    auto in = open_in(path);
    t.rows = parse_archive_rows(in, t.space.dims());
    for (const auto& r : t.rows)
        if (!t.space.contains(r.cell))
            throw FormatError("archive row cell lies outside the feature space");
    return t;
}

/// Loads an archive, decoding genomes with the domain. Every row must land
/// in the cell it names.
template <Domain D>
Archive<typename D::Genome> load_archive(const std::filesystem::path& path, const D& domain)
{
    const ArchiveTable t = read_archive_table(path);
    Archive<typename D::Genome> archive(t.space);
    for (const auto& r : t.rows) {
        Elite<typename D::Genome> e;
        e.genome = domain.decode(r.genome);
        e.fitness = r.fitness;
        e.descriptor = r.descriptor;
        e.birth_iteration = r.birth_iteration;
        e.id = r.id;
        e.parent_id = r.parent_id;
        const auto res = archive.try_insert(std::move(e));
        if (res.outcome != InsertOutcome::InsertedEmpty || res.cell != r.cell)
            throw FormatError("archive row for id " + std::to_string(r.id) + " does not match its cell");
    }
    return archive;
}

// ---------------------------------------------------------------- run log

inline void write_run_log(const std::filesystem::path& path, const RunLog& log)
{
    auto out = open_out(path);
    out << "iteration,evaluations,filled_count,best_fitness,clamped,invalid,inserted,resolution\n";
    for (const auto& b : log.batches)
        out << b.iteration << ',' << b.evaluations << ',' << b.filled << ',' << optional_real(b.best_fitness) << ','
            << b.clamped << ',' << b.invalid << ',' << b.inserted << ',' << resolution_string(b.resolution) << '\n';
}

inline std::vector<BatchRecord> read_run_log(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::vector<BatchRecord> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = parse_csv_line(line);
        if (f.size() != 8)
            throw FormatError("run log row needs 8 fields");
        BatchRecord b;
        b.iteration = parse_int(f[0]);
        b.evaluations = static_cast<std::size_t>(parse_int(f[1]));
        b.filled = static_cast<std::size_t>(parse_int(f[2]));
        b.best_fitness = parse_optional_double(f[3]);
        b.clamped = static_cast<std::size_t>(parse_int(f[4]));
        b.invalid = static_cast<std::size_t>(parse_int(f[5]));
        b.inserted = static_cast<std::size_t>(parse_int(f[6]));
        b.resolution = parse_resolution(f[7]);
        out.push_back(std::move(b));
    }
    return out;
}

inline void write_resolution_changes(const std::filesystem::path& path, const RunLog& log)
{
    auto out = open_out(path);
    out << "iteration,from,to,elites_before,elites_after\n";
    for (const auto& c : log.resolution_changes)
        out << c.iteration << ',' << resolution_string(c.from) << ',' << resolution_string(c.to) << ','
            << c.elites_before << ',' << c.elites_after << '\n';
}

// ---------------------------------------------------------------- lineage

inline void write_lineage(const std::filesystem::path& path, std::span<const LineageRecord> records, std::size_t dims)
{
    auto out = open_out(path);
    out << "id,parent_id,birth_iteration,fitness,parent_fitness";
    for (std::size_t d = 0; d < dims; ++d)
        out << ",desc_" << d;
    for (std::size_t d = 0; d < dims; ++d)
        out << ",parent_desc_" << d;
    out << '\n';
    for (const auto& r : records) {
        out << r.id << ',';
        if (r.parent_id)
            out << *r.parent_id;
        out << ',' << r.birth_iteration << ',' << format_real(r.fitness) << ',' << optional_real(r.parent_fitness);
        for (auto v : r.descriptor)
            out << ',' << format_real(v);
        for (std::size_t d = 0; d < dims; ++d) {
            out << ',';
            if (r.parent_descriptor)
                out << format_real((*r.parent_descriptor)[d]);
        }
        out << '\n';
    }
}

inline std::vector<LineageRecord> read_lineage(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("lineage file is empty");
    const auto header = parse_csv_line(line);
    if (header.size() < 5 || (header.size() - 5) % 2 != 0)
        throw FormatError("bad lineage header");
    const std::size_t dims = (header.size() - 5) / 2;
    std::vector<LineageRecord> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = parse_csv_line(line);
        if (f.size() != header.size())
            throw FormatError("lineage row has the wrong number of fields");
        LineageRecord r;
        r.id = static_cast<std::uint64_t>(parse_int(f[0]));
        if (!f[1].empty())
            r.parent_id = static_cast<std::uint64_t>(parse_int(f[1]));
        r.birth_iteration = parse_int(f[2]);
        r.fitness = parse_double(f[3]);
        r.parent_fitness = parse_optional_double(f[4]);
        for (std::size_t d = 0; d < dims; ++d)
            r.descriptor.push_back(parse_double(f[5 + d]));
        if (!f[5 + dims].empty()) {
            std::vector<double> p;
            for (std::size_t d = 0; d < dims; ++d)
                p.push_back(parse_double(f[5 + dims + d]));
            r.parent_descriptor = std::move(p);
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline void write_arrows(std::ostream& out, const ArrowExport& arrows, std::size_t dims)
{
    out << "elite_id";
    for (std::size_t d = 0; d < dims; ++d)
        out << ",parent_desc_" << d;
    for (std::size_t d = 0; d < dims; ++d)
        out << ",elite_desc_" << d;
    out << ",parent_fitness,elite_fitness\n";
    for (const auto& a : arrows.arrows) {
        out << a.elite_id;
        for (auto v : a.parent_descriptor)
            out << ',' << format_real(v);
        for (auto v : a.elite_descriptor)
            out << ',' << format_real(v);
        out << ',' << format_real(a.parent_fitness) << ',' << format_real(a.elite_fitness) << '\n';
    }
}

inline void write_trace_header(std::ostream& out, std::size_t dims)
{
    out << "trace_id,step,id,birth_iteration";
    for (std::size_t d = 0; d < dims; ++d)
        out << ",desc_" << d;
    out << ",fitness\n";
}

inline void write_trace(std::ostream& out, std::uint64_t trace_id, std::span<const LineageRecord> chain)
{
    for (std::size_t step = 0; step < chain.size(); ++step) {
        const auto& r = chain[step];
        out << trace_id << ',' << step << ',' << r.id << ',' << r.birth_iteration;
        for (auto v : r.descriptor)
            out << ',' << format_real(v);
        out << ',' << format_real(r.fitness) << '\n';
    }
}

} // namespace mapelites::io
