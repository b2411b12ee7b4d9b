#pragma once

// Heatmaps of an archive's fitness over two feature dimensions.
//
// CSV: one line per row of the picture. The first line is the highest index
// of the vertical dimension, so the vertical axis increases upward; columns
// run along the horizontal dimension from index 0. Raw fitness values,
// `nan` for unfilled cells.
//
// PGM: plain P2 grayscale, maxval 255. Filled cells map linearly from
// [min, max] filled fitness onto [1, 255]; unfilled cells are 0. When every
// filled cell has the same fitness they all get 255.
//
// A `.meta.json` sidecar records axes, resolution and the fitness scale.

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "io.hpp"

namespace mapelites {

struct Heatmap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::optional<double>> values; // row-major, top row first

    const std::optional<double>& at(std::size_t row, std::size_t col) const { return values[row * width + col]; }

    std::optional<double> min() const
    {
        std::optional<double> out;
        for (const auto& v : values)
            if (v && (!out || *v < *out))
                out = v;
        return out;
    }

    std::optional<double> max() const
    {
        std::optional<double> out;
        for (const auto& v : values)
            if (v && (!out || *v > *out))
                out = v;
        return out;
    }

    bool operator==(const Heatmap&) const = default;
};

using Slice = std::map<std::size_t, std::size_t>; // fixed index per sliced dimension

inline Slice parse_slice(const std::vector<std::string>& specs)
{
    Slice s;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ConfigError("slice", "expected d=i, got '" + spec + "'");
        try {
            const auto d = static_cast<std::size_t>(io::parse_int(spec.substr(0, eq)));
            const auto i = static_cast<std::size_t>(io::parse_int(spec.substr(eq + 1)));
            if (!s.emplace(d, i).second)
                throw ConfigError("slice", "dimension " + std::to_string(d) + " sliced twice");
        } catch (const FormatError&) {
            throw ConfigError("slice", "expected d=i, got '" + spec + "'");
        }
    }
    return s;
}

/// Dimensions left free after slicing, horizontal first.
inline std::vector<std::size_t> free_dims(const FeatureSpace& space, const Slice& slice)
{
    std::vector<std::size_t> free;
    for (const auto& [d, i] : slice) {
        if (d >= space.dims())
            throw ConfigError("slice", "dimension " + std::to_string(d) + " does not exist");
        if (i >= space.resolution()[d])
            throw ConfigError("slice", "index " + std::to_string(i) + " is outside dimension " + std::to_string(d));
    }
    for (std::size_t d = 0; d < space.dims(); ++d)
        if (!slice.contains(d))
            free.push_back(d);
    if (free.size() > 2)
        throw ConfigError("slice", "the archive has " + std::to_string(space.dims()) +
                                       " feature dimensions; fix all but two with --slice d=i");
    return free;
}

inline Heatmap make_heatmap(const io::ArchiveTable& table, const Slice& slice = {})
{
    const auto& space = table.space;
    const auto free = free_dims(space, slice);
    Heatmap h;
    h.width = free.empty() ? 1 : space.resolution()[free[0]];
    h.height = free.size() < 2 ? 1 : space.resolution()[free[1]];
    h.values.assign(h.width * h.height, std::nullopt);
    for (const auto& row : table.rows) {
        bool in_slice = true;
        for (const auto& [d, i] : slice)
            in_slice = in_slice && row.cell.coords[d] == i;
        if (!in_slice)
            continue;
        const std::size_t x = free.empty() ? 0 : row.cell.coords[free[0]];
        const std::size_t y = free.size() < 2 ? 0 : row.cell.coords[free[1]];
        h.values[(h.height - 1 - y) * h.width + x] = row.fitness;
    }
    return h;
}

inline void write_heatmap_csv(std::ostream& out, const Heatmap& h)
{
    for (std::size_t r = 0; r < h.height; ++r) {
        for (std::size_t c = 0; c < h.width; ++c) {
            if (c)
                out << ',';
            const auto& v = h.at(r, c);
            out << (v ? io::format_real(*v) : std::string("nan"));
        }
        out << '\n';
    }
}

inline Heatmap read_heatmap_csv(std::istream& in)
{
    Heatmap h;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto fields = io::parse_csv_line(line);
        if (h.height == 0)
            h.width = fields.size();
        else if (fields.size() != h.width)
            throw FormatError("heatmap rows differ in length");
        for (const auto& f : fields) {
            const double v = io::parse_double(f);
            h.values.push_back(std::isnan(v) ? std::nullopt : std::optional<double>(v));
        }
        ++h.height;
    }
    return h;
}

/// Gray level of one cell: 0 unfilled, otherwise 1..255.
inline int gray_level(const std::optional<double>& v, double lo, double hi)
{
    if (!v)
        return 0;
    if (!(hi > lo))
        return 255;
    const double t = std::clamp((*v - lo) / (hi - lo), 0.0, 1.0);
    return 1 + static_cast<int>(std::lround(t * 254.0));
}

inline void write_heatmap_pgm(std::ostream& out, const Heatmap& h)
{
    const double lo = h.min().value_or(0.0);
    const double hi = h.max().value_or(0.0);
    out << "P2\n" << h.width << ' ' << h.height << "\n255\n";
    for (std::size_t r = 0; r < h.height; ++r) {
        for (std::size_t c = 0; c < h.width; ++c) {
            if (c)
                out << ' ';
            out << gray_level(h.at(r, c), lo, hi);
        }
        out << '\n';
    }
}

inline Json heatmap_meta(const io::ArchiveTable& table, const Heatmap& h, const Slice& slice)
{
    const auto free = free_dims(table.space, slice);
    Json j;
    auto axis = [&](std::size_t d) {
        const auto labels = table.space.labels();
        return Json{{"dimension", d},
                    {"label", d < labels.size() ? labels[d] : ""},
                    {"bounds", {table.space.bounds()[d].min, table.space.bounds()[d].max}},
                    {"resolution", table.space.resolution()[d]}};
    };
    j["horizontal"] = free.empty() ? Json(nullptr) : axis(free[0]);
    j["vertical"] = free.size() < 2 ? Json(nullptr) : axis(free[1]);
    j["slice"] = Json::object();
    for (const auto& [d, i] : slice)
        j["slice"][std::to_string(d)] = i;
    j["fitness min"] = h.min() ? Json(*h.min()) : Json(nullptr);
    j["fitness max"] = h.max() ? Json(*h.max()) : Json(nullptr);
    j["filled"] = std::count_if(h.values.begin(), h.values.end(), [](const auto& v) { return v.has_value(); });
    return j;
}

} // namespace mapelites
