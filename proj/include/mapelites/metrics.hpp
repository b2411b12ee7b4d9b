#pragma once

// Map-quality criteria measured against a cross-run reference map.
//
// The reference M holds, per cell, the best fitness any contributing map
// reached. Reliability and precision average m/M ratios; cells whose best
// known fitness is <= 0 are left out of both the sums and the counts because
// the ratio is undefined there. Coverage counts every reference cell.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "archive.hpp"
#include "errors.hpp"

namespace mapelites {

struct ReferenceMap {
    Resolution shape;
    std::vector<std::optional<double>> best;

    std::size_t present() const noexcept
    {
        return static_cast<std::size_t>(std::count_if(best.begin(), best.end(),
                                                      [](const auto& c) { return c.has_value(); }));
    }

    std::optional<double> max_fitness() const
    {
        std::optional<double> out;
        for (const auto& c : best)
            if (c && (!out || *c > *out))
                out = *c;
        return out;
    }

    /// FNV-1a over shape and cell values; identifies the reference used by a report.
    std::uint64_t digest() const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](const void* data, std::size_t len) {
            const auto* p = static_cast<const unsigned char*>(data);
            for (std::size_t i = 0; i < len; ++i) {
                h ^= p[i];
                h *= 0x100000001b3ULL;
            }
        };
        for (auto s : shape)
            mix(&s, sizeof s);
        for (const auto& c : best) {
            const unsigned char tag = c.has_value();
            mix(&tag, 1);
            if (c) {
                const double v = *c;
                mix(&v, sizeof v);
            }
        }
        return h;
    }

    bool operator==(const ReferenceMap&) const = default;
};

inline ReferenceMap reference_map(std::span<const DenseMap> maps)
{
    if (maps.empty())
        throw std::invalid_argument("reference_map: no maps");
    ReferenceMap ref;
    ref.shape = maps.front().shape;
    ref.best.assign(maps.front().cells.size(), std::nullopt);
    for (const auto& m : maps) {
        if (m.shape != ref.shape || m.cells.size() != ref.best.size())
            throw std::invalid_argument("reference_map: resolution mismatch");
        for (std::size_t i = 0; i < m.cells.size(); ++i)
            if (m.cells[i] && (!ref.best[i] || *m.cells[i] > *ref.best[i]))
                ref.best[i] = m.cells[i];
    }
    return ref;
}

namespace detail {

inline void check_shape(const DenseMap& m, const ReferenceMap& ref)
{
    if (m.shape != ref.shape || m.cells.size() != ref.best.size())
        throw std::invalid_argument("map and reference map differ in resolution");
}

} // namespace detail

/// Mean over reference cells of m/M, counting cells m left empty as 0.
inline double global_reliability(const DenseMap& m, const ReferenceMap& ref)
{
    detail::check_shape(m, ref);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.best.size(); ++i) {
        if (!ref.best[i] || *ref.best[i] <= 0.0)
            continue;
        ++n;
        if (m.cells[i])
            sum += *m.cells[i] / *ref.best[i];
    }
    if (n == 0)
        throw std::invalid_argument("global_reliability: reference map has no positive cells");
    return sum / static_cast<double>(n);
}

/// Mean of m/M over the cells m filled; absent for an empty map.
inline std::optional<double> precision(const DenseMap& m, const ReferenceMap& ref)
{
    detail::check_shape(m, ref);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.best.size(); ++i) {
        if (!m.cells[i] || !ref.best[i] || *ref.best[i] <= 0.0)
            continue;
        ++n;
        sum += *m.cells[i] / *ref.best[i];
    }
    if (n == 0)
        return std::nullopt;
    return sum / static_cast<double>(n);
}

inline double coverage(const DenseMap& m, const ReferenceMap& ref)
{
    detail::check_shape(m, ref);
    const std::size_t attainable = ref.present();
    if (attainable == 0)
        throw std::invalid_argument("coverage: reference map is empty");
    return static_cast<double>(m.filled()) / static_cast<double>(attainable);
}

inline std::optional<double> global_performance(const DenseMap& m, const ReferenceMap& ref)
{
    detail::check_shape(m, ref);
    std::optional<double> best;
    for (const auto& c : m.cells)
        if (c && (!best || *c > *best))
            best = c;
    const auto top = ref.max_fitness();
    if (!best || !top || *top <= 0.0)
        return std::nullopt;
    return *best / *top;
}

struct MetricsReport {
    std::optional<double> global_performance;
    std::optional<double> global_reliability;
    std::optional<double> precision;
    std::optional<double> coverage;
    std::vector<std::string> contributing_runs;
    std::uint64_t reference_digest = 0;
};

inline MetricsReport evaluate_map(const DenseMap& m, const ReferenceMap& ref)
{
    MetricsReport r;
    r.global_performance = global_performance(m, ref);
    r.global_reliability = global_reliability(m, ref);
    r.precision = precision(m, ref);
    r.coverage = coverage(m, ref);
    r.reference_digest = ref.digest();
    return r;
}

} // namespace mapelites
