#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace mapelites {

/// One candidate that entered the archive. Generation-0 elites (from the
/// random initial batch) have no parent.
struct LineageRecord {
    std::uint64_t id = 0;
    std::optional<std::uint64_t> parent_id;
    std::int64_t birth_iteration = 0;
    std::vector<double> descriptor;
    double fitness = 0.0;
    std::optional<std::vector<double>> parent_descriptor;
    std::optional<double> parent_fitness;

    bool operator==(const LineageRecord&) const = default;
};

struct LineageArrow {
    std::uint64_t elite_id = 0;
    std::vector<double> parent_descriptor;
    std::vector<double> elite_descriptor;
    double parent_fitness = 0.0;
    double elite_fitness = 0.0;
};

struct ArrowExport {
    std::vector<LineageArrow> arrows;
    std::size_t omitted = 0; // sampled elites without a parent
    std::size_t sampled = 0;
};

/// Parent-to-elite arrows for the given final elites, optionally for a
/// uniform random subset of `sample` of them.
inline ArrowExport export_lineage_arrows(std::span<const LineageRecord> records,
                                         std::vector<std::uint64_t> elite_ids,
                                         std::optional<std::size_t> sample = std::nullopt,
                                         std::uint64_t seed = 0)
{
    std::unordered_map<std::uint64_t, const LineageRecord*> by_id;
    for (const auto& r : records)
        by_id[r.id] = &r;

    std::sort(elite_ids.begin(), elite_ids.end());
    if (sample && *sample < elite_ids.size()) {
        Rng rng = substream(seed, 0, 0);
        std::vector<std::uint64_t> picked;
        std::sample(elite_ids.begin(), elite_ids.end(), std::back_inserter(picked), *sample, rng);
        elite_ids = std::move(picked);
    }

    ArrowExport out;
    out.sampled = elite_ids.size();
    for (auto id : elite_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw NotFoundError("elite " + std::to_string(id) + " has no lineage record");
        const LineageRecord& r = *it->second;
        if (!r.parent_id || !r.parent_descriptor || !r.parent_fitness) {
            ++out.omitted;
            continue;
        }
        out.arrows.push_back({r.id, *r.parent_descriptor, r.descriptor, *r.parent_fitness, r.fitness});
    }
    return out;
}

/// Ancestor chain of an elite, ordered from its generation-0 ancestor to the elite itself.
inline std::vector<LineageRecord> export_lineage_trace(std::span<const LineageRecord> records, std::uint64_t id)
{
    std::unordered_map<std::uint64_t, const LineageRecord*> by_id;
    for (const auto& r : records)
        by_id[r.id] = &r;

    std::vector<LineageRecord> chain;
    std::optional<std::uint64_t> cursor = id;
    while (cursor) {
        const auto it = by_id.find(*cursor);
        if (it == by_id.end())
            throw NotFoundError("no lineage record for id " + std::to_string(*cursor));
        chain.push_back(*it->second);
        if (chain.size() > records.size())
            throw FormatError("lineage records contain a cycle");
        cursor = it->second->parent_id;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

} // namespace mapelites
