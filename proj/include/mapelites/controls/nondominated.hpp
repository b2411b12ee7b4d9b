#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mapelites {

using Objectives = std::vector<double>;

/// a dominates b (maximization): no worse in every objective, better in one.
inline bool dominates(const Objectives& a, const Objectives& b)
{
    bool better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i])
            return false;
        if (a[i] > b[i])
            better = true;
    }
    return better;
}

/// Fast non-dominated sort. Returns fronts of point indices, best first;
/// indices within a front are ascending.
inline std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Objectives> points)
{
    const std::size_t n = points.size();
    for (const auto& p : points)
        if (p.size() != points.front().size())
            throw std::invalid_argument("nondominated_sort: objective vectors differ in length");

    std::vector<std::vector<std::size_t>> dominated_by(n); // i dominates these
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated_by[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(points[j], points[i])) {
                dominated_by[j].push_back(i);
                ++domination_count[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (domination_count[i] == 0)
            current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated_by[i])
                if (--domination_count[j] == 0)
                    next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

/// Crowding distance of each member of one front (boundary points get +inf).
inline std::vector<double> crowding_distance(std::span<const Objectives> points, std::span<const std::size_t> front)
{
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0)
        return dist;
    const std::size_t m = points[front[0]].size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return points[front[a]][k] < points[front[b]][k]; });
        const double lo = points[front[order.front()]][k];
        const double hi = points[front[order.back()]][k];
        dist[order.front()] = dist[order.back()] = std::numeric_limits<double>::infinity();
        if (hi <= lo)
            continue;
        for (std::size_t r = 1; r + 1 < n; ++r)
            dist[order[r]] += (points[front[order[r + 1]]][k] - points[front[order[r - 1]]][k]) / (hi - lo);
    }
    return dist;
}

/// Rank (front number) and crowding distance for every point.
struct RankedPopulation {
    std::vector<std::size_t> rank;
    std::vector<double> crowding;
    std::vector<std::vector<std::size_t>> fronts;

    /// Crowded-comparison order: lower rank, then larger crowding distance.
    bool better(std::size_t a, std::size_t b) const
    {
        if (rank[a] != rank[b])
            return rank[a] < rank[b];
        return crowding[a] > crowding[b];
    }
};

inline RankedPopulation rank_population(std::span<const Objectives> points)
{
    RankedPopulation r;
    r.fronts = nondominated_sort(points);
    r.rank.assign(points.size(), 0);
    r.crowding.assign(points.size(), 0.0);
    for (std::size_t f = 0; f < r.fronts.size(); ++f) {
        const auto d = crowding_distance(points, r.fronts[f]);
        for (std::size_t i = 0; i < r.fronts[f].size(); ++i) {
            r.rank[r.fronts[f][i]] = f;
            r.crowding[r.fronts[f][i]] = d[i];
        }
    }
    return r;
}

/// NSGA-II environmental selection: whole fronts while they fit, then the
/// most crowded-apart members of the first front that does not.
inline std::vector<std::size_t> select_survivors(const RankedPopulation& ranked, std::size_t count)
{
    std::vector<std::size_t> out;
    out.reserve(count);
    for (const auto& front : ranked.fronts) {
        if (out.size() + front.size() <= count) {
            out.insert(out.end(), front.begin(), front.end());
            continue;
        }
        std::vector<std::size_t> rest(front.begin(), front.end());
        std::stable_sort(rest.begin(), rest.end(),
                         [&](std::size_t a, std::size_t b) { return ranked.crowding[a] > ranked.crowding[b]; });
        rest.resize(count - out.size());
        out.insert(out.end(), rest.begin(), rest.end());
        break;
    }
    return out;
}

} // namespace mapelites
