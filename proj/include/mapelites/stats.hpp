#pragma once

// Two-sample Mann-Whitney U test.
//
// Ranks the pooled sample with midranks for ties and reports U for the first
// sample, U_a = R_a - n_a (n_a + 1) / 2. The two-tailed p-value is
//
//   * exact for small pooled sizes: the permutation distribution of the rank
//     sum is built by dynamic programming over the (doubled, hence integral)
//     midranks, counting size-n_a subsets by rank sum. Ties are handled
//     exactly because the DP runs over the observed midranks.
//   * otherwise the normal approximation with tie-corrected variance and a
//     0.5 continuity correction.
//
// p is clamped to (0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mapelites {

struct MannWhitneyResult {
    double u = 0.0;
    double p = 1.0;
    bool exact = false;
};

/// Pooled sizes at or below this use the exact permutation distribution.
inline constexpr std::size_t kMannWhitneyExactLimit = 12;

namespace detail {

struct RankedSamples {
    std::vector<double> midranks; // pooled order: a then b
    double rank_sum_a = 0.0;
    double tie_term = 0.0; // sum over tie groups of t^3 - t
};

inline RankedSamples rank_samples(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = a.size() + b.size();
    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    for (double v : pooled)
        if (std::isnan(v))
            throw std::invalid_argument("mann_whitney_u: NaN sample");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });

    RankedSamples r;
    r.midranks.assign(n, 0.0);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]])
            ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            r.midranks[order[k]] = mid;
        const double t = static_cast<double>(j - i + 1);
        r.tie_term += t * t * t - t;
        i = j + 1;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        r.rank_sum_a += r.midranks[i];
    return r;
}

inline void check_sizes(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: both samples need at least one value");
}

inline double clamp_p(double p)
{
    if (!(p > 0.0))
        return std::numeric_limits<double>::min();
    return std::min(p, 1.0);
}

} // namespace detail

/// Exact two-tailed p by enumerating the permutation distribution. Cost grows
/// with n_a * n * sum-of-ranks; usable well beyond the default exact limit.
inline MannWhitneyResult mann_whitney_exact(std::span<const double> a, std::span<const double> b)
{
    detail::check_sizes(a, b);
    const auto ranked = detail::rank_samples(a, b);
    const std::size_t na = a.size();
    const std::size_t n = ranked.midranks.size();
    const double na_d = static_cast<double>(na);
    const double nb_d = static_cast<double>(b.size());

    // Doubled midranks are integers.
    std::vector<std::size_t> ranks2(n);
    std::size_t total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ranks2[i] = static_cast<std::size_t>(std::llround(2.0 * ranked.midranks[i]));
        total2 += ranks2[i];
    }

    // ways[k][s]: number of k-subsets of the processed ranks with doubled sum s.
    std::vector<std::vector<double>> ways(na + 1, std::vector<double>(total2 + 1, 0.0));
    ways[0][0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
        reach += ranks2[i];
        for (std::size_t k = std::min(i + 1, na); k >= 1; --k) {
            auto& dst = ways[k];
            const auto& src = ways[k - 1];
            for (std::size_t s = reach; s >= ranks2[i]; --s) {
                dst[s] += src[s - ranks2[i]];
                if (s == ranks2[i])
                    break;
            }
        }
    }

    const double offset2 = na_d * (na_d + 1.0); // 2 * n_a (n_a + 1) / 2
    const double mean_u = 0.5 * na_d * nb_d;
    const double u_obs = ranked.rank_sum_a - 0.5 * na_d * (na_d + 1.0);
    const double dev_obs = std::abs(u_obs - mean_u);

    double total = 0.0;
    double extreme = 0.0;
    const auto& dist = ways[na];
    for (std::size_t s = 0; s <= total2; ++s) {
        if (dist[s] == 0.0)
            continue;
        total += dist[s];
        const double u = 0.5 * (static_cast<double>(s) - offset2);
        if (std::abs(u - mean_u) >= dev_obs - 1e-9)
            extreme += dist[s];
    }
    return {u_obs, detail::clamp_p(extreme / total), true};
}

/// Normal approximation with tie correction and continuity correction.
inline MannWhitneyResult mann_whitney_normal(std::span<const double> a, std::span<const double> b)
{
    detail::check_sizes(a, b);
    const auto ranked = detail::rank_samples(a, b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double n = na + nb;
    const double u = ranked.rank_sum_a - 0.5 * na * (na + 1.0);
    const double mean = 0.5 * na * nb;
    const double var = n > 1.0 ? na * nb / 12.0 * ((n + 1.0) - ranked.tie_term / (n * (n - 1.0))) : 0.0;
    if (!(var > 0.0))
        return {u, 1.0, false};
    const double z = (std::abs(u - mean) - 0.5) / std::sqrt(var);
    if (z <= 0.0)
        return {u, 1.0, false};
    return {u, detail::clamp_p(std::erfc(z / std::sqrt(2.0))), false};
}

inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b)
{
    if (a.size() + b.size() <= kMannWhitneyExactLimit)
        return mann_whitney_exact(a, b);
    return mann_whitney_normal(a, b);
}

inline double median(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace mapelites
