#pragma once

// Independent reference implementations used only by tests. None of them
// call into the library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

/// Directed modularity from the definition: (1/m) sum over same-community
/// ordered pairs (i, j) of A_ij - out_i * in_j / m.
inline double directed_q(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                         const std::vector<std::size_t>& label)
{
    const double m = static_cast<double>(edges.size());
    if (edges.empty())
        return 0.0;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> out(n, 0.0), in(n, 0.0);
    for (auto [u, v] : edges) {
        a[u][v] += 1.0;
        out[u] += 1.0;
        in[v] += 1.0;
    }
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (label[i] == label[j])
                q += a[i][j] - out[i] * in[j] / m;
    return q / m;
}

/// Best Q over every set partition (restricted growth strings).
inline double exhaustive_q(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
{
    if (n == 0)
        return 0.0;
    std::vector<std::size_t> label(n, 0);
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
        if (i == n) {
            best = std::max(best, directed_q(n, edges, label));
            return;
        }
        for (std::size_t c = 0; c <= used; ++c) {
            label[i] = c;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    label[0] = 0;
    rec(1, 1);
    return best;
}

/// Number of set partitions visited by exhaustive_q, for a sanity check.
inline std::size_t bell(std::size_t n)
{
    std::vector<std::vector<std::size_t>> t(n + 1, std::vector<std::size_t>(n + 1, 0));
    t[0][0] = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        t[i][0] = t[i - 1][i - 1];
        for (std::size_t j = 1; j <= i; ++j)
            t[i][j] = t[i][j - 1] + t[i - 1][j - 1];
    }
    return t[n][0];
}

/// Fronts by repeated peeling: a point is in the current front when no
/// remaining point dominates it. O(n^3).
inline std::vector<std::size_t> front_numbers(const std::vector<std::vector<double>>& pts)
{
    auto dom = [](const std::vector<double>& a, const std::vector<double>& b) {
        bool strict = false;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] < b[k])
                return false;
            strict = strict || a[k] > b[k];
        }
        return strict;
    };
    const std::size_t n = pts.size();
    std::vector<std::size_t> front(n, 0);
    std::vector<bool> done(n, false);
    std::size_t assigned = 0;
    for (std::size_t f = 1; assigned < n; ++f) {
        std::vector<std::size_t> now;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i])
                continue;
            bool dominated = false;
            for (std::size_t j = 0; j < n && !dominated; ++j)
                dominated = !done[j] && j != i && dom(pts[j], pts[i]);
            if (!dominated)
                now.push_back(i);
        }
        for (auto i : now) {
            done[i] = true;
            front[i] = f;
        }
        assigned += now.size();
    }
    return front;
}

/// Mann-Whitney U of a against b: pairs (x in a, y in b) with x > y, plus
/// half of the ties.
inline double u_by_pairs(const std::vector<double>& a, const std::vector<double>& b)
{
    double u = 0.0;
    for (double x : a)
        for (double y : b)
            u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return u;
}

/// Exact two-tailed p by enumerating every way of choosing which |a| of the
/// pooled values belong to the first sample.
inline double exact_p_by_enumeration(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size(), na = a.size();
    const double mean = static_cast<double>(a.size() * b.size()) / 2.0;
    const double observed = std::abs(u_by_pairs(a, b) - mean);
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
    std::size_t total = 0, extreme = 0;
    do {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i)
            (pick[i] ? x : y).push_back(pooled[i]);
        ++total;
        extreme += std::abs(u_by_pairs(x, y) - mean) >= observed - 1e-9;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(total));
}

/// G, P, coverage and global performance straight from their definitions
/// over maps given as optional fitness lists.
struct Metrics {
    double g = 0.0;
    std::optional<double> p;
    double coverage = 0.0;
    std::optional<double> global_performance;
};

inline Metrics metrics(const std::vector<std::optional<double>>& m, const std::vector<std::optional<double>>& ref)
{
    Metrics out;
    double sum = 0.0;
    std::size_t n_ref = 0, n_m = 0, present = 0, filled = 0;
    double best_m = -1e300, best_ref = -1e300;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (ref[i]) {
            ++present;
            best_ref = std::max(best_ref, *ref[i]);
        }
        if (m[i]) {
            ++filled;
            best_m = std::max(best_m, *m[i]);
        }
        if (!ref[i] || *ref[i] <= 0.0)
            continue;
        ++n_ref;
        if (m[i]) {
            sum += *m[i] / *ref[i];
            ++n_m;
        }
    }
    out.g = n_ref ? sum / static_cast<double>(n_ref) : 0.0;
    if (n_m)
        out.p = sum / static_cast<double>(n_m);
    out.coverage = present ? static_cast<double>(filled) / static_cast<double>(present) : 0.0;
    if (filled)
        out.global_performance = best_m / best_ref;
    return out;
}

} // namespace oracle
