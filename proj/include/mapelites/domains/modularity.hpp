#pragma once

// Directed modularity (Leicht & Newman) of a partition:
//
//   Q = sum over communities c of  e_c / m  -  in_c * out_c / m^2
//
// where m is the edge count, e_c the number of edges with both endpoints in
// c, and in_c / out_c the summed in- and out-degrees of c's nodes.
// greedy_modularity() starts from singletons and repeatedly applies the
// community merge with the largest positive gain until none is left.

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mapelites {

struct Digraph {
    std::size_t nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges; // (from, to)
};

struct Partition {
    std::vector<std::size_t> community; // community label per node
    double q = 0.0;
};

/// Q of a fixed partition. An edgeless graph has Q = 0.
inline double modularity(const Digraph& g, const std::vector<std::size_t>& community)
{
    if (community.size() != g.nodes)
        throw std::invalid_argument("modularity: one community label per node required");
    if (g.edges.empty())
        return 0.0;
    std::size_t labels = 0;
    for (auto c : community)
        labels = std::max(labels, c + 1);
    std::vector<double> inside(labels, 0.0), in_deg(labels, 0.0), out_deg(labels, 0.0);
    for (auto [from, to] : g.edges) {
        out_deg[community[from]] += 1.0;
        in_deg[community[to]] += 1.0;
        if (community[from] == community[to])
            inside[community[from]] += 1.0;
    }
    const double m = static_cast<double>(g.edges.size());
    double q = 0.0;
    for (std::size_t c = 0; c < labels; ++c)
        q += inside[c] / m - in_deg[c] * out_deg[c] / (m * m);
    return q;
}

inline Partition greedy_modularity(const Digraph& g)
{
    const std::size_t n = g.nodes;
    Partition result;
    result.community.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        result.community[i] = i;
    if (g.edges.empty())
        return result;

    const double m = static_cast<double>(g.edges.size());
    // between[a][b]: edges from community a to community b.
    std::vector<std::vector<double>> between(n, std::vector<double>(n, 0.0));
    std::vector<double> in_deg(n, 0.0), out_deg(n, 0.0);
    for (auto [from, to] : g.edges) {
        between[from][to] += 1.0;
        out_deg[from] += 1.0;
        in_deg[to] += 1.0;
    }
    std::vector<bool> alive(n, true);

    while (true) {
        double best_gain = 0.0;
        std::size_t best_a = n, best_b = n;
        for (std::size_t a = 0; a < n; ++a) {
            if (!alive[a])
                continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!alive[b])
                    continue;
                const double gain = (between[a][b] + between[b][a]) / m -
                                    (in_deg[a] * out_deg[b] + in_deg[b] * out_deg[a]) / (m * m);
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a == n)
            break;
        // Fold b into a.
        for (std::size_t c = 0; c < n; ++c) {
            between[best_a][c] += between[best_b][c];
            between[c][best_a] += between[c][best_b];
            between[best_b][c] = 0.0;
            between[c][best_b] = 0.0;
        }
        in_deg[best_a] += in_deg[best_b];
        out_deg[best_a] += out_deg[best_b];
        in_deg[best_b] = out_deg[best_b] = 0.0;
        alive[best_b] = false;
        for (auto& c : result.community)
            if (c == best_b)
                c = best_a;
    }
    result.q = modularity(g, result.community);
    return result;
}

} // namespace mapelites
