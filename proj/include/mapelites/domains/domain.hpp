#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "../feature_space.hpp"
#include "../rng.hpp"

namespace mapelites {

/// Result of simulating one candidate: performance f(x) and descriptor b(x).
struct Evaluation {
    double fitness = 0.0;
    std::vector<double> descriptor;

    bool valid(std::size_t dims) const noexcept
    {
        if (!std::isfinite(fitness) || descriptor.size() != dims)
            return false;
        for (double v : descriptor)
            if (!std::isfinite(v))
                return false;
        return true;
    }
    bool operator==(const Evaluation&) const = default;
};

/// A problem domain. `evaluate` must be a pure function of the genome and
/// safe to call concurrently; everything stochastic goes through the Rng.
template <class D>
concept Domain = requires(const D& d, const typename D::Genome& g, Rng& rng, std::string_view text) {
    typename D::Genome;
    { d.name() } -> std::convertible_to<std::string>;
    { d.descriptor_dims() } -> std::convertible_to<std::size_t>;
    { d.bounds() } -> std::convertible_to<std::vector<Interval>>;
    { d.labels() } -> std::convertible_to<std::vector<std::string>>;
    { d.random_genome(rng) } -> std::same_as<typename D::Genome>;
    { d.mutate(g, rng) } -> std::same_as<typename D::Genome>;
    { d.evaluate(g) } -> std::same_as<Evaluation>;
    { d.encode(g) } -> std::same_as<std::string>;
    { d.decode(text) } -> std::same_as<typename D::Genome>;
};

namespace detail {

inline std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

} // namespace detail

} // namespace mapelites
