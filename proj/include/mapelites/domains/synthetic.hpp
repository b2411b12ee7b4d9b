#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "../errors.hpp"
#include "domain.hpp"

namespace mapelites {

enum class SyntheticMode { Constant, Rastrigin };

struct SyntheticParams {
    std::size_t length = 6;
    SyntheticMode mode = SyntheticMode::Constant;
    double mutation_rate = -1.0; // per gene; negative means 1 / length
    double mutation_sigma = 0.1;
};

struct SyntheticGenome {
    std::vector<double> values;

    bool operator==(const SyntheticGenome&) const = default;
};

/// Real vector in [0,1]^L. The first two genes are the descriptor. Fitness is
/// either 1 or a negated Rastrigin over the remaining genes mapped from [0,1]
/// to [-5.12, 5.12], rescaled so the optimum (all 0.5) scores exactly 1.
class SyntheticDomain {
public:
    using Genome = SyntheticGenome;

    // Upper bound of one Rastrigin term z^2 - 10 cos(2 pi z) + 10 on [-5.12, 5.12].
    static constexpr double kRastriginTermBound = 5.12 * 5.12 + 20.0;

    explicit SyntheticDomain(SyntheticParams params = {}) : params_(params)
    {
        if (params_.length < 2)
            throw ConfigError("length", "synthetic genomes need at least 2 genes");
        if (params_.mutation_rate < 0.0)
            params_.mutation_rate = 1.0 / static_cast<double>(params_.length);
    }

    std::string name() const { return "synthetic"; }
    std::size_t descriptor_dims() const { return 2; }
    std::vector<Interval> bounds() const { return {{0.0, 1.0}, {0.0, 1.0}}; }
    std::vector<std::string> labels() const { return {"g0", "g1"}; }
    const SyntheticParams& params() const noexcept { return params_; }

    Genome random_genome(Rng& rng) const
    {
        Genome g{std::vector<double>(params_.length)};
        for (auto& v : g.values)
            v = uniform01(rng);
        return g;
    }

    Genome mutate(const Genome& parent, Rng& rng) const
    {
        Genome g = parent;
        std::normal_distribution<double> step(0.0, params_.mutation_sigma);
        for (auto& v : g.values)
            if (uniform01(rng) < params_.mutation_rate)
                v = std::clamp(v + step(rng), 0.0, 1.0);
        if (g == parent) {
            std::uniform_int_distribution<std::size_t> gene(0, g.values.size() - 1);
            double& v = g.values[gene(rng)];
            const double old = v;
            do
                v = uniform01(rng);
            while (v == old);
        }
        return g;
    }

    double rastrigin(const Genome& g) const
    {
        double sum = 0.0;
        for (std::size_t i = 2; i < g.values.size(); ++i) {
            const double z = -5.12 + 10.24 * g.values[i];
            sum += z * z - 10.0 * std::cos(2.0 * std::numbers::pi * z) + 10.0;
        }
        return sum;
    }

    Evaluation evaluate(const Genome& g) const
    {
        double fitness = 1.0;
        if (params_.mode == SyntheticMode::Rastrigin && g.values.size() > 2)
            fitness = 1.0 - rastrigin(g) / (kRastriginTermBound * static_cast<double>(g.values.size() - 2));
        return {fitness, {g.values[0], g.values[1]}};
    }

    std::string encode(const Genome& g) const
    {
        std::string out;
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            if (i)
                out += ',';
            out += detail::format_real(g.values[i]);
        }
        return out;
    }

    Genome decode(std::string_view text) const
    {
        Genome g;
        for (auto s : detail::split(text, ',')) {
            try {
                std::size_t used = 0;
                const std::string str(s);
                g.values.push_back(std::stod(str, &used));
                if (used != str.size())
                    throw FormatError("bad gene '" + str + "'");
            } catch (const std::logic_error&) {
                throw FormatError("bad gene '" + std::string(s) + "'");
            }
        }
        if (g.values.size() != params_.length)
            throw FormatError("synthetic genome length does not match the domain");
        return g;
    }

private:
    SyntheticParams params_;
};

} // namespace mapelites
