#pragma once

// Planar three-joint arm with unit rigid links, a stand-in for a compliant
// servo arm. Joint commands are servo steps in [-150, 150]; 1024 steps make a
// full turn. Step offsets (150, 0, 0) put the arm fully extended along +x,
// and lowering the first servo's step count raises the arm counter-clockwise.
//
// Fitness is the end-effector height y; the one-dimensional descriptor is
// its x coordinate over [-3, 3].

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "../archive.hpp"
#include "../errors.hpp"
#include "domain.hpp"

namespace mapelites {

struct ArmParams {
    int min_step = -150;
    int max_step = 150;
    double mutation_rate = 1.0;   // per joint
    double mutation_sigma = 20.0; // steps
    std::size_t bins = 64;
};

struct ArmGenome {
    std::array<int, 3> steps{};

    bool operator==(const ArmGenome&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline constexpr std::array<int, 3> kArmStepOffsets{150, 0, 0};
inline constexpr double kArmStepsPerTurn = 1024.0;
inline constexpr double kArmLinkLength = 1.0;

inline Point2 arm_forward_kinematics(const std::array<int, 3>& steps, int min_step = -150, int max_step = 150)
{
    Point2 p;
    double angle = 0.0;
    for (std::size_t j = 0; j < steps.size(); ++j) {
        if (steps[j] < min_step || steps[j] > max_step)
            throw ConfigError("steps", "joint " + std::to_string(j) + " step " + std::to_string(steps[j]) +
                                           " outside [" + std::to_string(min_step) + ", " +
                                           std::to_string(max_step) + "]");
        angle += static_cast<double>(kArmStepOffsets[j] - steps[j]) * 2.0 * std::numbers::pi / kArmStepsPerTurn;
        p.x += kArmLinkLength * std::cos(angle);
        p.y += kArmLinkLength * std::sin(angle);
    }
    return p;
}

class ArmDomain {
public:
    using Genome = ArmGenome;

    explicit ArmDomain(ArmParams params = {}) : params_(params)
    {
        if (params_.min_step >= params_.max_step)
            throw ConfigError("min step", "min step must be below max step");
        if (params_.bins < 1)
            throw ConfigError("bins", "need at least one bin");
    }

    std::string name() const { return "arm"; }
    std::size_t descriptor_dims() const { return 1; }
    std::vector<Interval> bounds() const { return {{-3.0, 3.0}}; }
    std::vector<std::string> labels() const { return {"x"}; }
    const ArmParams& params() const noexcept { return params_; }

    Genome random_genome(Rng& rng) const
    {
        std::uniform_int_distribution<int> step(params_.min_step, params_.max_step);
        Genome g;
        for (auto& s : g.steps)
            s = step(rng);
        return g;
    }

    Genome mutate(const Genome& parent, Rng& rng) const
    {
        Genome g = parent;
        std::normal_distribution<double> delta(0.0, params_.mutation_sigma);
        for (auto& s : g.steps)
            if (uniform01(rng) < params_.mutation_rate)
                s = clamp_step(s + static_cast<int>(std::lround(delta(rng))));
        if (g == parent) {
            // Forced change: nudge one joint by at least one step.
            std::uniform_int_distribution<std::size_t> joint(0, 2);
            auto& s = g.steps[joint(rng)];
            int d = static_cast<int>(std::lround(delta(rng)));
            if (d == 0)
                d = uniform01(rng) < 0.5 ? -1 : 1;
            int next = clamp_step(s + d);
            if (next == s)
                next = clamp_step(s - d);
            s = next;
        }
        return g;
    }

    Evaluation evaluate(const Genome& g) const
    {
        const Point2 p = arm_forward_kinematics(g.steps, params_.min_step, params_.max_step);
        return {p.y, {p.x}};
    }

    std::string encode(const Genome& g) const
    {
        return std::to_string(g.steps[0]) + ',' + std::to_string(g.steps[1]) + ',' + std::to_string(g.steps[2]);
    }

    Genome decode(std::string_view text) const
    {
        const auto parts = detail::split(text, ',');
        if (parts.size() != 3)
            throw FormatError("arm genome needs three comma-separated steps");
        Genome g;
        for (std::size_t j = 0; j < 3; ++j) {
            try {
                std::size_t used = 0;
                const std::string s(parts[j]);
                g.steps[j] = std::stoi(s, &used);
                if (used != s.size())
                    throw FormatError("bad step '" + s + "'");
            } catch (const std::logic_error&) {
                throw FormatError("bad step '" + std::string(parts[j]) + "'");
            }
            if (g.steps[j] < params_.min_step || g.steps[j] > params_.max_step)
                throw FormatError("step out of range in '" + std::string(text) + "'");
        }
        return g;
    }

    /// k evenly spaced step values from min to max inclusive, rounded to the nearest step.
    std::vector<int> grid_values(std::size_t k) const
    {
        if (k < 2)
            throw ConfigError("grid steps", "need at least 2 values per joint");
        std::vector<int> v(k);
        const double span = static_cast<double>(params_.max_step - params_.min_step);
        for (std::size_t i = 0; i < k; ++i)
            v[i] = params_.min_step +
                   static_cast<int>(std::lround(span * static_cast<double>(i) / static_cast<double>(k - 1)));
        return v;
    }

private:
    int clamp_step(int s) const { return std::clamp(s, params_.min_step, params_.max_step); }

    ArmParams params_;
};

struct GridSearchResult {
    Archive<ArmGenome> archive;
    std::size_t evaluations = 0;
};

/// Evaluates every combination of k step values per joint and keeps the best
/// configuration per descriptor cell (first on ties).
inline GridSearchResult arm_grid_search(const ArmDomain& domain, std::size_t k, const FeatureSpace& space)
{
    const auto values = domain.grid_values(k);
    GridSearchResult out{Archive<ArmGenome>(space), 0};
    for (int s0 : values)
        for (int s1 : values)
            for (int s2 : values) {
                ArmGenome g{{s0, s1, s2}};
                Evaluation e = domain.evaluate(g);
                Elite<ArmGenome> elite;
                elite.genome = g;
                elite.fitness = e.fitness;
                elite.descriptor = std::move(e.descriptor);
                elite.id = out.evaluations++;
                out.archive.try_insert(std::move(elite));
            }
    return out;
}

inline GridSearchResult arm_grid_search(const ArmDomain& domain, std::size_t k)
{
    return arm_grid_search(domain, k, FeatureSpace(domain.bounds(), {domain.params().bins}, {}, domain.labels()));
}

} // namespace mapelites
