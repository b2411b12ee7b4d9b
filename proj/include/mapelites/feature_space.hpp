#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mapelites {

struct Interval {
    double min = 0.0;
    double max = 1.0;

    double width() const noexcept { return max - min; }
    bool operator==(const Interval&) const = default;
};

/// Per-dimension cell counts.
using Resolution = std::vector<std::size_t>;

/// The archive switches to `resolution` once `iteration` batches have completed.
struct ResolutionStep {
    std::int64_t iteration = 0;
    Resolution resolution;

    bool operator==(const ResolutionStep&) const = default;
};

/// Address of a cell in the N-dimensional grid.
struct CellIndex {
    std::vector<std::size_t> coords;

    std::size_t size() const noexcept { return coords.size(); }
    std::size_t operator[](std::size_t d) const { return coords[d]; }

    auto operator<=>(const CellIndex&) const = default;
    bool operator==(const CellIndex&) const = default;
};

struct BinResult {
    CellIndex cell;
    bool clamped = false; // at least one coordinate lay outside its bounds
};

namespace detail {

inline bool is_multiple(const Resolution& fine, const Resolution& coarse)
{
    if (fine.size() != coarse.size())
        return false;
    for (std::size_t d = 0; d < fine.size(); ++d)
        if (coarse[d] == 0 || fine[d] == 0 || fine[d] % coarse[d] != 0)
            return false;
    return true;
}

inline std::string resolution_string(const Resolution& r)
{
    std::string s;
    for (std::size_t d = 0; d < r.size(); ++d) {
        if (d)
            s += 'x';
        s += std::to_string(r[d]);
    }
    return s;
}

} // namespace detail

/// Bounded, discretized space of behaviour descriptors.
///
/// Holds the current resolution together with the (validated) schedule of
/// later resolutions used by hierarchical runs. Each scheduled resolution is
/// an integer multiple of the one before it, so coarse cells partition
/// exactly into fine cells.
class FeatureSpace {
public:
    FeatureSpace() = default;

    FeatureSpace(std::vector<Interval> bounds, Resolution resolution,
                 std::vector<ResolutionStep> schedule = {}, std::vector<std::string> labels = {})
        : bounds_(std::move(bounds)), resolution_(std::move(resolution)),
          schedule_(std::move(schedule)), labels_(std::move(labels))
    {
        validate();
    }

    std::size_t dims() const noexcept { return bounds_.size(); }
    const std::vector<Interval>& bounds() const noexcept { return bounds_; }
    const Resolution& resolution() const noexcept { return resolution_; }
    const std::vector<ResolutionStep>& schedule() const noexcept { return schedule_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// Resolution after every scheduled change has been applied.
    const Resolution& final_resolution() const noexcept
    {
        return schedule_.empty() ? resolution_ : schedule_.back().resolution;
    }

    std::size_t cell_count() const noexcept
    {
        std::size_t n = 1;
        for (auto r : resolution_)
            n *= r;
        return n;
    }

    /// Copy of this space at a finer resolution; must be a per-dimension multiple.
    FeatureSpace with_resolution(const Resolution& fine) const
    {
        if (!detail::is_multiple(fine, resolution_))
            throw ConfigError("resolution " + detail::resolution_string(fine) +
                              " is not a multiple of " + detail::resolution_string(resolution_));
        FeatureSpace out = *this;
        out.resolution_ = fine;
        return out;
    }

    /// Maps a descriptor to its cell. Out-of-bounds values clamp to the edge
    /// cells; the result says whether that happened.
    BinResult bin(std::span<const double> descriptor) const
    {
        if (descriptor.size() != dims())
            throw EvaluationInvalid("descriptor has " + std::to_string(descriptor.size()) +
                                    " entries, expected " + std::to_string(dims()));
        BinResult out;
        out.cell.coords.resize(dims());
        for (std::size_t d = 0; d < dims(); ++d) {
            const double v = descriptor[d];
            if (!std::isfinite(v))
                throw EvaluationInvalid("non-finite descriptor entry in dimension " + std::to_string(d));
            const auto& b = bounds_[d];
            const std::size_t res = resolution_[d];
            if (v < b.min) {
                out.cell.coords[d] = 0;
                out.clamped = true;
            } else if (v >= b.max) {
                out.cell.coords[d] = res - 1;
                out.clamped = out.clamped || v > b.max;
            } else {
                const double pos = std::floor((v - b.min) / b.width() * static_cast<double>(res));
                out.cell.coords[d] = std::min(static_cast<std::size_t>(pos), res - 1);
            }
        }
        return out;
    }

    /// Row-major flattening with dimension 0 slowest, so ascending flat
    /// indices enumerate cells in lexicographic order.
    std::size_t flat(const CellIndex& c) const
    {
        std::size_t idx = 0;
        for (std::size_t d = 0; d < dims(); ++d)
            idx = idx * resolution_[d] + c.coords[d];
        return idx;
    }

    CellIndex unflat(std::size_t idx) const
    {
        CellIndex c;
        c.coords.resize(dims());
        for (std::size_t d = dims(); d-- > 0;) {
            c.coords[d] = idx % resolution_[d];
            idx /= resolution_[d];
        }
        return c;
    }

    bool contains(const CellIndex& c) const
    {
        if (c.size() != dims())
            return false;
        for (std::size_t d = 0; d < dims(); ++d)
            if (c.coords[d] >= resolution_[d])
                return false;
        return true;
    }

    bool operator==(const FeatureSpace&) const = default;

private:
    void validate() const
    {
        if (bounds_.empty())
            throw ConfigError("bounds", "feature space needs at least one dimension");
        for (std::size_t d = 0; d < bounds_.size(); ++d)
            if (!(bounds_[d].min < bounds_[d].max) || !std::isfinite(bounds_[d].min) ||
                !std::isfinite(bounds_[d].max))
                throw ConfigError("bounds", "dimension " + std::to_string(d) + " needs finite min < max");
        if (resolution_.size() != bounds_.size())
            throw ConfigError("starting resolution", "expected " + std::to_string(bounds_.size()) + " entries");
        for (auto r : resolution_)
            if (r < 1)
                throw ConfigError("starting resolution", "every entry must be >= 1");
        if (!labels_.empty() && labels_.size() != bounds_.size())
            throw ConfigError("labels", "expected one label per dimension");

        const Resolution* prev = &resolution_;
        std::int64_t prev_iter = -1;
        for (std::size_t i = 0; i < schedule_.size(); ++i) {
            const auto& step = schedule_[i];
            const std::string key = "resolution change program[" + std::to_string(i) + "]";
            if (step.iteration < 0 || step.iteration <= prev_iter)
                throw ConfigError(key, "iteration thresholds must be non-negative and strictly increasing");
            if (!detail::is_multiple(step.resolution, *prev))
                throw ConfigError(key, "resolution " + detail::resolution_string(step.resolution) +
                                           " is not a per-dimension multiple of " +
                                           detail::resolution_string(*prev));
            prev = &step.resolution;
            prev_iter = step.iteration;
        }
    }

    std::vector<Interval> bounds_;
    Resolution resolution_;
    std::vector<ResolutionStep> schedule_;
    std::vector<std::string> labels_;
};

} // namespace mapelites
