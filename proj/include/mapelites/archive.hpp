#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "feature_space.hpp"
#include "rng.hpp"

namespace mapelites {

template <class Genome>
struct Elite {
    Genome genome{};
    double fitness = 0.0;
    std::vector<double> descriptor;
    std::int64_t birth_iteration = 0;
    std::optional<CellIndex> parent_cell;
    std::optional<std::vector<double>> parent_descriptor;
    std::uint64_t id = 0;
    std::optional<std::uint64_t> parent_id;

    bool operator==(const Elite&) const = default;
};

enum class InsertOutcome { InsertedEmpty, ReplacedIncumbent, RejectedWorseOrTied };

struct InsertResult {
    InsertOutcome outcome = InsertOutcome::RejectedWorseOrTied;
    CellIndex cell;
    bool clamped = false;

    bool stored() const noexcept { return outcome != InsertOutcome::RejectedWorseOrTied; }
};

/// Dense N-dimensional grid holding at most one elite per cell.
///
/// Occupied cells are also tracked in a list (in order of first fill) so a
/// uniformly random elite can be drawn in O(1).
template <class Genome>
class Archive {
public:
    using elite_type = Elite<Genome>;

    Archive() = default;
    explicit Archive(FeatureSpace space) : space_(std::move(space)), cells_(space_.cell_count()) {}

    const FeatureSpace& space() const noexcept { return space_; }
    std::size_t filled_count() const noexcept { return occupied_.size(); }
    bool empty() const noexcept { return occupied_.empty(); }

    /// Cells in lexicographic order of their index; unfilled cells are nullopt.
    std::span<const std::optional<elite_type>> cells() const noexcept { return cells_; }

    const elite_type* at(const CellIndex& c) const
    {
        if (!space_.contains(c))
            return nullptr;
        const auto& slot = cells_[space_.flat(c)];
        return slot ? &*slot : nullptr;
    }

    /// Stores the candidate if its cell is empty or it strictly beats the
    /// incumbent. Ties keep the incumbent.
    InsertResult try_insert(elite_type candidate)
    {
        if (!std::isfinite(candidate.fitness))
            throw EvaluationInvalid("non-finite fitness");
        BinResult bin = space_.bin(candidate.descriptor);
        const std::size_t idx = space_.flat(bin.cell);
        auto& slot = cells_[idx];
        InsertResult res{InsertOutcome::RejectedWorseOrTied, std::move(bin.cell), bin.clamped};
        if (!slot) {
            slot = std::move(candidate);
            occupied_.push_back(idx);
            res.outcome = InsertOutcome::InsertedEmpty;
        } else if (slot->fitness < candidate.fitness) {
            *slot = std::move(candidate);
            res.outcome = InsertOutcome::ReplacedIncumbent;
        }
        return res;
    }

    /// Re-bins every elite by its own descriptor at a finer resolution. Each
    /// coarse cell maps onto a block of fine cells, so no two elites collide.
    void subdivide(const Resolution& fine)
    {
        FeatureSpace next = space_.with_resolution(fine);
        std::vector<std::optional<elite_type>> cells(next.cell_count());
        std::vector<std::size_t> occupied;
        occupied.reserve(occupied_.size());
        for (std::size_t old_idx : occupied_) {
            const CellIndex coarse = space_.unflat(old_idx);
            CellIndex cell = next.bin(cells_[old_idx]->descriptor).cell;
            // Keep the elite inside its parent block even if floating-point
            // rounding at a cell edge would push it into the neighbour.
            for (std::size_t d = 0; d < cell.size(); ++d) {
                const std::size_t factor = fine[d] / space_.resolution()[d];
                const std::size_t lo = coarse.coords[d] * factor;
                cell.coords[d] = std::clamp(cell.coords[d], lo, lo + factor - 1);
            }
            const std::size_t idx = next.flat(cell);
            cells[idx] = std::move(cells_[old_idx]);
            occupied.push_back(idx);
        }
        space_ = std::move(next);
        cells_ = std::move(cells);
        occupied_ = std::move(occupied);
    }

    /// Uniform draw over occupied cells.
    const elite_type& random_elite(Rng& rng) const
    {
        if (occupied_.empty())
            throw EmptyArchiveError();
        std::uniform_int_distribution<std::size_t> pick(0, occupied_.size() - 1);
        return *cells_[occupied_[pick(rng)]];
    }

    std::optional<double> best_fitness() const
    {
        std::optional<double> best;
        for (std::size_t idx : occupied_)
            if (!best || cells_[idx]->fitness > *best)
                best = cells_[idx]->fitness;
        return best;
    }

    /// Cell-wise equality; the fill order used for sampling is not compared.
    bool same_contents(const Archive& other) const
    {
        return space_.bounds() == other.space_.bounds() &&
               space_.resolution() == other.space_.resolution() && cells_ == other.cells_;
    }

private:
    FeatureSpace space_;
    std::vector<std::optional<elite_type>> cells_;
    std::vector<std::size_t> occupied_;
};

template <class Genome>
Archive<Genome> subdivide(Archive<Genome> archive, const Resolution& fine)
{
    archive.subdivide(fine);
    return archive;
}

/// Fitness grid of an archive with unfilled cells left empty.
struct DenseMap {
    Resolution shape;
    std::vector<std::optional<double>> cells; // lexicographic (row-major, dim 0 slowest)

    std::size_t filled() const noexcept
    {
        std::size_t n = 0;
        for (const auto& c : cells)
            n += c.has_value();
        return n;
    }
    bool operator==(const DenseMap&) const = default;
};

template <class Genome>
DenseMap to_dense_map(const Archive<Genome>& archive)
{
    DenseMap m;
    m.shape = archive.space().resolution();
    m.cells.reserve(archive.cells().size());
    for (const auto& c : archive.cells())
        m.cells.push_back(c ? std::optional<double>(c->fitness) : std::nullopt);
    return m;
}

} // namespace mapelites
