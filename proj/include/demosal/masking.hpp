#pragma once

#include <cstdint>
#include <vector>

#include "demosal/learners.hpp"
#include "demosal/types.hpp"

namespace demosal {

/// `n_masks` exact-count random masks: each mask hides the same quota of
/// cells, chosen uniformly without replacement from its own derived seed.
/// The kept quota is round_half_even((1 - level/100) * cells) and the
/// recorded keep_fraction is kept/cells, so the per-cell observation rate is
/// exact per mask. A level that keeps no cells raises ConfigError.
std::vector<MaskGrid> gen_masks(const GridGeometry& geom, double level, int n_masks,
                                std::uint64_t seed);

/// Single exact-count mask with `kept` observed cells.
MaskGrid random_mask_with_kept(const GridGeometry& geom, long kept, std::uint64_t seed);

/// Keeps exactly the (state, action) pairs whose frames fall inside observed
/// snippets, unmodified and in trajectory-major frame order.
TrainingSet apply_mask(const DemoSet& demos, const MaskGrid& mask,
                       const GridGeometry& geom);

/// Per-cell Bernoulli(1/2) masks for the segment variance probe; all-zero
/// draws are resampled. keep_fraction records each mask's realized fraction.
std::vector<MaskGrid> segment_probe_masks(const GridGeometry& geom, int n_masks,
                                          std::uint64_t seed);

}  // namespace demosal
