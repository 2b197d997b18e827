#include "demosal/masking.hpp"

#include <numeric>

#include "demosal/rng.hpp"

namespace demosal {

MaskGrid random_mask_with_kept(const GridGeometry& geom, long kept, std::uint64_t seed) {
  const long cells = geom.cell_count();
  if (kept < 1 || kept > cells) {
    throw ContractError("kept cell count " + std::to_string(kept) +
                        " outside [1, " + std::to_string(cells) + "]");
  }
  MaskGrid mask;
  mask.cells = MaskMatrix::Ones(geom.demo_count, geom.snippets);
  mask.keep_fraction = static_cast<double>(kept) / static_cast<double>(cells);

  // Partial Fisher-Yates: the first `masked` entries of the permutation are
  // the cells to hide, drawn uniformly without replacement.
  const long masked = cells - kept;
  Rng rng(seed);
  std::vector<long> index(cells);
  std::iota(index.begin(), index.end(), 0L);
  for (long k = 0; k < masked; ++k) {
    const long j = k + static_cast<long>(rng.uniform_int(cells - k));
    std::swap(index[k], index[j]);
    mask.cells(index[k] / geom.snippets, index[k] % geom.snippets) = 0;
  }
  return mask;
}

std::vector<MaskGrid> gen_masks(const GridGeometry& geom, double level, int n_masks,
                                std::uint64_t seed) {
  if (!(level >= 0.0 && level < 100.0)) {
    throw ConfigError("level", "level must lie in [0, 100)");
  }
  if (n_masks < 1) throw ConfigError("n_masks", "n_masks must be >= 1");
  const long cells = geom.cell_count();
  // product first: percentage-of-cells quotas stay exactly representable
  const long kept = round_half_even((100.0 - level) * static_cast<double>(cells) / 100.0);
  if (kept < 1) throw ConfigError("level", "level leaves zero kept cells");

  std::vector<MaskGrid> masks;
  masks.reserve(n_masks);
  for (int i = 0; i < n_masks; ++i) {
    masks.push_back(random_mask_with_kept(geom, kept, derive_seed(seed, i)));
  }
  return masks;
}

TrainingSet apply_mask(const DemoSet& demos, const MaskGrid& mask,
                       const GridGeometry& geom) {
  if (demos.demo_count() != geom.demo_count || demos.horizon != geom.horizon) {
    throw ContractError("demo set does not match grid geometry");
  }
  if (mask.cells.rows() != geom.demo_count || mask.cells.cols() != geom.snippets) {
    throw ContractError("mask does not match grid geometry");
  }

  const int width = geom.frames_per_snippet();
  TrainingSet out;
  out.pairs.reserve(static_cast<std::size_t>(mask.kept_cells()) * width);
  for (int h = 0; h < geom.demo_count; ++h) {
    const Trajectory& traj = demos.trajectories[h];
    if (static_cast<int>(traj.size()) != geom.horizon) {
      throw ContractError("trajectory " + std::to_string(h) + " has " +
                          std::to_string(traj.size()) + " frames, expected " +
                          std::to_string(geom.horizon));
    }
    for (int t = 0; t < geom.horizon; ++t) {
      if (mask.cells(h, t / width) != 0) {
        out.pairs.push_back({traj[t].state, traj[t].action, h, t});
      }
    }
  }
  return out;
}

std::vector<MaskGrid> segment_probe_masks(const GridGeometry& geom, int n_masks,
                                          std::uint64_t seed) {
  if (n_masks < 1) throw ConfigError("probes", "probe count must be >= 1");
  std::vector<MaskGrid> masks;
  masks.reserve(n_masks);
  for (int k = 0; k < n_masks; ++k) {
    Rng rng(derive_seed(seed, k));
    MaskGrid mask;
    mask.cells.resize(geom.demo_count, geom.snippets);
    long kept = 0;
    do {
      kept = 0;
      for (int h = 0; h < geom.demo_count; ++h) {
        for (int g = 0; g < geom.snippets; ++g) {
          const auto bit = static_cast<std::uint8_t>(rng.uniform_int(2));
          mask.cells(h, g) = bit;
          kept += bit;
        }
      }
    } while (kept == 0);  // an all-masked probe trains nothing; redraw
    mask.keep_fraction = static_cast<double>(kept) / static_cast<double>(geom.cell_count());
    masks.push_back(std::move(mask));
  }
  return masks;
}

}  // namespace demosal
