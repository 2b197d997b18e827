#include <doctest.h>

#include "demosal/masking.hpp"
#include "demosal/rng.hpp"
#include "demosal/types.hpp"

using namespace demosal;

TEST_CASE("snippet ranges") {
  CHECK(snippet_frame_range(GridGeometry(1, 1000, 100), 0).begin == 0);
  CHECK(snippet_frame_range(GridGeometry(1, 1000, 100), 0).end == 10);
  CHECK(snippet_frame_range(GridGeometry(1, 8, 4), 3).begin == 6);
  CHECK(snippet_frame_range(GridGeometry(1, 8, 4), 3).end == 8);
  CHECK(snippet_frame_range(GridGeometry(1, 8, 8), 5).begin == 5);
  CHECK(snippet_frame_range(GridGeometry(1, 8, 8), 5).end == 6);
  CHECK_THROWS_AS(snippet_frame_range(GridGeometry(1, 8, 4), 4), std::out_of_range);
  CHECK_THROWS_AS(snippet_frame_range(GridGeometry(1, 8, 4), -1), std::out_of_range);
}

TEST_CASE("snippet ranges partition the horizon") {
  Rng rng(5);
  for (int iter = 0; iter < 50; ++iter) {
    const int width = 1 + static_cast<int>(rng.uniform_int(12));
    const int snippets = 1 + static_cast<int>(rng.uniform_int(20));
    const GridGeometry geom(1, width * snippets, snippets);
    std::vector<int> covered(geom.horizon, 0);
    for (int g = 0; g < geom.snippets; ++g) {
      const FrameRange range = snippet_frame_range(geom, g);
      for (int t = range.begin; t < range.end; ++t) covered[t] += 1;
    }
    for (int t = 0; t < geom.horizon; ++t) REQUIRE(covered[t] == 1);
  }
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(GridGeometry(1, 8, 3), ConfigError);
  CHECK_THROWS_AS(GridGeometry(0, 8, 4), ConfigError);
  CHECK_THROWS_AS(GridGeometry(1, 8, 0), ConfigError);
  CHECK(GridGeometry(2, 0, 4).frames_per_snippet() == 0);  // zero-horizon edge
}

TEST_CASE("cell counts") {
  const auto half = gen_masks(GridGeometry(2, 8, 4), 50.0, 1, 0).front();
  CHECK(cell_count(half).kept == 4);
  CHECK(cell_count(half).masked == 4);

  const auto paper_scale = gen_masks(GridGeometry(20, 1000, 100), 10.0, 1, 0).front();
  CHECK(cell_count(paper_scale).kept == 1800);
  CHECK(cell_count(paper_scale).masked == 200);

  const auto trivial = gen_masks(GridGeometry(1, 4, 1), 0.0, 1, 0).front();
  CHECK(cell_count(trivial).kept == 1);
  CHECK(cell_count(trivial).masked == 0);
  CHECK(trivial.keep_fraction == 1.0);
}

TEST_CASE("mask construction always hits the kept quota") {
  Rng rng(17);
  for (int iter = 0; iter < 40; ++iter) {
    const int demo_count = 1 + static_cast<int>(rng.uniform_int(8));
    const int snippets = 1 + static_cast<int>(rng.uniform_int(12));
    const GridGeometry geom(demo_count, snippets, snippets);
    const double level = static_cast<double>(rng.uniform_int(100));
    const long quota =
        round_half_even((100.0 - level) * static_cast<double>(geom.cell_count()) / 100.0);
    if (quota < 1) continue;
    for (const auto& mask : gen_masks(geom, level, 3, rng.next_u64())) {
      REQUIRE(mask.kept_cells() == quota);
      REQUIRE(mask.kept_cells() ==
              round_half_even(mask.keep_fraction * static_cast<double>(geom.cell_count())));
    }
  }
}

TEST_CASE("return stats") {
  const auto stats = make_return_stats({1.0, 2.0, 3.0});
  CHECK(stats.mean == doctest::Approx(2.0));
  CHECK(stats.stddev == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(stats.per_rollout.size() == 3);
  CHECK_THROWS_AS(make_return_stats({}), ContractError);
}

TEST_CASE("half-even rounding") {
  CHECK(round_half_even(2.5) == 2);
  CHECK(round_half_even(3.5) == 4);
  CHECK(round_half_even(7.5) == 8);
  CHECK(round_half_even(-2.5) == -2);
  CHECK(round_half_even(4.2) == 4);
}

TEST_CASE("config validation names the offending key") {
  RunConfig config;
  validate_config(config);  // defaults are valid

  config.demo_count = 0;
  CHECK_THROWS_WITH_AS(validate_config(config), "H: H must be >= 1", ConfigError);
  config.demo_count = 20;

  config.level = 100.0;
  try {
    validate_config(config);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "level");
    CHECK(std::string(e.what()).find("zero kept cells") != std::string::npos);
  }
  config.level = 50.0;

  config.n_rollouts = 0;
  CHECK_THROWS_AS(validate_config(config), ConfigError);
}
