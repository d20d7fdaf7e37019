#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "rlcf/core/hash.hpp"
#include "rlcf/core/png.hpp"
#include "rlcf/core/rng.hpp"
#include "rlcf/env/gridpac.hpp"
#include "rlcf/env/preprocess.hpp"

using namespace rlcf;

namespace {

Image random_image(Rng &rng, int h, int w) {
  Image img(h, w);
  for (auto &p : img.pixels)
    p = static_cast<std::uint8_t>(rng.uniform_index(256));
  return img;
}

GrayFrame constant_frame(float v, int h = 32, int w = 32) {
  return {h, w, std::vector<float>(static_cast<std::size_t>(h * w), v)};
}

} // namespace

// ---------------------------------------------------------------- config

TEST(EnvConfig, DefaultIsValidAndRoundTrips) {
  const EnvConfig c = EnvConfig::gridpac_default();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.raw_height(), 52);
  EXPECT_EQ(c.raw_width(), 52);
  const EnvConfig back = env_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(EnvConfig, ErrorsNameTheBadField) {
  auto j = to_json(EnvConfig::gridpac_default());
  j["noop_max"] = -1;
  try {
    env_config_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.field(), "noop_max");
  }

  j = to_json(EnvConfig::gridpac_default());
  j["reward_profile"] = "gold";
  try {
    env_config_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.field(), "reward_profile");
  }

  j = to_json(EnvConfig::gridpac_default());
  j["maze"][3] = "#.#";
  EXPECT_THROW(env_config_from_json(j), ConfigError);

  j = to_json(EnvConfig::gridpac_default());
  j["palette"]["ghost"] = {0, 0, 0};
  try {
    env_config_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.field(), "palette");
  }
}

// ---------------------------------------------------------------- reset

TEST(Reset, ZeroNoopsStartsAtTickZero) {
  GridPac env(EnvConfig::gridpac_default());
  env.reset(7, 0);
  EXPECT_EQ(env.noops_at_reset(), 0);
  EXPECT_EQ(env.tick(), 0);
  EXPECT_FALSE(env.done());
}

TEST(Reset, DeterministicForFixedSeed) {
  GridPac a(EnvConfig::gridpac_default());
  GridPac b(EnvConfig::gridpac_default());
  const StateImage s1 = a.reset(7, 30);
  const StateImage s2 = a.reset(7, 30);
  const StateImage s3 = b.reset(7, 30);
  EXPECT_EQ(s1.pixels, s2.pixels);
  EXPECT_EQ(s1.pixels, s3.pixels);
  EXPECT_EQ(a.tile_grid(), b.tile_grid());
}

TEST(Reset, NoopCountsCoverFullRange) {
  GridPac env(EnvConfig::gridpac_default());
  std::vector<int> histogram(31, 0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    env.reset(seed, 30);
    ASSERT_GE(env.noops_at_reset(), 0);
    ASSERT_LE(env.noops_at_reset(), 30);
    ++histogram[env.noops_at_reset()];
  }
  for (int n = 0; n <= 30; ++n)
    EXPECT_GT(histogram[n], 0) << "no reset drew " << n << " no-ops";
}

TEST(Reset, RejectsNegativeNoopMax) {
  GridPac env(EnvConfig::gridpac_default());
  EXPECT_THROW(env.reset(1, -1), ConfigError);
}

// ---------------------------------------------------------------- deflicker

TEST(Deflicker, IdempotentOnIdenticalFrames) {
  Rng rng(1);
  const Image f = random_image(rng, 9, 7);
  EXPECT_EQ(deflicker(f, f), f);
}

TEST(Deflicker, MaxWithWhiteIsWhite) {
  const Image black(6, 6, 0), white(6, 6, 255);
  EXPECT_EQ(deflicker(black, white), white);
}

TEST(Deflicker, MatchesPerPixelLoopAndCommutes) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Image a = random_image(rng, 13, 11), b = random_image(rng, 13, 11);
    const Image m = deflicker(a, b);
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x)
        for (int c = 0; c < 3; ++c) {
          const int expect = a.at(y, x, c) > b.at(y, x, c) ? a.at(y, x, c)
                                                           : b.at(y, x, c);
          ASSERT_EQ(m.at(y, x, c), expect);
        }
    EXPECT_EQ(m, deflicker(b, a));
  }
}

TEST(Deflicker, ShapeMismatchThrows) {
  EXPECT_THROW(deflicker(Image(4, 4), Image(4, 5)), ShapeError);
}

// ---------------------------------------------------------------- preprocess

TEST(Preprocess, UniformGrayMapsToItsLevel) {
  for (int c : {0, 17, 128, 255}) {
    const Image gray(52, 52, static_cast<std::uint8_t>(c));
    const GrayFrame f = preprocess(gray, 32, 32);
    ASSERT_EQ(f.values.size(), 32u * 32u);
    for (float v : f.values)
      EXPECT_NEAR(v, c / 255.0, 1e-6);
  }
}

TEST(Preprocess, CheckerboardMatchesBlockAverage) {
  // 64x64 checkerboard of 3x3 squares, downsampled by exactly 2.
  Image img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const bool on = ((y / 3) + (x / 3)) % 2 == 0;
      img.at(y, x, 0) = on ? 200 : 10;
      img.at(y, x, 1) = on ? 40 : 250;
      img.at(y, x, 2) = on ? 90 : 0;
    }
  const GrayFrame f = preprocess(img, 32, 32);
  for (int oy = 0; oy < 32; ++oy)
    for (int ox = 0; ox < 32; ++ox) {
      double acc = 0.0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const int y = 2 * oy + dy, x = 2 * ox + dx;
          acc += 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                 0.114 * img.at(y, x, 2);
        }
      ASSERT_NEAR(f.at(oy, ox), acc / 4.0 / 255.0, 1e-6);
    }
}

TEST(Preprocess, FractionalAreaMatchesSupersampledOracle) {
  // 52 -> 32 is a 13/8 ratio: replicate every input pixel 8x8 and every
  // output pixel covers exactly a 13x13 block of the replicated image.
  Rng rng(3);
  const Image img = random_image(rng, 52, 52);
  const GrayFrame f = preprocess(img, 32, 32);
  const auto gray = grayscale(img);
  for (int oy = 0; oy < 32; ++oy)
    for (int ox = 0; ox < 32; ++ox) {
      double acc = 0.0;
      for (int sy = oy * 13; sy < (oy + 1) * 13; ++sy)
        for (int sx = ox * 13; sx < (ox + 1) * 13; ++sx)
          acc += gray[(sy / 8) * 52 + sx / 8];
      ASSERT_NEAR(f.at(oy, ox), acc / 169.0 / 255.0, 1e-6);
    }
}

TEST(Preprocess, OutputAlwaysInUnitRange) {
  Rng rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const int h = 20 + static_cast<int>(rng.uniform_index(40));
    const int w = 20 + static_cast<int>(rng.uniform_index(40));
    const GrayFrame f = preprocess(random_image(rng, h, w), 16, 16);
    ASSERT_EQ(f.height, 16);
    ASSERT_EQ(f.width, 16);
    for (float v : f.values) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

// ---------------------------------------------------------------- stack/lift

TEST(Stack, PadsWithEarliestFrame) {
  const GrayFrame f = constant_frame(0.25f);
  const GrayFrame one[] = {f};
  const AgentObservation obs = stack(one);
  for (int i = 0; i < 4; ++i) {
    const auto s = obs.slice(i);
    EXPECT_TRUE(std::equal(s.begin(), s.end(), f.values.begin()));
  }
}

TEST(Stack, KeepsOrderAndSlides) {
  std::vector<GrayFrame> frames;
  for (int i = 1; i <= 5; ++i)
    frames.push_back(constant_frame(i / 10.0f));
  const AgentObservation four = stack(std::span(frames).first(4));
  const AgentObservation five = stack(frames);
  for (int i = 0; i < 4; ++i) {
    EXPECT_FLOAT_EQ(four.slice(i)[0], (i + 1) / 10.0f);
    EXPECT_FLOAT_EQ(five.slice(i)[0], (i + 2) / 10.0f);
  }
  const GrayFrame two[] = {constant_frame(0.1f), constant_frame(0.2f)};
  const AgentObservation padded = stack(two);
  EXPECT_FLOAT_EQ(padded.slice(0)[0], 0.1f);
  EXPECT_FLOAT_EQ(padded.slice(1)[0], 0.1f);
  EXPECT_FLOAT_EQ(padded.slice(2)[0], 0.1f);
  EXPECT_FLOAT_EQ(padded.slice(3)[0], 0.2f);
}

TEST(Stack, EmptyHistoryThrows) {
  EXPECT_THROW(stack(std::span<const GrayFrame>{}), std::invalid_argument);
}

TEST(Lift, ReplicatesOnePreprocessedFrame) {
  Rng rng(5);
  const Image img = random_image(rng, 52, 52);
  const AgentObservation obs = lift(img, 32, 32);
  const GrayFrame f = preprocess(img, 32, 32);
  for (int i = 0; i < 4; ++i) {
    const auto s = obs.slice(i);
    ASSERT_TRUE(std::equal(s.begin(), s.end(), f.values.begin()));
  }
  EXPECT_EQ(lift(img, 32, 32), obs);
}

// ---------------------------------------------------------------- step

TEST(Step, WallBlocksMovement) {
  GridPac env(EnvConfig::gridpac_default());
  env.reset(7, 0);
  // the start cell has a wall directly below it (row 12 is the border)
  const Cell before = env.player();
  const auto r = env.step(gridpac_action::down);
  EXPECT_EQ(env.player(), before);
  EXPECT_EQ(r.transition.reward, env.reward_profile().reward(env.last_events()));
}

TEST(Step, PillProfileRewardsPowerPill) {
  EnvConfig c = EnvConfig::gridpac_default();
  c.reward_profile = "pill";
  c.ghost_chase_prob = 0.0;
  c.maze[11] = "#o..o.P....o#";
  GridPac env(c);
  env.reset(3, 0);
  // ordinary pill to the left: no reward under the pill profile
  auto r = env.step(gridpac_action::left);
  EXPECT_EQ(env.last_events().pills, 1);
  EXPECT_DOUBLE_EQ(r.transition.reward, 0.0);
  r = env.step(gridpac_action::left);
  ASSERT_EQ(env.last_events().power_pills, 1);
  EXPECT_DOUBLE_EQ(r.transition.reward, 1.0);
}

TEST(Step, FearProfilePaysPerSurvivedStep) {
  EnvConfig c = EnvConfig::gridpac_default();
  c.reward_profile = "fear";
  GridPac env(c);
  env.reset(11, 0);
  const auto r = env.step(gridpac_action::noop);
  if (!env.last_events().died)
    EXPECT_DOUBLE_EQ(r.transition.reward, 1.0);
}

TEST(Step, AfterDoneThrows) {
  EnvConfig c = EnvConfig::gridpac_default();
  c.max_steps = 2;
  GridPac env(c);
  env.reset(1, 0);
  while (!env.done())
    env.step(gridpac_action::noop);
  EXPECT_THROW(env.step(gridpac_action::noop), StateError);
  EXPECT_THROW(GridPac(c).step(0), StateError);
}

TEST(Step, RejectsUnknownAction) {
  GridPac env(EnvConfig::gridpac_default());
  env.reset(1, 0);
  EXPECT_THROW(env.step(5), std::out_of_range);
}

TEST(Step, DeflickeredFrameShowsEveryGhost) {
  GridPac env(EnvConfig::gridpac_default());
  env.reset(21, 10);
  Rng rng(9);
  for (int t = 0; t < 60 && !env.done(); ++t) {
    const Image expected = GridPac::render_tiles(env.tile_grid(), env.config());
    ASSERT_EQ(env.state_image().pixels, expected);
    // exactly one of the two raw sub-frames hides the ghosts
    ASSERT_NE(env.previous_raw().pixels, env.current_raw().pixels);
    env.step(static_cast<ActionId>(rng.uniform_index(5)));
  }
}

TEST(Step, StateImagesKeepDeclaredShape) {
  GridPac env(EnvConfig::gridpac_default());
  env.reset(5, 30);
  Rng rng(6);
  while (!env.done()) {
    const auto r = env.step(static_cast<ActionId>(rng.uniform_index(5)));
    ASSERT_EQ(r.image.pixels.height, 52);
    ASSERT_EQ(r.image.pixels.width, 52);
    ASSERT_EQ(r.transition.next_state.height, 32);
    ASSERT_EQ(r.transition.next_state.data.size(), 4u * 32u * 32u);
  }
}

TEST(Step, CropRectangleApplies) {
  EnvConfig c = EnvConfig::gridpac_default();
  c.crop = {4, 8, 40, 36};
  c.obs_height = 24;
  c.obs_width = 24;
  GridPac env(c);
  const StateImage s = env.reset(2, 0);
  EXPECT_EQ(s.pixels.height, 36);
  EXPECT_EQ(s.pixels.width, 40);
  const Image full = GridPac::render_tiles(env.tile_grid(), c);
  EXPECT_EQ(s.pixels, crop(full, 4, 8, 40, 36));
}

namespace {

std::string trajectory_log(std::uint64_t seed) {
  GridPac env(EnvConfig::gridpac_default());
  Rng actions(seed * 31 + 1);
  std::ostringstream log;
  env.reset(seed, 30);
  log << "reset " << env.noops_at_reset() << " "
      << content_id(env.state_image().pixels.pixels) << "\n";
  while (!env.done()) {
    const ActionId a = static_cast<ActionId>(actions.uniform_index(5));
    const auto r = env.step(a);
    log << env.tick() << " " << a << " " << r.transition.reward << " "
        << r.transition.done << " " << content_id(r.image.pixels.pixels) << "\n";
  }
  return log.str();
}

} // namespace

TEST(Step, SeededEpisodesAreByteIdentical) {
  // Digests recorded from a reference run of these three seeded episodes.
  const std::pair<std::uint64_t, const char *> golden[] = {
      {101, "9f9a0aac791d104afe51e06474557b8de5d4a835577b651273b4612666b12ebc"},
      {202, "edd97cf508b63513315004976ba2108632ade8c22f40270655e9982dcc70a3b1"},
      {303, "150b88a1741d9f724253b385429051a497f147a58cb74e849085efe4359f8e5e"},
  };
  for (const auto &[seed, digest] : golden) {
    const std::string first = trajectory_log(seed);
    EXPECT_EQ(first, trajectory_log(seed));
    EXPECT_EQ(sha256_hex(first), digest) << "seed " << seed;
  }
}

// ---------------------------------------------------------------- png

TEST(Png, RoundTripIsLossless) {
  Rng rng(8);
  const Image img = random_image(rng, 17, 23);
  const auto bytes = png::encode(img);
  EXPECT_EQ(png::decode(bytes), img);
  EXPECT_EQ(png::encode(img), bytes);
  EXPECT_THROW(png::decode(std::vector<std::uint8_t>{1, 2, 3}), std::runtime_error);
}
