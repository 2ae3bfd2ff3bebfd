#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seedgate/manifest.hpp"
#include "seedgate/scale_space.hpp"
#include "seedgate/synthetic_fixtures.hpp"
#include "test_support.hpp"

using namespace seedgate;
using seedgate::testing::random_map;
using seedgate::testing::random_vector;
using seedgate::testing::ScratchDir;

namespace {

std::vector<ScaleCandidate> candidates(const std::vector<double>& sem, const std::vector<double>& spa) {
  std::vector<ScaleCandidate> out;
  for (std::size_t k = 0; k < sem.size(); ++k) {
    ScaleCandidate c;
    c.k = static_cast<int>(k);
    c.box = Box{static_cast<int>(k), 0, static_cast<int>(k) + 10, 10};
    c.s_sem = sem[k];
    c.s_spa = spa[k];
    out.push_back(c);
  }
  return out;
}

AttributionIngredients ingredients(std::vector<double> w, DenseMap aff, DenseMap values) {
  AttributionIngredients ing;
  ing.channel_weights = std::move(w);
  ing.affinities = std::move(aff);
  ing.values = std::move(values);
  return ing;
}

}  // namespace

TEST(CropPyramid, CenteredAndTranslatedBoxes) {
  auto p = build_crop_pyramid({100, 100}, {50, 50}, {1.0, 0.5});
  ASSERT_EQ(p.boxes.size(), 2u);
  EXPECT_EQ(p.boxes[0], (Box{0, 0, 100, 100}));
  EXPECT_EQ(p.boxes[1], (Box{25, 25, 75, 75}));

  p = build_crop_pyramid({100, 100}, {5, 50}, {0.5});
  EXPECT_EQ(p.boxes[0], (Box{0, 25, 50, 75}));
  EXPECT_TRUE(p.boxes[0].contains({5, 50}));
}

TEST(CropPyramid, NestedBoxesAllContainTheClick) {
  const auto p = build_crop_pyramid({64, 64}, {32, 32}, default_scale_schedule());
  ASSERT_EQ(p.boxes.size(), 5u);
  for (std::size_t k = 0; k < p.boxes.size(); ++k) {
    EXPECT_TRUE(p.boxes[k].contains({32, 32}));
    EXPECT_TRUE(p.boxes[k].inside(64, 64));
    if (k > 0) {
      const Box& outer = p.boxes[k - 1];
      const Box& inner = p.boxes[k];
      EXPECT_LE(outer.x0, inner.x0);
      EXPECT_LE(outer.y0, inner.y0);
      EXPECT_GE(outer.x1, inner.x1);
      EXPECT_GE(outer.y1, inner.y1);
    }
  }
}

TEST(CropPyramid, EveryBoxContainsTheClickAnywhere) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> extent(8, 90);
  for (int i = 0; i < 300; ++i) {
    const FrameSize f{extent(rng), extent(rng)};
    const Pixel click{std::uniform_int_distribution<int>(0, f.width - 1)(rng),
                      std::uniform_int_distribution<int>(0, f.height - 1)(rng)};
    for (const Box& b : build_crop_pyramid(f, click, default_scale_schedule()).boxes) {
      EXPECT_TRUE(b.contains(click));
      EXPECT_TRUE(b.inside(f.height, f.width));
    }
  }
}

TEST(Schedule, Validation) {
  EXPECT_THROW(validate_schedule({}), Error);
  EXPECT_THROW(validate_schedule({0.5, 0.5}), Error);
  EXPECT_THROW(validate_schedule({1.2, 0.5}), Error);
  EXPECT_THROW(validate_schedule({0.5, 0.0}), Error);
  EXPECT_NO_THROW(validate_schedule(default_scale_schedule()));
}

TEST(SemanticScore, Examples) {
  EXPECT_DOUBLE_EQ(semantic_score(EmbeddingVector({1, 2}), EmbeddingVector({1, 2})), 1.0);
  EXPECT_EQ(semantic_score(EmbeddingVector({1, 2}), EmbeddingVector({-1, -2})), 0.0);
  EXPECT_NEAR(semantic_score(EmbeddingVector({1, 2, 3}), EmbeddingVector({4, 5, 6})), 0.974631846, 1e-9);
}

TEST(PsiNormalize, Examples) {
  EXPECT_EQ(psi_normalize(std::vector<double>{2, 4, 6}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(psi_normalize(std::vector<double>{5, 5}), (std::vector<double>{1, 1}));
  EXPECT_EQ(psi_normalize(std::vector<double>{-1, 0, 1}), (std::vector<double>{0, 0.5, 1}));
}

TEST(LayerAttribution, Examples) {
  auto negative = layer_attribution(ingredients({1.0}, DenseMap(2, 2, 1, 7.0), DenseMap(2, 2, 1, -3.0)));
  for (double v : negative.data()) EXPECT_EQ(v, 0.0);

  auto hand = layer_attribution(ingredients({2.0, 0.0}, DenseMap::scalar(1, 2, {1.0, 0.0}),
                                            DenseMap(1, 2, 2, std::vector<double>{3, 9, 5, 7})));
  EXPECT_DOUBLE_EQ(hand[0], 6.0);
  EXPECT_DOUBLE_EQ(hand[1], 0.0);

  std::mt19937_64 rng(1);
  auto zero_w = layer_attribution(ingredients({0.0, 0.0, 0.0}, random_map(rng, 3, 3, 1), random_map(rng, 3, 3, 3)));
  for (double v : zero_w.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerAttribution, NonNegativeOnRandomIngredients) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    const int dc = 1 + i % 5;
    const auto a = layer_attribution(
        ingredients(random_vector(rng, dc, -2, 2), random_map(rng, 4, 4, 1, -5, 5), random_map(rng, 4, 4, dc, -3, 3)));
    for (double v : a.data()) EXPECT_GE(v, 0.0);
  }
}

TEST(LayerAttribution, ShapeErrors) {
  EXPECT_THROW(layer_attribution(ingredients({1.0, 2.0}, DenseMap(2, 2, 1), DenseMap(2, 2, 1))), Error);
  EXPECT_THROW(layer_attribution(ingredients({1.0}, DenseMap(2, 3, 1), DenseMap(2, 2, 1))), Error);
}

TEST(AggregateLayers, Examples) {
  const auto x = DenseMap::scalar(1, 3, {1, 4, 7});
  EXPECT_EQ(aggregate_layers({x}).data(), x.data());
  const auto half = aggregate_layers({DenseMap(1, 3, 1), x});
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(half[i], x[i] / 2);
  const auto two = aggregate_layers({DenseMap(2, 2, 1, 1.0), DenseMap(2, 2, 1, 2.0), DenseMap(2, 2, 1, 3.0)});
  for (double v : two.data()) EXPECT_DOUBLE_EQ(v, 2.0);
}

TEST(SeedScore, WorkedExamples) {
  const StabilityConfig eps{1e-8};
  EXPECT_NEAR(seed_score(DenseMap(4, 4, 1, 0.7), eps), 0.7, 1e-6);
  DenseMap hot(4, 4, 1);
  hot.at(0, 0) = 1.0;
  EXPECT_NEAR(seed_score(hot, eps), 0.0, 1e-6);
  EXPECT_NEAR(seed_score(DenseMap::scalar(2, 2, {4, 4, 0, 0}), eps), 1.0, 1e-6);
}

TEST(SeedScore, ScalesLinearlyWithTheMap) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> factor(0.1, 20.0);
  for (int i = 0; i < 200; ++i) {
    auto a = random_map(rng, 4, 4, 1, 0.0, 1.0);
    double total = 0.0;
    for (double v : a.data()) total += v;
    if (total < 1.0) continue;
    const double c = factor(rng);
    DenseMap scaled = a;
    for (double& v : scaled.data()) v *= c;
    const double base = seed_score(a, {1e-8});
    EXPECT_LE(std::abs(seed_score(scaled, {1e-8}) - c * base), 1e-6 * c * base);
  }
}

TEST(SelectScale, WorkedExamples) {
  auto s = select_scale(candidates({0.9, 0.9}, {0.2, 0.8}));
  EXPECT_EQ(s.k_star, 1);

  s = select_scale(candidates({0.2, 0.8, 0.5}, {0.5, 0.5, 0.5}));
  EXPECT_EQ(s.k_star, 1);

  s = select_scale(candidates({0.1, 0.6, 0.9}, {0.9, 0.6, 0.1}));
  EXPECT_EQ(s.k_star, 1);
  EXPECT_NEAR(s.normalized[0].product, 0.0, 1e-12);
  EXPECT_NEAR(s.normalized[1].product, 0.390625, 1e-12);
  EXPECT_NEAR(s.normalized[2].product, 0.0, 1e-12);
  EXPECT_NEAR(s.normalized[1].sem, 0.625, 1e-12);
  EXPECT_NEAR(s.normalized[1].spa, 0.625, 1e-12);
  EXPECT_EQ(s.box, (Box{1, 0, 11, 10}));
}

TEST(SelectScale, TiesGoToTheLargestContext) {
  EXPECT_EQ(select_scale(candidates({0.5, 0.5, 0.5}, {0.3, 0.3, 0.3})).k_star, 0);
  EXPECT_THROW(select_scale(candidates({0.5}, {0.5})), Error);
}

TEST(SelectScale, ArgmaxInvariantUnderPositiveAffineMaps) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> a(0.05, 10.0), b(-5.0, 5.0);
  for (int i = 0; i < 300; ++i) {
    const std::size_t k = 2 + i % 5;
    const auto sem = random_vector(rng, k, 0, 1);
    const auto spa = random_vector(rng, k, 0, 3);
    const double a1 = a(rng), b1 = b(rng), a2 = a(rng), b2 = b(rng);
    std::vector<double> sem2, spa2;
    for (std::size_t j = 0; j < k; ++j) {
      sem2.push_back(a1 * sem[j] + b1);
      spa2.push_back(a2 * spa[j] + b2);
    }
    EXPECT_EQ(select_scale(candidates(sem, spa)).k_star, select_scale(candidates(sem2, spa2)).k_star);
  }
}

TEST(RunStage1, SyntheticCaseSelectsTheMiddleScale) {
  ScratchDir dir("scale_space");
  const auto c = synthetic::write_stage1_case(dir.path());
  const auto in = load_stage1_inputs(load_manifest(c.manifest));
  const auto r = run_stage1(in);
  ASSERT_EQ(r.candidates.size(), 3u);
  EXPECT_EQ(r.selection.k_star, 1);
  EXPECT_EQ(r.selection.box, (Box{13, 13, 51, 51}));
  // The attribution is the layer mean, 1.5x the designed map.
  EXPECT_NEAR(r.candidates[0].s_spa, 0.3, 1e-6);
  EXPECT_NEAR(r.candidates[2].s_spa, 0.0, 1e-6);
  EXPECT_NEAR(r.candidates[0].s_sem, 0.6, 1e-6);
  EXPECT_NEAR(r.candidates[2].s_sem, 0.95, 1e-6);
}

TEST(RunStage1, IdenticalCropsTieToTheFirstScale) {
  Stage1Inputs in;
  in.frame = {32, 32};
  in.interaction = {{10, 12}, "liver"};
  in.schedule = {1.0, 0.7, 0.4};
  in.text_embedding = EmbeddingVector({1.0, 0.0});
  CropFixture crop;
  crop.embedding = EmbeddingVector({0.8, 0.6});
  crop.layers.push_back(ingredients({1.0}, DenseMap(3, 3, 1, 1.0), DenseMap(3, 3, 1, 0.5)));
  in.crops = {crop, crop, crop};
  EXPECT_EQ(run_stage1(in).selection.k_star, 0);

  in.crops[1].layers.clear();
  try {
    run_stage1(in);
    ADD_FAILURE() << "expected MissingFixture";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFixture);
  }
  in.crops.pop_back();
  EXPECT_THROW(run_stage1(in), Error);
}

TEST(RunStage1, MissingLayerFileIsReportedAtLoad) {
  ScratchDir dir("scale_space_missing");
  const auto c = synthetic::write_stage1_case(dir.path());
  std::filesystem::remove(dir / "crop1_l1_v.sgt");
  try {
    load_manifest(c.manifest);
    ADD_FAILURE() << "expected MissingFixture";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFixture);
  }
}
