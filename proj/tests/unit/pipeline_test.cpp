/*
 * Copyright 2026 The Olens Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include "json.hpp"
#include "olens/error.hpp"
#include "olens/fileutil.hpp"
#include "olens/image_io.hpp"
#include "olens/pipeline.hpp"
#include "test_util.hpp"

namespace olens {
namespace {

namespace fs = std::filesystem;

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kInvalidArgument;
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto dir = testing::TempDir("ds") / "v";
  const Dataset ds = SynthesizeDataset(Task::kVessels, 3, 32, 5);
  SaveDataset(ds, dir);
  EXPECT_TRUE(fs::exists(dir / "img_00002.pgm"));
  EXPECT_TRUE(fs::exists(dir / "msk_00002.pgm"));
  const auto manifest = nlohmann::json::parse(ReadFileText(dir / "manifest.json"));
  EXPECT_EQ(manifest["count"], 3);
  EXPECT_EQ(manifest["generator"], "vessels");
  EXPECT_EQ(manifest["seed"], 5);
  const Dataset back = LoadDataset(dir);
  ASSERT_EQ(back.examples.size(), 3u);
  EXPECT_EQ(EncodePgm(back.examples[1].input), EncodePgm(ds.examples[1].input));
  EXPECT_EQ(EncodePgm(back.examples[1].mask), EncodePgm(ds.examples[1].mask));
}

TEST(Dataset, LesionLabelsCsv) {
  const auto dir = testing::TempDir("dsl") / "l";
  SaveDataset(SynthesizeDataset(Task::kLesions, 4, 32, 1, LesionMode::kQuadrant), dir);
  EXPECT_EQ(ReadFileText(dir / "labels.csv"), "index,label\n0,0\n1,1\n2,2\n3,3\n");
  const Dataset back = LoadDataset(dir);
  EXPECT_EQ(back.mode, LesionMode::kQuadrant);
  EXPECT_EQ(back.n_classes(), 4u);
  EXPECT_EQ(back.examples[2].label, 2);
}

TEST(Dataset, InconsistentDirectories) {
  const auto root = testing::TempDir("dsbad");
  EXPECT_EQ(CodeOf([&] { LoadDataset(root / "missing"); }), ErrorCode::kIoError);
  SaveDataset(SynthesizeDataset(Task::kVessels, 2, 32, 1), root / "v");
  WriteFileAtomic(root / "v" / "manifest.json", std::string("{\"generator\": 3}"));
  EXPECT_EQ(CodeOf([&] { LoadDataset(root / "v"); }), ErrorCode::kDataMismatch);
}

TEST(TrainPipeline, TaskMustMatchDataset) {
  const Dataset ds = SynthesizeDataset(Task::kVessels, 4, 32, 1);
  TrainOptions o;
  o.task = Task::kLesions;
  EXPECT_EQ(CodeOf([&] { TrainPipeline(ds, o); }), ErrorCode::kDataMismatch);
}

TEST(TrainPipeline, ZeroEpochsGivesInitializedNetwork) {
  const Dataset ds = SynthesizeDataset(Task::kVessels, 4, 32, 1);
  TrainOptions o;
  o.epochs = 0;
  o.seed = 3;
  o.base_channels = 2;
  const Network net = TrainPipeline(ds, o);
  const Network fresh = BuildUnet(2, o.dropout, {1, 32, 32}, 3);
  ASSERT_EQ(net.parameters().size(), fresh.parameters().size());
  for (std::size_t i = 0; i < fresh.parameters().size(); ++i) {
    const auto a = net.parameters()[i].data(), b = fresh.parameters()[i].data();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Uncertainty, OutputsAndScaling) {
  const Network net = BuildUnet(2, 0.3, {1, 32, 32}, 2);
  const Dataset ds = SynthesizeDataset(Task::kVessels, 1, 32, 1);
  const UncertaintyRun run =
      RunUncertainty(net, ds.examples[0].input, 6, Decomposition::kVariance, 4);
  EXPECT_LT(run.identity_residual, 1e-9);
  const auto dir = testing::TempDir("unc") / "out";
  WriteUncertainty(run, dir);
  for (const char* f : {"mean.pgm", "epistemic.pgm", "aleatoric.pgm", "epistemic.ppm",
                        "aleatoric.ppm", "stats.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  // Aleatoric is stored divided by its ceiling of 1/4.
  const Tensor alea = ReadPgm(dir / "aleatoric.pgm");
  EXPECT_EQ(QuantizeUnit(alea[0]), QuantizeUnit(run.result.aleatoric[0] / 0.25));
  const auto stats = nlohmann::json::parse(ReadFileText(dir / "stats.json"));
  EXPECT_EQ(stats["T"], 6);
  EXPECT_EQ(stats["seed"], 4);
  EXPECT_EQ(stats["decomposition"], "variance");
  EXPECT_TRUE(stats.contains("identity_residual"));
}

TEST(Uncertainty, WrongInputSize) {
  const Network net = BuildUnet(2, 0.3, {1, 32, 32}, 2);
  EXPECT_EQ(CodeOf([&] {
              RunUncertainty(net, Tensor::Zeros({1, 64, 64}), 4,
                             Decomposition::kVariance, 0);
            }),
            ErrorCode::kCheckpointMismatch);
}

TEST(Explain, TargetResolution) {
  const Network cls = BuildClassifier(2, {1, 32, 32}, 0.1, 1);
  const Tensor x = Tensor::Full({1, 32, 32}, 0.4);
  std::string resolved;
  ResolveTarget(cls, x, "", &resolved);
  EXPECT_EQ(resolved.rfind("class:", 0), 0u);
  EXPECT_EQ(CodeOf([&] { ResolveTarget(cls, x, "class:9", nullptr); }),
            ErrorCode::kBadTarget);
  EXPECT_EQ(CodeOf([&] { ResolveTarget(cls, x, "class:x", nullptr); }),
            ErrorCode::kBadTarget);
  EXPECT_EQ(CodeOf([&] { ResolveTarget(cls, x, "region:auto", nullptr); }),
            ErrorCode::kBadTarget);
  EXPECT_EQ(CodeOf([&] { ResolveTarget(cls, x, "pixels", nullptr); }),
            ErrorCode::kBadTarget);
}

TEST(Explain, WritesGridAndParams) {
  const Network cls = BuildClassifier(2, {1, 32, 32}, 0.1, 1);
  const Tensor x = SynthesizeDataset(Task::kLesions, 2, 32, 1).examples[1].input;
  ExplainOptions o;
  o.method = SaliencyMethod::kIntegrated;
  o.target = "class:1";
  const ExplainRun run = RunExplain(cls, x, o);
  const auto dir = testing::TempDir("exp") / "out";
  WriteExplain(run, x, dir);
  const Tensor grid = DecodeF64Grid(ReadFileBytes(dir / "attributions.f64"));
  EXPECT_EQ(grid.shape(), (Shape{32, 32}));
  const auto params = nlohmann::json::parse(ReadFileText(dir / "params.json"));
  EXPECT_EQ(params["method"], "ig");
  EXPECT_LE(params["completeness_residual"].get<double>(),
            0.01 * std::abs(params["score_delta"].get<double>()));
  EXPECT_TRUE(fs::exists(dir / "heatmap.ppm"));
  EXPECT_TRUE(fs::exists(dir / "overlay.ppm"));
}

TEST(Report, LayoutAndEpistemicTile) {
  const Network net = BuildUnet(2, 0.3, {1, 32, 32}, 2);
  Tensor x = SynthesizeDataset(Task::kVessels, 1, 32, 3).examples[0].input;
  ReportOptions o;
  o.samples = 4;
  o.ig_steps = 4;
  o.n_noise = 2;
  o.seed = 8;
  const Report rep = BuildReport(net, x, o);
  ASSERT_EQ(rep.tiles.size(), 8u);
  EXPECT_EQ(rep.tiles[2], "epistemic");
  EXPECT_EQ(rep.panel.dim(2), 8u * 32u + 7u * 2u);
  // Third tile must equal the standalone epistemic heatmap.
  const UncertaintyRun u = RunUncertainty(net, x, 4, Decomposition::kVariance, 8);
  const Tensor heat = UncertaintyHeatmap(u, u.result.epistemic);
  const std::size_t width = rep.panel.dim(2), x0 = 2 * (32 + 2);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t xx = 0; xx < 32; ++xx)
        ASSERT_EQ(rep.panel[(c * 32 + y) * width + x0 + xx], heat[(c * 32 + y) * 32 + xx]);
}

}  // namespace
}  // namespace olens
