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


#ifndef OLENS_PIPELINE_HPP_
#define OLENS_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "olens/network.hpp"
#include "olens/saliency.hpp"
#include "olens/synth.hpp"
#include "olens/training.hpp"
#include "olens/uncertainty.hpp"

// End-to-end workflows behind the command-line tool: dataset directories,
// training runs and the uncertainty / saliency / report output directories.
namespace olens {

enum class Task { kVessels, kLesions };
std::string_view TaskName(Task task);
Task ParseTask(std::string_view name);

inline constexpr int kDatasetVersion = 1;

struct Dataset {
  Task task = Task::kVessels;
  LesionMode mode = LesionMode::kBinary;
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::vector<Example> examples;

  std::size_t n_classes() const;
};

Dataset SynthesizeDataset(Task task, std::size_t n, std::size_t size,
                          std::uint64_t seed,
                          LesionMode mode = LesionMode::kBinary);

// {"generator", "args", "seed", "count", "version"}.
std::string DatasetManifest(const Dataset& dataset);

// Directory layout: img_%05d.pgm, msk_%05d.pgm (vessels), labels.csv
// (lesions, "index,label"), manifest.json. Written atomically.
void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir);
// Throws IoError for unreadable files and DataMismatch for an inconsistent
// manifest.
Dataset LoadDataset(const std::filesystem::path& dir);

// Used when TrainOptions::learning_rate is unset. The classifier only fits a
// linear head and tolerates a larger step than the U-Net.
double DefaultLearningRate(Task task);

struct TrainOptions {
  Task task = Task::kVessels;
  std::size_t epochs = 30;
  std::optional<double> learning_rate;
  double dropout = 0.2;
  std::uint64_t seed = 0;
  std::size_t batch_size = 8;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::size_t base_channels = 8;
  double val_fraction = 0.2;
  // Lesion task only: feature pretraining on an independently generated
  // quadrant-labelled set.
  std::size_t pretrain_epochs = 8;
  std::size_t pretrain_samples = 400;
};

// Builds the task's network and trains it on `dataset`. Throws DataMismatch
// when the dataset does not belong to options.task.
Network TrainPipeline(const Dataset& dataset, const TrainOptions& options,
                      const EpochCallback& on_epoch = {},
                      const EpochCallback& on_pretrain_epoch = {});

// One JSON object, no trailing newline: epoch, train_loss, val_loss.
std::string EpochReportJson(const EpochReport& report, const char* phase = "train");

bool IsClassifier(const Network& net);

// Throws CheckpointMismatch when `input` does not fit the network.
void CheckInputFits(const Network& net, const Tensor& input);

struct UncertaintyRun {
  UncertaintyResult result;
  bool classifier = false;
  bool dropout_free = false;
  std::uint64_t seed = 0;
  double identity_residual = 0.0;
};

UncertaintyRun RunUncertainty(const Network& net, const Tensor& input,
                              std::size_t T, Decomposition decomposition,
                              std::uint64_t seed);

// Largest value a map can take under the decomposition (0.25 or ln 2); maps
// are divided by it before quantization so images are comparable.
double UncertaintyDisplayScale(Decomposition decomposition);

// mean.pgm, epistemic.pgm, aleatoric.pgm, epistemic.ppm, aleatoric.ppm and
// stats.json. Returns the stats JSON.
std::string WriteUncertainty(const UncertaintyRun& run,
                             const std::filesystem::path& dir);
std::string UncertaintyStatsJson(const UncertaintyRun& run);
// Inferno rendering of one map (the epistemic.ppm / aleatoric.ppm image).
Tensor UncertaintyHeatmap(const UncertaintyRun& run, const Tensor& map);

struct ExplainOptions {
  SaliencyMethod method = SaliencyMethod::kVanilla;
  bool smooth = false;
  // "class:K", "region:auto" or empty for the network's default target.
  std::string target;
  std::size_t ig_steps = kDefaultIgSteps;
  double sigma = kDefaultSmoothSigma;
  std::size_t n_noise = kDefaultSmoothSamples;
  std::uint64_t seed = 0;
  BaselineKind baseline = BaselineKind::kZeros;
};

struct ExplainRun {
  SaliencyMap map;
  std::string target;  // resolved target description
  std::uint64_t seed = 0;
};

// Throws BadTarget when the target does not fit the network kind.
SaliencyTarget ResolveTarget(const Network& net, const Tensor& input,
                             const std::string& spec, std::string* resolved);

ExplainRun RunExplain(const Network& net, const Tensor& input,
                      const ExplainOptions& options);

inline constexpr double kDisplayPercentile = 99.0;
inline constexpr double kOverlayAlpha = 0.6;

// Inferno rendering of |attributions| clipped at the 99th percentile.
Tensor SaliencyHeatmap(const SaliencyMap& map);

// attributions.f64, heatmap.ppm, overlay.ppm, params.json. Returns the JSON.
std::string WriteExplain(const ExplainRun& run, const Tensor& input,
                         const std::filesystem::path& dir);
std::string ExplainParamsJson(const ExplainRun& run);

struct ReportOptions {
  std::size_t samples = kDefaultMcSamples;
  std::uint64_t seed = 0;
  std::size_t ig_steps = kDefaultIgSteps;
  std::size_t n_noise = kDefaultSmoothSamples;
  double sigma = kDefaultSmoothSigma;
};

struct Report {
  Tensor panel;                     // [3,H,W_total]
  std::vector<std::string> tiles;   // tile names, left to right
};

// Segmentation: input | prediction | epistemic | aleatoric | vanilla |
// guided | ig | smoothgrad. Classification: input | vanilla | guided | ig |
// smoothgrad. Tiles are separated by 2-pixel white columns.
Report BuildReport(const Network& net, const Tensor& input,
                   const ReportOptions& options);

// report.ppm and report.json. Returns the JSON.
std::string WriteReport(const Report& report, const std::filesystem::path& dir);

}  // namespace olens

#endif  // OLENS_PIPELINE_HPP_
