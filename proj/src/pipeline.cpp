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


#include "olens/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "olens/error.hpp"
#include "olens/fileutil.hpp"
#include "olens/image_io.hpp"
#include "olens/render.hpp"

namespace olens {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kPretrainStream = 0xA0C5;

std::string IndexedName(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.pgm", prefix, i);
  return buf;
}

Json MapStats(const Tensor& map) {
  const auto v = map.data();
  double lo = v[0], hi = v[0], mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
    mean += (v[i] - mean) / static_cast<double>(i + 1);
  }
  return Json{{"min", lo}, {"max", hi}, {"mean", mean}};
}

// Classifier maps are [K]; images want a row.
Tensor AsImage(const Tensor& t) {
  if (t.rank() == 1) return t.Reshaped({1, 1, t.dim(0)});
  if (t.rank() == 2) return t.Reshaped({1, t.dim(0), t.dim(1)});
  return t;
}

Tensor ScaleClamped(const Tensor& t, double scale) {
  Tensor out = t.Clone();
  for (double& x : out.MutableData()) x = std::clamp(x / scale, 0.0, 1.0);
  return out;
}

Tensor GrayToRgb(const Tensor& gray) {
  return RenderHeatmap(gray.Reshaped({gray.dim(gray.rank() - 2),
                                      gray.dim(gray.rank() - 1)}),
                       Colormap::kGray);
}

}  // namespace

std::string_view TaskName(Task task) {
  return task == Task::kVessels ? "vessels" : "lesions";
}

Task ParseTask(std::string_view name) {
  if (name == "vessels") return Task::kVessels;
  if (name == "lesions") return Task::kLesions;
  throw Error(ErrorCode::kInvalidArgument,
              "task must be vessels or lesions, got '" + std::string(name) + "'");
}

std::size_t Dataset::n_classes() const {
  if (task == Task::kVessels) return 0;
  return mode == LesionMode::kBinary ? 2 : 4;
}

Dataset SynthesizeDataset(Task task, std::size_t n, std::size_t size,
                          std::uint64_t seed, LesionMode mode) {
  Dataset ds;
  ds.task = task;
  ds.mode = mode;
  ds.size = size;
  ds.seed = seed;
  if (task == Task::kVessels) {
    for (auto& s : GenerateVessels(n, size, seed)) {
      ds.examples.push_back({std::move(s.image), std::move(s.mask), -1});
    }
  } else {
    for (auto& s : GenerateLesions(n, size, mode, seed)) {
      ds.examples.push_back({std::move(s.image), Tensor(), s.label});
    }
  }
  return ds;
}

std::string DatasetManifest(const Dataset& ds) {
  Json args{{"n", ds.examples.size()}, {"size", ds.size}};
  if (ds.task == Task::kLesions) args["mode"] = std::string(LesionModeName(ds.mode));
  Json j{{"generator", std::string(TaskName(ds.task))},
         {"args", args},
         {"seed", ds.seed},
         {"count", ds.examples.size()},
         {"version", kDatasetVersion}};
  return j.dump(2) + "\n";
}

void SaveDataset(const Dataset& ds, const fs::path& dir) {
  OutputDir out(dir);
  std::string labels = "index,label\n";
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    const Example& ex = ds.examples[i];
    out.Add(IndexedName("img", i), EncodePgm(ex.input));
    if (ds.task == Task::kVessels) {
      out.Add(IndexedName("msk", i), EncodePgm(ex.mask));
    } else {
      labels += std::to_string(i) + "," + std::to_string(ex.label) + "\n";
    }
  }
  if (ds.task == Task::kLesions) out.Add("labels.csv", labels);
  out.Add("manifest.json", DatasetManifest(ds));
  out.Commit();
}

Dataset LoadDataset(const fs::path& dir) {
  Json j;
  try {
    j = Json::parse(ReadFileText(dir / "manifest.json"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kDataMismatch,
                std::string("manifest.json is not valid JSON: ") + e.what());
  }
  Dataset ds;
  std::size_t count = 0;
  try {
    ds.task = ParseTask(j.at("generator").get<std::string>());
    ds.seed = j.at("seed").get<std::uint64_t>();
    count = j.at("count").get<std::size_t>();
    ds.size = j.at("args").at("size").get<std::size_t>();
    if (j.at("version").get<int>() != kDatasetVersion) {
      throw Error(ErrorCode::kDataMismatch, "unsupported dataset version");
    }
    if (ds.task == Task::kLesions) {
      const std::string mode = j.at("args").at("mode").get<std::string>();
      if (mode == "binary") ds.mode = LesionMode::kBinary;
      else if (mode == "quadrant") ds.mode = LesionMode::kQuadrant;
      else throw Error(ErrorCode::kDataMismatch, "unknown lesion mode " + mode);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kDataMismatch, std::string("bad manifest: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDataMismatch) throw;
    throw Error(ErrorCode::kDataMismatch, std::string("bad manifest: ") + e.what());
  }

  std::vector<int> labels(count, -1);
  if (ds.task == Task::kLesions) {
    std::istringstream in(ReadFileText(dir / "labels.csv"));
    std::string line;
    std::getline(in, line);
    if (line != "index,label") {
      throw Error(ErrorCode::kDataMismatch, "labels.csv header must be index,label");
    }
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::size_t idx = 0;
      int label = 0;
      if (std::sscanf(line.c_str(), "%zu,%d", &idx, &label) != 2 || idx >= count ||
          label < 0 || static_cast<std::size_t>(label) >= ds.n_classes()) {
        throw Error(ErrorCode::kDataMismatch, "bad labels.csv row: " + line);
      }
      labels[idx] = label;
      ++rows;
    }
    if (rows != count) {
      throw Error(ErrorCode::kDataMismatch, "labels.csv row count differs from manifest");
    }
  }

  const Shape want{1, ds.size, ds.size};
  for (std::size_t i = 0; i < count; ++i) {
    Example ex;
    ex.input = ReadPgm(dir / IndexedName("img", i));
    if (ex.input.shape() != want) {
      throw Error(ErrorCode::kDataMismatch,
                  IndexedName("img", i) + " does not match the manifest size");
    }
    if (ds.task == Task::kVessels) {
      ex.mask = ReadPgm(dir / IndexedName("msk", i));
      if (ex.mask.shape() != want) {
        throw Error(ErrorCode::kDataMismatch,
                    IndexedName("msk", i) + " does not match the manifest size");
      }
    }
    ex.label = labels[i];
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

double DefaultLearningRate(Task task) {
  return task == Task::kVessels ? 1e-3 : 1e-2;
}

Network TrainPipeline(const Dataset& ds, const TrainOptions& o,
                      const EpochCallback& on_epoch,
                      const EpochCallback& on_pretrain_epoch) {
  if (ds.task != o.task) {
    throw Error(ErrorCode::kDataMismatch,
                "dataset was generated for " + std::string(TaskName(ds.task)) +
                    ", not " + std::string(TaskName(o.task)));
  }
  if (ds.examples.size() < 2) {
    throw Error(ErrorCode::kEmptyDataset, "training needs at least 2 examples");
  }
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.learning_rate = o.learning_rate.value_or(DefaultLearningRate(o.task));
  cfg.optimizer = o.optimizer;
  cfg.seed = o.seed;
  cfg.val_fraction = o.val_fraction;
  const Shape shape{1, ds.size, ds.size};

  if (o.task == Task::kVessels) {
    Network net = BuildUnet(o.base_channels, o.dropout, shape, o.seed);
    cfg.loss = LossKind::kDice;
    cfg.Validate();
    Train(net, ds.examples, cfg, on_epoch);
    return net;
  }

  Network net = BuildClassifier(ds.n_classes(), shape, o.dropout, o.seed,
                                o.base_channels);
  cfg.loss = LossKind::kCrossEntropy;
  cfg.Validate();
  if (o.pretrain_epochs > 0 && o.pretrain_samples > 0) {
    const std::size_t n_aux = (o.pretrain_samples + 3) / 4 * 4;
    std::vector<Example> aux;
    for (auto& s : GenerateLesions(n_aux, ds.size, LesionMode::kQuadrant,
                                   MixSeed(o.seed ^ kPretrainStream))) {
      aux.push_back({std::move(s.image), Tensor(), s.label});
    }
    TrainConfig pcfg = cfg;
    pcfg.epochs = o.pretrain_epochs;
    PretrainFeatures(net, aux, 4, pcfg, on_pretrain_epoch);
  }
  Train(net, ds.examples, cfg, on_epoch);
  return net;
}

std::string EpochReportJson(const EpochReport& r, const char* phase) {
  Json j{{"phase", phase},
         {"epoch", r.epoch},
         {"train_loss", r.train_loss},
         {"val_loss", r.val_loss}};
  return j.dump();
}

bool IsClassifier(const Network& net) { return net.output_shape().size() == 1; }

void CheckInputFits(const Network& net, const Tensor& input) {
  if (input.shape() != net.input_shape()) {
    throw Error(ErrorCode::kCheckpointMismatch,
                "input shape " + ShapeToString(input.shape()) +
                    " does not match checkpoint input " +
                    ShapeToString(net.input_shape()));
  }
}

UncertaintyRun RunUncertainty(const Network& net, const Tensor& input,
                              std::size_t T, Decomposition decomposition,
                              std::uint64_t seed) {
  CheckInputFits(net, input);
  const McSampleSet set = McSample(net, input, T, seed);
  UncertaintyRun run;
  run.classifier = IsClassifier(net);
  run.dropout_free = set.dropout_free;
  run.seed = seed;
  if (run.classifier) {
    run.result = UncertaintyForClassifier(set);
    run.result.decomposition = Decomposition::kVariance;
  } else if (decomposition == Decomposition::kEntropy) {
    run.result = DecomposeEntropy(set);
  } else {
    run.result = DecomposeVariance(set);
  }
  run.identity_residual =
      run.result.decomposition == Decomposition::kVariance
          ? DecompositionResidual(run.result)
          : 0.0;
  return run;
}

double UncertaintyDisplayScale(Decomposition d) {
  return d == Decomposition::kVariance ? 0.25 : std::log(2.0);
}

Tensor UncertaintyHeatmap(const UncertaintyRun& run, const Tensor& map) {
  const Tensor img =
      AsImage(ScaleClamped(map, UncertaintyDisplayScale(run.result.decomposition)));
  return RenderHeatmap(img.Reshaped({img.dim(1), img.dim(2)}), Colormap::kInferno);
}

std::string UncertaintyStatsJson(const UncertaintyRun& run) {
  const UncertaintyResult& r = run.result;
  Json j;
  j["kind"] = run.classifier ? "classification" : "segmentation";
  j["T"] = r.T;
  j["decomposition"] =
      r.decomposition == Decomposition::kVariance ? "variance" : "entropy";
  j["seed"] = run.seed;
  j["dropout_free"] = run.dropout_free;
  j["display_scale"] = UncertaintyDisplayScale(r.decomposition);
  j["mean"] = MapStats(r.mean);
  j["epistemic"] = MapStats(r.epistemic);
  j["aleatoric"] = MapStats(r.aleatoric);
  if (r.decomposition == Decomposition::kVariance) {
    j["identity_residual"] = run.identity_residual;
  }
  if (run.classifier) {
    Json per = Json::array();
    for (std::size_t k = 0; k < r.mean.size(); ++k) {
      per.push_back({{"class", k},
                     {"mean", r.mean.data()[k]},
                     {"epistemic", r.epistemic.data()[k]},
                     {"aleatoric", r.aleatoric.data()[k]}});
    }
    j["classes"] = per;
  }
  return j.dump(2) + "\n";
}

std::string WriteUncertainty(const UncertaintyRun& run, const fs::path& dir) {
  const UncertaintyResult& r = run.result;
  const double scale = UncertaintyDisplayScale(r.decomposition);
  const std::string stats = UncertaintyStatsJson(run);
  OutputDir out(dir);
  out.Add("mean.pgm", EncodePgm(AsImage(ScaleClamped(r.mean, 1.0))));
  out.Add("epistemic.pgm", EncodePgm(AsImage(ScaleClamped(r.epistemic, scale))));
  out.Add("aleatoric.pgm", EncodePgm(AsImage(ScaleClamped(r.aleatoric, scale))));
  out.Add("epistemic.ppm", EncodePpm(UncertaintyHeatmap(run, r.epistemic)));
  out.Add("aleatoric.ppm", EncodePpm(UncertaintyHeatmap(run, r.aleatoric)));
  out.Add("stats.json", stats);
  out.Commit();
  return stats;
}

SaliencyTarget ResolveTarget(const Network& net, const Tensor& input,
                             const std::string& spec, std::string* resolved) {
  const bool classifier = IsClassifier(net);
  std::string s = spec;
  if (s.empty()) {
    if (!classifier) {
      s = "region:auto";
    } else {
      const Tensor p = net.Forward(input);
      const auto v = p.data();
      s = "class:" + std::to_string(std::max_element(v.begin(), v.end()) - v.begin());
    }
  }
  if (resolved) *resolved = s;
  if (s.rfind("class:", 0) == 0) {
    if (!classifier) {
      throw Error(ErrorCode::kBadTarget,
                  "class targets need a classifier checkpoint; use region:auto");
    }
    const std::string num = s.substr(6);
    std::size_t k = 0;
    std::size_t used = 0;
    try {
      k = std::stoul(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (num.empty() || used != num.size() || num[0] == '-') {
      throw Error(ErrorCode::kBadTarget, "bad class index in target '" + s + "'");
    }
    if (k >= net.output_shape()[0]) {
      throw Error(ErrorCode::kBadTarget,
                  "class " + std::to_string(k) + " out of range for a " +
                      std::to_string(net.output_shape()[0]) + "-class checkpoint");
    }
    return SaliencyTarget::ClassScore(k);
  }
  if (s == "region:auto") {
    if (classifier) {
      throw Error(ErrorCode::kBadTarget,
                  "region targets need a segmentation checkpoint; use class:K");
    }
    ops::Mask mask = ForegroundMask(net, input);
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m; })) {
      throw Error(ErrorCode::kBadTarget, "region:auto found no foreground pixels");
    }
    return SaliencyTarget::RegionSum(std::move(mask));
  }
  throw Error(ErrorCode::kBadTarget,
              "target must be class:K or region:auto, got '" + s + "'");
}

ExplainRun RunExplain(const Network& net, const Tensor& input,
                      const ExplainOptions& o) {
  CheckInputFits(net, input);
  ExplainRun run;
  run.seed = o.seed;
  const SaliencyTarget target = ResolveTarget(net, input, o.target, &run.target);
  SmoothGradOptions so;
  so.samples = o.n_noise;
  so.sigma = o.sigma;
  so.seed = o.seed;
  so.ig_steps = o.ig_steps;
  so.baseline = o.baseline;
  run.map = Explain(o.method, o.smooth, net, input, target, so);
  return run;
}

Tensor SaliencyHeatmap(const SaliencyMap& map) {
  Tensor mag = map.attributions.Clone();
  for (double& x : mag.MutableData()) x = std::fabs(x);
  return RenderHeatmap(NormalizeForDisplay(mag, kDisplayPercentile),
                       Colormap::kInferno);
}

std::string ExplainParamsJson(const ExplainRun& run) {
  const SaliencyMap& m = run.map;
  Json j;
  j["method"] = std::string(SaliencyMethodName(m.method));
  j["smooth"] = m.smoothed;
  j["target"] = run.target;
  j["seed"] = run.seed;
  j["shape"] = {m.attributions.dim(0), m.attributions.dim(1)};
  if (m.method == SaliencyMethod::kIntegrated) {
    j["ig_steps"] = m.params.ig_steps;
    j["baseline"] = std::string(BaselineKindName(m.params.baseline_kind));
  }
  if (m.smoothed) {
    j["sigma"] = m.params.noise_sigma;
    j["n_noise"] = m.params.n_noise;
  }
  if (m.completeness_residual) j["completeness_residual"] = *m.completeness_residual;
  if (m.score_delta) j["score_delta"] = *m.score_delta;
  Json stats = MapStats(m.attributions);
  j["attribution"] = stats;
  return j.dump(2) + "\n";
}

std::string WriteExplain(const ExplainRun& run, const Tensor& input,
                         const fs::path& dir) {
  const std::string params = ExplainParamsJson(run);
  const Tensor base = input.Reshaped({input.dim(1), input.dim(2)});
  Tensor norm = run.map.attributions.Clone();
  for (double& x : norm.MutableData()) x = std::fabs(x);
  norm = NormalizeForDisplay(norm, kDisplayPercentile);
  OutputDir out(dir);
  out.Add("attributions.f64", EncodeF64Grid(run.map.attributions));
  out.Add("heatmap.ppm", EncodePpm(SaliencyHeatmap(run.map)));
  out.Add("overlay.ppm", EncodePpm(RenderOverlay(base, norm, kOverlayAlpha)));
  out.Add("params.json", params);
  out.Commit();
  return params;
}

Report BuildReport(const Network& net, const Tensor& input,
                   const ReportOptions& o) {
  CheckInputFits(net, input);
  Report rep;
  std::vector<Tensor> tiles;
  tiles.push_back(GrayToRgb(input));
  rep.tiles.push_back("input");
  if (!IsClassifier(net)) {
    const UncertaintyRun u =
        RunUncertainty(net, input, o.samples, Decomposition::kVariance, o.seed);
    tiles.push_back(GrayToRgb(u.result.mean));
    rep.tiles.push_back("prediction");
    tiles.push_back(UncertaintyHeatmap(u, u.result.epistemic));
    rep.tiles.push_back("epistemic");
    tiles.push_back(UncertaintyHeatmap(u, u.result.aleatoric));
    rep.tiles.push_back("aleatoric");
  }
  ExplainOptions eo;
  eo.ig_steps = o.ig_steps;
  eo.n_noise = o.n_noise;
  eo.sigma = o.sigma;
  eo.seed = o.seed;
  const struct {
    SaliencyMethod method;
    bool smooth;
    const char* name;
  } kinds[] = {{SaliencyMethod::kVanilla, false, "vanilla"},
               {SaliencyMethod::kGuided, false, "guided"},
               {SaliencyMethod::kIntegrated, false, "ig"},
               {SaliencyMethod::kVanilla, true, "smoothgrad"}};
  for (const auto& k : kinds) {
    eo.method = k.method;
    eo.smooth = k.smooth;
    tiles.push_back(SaliencyHeatmap(RunExplain(net, input, eo).map));
    rep.tiles.push_back(k.name);
  }
  rep.panel = TileHorizontal(tiles);
  return rep;
}

std::string WriteReport(const Report& rep, const fs::path& dir) {
  Json j{{"tiles", rep.tiles},
         {"width", rep.panel.dim(2)},
         {"height", rep.panel.dim(1)},
         {"separator", 2}};
  const std::string text = j.dump(2) + "\n";
  OutputDir out(dir);
  out.Add("report.ppm", EncodePpm(rep.panel));
  out.Add("report.json", text);
  out.Commit();
  return text;
}

}  // namespace olens
