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

// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status
// is nonzero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "olens/checkpoint.hpp"
#include "olens/error.hpp"
#include "olens/image_io.hpp"
#include "olens/network.hpp"
#include "olens/ops.hpp"
#include "olens/pipeline.hpp"
#include "olens/saliency.hpp"
#include "olens/synth.hpp"
#include "olens/training.hpp"
#include "olens/uncertainty.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using namespace olens;
using olens::testing::GradCheck;
using olens::testing::RandomTensor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

// ---------------------------------------------------------------------------
// 1. Gradient suite

Tensor Weighted(const Tensor& t, std::uint64_t seed, Tape* tape) {
  RngStream rng(seed);
  const Tensor w = RandomTensor(t.shape(), rng, -1, 1, false);
  return ops::Reduce(ops::Mul(t, w, tape), ops::ReduceKind::kSum, nullptr, tape);
}

// Biases start at zero, which puts dead regions exactly on the relu kink.
// Random biases move the network to a generic, differentiable point.
void RandomizeBiases(Network& net, RngStream& rng) {
  for (Tensor& p : net.parameters()) {
    if (p.rank() != 1) continue;
    for (double& b : p.MutableData()) b = 0.2 * (rng.Uniform() - 0.5);
  }
}

struct GradCase {
  std::string name;
  olens::testing::ScalarFn fn;
  std::function<std::vector<Tensor>(RngStream&)> leaves;
  std::size_t max_elems = 0;
};

std::vector<GradCase> GradCases() {
  using V = std::vector<Tensor>;
  std::vector<GradCase> c;
  c.push_back({"conv2d",
               [](const V& v, Tape* t) {
                 return Weighted(ops::Conv2d(v[0], v[1], v[2], 1, 1, t), 11, t);
               },
               [](RngStream& r) {
                 return V{RandomTensor({2, 16, 16}, r), RandomTensor({3, 2, 3, 3}, r),
                          RandomTensor({3}, r)};
               }});
  c.push_back({"conv2d_stride2",
               [](const V& v, Tape* t) {
                 return Weighted(ops::Conv2d(v[0], v[1], v[2], 2, 0, t), 12, t);
               },
               [](RngStream& r) {
                 return V{RandomTensor({2, 15, 15}, r), RandomTensor({2, 2, 3, 3}, r),
                          RandomTensor({2}, r)};
               }});
  c.push_back({"maxpool",
               [](const V& v, Tape* t) { return Weighted(ops::MaxPool2d(v[0], t), 13, t); },
               [](RngStream& r) { return V{RandomTensor({2, 16, 16}, r)}; }});
  c.push_back({"upsample",
               [](const V& v, Tape* t) {
                 return Weighted(ops::Upsample2dNearest(v[0], t), 14, t);
               },
               [](RngStream& r) { return V{RandomTensor({2, 8, 8}, r)}; }});
  c.push_back({"relu",
               [](const V& v, Tape* t) { return Weighted(ops::Relu(v[0], t), 15, t); },
               [](RngStream& r) { return V{RandomTensor({1, 16, 16}, r)}; }});
  c.push_back({"sigmoid",
               [](const V& v, Tape* t) { return Weighted(ops::Sigmoid(v[0], t), 16, t); },
               [](RngStream& r) { return V{RandomTensor({1, 16, 16}, r, -4, 4)}; }});
  c.push_back({"dense",
               [](const V& v, Tape* t) {
                 return Weighted(ops::Dense(v[0], v[1], v[2], t), 17, t);
               },
               [](RngStream& r) {
                 return V{RandomTensor({12}, r), RandomTensor({4, 12}, r),
                          RandomTensor({4}, r)};
               }});
  c.push_back({"dropout",
               [](const V& v, Tape* t) {
                 RngStream mask(99);
                 return Weighted(ops::Dropout(v[0], 0.3, mask, true, t), 18, t);
               },
               [](RngStream& r) { return V{RandomTensor({2, 8, 8}, r)}; }});
  c.push_back({"reduce",
               [](const V& v, Tape* t) {
                 ops::Mask m(v[0].size(), 0);
                 for (std::size_t i = 0; i < m.size(); i += 3) m[i] = 1;
                 return ops::Add(
                     ops::Reduce(ops::Mul(v[0], v[0], t), ops::ReduceKind::kMean, &m, t),
                     ops::Reduce(v[0], ops::ReduceKind::kSum, nullptr, t), t);
               },
               [](RngStream& r) { return V{RandomTensor({3, 5}, r)}; }});
  c.push_back({"concat_reshape",
               [](const V& v, Tape* t) {
                 const Tensor cat = ops::ConcatChannels(v[0], v[1], t);
                 return Weighted(ops::Reshape(cat, {cat.size()}, t), 19, t);
               },
               [](RngStream& r) {
                 return V{RandomTensor({1, 4, 4}, r), RandomTensor({2, 4, 4}, r)};
               }});
  c.push_back({"softmax",
               [](const V& v, Tape* t) { return Weighted(ops::Softmax(v[0], t), 20, t); },
               [](RngStream& r) { return V{RandomTensor({6}, r, -3, 3)}; }});
  c.push_back({"arithmetic",
               [](const V& v, Tape* t) {
                 Tensor s = ops::Sub(ops::Add(v[0], v[1], t), ops::Mul(v[0], v[1], t), t);
                 s = ops::Div(s, ops::AddScalar(ops::Scale(v[1], 2.0, t), 0.5, t), t);
                 return Weighted(s, 21, t);
               },
               [](RngStream& r) {
                 return V{RandomTensor({2, 3, 3}, r, 0.2, 2), RandomTensor({2, 3, 3}, r, 0.2, 2)};
               }});
  c.push_back({"log_select",
               [](const V& v, Tape* t) {
                 const Tensor l = ops::Log(v[0], t);
                 return ops::Add(Weighted(l, 22, t), ops::Select(l, 4, t), t);
               },
               [](RngStream& r) { return V{RandomTensor({9}, r, 0.1, 3)}; }});
  c.push_back({"dice_loss",
               [](const V& v, Tape* t) {
                 RngStream m(23);
                 std::vector<double> target(v[0].size());
                 for (double& x : target) x = m.Bernoulli(0.4) ? 1.0 : 0.0;
                 return DiceLoss(v[0], Tensor(v[0].shape(), target), 1.0, t);
               },
               [](RngStream& r) { return V{RandomTensor({1, 16, 16}, r, 0.05, 0.95)}; }});
  c.push_back({"cross_entropy",
               [](const V& v, Tape* t) { return CrossEntropy(ops::Softmax(v[0], t), 2, t); },
               [](RngStream& r) { return V{RandomTensor({4}, r, -2, 2)}; }});

  // Tiny instances of both networks; every parameter tensor and the input are
  // leaves. Dropout masks are fixed by reseeding on each evaluation.
  struct NetHolder {
    std::shared_ptr<Network> net;
  };
  auto net_case = [](std::string name, std::function<Network(std::uint64_t)> build) {
    auto holder = std::make_shared<NetHolder>();
    GradCase g;
    g.name = std::move(name);
    g.max_elems = 24;
    g.leaves = [holder, build](RngStream& r) {
      holder->net = std::make_shared<Network>(build(r.NextU64()));
      RandomizeBiases(*holder->net, r);
      V leaves = holder->net->parameters();
      leaves.insert(leaves.begin(), RandomTensor({1, 16, 16}, r, 0, 1));
      return leaves;
    };
    g.fn = [holder](const V& v, Tape* t) {
      RngStream mask(7);
      ForwardOptions fo;
      fo.mode = ForwardMode::kStochastic;
      fo.rng = &mask;
      fo.tape = t;
      return Weighted(holder->net->Forward(v[0], fo), 24, t);
    };
    return g;
  };
  c.push_back(net_case("unet", [](std::uint64_t s) {
    return BuildUnet(2, 0.2, {1, 16, 16}, s);
  }));
  c.push_back(net_case("classifier", [](std::uint64_t s) {
    return BuildClassifier(3, {1, 16, 16}, 0.2, s, 2);
  }));
  return c;
}

// Second-difference bound for skipping entries next to a relu or max-pool
// switch; see GradCheck.
constexpr double kKinkTol = 1e-9;

Outcome GradientSuite() {
  const auto start = std::chrono::steady_clock::now();
  constexpr int kSeeds = 10;
  double worst = 0.0;
  std::string worst_case;
  std::size_t checked = 0, skipped = 0;
  for (GradCase& gc : GradCases()) {
    for (int seed = 0; seed < kSeeds; ++seed) {
      RngStream rng(1000 + seed);
      const auto leaves = gc.leaves(rng);
      const auto r = GradCheck(gc.fn, leaves, 1e-5, gc.max_elems, seed, kKinkTol);
      checked += r.checked;
      skipped += r.skipped;
      if (r.max_rel_error >= worst) {
        worst = r.max_rel_error;
        worst_case = gc.name + Fmt(" seed %d", seed);
      }
    }
  }
  const double secs = Seconds(start);
  const double skipped_frac = static_cast<double>(skipped) / (checked + skipped);
  return {worst < 1e-4 && secs < 60.0 && skipped_frac < 0.05,
          Fmt("max rel err %.2e (%s), %zu entries, %zu skipped at relu/pool switches "
              "(%.2f%%), %d seeds, %.1f s (limits 1e-4, 5%% skipped, 60 s)",
              worst, worst_case.c_str(), checked, skipped, 100 * skipped_frac, kSeeds,
              secs)};
}

// ---------------------------------------------------------------------------
// 2. Decomposition identity

Outcome DecompositionIdentity() {
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(2024);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    McSampleSet s;
    const std::size_t T = 2 + rng.UniformInt(63);
    const std::size_t n = 1 + rng.UniformInt(64);
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> p(n);
      for (double& x : p) x = rng.Uniform();
      s.samples.emplace_back(Shape{n}, std::move(p));
    }
    worst = std::max(worst, DecompositionResidual(DecomposeVariance(s)));
  }
  const double secs = Seconds(start);
  return {worst < 1e-12 && secs < 5.0,
          Fmt("max residual %.2e over 1000 sets, %.2f s (limits 1e-12, 5 s)", worst,
              secs)};
}

// ---------------------------------------------------------------------------
// 3. Integrated-gradients completeness

Outcome IgAxioms() {
  const auto start = std::chrono::steady_clock::now();
  const Shape shape{1, 16, 16};
  double linear_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Network probe = BuildLinearProbe(shape, 3, seed);
    RngStream rng(500 + seed);
    const Tensor x = RandomTensor(shape, rng, 0, 1, false);
    const Tensor base = MakeBaseline(BaselineKind::kZeros, shape);
    for (std::size_t m : {1, 8, 64}) {
      const auto map =
          IntegratedGradients(probe, x, base, SaliencyTarget::ClassScore(seed % 3), m);
      linear_worst = std::max(linear_worst, *map.completeness_residual);
    }
  }
  bool nonlinear_ok = true;
  double worst_ratio = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    // Smooth two-layer conv net. The target is the class whose score moves
    // most along the path, keeping |F(x) - F(x')| away from zero.
    const std::vector<LayerSpec> layers = {
        LayerSpec::Conv(1, 4, 3, 1), LayerSpec::Simple(LayerKind::kSigmoid),
        LayerSpec::Conv(4, 4, 3, 1), LayerSpec::Simple(LayerKind::kSigmoid),
        LayerSpec::Simple(LayerKind::kFlatten), LayerSpec::Dense(4 * 16 * 16, 3)};
    Network net("smooth", shape, layers, 40 + seed);
    RngStream rng(600 + seed);
    RandomizeBiases(net, rng);
    const Tensor x = RandomTensor(shape, rng, 0, 1, false);
    const Tensor base = MakeBaseline(BaselineKind::kZeros, shape);
    std::size_t best = 0;
    double best_delta = -1.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto t = SaliencyTarget::ClassScore(k);
      const double d = std::abs(TargetScore(net, x, t) - TargetScore(net, base, t));
      if (d > best_delta) {
        best_delta = d;
        best = k;
      }
    }
    const auto target = SaliencyTarget::ClassScore(best);
    const auto m32 = IntegratedGradients(net, x, base, target, 32);
    const auto m512 = IntegratedGradients(net, x, base, target, 512);
    const double r32 = *m32.completeness_residual, r512 = *m512.completeness_residual;
    const double delta = std::abs(*m512.score_delta);
    const bool ok = r512 <= 0.01 * delta && r512 <= r32;
    nonlinear_ok = nonlinear_ok && ok;
    worst_ratio = std::max(worst_ratio, r512 / std::max(delta, 1e-300));
    per_seed += Fmt(" [%.1e/%.1e/%.1e]", r512, r32, delta);
  }
  const double secs = Seconds(start);
  return {linear_worst <= 1e-12 && nonlinear_ok && secs < 120.0,
          Fmt("linear max residual %.2e; nonlinear max r512/|dF| %.2e, "
              "[r512/r32/|dF|]:%s; %.1f s (limits 1e-12, 0.01, 120 s)",
              linear_worst, worst_ratio, per_seed.c_str(), secs)};
}

// ---------------------------------------------------------------------------
// 4. U-Net training on synthetic vessels, shared with 5.

constexpr std::uint64_t kVesselDataSeed = 7;
constexpr std::uint64_t kVesselTrainSeed = 1;

struct VesselRun {
  Network net;
  std::vector<EpochReport> reports;
  double seconds = 0.0;
};

const VesselRun& Vessels() {
  static const VesselRun run = [] {
    const auto start = std::chrono::steady_clock::now();
    const Dataset ds = SynthesizeDataset(Task::kVessels, 200, 64, kVesselDataSeed);
    TrainOptions o;
    o.task = Task::kVessels;
    o.epochs = 30;
    o.seed = kVesselTrainSeed;
    std::vector<EpochReport> reports;
    Network net = TrainPipeline(ds, o, [&](const EpochReport& r) {
      reports.push_back(r);
      std::printf("      %s\n", EpochReportJson(r).c_str());
      std::fflush(stdout);
    });
    return VesselRun{std::move(net), std::move(reports), Seconds(start)};
  }();
  return run;
}

Outcome UnetTraining() {
  const VesselRun& run = Vessels();
  const EpochReport& last = run.reports.back();
  const double gap = std::abs(last.train_loss - last.val_loss);
  return {last.val_loss <= 0.35 && gap <= 0.10 && run.reports.size() <= 30 &&
              run.seconds <= 900.0,
          Fmt("epochs %zu, train %.4f, val %.4f, gap %.4f, %.0f s "
              "(limits val 0.35, gap 0.10, 900 s)",
              run.reports.size(), last.train_loss, last.val_loss, gap, run.seconds)};
}

// ---------------------------------------------------------------------------
// 5. Thin vessels carry more epistemic uncertainty than thick ones.

Outcome ThinVesselUncertainty() {
  const VesselRun& run = Vessels();
  // Held out: a generator seed never used for training.
  const auto held_out = GenerateVessels(10, 64, kVesselDataSeed + 1000);
  int wins = 0;
  std::string per_image;
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const auto& s = held_out[i];
    const UncertaintyResult u =
        DecomposeVariance(McSample(run.net, s.image, 50, 300 + i));
    double thin = 0, thick = 0;
    std::size_t n_thin = 0, n_thick = 0;
    for (std::size_t p = 0; p < s.meta.width_class.size(); ++p) {
      if (s.meta.width_class[p] == WidthClass::kThin) {
        thin += u.epistemic[p];
        ++n_thin;
      } else if (s.meta.width_class[p] == WidthClass::kThick) {
        thick += u.epistemic[p];
        ++n_thick;
      }
    }
    if (n_thin == 0 || n_thick == 0) continue;
    thin /= n_thin;
    thick /= n_thick;
    if (thin > thick) ++wins;
    per_image += Fmt(" %.4f/%.4f", thin, thick);
  }
  return {wins >= 8, Fmt("thin > thick on %d of 10 images at T=50 (need 8); "
                         "thin/thick:%s",
                         wins, per_image.c_str())};
}

// ---------------------------------------------------------------------------
// 6. Saliency localization on the lesion classifier, shared with 7.

constexpr std::size_t kLesionSize = 32;
constexpr std::uint64_t kLesionDataSeed = 11;
constexpr std::uint64_t kLesionTrainSeed = 3;

TrainOptions LesionOptions() {
  TrainOptions o;
  o.task = Task::kLesions;
  o.epochs = 30;
  o.seed = kLesionTrainSeed;
  return o;
}

const Network& Lesions() {
  static const Network net = [] {
    const Dataset ds = SynthesizeDataset(Task::kLesions, 200, kLesionSize, kLesionDataSeed);
    return TrainPipeline(ds, LesionOptions());
  }();
  return net;
}

Outcome SaliencyLocalization() {
  const auto start = std::chrono::steady_clock::now();
  const Network& net = Lesions();
  const auto test = GenerateLesions(200, kLesionSize, LesionMode::kBinary,
                                    kLesionDataSeed + 1000);
  std::size_t correct = 0;
  std::vector<const LesionSample*> positives;
  for (const auto& s : test) {
    const Tensor p = net.Forward(s.image);
    const int pred = p[1] > p[0] ? 1 : 0;
    if (pred == s.label) {
      ++correct;
      if (s.label == 1) positives.push_back(&s);
    }
  }
  const double accuracy = static_cast<double>(correct) / test.size();

  struct Variant {
    SaliencyMethod method;
    bool smooth;
  };
  const Variant variants[] = {
      {SaliencyMethod::kVanilla, false},   {SaliencyMethod::kGuided, false},
      {SaliencyMethod::kIntegrated, false}, {SaliencyMethod::kVanilla, true},
      {SaliencyMethod::kGuided, true},     {SaliencyMethod::kIntegrated, true},
  };
  bool all_ok = accuracy >= 0.90 && !positives.empty();
  std::string detail = Fmt("test accuracy %.3f (need 0.90), %zu correct positives;",
                           accuracy, positives.size());
  for (const Variant& v : variants) {
    SmoothGradOptions so;
    so.seed = 5;
    std::size_t hits = 0;
    for (const LesionSample* s : positives) {
      const SaliencyMap map = Explain(v.method, v.smooth, net, s->image,
                                      SaliencyTarget::ClassScore(1), so);
      const double mass = AttributionMassFraction(
          map.attributions, QuadrantMask(kLesionSize, s->meta.quadrant));
      if (mass > 0.25) ++hits;
    }
    const double frac =
        positives.empty() ? 0.0 : static_cast<double>(hits) / positives.size();
    all_ok = all_ok && frac >= 0.80;
    detail += Fmt(" %s%s %.3f", v.smooth ? "smooth-" : "",
                  std::string(SaliencyMethodName(v.method)).c_str(), frac);
  }
  detail += Fmt(" (need 0.80 with mass > 0.25); %.0f s", Seconds(start));
  return {all_ok, detail};
}

// ---------------------------------------------------------------------------
// 7. Frozen convolutions

std::vector<std::vector<double>> ConvParams(const Network& net) {
  std::vector<std::vector<double>> out;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].kind != LayerKind::kConv) continue;
    for (std::size_t i : net.layer_parameters(l)) {
      const auto d = net.parameters()[i].data();
      out.emplace_back(d.begin(), d.end());
    }
  }
  return out;
}

bool SameBytes(const std::vector<std::vector<double>>& a,
               const std::vector<std::vector<double>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size() ||
        std::memcmp(a[i].data(), b[i].data(), a[i].size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

Outcome FrozenConvs() {
  const Dataset ds = SynthesizeDataset(Task::kLesions, 200, kLesionSize, kLesionDataSeed);
  // Same options with zero head epochs: the network as it stands right after
  // feature pretraining, before the frozen-stack training run.
  TrainOptions before_opts = LesionOptions();
  before_opts.epochs = 0;
  const Network before = TrainPipeline(ds, before_opts);
  const Network& after = Lesions();
  const bool convs_same = SameBytes(ConvParams(before), ConvParams(after));
  bool head_changed = false;
  for (std::size_t l = 0; l < after.layers().size(); ++l) {
    if (after.layers()[l].kind != LayerKind::kDense) continue;
    for (std::size_t i : after.layer_parameters(l)) {
      const auto a = after.parameters()[i].data(), b = before.parameters()[i].data();
      head_changed =
          head_changed || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0;
    }
  }

  // Without pretraining the stack is exactly its seeded initialization.
  TrainOptions plain = LesionOptions();
  plain.pretrain_epochs = 0;
  plain.epochs = 5;
  const Network trained = TrainPipeline(ds, plain);
  const Network init = BuildClassifier(2, {1, kLesionSize, kLesionSize}, plain.dropout,
                                       plain.seed, plain.base_channels);
  const bool init_same = SameBytes(ConvParams(init), ConvParams(trained));

  std::size_t conv_values = 0;
  for (const auto& v : ConvParams(after)) conv_values += v.size();
  return {convs_same && init_same && head_changed,
          Fmt("conv bytes unchanged after pretraining+30 epochs: %s; after 5 epochs "
              "from init: %s; dense head updated: %s; %zu conv values",
              convs_same ? "yes" : "no", init_same ? "yes" : "no",
              head_changed ? "yes" : "no", conv_values)};
}

// ---------------------------------------------------------------------------
// 8. Determinism and file formats

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code = -1;
  std::string out;
};

Run Cli(const fs::path& root, const std::string& args) {
  const fs::path out = root / "stdout.txt";
  const std::string cmd = std::string(OLENS_CLI_PATH) + " " + args + " >" +
                          out.string() + " 2>" + (root / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, Slurp(out)};
}

// Every regular file below `p` (or `p` itself), keyed by relative path.
std::map<std::string, std::string> Snapshot(const fs::path& p) {
  std::map<std::string, std::string> out;
  if (!fs::exists(p)) return out;
  if (fs::is_regular_file(p)) {
    out["."] = Slurp(p);
    return out;
  }
  for (const auto& e : fs::recursive_directory_iterator(p)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), p)] = Slurp(e.path());
  }
  return out;
}

Outcome DeterminismAndFormats() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "olens_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  std::vector<std::string> failures;

  // Each command runs twice into separate outputs; stdout and every output
  // byte must agree.
  struct Cmd {
    std::string name;
    std::string args;   // "@" stands for the output path
    std::string output;  // basename; the second run appends "_2"
  };
  const std::string ves = (root / "ves").string(), les = (root / "les").string();
  const std::string vck = (root / "v.ckpt").string(), lck = (root / "l.ckpt").string();
  const std::string vimg = ves + "/img_00000.pgm", limg = les + "/img_00001.pgm";
  const std::vector<Cmd> cmds = {
      {"synth vessels", "synth --task vessels --n 12 --size 32 --seed 4 --out @", "ves"},
      {"synth lesions", "synth --task lesions --n 12 --size 32 --seed 4 --out @", "les"},
      {"train vessels",
       "train --task vessels --data " + ves + " --epochs 2 --base-channels 4 --seed 2 "
       "--out @ --log @.log",
       "v.ckpt"},
      {"train lesions",
       "train --task lesions --data " + les + " --epochs 2 --base-channels 4 --seed 2 "
       "--pretrain-epochs 1 --pretrain-samples 16 --out @ --log @.log",
       "l.ckpt"},
      {"eval", "eval --ckpt " + vck + " --data " + ves, "eval"},
      {"uncertainty",
       "uncertainty --ckpt " + vck + " --input " + vimg + " --samples 8 --seed 3 --out @",
       "unc"},
      {"uncertainty entropy",
       "uncertainty --ckpt " + lck + " --input " + limg +
           " --samples 8 --decomp entropy --seed 3 --out @",
       "unc_l"},
      {"explain ig",
       "explain --ckpt " + vck + " --input " + vimg +
           " --method ig --ig-steps 16 --out @",
       "exp"},
      {"explain smooth guided",
       "explain --ckpt " + lck + " --input " + limg +
           " --method guided --smooth --n-noise 4 --seed 9 --out @",
       "exp_l"},
      {"report",
       "report --ckpt " + vck + " --input " + vimg +
           " --samples 4 --ig-steps 8 --n-noise 3 --out @",
       "rep"},
  };
  auto subst = [](std::string s, const std::string& path) {
    for (std::size_t at; (at = s.find('@')) != std::string::npos;) s.replace(at, 1, path);
    return s;
  };
  std::size_t compared_files = 0;
  for (const Cmd& c : cmds) {
    const fs::path first = root / c.output, second = root / (c.output + "_2");
    const Run a = Cli(root, subst(c.args, first.string()));
    const Run b = Cli(root, subst(c.args, second.string()));
    if (a.code != 0 || b.code != 0) {
      failures.push_back(c.name + Fmt(" exit %d/%d", a.code, b.code));
      continue;
    }
    auto sa = Snapshot(first), sb = Snapshot(second);
    if (fs::exists(first.string() + ".log")) {
      sa["log"] = Slurp(first.string() + ".log");
      sb["log"] = Slurp(second.string() + ".log");
    }
    if (a.out != b.out || sa != sb || (sa.empty() && a.out.empty())) {
      failures.push_back(c.name + " differs");
    }
    compared_files += sa.size();
  }

  // Round trips through the codecs are byte-identical.
  const std::string pgm = Slurp(vimg);
  const std::vector<std::uint8_t> pgm_bytes(pgm.begin(), pgm.end());
  if (EncodePgm(DecodePgm(pgm_bytes)) != pgm_bytes) failures.push_back("pgm round trip");
  const std::string ppm = Slurp(root / "unc" / "epistemic.ppm");
  const std::vector<std::uint8_t> ppm_bytes(ppm.begin(), ppm.end());
  if (EncodePpm(DecodePpm(ppm_bytes)) != ppm_bytes) failures.push_back("ppm round trip");
  for (const std::string& ck : {vck, lck}) {
    const std::string bytes = Slurp(ck);
    const std::vector<std::uint8_t> v(bytes.begin(), bytes.end());
    const fs::path again = root / "again.ckpt";
    SaveCheckpoint(LoadCheckpoint(ck), again);
    if (EncodeCheckpoint(DecodeCheckpoint(v)) != v || Slurp(again) != bytes) {
      failures.push_back("checkpoint round trip " + fs::path(ck).filename().string());
    }
  }

  // Damaged inputs map to the documented exit codes.
  auto write = [&](const std::string& name, const std::string& bytes) {
    std::ofstream(root / name, std::ios::binary) << bytes;
    return (root / name).string();
  };
  const std::string ck = Slurp(vck);
  const std::string truncated_ck = write("trunc.ckpt", ck.substr(0, ck.size() - 9));
  std::string bad_magic = ck;
  bad_magic[0] = 'X';
  const std::string magic_ck = write("magic.ckpt", bad_magic);
  std::string bad_meta = ck;
  bad_meta[12] = '!';
  const std::string meta_ck = write("meta.ckpt", bad_meta);
  const std::string truncated_pgm = write("trunc.pgm", pgm.substr(0, pgm.size() - 5));
  const std::string p2_pgm = write("p2.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  std::string maxval = pgm;
  maxval.replace(maxval.find("255"), 3, "254");
  const std::string maxval_pgm = write("maxval.pgm", maxval);
  const fs::path broken_data = root / "broken_ves";
  fs::create_directories(broken_data);
  for (const auto& e : fs::directory_iterator(ves)) {
    fs::copy_file(e.path(), broken_data / e.path().filename());
  }
  write("broken_ves/img_00003.pgm", pgm.substr(0, 20));

  // A 64-pixel image for a 32-pixel network.
  const std::string big_pgm = (root / "big.pgm").string();
  WritePgm(big_pgm, Tensor::Full({1, 64, 64}, 0.5));

  struct Expect {
    std::string name;
    std::string args;
    int code;
  };
  const std::string out = " --out " + (root / "bad_out").string();
  const std::vector<Expect> expects = {
      {"truncated checkpoint", "uncertainty --ckpt " + truncated_ck + " --input " + vimg + out, 3},
      {"checkpoint magic", "explain --ckpt " + magic_ck + " --input " + vimg + out, 3},
      {"checkpoint metadata", "eval --ckpt " + meta_ck + " --data " + ves, 3},
      {"truncated pgm", "uncertainty --ckpt " + vck + " --input " + truncated_pgm + out, 3},
      {"ascii pgm", "explain --ckpt " + vck + " --input " + p2_pgm + out, 3},
      {"pgm maxval", "report --ckpt " + vck + " --input " + maxval_pgm + out, 3},
      {"missing file", "eval --ckpt " + (root / "nope.ckpt").string() + " --data " + ves, 3},
      {"corrupt dataset image", "eval --ckpt " + vck + " --data " + broken_data.string(), 3},
      {"wrong task data", "eval --ckpt " + vck + " --data " + les, 4},
      {"input size mismatch", "uncertainty --ckpt " + lck + " --input " + big_pgm + out, 5},
  };
  std::size_t code_checks = 0;
  for (const Expect& e : expects) {
    const Run r = Cli(root, e.args);
    ++code_checks;
    if (r.code != e.code) failures.push_back(e.name + Fmt(" exit %d, want %d", r.code, e.code));
  }
  if (fs::exists(root / "bad_out")) failures.push_back("failed command left an output dir");

  std::string detail = Fmt("%zu commands twice (%zu files identical), 4 round trips, "
                           "%zu damaged inputs; %.0f s",
                           cmds.size(), compared_files, code_checks, Seconds(start));
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------
// 9. Monte-Carlo convergence

Outcome McConvergence() {
  const auto start = std::chrono::steady_clock::now();
  const Network net = BuildUnet(2, 0.3, {1, 16, 16}, 77);
  RngStream rng(78);
  const Tensor x = RandomTensor({1, 16, 16}, rng, 0, 1, false);
  const std::size_t n = x.size();
  int ok = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<double> sum(n, 0.0), at64, at1024;
    for (std::size_t t = 0; t < 16384; ++t) {
      const Tensor p = McSampleOne(net, x, 9000 + seed, t);
      for (std::size_t i = 0; i < n; ++i) sum[i] += p[i];
      if (t + 1 == 64) at64 = sum;
      if (t + 1 == 1024) at1024 = sum;
    }
    double d64 = 0, d1024 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ref = sum[i] / 16384.0;
      d64 = std::max(d64, std::abs(at64[i] / 64.0 - ref));
      d1024 = std::max(d1024, std::abs(at1024[i] / 1024.0 - ref));
    }
    if (d1024 < d64) ++ok;
    per_seed += Fmt(" %.2e<%.2e", d1024, d64);
  }
  return {ok == 5, Fmt("%d of 5 seeds; |p1024-p16384| < |p64-p16384|:%s; %.0f s", ok,
                       per_seed.c_str(), Seconds(start))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", GradientSuite},
      {"decomposition identity", DecompositionIdentity},
      {"integrated gradients completeness", IgAxioms},
      {"u-net vessel training", UnetTraining},
      {"thin-vessel epistemic ordering", ThinVesselUncertainty},
      {"saliency localization", SaliencyLocalization},
      {"frozen convolutions", FrozenConvs},
      {"determinism and formats", DeterminismAndFormats},
      {"mc convergence", McConvergence},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
