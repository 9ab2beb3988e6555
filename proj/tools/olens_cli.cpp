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


// olens command-line tool. Talks to the library only through olens.h.
//
// Exit codes: 0 ok, 1 internal error, 2 bad arguments, 3 I/O or corrupt
// file, 4 dataset mismatch, 5 checkpoint mismatch, 6 invalid target.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "olens/olens.h"

namespace fs = std::filesystem;

namespace {

enum Exit {
  kExitOk = 0,
  kExitInternal = 1,
  kExitArgs = 2,
  kExitIo = 3,
  kExitData = 4,
  kExitCheckpoint = 5,
  kExitTarget = 6,
};

int ExitFor(olens_status s) {
  switch (s) {
    case OLENS_OK: return kExitOk;
    case OLENS_E_INVALID_ARGUMENT: return kExitArgs;
    case OLENS_E_IO:
    case OLENS_E_FORMAT: return kExitIo;
    case OLENS_E_DATA_MISMATCH: return kExitData;
    case OLENS_E_CHECKPOINT_MISMATCH: return kExitCheckpoint;
    case OLENS_E_BAD_TARGET: return kExitTarget;
    default: return kExitInternal;
  }
}

// Thrown to unwind with a given exit code once the message is printed.
struct ExitError {
  int code;
};

void Check(olens_status s) {
  if (s == OLENS_OK) return;
  std::cerr << "olens: " << olens_last_error() << "\n";
  throw ExitError{ExitFor(s)};
}

[[noreturn]] void Die(int code, const std::string& msg) {
  std::cerr << "olens: " << msg << "\n";
  throw ExitError{code};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<olens_dataset, Deleter<olens_dataset, olens_dataset_free>>;
using NetworkPtr = std::unique_ptr<olens_network, Deleter<olens_network, olens_network_free>>;
using ImagePtr = std::unique_ptr<olens_image, Deleter<olens_image, olens_image_free>>;
using UncertaintyPtr =
    std::unique_ptr<olens_uncertainty, Deleter<olens_uncertainty, olens_uncertainty_free>>;
using SaliencyPtr =
    std::unique_ptr<olens_saliency, Deleter<olens_saliency, olens_saliency_free>>;

std::string TakeString(char* s) {
  std::string out = s ? s : "";
  olens_string_free(s);
  return out;
}

void WriteTextAtomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      Die(kExitIo, "cannot write " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    Die(kExitIo, "cannot write " + path.string());
  }
}

NetworkPtr LoadNetwork(const std::string& path) {
  olens_network* net = nullptr;
  Check(olens_network_load(path.c_str(), &net));
  return NetworkPtr(net);
}

ImagePtr LoadImage(const std::string& path) {
  olens_image* img = nullptr;
  Check(olens_image_read(path.c_str(), &img));
  return ImagePtr(img);
}

DatasetPtr LoadDataset(const std::string& dir) {
  olens_dataset* ds = nullptr;
  Check(olens_dataset_load(dir.c_str(), &ds));
  return DatasetPtr(ds);
}

struct Settings {
  std::string config;
  std::string task;
  std::size_t n = 200;
  std::size_t size = 64;
  std::uint64_t seed = 0;
  std::string mode = "binary";
  std::string out;
  std::string data;
  std::string log;
  std::size_t epochs = 30;
  double lr = 1e-3;
  double dropout = 0.2;
  std::size_t batch_size = 8;
  std::string optimizer = "adam";
  std::size_t base_channels = 8;
  double val_fraction = 0.2;
  std::size_t pretrain_epochs = 8;
  std::size_t pretrain_samples = 400;
  std::string ckpt;
  std::string input;
  std::size_t samples = 50;
  std::string decomp = "variance";
  std::string method = "vanilla";
  bool smooth = false;
  std::string target;
  std::size_t ig_steps = 64;
  double sigma = 0.15;
  std::size_t n_noise = 25;
  std::string baseline = "zeros";
};

void Defaults(Settings& s) {
  olens_train_options t;
  olens_train_options_init(&t);
  s.epochs = t.epochs;
  s.lr = t.learning_rate;
  s.dropout = t.dropout;
  s.batch_size = t.batch_size;
  s.base_channels = t.base_channels;
  s.val_fraction = t.val_fraction;
  s.pretrain_epochs = t.pretrain_epochs;
  s.pretrain_samples = t.pretrain_samples;
  olens_explain_options e;
  olens_explain_options_init(&e);
  s.ig_steps = e.ig_steps;
  s.sigma = e.sigma;
  s.n_noise = e.n_noise;
  olens_report_options r;
  olens_report_options_init(&r);
  s.samples = r.samples;
}

void AddConfig(CLI::App* cmd, Settings& s) {
  cmd->add_option("--config", s.config,
                  "JSON object of settings keyed by flag name; flags override it");
}

void AddSeed(CLI::App* cmd, Settings& s) {
  cmd->add_option("--seed", s.seed, "master random seed")->capture_default_str();
}

void AddModel(CLI::App* cmd, Settings& s) {
  cmd->add_option("--ckpt", s.ckpt, "checkpoint file")->required();
  cmd->add_option("--input", s.input, "input image (binary PGM)")->required();
}

void AddSaliencyKnobs(CLI::App* cmd, Settings& s) {
  cmd->add_option("--ig-steps", s.ig_steps, "integrated-gradients path steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--sigma", s.sigma,
                  "SmoothGrad noise level as a fraction of the input range")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--n-noise", s.n_noise, "SmoothGrad noisy samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void Build(CLI::App& app, Settings& s) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", olens_version());

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  AddConfig(synth, s);
  synth->add_option("--task", s.task, "vessels or lesions")
      ->required()
      ->check(CLI::IsMember({"vessels", "lesions"}));
  synth->add_option("--n", s.n, "number of samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--size", s.size,
                    "image side in pixels (>= 32; multiple of 4 for vessels, 8 for lesions)")
      ->capture_default_str();
  synth->add_option("--mode", s.mode, "lesion labels: binary or quadrant")
      ->check(CLI::IsMember({"binary", "quadrant"}))
      ->capture_default_str();
  AddSeed(synth, s);
  synth->add_option("--out", s.out, "output dataset directory")->required();

  auto* train = app.add_subcommand("train", "train a network on a dataset");
  AddConfig(train, s);
  train->add_option("--task", s.task, "vessels (U-Net) or lesions (classifier)")
      ->required()
      ->check(CLI::IsMember({"vessels", "lesions"}));
  train->add_option("--data", s.data, "dataset directory")->required();
  train->add_option("--epochs", s.epochs, "training epochs")->capture_default_str();
  train->add_option("--lr", s.lr,
                    "learning rate (default 1e-3 for vessels, 1e-2 for lesions)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--dropout", s.dropout, "dropout rate in [0,1)")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  train->add_option("--batch-size", s.batch_size, "minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--optimizer", s.optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  train->add_option("--base-channels", s.base_channels, "width of the first conv stage")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--val-fraction", s.val_fraction, "held-out fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train->add_option("--pretrain-epochs", s.pretrain_epochs,
                    "lesions: epochs of conv-feature pretraining on generated quadrant data")
      ->capture_default_str();
  train->add_option("--pretrain-samples", s.pretrain_samples,
                    "lesions: size of the pretraining set")
      ->capture_default_str();
  AddSeed(train, s);
  train->add_option("--out", s.out, "checkpoint path")->required();
  train->add_option("--log", s.log, "run log path (default: <out>.log.jsonl)");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  AddConfig(eval, s);
  eval->add_option("--ckpt", s.ckpt, "checkpoint file")->required();
  eval->add_option("--data", s.data, "dataset directory")->required();

  auto* unc = app.add_subcommand("uncertainty", "MC-dropout uncertainty maps");
  AddConfig(unc, s);
  AddModel(unc, s);
  unc->add_option("--samples", s.samples, "number of stochastic passes T (>= 2)")
      ->capture_default_str();
  unc->add_option("--decomp", s.decomp, "variance or entropy")
      ->check(CLI::IsMember({"variance", "entropy"}))
      ->capture_default_str();
  AddSeed(unc, s);
  unc->add_option("--out", s.out, "output directory")->required();

  auto* explain = app.add_subcommand("explain", "gradient saliency map");
  AddConfig(explain, s);
  AddModel(explain, s);
  explain->add_option("--method", s.method, "vanilla, guided or ig")
      ->check(CLI::IsMember({"vanilla", "guided", "ig"}))
      ->capture_default_str();
  explain->add_flag("--smooth", s.smooth, "average over noisy copies (SmoothGrad)");
  explain->add_option("--target", s.target,
                      "class:K (classifier) or region:auto (segmentation); "
                      "default is the predicted class or region:auto");
  explain->add_option("--baseline", s.baseline, "ig baseline: zeros or gray")
      ->check(CLI::IsMember({"zeros", "gray"}))
      ->capture_default_str();
  AddSaliencyKnobs(explain, s);
  AddSeed(explain, s);
  explain->add_option("--out", s.out, "output directory")->required();

  auto* report = app.add_subcommand("report", "composite panel of all maps");
  AddConfig(report, s);
  AddModel(report, s);
  report->add_option("--samples", s.samples, "MC passes for the uncertainty tiles")
      ->capture_default_str();
  AddSaliencyKnobs(report, s);
  AddSeed(report, s);
  report->add_option("--out", s.out, "output directory")->required();

  for (auto* cmd : app.get_subcommands({})) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

// Turns a JSON config object into flag tokens. Unknown keys are an error.
std::vector<std::string> ConfigTokens(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Die(kExitIo, "cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    Die(kExitArgs, "config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) Die(kExitArgs, "config " + path + " must be a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (!opt || key == "config" || key == "help") {
      Die(kExitArgs, "unknown config key '" + key + "' for command " + cmd->get_name());
    }
    if (opt->get_type_size() == 0) {
      if (!value.is_boolean()) Die(kExitArgs, "config key '" + key + "' must be a boolean");
      if (value.get<bool>()) tokens.push_back(flag);
      continue;
    }
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_number() || value.is_boolean()) text = value.dump();
    else Die(kExitArgs, "config key '" + key + "' must be a scalar");
    tokens.push_back(flag);
    tokens.push_back(text);
  }
  return tokens;
}

int CmdSynth(const Settings& s) {
  olens_dataset* raw = nullptr;
  Check(olens_dataset_synth(s.task.c_str(), s.n, s.size, s.seed,
                            s.task == "lesions" ? s.mode.c_str() : nullptr, &raw));
  DatasetPtr ds(raw);
  Check(olens_dataset_save(ds.get(), s.out.c_str()));
  char* manifest = nullptr;
  Check(olens_dataset_manifest(ds.get(), &manifest));
  std::cout << TakeString(manifest);
  return kExitOk;
}

struct TrainLog {
  std::string lines;
};

void OnEpoch(const char* json, double wall_seconds, void* user) {
  auto* log = static_cast<TrainLog*>(user);
  std::cout << json << "\n" << std::flush;
  log->lines += json;
  log->lines += "\n";
  std::cerr << "epoch done in " << wall_seconds << " s\n";
}

int CmdTrain(const Settings& s) {
  DatasetPtr ds = LoadDataset(s.data);
  olens_train_options o;
  olens_train_options_init(&o);
  o.task = s.task.c_str();
  o.epochs = s.epochs;
  o.learning_rate = s.lr;
  o.dropout = s.dropout;
  o.seed = s.seed;
  o.batch_size = s.batch_size;
  o.optimizer = s.optimizer.c_str();
  o.base_channels = s.base_channels;
  o.val_fraction = s.val_fraction;
  o.pretrain_epochs = s.pretrain_epochs;
  o.pretrain_samples = s.pretrain_samples;
  TrainLog log;
  olens_network* raw = nullptr;
  Check(olens_train(ds.get(), &o, OnEpoch, &log, &raw));
  NetworkPtr net(raw);
  std::size_t bytes = 0;
  Check(olens_network_save(net.get(), s.out.c_str(), &bytes));
  WriteTextAtomic(s.log.empty() ? s.out + ".log.jsonl" : s.log, log.lines);
  std::cerr << "wrote " << s.out << " (" << bytes << " bytes)\n";
  return kExitOk;
}

int CmdEval(const Settings& s) {
  NetworkPtr net = LoadNetwork(s.ckpt);
  DatasetPtr ds = LoadDataset(s.data);
  char* json = nullptr;
  Check(olens_evaluate(net.get(), ds.get(), &json));
  std::cout << TakeString(json) << "\n";
  return kExitOk;
}

int CmdUncertainty(const Settings& s) {
  NetworkPtr net = LoadNetwork(s.ckpt);
  ImagePtr img = LoadImage(s.input);
  olens_uncertainty* raw = nullptr;
  Check(olens_uncertainty_run(net.get(), img.get(), s.samples, s.decomp.c_str(),
                              s.seed, &raw));
  UncertaintyPtr u(raw);
  Check(olens_uncertainty_write(u.get(), s.out.c_str()));
  char* json = nullptr;
  Check(olens_uncertainty_stats(u.get(), &json));
  std::cout << TakeString(json);
  return kExitOk;
}

int CmdExplain(const Settings& s) {
  NetworkPtr net = LoadNetwork(s.ckpt);
  ImagePtr img = LoadImage(s.input);
  olens_explain_options o;
  olens_explain_options_init(&o);
  o.method = s.method.c_str();
  o.smooth = s.smooth ? 1 : 0;
  o.target = s.target.empty() ? nullptr : s.target.c_str();
  o.ig_steps = s.ig_steps;
  o.sigma = s.sigma;
  o.n_noise = s.n_noise;
  o.seed = s.seed;
  o.baseline = s.baseline.c_str();
  olens_saliency* raw = nullptr;
  Check(olens_explain_run(net.get(), img.get(), &o, &raw));
  SaliencyPtr sal(raw);
  Check(olens_saliency_write(sal.get(), s.out.c_str()));
  char* json = nullptr;
  Check(olens_saliency_params(sal.get(), &json));
  std::cout << TakeString(json);
  return kExitOk;
}

int CmdReport(const Settings& s) {
  NetworkPtr net = LoadNetwork(s.ckpt);
  ImagePtr img = LoadImage(s.input);
  olens_report_options o;
  olens_report_options_init(&o);
  o.samples = s.samples;
  o.seed = s.seed;
  o.ig_steps = s.ig_steps;
  o.n_noise = s.n_noise;
  o.sigma = s.sigma;
  char* json = nullptr;
  Check(olens_report_write(net.get(), img.get(), &o, s.out.c_str(), &json));
  std::cout << TakeString(json);
  return kExitOk;
}

// Parses args (without the program name). Returns an exit code when the
// parse itself ends the run (help, version, error), or -1 to continue.
int Parse(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }
  return -1;
}

int Run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  Settings first;
  Defaults(first);
  CLI::App probe{"olens: MC-dropout uncertainty and gradient saliency"};
  Build(probe, first);
  // Required settings may come from the config file; the second parse checks.
  for (auto* sub : probe.get_subcommands({})) {
    for (auto* opt : sub->get_options()) opt->required(false);
  }
  if (int code = Parse(probe, args); code >= 0) return code;
  CLI::App* cmd = probe.get_subcommands().front();

  Settings s;
  Defaults(s);
  CLI::App app{"olens: MC-dropout uncertainty and gradient saliency"};
  Build(app, s);
  if (!first.config.empty()) {
    const std::vector<std::string> extra = ConfigTokens(cmd, first.config);
    auto at = std::find(args.begin(), args.end(), cmd->get_name());
    args.insert(at + 1, extra.begin(), extra.end());
  }
  if (int code = Parse(app, args); code >= 0) return code;

  const std::string name = cmd->get_name();
  if (name == "synth") return CmdSynth(s);
  if (name == "train") return CmdTrain(s);
  if (name == "eval") return CmdEval(s);
  if (name == "uncertainty") return CmdUncertainty(s);
  if (name == "explain") return CmdExplain(s);
  return CmdReport(s);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const ExitError& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "olens: " << e.what() << "\n";
    return kExitInternal;
  }
}
