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


#include "olens/olens.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "json.hpp"
#include "olens/checkpoint.hpp"
#include "olens/error.hpp"
#include "olens/image_io.hpp"
#include "olens/pipeline.hpp"

using namespace olens;

struct olens_dataset {
  Dataset ds;
};
struct olens_network {
  Network net;
};
struct olens_image {
  Tensor image;
};
struct olens_uncertainty {
  UncertaintyRun run;
};
struct olens_saliency {
  ExplainRun run;
  Tensor input;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_kind;

olens_status StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError:
      return OLENS_E_IO;
    case ErrorCode::kBadMagic:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kTruncatedPayload:
    case ErrorCode::kMetaParseError:
    case ErrorCode::kBadMagicNumber:
    case ErrorCode::kBadMaxval:
    case ErrorCode::kTruncatedPixelData:
      return OLENS_E_FORMAT;
    case ErrorCode::kDataMismatch:
    case ErrorCode::kEmptyDataset:
      return OLENS_E_DATA_MISMATCH;
    case ErrorCode::kCheckpointMismatch:
      return OLENS_E_CHECKPOINT_MISMATCH;
    case ErrorCode::kBadTarget:
      return OLENS_E_BAD_TARGET;
    default:
      return OLENS_E_INVALID_ARGUMENT;
  }
}

olens_status Fail(olens_status status, std::string message, std::string kind) {
  g_error = std::move(message);
  g_error_kind = std::move(kind);
  return status;
}

template <typename F>
olens_status Guard(F&& body) {
  g_error.clear();
  g_error_kind.clear();
  try {
    body();
    return OLENS_OK;
  } catch (const Error& e) {
    return Fail(StatusFor(e.code()), e.what(), std::string(ErrorCodeName(e.code())));
  } catch (const std::bad_alloc&) {
    return Fail(OLENS_E_INTERNAL, "out of memory", "Internal");
  } catch (const std::exception& e) {
    return Fail(OLENS_E_INTERNAL, e.what(), "Internal");
  } catch (...) {
    return Fail(OLENS_E_INTERNAL, "unknown failure", "Internal");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

LesionMode ParseMode(const char* mode) {
  if (!mode || std::strcmp(mode, "binary") == 0) return LesionMode::kBinary;
  if (std::strcmp(mode, "quadrant") == 0) return LesionMode::kQuadrant;
  throw Error(ErrorCode::kInvalidArgument,
              std::string("mode must be binary or quadrant, got '") + mode + "'");
}

SaliencyMethod ParseMethod(const char* m) {
  const std::string s = m ? m : "vanilla";
  if (s == "vanilla") return SaliencyMethod::kVanilla;
  if (s == "guided") return SaliencyMethod::kGuided;
  if (s == "ig") return SaliencyMethod::kIntegrated;
  throw Error(ErrorCode::kInvalidArgument,
              "method must be vanilla, guided or ig, got '" + s + "'");
}

BaselineKind ParseBaseline(const char* b) {
  const std::string s = b ? b : "zeros";
  if (s == "zeros") return BaselineKind::kZeros;
  if (s == "gray") return BaselineKind::kGray;
  throw Error(ErrorCode::kInvalidArgument,
              "baseline must be zeros or gray, got '" + s + "'");
}

}  // namespace

extern "C" {

const char* olens_version(void) { return "1.0.0"; }
const char* olens_last_error(void) { return g_error.c_str(); }
const char* olens_last_error_kind(void) { return g_error_kind.c_str(); }

const char* olens_status_name(olens_status status) {
  switch (status) {
    case OLENS_OK: return "ok";
    case OLENS_E_INVALID_ARGUMENT: return "invalid argument";
    case OLENS_E_IO: return "i/o error";
    case OLENS_E_FORMAT: return "corrupt file";
    case OLENS_E_DATA_MISMATCH: return "data mismatch";
    case OLENS_E_CHECKPOINT_MISMATCH: return "checkpoint mismatch";
    case OLENS_E_BAD_TARGET: return "bad target";
    case OLENS_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void olens_string_free(char* s) { std::free(s); }

olens_status olens_dataset_synth(const char* task, size_t n, size_t size,
                                 uint64_t seed, const char* mode,
                                 olens_dataset** out) {
  return Guard([&] {
    Require(task && out, "task and out must not be null");
    *out = nullptr;
    const Task t = ParseTask(task);
    auto* h = new olens_dataset{SynthesizeDataset(t, n, size, seed, ParseMode(mode))};
    *out = h;
  });
}

olens_status olens_dataset_load(const char* dir, olens_dataset** out) {
  return Guard([&] {
    Require(dir && out, "dir and out must not be null");
    *out = nullptr;
    *out = new olens_dataset{LoadDataset(dir)};
  });
}

olens_status olens_dataset_save(const olens_dataset* ds, const char* dir) {
  return Guard([&] {
    Require(ds && dir, "dataset and dir must not be null");
    SaveDataset(ds->ds, dir);
  });
}

olens_status olens_dataset_manifest(const olens_dataset* ds, char** json) {
  return Guard([&] {
    Require(ds && json, "dataset and json must not be null");
    *json = CopyString(DatasetManifest(ds->ds));
  });
}

size_t olens_dataset_count(const olens_dataset* ds) {
  return ds ? ds->ds.examples.size() : 0;
}

void olens_dataset_free(olens_dataset* ds) { delete ds; }

olens_status olens_network_load(const char* path, olens_network** out) {
  return Guard([&] {
    Require(path && out, "path and out must not be null");
    *out = nullptr;
    *out = new olens_network{LoadCheckpoint(path)};
  });
}

olens_status olens_network_save(const olens_network* net, const char* path,
                                size_t* bytes_written) {
  return Guard([&] {
    Require(net && path, "network and path must not be null");
    const std::size_t n = SaveCheckpoint(net->net, path);
    if (bytes_written) *bytes_written = n;
  });
}

olens_status olens_network_info(const olens_network* net, char** json) {
  return Guard([&] {
    Require(net && json, "network and json must not be null");
    *json = CopyString(CheckpointMetadata(net->net));
  });
}

void olens_network_free(olens_network* net) { delete net; }

void olens_train_options_init(olens_train_options* o) {
  if (!o) return;
  const TrainOptions d;
  o->task = "vessels";
  o->epochs = d.epochs;
  o->learning_rate = -1.0;
  o->dropout = d.dropout;
  o->seed = d.seed;
  o->batch_size = d.batch_size;
  o->optimizer = "adam";
  o->base_channels = d.base_channels;
  o->val_fraction = d.val_fraction;
  o->pretrain_epochs = d.pretrain_epochs;
  o->pretrain_samples = d.pretrain_samples;
}

olens_status olens_train(const olens_dataset* ds, const olens_train_options* o,
                         olens_epoch_fn on_epoch, void* user,
                         olens_network** out) {
  return Guard([&] {
    Require(ds && o && out, "dataset, options and out must not be null");
    *out = nullptr;
    TrainOptions t;
    t.task = ParseTask(o->task ? o->task : "");
    t.epochs = o->epochs;
    if (!(o->learning_rate < 0)) t.learning_rate = o->learning_rate;
    t.dropout = o->dropout;
    t.seed = o->seed;
    t.batch_size = o->batch_size;
    const std::string opt = o->optimizer ? o->optimizer : "adam";
    if (opt == "adam") t.optimizer = OptimizerKind::kAdam;
    else if (opt == "sgd") t.optimizer = OptimizerKind::kSgd;
    else throw Error(ErrorCode::kInvalidArgument, "optimizer must be adam or sgd");
    t.base_channels = o->base_channels;
    t.val_fraction = o->val_fraction;
    t.pretrain_epochs = o->pretrain_epochs;
    t.pretrain_samples = o->pretrain_samples;
    auto relay = [&](const char* phase) -> EpochCallback {
      if (!on_epoch) return {};
      return [=](const EpochReport& r) {
        on_epoch(EpochReportJson(r, phase).c_str(), r.wall_seconds, user);
      };
    };
    *out = new olens_network{
        TrainPipeline(ds->ds, t, relay("train"), relay("pretrain"))};
  });
}

olens_status olens_evaluate(const olens_network* net, const olens_dataset* ds,
                            char** json) {
  return Guard([&] {
    Require(net && ds && json, "network, dataset and json must not be null");
    const bool classifier = IsClassifier(net->net);
    if (classifier != (ds->ds.task == Task::kLesions)) {
      throw Error(ErrorCode::kDataMismatch,
                  "checkpoint and dataset belong to different tasks");
    }
    if (!ds->ds.examples.empty()) CheckInputFits(net->net, ds->ds.examples[0].input);
    const EvalResult r = Evaluate(net->net, ds->ds.examples,
                                  classifier ? LossKind::kCrossEntropy : LossKind::kDice);
    nlohmann::ordered_json j{{"count", ds->ds.examples.size()},
                             {"loss_kind", classifier ? "cross_entropy" : "dice"},
                             {"loss", r.mean_loss}};
    if (r.accuracy) j["accuracy"] = *r.accuracy;
    *json = CopyString(j.dump());
  });
}

olens_status olens_image_read(const char* path, olens_image** out) {
  return Guard([&] {
    Require(path && out, "path and out must not be null");
    *out = nullptr;
    *out = new olens_image{ReadPgm(path)};
  });
}

olens_status olens_image_dims(const olens_image* img, size_t* c, size_t* h,
                              size_t* w) {
  return Guard([&] {
    Require(img, "image must not be null");
    if (c) *c = img->image.dim(0);
    if (h) *h = img->image.dim(1);
    if (w) *w = img->image.dim(2);
  });
}

const double* olens_image_data(const olens_image* img) {
  return img ? img->image.data().data() : nullptr;
}

void olens_image_free(olens_image* img) { delete img; }

olens_status olens_uncertainty_run(const olens_network* net,
                                   const olens_image* input, size_t samples,
                                   const char* decomposition, uint64_t seed,
                                   olens_uncertainty** out) {
  return Guard([&] {
    Require(net && input && out, "network, input and out must not be null");
    *out = nullptr;
    const std::string d = decomposition ? decomposition : "variance";
    Decomposition kind;
    if (d == "variance") kind = Decomposition::kVariance;
    else if (d == "entropy") kind = Decomposition::kEntropy;
    else throw Error(ErrorCode::kInvalidArgument,
                     "decomposition must be variance or entropy, got '" + d + "'");
    *out = new olens_uncertainty{RunUncertainty(net->net, input->image, samples, kind, seed)};
  });
}

olens_status olens_uncertainty_map(const olens_uncertainty* u, const char* which,
                                   const double** data, size_t* n) {
  return Guard([&] {
    Require(u && which && data && n, "arguments must not be null");
    const std::string w = which;
    const Tensor* t = nullptr;
    if (w == "mean") t = &u->run.result.mean;
    else if (w == "epistemic") t = &u->run.result.epistemic;
    else if (w == "aleatoric") t = &u->run.result.aleatoric;
    else throw Error(ErrorCode::kInvalidArgument, "unknown map '" + w + "'");
    *data = t->data().data();
    *n = t->size();
  });
}

olens_status olens_uncertainty_stats(const olens_uncertainty* u, char** json) {
  return Guard([&] {
    Require(u && json, "arguments must not be null");
    *json = CopyString(UncertaintyStatsJson(u->run));
  });
}

olens_status olens_uncertainty_write(const olens_uncertainty* u, const char* dir) {
  return Guard([&] {
    Require(u && dir, "arguments must not be null");
    WriteUncertainty(u->run, dir);
  });
}

void olens_uncertainty_free(olens_uncertainty* u) { delete u; }

void olens_explain_options_init(olens_explain_options* o) {
  if (!o) return;
  const ExplainOptions d;
  o->method = "vanilla";
  o->smooth = 0;
  o->target = nullptr;
  o->ig_steps = d.ig_steps;
  o->sigma = d.sigma;
  o->n_noise = d.n_noise;
  o->seed = d.seed;
  o->baseline = "zeros";
}

olens_status olens_explain_run(const olens_network* net, const olens_image* input,
                               const olens_explain_options* o,
                               olens_saliency** out) {
  return Guard([&] {
    Require(net && input && o && out, "arguments must not be null");
    *out = nullptr;
    ExplainOptions e;
    e.method = ParseMethod(o->method);
    e.smooth = o->smooth != 0;
    e.target = o->target ? o->target : "";
    e.ig_steps = o->ig_steps;
    e.sigma = o->sigma;
    e.n_noise = o->n_noise;
    e.seed = o->seed;
    e.baseline = ParseBaseline(o->baseline);
    *out = new olens_saliency{RunExplain(net->net, input->image, e), input->image};
  });
}

olens_status olens_saliency_map(const olens_saliency* s, const double** data,
                                size_t* h, size_t* w) {
  return Guard([&] {
    Require(s && data, "arguments must not be null");
    const Tensor& a = s->run.map.attributions;
    *data = a.data().data();
    if (h) *h = a.dim(0);
    if (w) *w = a.dim(1);
  });
}

olens_status olens_saliency_params(const olens_saliency* s, char** json) {
  return Guard([&] {
    Require(s && json, "arguments must not be null");
    *json = CopyString(ExplainParamsJson(s->run));
  });
}

olens_status olens_saliency_write(const olens_saliency* s, const char* dir) {
  return Guard([&] {
    Require(s && dir, "arguments must not be null");
    WriteExplain(s->run, s->input, dir);
  });
}

void olens_saliency_free(olens_saliency* s) { delete s; }

void olens_report_options_init(olens_report_options* o) {
  if (!o) return;
  const ReportOptions d;
  o->samples = d.samples;
  o->seed = d.seed;
  o->ig_steps = d.ig_steps;
  o->n_noise = d.n_noise;
  o->sigma = d.sigma;
}

olens_status olens_report_write(const olens_network* net, const olens_image* input,
                                const olens_report_options* o, const char* dir,
                                char** json) {
  return Guard([&] {
    Require(net && input && o && dir, "arguments must not be null");
    ReportOptions r;
    r.samples = o->samples;
    r.seed = o->seed;
    r.ig_steps = o->ig_steps;
    r.n_noise = o->n_noise;
    r.sigma = o->sigma;
    const std::string text = WriteReport(BuildReport(net->net, input->image, r), dir);
    if (json) *json = CopyString(text);
  });
}

}  // extern "C"
