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


// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "olens/olens.h"

namespace {

namespace fs = std::filesystem;

fs::path Fresh(const char* name) {
  const auto p = fs::temp_directory_path() / (std::string("olens_capi_") + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string Take(char* s) {
  std::string out = s ? s : "";
  olens_string_free(s);
  return out;
}

struct Fixture : ::testing::Test {
  static void SetUpTestSuite() {
    root = Fresh("suite");
    olens_dataset* ds = nullptr;
    ASSERT_EQ(olens_dataset_synth("vessels", 6, 32, 3, nullptr, &ds), OLENS_OK);
    ASSERT_EQ(olens_dataset_save(ds, (root / "data").c_str()), OLENS_OK);
    olens_train_options o;
    olens_train_options_init(&o);
    o.epochs = 1;
    o.base_channels = 2;
    o.batch_size = 2;
    o.seed = 4;
    ASSERT_EQ(olens_train(ds, &o, nullptr, nullptr, &net), OLENS_OK);
    olens_dataset_free(ds);
    ASSERT_EQ(olens_network_save(net, (root / "net.ckpt").c_str(), nullptr), OLENS_OK);
  }
  static void TearDownTestSuite() { olens_network_free(net); }
  static fs::path root;
  static olens_network* net;
};
fs::path Fixture::root;
olens_network* Fixture::net = nullptr;

TEST(CApi, ErrorsCarryStatusMessageAndKind) {
  olens_dataset* ds = nullptr;
  EXPECT_EQ(olens_dataset_synth("vessels", 2, 33, 0, nullptr, &ds),
            OLENS_E_INVALID_ARGUMENT);
  EXPECT_EQ(ds, nullptr);
  EXPECT_NE(std::strstr(olens_last_error(), "divisible"), nullptr);
  EXPECT_STREQ(olens_last_error_kind(), "BadSize");
  EXPECT_EQ(olens_dataset_synth("trees", 2, 32, 0, nullptr, &ds),
            OLENS_E_INVALID_ARGUMENT);
  EXPECT_EQ(olens_dataset_synth(nullptr, 2, 32, 0, nullptr, &ds),
            OLENS_E_INVALID_ARGUMENT);
  olens_network* net = nullptr;
  EXPECT_EQ(olens_network_load("/nonexistent/x.ckpt", &net), OLENS_E_IO);
  EXPECT_STREQ(olens_status_name(OLENS_E_BAD_TARGET), "bad target");
}

TEST(CApi, SuccessClearsLastError) {
  olens_dataset* ds = nullptr;
  olens_dataset_synth("vessels", 2, 33, 0, nullptr, &ds);
  ASSERT_EQ(olens_dataset_synth("lesions", 4, 32, 0, "quadrant", &ds), OLENS_OK);
  EXPECT_STREQ(olens_last_error(), "");
  EXPECT_EQ(olens_dataset_count(ds), 4u);
  const std::string manifest = [&] {
    char* s = nullptr;
    olens_dataset_manifest(ds, &s);
    return Take(s);
  }();
  EXPECT_NE(manifest.find("\"quadrant\""), std::string::npos);
  olens_dataset_free(ds);
}

TEST(CApi, CorruptCheckpointIsFormatError) {
  const auto dir = Fresh("corrupt");
  std::ofstream(dir / "bad.ckpt") << "NOTACHECKPOINT";
  olens_network* net = nullptr;
  EXPECT_EQ(olens_network_load((dir / "bad.ckpt").c_str(), &net), OLENS_E_FORMAT);
  EXPECT_STREQ(olens_last_error_kind(), "BadMagic");
}

TEST_F(Fixture, CheckpointReloadsWithSameMetadata) {
  olens_network* back = nullptr;
  ASSERT_EQ(olens_network_load((root / "net.ckpt").c_str(), &back), OLENS_OK);
  char* a = nullptr;
  char* b = nullptr;
  olens_network_info(net, &a);
  olens_network_info(back, &b);
  const std::string sa = Take(a), sb = Take(b);
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa.find("\"unet\""), std::string::npos);
  olens_network_free(back);
}

TEST_F(Fixture, TrainCallbackSeesEachEpoch) {
  olens_dataset* ds = nullptr;
  ASSERT_EQ(olens_dataset_load((root / "data").c_str(), &ds), OLENS_OK);
  olens_train_options o;
  olens_train_options_init(&o);
  o.epochs = 2;
  o.base_channels = 2;
  std::vector<std::string> lines;
  auto cb = [](const char* json, double, void* user) {
    static_cast<std::vector<std::string>*>(user)->push_back(json);
  };
  olens_network* n = nullptr;
  ASSERT_EQ(olens_train(ds, &o, cb, &lines, &n), OLENS_OK);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1].rfind("{\"phase\":\"train\",\"epoch\":2,", 0), 0u);
  o.task = "lesions";
  olens_network* m = nullptr;
  EXPECT_EQ(olens_train(ds, &o, nullptr, nullptr, &m), OLENS_E_DATA_MISMATCH);
  char* json = nullptr;
  ASSERT_EQ(olens_evaluate(n, ds, &json), OLENS_OK);
  EXPECT_NE(Take(json).find("\"dice\""), std::string::npos);
  olens_network_free(n);
  olens_dataset_free(ds);
}

TEST_F(Fixture, UncertaintyExplainReport) {
  olens_image* img = nullptr;
  ASSERT_EQ(olens_image_read((root / "data" / "img_00000.pgm").c_str(), &img), OLENS_OK);
  size_t c = 0, h = 0, w = 0;
  olens_image_dims(img, &c, &h, &w);
  EXPECT_EQ(c * h * w, 1024u);

  olens_uncertainty* u = nullptr;
  ASSERT_EQ(olens_uncertainty_run(net, img, 4, "variance", 1, &u), OLENS_OK);
  const double* epi = nullptr;
  size_t n = 0;
  ASSERT_EQ(olens_uncertainty_map(u, "epistemic", &epi, &n), OLENS_OK);
  EXPECT_EQ(n, 1024u);
  EXPECT_EQ(olens_uncertainty_map(u, "other", &epi, &n), OLENS_E_INVALID_ARGUMENT);
  ASSERT_EQ(olens_uncertainty_write(u, (root / "unc").c_str()), OLENS_OK);
  EXPECT_TRUE(fs::exists(root / "unc" / "stats.json"));
  olens_uncertainty_free(u);
  EXPECT_EQ(olens_uncertainty_run(net, img, 1, "variance", 1, &u),
            OLENS_E_INVALID_ARGUMENT);
  EXPECT_EQ(olens_uncertainty_run(net, img, 4, "mystery", 1, &u),
            OLENS_E_INVALID_ARGUMENT);

  olens_explain_options eo;
  olens_explain_options_init(&eo);
  eo.target = "class:0";
  olens_saliency* s = nullptr;
  EXPECT_EQ(olens_explain_run(net, img, &eo, &s), OLENS_E_BAD_TARGET);
  eo.target = "region:auto";
  eo.method = "guided";
  const olens_status st = olens_explain_run(net, img, &eo, &s);
  // An untrained net may predict no foreground at all; that is a target error.
  ASSERT_TRUE(st == OLENS_OK || st == OLENS_E_BAD_TARGET) << olens_last_error();
  if (st == OLENS_OK) {
    const double* grid = nullptr;
    size_t gh = 0, gw = 0;
    ASSERT_EQ(olens_saliency_map(s, &grid, &gh, &gw), OLENS_OK);
    EXPECT_EQ(gh * gw, 1024u);
    ASSERT_EQ(olens_saliency_write(s, (root / "exp").c_str()), OLENS_OK);
    olens_saliency_free(s);
    olens_report_options ro;
    olens_report_options_init(&ro);
    ro.samples = 3;
    ro.ig_steps = 3;
    ro.n_noise = 2;
    char* json = nullptr;
    ASSERT_EQ(olens_report_write(net, img, &ro, (root / "rep").c_str(), &json), OLENS_OK);
    EXPECT_NE(Take(json).find("\"width\": 270"), std::string::npos);
  }
  olens_image_free(img);
}

TEST_F(Fixture, InputSizeMismatch) {
  const auto dir = Fresh("mismatch");
  olens_dataset* ds = nullptr;
  ASSERT_EQ(olens_dataset_synth("vessels", 1, 64, 3, nullptr, &ds), OLENS_OK);
  ASSERT_EQ(olens_dataset_save(ds, (dir / "d").c_str()), OLENS_OK);
  olens_dataset_free(ds);
  olens_image* img = nullptr;
  ASSERT_EQ(olens_image_read((dir / "d" / "img_00000.pgm").c_str(), &img), OLENS_OK);
  olens_uncertainty* u = nullptr;
  EXPECT_EQ(olens_uncertainty_run(net, img, 4, "variance", 1, &u),
            OLENS_E_CHECKPOINT_MISMATCH);
  olens_image_free(img);
}

}  // namespace
