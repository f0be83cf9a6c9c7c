// Copyright 2026 The Pointsoup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.h"
#include "pointsoup/base/error.h"
#include "pointsoup/codec/codec.h"
#include "pointsoup/codec/model.h"
#include "pointsoup/coder/bone_codec.h"
#include "pointsoup/geom/metrics.h"
#include "pointsoup/train/synthetic.h"

namespace pointsoup::codec {
namespace {

using geom::PointCloud;

const Model& SharedModel() {
  static const Model model = Model::Initialized(7);
  return model;
}

PointCloud Sphere(size_t n, uint64_t seed = 1) {
  train::SyntheticSpec spec;
  spec.points = n;
  return train::GenerateSynthetic(spec, seed);
}

TEST(Formulas, ChooseMAndR) {
  EXPECT_EQ(ChooseM(1024, 128), 16u);
  EXPECT_EQ(ChooseM(1067709, 128), 16682u);
  EXPECT_EQ(ChooseM(256, 128), 4u);
  EXPECT_EQ(ChooseM(130, 128), 2u);
  EXPECT_THROW(ChooseM(100, 128), Error);
  EXPECT_EQ(ChooseR(128), 32);
  EXPECT_EQ(ChooseR(256), 64);
  EXPECT_EQ(ChooseR(2), 1);
}

TEST(CodecConfig, ValidatesWindowRange) {
  const ModelConfig mc;
  CodecConfig c;
  EXPECT_NO_THROW(c.Validate(mc));
  for (int64_t k : {16, 64, 256}) {
    c.window_size = k;
    EXPECT_NO_THROW(c.Validate(mc)) << k;
  }
  for (int64_t k : {15, 257, 0}) {
    c.window_size = k;
    EXPECT_THROW(c.Validate(mc), Error) << k;
  }
  c = CodecConfig{};
  c.dilated_size = 0;
  EXPECT_THROW(c.Validate(mc), Error);
}

TEST(Model, ParameterCountIsPinned) {
  const Model& model = SharedModel();
  const size_t count = model.weights().TotalCount();
  EXPECT_EQ(count, 705590u);
  EXPECT_GE(count, 609000u);
  EXPECT_LE(count, 913000u);
}

TEST(Model, ConfigJsonRoundTrip) {
  ModelConfig c;
  c.channels = 32;
  c.points_per_row = 3;
  EXPECT_EQ(ModelConfig::FromJson(c.ToJson()), c);
  EXPECT_THROW(ModelConfig::FromJson("not json"), Error);
  EXPECT_THROW(ModelConfig::FromJson("{\"format\":\"other\"}"), Error);
}

TEST(Model, ArchiveRoundTripAndMismatch) {
  ModelConfig small;
  small.channels = 16;
  small.compact_channels = 4;
  small.embed_hidden = 8;
  small.entropy_hidden = 8;
  small.head_hidden = 8;
  small.refine_hidden = 8;
  small.fold_hidden = 12;
  const Model a = Model::Initialized(3, small);
  const auto path = std::filesystem::temp_directory_path() / "pointsoup_model_test.psw";
  a.Save(path.string());
  const Model b = Model::Load(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(b.config(), small);
  EXPECT_EQ(b.Serialize(), a.Serialize());
  EXPECT_EQ(Model::Initialized(3, small).Serialize(), a.Serialize());
  EXPECT_NE(Model::Initialized(4, small).Serialize(), a.Serialize());

  // An archive whose tensors disagree with its declared layout.
  nn::ModelWeights forged;
  forged.meta() = ModelConfig{}.ToJson();
  forged.Add("awds.embed.w1", {3, 64});
  try {
    Model::FromArchive(forged.Serialize());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
  EXPECT_THROW(Model::Load("/nonexistent/pointsoup.psw"), Error);
}

FrameHeader RandomHeader(Rng& rng) {
  FrameHeader h;
  h.bone_codec = coder::kMortonDeltaBoneCodec;
  h.bone_depth = static_cast<uint8_t>(1 + rng.UniformInt(21));
  h.k = static_cast<uint16_t>(1 + rng.UniformInt(65535));
  h.n = h.k + rng.UniformInt(1u << 30);
  h.m = static_cast<uint32_t>(ChooseM(h.n, h.k));
  h.c = static_cast<uint8_t>(1 + rng.UniformInt(255));
  h.u = static_cast<uint8_t>(1 + rng.UniformInt(255));
  return h;
}

TEST(Frame, ParseSerializeRoundTripProperty) {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    EncodedFrame f;
    f.header = RandomHeader(rng);
    f.bones.resize(rng.UniformInt(64));
    f.features.resize(rng.UniformInt(64));
    for (uint8_t& b : f.bones) b = static_cast<uint8_t>(rng.UniformInt(256));
    for (uint8_t& b : f.features) b = static_cast<uint8_t>(rng.UniformInt(256));
    f.header.bone_bytes = static_cast<uint32_t>(f.bones.size());
    f.header.feature_bytes = static_cast<uint32_t>(f.features.size());
    const Bytes bytes = f.Serialize();
    ASSERT_EQ(bytes.size(), f.size());
    const EncodedFrame back = EncodedFrame::Parse(bytes);
    ASSERT_EQ(back, f);
    ASSERT_EQ(back.Serialize(), bytes);
  }
}

TEST(Frame, LayoutIsLittleEndian) {
  EncodedFrame f;
  f.header.bone_codec = 1;
  f.header.n = 0x0102030405;
  f.header.k = 0x80;
  f.header.m = static_cast<uint32_t>(ChooseM(f.header.n, 0x80));
  f.header.c = 16;
  f.header.u = 2;
  f.bones = {0xAA};
  f.header.bone_bytes = 1;
  const Bytes b = f.Serialize();
  ASSERT_EQ(b.size(), kFrameHeaderSize + 1);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "PSUP");
  EXPECT_EQ(b[4], kFrameVersion);
  EXPECT_EQ(b[5], 0);
  EXPECT_EQ(b[6], 1);
  EXPECT_EQ(b[7], 10);
  EXPECT_EQ(b[8], 0x05);
  EXPECT_EQ(b[12], 0x01);
  EXPECT_EQ(b[16], 0x80);
  EXPECT_EQ(b[22], 16);
  EXPECT_EQ(b[23], 2);
  EXPECT_EQ(b[26], 1);
  EXPECT_EQ(b[34], 0xAA);
}

TEST(Frame, ParseViolationsAreFormatErrors) {
  Rng rng(2);
  EncodedFrame f;
  f.header = RandomHeader(rng);
  f.bones = {1, 2, 3};
  f.header.bone_bytes = 3;
  const Bytes good = f.Serialize();
  const auto expect_format = [](const Bytes& b, const char* what) {
    try {
      EncodedFrame::Parse(b);
      ADD_FAILURE() << "accepted: " << what;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kFormat) << what;
    }
  };
  for (size_t cut = 0; cut < good.size(); ++cut) {
    expect_format(Bytes(good.begin(), good.begin() + cut), "truncated");
  }
  Bytes b = good;
  b.push_back(0);
  expect_format(b, "trailing byte");
  b = good, b[0] = 'X', expect_format(b, "magic");
  b = good, b[4] = 9, expect_format(b, "version");
  b = good, b[5] = 1, expect_format(b, "flags");
  b = good, b[6] = 7, expect_format(b, "bone codec");
  b = good, b[7] = 0, expect_format(b, "bone depth");
  b = good, b[18] ^= 1, expect_format(b, "M");
  b = good, b[22] = 0, expect_format(b, "c");
  b = good, b[24] = 1, expect_format(b, "reserved");
  b = good, b[26] = 4, expect_format(b, "bone length");
}

TEST(EndToEnd, SphereRoundTrip) {
  const PointCloud cloud = Sphere(1024);
  const Model& model = SharedModel();
  const EncodedFrame frame = Encode(cloud, CodecConfig{}, model, 3);
  EXPECT_EQ(frame.header.m, 16u);
  EXPECT_EQ(frame.header.n, 1024u);
  EXPECT_EQ(frame.header.k, 128);
  const Bytes bytes = frame.Serialize();
  EXPECT_EQ(EncodedFrame::Parse(bytes), frame);
  const RateBreakdown rate = BitsPerPoint(frame);
  EXPECT_GT(rate.total, 0.0);
  EXPECT_TRUE(std::isfinite(rate.total));
  EXPECT_NEAR(rate.header + rate.bones + rate.features, rate.total, 1e-12);

  const PointCloud out = Decode(bytes, model);
  EXPECT_EQ(out.size(), 16u * 32 * 2);
  EXPECT_NO_THROW(out.Validate());
  EXPECT_EQ(Encode(cloud, CodecConfig{}, model, 3).Serialize(), bytes);
  const PointCloud again = Decode(bytes, model);
  EXPECT_TRUE(std::equal(out.points().begin(), out.points().end(), again.points().begin()));
  // Batch size only changes GEMM blocking, so agreement is to float rounding.
  const PointCloud batched = Decode(frame, model, 3);
  ASSERT_EQ(batched.size(), out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    for (int a = 0; a < 3; ++a) ASSERT_NEAR(batched[i][a], out[i][a], 1e-3);
  }
}

TEST(EndToEnd, EntropyModelsAgreeBetweenSides) {
  const PointCloud cloud = Sphere(2048, 4);
  const Model& model = SharedModel();
  const EncodedFrame frame = Encode(cloud, CodecConfig{}, model, 1);
  const awds::Bones bones = awds::MakeBones(coder::DecodeBones(frame.bones));
  const dwem::DilatedWindows dw = dwem::BuildDilatedWindows(bones, 8);
  const EntropyParams a = ComputeEntropyParams(model, dw);
  const EntropyParams b = ComputeEntropyParams(model, dw, 7);
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.scale, b.scale);
  const std::vector<int32_t> q = DecodeFeatureSymbols(frame.features, a);
  EXPECT_EQ(q.size(), static_cast<size_t>(frame.header.m) * 16);
  EXPECT_EQ(EncodeFeatureSymbols(q, a), frame.features);
}

TEST(EndToEnd, FeatureRateFallsWithWindowSize) {
  const PointCloud cloud = Sphere(8192, 5);
  const Model& model = SharedModel();
  size_t previous = std::numeric_limits<size_t>::max();
  size_t at64 = 0, at256 = 0;
  for (int64_t k : {32, 64, 128, 256}) {
    CodecConfig config;
    config.window_size = k;
    const EncodedFrame frame = Encode(cloud, config, model, 2);
    EXPECT_LE(frame.features.size(), previous) << "K=" << k;
    previous = frame.features.size();
    if (k == 64) at64 = frame.features.size();
    if (k == 256) at256 = frame.features.size();
    EXPECT_EQ(Decode(frame.Serialize(), model).size(),
              ChooseM(cloud.size(), k) * static_cast<size_t>(ChooseR(k)) * 2);
  }
  EXPECT_LT(at256, at64);
}

TEST(EndToEnd, RejectsBadInputs) {
  const Model& model = SharedModel();
  PointCloud off_grid({{0.5, 0, 0}, {1, 1, 1}});
  try {
    Encode(off_grid, CodecConfig{}, model, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_THROW(Encode(Sphere(100), CodecConfig{}, model, 0), Error);
  CodecConfig big;
  big.window_size = 512;
  EXPECT_THROW(Encode(Sphere(4096), big, model, 0), Error);

  ModelConfig other;
  other.compact_channels = 8;
  const Model mismatched(other);
  const EncodedFrame frame = Encode(Sphere(512), CodecConfig{}, model, 0);
  EXPECT_THROW(Decode(frame, mismatched), Error);
}

TEST(EndToEnd, TamperedFramesNeverCrash) {
  const Model& model = SharedModel();
  const Bytes good = Encode(Sphere(512, 6), CodecConfig{}, model, 0).Serialize();
  Rng rng(3);
  int rejected = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Bytes bad = good;
    bad[rng.UniformInt(bad.size())] ^= static_cast<uint8_t>(1 + rng.UniformInt(255));
    try {
      const PointCloud out = Decode(bad, model);
      EXPECT_GT(out.size(), 0u);
    } catch (const Error&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(Resample, ExactCount) {
  Rng rng(4);
  const PointCloud cloud(testing::RandomGridPoints(rng, 100));
  const PointCloud down = ResampleToCount(cloud, 40);
  EXPECT_EQ(down.size(), 40u);
  const PointCloud up = ResampleToCount(cloud, 250);
  EXPECT_EQ(up.size(), 250u);
  for (size_t i = 0; i < 250; ++i) EXPECT_EQ(up[i], cloud[i % 100]);
  EXPECT_EQ(ResampleToCount(cloud, 100).size(), 100u);
  EXPECT_THROW(ResampleToCount(cloud, 0), Error);
}

TEST(Rate, AccountingIdentity) {
  EncodedFrame f;
  f.header.n = 1000;
  f.bones.resize(466);
  f.features.resize(500);
  const RateBreakdown r = BitsPerPoint(f);
  EXPECT_DOUBLE_EQ(r.total, 8.0);
  EXPECT_NEAR(r.header + r.bones + r.features, r.total, 1e-12);
}

}  // namespace
}  // namespace pointsoup::codec
