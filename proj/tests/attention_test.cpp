// Copyright 2026 The adfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "adfusion/error.hpp"
#include "adfusion/gated_attention.hpp"
#include "test_util.hpp"

namespace adfusion {
namespace {

using attention::GatedAttentionParams;
using testing::random_tensor;

TEST(GatingMaskTest, ZeroWeightsGiveOneHalf) {
  auto params = GatedAttentionParams<float>::zeros(4, 2);
  Rng rng(0);
  auto z = random_tensor<float>(rng, {3, 4});
  Tape tape;
  auto masks = attention::compute_gating_masks(tape, params, z, z);
  ASSERT_EQ(masks.m.shape(), (Shape{3, 2}));
  for (float v : masks.m.data()) EXPECT_EQ(v, 0.5f);
}

TEST(GatingMaskTest, ShapesForSevenTokens) {
  Rng rng(1);
  auto params = GatedAttentionParams<float>::init(16, 8, rng);
  auto z = random_tensor<float>(rng, {7, 16});
  Tape tape;
  auto masks = attention::compute_gating_masks(tape, params, z, z);
  EXPECT_EQ(masks.m.shape(), (Shape{7, 2}));
  EXPECT_EQ(masks.mask_q.shape(), (Shape{7}));
  EXPECT_EQ(masks.mask_k.shape(), (Shape{7}));
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(masks.mask_q[i], masks.m.at(i, 0));
    EXPECT_EQ(masks.mask_k[i], masks.m.at(i, 1));
  }
}

TEST(GatingMaskTest, MatchesStepByStepOracle) {
  Rng rng(2);
  auto params = GatedAttentionParams<double>::init(5, 3, rng);
  params.fc_q.bias().mutable_data()[0] = 0.1;
  params.fc_k.bias().mutable_data()[2] = -0.2;
  params.fc_g.bias().mutable_data()[1] = 0.3;
  auto q = random_tensor<double>(rng, {4, 5});
  auto k = random_tensor<double>(rng, {4, 5});
  Tape64 tape;
  auto masks = attention::compute_gating_masks(tape, params, q, k);
  auto dense = [](const nn::DenseLayer<double>& l, const std::vector<double>& x) {
    std::vector<double> y(l.out_features());
    for (std::size_t j = 0; j < y.size(); ++j) {
      double acc = l.bias()[j];
      for (std::size_t p = 0; p < x.size(); ++p) acc += x[p] * l.weight().at(p, j);
      y[j] = acc;
    }
    return y;
  };
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> qi(5), ki(5);
    for (std::size_t c = 0; c < 5; ++c) {
      qi[c] = q.at(i, c);
      ki[c] = k.at(i, c);
    }
    auto gq = dense(params.fc_q, qi);
    auto gk = dense(params.fc_k, ki);
    for (std::size_t c = 0; c < 3; ++c) gq[c] *= gk[c];
    auto g = dense(params.fc_g, gq);
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_NEAR(masks.m.at(i, c), 1.0 / (1.0 + std::exp(-g[c])), 1e-14);
    }
  }
}

TEST(GatingMaskTest, StrictlyInsideUnitInterval) {
  // Sigmoid rounds to exactly 1 once the logit passes ~17 (f32) or ~37 (f64),
  // so the open interval is checked on moderate inputs.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto params = GatedAttentionParams<double>::init(8, 4, rng);
    auto z = random_tensor<double>(rng, {6, 8}, -1, 1);
    Tape64 tape;
    auto m = attention::compute_gating_masks(tape, params, z, z).m;
    for (double v : m.data()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(AttentionMapTest, HandComputedTwoByTwo) {
  // z z^T / sqrt(2) = [[1, 2], [2, 4]] with both gates at 1.
  const double s = std::pow(2.0, 0.25);
  auto z = Tensor64::matrix({{s, 0}, {2 * s, 0}});
  auto ones = Tensor64::vector({1, 1});
  Tape64 tape;
  auto a = attention::gated_attention_map(tape, z, z, ones, ones);
  const double e = std::exp(1.0), e2 = std::exp(2.0);
  EXPECT_NEAR(a.at(0, 0), 1 / (1 + e), 1e-12);
  EXPECT_NEAR(a.at(0, 1), e / (1 + e), 1e-12);
  EXPECT_NEAR(a.at(1, 0), 1 / (1 + e2), 1e-12);
  EXPECT_NEAR(a.at(1, 1), e2 / (1 + e2), 1e-12);
}

TEST(AttentionMapTest, GatesScaleQueriesAndKeys) {
  auto z = Tensor64::matrix({{1, 2}, {-1, 0.5}});
  auto gq = Tensor64::vector({0.5, 0.25});
  auto gk = Tensor64::vector({0.8, 0.1});
  Tape64 tape;
  auto a = attention::gated_attention_map(tape, z, z, gq, gk);
  for (std::size_t i = 0; i < 2; ++i) {
    double s[2], total = 0;
    for (std::size_t j = 0; j < 2; ++j) {
      double dot = 0;
      for (std::size_t c = 0; c < 2; ++c) dot += gq[i] * z.at(i, c) * gk[j] * z.at(j, c);
      s[j] = std::exp(dot / std::sqrt(2.0));
      total += s[j];
    }
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a.at(i, j), s[j] / total, 1e-14);
  }
}

TEST(AttentionMapTest, MaskLengthMismatchThrows) {
  auto z = Tensor::matrix({{1, 2}, {3, 4}});
  Tape tape;
  EXPECT_THROW(attention::gated_attention_map(tape, z, z, Tensor::vector({1}),
                                              Tensor::vector({1, 1})),
               ShapeError);
}

TEST(GatedSelfAttentionTest, ZeroInputGivesUniformMap) {
  Rng rng(3);
  auto params = GatedAttentionParams<float>::init(6, 3, rng);
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    Tape tape;
    auto trace = attention::gated_self_attention_forward(tape, params, Tensor({n, 6}));
    for (float v : trace.attention_map.data()) EXPECT_FLOAT_EQ(v, 1.0f / n);
    for (float v : trace.output_h.data()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(GatedSelfAttentionTest, SingleTokenReturnsInput) {
  Rng rng(4);
  auto params = GatedAttentionParams<float>::init(5, 2, rng);
  auto z = random_tensor<float>(rng, {1, 5});
  Tape tape;
  auto trace = attention::gated_self_attention_forward(tape, params, z);
  EXPECT_EQ(trace.attention_map.values(), (std::vector<float>{1.0f}));
  EXPECT_EQ(trace.output_h.values(), z.values());
}

TEST(GatedSelfAttentionTest, FullWidthShapes) {
  Rng rng(5);
  auto params = GatedAttentionParams<float>::init(768, 64, rng);
  auto z = random_tensor<float>(rng, {12, 768});
  Tape tape;
  auto trace = attention::gated_self_attention_forward(tape, params, z);
  EXPECT_EQ(trace.masks_m.shape(), (Shape{12, 2}));
  EXPECT_EQ(trace.attention_map.shape(), (Shape{12, 12}));
  EXPECT_EQ(trace.output_h.shape(), (Shape{12, 768}));
}

TEST(GatedSelfAttentionTest, WrongWidthThrows) {
  Rng rng(6);
  auto params = GatedAttentionParams<float>::init(4, 2, rng);
  Tape tape;
  EXPECT_THROW(attention::gated_self_attention_forward(tape, params, Tensor({3, 5})),
               ShapeError);
  EXPECT_THROW(attention::gated_self_attention_forward(tape, params, Tensor({0, 4})),
               ShapeError);
}

TEST(GatedSelfAttentionTest, RowsSumToOneOverRandomInputs) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(10), d = 1 + rng.below(12);
    auto params = GatedAttentionParams<float>::init(d, 1 + rng.below(6), rng);
    auto z = random_tensor<float>(rng, {n, d}, -4, 4);
    Tape tape;
    auto a = attention::gated_self_attention_forward(tape, params, z).attention_map;
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0;
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_GE(a.at(i, j), 0.0f);
        total += a.at(i, j);
      }
      ASSERT_NEAR(total, 1.0, 1e-6) << "seed " << seed << " row " << i;
    }
  }
}

TEST(GatedSelfAttentionTest, PermutationEquivariantBitwise) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(8), d = 1 + rng.below(16);
    auto params = GatedAttentionParams<float>::init(d, 1 + rng.below(8), rng);
    auto z = random_tensor<float>(rng, {n, d}, -2, 2);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<float> pz(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) pz[i * d + c] = z.at(perm[i], c);
    }
    Tape tape;
    auto h = attention::gated_self_attention_forward(tape, params, z).output_h;
    auto ph = attention::gated_self_attention_forward(tape, params, Tensor({n, d}, pz))
                  .output_h;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        ASSERT_EQ(ph.at(i, c), h.at(perm[i], c)) << "seed " << seed;
      }
    }
  }
}

}  // namespace
}  // namespace adfusion
