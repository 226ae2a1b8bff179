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

#include "adfusion/error.hpp"
#include "adfusion/grad_check.hpp"
#include "adfusion/ops.hpp"
#include "adfusion/tensor_fusion.hpp"
#include "test_util.hpp"

namespace adfusion {
namespace {

using fusion::BranchVectors;
using testing::random_tensor;

TEST(AugmentTest, AppendsOne) {
  Tape tape;
  EXPECT_EQ(fusion::augment_one(tape, Tensor({0})).values(), (std::vector<float>{1}));
  EXPECT_EQ(fusion::augment_one(tape, Tensor::vector({5})).values(),
            (std::vector<float>{5, 1}));
}

TEST(TensorFusionTest, ZeroBranchesGiveSingleCorner) {
  Tape tape;
  BranchVectors<float> b{Tensor({2}), Tensor({3}), Tensor({1})};
  auto fused = fusion::tensor_fusion(tape, b);
  ASSERT_EQ(fused.data.shape(), (Shape{3, 4, 2}));
  for (std::size_t i = 0; i < fused.data.numel(); ++i) {
    EXPECT_EQ(fused.data[i], i + 1 == fused.data.numel() ? 1.0f : 0.0f);
  }
}

TEST(TensorFusionTest, FullSizeShapes) {
  Tape tape;
  auto tri = fusion::tensor_fusion(
      tape, BranchVectors<float>{Tensor({128}), Tensor({32}), Tensor({32})});
  EXPECT_EQ(tri.data.shape(), (Shape{129, 33, 33}));
  EXPECT_EQ(fusion::flatten(tape, tri).numel(), 140481u);
  auto bi = fusion::tensor_fusion(
      tape, BranchVectors<float>{Tensor({128}), std::nullopt, Tensor({32})});
  EXPECT_EQ(bi.data.shape(), (Shape{129, 33}));
  EXPECT_EQ(fusion::flatten(tape, bi).numel(), 4257u);
}

TEST(TensorFusionTest, EveryEntryIsTheProduct) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto zt = random_tensor<double>(rng, {2}, -3, 3);
    auto zv = random_tensor<double>(rng, {2}, -3, 3);
    auto za = random_tensor<double>(rng, {2}, -3, 3);
    Tape64 tape;
    auto fused = fusion::tensor_fusion(tape, BranchVectors<double>{zt, zv, za});
    ASSERT_EQ(fused.data.numel(), 27u);
    const double t[3] = {zt[0], zt[1], 1}, v[3] = {zv[0], zv[1], 1},
                 a[3] = {za[0], za[1], 1};
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t k = 0; k < 3; ++k) {
          EXPECT_EQ(fused.data.at(i, j, k), t[i] * v[j] * a[k]);
        }
      }
    }
    EXPECT_EQ(fused.data.at(2, 2, 2), 1.0);
  }
}

TEST(TensorFusionTest, SlicesRecoverUnimodalAndBimodalTerms) {
  Rng rng(7);
  auto zt = random_tensor<double>(rng, {4});
  auto zv = random_tensor<double>(rng, {3});
  auto za = random_tensor<double>(rng, {5});
  Tape64 tape;
  auto f = fusion::tensor_fusion(tape, BranchVectors<double>{zt, zv, za}).data;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(f.at(i, 3, 5), zt[i]);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(f.at(4, j, 5), zv[j]);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(f.at(4, 3, k), za[k]);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(f.at(i, j, 5), zt[i] * zv[j]);
  }
}

TEST(TensorFusionTest, BimodalEntriesAndFlattenOrder) {
  Rng rng(8);
  auto zt = random_tensor<double>(rng, {3});
  auto za = random_tensor<double>(rng, {2});
  Tape64 tape;
  auto fused = fusion::tensor_fusion(tape, BranchVectors<double>{zt, std::nullopt, za});
  auto flat = fusion::flatten(tape, fused);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double t = i < 3 ? zt[i] : 1.0, a = k < 2 ? za[k] : 1.0;
      EXPECT_EQ(fused.data.at(i, k), t * a);
      EXPECT_EQ(flat[i * 3 + k], t * a);
    }
  }
}

TEST(TensorFusionTest, LinearInEachBranch) {
  Rng rng(9);
  auto zt = random_tensor<double>(rng, {3});
  auto zv = random_tensor<double>(rng, {2});
  auto za = random_tensor<double>(rng, {2});
  auto zt2 = random_tensor<double>(rng, {3});
  const double alpha = 1.75, beta = -0.5;
  std::vector<double> mix(3);
  for (std::size_t i = 0; i < 3; ++i) mix[i] = alpha * zt[i] + beta * zt2[i];
  Tape64 tape;
  auto f1 = fusion::tensor_fusion(tape, BranchVectors<double>{zt, zv, za}).data;
  auto f2 = fusion::tensor_fusion(tape, BranchVectors<double>{zt2, zv, za}).data;
  auto fm = fusion::tensor_fusion(tape, BranchVectors<double>{Tensor64({3}, mix), zv, za})
                .data;
  // The text axis rows below the constant are linear in z_t.
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(fm.at(i, j, k), alpha * f1.at(i, j, k) + beta * f2.at(i, j, k),
                    1e-14);
      }
    }
  }
}

TEST(TensorFusionTest, GradientMatchesFiniteDifferences) {
  Rng rng(10);
  auto zt = random_tensor<double>(rng, {3});
  auto zv = random_tensor<double>(rng, {2});
  auto za = random_tensor<double>(rng, {2});
  auto w = random_tensor<double>(rng, {4 * 3 * 3});
  auto loss = [&](Tape64& tape) {
    auto flat = fusion::flatten(tape, fusion::tensor_fusion(
                                          tape, BranchVectors<double>{zt, zv, za}));
    return ops::sum(tape, ops::mul(tape, flat, w));
  };
  EXPECT_LT(grad_check(loss, {{"zt", zt}, {"zv", zv}, {"za", za}}).max_relative_error,
            1e-6);
}

TEST(TensorFusionTest, TextAloneThrows) {
  Tape tape;
  EXPECT_THROW(fusion::tensor_fusion(tape, BranchVectors<float>{Tensor({3}), std::nullopt, std::nullopt}),
               ShapeError);
  EXPECT_THROW(fusion::tensor_fusion(
                   tape, BranchVectors<float>{Tensor({3, 1}), Tensor({2}), std::nullopt}),
               ShapeError);
}

}  // namespace
}  // namespace adfusion
