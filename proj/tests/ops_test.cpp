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
#include <functional>
#include <string>

#include "adfusion/error.hpp"
#include "adfusion/grad_check.hpp"
#include "adfusion/ops.hpp"
#include "test_util.hpp"

namespace adfusion {
namespace {

using testing::random_tensor;

Tensor triple_loop_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<float> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (std::size_t p = 0; p < k; ++p) {
        acc += static_cast<double>(a.at(i, p)) * static_cast<double>(b.at(p, j));
      }
      out[i * n + j] = static_cast<float>(acc);
    }
  }
  return Tensor({m, n}, std::move(out));
}

TEST(MatmulTest, IdentityLeavesMatrixUnchanged) {
  Tape tape;
  auto eye = Tensor::matrix({{1, 0}, {0, 1}});
  auto m = Tensor::matrix({{1, 2}, {3, 4}});
  auto r = ops::matmul(tape, eye, m);
  EXPECT_EQ(r.values(), m.values());
}

TEST(MatmulTest, ZeroColumn) {
  Tape tape;
  auto r = ops::matmul(tape, Tensor::matrix({{1, 0}, {0, 1}}),
                       Tensor::matrix({{0}, {0}}));
  EXPECT_EQ(r.shape(), (Shape{2, 1}));
  EXPECT_EQ(r[0], 0.0f);
  EXPECT_EQ(r[1], 0.0f);
}

TEST(MatmulTest, MatchesTripleLoopOracleBitwise) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto a = random_tensor<float>(rng, {3, 4}, -10, 10);
    auto b = random_tensor<float>(rng, {4, 2}, -10, 10);
    Tape tape;
    auto got = ops::matmul(tape, a, b);
    auto want = triple_loop_matmul(a, b);
    ASSERT_EQ(got.values(), want.values()) << "seed " << seed;
  }
}

TEST(MatmulTest, InnerMismatchNamesBothShapes) {
  Tape tape;
  try {
    ops::matmul(tape, Tensor({2, 3}), Tensor({4, 2}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x2]"), std::string::npos) << msg;
  }
}

TEST(SoftmaxTest, Examples) {
  Tape tape;
  auto a = ops::softmax_rows(tape, Tensor::matrix({{0, 0}}));
  EXPECT_FLOAT_EQ(a[0], 0.5f);
  EXPECT_FLOAT_EQ(a[1], 0.5f);
  Tape64 tape64;
  auto b = ops::softmax_rows(tape64, Tensor64::matrix({{std::log(2.0), 0}}));
  EXPECT_NEAR(b[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b[1], 1.0 / 3.0, 1e-15);
  auto c = ops::softmax_rows(tape, Tensor::matrix({{1000, 0}}));
  EXPECT_TRUE(c.all_finite());
  EXPECT_NEAR(c[0], 1.0f, 1e-7);
  EXPECT_NEAR(c[1], 0.0f, 1e-7);
}

TEST(SoftmaxTest, RowsSumToOneAndShiftInvariant) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t m = 1 + rng.below(5), n = 1 + rng.below(8);
    auto x = random_tensor<float>(rng, {m, n}, -30, 30);
    Tape tape;
    auto s = ops::softmax_rows(tape, x);
    std::vector<float> shifted(x.values());
    for (std::size_t i = 0; i < m; ++i) {
      const float c = static_cast<float>(rng.uniform(-5, 5));
      for (std::size_t j = 0; j < n; ++j) shifted[i * n + j] += c;
    }
    auto s2 = ops::softmax_rows(tape, Tensor({m, n}, shifted));
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_GE(s.at(i, j), 0.0f);
        row += s.at(i, j);
        EXPECT_NEAR(s.at(i, j), s2.at(i, j), 1e-5);
      }
      EXPECT_NEAR(row, 1.0, 1e-6);
    }
  }
}

TEST(ElementwiseTest, Examples) {
  Tape tape;
  EXPECT_FLOAT_EQ(ops::sigmoid(tape, Tensor::vector({0}))[0], 0.5f);
  Tape64 tape64;
  EXPECT_NEAR(ops::sigmoid(tape64, Tensor64::vector({std::log(3.0)}))[0], 0.75,
              1e-15);
  auto p = ops::mul(tape, Tensor::vector({1, 2, 3}), Tensor::vector({4, 5, 6}));
  EXPECT_EQ(p.values(), (std::vector<float>{4, 10, 18}));
  auto s = ops::add(tape, Tensor::vector({1, 2}), Tensor::vector({3, 4}));
  EXPECT_EQ(s.values(), (std::vector<float>{4, 6}));
  auto r = ops::relu(tape, Tensor::vector({-1, 0, 2}));
  EXPECT_EQ(r.values(), (std::vector<float>{0, 0, 2}));
}

TEST(ElementwiseTest, SigmoidExtremesStayFinite) {
  Tape tape;
  auto s = ops::sigmoid(tape, Tensor::vector({-1000, 1000}));
  EXPECT_EQ(s[0], 0.0f);
  EXPECT_EQ(s[1], 1.0f);
}

TEST(ElementwiseTest, ReluSubgradientAtZeroIsZero) {
  Tape tape;
  Tensor x = Tensor::vector({-1, 0, 2});
  x.set_requires_grad(true);
  tape.backward(ops::sum(tape, ops::relu(tape, x)));
  EXPECT_EQ(x.grad()[0], 0.0f);
  EXPECT_EQ(x.grad()[1], 0.0f);
  EXPECT_EQ(x.grad()[2], 1.0f);
}

TEST(ElementwiseTest, BinaryShapeMismatchThrows) {
  Tape tape;
  EXPECT_THROW(ops::mul(tape, Tensor({2}), Tensor({3})), ShapeError);
  EXPECT_THROW(ops::add(tape, Tensor({2, 1}), Tensor({1, 2})), ShapeError);
}

TEST(ReductionTest, MeanRowsAndColumn) {
  Tape tape;
  auto m = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(ops::mean_rows(tape, m).values(), (std::vector<float>{2, 3}));
  EXPECT_EQ(ops::column(tape, m, 1).values(), (std::vector<float>{2, 4}));
  EXPECT_THROW(ops::mean_rows(tape, Tensor({0, 2})), ShapeError);
  auto t = ops::tile_columns(tape, Tensor::vector({1, 2}), 3);
  EXPECT_EQ(t.values(), (std::vector<float>{1, 1, 1, 2, 2, 2}));
}

TEST(CrossEntropyOpTest, LabelOutOfRangeThrows) {
  Tape tape;
  EXPECT_THROW(ops::cross_entropy(tape, Tensor::vector({0, 0}), 2), ConfigError);
}

// ---------------------------------------------------------------------------
// Analytic gradients against central differences, 100 random cases per op.

using OpCase = std::function<Tensor64(Tape64&, const std::vector<Tensor64>&)>;

struct GradCase {
  std::string name;
  std::function<std::vector<Tensor64>(Rng&)> inputs;
  OpCase op;
};

// Values away from zero so that relu's kink is never inside a probe.
Tensor64 away_from_zero(Rng& rng, Shape shape) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = (rng.bernoulli(0.5) ? 1 : -1) * rng.uniform(0.1, 1.0);
  return Tensor64(std::move(shape), std::move(v));
}

std::size_t small(Rng& rng) { return 1 + static_cast<std::size_t>(rng.below(4)); }

std::vector<GradCase> grad_cases() {
  std::vector<GradCase> c;
  c.push_back({"matmul",
               [](Rng& r) {
                 auto m = small(r), k = small(r), n = small(r);
                 return std::vector{random_tensor<double>(r, {m, k}),
                                    random_tensor<double>(r, {k, n})};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::matmul(t, x[0], x[1]);
               }});
  c.push_back({"transpose",
               [](Rng& r) {
                 return std::vector{random_tensor<double>(r, {small(r), small(r)})};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::transpose(t, x[0]);
               }});
  c.push_back({"add",
               [](Rng& r) {
                 Shape s{small(r), small(r)};
                 return std::vector{random_tensor<double>(r, s),
                                    random_tensor<double>(r, s)};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::add(t, x[0], x[1]);
               }});
  c.push_back({"mul",
               [](Rng& r) {
                 Shape s{small(r), small(r)};
                 return std::vector{random_tensor<double>(r, s),
                                    random_tensor<double>(r, s)};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::mul(t, x[0], x[1]);
               }});
  c.push_back({"scale",
               [](Rng& r) { return std::vector{random_tensor<double>(r, {small(r)})}; },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::scale(t, x[0], -1.7);
               }});
  c.push_back({"add_row_bias",
               [](Rng& r) {
                 auto m = small(r), n = small(r);
                 return std::vector{random_tensor<double>(r, {m, n}),
                                    random_tensor<double>(r, {n})};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::add_row_bias(t, x[0], x[1]);
               }});
  c.push_back({"sigmoid",
               [](Rng& r) {
                 return std::vector{random_tensor<double>(r, {small(r), small(r)}, -4, 4)};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::sigmoid(t, x[0]);
               }});
  c.push_back({"relu",
               [](Rng& r) { return std::vector{away_from_zero(r, {small(r), small(r)})}; },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::relu(t, x[0]);
               }});
  c.push_back({"softmax_rows",
               [](Rng& r) {
                 return std::vector{random_tensor<double>(r, {small(r), small(r)}, -3, 3)};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::softmax_rows(t, x[0]);
               }});
  c.push_back({"mean_rows",
               [](Rng& r) {
                 return std::vector{random_tensor<double>(r, {small(r), small(r)})};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::mean_rows(t, x[0]);
               }});
  c.push_back({"column",
               [](Rng& r) { return std::vector{random_tensor<double>(r, {small(r), 3})}; },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::column(t, x[0], 1);
               }});
  c.push_back({"tile_columns",
               [](Rng& r) { return std::vector{random_tensor<double>(r, {small(r)})}; },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::tile_columns(t, x[0], 3);
               }});
  c.push_back({"reshape",
               [](Rng& r) { return std::vector{random_tensor<double>(r, {2, small(r)})}; },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::reshape(t, x[0], Shape{x[0].numel()});
               }});
  c.push_back({"append_one",
               [](Rng& r) { return std::vector{random_tensor<double>(r, {small(r)})}; },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::append_one(t, x[0]);
               }});
  c.push_back({"outer",
               [](Rng& r) {
                 return std::vector{random_tensor<double>(r, {small(r)}),
                                    random_tensor<double>(r, {small(r)})};
               },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::outer(t, x[0], x[1]);
               }});
  c.push_back({"cross_entropy",
               [](Rng& r) { return std::vector{random_tensor<double>(r, {2}, -3, 3)}; },
               [](Tape64& t, const std::vector<Tensor64>& x) {
                 return ops::cross_entropy(t, x[0], 1);
               }});
  return c;
}

class OpGradientTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(OpGradientTest, MatchesCentralDifferencesOver100Seeds) {
  const auto gc = grad_cases()[GetParam()];
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed * 7919 + GetParam());
    auto inputs = gc.inputs(rng);
    // Contract the output with fixed random weights so every output entry
    // contributes a distinct coefficient.
    Tape64 probe = Tape64::disabled();
    const auto shape = gc.op(probe, inputs).shape();
    const auto weights = random_tensor<double>(rng, shape);
    std::vector<NamedParam> params;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      params.push_back({"x" + std::to_string(i), inputs[i]});
    }
    auto loss = [&](Tape64& tape) {
      auto y = gc.op(tape, inputs);
      return ops::sum(tape, ops::mul(tape, y, weights));
    };
    const auto r = grad_check(loss, params);
    worst = std::max(worst, r.max_relative_error);
    ASSERT_LT(r.max_relative_error, 1e-6)
        << gc.name << " seed " << seed << " worst " << r.worst_param << "["
        << r.worst_index << "]";
  }
  RecordProperty("worst_error", std::to_string(worst));
}

INSTANTIATE_TEST_SUITE_P(
    AllOps, OpGradientTest, ::testing::Range<std::size_t>(0, grad_cases().size()),
    [](const ::testing::TestParamInfo<std::size_t>& info) {
      return grad_cases()[info.param].name;
    });

TEST(SumGradientTest, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto x = random_tensor<double>(rng, {small(rng), small(rng)});
    auto loss = [&](Tape64& tape) {
      auto s = ops::sum(tape, x);
      return ops::mul(tape, s, s);
    };
    ASSERT_LT(grad_check(loss, {{"x", x}}).max_relative_error, 1e-6);
  }
}

}  // namespace
}  // namespace adfusion
