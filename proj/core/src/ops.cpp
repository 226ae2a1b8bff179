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

#include "adfusion/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "adfusion/error.hpp"

namespace adfusion::ops {
namespace {

void require_rank(const Shape& s, std::size_t rank, const char* op) {
  if (s.size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got " + shape_str(s));
  }
}

void require_same(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
  }
}

// NaN policy: in debug builds an op that turns finite inputs into non-finite
// outputs is an error; release builds let values propagate.
template <typename T>
void check_finite(const char* op, const BasicTensor<T>& out,
                  std::initializer_list<const BasicTensor<T>*> inputs) {
#ifndef NDEBUG
  if (out.all_finite()) return;
  for (const auto* in : inputs) {
    if (!in->all_finite()) return;
  }
  throw NumericError(std::string(op) + " produced non-finite output from "
                                       "finite inputs");
#else
  (void)op;
  (void)out;
  (void)inputs;
#endif
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

}  // namespace

template <typename T>
BasicTensor<T> matmul(BasicTape<T>& tape, const BasicTensor<T>& a,
                      const BasicTensor<T>& b) {
  require_rank(a.shape(), 2, "matmul");
  require_rank(b.shape(), 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ, " +
                     shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  using A = accum_t<T>;
  std::vector<T> out(m * n);
  std::vector<A> row(n);
  const auto ad = a.data();
  const auto bd = b.data();
  // i-k-j order: each out[i,j] still sees its terms in ascending k.
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), A{0});
    for (std::size_t p = 0; p < k; ++p) {
      const A aik = ad[i * k + p];
      const T* brow = &bd[p * n];
      for (std::size_t j = 0; j < n; ++j) row[j] += aik * A(brow[j]);
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = T(row[j]);
  }
  BasicTensor<T> result({m, n}, std::move(out));
  check_finite("matmul", result, {&a, &b});
  if (tape.wants({&a, &b})) {
    tape.record("matmul", {a, b}, result,
                [a, b, m, k, n](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  if (a.requires_grad()) {
                    // dA = G * B^T
                    auto ga = a.mutable_grad();
                    const auto bd = b.data();
                    for (std::size_t i = 0; i < m; ++i) {
                      for (std::size_t p = 0; p < k; ++p) {
                        A acc = 0;
                        for (std::size_t j = 0; j < n; ++j) {
                          acc += A(g[i * n + j]) * A(bd[p * n + j]);
                        }
                        ga[i * k + p] += T(acc);
                      }
                    }
                  }
                  if (b.requires_grad()) {
                    // dB = A^T * G
                    auto gb = b.mutable_grad();
                    const auto ad = a.data();
                    std::vector<A> acc(n);
                    for (std::size_t p = 0; p < k; ++p) {
                      std::fill(acc.begin(), acc.end(), A{0});
                      for (std::size_t i = 0; i < m; ++i) {
                        const A aip = ad[i * k + p];
                        for (std::size_t j = 0; j < n; ++j) {
                          acc[j] += aip * A(g[i * n + j]);
                        }
                      }
                      for (std::size_t j = 0; j < n; ++j) {
                        gb[p * n + j] += T(acc[j]);
                      }
                    }
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> transpose(BasicTape<T>& tape, const BasicTensor<T>& a) {
  require_rank(a.shape(), 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<T> out(m * n);
  const auto ad = a.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = ad[i * n + j];
  }
  BasicTensor<T> result({n, m}, std::move(out));
  if (tape.wants({&a})) {
    tape.record("transpose", {a}, result,
                [a, m, n](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  auto ga = a.mutable_grad();
                  for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                      ga[i * n + j] += g[j * m + i];
                    }
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> add(BasicTape<T>& tape, const BasicTensor<T>& a,
                   const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "add");
  std::vector<T> out(a.numel());
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  BasicTensor<T> result(a.shape(), std::move(out));
  check_finite("add", result, {&a, &b});
  if (tape.wants({&a, &b})) {
    tape.record("add", {a, b}, result, [a, b](const BasicTensor<T>& o) mutable {
      const auto g = o.grad();
      for (auto* t : {&a, &b}) {
        if (!t->requires_grad()) continue;
        auto gt = t->mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
      }
    });
  }
  return result;
}

template <typename T>
BasicTensor<T> mul(BasicTape<T>& tape, const BasicTensor<T>& a,
                   const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.numel());
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  BasicTensor<T> result(a.shape(), std::move(out));
  check_finite("mul", result, {&a, &b});
  if (tape.wants({&a, &b})) {
    tape.record("mul", {a, b}, result, [a, b](const BasicTensor<T>& o) mutable {
      const auto g = o.grad();
      // Same tensor on both sides (x * x) accumulates twice, as it should.
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        const auto bd = b.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd[i];
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        const auto ad = a.data();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad[i];
      }
    });
  }
  return result;
}

template <typename T>
BasicTensor<T> scale(BasicTape<T>& tape, const BasicTensor<T>& a, T factor) {
  std::vector<T> out(a.numel());
  const auto ad = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * factor;
  BasicTensor<T> result(a.shape(), std::move(out));
  check_finite("scale", result, {&a});
  if (tape.wants({&a})) {
    tape.record("scale", {a}, result,
                [a, factor](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  auto ga = a.mutable_grad();
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * factor;
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> add_row_bias(BasicTape<T>& tape, const BasicTensor<T>& x,
                            const BasicTensor<T>& bias) {
  require_rank(x.shape(), 2, "add_row_bias");
  require_rank(bias.shape(), 1, "add_row_bias");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (bias.dim(0) != n) {
    throw ShapeError("add_row_bias: " + shape_str(x.shape()) + " + " +
                     shape_str(bias.shape()));
  }
  std::vector<T> out(m * n);
  const auto xd = x.data();
  const auto bd = bias.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = xd[i * n + j] + bd[j];
  }
  BasicTensor<T> result(x.shape(), std::move(out));
  check_finite("add_row_bias", result, {&x, &bias});
  if (tape.wants({&x, &bias})) {
    tape.record("add_row_bias", {x, bias}, result,
                [x, bias, m, n](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  if (x.requires_grad()) {
                    auto gx = x.mutable_grad();
                    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                  }
                  if (bias.requires_grad()) {
                    auto gb = bias.mutable_grad();
                    for (std::size_t j = 0; j < n; ++j) {
                      accum_t<T> acc = 0;
                      for (std::size_t i = 0; i < m; ++i) acc += g[i * n + j];
                      gb[j] += T(acc);
                    }
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> sigmoid(BasicTape<T>& tape, const BasicTensor<T>& x) {
  std::vector<T> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(xd[i]);
  BasicTensor<T> result(x.shape(), std::move(out));
  check_finite("sigmoid", result, {&x});
  if (tape.wants({&x})) {
    tape.record("sigmoid", {x}, result, [x](const BasicTensor<T>& o) mutable {
      const auto g = o.grad();
      const auto y = o.data();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx[i] += g[i] * y[i] * (T{1} - y[i]);
      }
    });
  }
  return result;
}

template <typename T>
BasicTensor<T> relu(BasicTape<T>& tape, const BasicTensor<T>& x) {
  std::vector<T> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = xd[i] > T{0} ? xd[i] : T{0};
  }
  BasicTensor<T> result(x.shape(), std::move(out));
  if (tape.wants({&x})) {
    tape.record("relu", {x}, result, [x](const BasicTensor<T>& o) mutable {
      const auto g = o.grad();
      const auto xd = x.data();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (xd[i] > T{0}) gx[i] += g[i];
      }
    });
  }
  return result;
}

template <typename T>
BasicTensor<T> softmax_rows(BasicTape<T>& tape, const BasicTensor<T>& x) {
  require_rank(x.shape(), 2, "softmax_rows");
  using A = accum_t<T>;
  const std::size_t m = x.dim(0), n = x.dim(1);
  std::vector<T> out(m * n);
  std::vector<A> e(n);
  const auto xd = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = &xd[i * n];
    const T mx = *std::max_element(row, row + n);
    A total = 0;
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = std::exp(A(row[j]) - A(mx));
      total += e[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = T(e[j] / total);
  }
  BasicTensor<T> result(x.shape(), std::move(out));
  check_finite("softmax_rows", result, {&x});
  if (tape.wants({&x})) {
    tape.record("softmax_rows", {x}, result,
                [x, m, n](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  const auto y = o.data();
                  auto gx = x.mutable_grad();
                  for (std::size_t i = 0; i < m; ++i) {
                    A dot = 0;
                    for (std::size_t j = 0; j < n; ++j) {
                      dot += A(g[i * n + j]) * A(y[i * n + j]);
                    }
                    for (std::size_t j = 0; j < n; ++j) {
                      const std::size_t q = i * n + j;
                      gx[q] += T(A(y[q]) * (A(g[q]) - dot));
                    }
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> sum(BasicTape<T>& tape, const BasicTensor<T>& x) {
  accum_t<T> acc = 0;
  for (T v : x.data()) acc += v;
  auto result = BasicTensor<T>::scalar(T(acc));
  check_finite("sum", result, {&x});
  if (tape.wants({&x})) {
    tape.record("sum", {x}, result, [x](const BasicTensor<T>& o) mutable {
      const T g = o.grad()[0];
      for (T& gi : x.mutable_grad()) gi += g;
    });
  }
  return result;
}

template <typename T>
BasicTensor<T> mean_rows(BasicTape<T>& tape, const BasicTensor<T>& x) {
  require_rank(x.shape(), 2, "mean_rows");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (n == 0) throw ShapeError("mean_rows: empty sequence");
  using A = accum_t<T>;
  std::vector<A> acc(d, A{0});
  const auto xd = x.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) acc[j] += xd[i * d + j];
  }
  std::vector<T> out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = T(acc[j] / A(n));
  BasicTensor<T> result({d}, std::move(out));
  if (tape.wants({&x})) {
    tape.record("mean_rows", {x}, result,
                [x, n, d](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  auto gx = x.mutable_grad();
                  const T inv = T{1} / T(n);
                  for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                      gx[i * d + j] += g[j] * inv;
                    }
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> column(BasicTape<T>& tape, const BasicTensor<T>& x,
                      std::size_t j) {
  require_rank(x.shape(), 2, "column");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (j >= n) {
    throw ShapeError("column " + std::to_string(j) + " out of range for " +
                     shape_str(x.shape()));
  }
  std::vector<T> out(m);
  const auto xd = x.data();
  for (std::size_t i = 0; i < m; ++i) out[i] = xd[i * n + j];
  BasicTensor<T> result({m}, std::move(out));
  if (tape.wants({&x})) {
    tape.record("column", {x}, result,
                [x, m, n, j](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  auto gx = x.mutable_grad();
                  for (std::size_t i = 0; i < m; ++i) gx[i * n + j] += g[i];
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> tile_columns(BasicTape<T>& tape, const BasicTensor<T>& v,
                            std::size_t n) {
  require_rank(v.shape(), 1, "tile_columns");
  const std::size_t m = v.dim(0);
  std::vector<T> out(m * n);
  const auto vd = v.data();
  for (std::size_t i = 0; i < m; ++i) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(i * n), n, vd[i]);
  }
  BasicTensor<T> result({m, n}, std::move(out));
  if (tape.wants({&v})) {
    tape.record("tile_columns", {v}, result,
                [v, m, n](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  auto gv = v.mutable_grad();
                  for (std::size_t i = 0; i < m; ++i) {
                    accum_t<T> acc = 0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j];
                    gv[i] += T(acc);
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> reshape(BasicTape<T>& tape, const BasicTensor<T>& x,
                       Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape " + shape_str(x.shape()) + " -> " +
                     shape_str(shape));
  }
  BasicTensor<T> result(std::move(shape), x.values());
  if (tape.wants({&x})) {
    tape.record("reshape", {x}, result, [x](const BasicTensor<T>& o) mutable {
      const auto g = o.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return result;
}

template <typename T>
BasicTensor<T> append_one(BasicTape<T>& tape, const BasicTensor<T>& v) {
  require_rank(v.shape(), 1, "append_one");
  std::vector<T> out(v.values());
  out.push_back(T{1});
  const std::size_t d = v.dim(0);
  BasicTensor<T> result({d + 1}, std::move(out));
  if (tape.wants({&v})) {
    tape.record("append_one", {v}, result,
                [v, d](const BasicTensor<T>& o) mutable {
                  const auto g = o.grad();
                  auto gv = v.mutable_grad();
                  for (std::size_t i = 0; i < d; ++i) gv[i] += g[i];
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> outer(BasicTape<T>& tape, const BasicTensor<T>& a,
                     const BasicTensor<T>& b) {
  require_rank(a.shape(), 1, "outer");
  require_rank(b.shape(), 1, "outer");
  const std::size_t p = a.dim(0), q = b.dim(0);
  std::vector<T> out(p * q);
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) out[i * q + j] = ad[i] * bd[j];
  }
  BasicTensor<T> result({p, q}, std::move(out));
  check_finite("outer", result, {&a, &b});
  if (tape.wants({&a, &b})) {
    tape.record("outer", {a, b}, result,
                [a, b, p, q](const BasicTensor<T>& o) mutable {
                  using A = accum_t<T>;
                  const auto g = o.grad();
                  if (a.requires_grad()) {
                    auto ga = a.mutable_grad();
                    const auto bd = b.data();
                    for (std::size_t i = 0; i < p; ++i) {
                      A acc = 0;
                      for (std::size_t j = 0; j < q; ++j) {
                        acc += A(g[i * q + j]) * A(bd[j]);
                      }
                      ga[i] += T(acc);
                    }
                  }
                  if (b.requires_grad()) {
                    auto gb = b.mutable_grad();
                    const auto ad = a.data();
                    std::vector<A> acc(q, A{0});
                    for (std::size_t i = 0; i < p; ++i) {
                      for (std::size_t j = 0; j < q; ++j) {
                        acc[j] += A(g[i * q + j]) * A(ad[i]);
                      }
                    }
                    for (std::size_t j = 0; j < q; ++j) gb[j] += T(acc[j]);
                  }
                });
  }
  return result;
}

template <typename T>
BasicTensor<T> cross_entropy(BasicTape<T>& tape, const BasicTensor<T>& logits,
                             std::size_t label) {
  require_rank(logits.shape(), 1, "cross_entropy");
  const std::size_t n = logits.dim(0);
  if (label >= n) {
    throw ConfigError("cross_entropy: label " + std::to_string(label) +
                      " outside [0, " + std::to_string(n) + ")");
  }
  using A = accum_t<T>;
  const auto x = logits.data();
  const A mx = *std::max_element(x.begin(), x.end());
  A total = 0;
  for (T v : x) total += std::exp(A(v) - mx);
  const A lse = mx + std::log(total);
  auto result = BasicTensor<T>::scalar(T(lse - A(x[label])));
  check_finite("cross_entropy", result, {&logits});
  if (tape.wants({&logits})) {
    tape.record("cross_entropy", {logits}, result,
                [logits, label, lse, n](const BasicTensor<T>& o) mutable {
                  const A g = o.grad()[0];
                  const auto x = logits.data();
                  auto gx = logits.mutable_grad();
                  for (std::size_t i = 0; i < n; ++i) {
                    const A p = std::exp(A(x[i]) - lse);
                    gx[i] += T(g * (p - (i == label ? A{1} : A{0})));
                  }
                });
  }
  return result;
}

#define ADFUSION_INSTANTIATE_OPS(T)                                           \
  template BasicTensor<T> matmul(BasicTape<T>&, const BasicTensor<T>&,        \
                                 const BasicTensor<T>&);                      \
  template BasicTensor<T> transpose(BasicTape<T>&, const BasicTensor<T>&);    \
  template BasicTensor<T> add(BasicTape<T>&, const BasicTensor<T>&,           \
                              const BasicTensor<T>&);                         \
  template BasicTensor<T> mul(BasicTape<T>&, const BasicTensor<T>&,           \
                              const BasicTensor<T>&);                         \
  template BasicTensor<T> scale(BasicTape<T>&, const BasicTensor<T>&, T);     \
  template BasicTensor<T> add_row_bias(BasicTape<T>&, const BasicTensor<T>&,  \
                                       const BasicTensor<T>&);                \
  template BasicTensor<T> sigmoid(BasicTape<T>&, const BasicTensor<T>&);      \
  template BasicTensor<T> relu(BasicTape<T>&, const BasicTensor<T>&);         \
  template BasicTensor<T> softmax_rows(BasicTape<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> sum(BasicTape<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> mean_rows(BasicTape<T>&, const BasicTensor<T>&);    \
  template BasicTensor<T> column(BasicTape<T>&, const BasicTensor<T>&,        \
                                 std::size_t);                                \
  template BasicTensor<T> tile_columns(BasicTape<T>&, const BasicTensor<T>&,  \
                                       std::size_t);                          \
  template BasicTensor<T> reshape(BasicTape<T>&, const BasicTensor<T>&,       \
                                  Shape);                                     \
  template BasicTensor<T> append_one(BasicTape<T>&, const BasicTensor<T>&);   \
  template BasicTensor<T> outer(BasicTape<T>&, const BasicTensor<T>&,         \
                                const BasicTensor<T>&);                       \
  template BasicTensor<T> cross_entropy(BasicTape<T>&, const BasicTensor<T>&, \
                                        std::size_t);

ADFUSION_INSTANTIATE_OPS(float)
ADFUSION_INSTANTIATE_OPS(double)

#undef ADFUSION_INSTANTIATE_OPS

}  // namespace adfusion::ops
