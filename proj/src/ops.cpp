// Copyright 2026 The hybrid-snn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsnn/error.hpp"

namespace hsnn::ops {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

// Adds g into node's gradient buffer when that node takes part in the graph.
void accumulate(detail::Node& node, const std::vector<double>& g) {
  if (!node.requires_grad) return;
  auto& buf = node.grad_buffer();
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

struct ConvGeometry {
  std::size_t n, c, h, w, f, k, ho, wo, stride, pad;
  std::size_t patch() const { return c * k * k; }
  std::size_t positions() const { return ho * wo; }
};

void im2col(const double* x, const ConvGeometry& g, double* col) {
  const std::size_t p_count = g.positions();
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        double* row = col + ((c * g.k + ki) * g.k + kj) * p_count;
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + ki) - static_cast<long>(g.pad);
          for (std::size_t ow = 0; ow < g.wo; ++ow) {
            const long iw = static_cast<long>(ow * g.stride + kj) - static_cast<long>(g.pad);
            const bool inside = ih >= 0 && iw >= 0 && ih < static_cast<long>(g.h) &&
                                iw < static_cast<long>(g.w);
            row[oh * g.wo + ow] = inside ? x[(c * g.h + ih) * g.w + iw] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeometry& g, double* dx) {
  const std::size_t p_count = g.positions();
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const double* row = col + ((c * g.k + ki) * g.k + kj) * p_count;
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + ki) - static_cast<long>(g.pad);
          if (ih < 0 || ih >= static_cast<long>(g.h)) continue;
          for (std::size_t ow = 0; ow < g.wo; ++ow) {
            const long iw = static_cast<long>(ow * g.stride + kj) - static_cast<long>(g.pad);
            if (iw < 0 || iw >= static_cast<long>(g.w)) continue;
            dx[(c * g.h + ih) * g.w + iw] += row[oh * g.wo + ow];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result(
      a.shape(), std::move(out), {a, b},
      [](const detail::Node& self) {
        accumulate(*self.inputs[0], self.grad);
        accumulate(*self.inputs[1], self.grad);
      },
      "add");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result(
      a.shape(), std::move(out), {a, b},
      [](const detail::Node& self) {
        auto& lhs = *self.inputs[0];
        auto& rhs = *self.inputs[1];
        if (lhs.requires_grad) {
          auto& g = lhs.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * rhs.value[i];
        }
        if (rhs.requires_grad) {
          auto& g = rhs.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * lhs.value[i];
        }
      },
      "mul");
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return make_result(
      a.shape(), std::move(out), {a},
      [factor](const detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
      },
      "scale");
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result(
      {1}, {s}, {a},
      [](const detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (auto& v : g) v += self.grad[0];
      },
      "sum");
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  return make_result(
      std::move(shape), a.to_vector(), {a},
      [](const detail::Node& self) { accumulate(*self.inputs[0], self.grad); }, "reshape");
}

Tensor flatten(const Tensor& a) { return reshape(a, {a.numel()}); }

Tensor permute(const Tensor& a, std::array<std::size_t, 4> perm) {
  if (a.rank() != 4) throw DimensionError("permute: expected rank-4 tensor, got " + shape_str(a.shape()));
  std::array<bool, 4> seen{};
  for (auto p : perm) {
    if (p >= 4 || seen[p]) throw ContractError("permute: invalid axis permutation");
    seen[p] = true;
  }
  const Shape& in = a.shape();
  std::array<std::size_t, 4> in_stride{in[1] * in[2] * in[3], in[2] * in[3], in[3], 1};
  Shape out_shape{in[perm[0]], in[perm[1]], in[perm[2]], in[perm[3]]};
  // Source offset for each output position, shared by forward and backward.
  auto gather = std::make_shared<std::vector<std::size_t>>(a.numel());
  std::size_t o = 0;
  for (std::size_t i0 = 0; i0 < out_shape[0]; ++i0)
    for (std::size_t i1 = 0; i1 < out_shape[1]; ++i1)
      for (std::size_t i2 = 0; i2 < out_shape[2]; ++i2)
        for (std::size_t i3 = 0; i3 < out_shape[3]; ++i3)
          (*gather)[o++] = i0 * in_stride[perm[0]] + i1 * in_stride[perm[1]] +
                           i2 * in_stride[perm[2]] + i3 * in_stride[perm[3]];
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[(*gather)[i]];
  return make_result(
      std::move(out_shape), std::move(out), {a},
      [gather](const detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[(*gather)[i]] += self.grad[i];
      },
      "permute");
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw DimensionError("transpose: expected rank-2 tensor, got " + shape_str(a.shape()));
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  std::vector<double> out(a.numel());
  transpose_into(a.data().data(), out.data(), rows, cols);
  return make_result(
      {cols, rows}, std::move(out), {a},
      [rows, cols](const detail::Node& self) {
        std::vector<double> g(self.grad.size());
        transpose_into(self.grad.data(), g.data(), cols, rows);
        accumulate(*self.inputs[0], g);
      },
      "transpose");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  gemm_accumulate(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_result(
      {m, n}, std::move(out), {a, b},
      [m, k, n](const detail::Node& self) {
        auto& lhs = *self.inputs[0];
        auto& rhs = *self.inputs[1];
        if (lhs.requires_grad) {
          // dA = G * B^T
          std::vector<double> bt(k * n);
          transpose_into(rhs.value.data(), bt.data(), k, n);
          gemm_accumulate(self.grad.data(), bt.data(), lhs.grad_buffer().data(), m, n, k);
        }
        if (rhs.requires_grad) {
          // dB = A^T * G
          std::vector<double> at(m * k);
          transpose_into(lhs.value.data(), at.data(), m, k);
          gemm_accumulate(at.data(), self.grad.data(), rhs.grad_buffer().data(), k, m, n);
        }
      },
      "matmul");
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, Conv2dOptions opts) {
  if (x.rank() != 3 && x.rank() != 4) {
    throw DimensionError("conv2d: input must be (C,H,W) or (N,C,H,W), got " + shape_str(x.shape()));
  }
  if (w.rank() != 4 || w.dim(2) != w.dim(3)) {
    throw DimensionError("conv2d: weight must be (F,C,k,k), got " + shape_str(w.shape()));
  }
  if (opts.stride == 0) throw ContractError("conv2d: stride must be >= 1");
  const bool batched = x.rank() == 4;
  ConvGeometry g{};
  g.n = batched ? x.dim(0) : 1;
  g.c = x.dim(batched ? 1 : 0);
  g.h = x.dim(batched ? 2 : 1);
  g.w = x.dim(batched ? 3 : 2);
  g.f = w.dim(0);
  g.k = w.dim(2);
  g.stride = opts.stride;
  g.pad = opts.pad;
  if (w.dim(1) != g.c) {
    throw DimensionError("conv2d: input " + shape_str(x.shape()) + " has " + std::to_string(g.c) +
                         " channels but weight " + shape_str(w.shape()) + " expects " +
                         std::to_string(w.dim(1)));
  }
  if (g.k > g.h + 2 * g.pad || g.k > g.w + 2 * g.pad) {
    throw DimensionError("conv2d: kernel " + shape_str(w.shape()) + " larger than padded input " +
                         shape_str(x.shape()));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.f)) {
    throw DimensionError("conv2d: bias " + shape_str(bias.shape()) + " does not match " +
                         std::to_string(g.f) + " filters");
  }
  g.ho = (g.h + 2 * g.pad - g.k) / g.stride + 1;
  g.wo = (g.w + 2 * g.pad - g.k) / g.stride + 1;

  const std::size_t in_size = g.c * g.h * g.w;
  const std::size_t out_size = g.f * g.positions();
  std::vector<double> out(g.n * out_size, 0.0);
  std::vector<double> col(g.patch() * g.positions());
  for (std::size_t n = 0; n < g.n; ++n) {
    im2col(x.data().data() + n * in_size, g, col.data());
    double* o = out.data() + n * out_size;
    gemm_accumulate(w.data().data(), col.data(), o, g.f, g.patch(), g.positions());
    if (bias.defined()) {
      for (std::size_t f = 0; f < g.f; ++f) {
        for (std::size_t p = 0; p < g.positions(); ++p) o[f * g.positions() + p] += bias[f];
      }
    }
  }
  Shape out_shape = batched ? Shape{g.n, g.f, g.ho, g.wo} : Shape{g.f, g.ho, g.wo};
  std::vector<Tensor> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(
      std::move(out_shape), std::move(out), std::move(inputs),
      [g, in_size, out_size](const detail::Node& self) {
        auto& xn = *self.inputs[0];
        auto& wn = *self.inputs[1];
        const std::size_t patch = g.patch(), positions = g.positions();
        std::vector<double> col(patch * positions);
        std::vector<double> col_t;
        std::vector<double> w_t;
        if (xn.requires_grad) {
          w_t.resize(wn.value.size());
          transpose_into(wn.value.data(), w_t.data(), g.f, patch);
        }
        for (std::size_t n = 0; n < g.n; ++n) {
          const double* gn = self.grad.data() + n * out_size;
          if (wn.requires_grad) {
            im2col(xn.value.data() + n * in_size, g, col.data());
            col_t.resize(col.size());
            transpose_into(col.data(), col_t.data(), patch, positions);
            gemm_accumulate(gn, col_t.data(), wn.grad_buffer().data(), g.f, positions, patch);
          }
          if (xn.requires_grad) {
            std::fill(col.begin(), col.end(), 0.0);
            gemm_accumulate(w_t.data(), gn, col.data(), patch, g.f, positions);
            col2im_add(col.data(), g, xn.grad_buffer().data() + n * in_size);
          }
        }
        if (self.inputs.size() > 2 && self.inputs[2]->requires_grad) {
          auto& gb = self.inputs[2]->grad_buffer();
          for (std::size_t n = 0; n < g.n; ++n) {
            const double* gn = self.grad.data() + n * out_size;
            for (std::size_t f = 0; f < g.f; ++f) {
              for (std::size_t p = 0; p < positions; ++p) gb[f] += gn[f * positions + p];
            }
          }
        }
      },
      "conv2d");
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  return make_result(
      a.shape(), std::move(out), {a},
      [](const detail::Node& self) {
        auto& in = *self.inputs[0];
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (in.value[i] > 0.0) g[i] += self.grad[i];
        }
      },
      "relu");
}

Tensor maxpool2d(const Tensor& a) {
  if (a.rank() < 2) throw DimensionError("maxpool2d: need at least 2 axes, got " + shape_str(a.shape()));
  const std::size_t h = a.dim(a.rank() - 2), w = a.dim(a.rank() - 1);
  if (h % 2 != 0 || w % 2 != 0) {
    throw DimensionError("maxpool2d: spatial dims must be even, got " + shape_str(a.shape()));
  }
  const std::size_t planes = a.numel() / (h * w);
  const std::size_t ho = h / 2, wo = w / 2;
  Shape out_shape = a.shape();
  out_shape[out_shape.size() - 2] = ho;
  out_shape[out_shape.size() - 1] = wo;
  std::vector<double> out(planes * ho * wo);
  auto winner = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t pl = 0; pl < planes; ++pl) {
    const std::size_t base = pl * h * w;
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) {
        const std::size_t candidates[4] = {base + (2 * i) * w + 2 * j, base + (2 * i) * w + 2 * j + 1,
                                           base + (2 * i + 1) * w + 2 * j,
                                           base + (2 * i + 1) * w + 2 * j + 1};
        std::size_t best = candidates[0];
        for (std::size_t c = 1; c < 4; ++c) {
          if (a[candidates[c]] > a[best]) best = candidates[c];
        }
        const std::size_t o = (pl * ho + i) * wo + j;
        out[o] = a[best];
        (*winner)[o] = best;
      }
    }
  }
  return make_result(
      std::move(out_shape), std::move(out), {a},
      [winner](const detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t o = 0; o < self.grad.size(); ++o) g[(*winner)[o]] += self.grad[o];
      },
      "maxpool2d");
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (w.rank() != 2 || x.numel() != w.dim(1)) {
    throw DimensionError("dense: input " + shape_str(x.shape()) + " does not match weight " +
                         shape_str(w.shape()));
  }
  const std::size_t out_n = w.dim(0), in_n = w.dim(1);
  if (bias.defined() && bias.numel() != out_n) {
    throw DimensionError("dense: bias " + shape_str(bias.shape()) + " does not match weight " +
                         shape_str(w.shape()));
  }
  std::vector<double> out(out_n);
  const double* wd = w.data().data();
  for (std::size_t o = 0; o < out_n; ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < in_n; ++i) s += wd[o * in_n + i] * x[i];
    out[o] = bias.defined() ? s + bias[o] : s;
  }
  std::vector<Tensor> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(
      {out_n}, std::move(out), std::move(inputs),
      [out_n, in_n](const detail::Node& self) {
        auto& xn = *self.inputs[0];
        auto& wn = *self.inputs[1];
        if (wn.requires_grad) {
          auto& gw = wn.grad_buffer();
          for (std::size_t o = 0; o < out_n; ++o) {
            const double go = self.grad[o];
            for (std::size_t i = 0; i < in_n; ++i) gw[o * in_n + i] += go * xn.value[i];
          }
        }
        if (xn.requires_grad) {
          auto& gx = xn.grad_buffer();
          for (std::size_t o = 0; o < out_n; ++o) {
            const double go = self.grad[o];
            for (std::size_t i = 0; i < in_n; ++i) gx[i] += wn.value[o * in_n + i] * go;
          }
        }
        if (self.inputs.size() > 2) accumulate(*self.inputs[2], self.grad);
      },
      "dense");
}

Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label) {
  const std::size_t n = logits.numel();
  if (label >= n) {
    throw ContractError("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                        std::to_string(n) + " logits");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : logits.data()) peak = std::max(peak, v);
  auto probs = std::make_shared<std::vector<double>>(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (*probs)[i] = std::exp(logits[i] - peak);
    z += (*probs)[i];
  }
  for (auto& p : *probs) p /= z;
  const double loss = std::log(z) + peak - logits[label];
  return make_result(
      {1}, {loss}, {logits},
      [probs, label](const detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] += self.grad[0] * ((*probs)[i] - (i == label ? 1.0 : 0.0));
        }
      },
      "softmax_cross_entropy");
}

Tensor grad_scale(const Tensor& a, double factor) {
  return make_result(
      a.shape(), a.to_vector(), {a},
      [factor](const detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
      },
      "grad_scale");
}

std::size_t argmax(const Tensor& a) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < a.numel(); ++i) {
    if (a[i] > a[best]) best = i;
  }
  return best;
}

}  // namespace hsnn::ops
