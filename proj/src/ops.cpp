#include "legalnlp/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace legalnlp {

namespace {

using detail::Node;

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

// Splits a shape around `axis` into (outer, extent, inner) strides.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

bool wants_grad(const Node& self, std::size_t input) {
  return self.inputs[input]->requires_grad;
}

std::vector<double>& grad_of(Node& self, std::size_t input) {
  return self.inputs[input]->grad;
}

const std::vector<double>& data_of(const Node& self, std::size_t input) {
  return self.inputs[input]->data;
}

// Shared implementation of an elementwise unary op given f and f'.
template <typename F, typename DF>
Tensor unary(const Tensor& x, const char* op, F f, DF df) {
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return Tensor::make_result(x.shape(), std::move(out), op, {x}, [df](Node& self) {
    if (!wants_grad(self, 0)) return;
    const auto& xin = data_of(self, 0);
    auto& gx = grad_of(self, 0);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * df(xin[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                         " · " + shape_str(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ad[i * k + p];
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bd[p * n + j];
    }
  }
  return Tensor::make_result({m, n}, std::move(out), "matmul", {a, b},
                             [m, k, n](Node& self) {
    const auto& av = data_of(self, 0);
    const auto& bv = data_of(self, 1);
    const auto& g = self.grad;
    if (wants_grad(self, 0)) {
      auto& ga = grad_of(self, 0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (wants_grad(self, 1)) {
      auto& gb = grad_of(self, 1);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
        }
    }
  });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "bmm");
  require_rank(b, 3, "bmm");
  const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  if (b.dim(0) != batch || b.dim(1) != k) {
    throw DimensionError("bmm: incompatible shapes " + shape_str(a.shape()) + " · " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(batch * m * n, 0.0);
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t s = 0; s < batch; ++s) {
    const double* as = ad.data() + s * m * k;
    const double* bs = bd.data() + s * k * n;
    double* os = out.data() + s * m * n;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = as[i * k + p];
        for (std::size_t j = 0; j < n; ++j) os[i * n + j] += aip * bs[p * n + j];
      }
  }
  return Tensor::make_result({batch, m, n}, std::move(out), "bmm", {a, b},
                             [batch, m, k, n](Node& self) {
    const auto& av = data_of(self, 0);
    const auto& bv = data_of(self, 1);
    const auto& g = self.grad;
    const bool need_a = wants_grad(self, 0);
    const bool need_b = wants_grad(self, 1);
    for (std::size_t s = 0; s < batch; ++s) {
      const double* as = av.data() + s * m * k;
      const double* bs = bv.data() + s * k * n;
      const double* gs = g.data() + s * m * n;
      if (need_a) {
        double* ga = grad_of(self, 0).data() + s * m * k;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += gs[i * n + j] * bs[p * n + j];
            ga[i * k + p] += acc;
          }
      }
      if (need_b) {
        double* gb = grad_of(self, 1).data() + s * k * n;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = as[i * k + p];
            for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * gs[i * n + j];
          }
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                         shape_str(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return Tensor::make_result(std::move(shape), std::move(out), "reshape", {x}, [](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& gx = grad_of(self, 0);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const Shape& in_shape = x.shape();
  const std::size_t rank = in_shape.size();
  if (axes.size() != rank) {
    throw DimensionError("permute: " + std::to_string(axes.size()) + " axes for " +
                         shape_str(in_shape));
  }
  std::vector<bool> seen(rank, false);
  for (std::size_t a : axes) {
    if (a >= rank || seen[a]) throw DimensionError("permute: axes are not a permutation");
    seen[a] = true;
  }
  std::vector<std::size_t> in_stride(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_stride[i - 1] = in_stride[i] * in_shape[i];
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[axes[i]];

  const std::size_t n = x.numel();
  auto source = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < rank; ++i) src += idx[i] * in_stride[axes[i]];
    (*source)[flat] = src;
    for (std::size_t i = rank; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  std::vector<double> out(n);
  auto in = x.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = in[(*source)[i]];
  return Tensor::make_result(std::move(out_shape), std::move(out), "permute", {x},
                             [source](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& gx = grad_of(self, 0);
    for (std::size_t i = 0; i < source->size(); ++i) gx[(*source)[i]] += self.grad[i];
  });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  if (axis >= x.rank()) throw DimensionError("slice: axis out of range for " + shape_str(x.shape()));
  if (start + length > x.dim(axis) || length == 0) {
    throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) + ") outside axis of size " +
                         std::to_string(x.dim(axis)));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  std::vector<double> out(s.outer * length * s.inner);
  auto in = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t a = 0; a < length; ++a)
      for (std::size_t i = 0; i < s.inner; ++i)
        out[(o * length + a) * s.inner + i] = in[(o * s.extent + start + a) * s.inner + i];
  return Tensor::make_result(std::move(out_shape), std::move(out), "slice", {x},
                             [s, start, length](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& gx = grad_of(self, 0);
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t a = 0; a < length; ++a)
        for (std::size_t i = 0; i < s.inner; ++i)
          gx[(o * s.extent + start + a) * s.inner + i] +=
              self.grad[(o * length + a) * s.inner + i];
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_str(first));
  std::vector<std::size_t> extents;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    const Shape& sh = p.shape();
    bool ok = sh.size() == first.size();
    for (std::size_t i = 0; ok && i < sh.size(); ++i) ok = (i == axis) || sh[i] == first[i];
    if (!ok) {
      throw DimensionError("concat: " + shape_str(sh) + " incompatible with " +
                           shape_str(first) + " along axis " + std::to_string(axis));
    }
    extents.push_back(sh[axis]);
    total += sh[axis];
  }
  const AxisSplit s = split_at(first, axis);
  Shape out_shape = first;
  out_shape[axis] = total;
  std::vector<double> out(s.outer * total * s.inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto in = parts[p].data();
    const std::size_t e = extents[p];
    for (std::size_t o = 0; o < s.outer; ++o)
      std::copy_n(in.begin() + o * e * s.inner, e * s.inner,
                  out.begin() + (o * total + offset) * s.inner);
    offset += e;
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return Tensor::make_result(std::move(out_shape), std::move(out), "concat", std::move(inputs),
                             [s, extents, total](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < extents.size(); ++p) {
      const std::size_t e = extents[p];
      if (wants_grad(self, p)) {
        auto& g = grad_of(self, p);
        for (std::size_t o = 0; o < s.outer; ++o)
          for (std::size_t i = 0; i < e * s.inner; ++i)
            g[o * e * s.inner + i] += self.grad[(o * total + offset) * s.inner + i];
      }
      offset += e;
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return Tensor::make_result(a.shape(), std::move(out), "add", {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!wants_grad(self, k)) continue;
      auto& g = grad_of(self, k);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return Tensor::make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
    if (wants_grad(self, 0)) {
      auto& g = grad_of(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = grad_of(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return Tensor::make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
    const auto& av = data_of(self, 0);
    const auto& bv = data_of(self, 1);
    if (wants_grad(self, 0)) {
      auto& g = grad_of(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = grad_of(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * factor;
  return Tensor::make_result(x.shape(), std::move(out), "scale", {x}, [factor](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& g = grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank(bias, 1, "add_bias");
  if (x.rank() == 0 || x.shape().back() != bias.dim(0)) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) +
                         " does not match last axis of " + shape_str(x.shape()));
  }
  const std::size_t n = bias.dim(0);
  std::vector<double> out(x.numel());
  auto xd = x.data();
  auto bd = bias.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] + bd[i % n];
  return Tensor::make_result(x.shape(), std::move(out), "add_bias", {x, bias}, [n](Node& self) {
    if (wants_grad(self, 0)) {
      auto& g = grad_of(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = grad_of(self, 1);
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % n] += self.grad[i];
    }
  });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      x, "gelu", [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [inv_sqrt_2pi](double v) {
        const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
        return cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return Tensor::make_result({}, {total}, "sum", {x}, [](Node& self) {
    if (!wants_grad(self, 0)) return;
    for (double& g : grad_of(self, 0)) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor softmax(const Tensor& x, int axis) {
  const int rank = static_cast<int>(x.rank());
  const int resolved = axis < 0 ? axis + rank : axis;
  if (resolved < 0 || resolved >= rank) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " +
                         shape_str(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), static_cast<std::size_t>(resolved));
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < s.extent; ++a) peak = std::max(peak, in[base + a * s.inner]);
      if (std::isinf(peak) && peak < 0) {
        throw std::domain_error("softmax: every entry of a slice is -inf");
      }
      double z = 0.0;
      for (std::size_t a = 0; a < s.extent; ++a) {
        const double e = std::exp(in[base + a * s.inner] - peak);
        out[base + a * s.inner] = e;
        z += e;
      }
      for (std::size_t a = 0; a < s.extent; ++a) out[base + a * s.inner] /= z;
    }
  return Tensor::make_result(x.shape(), std::move(out), "softmax", {x}, [s](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& gx = grad_of(self, 0);
    const auto& y = self.data;
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.extent * s.inner + i;
        double dot = 0.0;
        for (std::size_t a = 0; a < s.extent; ++a) {
          const std::size_t k = base + a * s.inner;
          dot += self.grad[k] * y[k];
        }
        for (std::size_t a = 0; a < s.extent; ++a) {
          const std::size_t k = base + a * s.inner;
          gx[k] += y[k] * (self.grad[k] - dot);
        }
      }
  });
}

Tensor mask_keys(const Tensor& scores, std::span<const std::size_t> valid_len) {
  require_rank(scores, 4, "mask_keys");
  const std::size_t batch = scores.dim(0);
  const std::size_t keys = scores.dim(3);
  if (valid_len.size() != batch) {
    throw DimensionError("mask_keys: " + std::to_string(valid_len.size()) +
                         " lengths for batch of " + std::to_string(batch));
  }
  for (std::size_t len : valid_len) {
    if (len == 0 || len > keys) {
      throw DimensionError("mask_keys: valid length " + std::to_string(len) +
                           " outside [1, " + std::to_string(keys) + "]");
    }
  }
  const std::size_t per_example = scores.numel() / batch;
  std::vector<double> out(scores.data().begin(), scores.data().end());
  std::vector<std::size_t> lens(valid_len.begin(), valid_len.end());
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t r = 0; r < per_example / keys; ++r)
      for (std::size_t j = lens[b]; j < keys; ++j) out[b * per_example + r * keys + j] = neg_inf;
  return Tensor::make_result(scores.shape(), std::move(out), "mask_keys", {scores},
                             [lens, per_example, keys](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& g = grad_of(self, 0);
    for (std::size_t b = 0; b < lens.size(); ++b)
      for (std::size_t r = 0; r < per_example / keys; ++r)
        for (std::size_t j = 0; j < lens[b]; ++j) {
          const std::size_t k = b * per_example + r * keys + j;
          g[k] += self.grad[k];
        }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_rank(gamma, 1, "layer_norm");
  require_rank(beta, 1, "layer_norm");
  if (x.rank() == 0) throw DimensionError("layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gamma.dim(0) != d || beta.dim(0) != d) {
    throw DimensionError("layer_norm: gamma/beta " + shape_str(gamma.shape()) + "/" +
                         shape_str(beta.shape()) + " vs last axis of " + shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / d;
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(x.numel());
  auto in = x.data();
  auto gv = gamma.data();
  auto bv = beta.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * inv;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = gv[j] * h + bv[j];
    }
  }
  return Tensor::make_result(x.shape(), std::move(out), "layer_norm", {x, gamma, beta},
                             [xhat, rstd, rows, d](Node& self) {
    const auto& gamma_v = data_of(self, 1);
    const auto& g = self.grad;
    if (wants_grad(self, 0)) {
      auto& gx = grad_of(self, 0);
      for (std::size_t r = 0; r < rows; ++r) {
        double mean_g = 0.0, mean_gh = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double gh = g[r * d + j] * gamma_v[j];
          mean_g += gh;
          mean_gh += gh * (*xhat)[r * d + j];
        }
        mean_g /= static_cast<double>(d);
        mean_gh /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double gh = g[r * d + j] * gamma_v[j];
          gx[r * d + j] += (*rstd)[r] * (gh - mean_g - (*xhat)[r * d + j] * mean_gh);
        }
      }
    }
    if (wants_grad(self, 1)) {
      auto& gg = grad_of(self, 1);
      for (std::size_t k = 0; k < g.size(); ++k) gg[k % d] += g[k] * (*xhat)[k];
    }
    if (wants_grad(self, 2)) {
      auto& gb = grad_of(self, 2);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k % d] += g[k];
    }
  });
}

Tensor cross_entropy_mean(const Tensor& logits, std::span<const int> targets) {
  require_rank(logits, 2, "cross_entropy_mean");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (targets.size() != batch) {
    throw DimensionError("cross_entropy_mean: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(batch) + " rows");
  }
  std::size_t counted = 0;
  for (int t : targets) {
    if (t == kIgnoreIndex) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw std::out_of_range("cross_entropy_mean: target " + std::to_string(t) +
                              " outside [0, " + std::to_string(classes) + ")");
    }
    ++counted;
  }
  auto probs = std::make_shared<std::vector<double>>(logits.numel(), 0.0);
  auto in = logits.data();
  double total = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    if (targets[r] == kIgnoreIndex) continue;
    const double* row = in.data() + r * classes;
    const double peak = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - peak);
    const double log_z = peak + std::log(z);
    for (std::size_t c = 0; c < classes; ++c) (*probs)[r * classes + c] = std::exp(row[c] - log_z);
    total += log_z - row[targets[r]];
  }
  const double denom = counted ? static_cast<double>(counted) : 1.0;
  std::vector<int> tgt(targets.begin(), targets.end());
  return Tensor::make_result({}, {total / denom}, "cross_entropy_mean", {logits},
                             [probs, tgt, classes, denom](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& g = grad_of(self, 0);
    const double upstream = self.grad[0] / denom;
    for (std::size_t r = 0; r < tgt.size(); ++r) {
      if (tgt[r] == kIgnoreIndex) continue;
      for (std::size_t c = 0; c < classes; ++c) {
        const double onehot = static_cast<int>(c) == tgt[r] ? 1.0 : 0.0;
        g[r * classes + c] += upstream * ((*probs)[r * classes + c] - onehot);
      }
    }
  });
}

Tensor conv1d_valid(const Tensor& x, const Tensor& filters, const Tensor& bias) {
  require_rank(x, 2, "conv1d_valid");
  require_rank(filters, 3, "conv1d_valid");
  require_rank(bias, 1, "conv1d_valid");
  const std::size_t len = x.dim(0), channels = x.dim(1);
  const std::size_t n_filters = filters.dim(0), width = filters.dim(1);
  if (filters.dim(2) != channels || bias.dim(0) != n_filters) {
    throw DimensionError("conv1d_valid: input " + shape_str(x.shape()) + ", filters " +
                         shape_str(filters.shape()) + ", bias " + shape_str(bias.shape()));
  }
  if (width == 0 || width > len) {
    throw std::length_error("conv1d_valid: sequence of length " + std::to_string(len) +
                            " is shorter than filter width " + std::to_string(width));
  }
  const std::size_t out_len = len - width + 1;
  const std::size_t span = width * channels;
  std::vector<double> out(out_len * n_filters);
  auto xd = x.data();
  auto wd = filters.data();
  auto bd = bias.data();
  for (std::size_t t = 0; t < out_len; ++t) {
    // Window rows t..t+width-1 are contiguous in x.
    const double* window = xd.data() + t * channels;
    for (std::size_t f = 0; f < n_filters; ++f) {
      const double* w = wd.data() + f * span;
      double acc = bd[f];
      for (std::size_t i = 0; i < span; ++i) acc += window[i] * w[i];
      out[t * n_filters + f] = acc;
    }
  }
  return Tensor::make_result({out_len, n_filters}, std::move(out), "conv1d_valid",
                             {x, filters, bias},
                             [out_len, n_filters, span, channels](Node& self) {
    const auto& xv = data_of(self, 0);
    const auto& wv = data_of(self, 1);
    const auto& g = self.grad;
    const bool need_x = wants_grad(self, 0);
    const bool need_w = wants_grad(self, 1);
    const bool need_b = wants_grad(self, 2);
    for (std::size_t t = 0; t < out_len; ++t)
      for (std::size_t f = 0; f < n_filters; ++f) {
        const double go = g[t * n_filters + f];
        if (need_x) {
          double* gx = grad_of(self, 0).data() + t * channels;
          const double* w = wv.data() + f * span;
          for (std::size_t i = 0; i < span; ++i) gx[i] += go * w[i];
        }
        if (need_w) {
          double* gw = grad_of(self, 1).data() + f * span;
          const double* window = xv.data() + t * channels;
          for (std::size_t i = 0; i < span; ++i) gw[i] += go * window[i];
        }
        if (need_b) grad_of(self, 2)[f] += go;
      }
  });
}

Tensor max_over_time_masked(const Tensor& x, std::size_t valid_len) {
  require_rank(x, 2, "max_over_time_masked");
  const std::size_t len = x.dim(0), channels = x.dim(1);
  if (valid_len == 0 || valid_len > len) {
    throw std::out_of_range("max_over_time_masked: valid_len " + std::to_string(valid_len) +
                            " outside [1, " + std::to_string(len) + "]");
  }
  auto argmax = std::make_shared<std::vector<std::size_t>>(channels, 0);
  std::vector<double> out(channels);
  auto xd = x.data();
  for (std::size_t c = 0; c < channels; ++c) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < valid_len; ++t)
      if (xd[t * channels + c] > xd[best * channels + c]) best = t;
    (*argmax)[c] = best;
    out[c] = xd[best * channels + c];
  }
  return Tensor::make_result({channels}, std::move(out), "max_over_time_masked", {x},
                             [argmax, channels](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& g = grad_of(self, 0);
    for (std::size_t c = 0; c < channels; ++c) g[(*argmax)[c] * channels + c] += self.grad[c];
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids,
                        std::size_t rows, std::size_t cols) {
  require_rank(table, 2, "embedding_lookup");
  if (ids.size() != rows * cols) {
    throw DimensionError("embedding_lookup: " + std::to_string(ids.size()) + " ids for [" +
                         std::to_string(rows) + "x" + std::to_string(cols) + "]");
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  for (std::int32_t id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw std::out_of_range("embedding_lookup: id " + std::to_string(id) +
                              " outside [0, " + std::to_string(vocab) + ")");
    }
  }
  std::vector<double> out(ids.size() * d);
  auto td = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(td.begin() + static_cast<std::size_t>(ids[i]) * d, d, out.begin() + i * d);
  std::vector<std::int32_t> id_copy(ids.begin(), ids.end());
  return Tensor::make_result({rows, cols, d}, std::move(out), "embedding_lookup", {table},
                             [id_copy, d](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& g = grad_of(self, 0);
    for (std::size_t i = 0; i < id_copy.size(); ++i) {
      double* row = g.data() + static_cast<std::size_t>(id_copy[i]) * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += self.grad[i * d + j];
    }
  });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate " + std::to_string(rate) + " outside [0, 1)");
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto mask = std::make_shared<std::vector<double>>(x.numel());
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = uniform(rng) < rate ? 0.0 : keep_scale;
    out[i] = x.data()[i] * (*mask)[i];
  }
  return Tensor::make_result(x.shape(), std::move(out), "dropout", {x}, [mask](Node& self) {
    if (!wants_grad(self, 0)) return;
    auto& g = grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*mask)[i];
  });
}

}  // namespace legalnlp
