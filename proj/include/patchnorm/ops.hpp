#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "patchnorm/autograd.hpp"
#include "patchnorm/tensor.hpp"

namespace patchnorm {

// ---------------------------------------------------------------------------
// Channel statistics. Reductions accumulate sequentially in row-major order
// (one accumulator per channel, elements visited n-ascending then
// spatial-ascending) so results are reproducible bit for bit.
// ---------------------------------------------------------------------------

template <class S>
std::vector<S> channel_mean(const TensorT<S>& f) {
  if (!f.defined() || f.numel() == 0) throw DimensionError("channel_mean: empty tensor");
  const Shape& s = f.shape();
  const int64_t hw = s.spatial();
  auto v = f.values();
  std::vector<S> mean(static_cast<size_t>(s.c));
  const S count = static_cast<S>(s.n * hw);
  for (int64_t c = 0; c < s.c; ++c) {
    S acc = S(0);
    for (int64_t n = 0; n < s.n; ++n) {
      const S* p = v.data() + (n * s.c + c) * hw;
      for (int64_t i = 0; i < hw; ++i) acc += p[i];
    }
    mean[static_cast<size_t>(c)] = acc / count;
  }
  return mean;
}

// Biased standard deviation with eps inside the square root:
// sqrt(sum((x - mean)^2) / count + eps). Strictly positive for eps > 0.
template <class S>
std::vector<S> channel_std(const TensorT<S>& f, std::span<const S> mean, S eps) {
  if (!f.defined() || f.numel() == 0) throw DimensionError("channel_std: empty tensor");
  if (eps <= S(0)) throw ConfigError("channel_std: eps must be > 0");
  const Shape& s = f.shape();
  if (static_cast<int64_t>(mean.size()) != s.c)
    throw DimensionError("channel_std: mean length does not match channel count");
  const int64_t hw = s.spatial();
  auto v = f.values();
  std::vector<S> out(static_cast<size_t>(s.c));
  const S count = static_cast<S>(s.n * hw);
  for (int64_t c = 0; c < s.c; ++c) {
    const S m = mean[static_cast<size_t>(c)];
    S acc = S(0);
    for (int64_t n = 0; n < s.n; ++n) {
      const S* p = v.data() + (n * s.c + c) * hw;
      for (int64_t i = 0; i < hw; ++i) {
        const S d = p[i] - m;
        acc += d * d;
      }
    }
    out[static_cast<size_t>(c)] = std::sqrt(acc / count + eps);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise and reduction ops.
// ---------------------------------------------------------------------------

template <class S>
TensorT<S> relu(TapeT<S>* tape, const TensorT<S>& x) {
  const bool rec = tape && x.requires_grad();
  TensorT<S> y(x.shape(), rec);
  auto xv = x.values();
  auto yv = y.values();
  for (size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] > S(0) ? xv[i] : S(0);
  if (rec) {
    tape->record([x, y]() mutable {
      auto g = y.grad();
      auto xv2 = x.values();
      auto gx = x.grad();
      for (size_t i = 0; i < gx.size(); ++i)
        if (xv2[i] > S(0)) gx[i] += g[i];
    });
  }
  return y;
}

template <class S>
TensorT<S> add(TapeT<S>* tape, const TensorT<S>& a, const TensorT<S>& b) {
  if (!(a.shape() == b.shape()))
    throw DimensionError("add: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  const bool rec = tape && (a.requires_grad() || b.requires_grad());
  TensorT<S> y(a.shape(), rec);
  auto av = a.values();
  auto bv = b.values();
  auto yv = y.values();
  for (size_t i = 0; i < yv.size(); ++i) yv[i] = av[i] + bv[i];
  if (rec) {
    tape->record([a, b, y]() mutable {
      auto g = y.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (size_t i = 0; i < gb.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return y;
}

template <class S>
TensorT<S> mul(TapeT<S>* tape, const TensorT<S>& a, const TensorT<S>& b) {
  if (!(a.shape() == b.shape()))
    throw DimensionError("mul: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  const bool rec = tape && (a.requires_grad() || b.requires_grad());
  TensorT<S> y(a.shape(), rec);
  auto av = a.values();
  auto bv = b.values();
  auto yv = y.values();
  for (size_t i = 0; i < yv.size(); ++i) yv[i] = av[i] * bv[i];
  if (rec) {
    tape->record([a, b, y]() mutable {
      auto g = y.grad();
      auto av2 = a.values();
      auto bv2 = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv2[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av2[i];
      }
    });
  }
  return y;
}

template <class S>
TensorT<S> sum_all(TapeT<S>* tape, const TensorT<S>& x) {
  if (!x.defined() || x.numel() == 0) throw DimensionError("sum_all: empty tensor");
  const bool rec = tape && x.requires_grad();
  TensorT<S> y(Shape{1, 1, 1, 1}, rec);
  S acc = S(0);
  for (S v : x.values()) acc += v;
  y.values()[0] = acc;
  if (rec) {
    tape->record([x, y]() mutable {
      const S g = y.grad()[0];
      auto gx = x.grad();
      for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
  }
  return y;
}

// ---------------------------------------------------------------------------
// CNN building blocks.
// ---------------------------------------------------------------------------

// 3x3 convolution, stride 1, zero padding 1 (spatial extents preserved).
// weight: Cout x Cin x 3 x 3, bias: 1 x Cout x 1 x 1.
template <class S>
TensorT<S> conv3x3(TapeT<S>* tape, const TensorT<S>& x, const TensorT<S>& weight,
                   const TensorT<S>& bias) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  const Shape& bs = bias.shape();
  if (ws.h != 3 || ws.w != 3) throw DimensionError("conv3x3: kernel must be 3x3, got " + ws.str());
  if (ws.c != xs.c)
    throw DimensionError("conv3x3: input channels " + std::to_string(xs.c) +
                         " do not match kernel " + std::to_string(ws.c));
  if (!(bs == Shape{1, ws.n, 1, 1}))
    throw DimensionError("conv3x3: bias must be 1x" + std::to_string(ws.n) + "x1x1, got " +
                         bs.str());
  const int64_t N = xs.n, Cin = xs.c, H = xs.h, W = xs.w, Cout = ws.n;
  const bool rec = tape && (x.requires_grad() || weight.requires_grad() || bias.requires_grad());
  TensorT<S> y(Shape{N, Cout, H, W}, rec);

  auto xv = x.values();
  auto wv = weight.values();
  auto bv = bias.values();
  auto yv = y.values();

  for (int64_t n = 0; n < N; ++n)
    for (int64_t co = 0; co < Cout; ++co) {
      S* out = yv.data() + (n * Cout + co) * H * W;
      const S b = bv[static_cast<size_t>(co)];
      for (int64_t i = 0; i < H * W; ++i) out[i] = b;
      for (int64_t ci = 0; ci < Cin; ++ci) {
        const S* in = xv.data() + (n * Cin + ci) * H * W;
        const S* k = wv.data() + (co * Cin + ci) * 9;
        for (int64_t kh = 0; kh < 3; ++kh)
          for (int64_t kw = 0; kw < 3; ++kw) {
            const S kval = k[kh * 3 + kw];
            const int64_t oh0 = std::max<int64_t>(0, 1 - kh);
            const int64_t oh1 = std::min<int64_t>(H, H + 1 - kh);
            const int64_t ow0 = std::max<int64_t>(0, 1 - kw);
            const int64_t ow1 = std::min<int64_t>(W, W + 1 - kw);
            for (int64_t oh = oh0; oh < oh1; ++oh) {
              S* orow = out + oh * W;
              const S* irow = in + (oh + kh - 1) * W + (kw - 1);
              for (int64_t ow = ow0; ow < ow1; ++ow) orow[ow] += kval * irow[ow];
            }
          }
      }
    }

  if (rec) {
    tape->record([x, weight, bias, y]() mutable {
      const Shape& xs2 = x.shape();
      const int64_t N2 = xs2.n, Cin2 = xs2.c, H2 = xs2.h, W2 = xs2.w;
      const int64_t Cout2 = weight.shape().n;
      auto gy = y.grad();
      auto xv2 = x.values();
      auto wv2 = weight.values();
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (int64_t n = 0; n < N2; ++n)
          for (int64_t co = 0; co < Cout2; ++co) {
            const S* g = gy.data() + (n * Cout2 + co) * H2 * W2;
            S acc = S(0);
            for (int64_t i = 0; i < H2 * W2; ++i) acc += g[i];
            gb[static_cast<size_t>(co)] += acc;
          }
      }
      if (weight.requires_grad()) {
        auto gw = weight.grad();
        for (int64_t n = 0; n < N2; ++n)
          for (int64_t co = 0; co < Cout2; ++co) {
            const S* g = gy.data() + (n * Cout2 + co) * H2 * W2;
            for (int64_t ci = 0; ci < Cin2; ++ci) {
              const S* in = xv2.data() + (n * Cin2 + ci) * H2 * W2;
              S* gk = gw.data() + (co * Cin2 + ci) * 9;
              for (int64_t kh = 0; kh < 3; ++kh)
                for (int64_t kw = 0; kw < 3; ++kw) {
                  const int64_t oh0 = std::max<int64_t>(0, 1 - kh);
                  const int64_t oh1 = std::min<int64_t>(H2, H2 + 1 - kh);
                  const int64_t ow0 = std::max<int64_t>(0, 1 - kw);
                  const int64_t ow1 = std::min<int64_t>(W2, W2 + 1 - kw);
                  S acc = S(0);
                  for (int64_t oh = oh0; oh < oh1; ++oh) {
                    const S* grow = g + oh * W2;
                    const S* irow = in + (oh + kh - 1) * W2 + (kw - 1);
                    for (int64_t ow = ow0; ow < ow1; ++ow) acc += grow[ow] * irow[ow];
                  }
                  gk[kh * 3 + kw] += acc;
                }
            }
          }
      }
      if (x.requires_grad()) {
        auto gx = x.grad();
        for (int64_t n = 0; n < N2; ++n)
          for (int64_t co = 0; co < Cout2; ++co) {
            const S* g = gy.data() + (n * Cout2 + co) * H2 * W2;
            for (int64_t ci = 0; ci < Cin2; ++ci) {
              S* gxp = gx.data() + (n * Cin2 + ci) * H2 * W2;
              const S* k = wv2.data() + (co * Cin2 + ci) * 9;
              for (int64_t kh = 0; kh < 3; ++kh)
                for (int64_t kw = 0; kw < 3; ++kw) {
                  const S kval = k[kh * 3 + kw];
                  const int64_t oh0 = std::max<int64_t>(0, 1 - kh);
                  const int64_t oh1 = std::min<int64_t>(H2, H2 + 1 - kh);
                  const int64_t ow0 = std::max<int64_t>(0, 1 - kw);
                  const int64_t ow1 = std::min<int64_t>(W2, W2 + 1 - kw);
                  for (int64_t oh = oh0; oh < oh1; ++oh) {
                    const S* grow = g + oh * W2;
                    S* gxrow = gxp + (oh + kh - 1) * W2 + (kw - 1);
                    for (int64_t ow = ow0; ow < ow1; ++ow) gxrow[ow] += kval * grow[ow];
                  }
                }
            }
          }
      }
    });
  }
  return y;
}

// 2x2 max pooling with stride 2. Requires even spatial extents. Ties resolve
// to the first maximum in scan order so backward is deterministic.
template <class S>
TensorT<S> maxpool2x2(TapeT<S>* tape, const TensorT<S>& x) {
  const Shape& xs = x.shape();
  if (xs.h % 2 != 0 || xs.w % 2 != 0)
    throw DimensionError("maxpool2x2: spatial extents must be even, got " + xs.str());
  const int64_t N = xs.n, C = xs.c, H = xs.h, W = xs.w, Ho = H / 2, Wo = W / 2;
  const bool rec = tape && x.requires_grad();
  TensorT<S> y(Shape{N, C, Ho, Wo}, rec);
  auto xv = x.values();
  auto yv = y.values();
  std::vector<int64_t> argmax(rec ? static_cast<size_t>(y.numel()) : 0);

  for (int64_t nc = 0; nc < N * C; ++nc) {
    const S* in = xv.data() + nc * H * W;
    S* out = yv.data() + nc * Ho * Wo;
    for (int64_t oh = 0; oh < Ho; ++oh)
      for (int64_t ow = 0; ow < Wo; ++ow) {
        int64_t best = (2 * oh) * W + 2 * ow;
        S bv = in[best];
        const int64_t cand[3] = {(2 * oh) * W + 2 * ow + 1, (2 * oh + 1) * W + 2 * ow,
                                 (2 * oh + 1) * W + 2 * ow + 1};
        for (int64_t idx : cand)
          if (in[idx] > bv) {
            bv = in[idx];
            best = idx;
          }
        out[oh * Wo + ow] = bv;
        if (rec) argmax[static_cast<size_t>(nc * Ho * Wo + oh * Wo + ow)] = nc * H * W + best;
      }
  }

  if (rec) {
    tape->record([x, y, argmax = std::move(argmax)]() mutable {
      auto g = y.grad();
      auto gx = x.grad();
      for (size_t i = 0; i < argmax.size(); ++i) gx[static_cast<size_t>(argmax[i])] += g[i];
    });
  }
  return y;
}

// N x C x H x W -> N x (C*H*W) x 1 x 1.
template <class S>
TensorT<S> flatten(TapeT<S>* tape, const TensorT<S>& x) {
  const Shape& xs = x.shape();
  const bool rec = tape && x.requires_grad();
  TensorT<S> y(Shape{xs.n, xs.c * xs.h * xs.w, 1, 1}, rec);
  auto xv = x.values();
  auto yv = y.values();
  std::copy(xv.begin(), xv.end(), yv.begin());
  if (rec) {
    tape->record([x, y]() mutable {
      auto g = y.grad();
      auto gx = x.grad();
      for (size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
    });
  }
  return y;
}

// Fully connected layer over N x Cin x 1 x 1 inputs.
// weight: Cout x Cin x 1 x 1, bias: 1 x Cout x 1 x 1.
template <class S>
TensorT<S> dense(TapeT<S>* tape, const TensorT<S>& x, const TensorT<S>& weight,
                 const TensorT<S>& bias) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (xs.h != 1 || xs.w != 1)
    throw DimensionError("dense: input must be Nx" + std::to_string(xs.c) + "x1x1, got " +
                         xs.str());
  if (ws.c != xs.c || ws.h != 1 || ws.w != 1)
    throw DimensionError("dense: weight " + ws.str() + " incompatible with input " + xs.str());
  if (!(bias.shape() == Shape{1, ws.n, 1, 1}))
    throw DimensionError("dense: bias shape mismatch " + bias.shape().str());
  const int64_t N = xs.n, Cin = xs.c, Cout = ws.n;
  const bool rec = tape && (x.requires_grad() || weight.requires_grad() || bias.requires_grad());
  TensorT<S> y(Shape{N, Cout, 1, 1}, rec);
  auto xv = x.values();
  auto wv = weight.values();
  auto bv = bias.values();
  auto yv = y.values();
  for (int64_t n = 0; n < N; ++n)
    for (int64_t o = 0; o < Cout; ++o) {
      S acc = bv[static_cast<size_t>(o)];
      const S* in = xv.data() + n * Cin;
      const S* wr = wv.data() + o * Cin;
      for (int64_t i = 0; i < Cin; ++i) acc += wr[i] * in[i];
      yv[static_cast<size_t>(n * Cout + o)] = acc;
    }
  if (rec) {
    tape->record([x, weight, bias, y]() mutable {
      const int64_t N2 = x.shape().n, Cin2 = x.shape().c, Cout2 = weight.shape().n;
      auto g = y.grad();
      auto xv2 = x.values();
      auto wv2 = weight.values();
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (int64_t n = 0; n < N2; ++n)
          for (int64_t o = 0; o < Cout2; ++o) gb[static_cast<size_t>(o)] += g[static_cast<size_t>(n * Cout2 + o)];
      }
      if (weight.requires_grad()) {
        auto gw = weight.grad();
        for (int64_t n = 0; n < N2; ++n)
          for (int64_t o = 0; o < Cout2; ++o) {
            const S go = g[static_cast<size_t>(n * Cout2 + o)];
            S* gwr = gw.data() + o * Cin2;
            const S* in = xv2.data() + n * Cin2;
            for (int64_t i = 0; i < Cin2; ++i) gwr[i] += go * in[i];
          }
      }
      if (x.requires_grad()) {
        auto gx = x.grad();
        for (int64_t n = 0; n < N2; ++n)
          for (int64_t o = 0; o < Cout2; ++o) {
            const S go = g[static_cast<size_t>(n * Cout2 + o)];
            const S* wr = wv2.data() + o * Cin2;
            S* gxr = gx.data() + n * Cin2;
            for (int64_t i = 0; i < Cin2; ++i) gxr[i] += go * wr[i];
          }
      }
    });
  }
  return y;
}

// Mean cross-entropy over the batch from raw logits (N x K x 1 x 1),
// computed through a stable log-sum-exp.
template <class S>
TensorT<S> softmax_cross_entropy(TapeT<S>* tape, const TensorT<S>& logits,
                                 std::span<const int> labels) {
  const Shape& ls = logits.shape();
  if (ls.h != 1 || ls.w != 1 || ls.n == 0)
    throw DimensionError("softmax_cross_entropy: logits must be NxKx1x1, got " + ls.str());
  if (static_cast<int64_t>(labels.size()) != ls.n)
    throw DimensionError("softmax_cross_entropy: label count does not match batch");
  const int64_t N = ls.n, K = ls.c;
  for (int label : labels)
    if (label < 0 || label >= K) throw UsageError("softmax_cross_entropy: label out of range");

  const bool rec = tape && logits.requires_grad();
  TensorT<S> loss(Shape{1, 1, 1, 1}, rec);
  auto lv = logits.values();
  std::vector<S> probs(static_cast<size_t>(N * K));
  S total = S(0);
  for (int64_t n = 0; n < N; ++n) {
    const S* z = lv.data() + n * K;
    S m = z[0];
    for (int64_t k = 1; k < K; ++k) m = std::max(m, z[k]);
    S sum = S(0);
    for (int64_t k = 0; k < K; ++k) {
      const S e = std::exp(z[k] - m);
      probs[static_cast<size_t>(n * K + k)] = e;
      sum += e;
    }
    for (int64_t k = 0; k < K; ++k) probs[static_cast<size_t>(n * K + k)] /= sum;
    const S lse = m + std::log(sum);
    total += lse - z[labels[static_cast<size_t>(n)]];
  }
  loss.values()[0] = total / static_cast<S>(N);

  if (rec) {
    std::vector<int> labels_copy(labels.begin(), labels.end());
    tape->record([logits, loss, probs = std::move(probs),
                  labels = std::move(labels_copy)]() mutable {
      const int64_t N2 = logits.shape().n, K2 = logits.shape().c;
      const S g = loss.grad()[0] / static_cast<S>(N2);
      auto gl = logits.grad();
      for (int64_t n = 0; n < N2; ++n)
        for (int64_t k = 0; k < K2; ++k) {
          S p = probs[static_cast<size_t>(n * K2 + k)];
          if (k == labels[static_cast<size_t>(n)]) p -= S(1);
          gl[static_cast<size_t>(n * K2 + k)] += g * p;
        }
    });
  }
  return loss;
}

}  // namespace patchnorm
