// src/tensor/ops.cc

// Copyright 2026  The casc-tar Authors

// See the top-level LICENSE file for the full license text.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "casc/tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "casc/base/errors.h"
#include "casc/simd/kernels.h"

CASC_BEGIN_NAMESPACE

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Tape &TapeOf(const DiffArray &a) {
  if (!a.valid()) throw UsageError("operation on an empty DiffArray");
  return *a.tape();
}

Tape &TapeOf(const DiffArray &a, const DiffArray &b) {
  Tape &t = TapeOf(a);
  if (b.tape() != &t) throw UsageError("operands live on different tapes");
  return t;
}

void RequireSameShape(const DiffArray &a, const DiffArray &b, const char *op) {
  if (a.shape() != b.shape()) {
    throw UsageError(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) +
                     " vs " + ShapeString(b.shape()));
  }
}

void RequireMatrix(const DiffArray &a, const char *op) {
  if (a.value().rank() > 2) {
    throw UsageError(std::string(op) + ": expected a matrix, got " +
                     ShapeString(a.shape()));
  }
}

Shape MatShape(int r, int c) { return Shape{r, c}; }

template <typename F>
Array MapValues(const Array &x, F f) {
  Array out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<Real>(f(x[i]));
  return out;
}

double SigmoidD(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

DiffArray Add(const DiffArray &a, const DiffArray &b) {
  Tape &t = TapeOf(a, b);
  RequireSameShape(a, b, "Add");
  Array out = a.value();
  simd::Axpy(Real(1), b.value().data(), out.data(), out.size());
  return t.Record(std::move(out), {a, b}, [a, b](Tape &tp, const Array &, const Array &g) {
    tp.AccumulateGrad(a, g);
    tp.AccumulateGrad(b, g);
  });
}

DiffArray Sub(const DiffArray &a, const DiffArray &b) {
  Tape &t = TapeOf(a, b);
  RequireSameShape(a, b, "Sub");
  Array out = a.value();
  simd::Axpy(Real(-1), b.value().data(), out.data(), out.size());
  return t.Record(std::move(out), {a, b}, [a, b](Tape &tp, const Array &, const Array &g) {
    tp.AccumulateGrad(a, g);
    if (b.requires_grad()) {
      simd::Axpy(Real(-1), g.data(), tp.GradBuffer(b).data(), g.size());
    }
  });
}

DiffArray Mul(const DiffArray &a, const DiffArray &b) {
  Tape &t = TapeOf(a, b);
  RequireSameShape(a, b, "Mul");
  const Array &av = a.value();
  const Array &bv = b.value();
  Array out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return t.Record(std::move(out), {a, b}, [a, b](Tape &tp, const Array &, const Array &g) {
    const Array &av = a.value();
    const Array &bv = b.value();
    if (a.requires_grad()) {
      Array &ga = tp.GradBuffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (b.requires_grad()) {
      Array &gb = tp.GradBuffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

DiffArray Scale(const DiffArray &a, double s) {
  Tape &t = TapeOf(a);
  const Real rs = static_cast<Real>(s);
  Array out = MapValues(a.value(), [rs](Real v) { return v * rs; });
  return t.Record(std::move(out), {a}, [a, rs](Tape &tp, const Array &, const Array &g) {
    if (a.requires_grad()) simd::Axpy(rs, g.data(), tp.GradBuffer(a).data(), g.size());
  });
}

DiffArray AddBias(const DiffArray &x, const DiffArray &bias) {
  Tape &t = TapeOf(x, bias);
  RequireMatrix(x, "AddBias");
  const int r = x.rows(), c = x.cols();
  if (static_cast<int>(bias.size()) != c) {
    throw UsageError("AddBias: bias of " + std::to_string(bias.size()) +
                     " values for " + std::to_string(c) + " columns");
  }
  Array out = x.value();
  const Real *bv = bias.value().data();
  for (int i = 0; i < r; ++i) simd::Axpy(Real(1), bv, out.row(i), c);
  return t.Record(std::move(out), {x, bias},
                  [x, bias, r, c](Tape &tp, const Array &, const Array &g) {
                    tp.AccumulateGrad(x, g);
                    if (bias.requires_grad()) {
                      Array &gb = tp.GradBuffer(bias);
                      for (int i = 0; i < r; ++i) {
                        simd::Axpy(Real(1), g.data() + static_cast<std::size_t>(i) * c,
                                   gb.data(), c);
                      }
                    }
                  });
}

DiffArray MatMul(const DiffArray &a, const DiffArray &b, bool transpose_b) {
  Tape &t = TapeOf(a, b);
  RequireMatrix(a, "MatMul");
  RequireMatrix(b, "MatMul");
  const int m = a.rows(), k = a.cols();
  const int bk = transpose_b ? b.cols() : b.rows();
  const int n = transpose_b ? b.rows() : b.cols();
  if (bk != k) {
    throw UsageError("MatMul: inner dimensions " + ShapeString(a.shape()) + " * " +
                     ShapeString(b.shape()) + (transpose_b ? "^T" : ""));
  }
  const Array &av = a.value();
  const Array &bv = b.value();
  Array out(MatShape(m, n), Real(0));
  if (transpose_b) {
    for (int i = 0; i < m; ++i) {
      Real *yi = out.row(i);
      for (int j = 0; j < n; ++j) yi[j] = simd::Dot(av.row(i), bv.row(j), k);
    }
  } else {
    for (int i = 0; i < m; ++i) simd::VecMat(av.row(i), k, bv.data(), n, out.row(i), n);
  }
  return t.Record(
      std::move(out), {a, b},
      [a, b, m, k, n, transpose_b](Tape &tp, const Array &, const Array &g) {
        const Array &av = a.value();
        const Array &bv = b.value();
        if (a.requires_grad()) {
          Array &ga = tp.GradBuffer(a);
          for (int i = 0; i < m; ++i) {
            const Real *gi = g.data() + static_cast<std::size_t>(i) * n;
            if (transpose_b) {
              // dA_i += g_i * B
              simd::VecMat(gi, n, bv.data(), k, ga.row(i), k);
            } else {
              // dA_i[kk] += g_i . B_kk
              Real *gai = ga.row(i);
              for (int kk = 0; kk < k; ++kk) gai[kk] += simd::Dot(gi, bv.row(kk), n);
            }
          }
        }
        if (b.requires_grad()) {
          Array &gb = tp.GradBuffer(b);
          for (int i = 0; i < m; ++i) {
            const Real *gi = g.data() + static_cast<std::size_t>(i) * n;
            const Real *ai = av.row(i);
            if (transpose_b) {
              // dB_j += g[i, j] * A_i
              for (int j = 0; j < n; ++j) {
                if (gi[j] != 0) simd::Axpy(gi[j], ai, gb.row(j), k);
              }
            } else {
              // dB_kk += A[i, kk] * g_i
              for (int kk = 0; kk < k; ++kk) {
                if (ai[kk] != 0) simd::Axpy(ai[kk], gi, gb.row(kk), n);
              }
            }
          }
        }
      });
}

DiffArray Linear(const DiffArray &x, const DiffArray &w, const DiffArray &bias) {
  return AddBias(MatMul(x, w), bias);
}

DiffArray Tanh(const DiffArray &x) {
  Tape &t = TapeOf(x);
  Array out = MapValues(x.value(), [](Real v) { return std::tanh(v); });
  return t.Record(std::move(out), {x}, [x](Tape &tp, const Array &y, const Array &g) {
    Array &gx = tp.GradBuffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1 - y[i] * y[i]);
  });
}

DiffArray Sigmoid(const DiffArray &x) {
  Tape &t = TapeOf(x);
  Array out = MapValues(x.value(), [](Real v) { return SigmoidD(v); });
  return t.Record(std::move(out), {x}, [x](Tape &tp, const Array &y, const Array &g) {
    Array &gx = tp.GradBuffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1 - y[i]);
  });
}

DiffArray Swish(const DiffArray &x) {
  Tape &t = TapeOf(x);
  Array out = MapValues(x.value(), [](Real v) { return v * SigmoidD(v); });
  return t.Record(std::move(out), {x}, [x](Tape &tp, const Array &, const Array &g) {
    const Array &xv = x.value();
    Array &gx = tp.GradBuffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = SigmoidD(xv[i]);
      gx[i] += static_cast<Real>(g[i] * (s * (1.0 + xv[i] * (1.0 - s))));
    }
  });
}

DiffArray LogSoftmaxRows(const DiffArray &x, double temperature) {
  if (!(temperature > 0)) throw UsageError("LogSoftmaxRows: temperature must be > 0");
  Tape &t = TapeOf(x);
  RequireMatrix(x, "LogSoftmaxRows");
  const int r = x.rows(), c = x.cols();
  const Array &xv = x.value();
  Array out(xv.shape());
  for (int i = 0; i < r; ++i) {
    const Real *xi = xv.row(i);
    double mx = kNegInf;
    for (int j = 0; j < c; ++j) mx = std::max(mx, xi[j] / temperature);
    double sum = 0;
    for (int j = 0; j < c; ++j) sum += std::exp(xi[j] / temperature - mx);
    const double lse = mx + std::log(sum);
    Real *oi = out.row(i);
    for (int j = 0; j < c; ++j) oi[j] = static_cast<Real>(xi[j] / temperature - lse);
  }
  return t.Record(std::move(out), {x},
                  [x, r, c, temperature](Tape &tp, const Array &y, const Array &g) {
                    Array &gx = tp.GradBuffer(x);
                    for (int i = 0; i < r; ++i) {
                      const Real *yi = y.row(i);
                      const Real *gi = g.data() + static_cast<std::size_t>(i) * c;
                      double gsum = 0;
                      for (int j = 0; j < c; ++j) gsum += gi[j];
                      Real *gxi = gx.row(i);
                      for (int j = 0; j < c; ++j) {
                        gxi[j] += static_cast<Real>(
                            (gi[j] - std::exp(static_cast<double>(yi[j])) * gsum) /
                            temperature);
                      }
                    }
                  });
}

DiffArray SoftmaxRows(const DiffArray &x, double temperature, std::span<const uint8_t> mask) {
  if (!(temperature > 0)) throw UsageError("SoftmaxRows: temperature must be > 0");
  Tape &t = TapeOf(x);
  RequireMatrix(x, "SoftmaxRows");
  const int r = x.rows(), c = x.cols();
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(r) * c) {
    throw UsageError("SoftmaxRows: mask size does not match input");
  }
  const Array &xv = x.value();
  Array out(xv.shape(), Real(0));
  for (int i = 0; i < r; ++i) {
    const Real *xi = xv.row(i);
    const uint8_t *mi = mask.empty() ? nullptr : mask.data() + static_cast<std::size_t>(i) * c;
    double mx = kNegInf;
    for (int j = 0; j < c; ++j) {
      if (!mi || mi[j]) mx = std::max(mx, xi[j] / temperature);
    }
    if (mx == kNegInf) continue;  // fully masked row stays zero
    double sum = 0;
    for (int j = 0; j < c; ++j) {
      if (!mi || mi[j]) sum += std::exp(xi[j] / temperature - mx);
    }
    Real *oi = out.row(i);
    for (int j = 0; j < c; ++j) {
      if (!mi || mi[j]) oi[j] = static_cast<Real>(std::exp(xi[j] / temperature - mx) / sum);
    }
  }
  return t.Record(std::move(out), {x},
                  [x, r, c, temperature](Tape &tp, const Array &y, const Array &g) {
                    Array &gx = tp.GradBuffer(x);
                    for (int i = 0; i < r; ++i) {
                      const Real *yi = y.row(i);
                      const Real *gi = g.data() + static_cast<std::size_t>(i) * c;
                      double dot = 0;
                      for (int j = 0; j < c; ++j) dot += static_cast<double>(yi[j]) * gi[j];
                      Real *gxi = gx.row(i);
                      for (int j = 0; j < c; ++j) {
                        gxi[j] += static_cast<Real>(yi[j] * (gi[j] - dot) / temperature);
                      }
                    }
                  });
}

DiffArray SoftmaxWithTemperature(const DiffArray &logits, double temperature) {
  if (!(temperature > 0)) {
    throw UsageError("SoftmaxWithTemperature: temperature must be > 0");
  }
  for (Real v : logits.value().vec()) {
    if (!std::isfinite(v)) throw UsageError("SoftmaxWithTemperature: non-finite logit");
  }
  const Shape original = logits.shape();
  DiffArray row = Reshape(logits, Shape{1, static_cast<int>(logits.size())});
  return Reshape(SoftmaxRows(row, temperature), original);
}

DiffArray LayerNormRows(const DiffArray &x, const DiffArray &gamma, const DiffArray &beta,
                        double eps) {
  Tape &t = TapeOf(x, gamma);
  TapeOf(x, beta);
  RequireMatrix(x, "LayerNormRows");
  const int r = x.rows(), c = x.cols();
  if (static_cast<int>(gamma.size()) != c || static_cast<int>(beta.size()) != c) {
    throw UsageError("LayerNormRows: scale/shift width does not match input");
  }
  const Array &xv = x.value();
  const Array &gv = gamma.value();
  const Array &bv = beta.value();
  Array out(xv.shape());
  std::vector<double> inv_std(r);
  for (int i = 0; i < r; ++i) {
    const Real *xi = xv.row(i);
    double mean = 0;
    for (int j = 0; j < c; ++j) mean += xi[j];
    mean /= c;
    double var = 0;
    for (int j = 0; j < c; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= c;
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    Real *oi = out.row(i);
    for (int j = 0; j < c; ++j) {
      oi[j] = static_cast<Real>((xi[j] - mean) * inv_std[i] * gv[j] + bv[j]);
    }
  }
  return t.Record(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, r, c, inv_std = std::move(inv_std)](Tape &tp, const Array &,
                                                           const Array &g) {
        const Array &xv = x.value();
        const Array &gv = gamma.value();
        Array *gx = x.requires_grad() ? &tp.GradBuffer(x) : nullptr;
        Array *gg = gamma.requires_grad() ? &tp.GradBuffer(gamma) : nullptr;
        Array *gbeta = beta.requires_grad() ? &tp.GradBuffer(beta) : nullptr;
        std::vector<double> xhat(c), dxhat(c);
        for (int i = 0; i < r; ++i) {
          const Real *xi = xv.row(i);
          const Real *gi = g.data() + static_cast<std::size_t>(i) * c;
          double mean = 0;
          for (int j = 0; j < c; ++j) mean += xi[j];
          mean /= c;
          double sum_d = 0, sum_dx = 0;
          for (int j = 0; j < c; ++j) {
            xhat[j] = (xi[j] - mean) * inv_std[i];
            dxhat[j] = static_cast<double>(gi[j]) * gv[j];
            sum_d += dxhat[j];
            sum_dx += dxhat[j] * xhat[j];
            if (gg) (*gg)[j] += static_cast<Real>(gi[j] * xhat[j]);
            if (gbeta) (*gbeta)[j] += gi[j];
          }
          if (gx) {
            Real *gxi = gx->row(i);
            for (int j = 0; j < c; ++j) {
              gxi[j] += static_cast<Real>(inv_std[i] / c *
                                          (c * dxhat[j] - sum_d - xhat[j] * sum_dx));
            }
          }
        }
      });
}

DiffArray Glu(const DiffArray &x) {
  Tape &t = TapeOf(x);
  RequireMatrix(x, "Glu");
  const int r = x.rows(), c2 = x.cols();
  if (c2 % 2 != 0) throw UsageError("Glu: odd number of columns");
  const int c = c2 / 2;
  const Array &xv = x.value();
  Array out(MatShape(r, c));
  for (int i = 0; i < r; ++i) {
    const Real *xi = xv.row(i);
    Real *oi = out.row(i);
    for (int j = 0; j < c; ++j) oi[j] = static_cast<Real>(xi[j] * SigmoidD(xi[c + j]));
  }
  return t.Record(std::move(out), {x}, [x, r, c](Tape &tp, const Array &, const Array &g) {
    const Array &xv = x.value();
    Array &gx = tp.GradBuffer(x);
    for (int i = 0; i < r; ++i) {
      const Real *xi = xv.row(i);
      const Real *gi = g.data() + static_cast<std::size_t>(i) * c;
      Real *gxi = gx.row(i);
      for (int j = 0; j < c; ++j) {
        const double s = SigmoidD(xi[c + j]);
        gxi[j] += static_cast<Real>(gi[j] * s);
        gxi[c + j] += static_cast<Real>(gi[j] * xi[j] * s * (1 - s));
      }
    }
  });
}

DiffArray DepthwiseConvTime(const DiffArray &x, const DiffArray &w, const DiffArray &bias,
                            bool causal) {
  Tape &t = TapeOf(x, w);
  TapeOf(x, bias);
  RequireMatrix(x, "DepthwiseConvTime");
  const int frames = x.rows(), ch = x.cols();
  const int kernel = w.rows();
  if (w.cols() != ch || static_cast<int>(bias.size()) != ch) {
    throw UsageError("DepthwiseConvTime: channel mismatch");
  }
  if (!causal && kernel % 2 == 0) {
    throw UsageError("DepthwiseConvTime: centred convolution needs an odd kernel");
  }
  const int left = causal ? kernel - 1 : (kernel - 1) / 2;
  const Array &xv = x.value();
  const Array &wv = w.value();
  Array out(MatShape(frames, ch));
  for (int tt = 0; tt < frames; ++tt) {
    Real *o = out.row(tt);
    std::copy_n(bias.value().data(), ch, o);
    for (int k = 0; k < kernel; ++k) {
      const int src = tt + k - left;
      if (src < 0 || src >= frames) continue;
      const Real *xs = xv.row(src);
      const Real *wk = wv.row(k);
      for (int c = 0; c < ch; ++c) o[c] += wk[c] * xs[c];
    }
  }
  return t.Record(std::move(out), {x, w, bias},
                  [x, w, bias, frames, ch, kernel, left](Tape &tp, const Array &,
                                                         const Array &g) {
                    const Array &xv = x.value();
                    const Array &wv = w.value();
                    Array *gx = x.requires_grad() ? &tp.GradBuffer(x) : nullptr;
                    Array *gw = w.requires_grad() ? &tp.GradBuffer(w) : nullptr;
                    Array *gb = bias.requires_grad() ? &tp.GradBuffer(bias) : nullptr;
                    for (int tt = 0; tt < frames; ++tt) {
                      const Real *go = g.data() + static_cast<std::size_t>(tt) * ch;
                      if (gb) simd::Axpy(Real(1), go, gb->data(), ch);
                      for (int k = 0; k < kernel; ++k) {
                        const int src = tt + k - left;
                        if (src < 0 || src >= frames) continue;
                        const Real *xs = xv.row(src);
                        const Real *wk = wv.row(k);
                        if (gx) {
                          Real *gxs = gx->row(src);
                          for (int c = 0; c < ch; ++c) gxs[c] += wk[c] * go[c];
                        }
                        if (gw) {
                          Real *gwk = gw->row(k);
                          for (int c = 0; c < ch; ++c) gwk[c] += xs[c] * go[c];
                        }
                      }
                    }
                  });
}

DiffArray SliceRows(const DiffArray &x, int begin, int end) {
  Tape &t = TapeOf(x);
  RequireMatrix(x, "SliceRows");
  const int r = x.rows(), c = x.cols();
  if (begin < 0 || end > r || begin > end) throw UsageError("SliceRows: bad range");
  const Array &xv = x.value();
  Array out(MatShape(end - begin, c));
  std::copy(xv.row(begin), xv.row(begin) + static_cast<std::size_t>(end - begin) * c,
            out.data());
  return t.Record(std::move(out), {x}, [x, begin, c](Tape &tp, const Array &, const Array &g) {
    simd::Axpy(Real(1), g.data(), tp.GradBuffer(x).row(begin), g.size());
    (void)c;
  });
}

DiffArray SliceCols(const DiffArray &x, int begin, int end) {
  Tape &t = TapeOf(x);
  RequireMatrix(x, "SliceCols");
  const int r = x.rows(), c = x.cols();
  if (begin < 0 || end > c || begin > end) throw UsageError("SliceCols: bad range");
  const int w = end - begin;
  const Array &xv = x.value();
  Array out(MatShape(r, w));
  for (int i = 0; i < r; ++i) std::copy_n(xv.row(i) + begin, w, out.row(i));
  return t.Record(std::move(out), {x}, [x, r, w, begin](Tape &tp, const Array &, const Array &g) {
    Array &gx = tp.GradBuffer(x);
    for (int i = 0; i < r; ++i) {
      simd::Axpy(Real(1), g.data() + static_cast<std::size_t>(i) * w, gx.row(i) + begin, w);
    }
  });
}

DiffArray ConcatRows(const std::vector<DiffArray> &parts) {
  if (parts.empty()) throw UsageError("ConcatRows: no inputs");
  Tape &t = TapeOf(parts[0]);
  const int c = parts[0].cols();
  int r = 0;
  for (const auto &p : parts) {
    TapeOf(parts[0], p);
    RequireMatrix(p, "ConcatRows");
    if (p.cols() != c) throw UsageError("ConcatRows: column mismatch");
    r += p.rows();
  }
  Array out(MatShape(r, c));
  std::size_t off = 0;
  for (const auto &p : parts) {
    std::copy(p.value().vec().begin(), p.value().vec().end(), out.data() + off);
    off += p.size();
  }
  return t.Record(std::move(out), parts, [parts](Tape &tp, const Array &, const Array &g) {
    std::size_t off = 0;
    for (const auto &p : parts) {
      if (p.requires_grad()) {
        simd::Axpy(Real(1), g.data() + off, tp.GradBuffer(p).data(), p.size());
      }
      off += p.size();
    }
  });
}

DiffArray ConcatCols(const std::vector<DiffArray> &parts) {
  if (parts.empty()) throw UsageError("ConcatCols: no inputs");
  Tape &t = TapeOf(parts[0]);
  const int r = parts[0].rows();
  int c = 0;
  for (const auto &p : parts) {
    TapeOf(parts[0], p);
    RequireMatrix(p, "ConcatCols");
    if (p.rows() != r) throw UsageError("ConcatCols: row mismatch");
    c += p.cols();
  }
  Array out(MatShape(r, c));
  int off = 0;
  for (const auto &p : parts) {
    const int w = p.cols();
    for (int i = 0; i < r; ++i) std::copy_n(p.value().row(i), w, out.row(i) + off);
    off += w;
  }
  return t.Record(std::move(out), parts, [parts, r, c](Tape &tp, const Array &, const Array &g) {
    int off = 0;
    for (const auto &p : parts) {
      const int w = p.cols();
      if (p.requires_grad()) {
        Array &gp = tp.GradBuffer(p);
        for (int i = 0; i < r; ++i) {
          simd::Axpy(Real(1), g.data() + static_cast<std::size_t>(i) * c + off, gp.row(i), w);
        }
      }
      off += w;
    }
  });
}

DiffArray Reshape(const DiffArray &x, Shape shape) {
  Tape &t = TapeOf(x);
  Array out = x.value().Reshaped(std::move(shape));
  return t.Record(std::move(out), {x}, [x](Tape &tp, const Array &, const Array &g) {
    simd::Axpy(Real(1), g.data(), tp.GradBuffer(x).data(), g.size());
  });
}

DiffArray GatherRows(const DiffArray &table, std::span<const int> ids) {
  Tape &t = TapeOf(table);
  RequireMatrix(table, "GatherRows");
  const int n = table.rows(), c = table.cols();
  std::vector<int> idx(ids.begin(), ids.end());
  for (int id : idx) {
    if (id < 0 || id >= n) {
      throw UsageError("GatherRows: row " + std::to_string(id) + " out of range [0, " +
                       std::to_string(n) + ")");
    }
  }
  const Array &tv = table.value();
  Array out(MatShape(static_cast<int>(idx.size()), c));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(tv.row(idx[i]), c, out.row(static_cast<int>(i)));
  }
  return t.Record(std::move(out), {table},
                  [table, idx = std::move(idx), c](Tape &tp, const Array &, const Array &g) {
                    Array &gt = tp.GradBuffer(table);
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      simd::Axpy(Real(1), g.data() + i * c, gt.row(idx[i]), c);
                    }
                  });
}

DiffArray OuterAddRows(const DiffArray &a, const DiffArray &b) {
  Tape &t = TapeOf(a, b);
  RequireMatrix(a, "OuterAddRows");
  RequireMatrix(b, "OuterAddRows");
  const int ta = a.rows(), ub = b.rows(), c = a.cols();
  if (b.cols() != c) throw UsageError("OuterAddRows: width mismatch");
  const Array &av = a.value();
  const Array &bv = b.value();
  Array out(MatShape(ta * ub, c));
  for (int i = 0; i < ta; ++i) {
    for (int u = 0; u < ub; ++u) {
      Real *o = out.row(i * ub + u);
      const Real *ai = av.row(i);
      const Real *bu = bv.row(u);
      for (int j = 0; j < c; ++j) o[j] = ai[j] + bu[j];
    }
  }
  return t.Record(std::move(out), {a, b}, [a, b, ta, ub, c](Tape &tp, const Array &, const Array &g) {
    Array *ga = a.requires_grad() ? &tp.GradBuffer(a) : nullptr;
    Array *gb = b.requires_grad() ? &tp.GradBuffer(b) : nullptr;
    for (int i = 0; i < ta; ++i) {
      for (int u = 0; u < ub; ++u) {
        const Real *gr = g.data() + static_cast<std::size_t>(i * ub + u) * c;
        if (ga) simd::Axpy(Real(1), gr, ga->row(i), c);
        if (gb) simd::Axpy(Real(1), gr, gb->row(u), c);
      }
    }
  });
}

DiffArray MeanRows(const DiffArray &x) {
  Tape &t = TapeOf(x);
  RequireMatrix(x, "MeanRows");
  const int r = x.rows(), c = x.cols();
  const Array &xv = x.value();
  Array out(MatShape(1, c));
  for (int j = 0; j < c; ++j) {
    double s = 0;
    for (int i = 0; i < r; ++i) s += xv(i, j);
    out[j] = static_cast<Real>(s / r);
  }
  return t.Record(std::move(out), {x}, [x, r, c](Tape &tp, const Array &, const Array &g) {
    Array &gx = tp.GradBuffer(x);
    const Real inv = static_cast<Real>(1.0 / r);
    for (int i = 0; i < r; ++i) simd::Axpy(inv, g.data(), gx.row(i), c);
  });
}

DiffArray Dropout(const DiffArray &x, double p, Rng &rng) {
  if (p < 0 || p >= 1) throw UsageError("Dropout: p must be in [0, 1)");
  if (p == 0) return x;
  Tape &t = TapeOf(x);
  const Real keep_scale = static_cast<Real>(1.0 / (1.0 - p));
  std::vector<Real> mask(x.size());
  for (Real &m : mask) m = rng.Uniform() < p ? Real(0) : keep_scale;
  const Array &xv = x.value();
  Array out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return t.Record(std::move(out), {x},
                  [x, mask = std::move(mask)](Tape &tp, const Array &, const Array &g) {
                    Array &gx = tp.GradBuffer(x);
                    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
                  });
}

DiffArray RelativePositionBias(const DiffArray &table, int head, int frames) {
  Tape &t = TapeOf(table);
  RequireMatrix(table, "RelativePositionBias");
  const int width = table.cols();
  if (width % 2 == 0) throw UsageError("RelativePositionBias: table width must be odd");
  if (head < 0 || head >= table.rows()) throw UsageError("RelativePositionBias: bad head");
  const int clip = width / 2;
  const Real *tv = table.value().row(head);
  Array out(MatShape(frames, frames));
  auto slot = [clip](int i, int j) { return std::clamp(j - i, -clip, clip) + clip; };
  for (int i = 0; i < frames; ++i) {
    for (int j = 0; j < frames; ++j) out(i, j) = tv[slot(i, j)];
  }
  return t.Record(std::move(out), {table},
                  [table, head, frames, slot](Tape &tp, const Array &, const Array &g) {
                    Real *gt = tp.GradBuffer(table).row(head);
                    for (int i = 0; i < frames; ++i) {
                      for (int j = 0; j < frames; ++j) {
                        gt[slot(i, j)] += g[static_cast<std::size_t>(i) * frames + j];
                      }
                    }
                  });
}

DiffArray AnchoredWeightedSum(const DiffArray &x, const DiffArray &weights, int slots) {
  Tape &t = TapeOf(x, weights);
  RequireMatrix(x, "AnchoredWeightedSum");
  if (slots < 1 || x.rows() % slots != 0) {
    throw UsageError("AnchoredWeightedSum: rows not a multiple of the slot count");
  }
  if (static_cast<int>(weights.size()) != slots) {
    throw UsageError("AnchoredWeightedSum: need one weight per slot");
  }
  const int groups = x.rows() / slots, e = x.cols();
  const Array &xv = x.value();
  const Array &wv = weights.value();
  Array out(MatShape(groups, e));
  for (int r = 0; r < groups; ++r) {
    const Real *anchor = xv.row(r * slots);
    Real *o = out.row(r);
    for (int j = 0; j < e; ++j) {
      Real acc = anchor[j];
      for (int i = 1; i < slots; ++i) acc += wv[i] * (xv.row(r * slots + i)[j] - anchor[j]);
      o[j] = acc;
    }
  }
  return t.Record(std::move(out), {x, weights},
                  [x, weights, slots, groups, e](Tape &tp, const Array &, const Array &g) {
                    const Array &xv = x.value();
                    const Array &wv = weights.value();
                    Array *gx = x.requires_grad() ? &tp.GradBuffer(x) : nullptr;
                    Array *gw = weights.requires_grad() ? &tp.GradBuffer(weights) : nullptr;
                    double rest = 0;
                    for (int i = 1; i < slots; ++i) rest += wv[i];
                    const Real anchor_w = static_cast<Real>(1.0 - rest);
                    for (int r = 0; r < groups; ++r) {
                      const Real *gr = g.data() + static_cast<std::size_t>(r) * e;
                      const Real *anchor = xv.row(r * slots);
                      if (gx) simd::Axpy(anchor_w, gr, gx->row(r * slots), e);
                      for (int i = 1; i < slots; ++i) {
                        const Real *xi = xv.row(r * slots + i);
                        if (gx) simd::Axpy(wv[i], gr, gx->row(r * slots + i), e);
                        if (gw) {
                          double s = 0;
                          for (int j = 0; j < e; ++j) s += gr[j] * (xi[j] - anchor[j]);
                          (*gw)[i] += static_cast<Real>(s);
                        }
                      }
                    }
                  });
}

DiffArray Sum(const DiffArray &x) {
  Tape &t = TapeOf(x);
  double s = 0;
  for (Real v : x.value().vec()) s += v;
  return t.Record(Array::Scalar(static_cast<Real>(s)), {x},
                  [x](Tape &tp, const Array &, const Array &g) {
                    Array &gx = tp.GradBuffer(x);
                    const Real gv = g[0];
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gv;
                  });
}

DiffArray Mean(const DiffArray &x) {
  if (x.size() == 0) throw UsageError("Mean of an empty array");
  return Scale(Sum(x), 1.0 / static_cast<double>(x.size()));
}

DiffArray Pick(const DiffArray &x, std::size_t flat_index) {
  Tape &t = TapeOf(x);
  if (flat_index >= x.size()) throw UsageError("Pick: index out of range");
  return t.Record(Array::Scalar(x.value()[flat_index]), {x},
                  [x, flat_index](Tape &tp, const Array &, const Array &g) {
                    tp.GradBuffer(x)[flat_index] += g[0];
                  });
}

DiffArray LogAddExp(const DiffArray &a, const DiffArray &b) {
  Tape &t = TapeOf(a, b);
  const double av = a.item(), bv = b.item();
  const double mx = std::max(av, bv);
  double out;
  double wa = 0, wb = 0;
  if (mx == kNegInf) {
    out = kNegInf;
  } else {
    const double ea = std::exp(av - mx), eb = std::exp(bv - mx);
    out = mx + std::log(ea + eb);
    wa = ea / (ea + eb);
    wb = eb / (ea + eb);
  }
  return t.Record(Array::Scalar(static_cast<Real>(out)), {a, b},
                  [a, b, wa, wb](Tape &tp, const Array &, const Array &g) {
                    if (a.requires_grad()) tp.GradBuffer(a)[0] += static_cast<Real>(g[0] * wa);
                    if (b.requires_grad()) tp.GradBuffer(b)[0] += static_cast<Real>(g[0] * wb);
                  });
}

DiffArray LogSumExp(const DiffArray &x) {
  Tape &t = TapeOf(x);
  if (x.size() == 0) throw UsageError("LogSumExp of an empty vector");
  const Array &xv = x.value();
  double mx = kNegInf;
  for (Real v : xv.vec()) mx = std::max(mx, static_cast<double>(v));
  double out = kNegInf;
  if (mx != kNegInf) {
    double s = 0;
    for (Real v : xv.vec()) s += std::exp(v - mx);
    out = mx + std::log(s);
  }
  return t.Record(Array::Scalar(static_cast<Real>(out)), {x},
                  [x, out](Tape &tp, const Array &, const Array &g) {
                    if (out == kNegInf) return;
                    const Array &xv = x.value();
                    Array &gx = tp.GradBuffer(x);
                    for (std::size_t i = 0; i < xv.size(); ++i) {
                      gx[i] += static_cast<Real>(g[0] * std::exp(xv[i] - out));
                    }
                  });
}

DiffArray WeightedSum(const std::vector<DiffArray> &xs, const std::vector<double> &w) {
  if (xs.empty() || xs.size() != w.size()) throw UsageError("WeightedSum: bad arguments");
  Tape &t = TapeOf(xs[0]);
  double s = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    TapeOf(xs[0], xs[i]);
    s += w[i] * static_cast<double>(xs[i].item());
  }
  return t.Record(Array::Scalar(static_cast<Real>(s)), xs,
                  [xs, w](Tape &tp, const Array &, const Array &g) {
                    for (std::size_t i = 0; i < xs.size(); ++i) {
                      if (xs[i].requires_grad()) {
                        tp.GradBuffer(xs[i])[0] += static_cast<Real>(g[0] * w[i]);
                      }
                    }
                  });
}

CASC_END_NAMESPACE
