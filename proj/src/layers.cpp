#include "daec/layers.hpp"

#include <cmath>

namespace daec {

FeatureMap leaky_relu(const FeatureMap& x) {
  FeatureMap y = x;
  for (double& v : y.v) {
    if (v < 0.0) v *= kLeakySlope;
  }
  return y;
}

FeatureMap leaky_relu_backward(const FeatureMap& x, const FeatureMap& gy) {
  require(x.same_shape(gy), "leaky_relu backward shape mismatch");
  FeatureMap gx = gy;
  for (size_t i = 0; i < gx.v.size(); ++i) {
    if (x.v[i] < 0.0) gx.v[i] *= kLeakySlope;
  }
  return gx;
}

namespace {

constexpr int kKt = 2;  // time taps: t-1, t
constexpr int kKf = 3;  // freq taps, pad 1

inline double& wat(Tensor& w, int co, int ci, int dt, int df, int cin) {
  return w.v[((static_cast<size_t>(co) * cin + ci) * kKt + dt) * kKf + df];
}
inline double wat(const Tensor& w, int co, int ci, int dt, int df, int cin) {
  return w.v[((static_cast<size_t>(co) * cin + ci) * kKt + dt) * kKf + df];
}
inline double& gwat(Tensor& w, int co, int ci, int dt, int df, int cin) {
  return w.g[((static_cast<size_t>(co) * cin + ci) * kKt + dt) * kKf + df];
}

}  // namespace

Conv2dCausal::Conv2dCausal(int cin_, int cout_, Rng& rng) : cin(cin_), cout(cout_) {
  require(cin > 0 && cout > 0, "conv channels must be positive");
  w = Tensor({cout, cin, kKt, kKf});
  b = Tensor({cout});
  init_uniform(w, 1.0 / std::sqrt(static_cast<double>(cin) * kKt * kKf), rng);
}

// The stride-2 kernel touches inputs fi = 2 fo + df - 1 for df in {0,1,2}.
// The loops below run over whole frequency rows with the three tap weights
// held in registers; only the first and last outputs need boundary guards.

FeatureMap Conv2dCausal::forward(const FeatureMap& x) const {
  require(x.c == cin, "conv input channel mismatch");
  const int fo_n = out_freq(x.f);
  FeatureMap y(cout, x.t, fo_n);
  for (int co = 0; co < cout; ++co) {
    for (int t = 0; t < x.t; ++t) {
      double* yr = y.row(co, t);
      for (int fo = 0; fo < fo_n; ++fo) yr[fo] = b.v[co];
      for (int ci = 0; ci < cin; ++ci) {
        for (int dt = 0; dt < kKt; ++dt) {
          const int ti = t - 1 + dt;
          if (ti < 0) continue;
          const double* xr = x.row(ci, ti);
          const double w0 = wat(w, co, ci, dt, 0, cin);
          const double w1 = wat(w, co, ci, dt, 1, cin);
          const double w2 = wat(w, co, ci, dt, 2, cin);
          yr[0] += w1 * xr[0];
          if (x.f > 1) yr[0] += w2 * xr[1];
          for (int fo = 1; fo + 1 < fo_n; ++fo) {
            const int fi = 2 * fo;
            yr[fo] += w0 * xr[fi - 1] + w1 * xr[fi] + w2 * xr[fi + 1];
          }
          if (fo_n > 1) {
            const int fo = fo_n - 1;
            const int fi = 2 * fo;
            yr[fo] += w0 * xr[fi - 1];
            if (fi < x.f) yr[fo] += w1 * xr[fi];
            if (fi + 1 < x.f) yr[fo] += w2 * xr[fi + 1];
          }
        }
      }
    }
  }
  return y;
}

FeatureMap Conv2dCausal::backward(const FeatureMap& x, const FeatureMap& gy) {
  require(x.c == cin && gy.c == cout && gy.t == x.t && gy.f == out_freq(x.f),
          "conv backward shape mismatch");
  FeatureMap gx(x.c, x.t, x.f);
  const int fo_n = gy.f;
  for (int co = 0; co < cout; ++co) {
    double bg = 0.0;
    for (int t = 0; t < x.t; ++t) {
      const double* gr = gy.row(co, t);
      for (int fo = 0; fo < fo_n; ++fo) bg += gr[fo];
      for (int ci = 0; ci < cin; ++ci) {
        for (int dt = 0; dt < kKt; ++dt) {
          const int ti = t - 1 + dt;
          if (ti < 0) continue;
          const double* xr = x.row(ci, ti);
          double* gxr = gx.row(ci, ti);
          const double w0 = wat(w, co, ci, dt, 0, cin);
          const double w1 = wat(w, co, ci, dt, 1, cin);
          const double w2 = wat(w, co, ci, dt, 2, cin);
          double gw0 = 0.0, gw1 = 0.0, gw2 = 0.0;
          {
            const double go = gr[0];
            gw1 += go * xr[0];
            gxr[0] += go * w1;
            if (x.f > 1) {
              gw2 += go * xr[1];
              gxr[1] += go * w2;
            }
          }
          for (int fo = 1; fo + 1 < fo_n; ++fo) {
            const double go = gr[fo];
            const int fi = 2 * fo;
            gw0 += go * xr[fi - 1];
            gw1 += go * xr[fi];
            gw2 += go * xr[fi + 1];
            gxr[fi - 1] += go * w0;
            gxr[fi] += go * w1;
            gxr[fi + 1] += go * w2;
          }
          if (fo_n > 1) {
            const int fo = fo_n - 1;
            const double go = gr[fo];
            const int fi = 2 * fo;
            gw0 += go * xr[fi - 1];
            gxr[fi - 1] += go * w0;
            if (fi < x.f) {
              gw1 += go * xr[fi];
              gxr[fi] += go * w1;
            }
            if (fi + 1 < x.f) {
              gw2 += go * xr[fi + 1];
              gxr[fi + 1] += go * w2;
            }
          }
          gwat(w, co, ci, dt, 0, cin) += gw0;
          gwat(w, co, ci, dt, 1, cin) += gw1;
          gwat(w, co, ci, dt, 2, cin) += gw2;
        }
      }
    }
    b.g[co] += bg;
  }
  return gx;
}

void Conv2dCausal::collect(const std::string& prefix, std::vector<NamedParam>& out) {
  out.push_back({prefix + ".w", &w});
  out.push_back({prefix + ".b", &b});
}

ConvT2dCausal::ConvT2dCausal(int cin_, int cout_, Rng& rng) : cin(cin_), cout(cout_) {
  require(cin > 0 && cout > 0, "conv channels must be positive");
  w = Tensor({cout, cin, kKt, kKf});
  b = Tensor({cout});
  init_uniform(w, 1.0 / std::sqrt(static_cast<double>(cin) * kKt * kKf), rng);
}

// Inverse of the encoder map fi = 2 fo + df - 1, i.e. fo = 2 fi + df - 1.
// Split by output parity: even outputs 2m take only the centre tap from
// input m; odd outputs 2m+1 blend taps 2 and 0 from inputs m and m+1. With
// fo_n = 2 f - 1 both index sets are exactly in range, so the row loops need
// no guards at all.

FeatureMap ConvT2dCausal::forward(const FeatureMap& x) const {
  require(x.c == cin, "transposed conv input channel mismatch");
  const int fo_n = out_freq(x.f);
  FeatureMap y(cout, x.t, fo_n);
  for (int co = 0; co < cout; ++co) {
    for (int t = 0; t < x.t; ++t) {
      double* yr = y.row(co, t);
      for (int fo = 0; fo < fo_n; ++fo) yr[fo] = b.v[co];
      for (int ci = 0; ci < cin; ++ci) {
        for (int dt = 0; dt < kKt; ++dt) {
          const int ti = t - 1 + dt;
          if (ti < 0) continue;
          const double* xr = x.row(ci, ti);
          const double w0 = wat(w, co, ci, dt, 0, cin);
          const double w1 = wat(w, co, ci, dt, 1, cin);
          const double w2 = wat(w, co, ci, dt, 2, cin);
          for (int m = 0; m < x.f; ++m) yr[2 * m] += w1 * xr[m];
          for (int m = 0; m + 1 < x.f; ++m) {
            yr[2 * m + 1] += w2 * xr[m] + w0 * xr[m + 1];
          }
        }
      }
    }
  }
  return y;
}

FeatureMap ConvT2dCausal::backward(const FeatureMap& x, const FeatureMap& gy) {
  require(x.c == cin && gy.c == cout && gy.t == x.t && gy.f == out_freq(x.f),
          "transposed conv backward shape mismatch");
  FeatureMap gx(x.c, x.t, x.f);
  const int fo_n = gy.f;
  for (int co = 0; co < cout; ++co) {
    double bg = 0.0;
    for (int t = 0; t < x.t; ++t) {
      const double* gr = gy.row(co, t);
      for (int fo = 0; fo < fo_n; ++fo) bg += gr[fo];
      for (int ci = 0; ci < cin; ++ci) {
        for (int dt = 0; dt < kKt; ++dt) {
          const int ti = t - 1 + dt;
          if (ti < 0) continue;
          const double* xr = x.row(ci, ti);
          double* gxr = gx.row(ci, ti);
          const double w0 = wat(w, co, ci, dt, 0, cin);
          const double w1 = wat(w, co, ci, dt, 1, cin);
          const double w2 = wat(w, co, ci, dt, 2, cin);
          double gw0 = 0.0, gw1 = 0.0, gw2 = 0.0;
          for (int m = 0; m < x.f; ++m) {
            const double go = gr[2 * m];
            gw1 += go * xr[m];
            gxr[m] += go * w1;
          }
          for (int m = 0; m + 1 < x.f; ++m) {
            const double go = gr[2 * m + 1];
            gw2 += go * xr[m];
            gw0 += go * xr[m + 1];
            gxr[m] += go * w2;
            gxr[m + 1] += go * w0;
          }
          gwat(w, co, ci, dt, 0, cin) += gw0;
          gwat(w, co, ci, dt, 1, cin) += gw1;
          gwat(w, co, ci, dt, 2, cin) += gw2;
        }
      }
    }
    b.g[co] += bg;
  }
  return gx;
}

void ConvT2dCausal::collect(const std::string& prefix, std::vector<NamedParam>& out) {
  out.push_back({prefix + ".w", &w});
  out.push_back({prefix + ".b", &b});
}

Conv1x1::Conv1x1(int cin_, int cout_, Rng& rng) : cin(cin_), cout(cout_) {
  require(cin > 0 && cout > 0, "conv channels must be positive");
  w = Tensor({cout, cin});
  b = Tensor({cout});
  init_uniform(w, 1.0 / std::sqrt(static_cast<double>(cin)), rng);
}

FeatureMap Conv1x1::forward(const FeatureMap& x) const {
  require(x.c == cin, "1x1 conv input channel mismatch");
  FeatureMap y(cout, x.t, x.f);
  const size_t plane = static_cast<size_t>(x.t) * x.f;
  for (int co = 0; co < cout; ++co) {
    double* yp = y.v.data() + co * plane;
    for (size_t i = 0; i < plane; ++i) yp[i] = b.v[co];
    for (int ci = 0; ci < cin; ++ci) {
      const double wv = w.v[static_cast<size_t>(co) * cin + ci];
      const double* xp = x.v.data() + ci * plane;
      for (size_t i = 0; i < plane; ++i) yp[i] += wv * xp[i];
    }
  }
  return y;
}

FeatureMap Conv1x1::backward(const FeatureMap& x, const FeatureMap& gy) {
  require(x.c == cin && gy.c == cout && gy.t == x.t && gy.f == x.f,
          "1x1 conv backward shape mismatch");
  FeatureMap gx(x.c, x.t, x.f);
  const size_t plane = static_cast<size_t>(x.t) * x.f;
  for (int co = 0; co < cout; ++co) {
    const double* gp = gy.v.data() + co * plane;
    double bacc = 0.0;
    for (size_t i = 0; i < plane; ++i) bacc += gp[i];
    b.g[co] += bacc;
    for (int ci = 0; ci < cin; ++ci) {
      const double wv = w.v[static_cast<size_t>(co) * cin + ci];
      const double* xp = x.v.data() + ci * plane;
      double* gxp = gx.v.data() + ci * plane;
      double wacc = 0.0;
      for (size_t i = 0; i < plane; ++i) {
        wacc += gp[i] * xp[i];
        gxp[i] += gp[i] * wv;
      }
      w.g[static_cast<size_t>(co) * cin + ci] += wacc;
    }
  }
  return gx;
}

void Conv1x1::collect(const std::string& prefix, std::vector<NamedParam>& out) {
  out.push_back({prefix + ".w", &w});
  out.push_back({prefix + ".b", &b});
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

GroupedGru::GroupedGru(int in_size_, int hidden_, int groups_, Rng& rng)
    : in_size(in_size_), hidden(hidden_), groups(groups_) {
  require(groups > 0 && in_size > 0 && hidden > 0, "gru dimensions must be positive");
  require(in_size % groups == 0 && hidden % groups == 0,
          "gru sizes must divide evenly into groups");
  const int xg = in_size / groups;
  const int hg = hidden / groups;
  for (int g = 0; g < groups; ++g) {
    w_ih.emplace_back(std::vector<int>{3 * hg, xg});
    w_hh.emplace_back(std::vector<int>{3 * hg, hg});
    b_ih.emplace_back(std::vector<int>{3 * hg});
    b_hh.emplace_back(std::vector<int>{3 * hg});
    init_uniform(w_ih.back(), 1.0 / std::sqrt(static_cast<double>(xg)), rng);
    init_uniform(w_hh.back(), 1.0 / std::sqrt(static_cast<double>(hg)), rng);
  }
}

std::vector<double> GroupedGru::forward(const std::vector<double>& x_seq, int t_len,
                                        Cache& cache) const {
  require(x_seq.size() == static_cast<size_t>(t_len) * in_size, "gru input size mismatch");
  const int xg = in_size / groups;
  const int hg = hidden / groups;
  cache.t_len = t_len;
  cache.x = x_seq;
  cache.h.assign(static_cast<size_t>(t_len + 1) * hidden, 0.0);
  cache.r.assign(static_cast<size_t>(t_len) * hidden, 0.0);
  cache.z.assign(static_cast<size_t>(t_len) * hidden, 0.0);
  cache.n.assign(static_cast<size_t>(t_len) * hidden, 0.0);
  cache.gh_n.assign(static_cast<size_t>(t_len) * hidden, 0.0);

  std::vector<double> gi(3 * hg), gh(3 * hg);
  for (int t = 0; t < t_len; ++t) {
    const double* xt = x_seq.data() + static_cast<size_t>(t) * in_size;
    const double* hp = cache.h.data() + static_cast<size_t>(t) * hidden;
    double* hn = cache.h.data() + static_cast<size_t>(t + 1) * hidden;
    for (int g = 0; g < groups; ++g) {
      const double* xg_p = xt + g * xg;
      const double* hg_p = hp + g * hg;
      const Tensor& wi = w_ih[g];
      const Tensor& wh = w_hh[g];
      for (int j = 0; j < 3 * hg; ++j) {
        double a = b_ih[g].v[j];
        const double* wr = wi.v.data() + static_cast<size_t>(j) * xg;
        for (int i = 0; i < xg; ++i) a += wr[i] * xg_p[i];
        gi[j] = a;
        double c = b_hh[g].v[j];
        const double* hr = wh.v.data() + static_cast<size_t>(j) * hg;
        for (int i = 0; i < hg; ++i) c += hr[i] * hg_p[i];
        gh[j] = c;
      }
      for (int i = 0; i < hg; ++i) {
        const int k = g * hg + i;
        const double r = sigmoid(gi[i] + gh[i]);
        const double z = sigmoid(gi[hg + i] + gh[hg + i]);
        const double n = std::tanh(gi[2 * hg + i] + r * gh[2 * hg + i]);
        cache.r[static_cast<size_t>(t) * hidden + k] = r;
        cache.z[static_cast<size_t>(t) * hidden + k] = z;
        cache.n[static_cast<size_t>(t) * hidden + k] = n;
        cache.gh_n[static_cast<size_t>(t) * hidden + k] = gh[2 * hg + i];
        hn[k] = (1.0 - z) * n + z * hp[k];
      }
    }
  }
  return std::vector<double>(cache.h.begin() + hidden, cache.h.end());
}

std::vector<double> GroupedGru::backward(const Cache& cache,
                                         const std::vector<double>& gy) {
  const int t_len = cache.t_len;
  require(gy.size() == static_cast<size_t>(t_len) * hidden, "gru grad size mismatch");
  const int xg = in_size / groups;
  const int hg = hidden / groups;
  std::vector<double> gx(static_cast<size_t>(t_len) * in_size, 0.0);
  std::vector<double> dh(hidden, 0.0);
  std::vector<double> dgi(3 * hg), dgh(3 * hg);

  for (int t = t_len - 1; t >= 0; --t) {
    const double* hp = cache.h.data() + static_cast<size_t>(t) * hidden;
    const double* xt = cache.x.data() + static_cast<size_t>(t) * in_size;
    for (int k = 0; k < hidden; ++k) {
      dh[k] += gy[static_cast<size_t>(t) * hidden + k];
    }
    for (int g = 0; g < groups; ++g) {
      Tensor& wi = w_ih[g];
      Tensor& wh = w_hh[g];
      for (int i = 0; i < hg; ++i) {
        const int k = g * hg + i;
        const size_t tk = static_cast<size_t>(t) * hidden + k;
        const double r = cache.r[tk];
        const double z = cache.z[tk];
        const double n = cache.n[tk];
        const double ghn = cache.gh_n[tk];
        const double d = dh[k];
        const double dz = d * (hp[k] - n);
        const double dn = d * (1.0 - z);
        const double dn_pre = dn * (1.0 - n * n);
        const double dr = dn_pre * ghn;
        const double dghn = dn_pre * r;
        const double dz_pre = dz * z * (1.0 - z);
        const double dr_pre = dr * r * (1.0 - r);
        dgi[i] = dr_pre;
        dgi[hg + i] = dz_pre;
        dgi[2 * hg + i] = dn_pre;
        dgh[i] = dr_pre;
        dgh[hg + i] = dz_pre;
        dgh[2 * hg + i] = dghn;
        dh[k] = d * z;  // carry to h_{t-1}; matrix terms added below
      }
      const double* xg_p = xt + g * xg;
      const double* hg_p = hp + g * hg;
      double* gx_p = gx.data() + static_cast<size_t>(t) * in_size + g * xg;
      double* dh_p = dh.data() + g * hg;
      for (int j = 0; j < 3 * hg; ++j) {
        const double di = dgi[j];
        const double dr = dgh[j];
        b_ih[g].g[j] += di;
        b_hh[g].g[j] += dr;
        double* wi_g = wi.g.data() + static_cast<size_t>(j) * xg;
        const double* wi_v = wi.v.data() + static_cast<size_t>(j) * xg;
        for (int i = 0; i < xg; ++i) {
          wi_g[i] += di * xg_p[i];
          gx_p[i] += di * wi_v[i];
        }
        double* wh_g = wh.g.data() + static_cast<size_t>(j) * hg;
        const double* wh_v = wh.v.data() + static_cast<size_t>(j) * hg;
        for (int i = 0; i < hg; ++i) {
          wh_g[i] += dr * hg_p[i];
          dh_p[i] += dr * wh_v[i];
        }
      }
    }
  }
  return gx;
}

void GroupedGru::collect(const std::string& prefix, std::vector<NamedParam>& out) {
  for (int g = 0; g < groups; ++g) {
    const std::string gp = prefix + ".g" + std::to_string(g);
    out.push_back({gp + ".w_ih", &w_ih[g]});
    out.push_back({gp + ".w_hh", &w_hh[g]});
    out.push_back({gp + ".b_ih", &b_ih[g]});
    out.push_back({gp + ".b_hh", &b_hh[g]});
  }
}

}  // namespace daec
