#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "daec/error.hpp"
#include "daec/rng.hpp"

namespace daec {

// Parameter tensor: values plus an accumulated gradient of the same shape.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;
  std::vector<double> g;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    v.assign(n, 0.0);
    g.assign(n, 0.0);
  }

  size_t size() const { return v.size(); }
  void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

// Draws U(-bound, bound) quantized to float32 so that freshly initialized
// models serialize and reload bit-exactly.
inline void init_uniform(Tensor& t, double bound, Rng& rng) {
  for (double& x : t.v) {
    x = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
  }
}

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

// Activation map, layout [channels][time][freq] row-major. Gradients w.r.t.
// activations travel as separate FeatureMaps; only parameters carry .g.
struct FeatureMap {
  int c = 0, t = 0, f = 0;
  std::vector<double> v;

  FeatureMap() = default;
  FeatureMap(int c_, int t_, int f_)
      : c(c_), t(t_), f(f_), v(static_cast<size_t>(c_) * t_ * f_, 0.0) {}

  double& at(int ci, int ti, int fi) {
    return v[(static_cast<size_t>(ci) * t + ti) * f + fi];
  }
  double at(int ci, int ti, int fi) const {
    return v[(static_cast<size_t>(ci) * t + ti) * f + fi];
  }
  double* row(int ci, int ti) {
    return v.data() + (static_cast<size_t>(ci) * t + ti) * f;
  }
  const double* row(int ci, int ti) const {
    return v.data() + (static_cast<size_t>(ci) * t + ti) * f;
  }
  bool same_shape(const FeatureMap& o) const {
    return c == o.c && t == o.t && f == o.f;
  }
  void check_finite(const char* what) const {
    for (double x : v) {
      if (!std::isfinite(x)) throw NumericalError(std::string(what) + ": non-finite value");
    }
  }
};

}  // namespace daec
