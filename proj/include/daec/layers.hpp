#pragma once

#include <vector>

#include "daec/tensor.hpp"

namespace daec {

// All layers share the same contract: forward is pure, backward accumulates
// into parameter .g and returns the gradient w.r.t. the layer input. Backward
// must be handed the same input the forward saw.

constexpr double kLeakySlope = 0.2;

FeatureMap leaky_relu(const FeatureMap& x);
FeatureMap leaky_relu_backward(const FeatureMap& x, const FeatureMap& gy);

// Causal 2D convolution, kernel (2,3) over (time, freq), stride (1,2),
// freq zero-padding 1 on both sides. Frame t sees input frames t-1 and t
// only; output freq count is (fin-1)/2 + 1.
class Conv2dCausal {
 public:
  Conv2dCausal() = default;
  Conv2dCausal(int cin, int cout, Rng& rng);

  FeatureMap forward(const FeatureMap& x) const;
  FeatureMap backward(const FeatureMap& x, const FeatureMap& gy);

  static int out_freq(int fin) { return (fin - 1) / 2 + 1; }
  void collect(const std::string& prefix, std::vector<NamedParam>& out);

  int cin = 0, cout = 0;
  Tensor w;  // [cout][cin][2][3]
  Tensor b;  // [cout]
};

// Mirror of Conv2dCausal: causal kernel 2 in time, transposed stride-2
// kernel-3 in freq with padding 1, so fout = 2*fin - 1.
class ConvT2dCausal {
 public:
  ConvT2dCausal() = default;
  ConvT2dCausal(int cin, int cout, Rng& rng);

  FeatureMap forward(const FeatureMap& x) const;
  FeatureMap backward(const FeatureMap& x, const FeatureMap& gy);

  static int out_freq(int fin) { return 2 * fin - 1; }
  void collect(const std::string& prefix, std::vector<NamedParam>& out);

  int cin = 0, cout = 0;
  Tensor w;  // [cout][cin][2][3]
  Tensor b;  // [cout]
};

// Pointwise channel mix, used for skip connections, the stage bridge, and
// output heads.
class Conv1x1 {
 public:
  Conv1x1() = default;
  Conv1x1(int cin, int cout, Rng& rng);

  FeatureMap forward(const FeatureMap& x) const;
  FeatureMap backward(const FeatureMap& x, const FeatureMap& gy);
  void collect(const std::string& prefix, std::vector<NamedParam>& out);

  int cin = 0, cout = 0;
  Tensor w;  // [cout][cin]
  Tensor b;  // [cout]
};

// Grouped GRU over a [T, in_size] sequence. The feature vector splits into
// `groups` contiguous chunks, each driving an independent GRU whose hidden
// chunk is hidden/groups wide; gate convention r, z, n with
// h' = (1-z) n + z h.
class GroupedGru {
 public:
  struct Cache {
    int t_len = 0;
    std::vector<double> x;      // [T][in]
    std::vector<double> h;      // [T+1][hidden], row 0 = initial zeros
    std::vector<double> r, z, n;  // [T][hidden]
    std::vector<double> gh_n;     // [T][hidden], recurrent tanh pre-term
  };

  GroupedGru() = default;
  GroupedGru(int in_size, int hidden, int groups, Rng& rng);

  // x_seq laid out [T][in_size]; returns [T][hidden].
  std::vector<double> forward(const std::vector<double>& x_seq, int t_len,
                              Cache& cache) const;
  // gy laid out [T][hidden]; returns grad w.r.t. x_seq.
  std::vector<double> backward(const Cache& cache, const std::vector<double>& gy);
  void collect(const std::string& prefix, std::vector<NamedParam>& out);

  int in_size = 0, hidden = 0, groups = 0;
  // Per group: w_ih [3hg][xg], w_hh [3hg][hg], b_ih [3hg], b_hh [3hg].
  std::vector<Tensor> w_ih, w_hh, b_ih, b_hh;
};

}  // namespace daec
