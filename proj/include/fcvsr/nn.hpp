#pragma once
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fcvsr/autograd.hpp"
#include "fcvsr/rng.hpp"
#include "fcvsr/tensor.hpp"

namespace fcvsr {

// Store values through float32 so checkpoints (f32 on disk) resume
// bit-identically.
void round_f32(Tensor& t);

using InitFn = std::function<void(Tensor&, Rng&)>;
InitFn init_zeros();
InitFn init_const(double v);
// Kaiming-style uniform over fan_in, optionally shrunk for output heads that
// should start near zero.
InitFn init_he_uniform(int fan_in, double scale = 1.0);

// Master parameter storage. Initialization is keyed by (seed, name) so the
// values do not depend on creation order; everything is f32-rounded.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed) : seed_(seed) {}

  Tensor& get_or_create(const std::string& name, const std::vector<int>& shape,
                        const InitFn& init);
  bool has(const std::string& name) const { return map_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }  // creation order
  int64_t total_params() const;
  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> map_;
};

// Per-forward bridge between the store and a tape: each named parameter gets
// exactly one leaf var per tape, so shared modules accumulate into one slot.
struct ParamContext {
  Tape& tape;
  ParamStore& store;
  bool frozen = false;  // true for inference: leaves carry no grad
  std::unordered_map<std::string, Var> cache;

  Var p(const std::string& name, const std::vector<int>& shape, const InitFn& init);
};

namespace nn {

// Reflect-padded stride-1 convolution. Weight layout {co, k, k, ci}, bias {co}.
Var conv2d(Var x, Var w, Var b);

Var prelu(Var x, Var alpha);          // alpha {c}, channel-wise
Var global_avg_pool(Var x);           // {h,w,c} -> {1,1,c}
Var channel_gate(Var x, Var gate);    // gate {1,1,c} broadcast-multiplied

Tensor bilinear_resize(const Tensor& x, int oh, int ow);  // half-pixel sampling
Var bilinear_resize(Var x, int oh, int ow);

Var pixel_shuffle(Var x, int r);      // {h,w,c*r^2} -> {h*r,w*r,c}

// out(p) = bilinear sample of x at p + offset(p); offset {h,w,2} = (dx, dy).
// Coordinates clamp to the edge; clamped samples get zero offset-gradient.
Var warp(Var x, Var offset);

// Per-pixel separable filtering: both 1-d kernels are taken at the output
// pixel, taps read with mirrored borders.
// out(y,x,ch) = sum_j kv(y,x,ch,j) * sum_i kh(y,x,ch,i) * x(y+j-r, x+i-r, ch)
Var separable_adaptive_conv(Var x, Var kv, Var kh);  // kv, kh {h,w,c,k}

// Parameterized layers (create params under `name` in the context).
Var conv_layer(ParamContext& ctx, const std::string& name, Var x, int k, int co,
               double weight_scale = 1.0);
Var prelu_layer(ParamContext& ctx, const std::string& name, Var x);
// avg-pool -> conv1x1(c->c) -> ReLU -> conv1x1(c->c) -> sigmoid -> gate
Var channel_attention(ParamContext& ctx, const std::string& name, Var x);

}  // namespace nn
}  // namespace fcvsr
