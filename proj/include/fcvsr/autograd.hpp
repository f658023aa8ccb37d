#pragma once
#include <functional>
#include <vector>

#include "fcvsr/tensor.hpp"

namespace fcvsr {

class Tape;

// Handle into a Tape. Cheap to copy; lifetime bound to the tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool ok() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode tape. One tape per training step; nodes are created in forward
// order and visited strictly in reverse for backward, so gradient accumulation
// order is fixed and runs are bit-reproducible.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  Var leaf(Tensor val, bool requires_grad = false);
  Var constant(Tensor val) { return leaf(std::move(val), false); }

  // Generic node. When gradients are disabled (or no parent needs them) the
  // closure and edges are dropped and only the value is kept.
  Var make(Tensor val, std::vector<Var> parents, BackwardFn bw);

  const Tensor& val(const Var& v) const;
  bool requires_grad(const Var& v) const;

  bool has_grad(int id) const;
  const Tensor& grad(const Var& v) const;  // must exist
  // Accumulate into a node's gradient; silently ignored for nodes that do not
  // require gradients, so backward closures can push unconditionally.
  void accum(int id, const Tensor& g);
  Tensor& grad_buf(int id);  // zero-allocates on first touch

  void backward(const Var& root);  // root must be scalar

  void set_grad_enabled(bool e) { grad_enabled_ = e; }
  bool grad_enabled() const { return grad_enabled_; }
  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor val;
    Tensor grad;  // empty until first accumulation
    bool rg = false;
    std::vector<int> parents;
    BackwardFn bw;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
};

struct NoGrad {
  explicit NoGrad(Tape& t) : t_(t), prev_(t.grad_enabled()) { t_.set_grad_enabled(false); }
  ~NoGrad() { t_.set_grad_enabled(prev_); }
  NoGrad(const NoGrad&) = delete;

 private:
  Tape& t_;
  bool prev_;
};

}  // namespace fcvsr
