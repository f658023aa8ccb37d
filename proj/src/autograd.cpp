#include "fcvsr/autograd.hpp"

namespace fcvsr {

Var Tape::leaf(Tensor val, bool requires_grad) {
  Node n;
  n.val = std::move(val);
  n.rg = requires_grad && grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::make(Tensor val, std::vector<Var> parents, BackwardFn bw) {
  Node n;
  n.val = std::move(val);
  if (grad_enabled_) {
    for (const Var& p : parents) {
      FCVSR_CHECK(p.tape == this, "autograd: mixing nodes from different tapes");
      if (nodes_[static_cast<size_t>(p.id)].rg) n.rg = true;
    }
    if (n.rg) {
      n.parents.reserve(parents.size());
      for (const Var& p : parents) n.parents.push_back(p.id);
      n.bw = std::move(bw);
    }
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::val(const Var& v) const {
  FCVSR_CHECK(v.tape == this && v.id >= 0 && v.id < static_cast<int>(nodes_.size()),
              "autograd: bad var handle");
  return nodes_[static_cast<size_t>(v.id)].val;
}

bool Tape::requires_grad(const Var& v) const { return nodes_[static_cast<size_t>(v.id)].rg; }

bool Tape::has_grad(int id) const { return !nodes_[static_cast<size_t>(id)].grad.v.empty(); }

const Tensor& Tape::grad(const Var& v) const {
  const Node& n = nodes_[static_cast<size_t>(v.id)];
  FCVSR_CHECK(!n.grad.v.empty(), "autograd: gradient not populated for this node");
  return n.grad;
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.v.empty()) n.grad = Tensor::zeros(n.val.shape);
  return n.grad;
}

void Tape::accum(int id, const Tensor& g) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (!n.rg) return;
  FCVSR_CHECK(g.shape == n.val.shape, "autograd: gradient shape mismatch");
  Tensor& buf = grad_buf(id);
  const size_t m = buf.v.size();
  for (size_t i = 0; i < m; ++i) buf.v[i] += g.v[i];
}

void Tape::backward(const Var& root) {
  FCVSR_CHECK(root.tape == this, "autograd: backward on a foreign tape");
  const Node& r = nodes_[static_cast<size_t>(root.id)];
  FCVSR_CHECK(r.val.numel() == 1, "autograd: backward root must be scalar");
  FCVSR_CHECK(r.rg, "autograd: backward root does not require gradients");
  grad_buf(root.id).v[0] = 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (!n.rg || n.grad.v.empty() || !n.bw) continue;
    n.bw(*this, i);
  }
}

}  // namespace fcvsr
