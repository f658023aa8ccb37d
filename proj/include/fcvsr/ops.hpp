#pragma once
#include <vector>

#include "fcvsr/autograd.hpp"
#include "fcvsr/frequency_ops.hpp"

namespace fcvsr::ops {

// elementwise
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var abs_v(Var a);
Var sqrt_v(Var a);

// reductions to a scalar {1}
Var mean_all(Var a);
Var sum_all(Var a);

// shape
Var concat_channels(const std::vector<Var>& xs);   // {h,w,ci} -> {h,w,sum ci}
Var slice_channels(Var x, int c0, int len);        // channels [c0, c0+len)
Var reshape(Var x, std::vector<int> shape);        // same numel

// scalars
Var stack_scalars(const std::vector<Var>& xs);     // n scalars -> {n}
Var logsumexp(Var x);                              // {n} -> {1}

// frequency-domain ops (centered spectra, see frequency_ops)
Var fft2_reim(Var x);              // {h,w,c} -> {h,w,2c}: [re(0..c-1), im(0..c-1)]
Var ifft2_reim_to_real(Var z);     // {h,w,2c} -> {h,w,c}, real part of the inverse
Var band_filter(Var x, const Tensor& mask);  // self-adjoint for real masks
Var dwt2_haar(Var x);              // {h,w,c} -> {ceil(h/2),ceil(w/2),4c}: [LL|LH|HL|HH]
Var mean_filter(Var x, int size);

// convenience
inline Tensor scalar(double x) { return Tensor::full({1}, x); }

}  // namespace fcvsr::ops
