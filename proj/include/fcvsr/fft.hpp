#pragma once
#include <complex>
#include <vector>

namespace fcvsr::fft {

using cd = std::complex<double>;

// In-place 1-d transform. Forward is unnormalized, inverse applies 1/n.
// Radix-2 for powers of two, direct DFT with cached twiddles otherwise.
void fft_inplace(cd* a, int n, bool inverse);

// Row-major h*w plane, both dimensions transformed.
void fft2(std::vector<cd>& plane, int h, int w, bool inverse);

// Move DC to (h/2, w/2) and back. For even sizes these coincide.
void fftshift2(std::vector<cd>& plane, int h, int w);
void ifftshift2(std::vector<cd>& plane, int h, int w);

}  // namespace fcvsr::fft
