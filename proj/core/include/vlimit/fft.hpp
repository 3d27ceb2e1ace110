#pragma once

#include <complex>
#include <vector>

namespace vlimit::fft {

using cplx = std::complex<double>;

// In-place forward FFT of a contiguous complex array with unit-amplitude
// normalization: output k-th entry is (1/n) sum_j f_j exp(-i 2pi jk/n), so a
// pure cosine of amplitude 1 lands as 1/2 on the +/- modes.
void forward(cplx* data, int n);

// Inverse of forward(): no additional scaling beyond the plain FFTW backward
// transform (forward already divided by n).
void inverse(cplx* data, int n);

// 2D transforms on row-major [n0 x n1] complex data, same normalization
// (forward divides by n0*n1).
void forward2d(cplx* data, int n0, int n1);
void inverse2d(cplx* data, int n0, int n1);

// DST-I of n interior samples f_1..f_n of a function vanishing at both ends
// of a grid with n+1 intervals: b_m = sum_j f_j sin(pi m j/(n+1)), m=1..n.
// Self-inverse up to the factor 2/(n+1) (apply dst1 twice and scale).
void dst1(double* data, int n);

}  // namespace vlimit::fft
