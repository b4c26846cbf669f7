#pragma once

// Mixed-radix complex FFT for the short periodic lines of the lattice
// (n <= 48 in practice: radices 4,2,3,5 plus a generic odd-prime fallback).
// forward() produces Fourier coefficients normalized by 1/n, so a field
// band-limited below Nyquist has coefficients equal to its continuum ones;
// inverse() is the plain exponential sum.
//
// transform_slab() runs the same transform over a slab of V interleaved
// lines: element (t, v) lives at data[t*row_stride + v], rows advancing along
// the transform direction. The innermost loops are contiguous in v, which is
// what makes the lattice transforms vectorize.

#include <vector>

#include "kwlab/common.hpp"

namespace kwlab {

class FftPlan {
  public:
    explicit FftPlan(int n);

    int size() const { return n_; }
    void forward(cplx* line) const { transform_slab(line, 1, 1, -1); }
    void inverse(cplx* line) const { transform_slab(line, 1, 1, +1); }
    // sign = -1 forward (1/n-normalized), +1 inverse.
    void transform_slab(cplx* data, long long row_stride, int v, int sign) const;

    struct Stage {
        int p, m;               // transform length at this depth is p*m
        std::vector<cplx> w;    // w[(q*m+u)*p + s] = exp(-2pi i (q m + u) s / (p m))
    };

    int n_;
    std::vector<Stage> stages_;
};

const FftPlan& fft_plan(int n);

// Integer wavenumber of DFT bin m on an n-point grid: 0..n/2-1, then negative.
inline int fft_wavenumber(int m, int n) { return (2 * m <= n - 1) ? m : m - n; }

// Spectral derivative multiplier ik; the Nyquist bin of an even grid is
// annihilated so real fields stay real under d. Band-limited fields never
// populate that bin; the index assembly works on the Nyquist-free subspace.
inline cplx fft_deriv_multiplier(int m, int n) {
    if (n % 2 == 0 && m == n / 2) return {0.0, 0.0};
    return {0.0, double(fft_wavenumber(m, n))};
}

}  // namespace kwlab
