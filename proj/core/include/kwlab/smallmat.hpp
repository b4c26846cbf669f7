#pragma once

// Small dense complex matrices (fiber dimension r, typically 1 or 2), stored
// row-major. Hot loops work on raw pointers; this header also provides the
// slower per-site utilities (exp, principal sqrt, Hermitian eigenvalues,
// inverse, condition number) used by metrics and gauge transforms.

#include <array>
#include <cmath>
#include <vector>

#include "kwlab/common.hpp"

namespace kwlab {

// c = a*b, r x r row-major
inline void mat_mul(const cplx* a, const cplx* b, cplx* c, int r) {
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            cplx s = 0.0;
            for (int k = 0; k < r; ++k) s += a[i * r + k] * b[k * r + j];
            c[i * r + j] = s;
        }
}

// c += w * a*b
inline void mat_mul_acc(const cplx* a, const cplx* b, cplx* c, int r, cplx w) {
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            cplx s = 0.0;
            for (int k = 0; k < r; ++k) s += a[i * r + k] * b[k * r + j];
            c[i * r + j] += w * s;
        }
}

inline void mat_dagger(const cplx* a, cplx* out, int r) {
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) out[i * r + j] = std::conj(a[j * r + i]);
}

inline cplx mat_trace(const cplx* a, int r) {
    cplx s = 0.0;
    for (int i = 0; i < r; ++i) s += a[i * r + i];
    return s;
}

// Re tr(a b^dagger); the fiber inner product.
inline double mat_fiber_inner(const cplx* a, const cplx* b, int r) {
    double s = 0.0;
    for (int i = 0; i < r * r; ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

inline double mat_norm2(const cplx* a, int r) { return mat_fiber_inner(a, a, r); }

struct SmallMat {
    int r = 0;
    std::vector<cplx> a;

    SmallMat() = default;
    explicit SmallMat(int r_) : r(r_), a(std::size_t(r_) * r_, cplx(0.0)) {}
    static SmallMat identity(int r_) {
        SmallMat m(r_);
        for (int i = 0; i < r_; ++i) m(i, i) = 1.0;
        return m;
    }
    cplx& operator()(int i, int j) { return a[std::size_t(i) * r + j]; }
    const cplx& operator()(int i, int j) const { return a[std::size_t(i) * r + j]; }
    cplx* data() { return a.data(); }
    const cplx* data() const { return a.data(); }
};

inline SmallMat mat_mul(const SmallMat& x, const SmallMat& y) {
    SmallMat z(x.r);
    mat_mul(x.data(), y.data(), z.data(), x.r);
    return z;
}

inline SmallMat mat_dagger(const SmallMat& x) {
    SmallMat z(x.r);
    mat_dagger(x.data(), z.data(), x.r);
    return z;
}

// Gauss-Jordan inverse with partial pivoting; throws on (near-)singular input.
SmallMat mat_inverse(const SmallMat& m);

// exp(m) by scaling-and-squaring Taylor series; fine for the small norms used here.
SmallMat mat_exp(const SmallMat& m);

// Eigenvalues of a Hermitian matrix, ascending (cyclic Jacobi).
std::vector<double> hermitian_eigenvalues(const SmallMat& m);

// Principal square root of a Hermitian positive definite matrix.
SmallMat hermitian_sqrt(const SmallMat& m);

// 2-norm condition number via eigenvalues of m^dagger m.
double mat_cond2(const SmallMat& m);

}  // namespace kwlab
