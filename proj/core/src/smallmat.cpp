#include "kwlab/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kwlab {

SmallMat mat_inverse(const SmallMat& m) {
    const int r = m.r;
    SmallMat a = m;
    SmallMat inv = SmallMat::identity(r);
    for (int col = 0; col < r; ++col) {
        int piv = col;
        double best = std::abs(a(col, col));
        for (int i = col + 1; i < r; ++i)
            if (std::abs(a(i, col)) > best) { best = std::abs(a(i, col)); piv = i; }
        if (best < 1e-300) throw RuntimeError("mat_inverse: singular matrix");
        if (piv != col)
            for (int j = 0; j < r; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        cplx d = a(col, col);
        for (int j = 0; j < r; ++j) { a(col, j) /= d; inv(col, j) /= d; }
        for (int i = 0; i < r; ++i) {
            if (i == col) continue;
            cplx f = a(i, col);
            if (f == cplx(0.0)) continue;
            for (int j = 0; j < r; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

SmallMat mat_exp(const SmallMat& m) {
    const int r = m.r;
    double nrm = 0.0;
    for (const auto& v : m.a) nrm = std::max(nrm, std::abs(v));
    int s = 0;
    while (nrm > 0.5) { nrm *= 0.5; ++s; }
    SmallMat x = m;
    if (s > 0) {
        double f = std::ldexp(1.0, -s);
        for (auto& v : x.a) v *= f;
    }
    SmallMat sum = SmallMat::identity(r);
    SmallMat term = SmallMat::identity(r);
    for (int k = 1; k <= 18; ++k) {
        term = mat_mul(term, x);
        for (auto& v : term.a) v *= 1.0 / k;
        for (std::size_t i = 0; i < sum.a.size(); ++i) sum.a[i] += term.a[i];
    }
    for (int i = 0; i < s; ++i) sum = mat_mul(sum, sum);
    return sum;
}

std::vector<double> hermitian_eigenvalues(const SmallMat& m) {
    const int r = m.r;
    SmallMat a = m;
    // cyclic Jacobi with complex rotations
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < r; ++p)
            for (int q = p + 1; q < r; ++q) off += std::norm(a(p, q));
        if (off < 1e-30) break;
        for (int p = 0; p < r; ++p)
            for (int q = p + 1; q < r; ++q) {
                cplx apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = a(p, p).real(), aqq = a(q, q).real();
                // diagonalize the 2x2 Hermitian block [[app, apq],[conj(apq), aqq]]
                double theta = 0.5 * std::atan2(2.0 * std::abs(apq), aqq - app);
                double c = std::cos(theta), s = std::sin(theta);
                cplx phase = apq / std::abs(apq);
                // rotation: p' = c p + s*conj(phase)... apply two-sided
                for (int k = 0; k < r; ++k) {
                    cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * std::conj(phase) * akq;
                    a(k, q) = s * phase * akp + c * akq;
                }
                for (int k = 0; k < r; ++k) {
                    cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * phase * aqk;
                    a(q, k) = s * std::conj(phase) * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(r);
    for (int i = 0; i < r; ++i) ev[i] = a(i, i).real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

SmallMat hermitian_sqrt(const SmallMat& m) {
    const int r = m.r;
    // Denman-Beavers iteration; robust for well-conditioned HPD input.
    SmallMat y = m;
    SmallMat z = SmallMat::identity(r);
    for (int it = 0; it < 60; ++it) {
        SmallMat yi = mat_inverse(y);
        SmallMat zi = mat_inverse(z);
        SmallMat yn(r), zn(r);
        for (std::size_t i = 0; i < yn.a.size(); ++i) {
            yn.a[i] = 0.5 * (y.a[i] + zi.a[i]);
            zn.a[i] = 0.5 * (z.a[i] + yi.a[i]);
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < yn.a.size(); ++i) diff = std::max(diff, std::abs(yn.a[i] - y.a[i]));
        y = yn;
        z = zn;
        if (diff < 1e-15) break;
    }
    // clean up to exactly Hermitian
    SmallMat yd = mat_dagger(y);
    for (std::size_t i = 0; i < y.a.size(); ++i) y.a[i] = 0.5 * (y.a[i] + yd.a[i]);
    return y;
}

double mat_cond2(const SmallMat& m) {
    SmallMat mtm = mat_mul(mat_dagger(m), m);
    auto ev = hermitian_eigenvalues(mtm);
    double lo = std::max(ev.front(), 0.0), hi = std::max(ev.back(), 0.0);
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

}  // namespace kwlab
