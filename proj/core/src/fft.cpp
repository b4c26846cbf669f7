#include "kwlab/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace kwlab {

FftPlan::FftPlan(int n) : n_(n) {
    require(n >= 1, "FFT size must be positive");
    std::vector<int> radices;
    int m = n;
    while (m % 4 == 0) { radices.push_back(4); m /= 4; }
    while (m % 2 == 0) { radices.push_back(2); m /= 2; }
    while (m % 3 == 0) { radices.push_back(3); m /= 3; }
    while (m % 5 == 0) { radices.push_back(5); m /= 5; }
    for (int p = 7; m > 1; p += 2) {
        while (m % p == 0) { radices.push_back(p); m /= p; }
    }
    int len = n;
    for (int p : radices) {
        Stage st;
        st.p = p;
        st.m = len / p;
        st.w.resize(std::size_t(len) * p);
        for (int k = 0; k < len; ++k)
            for (int s = 0; s < p; ++s) {
                long double ang = -2.0L * 3.14159265358979323846264338327950288L *
                                  ((long long)k * s % len) / len;
                st.w[std::size_t(k) * p + s] =
                    cplx(double(std::cos(ang)), double(std::sin(ang)));
            }
        len = st.m;
        stages_.push_back(std::move(st));
    }
}

namespace {

// Recursive slab transform. `in` rows are strided (row t at in + t*in_stride*V
// is WRONG in general: rows at in + t*in_stride); output rows contiguous with
// stride V. Vc values per row.
void ct_slab(const FftPlan::Stage* stages, int depth, const cplx* in,
             long long in_stride, cplx* out, int len, int Vc, int sign,
             cplx* arena) {
    if (len == 1) {
        for (int v = 0; v < Vc; ++v) out[v] = in[v];
        return;
    }
    const auto& st = stages[depth];
    const int p = st.p, m = st.m;
    if (m == 1) {
        // leaf DFT of size p straight from the strided input
        for (int q = 0; q < p; ++q) {
            cplx* dst = out + (std::size_t)q * Vc;
            const cplx* src0 = in;
            for (int v = 0; v < Vc; ++v) dst[v] = src0[v];
            for (int s = 1; s < p; ++s) {
                cplx w = st.w[(std::size_t)q * p + s];
                if (sign > 0) w = std::conj(w);
                const cplx* src = in + in_stride * s;
                const double wr = w.real(), wi = w.imag();
                for (int v = 0; v < Vc; ++v) {
                    const double sr = src[v].real(), si = src[v].imag();
                    dst[v] += cplx(wr * sr - wi * si, wr * si + wi * sr);
                }
            }
        }
        return;
    }
    cplx* sub = arena;  // p*m rows, contiguous, stride Vc
    for (int s = 0; s < p; ++s)
        ct_slab(stages, depth + 1, in + in_stride * s, in_stride * p,
                sub + (std::size_t)s * m * Vc, m, Vc, sign, arena + (std::size_t)len * Vc);
    for (int q = 0; q < p; ++q) {
        for (int u = 0; u < m; ++u) {
            const long long k = (long long)q * m + u;
            cplx* dst = out + (std::size_t)k * Vc;
            {
                const cplx* src = sub + (std::size_t)u * Vc;  // s = 0, w = 1
                for (int v = 0; v < Vc; ++v) dst[v] = src[v];
            }
            for (int s = 1; s < p; ++s) {
                cplx w = st.w[(std::size_t)k * p + s];
                if (sign > 0) w = std::conj(w);
                const cplx* src = sub + ((std::size_t)s * m + u) * Vc;
                const double wr = w.real(), wi = w.imag();
                for (int v = 0; v < Vc; ++v) {
                    const double sr = src[v].real(), si = src[v].imag();
                    dst[v] += cplx(wr * sr - wi * si, wr * si + wi * sr);
                }
            }
        }
    }
}

}  // namespace

void FftPlan::transform_slab(cplx* data, long long row_stride, int V, int sign) const {
    if (n_ == 1) {
        if (sign < 0) { /* forward of a single point is identity after 1/n */ }
        return;
    }
    constexpr int kChunk = 256;
    static thread_local std::vector<cplx> buf;
    const int depth_sz = int(stages_.size()) + 2;
    const std::size_t need = std::size_t(n_) * kChunk * depth_sz + std::size_t(n_) * kChunk;
    if (buf.size() < need) buf.resize(need);
    const double inv = 1.0 / n_;
    for (int v0 = 0; v0 < V; v0 += kChunk) {
        const int Vc = std::min(kChunk, V - v0);
        cplx* out = buf.data();
        cplx* arena = buf.data() + std::size_t(n_) * Vc;
        ct_slab(stages_.data(), 0, data + v0, row_stride, out, n_, Vc, sign, arena);
        if (sign < 0) {
            for (int t = 0; t < n_; ++t) {
                cplx* dst = data + (std::size_t)t * row_stride + v0;
                const cplx* src = out + (std::size_t)t * Vc;
                for (int v = 0; v < Vc; ++v) dst[v] = inv * src[v];
            }
        } else {
            for (int t = 0; t < n_; ++t) {
                cplx* dst = data + (std::size_t)t * row_stride + v0;
                const cplx* src = out + (std::size_t)t * Vc;
                for (int v = 0; v < Vc; ++v) dst[v] = src[v];
            }
        }
    }
}

const FftPlan& fft_plan(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<FftPlan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
    return *it->second;
}

}  // namespace kwlab
