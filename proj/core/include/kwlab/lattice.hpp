#pragma once

// Flat torus T^d (d = 2 or 4), side 2*pi per axis, N uniform sites per axis.
// Site index is x1-fastest: idx = x1 + N*(x2 + N*(x3 + N*x4)).
// For d = 4 the Kahler pairing is z1 = x1 + i x2, z2 = x3 + i x4 with
// omega = dx1^dx2 + dx3^dx4. The metric is flat: scalar curvature and Ricci
// are identically zero and are exposed as zero fields so curvature terms of
// the general identities can be carried explicitly.

#include <array>
#include <cmath>
#include <vector>

#include "kwlab/common.hpp"

namespace kwlab {

inline int binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return int(r);
}

struct TorusLattice {
    int dim = 4;   // 2 or 4
    int n = 8;     // sites per axis, even, >= 4

    static TorusLattice make(int dim_, int n_) {
        require(dim_ == 2 || dim_ == 4, "lattice dim must be 2 or 4");
        require(n_ >= 4 && n_ % 2 == 0, "sites per axis must be even and >= 4");
        TorusLattice l;
        l.dim = dim_;
        l.n = n_;
        return l;
    }
    // Intermediate grids used by the dealiasing rule may be odd and small.
    static TorusLattice make_unchecked(int dim_, int n_) {
        TorusLattice l;
        l.dim = dim_;
        l.n = n_;
        return l;
    }

    bool operator==(const TorusLattice& o) const { return dim == o.dim && n == o.n; }
    bool operator!=(const TorusLattice& o) const { return !(*this == o); }

    long long sites() const {
        long long s = 1;
        for (int a = 0; a < dim; ++a) s *= n;
        return s;
    }
    double spacing() const { return kTwoPi / n; }
    double volume() const { return std::pow(kTwoPi, dim); }
    double cell() const { return std::pow(spacing(), dim); }

    long long index(const std::array<int, 4>& x) const {
        long long idx = 0;
        for (int a = dim - 1; a >= 0; --a) idx = idx * n + ((x[a] % n + n) % n);
        return idx;
    }
    std::array<int, 4> coords(long long idx) const {
        std::array<int, 4> x{0, 0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            x[a] = int(idx % n);
            idx /= n;
        }
        return x;
    }
    double coordinate(int axis, int xi) const { return spacing() * xi; }

    int dealias_grid() const { return (3 * n + 1) / 2; }  // ceil(3N/2)

    // Flat metric data, housed explicitly.
    double scalar_curvature_at(long long) const { return 0.0; }
    double ricci_at(long long, int, int) const { return 0.0; }
};

}  // namespace kwlab
