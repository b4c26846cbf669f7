#pragma once

#include <doctest.h>

#include "kwlab/solve.hpp"

namespace kwtest {

using namespace kwlab;

inline FormField const_ad1(const TorusLattice& lat, const GaugeGroup& g,
                           std::initializer_list<std::pair<int, SmallMat>> comps) {
    FormField f(lat, 1, g.rank, Herm::anti);
    f.band = 0;
    for (const auto& [mu, m] : comps)
        for (long long s = 0; s < lat.sites(); ++s)
            std::copy(m.a.begin(), m.a.end(), f.at(mu, s));
    return f;
}

inline double rel_diff(const FormField& a, const FormField& b) {
    FormField d = sub(a, b);
    return std::sqrt(l2_norm2(d) / (l2_norm2(b) + 1e-300));
}

// constant-commuting su(2) configuration plus a small band-limited
// perturbation; converges quickly under Gauss-Newton
inline FieldVec near_commuting_seed(const TorusLattice& lat, double cscale,
                                    double pamp, std::uint64_t seed) {
    auto su2 = GaugeGroup::su2();
    auto e3 = su2_basis(3);
    Rng rng(seed);
    FormField A0(lat, 1, 2, Herm::anti);
    A0.band = 0;
    FormField a0(lat, 1, 2, Herm::anti);
    a0.band = 0;
    for (long long s = 0; s < lat.sites(); ++s)
        for (int c = 0; c < 4; ++c) {
            double ca = cscale * (1.0 + 0.33 * c), cb = cscale * (0.66 - 0.16 * c);
            cplx* pA = A0.at(c, s);
            cplx* pa = a0.at(c, s);
            for (int e = 0; e < 4; ++e) {
                pA[e] = ca * e3.a[e];
                pa[e] = cb * e3.a[e];
            }
        }
    FieldVec x0;
    x0.fields = {A0, a0};
    if (pamp > 0.0) {
        FieldVec pert;
        pert.fields = {sample_ad_form(lat, su2, 1, 2, pamp, rng, Herm::anti),
                       sample_ad_form(lat, su2, 1, 2, pamp, rng, Herm::anti)};
        x0.axpy_from(1.0, pert);
    }
    return x0;
}

// rank-1 flat connection d + nu with constant part w0 and exact part d(chi)
inline FormField flat_abelian(const TorusLattice& lat, Rng& rng, int band,
                              double amp) {
    auto u1 = GaugeGroup::u1();
    FormField pot = sample_ad_form(lat, u1, 0, band, amp, rng, Herm::general);
    FormField nu = exterior_d(pot);
    for (int c = 0; c < lat.dim; ++c) {
        cplx w0 = 0.5 * rng.gauss_cplx();
        for (long long s = 0; s < lat.sites(); ++s) nu.at(c, s)[0] += w0;
    }
    nu.cls = Herm::general;
    return nu;
}

}  // namespace kwtest
