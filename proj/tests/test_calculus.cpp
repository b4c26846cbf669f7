#include "helpers.hpp"

using namespace kwlab;
using namespace kwtest;

TEST_CASE("exterior_d: analytic modes and nilpotency") {
    auto lat = TorusLattice::make(4, 8);
    FormField f(lat, 1, 1);
    for (long long s = 0; s < lat.sites(); ++s) {
        auto c = lat.coords(s);
        f.scalar(1, s) = std::sin(lat.coordinate(0, c[0]));
    }
    f.band = 1;
    FormField df = exterior_d(f);
    double err = 0;
    for (long long s = 0; s < lat.sites(); ++s) {
        auto c = lat.coords(s);
        err = std::max(err, std::abs(df.scalar(0, s) - std::cos(lat.coordinate(0, c[0]))));
        for (int cc = 1; cc < 6; ++cc) err = std::max(err, std::abs(df.scalar(cc, s)));
    }
    CHECK(err < 1e-13);

    // d of a constant 0-form is zero
    FormField c0(lat, 0, 1);
    for (long long s = 0; s < lat.sites(); ++s) c0.scalar(0, s) = 2.7;
    CHECK(max_abs(exterior_d(c0)) < 1e-14);

    // d d = 0 on a random band-limited 0-form
    Rng rng(4);
    auto g = sample_ad_form(lat, GaugeGroup::u1(), 0, 3, 1.0, rng, Herm::general);
    CHECK(max_abs(exterior_d(exterior_d(g))) / max_abs(g) < 1e-12);

    CHECK_THROWS_AS(exterior_d(FormField(lat, 4, 1)), PreconditionError);
}

TEST_CASE("hodge star: basis actions and involution sign") {
    auto lat = TorusLattice::make(4, 4);
    FormField dx1(lat, 1, 1);
    for (long long s = 0; s < lat.sites(); ++s) dx1.scalar(0, s) = 1.0;
    FormField st = hodge_star(dx1);  // dx2^dx3^dx4 = component (1,2,3)
    CHECK(std::abs(st.scalar(form_comp_index(4, 3, {1, 2, 3}), 0) - 1.0) < 1e-15);
    // *(volume form) = 1
    FormField vol(lat, 4, 1);
    for (long long s = 0; s < lat.sites(); ++s) vol.scalar(0, s) = 1.0;
    CHECK(std::abs(hodge_star(vol).scalar(0, 0) - 1.0) < 1e-15);
    // ** on a random 2-form
    Rng rng(9);
    auto f2 = sample_ad_form(lat, GaugeGroup::su2(), 2, 1, 1.0, rng, Herm::anti);
    CHECK(rel_diff(hodge_star(hodge_star(f2)), f2) < 1e-15);
    // ** = -1 on 1-forms
    auto f1 = sample_ad_form(lat, GaugeGroup::u1(), 1, 1, 1.0, rng, Herm::anti);
    CHECK(rel_diff(hodge_star(hodge_star(f1)), scaled(f1, -1.0)) < 1e-15);
}

TEST_CASE("sd/asd projections") {
    auto lat = TorusLattice::make(4, 4);
    FormField f(lat, 2, 1);
    for (long long s = 0; s < lat.sites(); ++s) f.scalar(0, s) = 1.0;  // dx1^dx2
    FormField fp = sd_asd_project(f, +1);
    CHECK(std::abs(fp.scalar(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(fp.scalar(5, 0) - 0.5) < 1e-15);
    // omega is self-dual
    FormField om(lat, 2, 1);
    for (long long s = 0; s < lat.sites(); ++s) {
        om.scalar(0, s) = 1.0;
        om.scalar(5, s) = 1.0;
    }
    CHECK(max_abs(sd_asd_project(om, -1)) < 1e-15);
    // direct sum on random input
    Rng rng(3);
    auto g = sample_ad_form(lat, GaugeGroup::su2(), 2, 1, 1.0, rng, Herm::anti);
    FormField sum = add(sd_asd_project(g, +1), sd_asd_project(g, -1));
    CHECK(rel_diff(sum, g) < 1e-15);
    CHECK(max_abs(sd_asd_project(sd_asd_project(g, +1), -1)) / max_abs(g) < 1e-15);
    CHECK_THROWS_AS(sd_asd_project(FormField(TorusLattice::make(2, 4), 2, 1), +1),
                    PreconditionError);
}

TEST_CASE("pq decomposition") {
    auto lat = TorusLattice::make(4, 4);
    FormField dx1(lat, 1, 1);
    for (long long s = 0; s < lat.sites(); ++s) dx1.scalar(0, s) = 1.0;
    FormField p10 = pq_project(dx1, 1, 0);  // (1/2) dz1 = (1/2, i/2, 0, 0)
    CHECK(std::abs(p10.scalar(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(p10.scalar(1, 0) - cplx(0, 0.5)) < 1e-15);
    // parts sum to the field
    Rng rng(5);
    auto f = sample_ad_form(lat, GaugeGroup::su2(), 2, 1, 1.0, rng, Herm::anti);
    FormField sum(lat, 2, 2);
    for (const auto& part : pq_decompose(f)) axpy(sum, 1.0, part.part);
    CHECK(rel_diff(sum, f) < 1e-14);
    // dz1^dz2 is pure (2,0) and its anti-self-dual part vanishes (brute force
    // membership of Lambda^{2,0} in the complexified self-dual space)
    FormField z12(lat, 2, 1);
    // dz1^dz2 = (dx1 + i dx2)^(dx3 + i dx4)
    for (long long s = 0; s < lat.sites(); ++s) {
        z12.scalar(form_comp_index(4, 2, {0, 2}), s) = 1.0;
        z12.scalar(form_comp_index(4, 2, {0, 3}), s) = cplx(0, 1);
        z12.scalar(form_comp_index(4, 2, {1, 2}), s) = cplx(0, 1);
        z12.scalar(form_comp_index(4, 2, {1, 3}), s) = -1.0;
    }
    CHECK(rel_diff(pq_project(z12, 2, 0), z12) < 1e-14);
    CHECK(max_abs(sd_asd_project(z12, -1)) < 1e-14);
    // reality: (2,0) part conjugate to (0,2) part for a real 2-form
    FormField fr = f;
    for (auto& v : fr.data) v = v.real();
    FormField c20 = pq_project(fr, 2, 0), c02 = pq_project(fr, 0, 2);
    FormField conj02 = c02;
    for (auto& v : conj02.data) v = std::conj(v);
    CHECK(rel_diff(c20, conj02) < 1e-13);
}

TEST_CASE("lambda contraction") {
    auto lat = TorusLattice::make(4, 8);
    FormField om(lat, 2, 1);
    for (long long s = 0; s < lat.sites(); ++s) {
        om.scalar(0, s) = 1.0;
        om.scalar(5, s) = 1.0;
    }
    CHECK(std::abs(lambda_contract(om).scalar(0, 0) - 2.0) < 1e-15);
    // (2,0) forms are primitive
    Rng rng(6);
    auto f = sample_ad_form(lat, GaugeGroup::su2(), 2, 2, 1.0, rng, Herm::anti);
    CHECK(max_abs(lambda_contract(pq_project(f, 2, 0))) / max_abs(f) < 1e-14);
    // adjointness <Lambda f, u> = <f, u w>
    auto u = sample_ad_form(lat, GaugeGroup::su2(), 0, 1, 1.0, rng, Herm::anti);
    FormField uw(lat, 2, 2);
    const long long nn = lat.sites() * 4;
    for (long long i = 0; i < nn; ++i) {
        uw.data[std::size_t(form_comp_index(4, 2, {0, 1})) * nn + i] = u.data[i];
        uw.data[std::size_t(form_comp_index(4, 2, {2, 3})) * nn + i] = u.data[i];
    }
    double lhs = l2_inner_re(lambda_contract(f), u);
    double rhs = l2_inner_re(f, uw);
    CHECK(std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30) < 1e-12);
}

TEST_CASE("l2 inner product and quadrature exactness") {
    auto lat = TorusLattice::make(4, 8);
    FormField dx1(lat, 1, 1), dx2(lat, 1, 1);
    for (long long s = 0; s < lat.sites(); ++s) {
        dx1.scalar(0, s) = 1.0;
        dx2.scalar(1, s) = 1.0;
    }
    CHECK(std::abs(l2_inner(dx1, dx1) - std::pow(kTwoPi, 4)) < 1e-9);
    CHECK(std::abs(l2_inner(dx1, dx2)) < 1e-12);
    // spectral adjointness <df, g> = <f, d* g>
    Rng rng(8);
    auto f = sample_ad_form(lat, GaugeGroup::u1(), 0, 2, 1.0, rng, Herm::general);
    auto g = sample_ad_form(lat, GaugeGroup::u1(), 1, 2, 1.0, rng, Herm::general);
    Connection zero = Connection::zero(lat, GaugeGroup::u1());
    cplx lhs = l2_inner(exterior_d(f), g);
    cplx rhs = l2_inner(f, covariant_d_adjoint(zero, g));
    CHECK(std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30) < 1e-12);
    // quadrature of a band-limited product vs 2x oversampling
    auto u = sample_ad_form(lat, GaugeGroup::u1(), 0, 3, 1.0, rng, Herm::general);
    auto v = sample_ad_form(lat, GaugeGroup::u1(), 0, 3, 1.0, rng, Herm::general);
    cplx direct = l2_inner(u, v);
    cplx over = l2_inner(resample(u, 16), resample(v, 16));
    CHECK(std::abs(direct - over) / std::abs(direct) < 1e-13);
    CHECK_THROWS_AS(l2_inner(f, FormField(TorusLattice::make(4, 4), 0, 1)),
                    PreconditionError);
}

TEST_CASE("kahler linear identity against brute-force 6x6 matrices") {
    // *f = -f + (Lambda f) omega on (1,1)-forms, checked entrywise in the
    // 6-dimensional 2-form component space
    auto lat = TorusLattice::make(4, 4);
    for (int col = 0; col < 6; ++col) {
        FormField e(lat, 2, 1);
        for (long long s = 0; s < lat.sites(); ++s) e.scalar(col, s) = 1.0;
        FormField f11 = pq_project(e, 1, 1);
        FormField lhs = hodge_star(f11);
        FormField rhs = scaled(f11, -1.0);
        FormField lam = lambda_contract(f11);
        const long long nn = lat.sites();
        for (long long i = 0; i < nn; ++i) {
            rhs.data[std::size_t(form_comp_index(4, 2, {0, 1})) * nn + i] += lam.data[i];
            rhs.data[std::size_t(form_comp_index(4, 2, {2, 3})) * nn + i] += lam.data[i];
        }
        CHECK(max_abs(sub(lhs, rhs)) < 1e-14);
    }
}

TEST_CASE("dealiasing: fast path equals padded path when certified") {
    auto lat = TorusLattice::make(4, 8);
    Rng rng(12);
    auto f = sample_ad_form(lat, GaugeGroup::su2(), 1, 1, 0.7, rng, Herm::anti);
    auto g = sample_ad_form(lat, GaugeGroup::su2(), 1, 2, 0.7, rng, Herm::anti);
    FormField fast = wedge_mult(f, g, Dealias::automatic);
    FormField padded = wedge_mult(f, g, Dealias::padded);
    CHECK(rel_diff(fast, padded) < 1e-13);
    CHECK(fast.band == 3);
}

TEST_CASE("resample round trip and embedding adjointness") {
    auto lat = TorusLattice::make(4, 8);
    Rng rng(2);
    auto f = sample_ad_form(lat, GaugeGroup::su2(), 1, 3, 1.0, rng, Herm::anti);
    CHECK(rel_diff(resample(resample(f, 12), 8), f) < 1e-14);
    // <P u, v>_N = <u, E v>_M
    auto u = sample_ad_form(TorusLattice::make_unchecked(4, 12), GaugeGroup::su2(), 1,
                            5, 1.0, rng, Herm::anti);
    auto v = sample_ad_form(lat, GaugeGroup::su2(), 1, 3, 1.0, rng, Herm::anti);
    double lhs = l2_inner_re(resample(u, 8), v);
    double rhs = l2_inner_re(u, resample(v, 12));
    CHECK(std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30) < 1e-12);
}
