#include "helpers.hpp"

using namespace kwlab;
using namespace kwtest;

TEST_CASE("metric field invariants") {
    auto lat = TorusLattice::make(4, 4);
    MetricField id = MetricField::identity(lat, 2);
    id.validate();
    CHECK(id.min_eigenvalue() == doctest::Approx(1.0));
    CHECK(id.det_defect() < 1e-14);
    MetricField bad;
    bad.h = FormField(lat, 0, 2, Herm::herm);  // zero matrix: not positive
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("build_D1: rank-1 and constant su(2) cases are flat") {
    auto lat = TorusLattice::make(4, 8);
    auto u1 = GaugeGroup::u1();
    // rank 1, theta = alpha dz1 constant, H = 1: D1 = d + alpha dz1 + conj(alpha) dzbar1
    const cplx alpha(0.4, 0.7);
    FormField carrier(lat, 1, 1, Herm::general);
    carrier.band = 0;
    for (long long s = 0; s < lat.sites(); ++s) {
        carrier.at(0, s)[0] = alpha;
        carrier.at(1, s)[0] = cplx(0, 1) * alpha;
    }
    HiggsPair p{Connection::zero(lat, u1), HiggsField{carrier}};
    MetricField id1 = MetricField::identity(lat, 1);
    FlatBundleData D1 = build_D1(p, id1);
    // coefficient = alpha dz1 + conj(alpha) dzbar1 = 2Re(alpha) dx1 - 2Im... check flatness
    FormField F = exterior_d(D1.conn);
    axpy(F, 1.0, wedge_mult(D1.conn, D1.conn));
    CHECK(std::sqrt(l2_norm2(F)) < 1e-13);
    // expected dx-components: alpha + conj(alpha), i(alpha - conj(alpha))
    CHECK(std::abs(D1.conn.at(0, 0)[0] - 2.0 * alpha.real()) < 1e-14);

    // su(2) constant commuting pair with H = 1: flat
    auto g = GaugeGroup::su2();
    auto e3 = su2_basis(3);
    FormField c2(lat, 1, 2, Herm::general);
    c2.band = 0;
    for (long long s = 0; s < lat.sites(); ++s)
        for (int i = 0; i < 4; ++i) {
            c2.at(0, s)[i] = 0.3 * e3.a[i];
            c2.at(1, s)[i] = cplx(0, 0.3) * e3.a[i];
        }
    HiggsPair p2{Connection::zero(lat, g), HiggsField{c2}};
    FlatBundleData D2 = build_D1(p2, MetricField::identity(lat, 2));
    FormField F2 = exterior_d(D2.conn);
    axpy(F2, 1.0, wedge_mult(D2.conn, D2.conn));
    CHECK(std::sqrt(l2_norm2(F2)) < 1e-13);

    // non-positive H rejected
    MetricField bad;
    bad.h = FormField(lat, 0, 1, Herm::herm);
    CHECK_THROWS_AS(build_D1(p, bad), PreconditionError);
}

TEST_CASE("build_D1 curvature equals the independent expansion for random H") {
    // exact Higgs data (constant commuting), random well-resolved metric;
    // the curvature of D^1_h must match
    // F^{1,1}_h + [theta, theta*_h] + del_h theta + dbar theta*_h
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    Rng rng(11);
    auto e3 = su2_basis(3);
    FormField th(lat, 1, 2, Herm::general);
    th.band = 0;
    for (long long s = 0; s < lat.sites(); ++s)
        for (int i = 0; i < 4; ++i) {
            th.at(0, s)[i] = 0.5 * e3.a[i];
            th.at(2, s)[i] = 0.2 * e3.a[i];
            th.at(1, s)[i] = cplx(0, 0.5) * e3.a[i];
            th.at(3, s)[i] = cplx(0, 0.2) * e3.a[i];
        }
    HiggsPair p{Connection::zero(lat, g), HiggsField{th}};
    MetricField Hm;
    Hm.h = pointwise_exp(sample_ad_form(lat, g, 0, 1, 0.1, rng, Herm::herm));
    FlatBundleData D1 = build_D1(p, Hm);
    FormField got = exterior_d(D1.conn);
    axpy(got, 1.0, wedge_mult(D1.conn, D1.conn));
    // independent expansion
    FormField Hinv = pointwise_inverse(Hm.h);
    FormField a01(lat, 1, 2, Herm::general);
    a01.band = 0;
    FormField b = chern_10_coefficient(a01, Hm.h, Hinv);
    Connection Dh(g, b);
    FormField Fh = curvature(Dh);
    FormField ts = metric_adjoint(th, Hm.h, Hinv);
    FormField br = graded_combo(th, ts, 1.0, 1.0);
    auto [del_th, dbar_th] = dolbeault_d(Dh, th);
    auto [del_ts, dbar_ts] = dolbeault_d(Dh, ts);
    FormField expect = add(add(pq_project(Fh, 1, 1), br), add(del_th, dbar_ts));
    CHECK(rel_diff(got, expect) < 1e-11);
}

TEST_CASE("decompose_flat and reconstruction") {
    auto lat = TorusLattice::make(4, 8);
    auto u1 = GaugeGroup::u1();
    // rank 1: nu = (a + i b) dx1 constant, H = 1: theta = (a/2) dz1
    const double aa = 0.8, bb = -0.3;
    FormField nu(lat, 1, 1, Herm::general);
    nu.band = 0;
    for (long long s = 0; s < lat.sites(); ++s) nu.at(0, s)[0] = cplx(aa, bb);
    FlatBundleData f{u1, nu};
    MetricField id1 = MetricField::identity(lat, 1);
    FlatDecomposition dec = decompose_flat(f, id1);
    CHECK(std::abs(dec.unitary_coeff.at(0, 0)[0] - cplx(0.0, bb)) < 1e-14);
    CHECK(std::abs(dec.selfadjoint.at(0, 0)[0] - aa) < 1e-14);
    CHECK(std::abs(dec.theta.at(0, 0)[0] - 0.5 * aa) < 1e-14);
    CHECK(dec.recomposition_defect < 1e-13);
    CHECK(dec.unitarity_defect < 1e-12);
    // already unitary input: Theta = 0
    FormField nu2 = scaled(herm_part(nu), cplx(0, 1));
    FlatDecomposition dec2 = decompose_flat(FlatBundleData{u1, nu2}, id1);
    CHECK(std::sqrt(l2_norm2(dec2.selfadjoint)) < 1e-13);
    // round trip on random data and random metric
    Rng rng(4);
    auto g = GaugeGroup::su2();
    FormField nur = sample_ad_form(lat, g, 1, 1, 0.4, rng, Herm::general);
    MetricField Hm;
    Hm.h = pointwise_exp(sample_ad_form(lat, g, 0, 1, 0.1, rng, Herm::herm));
    FlatDecomposition dec3 = decompose_flat(FlatBundleData{g, nur}, Hm);
    CHECK(dec3.recomposition_defect < 1e-12);
    // Chern reconstruction reproduces nu identically (any H)
    CHECK(rel_diff(rebuild_d1(dec3, Hm), nur) < 1e-10);
}

TEST_CASE("lambda connections: endpoints, Leibniz, rank-1 grid") {
    auto lat = TorusLattice::make(4, 8);
    auto u1 = GaugeGroup::u1();
    Rng rng(6);
    // constant rank-1 pair
    FormField carrier(lat, 1, 1, Herm::general);
    carrier.band = 0;
    for (long long s = 0; s < lat.sites(); ++s) {
        carrier.at(0, s)[0] = cplx(0.6, 0.2);
        carrier.at(1, s)[0] = cplx(-0.2, 0.6);
    }
    HiggsPair p{Connection::zero(lat, u1), HiggsField{carrier}};
    MetricField id1 = MetricField::identity(lat, 1);
    // lambda = 1 coincides with build_D1 bit-exactly
    LambdaConnection L1 = lambda_connection(p, id1, cplx(1, 0));
    FlatBundleData D1 = build_D1(p, id1);
    CHECK(L1.coefficient().data == D1.conn.data);
    // lambda = 0 is the Higgs operator: flatness reduces to the Higgs blocks
    LambdaConnection L0 = lambda_connection(p, id1, cplx(0, 0));
    CHECK(flatness_defect(L0) < 1e-12);
    // rank-1 constants: flat for 9 sampled lambda values
    for (int i = 0; i < 9; ++i) {
        cplx lam(-1.0 + (i % 3), -1.0 + (i / 3));
        CHECK(flatness_defect(lambda_connection(p, id1, lam)) < 1e-10);
    }
    // Leibniz rule of the smooth lambda-operator
    LambdaConnection Lz = lambda_connection(p, id1, cplx(0.4, -0.2));
    FormField fs = sample_ad_form(lat, u1, 0, 1, 0.7, rng, Herm::general);
    FormField sec = sample_ad_form(lat, u1, 0, 1, 0.7, rng, Herm::general);
    auto lc = lambda_leibniz_check(Lz, fs, sec);
    CHECK(lc.full < 1e-12);
    CHECK(lc.restricted_10 < 1e-12);
}

TEST_CASE("rank-1 harmonic oracle") {
    auto lat = TorusLattice::make(4, 8);
    auto u1 = GaugeGroup::u1();
    // constant input is already harmonic: H = 1
    FormField nu(lat, 1, 1, Herm::general);
    nu.band = 0;
    for (long long s = 0; s < lat.sites(); ++s) nu.at(0, s)[0] = cplx(2.0, 3.0);
    Rank1Oracle orc = rank1_harmonic_oracle(FlatBundleData{u1, nu});
    CHECK(max_abs(sub(orc.H.h, MetricField::identity(lat, 1).h)) < 1e-13);
    CHECK(orc.d0_defect < 1e-12);
    CHECK(orc.rebuild_defect < 1e-12);
    // theta = (1,0) part of the real constant: Re(2+3i)/2 dz1 -> coefficient 1
    CHECK(std::abs(orc.pair.phi.carrier.at(0, 0)[0] - 1.0) < 1e-12);

    // unitary input: Theta = 0, Higgs field 0
    FormField nu2(lat, 1, 1, Herm::general);
    nu2.band = 0;
    for (long long s = 0; s < lat.sites(); ++s) nu2.at(1, s)[0] = cplx(0, 1);
    Rank1Oracle orc2 = rank1_harmonic_oracle(FlatBundleData{u1, nu2});
    CHECK(max_abs(orc2.pair.phi.carrier) < 1e-13);

    // nu = d(sin x1)(1+i) at a resolution that resolves exp(2 sin x1):
    // H recovers the exp(2 sin x1)-type profile and D0 is flat
    auto lat32 = TorusLattice::make(4, 32);
    FormField nu3(lat32, 1, 1, Herm::general);
    for (long long s = 0; s < lat32.sites(); ++s) {
        auto c = lat32.coords(s);
        nu3.at(0, s)[0] = cplx(1.0, 1.0) * std::cos(lat32.coordinate(0, c[0]));
    }
    nu3.band = 1;
    Rank1Oracle orc3 = rank1_harmonic_oracle(FlatBundleData{u1, nu3});
    CHECK(orc3.d0_defect < 1e-9);
    CHECK(orc3.rebuild_defect < 1e-9);
    double hmax = 0.0;
    for (long long s = 0; s < lat32.sites(); ++s)
        hmax = std::max(hmax, orc3.H.h.at(0, s)[0].real());
    CHECK(hmax == doctest::Approx(std::exp(2.0)).epsilon(1e-6));

    // involution on random constant-mode inputs: Higgs -> flat -> Higgs
    Rng rng(14);
    for (int trial = 0; trial < 3; ++trial) {
        FormField nuc(lat, 1, 1, Herm::general);
        nuc.band = 0;
        for (int c = 0; c < 4; ++c) {
            cplx w = rng.gauss_cplx();
            for (long long s = 0; s < lat.sites(); ++s) nuc.at(c, s)[0] = w;
        }
        Rank1Oracle o = rank1_harmonic_oracle(FlatBundleData{u1, nuc});
        FlatBundleData re = build_D1(o.pair, MetricField::identity(lat, 1));
        Rank1Oracle o2 = rank1_harmonic_oracle(re);
        // gauge-invariant observables agree
        CHECK(std::abs(l2_norm2(o.pair.phi.carrier) - l2_norm2(o2.pair.phi.carrier)) /
                  (l2_norm2(o.pair.phi.carrier) + 1e-30) < 1e-10);
    }
    // non-flat input rejected
    Rng rng2(3);
    auto bad = sample_ad_form(lat, u1, 1, 2, 0.5, rng2, Herm::general);
    CHECK_THROWS_AS(rank1_harmonic_oracle(FlatBundleData{u1, bad}), PreconditionError);
}

TEST_CASE("holonomy diagnostics on abelian constants") {
    auto lat = TorusLattice::make(4, 8);
    auto u1 = GaugeGroup::u1();
    FormField nu(lat, 1, 1, Herm::general);
    nu.band = 0;
    const cplx w0(0.25, -0.45);
    for (long long s = 0; s < lat.sites(); ++s) nu.at(0, s)[0] = w0;
    HolonomyDiagnostics hol = holonomy_diagnostics(FlatBundleData{u1, nu});
    // U_1 = exp(-2 pi w0), other loops trivial
    cplx expect = std::exp(-kTwoPi * w0);
    CHECK(std::abs(hol.loops[0].a[0] - expect) < 1e-8);
    CHECK(std::abs(hol.loops[1].a[0] - 1.0) < 1e-10);
    CHECK(hol.max_commutator < 1e-10);
}
