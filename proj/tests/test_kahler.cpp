#include "helpers.hpp"

using namespace kwlab;
using namespace kwtest;

namespace {
HiggsPair random_pair(const TorusLattice& lat, const GaugeGroup& g, Rng& rng,
                      double amp, int band) {
    Connection A(g, sample_ad_form(lat, g, 1, band, amp, rng, Herm::anti));
    auto a = sample_ad_form(lat, g, 1, band, amp, rng, Herm::anti);
    return HiggsPair{A, split_a(a)};
}
}  // namespace

TEST_CASE("split and compose") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    // a = e1 dx1 -> phi = (1/2) e1 dz1
    auto e1 = su2_basis(1);
    FormField a = const_ad1(lat, g, {{0, e1}});
    HiggsField phi = split_a(a);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(phi.carrier.at(0, 0)[i] - 0.5 * e1.a[i]) < 1e-15);
        CHECK(std::abs(phi.carrier.at(1, 0)[i] - cplx(0, 0.5) * e1.a[i]) < 1e-15);
    }
    CHECK(phi.purity_defect() < 1e-14);
    // round trip on random fields
    Rng rng(5);
    auto ar = sample_ad_form(lat, g, 1, 2, 0.6, rng, Herm::anti);
    CHECK(rel_diff(compose_a(split_a(ar)), ar) < 1e-14);
    // trace-free in, trace-free out
    CHECK(trace_defect(split_a(ar).carrier) < 1e-13);
    // non-anti-Hermitian input rejected
    CHECK_THROWS_AS(split_a(herm_part(scaled(ar, cplx(0, 1)))), PreconditionError);
}

TEST_CASE("residual_simpson examples") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    auto u1 = GaugeGroup::u1();
    // abelian-like constant (1,0) field: all blocks vanish
    FormField phic(lat, 1, 1, Herm::general);
    phic.band = 0;
    for (long long s = 0; s < lat.sites(); ++s) {
        phic.at(0, s)[0] = 0.5;              // (1/2) e dz1 carrier: dx1 slot
        phic.at(1, s)[0] = cplx(0, 0.5);     // i/2 in dx2 slot
    }
    HiggsPair p1{Connection::zero(lat, u1), HiggsField{phic}};
    CHECK(residual_simpson(p1).total < 1e-26);

    // su(2): phi = e1 dz1 + e2 dz2 -> phi^phi block = [e1,e2] dz1^dz2
    auto e1 = su2_basis(1), e2 = su2_basis(2);
    FormField carrier(lat, 1, 2, Herm::general);
    carrier.band = 0;
    for (long long s = 0; s < lat.sites(); ++s)
        for (int i = 0; i < 4; ++i) {
            carrier.at(0, s)[i] = e1.a[i];
            carrier.at(1, s)[i] = cplx(0, 1) * e1.a[i];
            carrier.at(2, s)[i] = e2.a[i];
            carrier.at(3, s)[i] = cplx(0, 1) * e2.a[i];
        }
    HiggsPair p2{Connection::zero(lat, g), HiggsField{carrier}};
    ResidualReport rep = residual_simpson(p2);
    CHECK(rep.block_norm2("phi_phi") > 0.1);
    CHECK(rep.block_norm2("F02") < 1e-26);
    CHECK(rep.block_norm2("dbar_phi") < 1e-26);
}

TEST_CASE("type decomposition ties the 4d real systems to the Kahler blocks") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    Rng rng(7);
    HiggsPair p = random_pair(lat, g, rng, 0.4, 1);
    FormField a = compose_a(p.phi);
    FormField W = wedge_mult(a, a);
    FormField G = sub(curvature(p.A), W);
    FormField D = covariant_d(p.A, a);
    FormField F = curvature(p.A);
    FormField ps = phi_star(p.phi);
    FormField phiphi = wedge_mult(p.phi.carrier, p.phi.carrier);
    FormField br = graded_combo(p.phi.carrier, ps, 1.0, 1.0);
    FormField dphi = covariant_d(p.A, p.phi.carrier);
    FormField dps = covariant_d(p.A, ps);

    // G types
    CHECK(rel_diff(pq_project(G, 2, 0), sub(pq_project(F, 2, 0), phiphi)) < 1e-12);
    CHECK(rel_diff(pq_project(G, 1, 1), add(pq_project(F, 1, 1), br)) < 1e-12);
    CHECK(rel_diff(pq_project(G, 0, 2),
                   sub(pq_project(F, 0, 2), wedge_mult(ps, ps))) < 1e-12);
    // D types: (2,0) = del phi ; (1,1) = dbar phi - del phi* ; (0,2) = -dbar phi*
    CHECK(rel_diff(pq_project(D, 2, 0), pq_project(dphi, 2, 0)) < 1e-12);
    CHECK(rel_diff(pq_project(D, 1, 1),
                   sub(pq_project(dphi, 1, 1), pq_project(dps, 1, 1))) < 1e-12);
    CHECK(rel_diff(pq_project(D, 0, 2), scaled(pq_project(dps, 0, 2), -1.0)) < 1e-12);
    // SD recombination: G+ = G20 + G02 + (Lambda G / 2) omega
    FormField gplus = sd_asd_project(G, +1);
    FormField rec = add(pq_project(G, 2, 0), pq_project(G, 0, 2));
    FormField lam = lambda_contract(G);
    const long long nn = lat.sites() * 4;
    for (long long i = 0; i < nn; ++i) {
        rec.data[std::size_t(form_comp_index(4, 2, {0, 1})) * nn + i] += 0.5 * lam.data[i];
        rec.data[std::size_t(form_comp_index(4, 2, {2, 3})) * nn + i] += 0.5 * lam.data[i];
    }
    CHECK(rel_diff(gplus, rec) < 1e-12);
    // simpson = 0 at a Kahler zero implies t0 = 0 (algebraic recombination):
    // here probed contrapositively at random fields through the recombinations
    ResidualReport rs = residual_simpson(p);
    ResidualReport r0 = residual_t0(p.A, a);
    CHECK(r0.total <= 8.0 * (rs.total + l2_norm2(pq_project(D, 2, 0)) +
                             l2_norm2(sub(pq_project(dphi, 1, 1),
                                          pq_project(dps, 1, 1)))));
}

TEST_CASE("tneq0 Kahler system and the forward inequality") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    Rng rng(9);
    // constant commuting diagonal Higgs with phi^phi = 0: zero of the system
    FormField carrier(lat, 1, 2, Herm::general);
    carrier.band = 0;
    auto e3 = su2_basis(3);
    for (long long s = 0; s < lat.sites(); ++s)
        for (int i = 0; i < 4; ++i) {
            carrier.at(0, s)[i] = 0.4 * e3.a[i];
            carrier.at(1, s)[i] = cplx(0, 0.4) * e3.a[i];
            carrier.at(2, s)[i] = 0.7 * e3.a[i];
            carrier.at(3, s)[i] = cplx(0, 0.7) * e3.a[i];
        }
    HiggsPair pc{Connection::zero(lat, g), HiggsField{carrier}};
    ResidualReport rc = residual_tneq0_kahler(pc);
    CHECK(rc.total < 1e-24);
    // zero of the Kahler system => zero of the real system
    CHECK(residual_tneq0(pc.A, compose_a(pc.phi)).total < 1e-24);
    // zero of the Kahler system => residual_simpson = 0 (Lambda of 0)
    CHECK(residual_simpson(pc).total < 1e-24);

    // forward inequality with measured constant C <= 8 on random fields
    HiggsPair p = random_pair(lat, g, rng, 0.4, 1);
    double real_total = residual_tneq0(p.A, compose_a(p.phi)).total;
    double kahler_total = residual_tneq0_kahler(p).total;
    CHECK(real_total <= 8.0 * kahler_total);

    // trace of every block vanishes for trace-free su(2) input
    for (const auto& b : residual_tneq0_kahler(p).blocks)
        CHECK(trace_defect(b.value) < 1e-12);
}

TEST_CASE("kahler identity with the frozen factor") {
    auto lat = TorusLattice::make(4, 8);
    auto u1 = GaugeGroup::u1();
    auto g = GaugeGroup::su2();
    Rng rng(13);
    // abelian single-mode calibration: lhs = i * rhs exactly
    {
        FormField a(lat, 1, 1, Herm::anti);
        for (long long s = 0; s < lat.sites(); ++s) {
            auto c = lat.coords(s);
            double ph = lat.coordinate(0, c[0]);
            a.at(0, s)[0] = cplx(0, 1) * std::sin(ph);
            a.at(1, s)[0] = cplx(0, 1) * std::cos(ph);
        }
        a.band = 1;
        HiggsPair p{Connection::zero(lat, u1), split_a(a)};
        auto res = kahler_identity_check(p);
        CHECK(res.defect < 1e-13);
        CHECK(kKahlerIdentityFactor == cplx(0.0, 1.0));
    }
    // random su(2) pair
    {
        HiggsPair p = random_pair(lat, g, rng, 0.4, 1);
        auto res = kahler_identity_check(p);
        CHECK(res.defect < 1e-10);
    }
    // zero fields: both sides vanish
    {
        FormField zc(lat, 1, 2, Herm::general);
        zc.band = 0;
        HiggsPair p{Connection::zero(lat, g), HiggsField{zc}};
        auto res = kahler_identity_check(p);
        CHECK(l2_norm2(res.lhs) < 1e-28);
        CHECK(l2_norm2(res.rhs) < 1e-28);
    }
}

TEST_CASE("kahler least-squares Jacobians agree with finite differences") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    Rng rng(23);
    for (auto sys : {KWSystem::simpson, KWSystem::tneq0_kahler}) {
        KwLeastSquares ls(g, sys);
        FieldVec x;
        x.fields = {sample_ad_form(lat, g, 1, 1, 0.4, rng, Herm::anti),
                    split_a(sample_ad_form(lat, g, 1, 1, 0.4, rng, Herm::anti)).carrier};
        FieldVec v;
        v.fields = {sample_ad_form(lat, g, 1, 1, 1.0, rng, Herm::anti),
                    split_a(sample_ad_form(lat, g, 1, 1, 1.0, rng, Herm::anti)).carrier};
        ls.project(v);
        FieldVec grad = ls.gradient(x);
        const double eps = 1e-5;
        FieldVec xp = x, xm = x;
        xp.axpy_from(eps, v);
        xm.axpy_from(-eps, v);
        double fd = (ls.energy(xp) - ls.energy(xm)) / (2 * eps);
        CHECK(std::abs(grad.inner(v) - fd) / (std::abs(fd) + 1e-12) < 1e-6);
        // adjointness of J
        auto R = ls.residual(x);
        std::vector<FormField> rho;
        for (auto& b : R.blocks) rho.push_back(b.value);
        auto jv = ls.apply_J(x, v);
        double ip1 = 0;
        for (size_t b = 0; b < rho.size(); ++b) ip1 += l2_inner_re(jv[b], rho[b]);
        double ip2 = v.inner(ls.apply_Jt(x, rho));
        CHECK(std::abs(ip1 - ip2) / (std::abs(ip1) + 1e-30) < 1e-12);
    }
}
