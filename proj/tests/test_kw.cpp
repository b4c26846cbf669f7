#include "helpers.hpp"

using namespace kwlab;
using namespace kwtest;

TEST_CASE("residual blocks: trivial zeros and abelian curvature") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    auto u1 = GaugeGroup::u1();
    // (0,0) is a zero of every system
    Connection z(g, FormField(lat, 1, 2, Herm::anti));
    FormField za(lat, 1, 2, Herm::anti);
    za.band = 0;
    z.a.band = 0;
    CHECK(residual_tneq0(z, za).total < 1e-28);
    CHECK(residual_t0(z, za).total < 1e-28);
    CHECK(residual_t(KWConfig(z, za, 1.0)).total < 1e-28);

    // U(1): A = cos(x1) dx2, a = 0, t = 1: blocks [(dA)+, (dA)-, 0]
    FormField Au(lat, 1, 1, Herm::anti);
    for (long long s = 0; s < lat.sites(); ++s) {
        auto c = lat.coords(s);
        Au.at(1, s)[0] = cplx(0, 1) * std::cos(lat.coordinate(0, c[0]));
    }
    Au.band = 1;
    Connection Ac(u1, Au);
    FormField zu(lat, 1, 1, Herm::anti);
    zu.band = 0;
    ResidualReport rep = residual_t(KWConfig(Ac, zu, 1.0));
    FormField dA = exterior_d(Au);
    CHECK(std::abs(rep.block_norm2("sd_block") - l2_norm2(sd_asd_project(dA, +1))) /
              rep.total < 1e-13);
    CHECK(std::abs(rep.block_norm2("asd_block") - l2_norm2(sd_asd_project(dA, -1))) /
              rep.total < 1e-13);
    CHECK(rep.block_norm2("dstar_a") < 1e-28);
    CHECK(rep.total > 0.1);

    // su(2) constants: block1 of tneq0 = -e3 dx1^dx2
    auto e1 = su2_basis(1), e2 = su2_basis(2), e3 = su2_basis(3);
    FormField ac = const_ad1(lat, g, {{0, e1}, {1, e2}});
    ResidualReport r2 = residual_tneq0(z, ac);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(r2.blocks[0].value.at(0, 0)[i] + e3.a[i]) < 1e-14);

    // report total equals the block sum
    double blocksum = 0;
    for (auto& b : r2.blocks) blocksum += b.norm2;
    CHECK(std::abs(r2.total - blocksum) / (r2.total + 1e-30) < 1e-14);

    // non-finite t rejected
    CHECK_THROWS_AS(KWConfig(z, za, std::nan("")), PreconditionError);
    // t = 0 delegates to the t0 system
    Rng rng(12);
    Connection Ar(g, sample_ad_form(lat, g, 1, 2, 0.3, rng, Herm::anti));
    auto ar = sample_ad_form(lat, g, 1, 2, 0.3, rng, Herm::anti);
    ResidualReport d1 = residual_t(KWConfig(Ar, ar, 0.0));
    ResidualReport d2 = residual_t0(Ar, ar);
    CHECK(std::abs(d1.total - d2.total) / d2.total < 1e-14);
}

TEST_CASE("energy identity and residual-projection inequality") {
    auto lat = TorusLattice::make(4, 12);
    auto g = GaugeGroup::su2();
    Rng rng(3);
    Connection A(g, sample_ad_form(lat, g, 1, 2, 0.4, rng, Herm::anti));
    auto a = sample_ad_form(lat, g, 1, 2, 0.4, rng, Herm::anti);
    // total(tneq0) = |F_{A+ia}|^2 + |d* a|^2 exactly
    ResidualReport rep = residual_tneq0(A, a);
    auto cc = complexified_curvature(A, a);
    double rhs = l2_norm2(cc.total) + rep.block_norm2("dstar_a");
    CHECK(std::abs(rep.total - rhs) / rep.total < 1e-12);
    // forward half of the t-independence statement, at the residual level:
    // total(residual_t) <= C max(|t|, 1/|t|) total(tneq0), C measured <= 2
    for (double t : {0.5, 1.0, 2.0}) {
        double tt = residual_t(KWConfig(A, a, t)).total;
        double bound = std::max(t, 1.0 / t) * rep.total;
        CHECK(tt <= 2.0 * bound);
    }
}

TEST_CASE("kw_energy and analytic gradient vs finite differences") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    Rng rng(8);
    // abelian scaling: a -> s a scales the da-block by s^2
    auto u1 = GaugeGroup::u1();
    Connection zu = Connection::zero(lat, u1);
    auto au = sample_ad_form(lat, u1, 1, 2, 0.5, rng, Herm::anti);
    // project out the constant mode so d* and d blocks capture everything
    double e1 = residual_tneq0(zu, au).block_norm2("d_A_a");
    double e2 = residual_tneq0(zu, scaled(au, 3.0)).block_norm2("d_A_a");
    CHECK(std::abs(e2 - 9.0 * e1) / e2 < 1e-12);

    for (auto sys : {KWSystem::tneq0, KWSystem::t0, KWSystem::t_family}) {
        KwLeastSquares ls(g, sys, 2.0);
        FieldVec x;
        x.fields = {sample_ad_form(lat, g, 1, 1, 0.4, rng, Herm::anti),
                    sample_ad_form(lat, g, 1, 1, 0.4, rng, Herm::anti)};
        FieldVec v;
        v.fields = {sample_ad_form(lat, g, 1, 1, 1.0, rng, Herm::anti),
                    sample_ad_form(lat, g, 1, 1, 1.0, rng, Herm::anti)};
        ls.project(v);
        FieldVec grad = ls.gradient(x);
        const double eps = 1e-5;
        FieldVec xp = x, xm = x;
        xp.axpy_from(eps, v);
        xm.axpy_from(-eps, v);
        double fd = (ls.energy(xp) - ls.energy(xm)) / (2 * eps);
        CHECK(std::abs(grad.inner(v) - fd) / (std::abs(fd) + 1e-12) < 1e-6);
    }
}

TEST_CASE("prepared fast path matches the op-level path") {
    auto lat = TorusLattice::make(4, 8);
    auto g = GaugeGroup::su2();
    Rng rng(21);
    FieldVec x;
    x.fields = {sample_ad_form(lat, g, 1, 3, 0.4, rng, Herm::anti),
                sample_ad_form(lat, g, 1, 3, 0.4, rng, Herm::anti)};
    x.fields[0].band = -1;  // force generic treatment
    x.fields[1].band = -1;
    FieldVec v;
    v.fields = {sample_ad_form(lat, g, 1, 3, 0.7, rng, Herm::anti),
                sample_ad_form(lat, g, 1, 3, 0.7, rng, Herm::anti)};
    v.fields[0].band = -1;
    v.fields[1].band = -1;
    for (auto sys : {KWSystem::tneq0, KWSystem::t0, KWSystem::t_family}) {
        KwLeastSquares ls(g, sys, 2.0);
        auto P = ls.prepare(x);
        CHECK(std::abs(P.total - ls.residual(x).total) / P.total < 1e-13);
        FieldVec fast = ls.normal_apply(P, v);
        auto jv = ls.apply_J(x, v);
        FieldVec slow = ls.apply_Jt(x, jv);
        ls.project(slow);
        double num = 0, den = 0;
        for (size_t i = 0; i < fast.fields.size(); ++i) {
            num += l2_norm2(sub(fast.fields[i], slow.fields[i]));
            den += l2_norm2(slow.fields[i]);
        }
        CHECK(std::sqrt(num / den) < 1e-12);
    }
}

TEST_CASE("bochner balance and i a invariance") {
    auto lat = TorusLattice::make(4, 16);
    auto g = GaugeGroup::su2();
    // zero fields: both sides vanish
    Connection z = Connection::zero(lat, g);
    FormField za(lat, 1, 2, Herm::anti);
    za.band = 0;
    auto res0 = bochner_check(z, za);
    CHECK(res0.lhs < 1e-28);
    CHECK(res0.rhs < 1e-28);
    // random band-limited pair at N = 16, band N/4
    Rng rng(33);
    Connection A(g, sample_ad_form(lat, g, 1, 4, 0.4, rng, Herm::anti));
    auto a = sample_ad_form(lat, g, 1, 4, 0.4, rng, Herm::anti);
    auto res = bochner_check(A, a);
    CHECK(res.bandwidth_ok);
    CHECK(res.gap < 1e-9);
    // cross-check both sides at N and 2N
    Connection A2(g, resample(A.a, 32));
    FormField a2 = resample(a, 32);
    auto res2 = bochner_check(A2, a2);
    CHECK(std::abs(res.lhs - res2.lhs) / res.lhs < 1e-10);
    CHECK(std::abs(res.rhs - res2.rhs) / res.rhs < 1e-10);
    // rhs invariance under a -> i a (norm-level identity)
    double r1 = bochner_rhs(A, a);
    double r2 = bochner_rhs(A, scaled(a, cplx(0, 1)));
    CHECK(std::abs(r1 - r2) / r1 < 1e-12);
    // bandwidth violation is a warning, not an error
    auto wide = sample_ad_form(lat, g, 1, 7, 0.2, rng, Herm::anti);
    auto resw = bochner_check(A, wide);
    CHECK_FALSE(resw.bandwidth_ok);
    CHECK(!resw.warning.empty());
}

TEST_CASE("single-mode ASD construction on the trivial bundle") {
    // solve the SD-projection kernel for a single abelian Fourier mode; on the
    // trivial bundle the kernel consists of pure gauge modes (F = 0), and the
    // resulting configuration satisfies the t0 system with constant a
    auto lat = TorusLattice::make(4, 8);
    auto u1 = GaugeGroup::u1();
    // mode k = (1,1,0,0): rows = SD components of k ∧ ahat over ahat in C^4
    const int k[4] = {1, 1, 0, 0};
    // wedge k∧a components (mu<nu): (k_mu a_nu - k_nu a_mu)
    auto wedge_comp = [&](const std::array<cplx, 4>& ah, int mu, int nu) {
        return double(k[mu]) * ah[nu] - double(k[nu]) * ah[mu];
    };
    // SD rows: (12+34), (13-24), (14+23)
    auto sd_rows = [&](const std::array<cplx, 4>& ah) {
        std::array<cplx, 3> r;
        r[0] = wedge_comp(ah, 0, 1) + wedge_comp(ah, 2, 3);
        r[1] = wedge_comp(ah, 0, 2) - wedge_comp(ah, 1, 3);
        r[2] = wedge_comp(ah, 0, 3) + wedge_comp(ah, 1, 2);
        return r;
    };
    // scan the 4-dim coefficient space for the null space of the 3x4 system
    int null_dim = 0;
    std::array<cplx, 4> null_vec{0, 0, 0, 0};
    for (int b = 0; b < 4; ++b) {
        std::array<cplx, 4> e{0, 0, 0, 0};
        e[b] = 1.0;
        auto r = sd_rows(e);
        // project out previously found null directions: here just check directly
        if (std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]) < 1e-14) {
            ++null_dim;
            null_vec = e;
        }
    }
    // the null space is spanned by ahat parallel to k (pure gauge)
    std::array<cplx, 4> kvec{1, 1, 0, 0};
    auto rk = sd_rows(kvec);
    CHECK(std::abs(rk[0]) + std::abs(rk[1]) + std::abs(rk[2]) < 1e-14);
    (void)null_dim;
    (void)null_vec;
    // build A from the gauge mode and check residual_t0 vanishes with const a
    FormField Au(lat, 1, 1, Herm::anti);
    for (long long s = 0; s < lat.sites(); ++s) {
        auto c = lat.coords(s);
        double ph = lat.coordinate(0, c[0]) + lat.coordinate(1, c[1]);
        for (int mu = 0; mu < 2; ++mu) Au.at(mu, s)[0] = cplx(0, 1) * std::cos(ph);
    }
    Au.band = 1;
    Connection Ac(u1, Au);
    CHECK(max_abs(curvature(Ac)) < 1e-13);  // F = 0: the only trivial-bundle option
    FormField ca(lat, 1, 1, Herm::anti);
    ca.band = 0;
    for (long long s = 0; s < lat.sites(); ++s) ca.at(2, s)[0] = cplx(0, 0.8);
    CHECK(residual_t0(Ac, ca).total < 1e-24);
}
