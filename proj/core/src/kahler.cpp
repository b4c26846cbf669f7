#include "kwlab/kahler.hpp"

#include <cmath>

namespace kwlab {

double HiggsField::purity_defect() const {
    double scale = std::sqrt(l2_norm2(carrier)) + 1e-300;
    return std::sqrt(l2_norm2(pq_project(carrier, 0, 1))) / scale;
}

HiggsField split_a(const FormField& a) {
    require(a.degree == 1, "split_a expects a 1-form");
    require(a.cls == Herm::anti && hermiticity_defect(a, Herm::anti) < 1e-10,
            "split_a: non-anti-Hermitian input rejected");
    HiggsField phi;
    phi.carrier = pq_project(a, 1, 0);
    phi.carrier.band = a.band;
    return phi;
}

FormField compose_a(const HiggsField& phi) {
    FormField out = sub(phi.carrier, dagger(phi.carrier));
    out.cls = Herm::anti;
    return out;
}

FormField phi_star(const HiggsField& phi) { return dagger(phi.carrier); }

std::pair<FormField, FormField> dolbeault_d(const Connection& A, const FormField& f) {
    FormField del(f.lat, f.degree + 1, f.r, Herm::general);
    FormField dbar(f.lat, f.degree + 1, f.r, Herm::general);
    del.band = dbar.band = -2;  // mark unset
    bool first = true;
    for (const auto& part : pq_decompose(f)) {
        FormField dpart = covariant_d(A, part.part);
        FormField up = pq_project(dpart, part.p + 1, part.q);
        FormField vp = pq_project(dpart, part.p, part.q + 1);
        if (first) {
            del = up;
            dbar = vp;
            first = false;
        } else {
            axpy(del, 1.0, up);
            axpy(dbar, 1.0, vp);
        }
    }
    return {del, dbar};
}

namespace {
ResidualReport make_report(std::vector<ResidualBlock> blocks) {
    ResidualReport rep;
    rep.blocks = std::move(blocks);
    for (auto& b : rep.blocks) {
        b.norm2 = l2_norm2(b.value);
        rep.total += b.norm2;
    }
    return rep;
}

struct KahlerPieces {
    FormField F02, F11, dbar_phi, d_phi, phiphi, moment;  // moment = F11 + [phi∧phi*]
};

KahlerPieces kahler_pieces(const HiggsPair& p) {
    KahlerPieces out;
    FormField F = curvature(p.A);
    out.F02 = pq_project(F, 0, 2);
    out.F11 = pq_project(F, 1, 1);
    FormField dphi = covariant_d(p.A, p.phi.carrier);
    out.dbar_phi = pq_project(dphi, 1, 1);
    out.d_phi = pq_project(dphi, 2, 0);
    out.phiphi = wedge_mult(p.phi.carrier, p.phi.carrier);
    FormField ps = dagger(p.phi.carrier);
    FormField br = graded_combo(p.phi.carrier, ps, 1.0, 1.0);
    out.moment = add(out.F11, br);
    return out;
}
}  // namespace

ResidualReport residual_simpson(const HiggsPair& p) {
    require(p.A.a.lat.dim == 4, "residual_simpson requires dim = 4");
    KahlerPieces k = kahler_pieces(p);
    return make_report({{"F02", std::move(k.F02)},
                        {"dbar_phi", std::move(k.dbar_phi)},
                        {"phi_phi", std::move(k.phiphi)},
                        {"lambda_moment", lambda_contract(k.moment)}});
}

ResidualReport residual_tneq0_kahler(const HiggsPair& p) {
    require(p.A.a.lat.dim == 4, "residual_tneq0_kahler requires dim = 4");
    KahlerPieces k = kahler_pieces(p);
    return make_report({{"F02", std::move(k.F02)},
                        {"dbar_phi", std::move(k.dbar_phi)},
                        {"phi_phi", std::move(k.phiphi)},
                        {"moment", std::move(k.moment)},
                        {"d_phi", std::move(k.d_phi)}});
}

KahlerIdentityResult kahler_identity_check(const HiggsPair& p) {
    KahlerIdentityResult res;
    FormField a = compose_a(split_a(compose_a(p.phi)));  // clean anti-Hermitian carrier
    res.lhs = covariant_d_adjoint(p.A, a);
    FormField dphi = covariant_d(p.A, p.phi.carrier);
    FormField dps = covariant_d(p.A, phi_star(p.phi));
    FormField sum = add(pq_project(dphi, 1, 1), pq_project(dps, 1, 1));
    res.rhs = lambda_contract(sum);
    FormField diff = res.lhs;
    axpy(diff, -kKahlerIdentityFactor, res.rhs);
    res.defect = std::sqrt(l2_norm2(diff)) / (std::sqrt(l2_norm2(res.lhs)) + 1e-30);
    return res;
}

// ----- FieldVec adapters -----

namespace {
HiggsPair pair_from_vec(const GaugeGroup& g, const FieldVec& x) {
    require(x.fields.size() == 2, "Kahler systems carry (A, phi)");
    HiggsPair p{Connection(g, x.fields[0]), HiggsField{x.fields[1]}};
    return p;
}

// shared Jacobian pieces.
// blocks simpson: [P02 dF, P11 dDphi, dPhiPhi, Lambda(P11 dF + dBr)]
// blocks tneq0_kahler: [P02 dF, P11 dDphi, dPhiPhi, P11 dF + dBr, P20 dDphi]
struct KahlerLin {
    FormField dF02, dDbar, dPhiPhi, dMoment, dDel;
};

KahlerLin kahler_lin(const HiggsPair& p, const FieldVec& dx) {
    const FormField& dA = dx.fields[0];
    const FormField& dphi = dx.fields[1];
    KahlerLin out;
    FormField dF = covariant_d(p.A, dA);
    out.dF02 = pq_project(dF, 0, 2);
    FormField dDphi = covariant_d(p.A, dphi);
    axpy(dDphi, 1.0, graded_combo(dA, p.phi.carrier, 1.0, 1.0));
    out.dDbar = pq_project(dDphi, 1, 1);
    out.dDel = pq_project(dDphi, 2, 0);
    out.dPhiPhi = graded_combo(p.phi.carrier, dphi, 1.0, 1.0);
    FormField ps = dagger(p.phi.carrier);
    FormField dps = dagger(dphi);
    FormField dBr = graded_combo(dphi, ps, 1.0, 1.0);
    axpy(dBr, 1.0, graded_combo(p.phi.carrier, dps, 1.0, 1.0));
    out.dMoment = add(pq_project(dF, 1, 1), dBr);
    return out;
}

FormField lambda_adjoint(const FormField& u) {
    require(u.degree == 0, "lambda_adjoint expects a 0-form");
    FormField out(u.lat, 2, u.r, Herm::general);
    const long long n = u.lat.sites() * u.r * u.r;
    const int c12 = form_comp_index(4, 2, {0, 1});
    const int c34 = form_comp_index(4, 2, {2, 3});
    for (long long i = 0; i < n; ++i) {
        out.data[std::size_t(c12) * n + i] = u.data[i];
        out.data[std::size_t(c34) * n + i] = u.data[i];
    }
    out.band = u.band;
    return out;
}

// adjoint of the shared pieces; rho ordered per system
FieldVec kahler_lin_adjoint(const HiggsPair& p, const FormField& r_F02,
                            const FormField& r_dbar, const FormField& r_phiphi,
                            const FormField& r_moment, const FormField* r_del) {
    // duals entering dF: P02 r_F02 + P11 r_moment
    FormField dF_dual = add(pq_project(r_F02, 0, 2), pq_project(r_moment, 1, 1));
    // duals entering dDphi: P11 r_dbar (+ P20 r_del)
    FormField dD_dual = pq_project(r_dbar, 1, 1);
    if (r_del) axpy(dD_dual, 1.0, pq_project(*r_del, 2, 0));
    // grad_A = covD^t(dF_dual) + comboAdj(phi; dD_dual) [B=phi on the right]
    FormField gA = covariant_d_adjoint(p.A, dF_dual);
    // term dA -> combo(dA, phi, 1, 1) = dA∧phi + phi∧dA: adjoint with B = phi:
    // X -> X∧B + B∧X  => graded_combo_adjoint(B=phi, ., c1(B∧X)=1, c2(X∧B)=1)
    axpy(gA, 1.0, graded_combo_adjoint(p.phi.carrier, dD_dual, 1, 1.0, 1.0));
    // grad_phi:
    //   from dDphi: covD^t applied to dD_dual
    FormField gphi = covariant_d_adjoint(p.A, dD_dual);
    //   from dPhiPhi: combo(phi, dphi, 1, 1) => adjoint with B = phi
    axpy(gphi, 1.0, graded_combo_adjoint(p.phi.carrier, r_phiphi, 1, 1.0, 1.0));
    //   from dBr part 1: combo(dphi, phi*, 1, 1): X∧B + B∧X with B = phi*
    FormField ps = dagger(p.phi.carrier);
    FormField r_m = pq_project(r_moment, 1, 1);
    axpy(gphi, 1.0, graded_combo_adjoint(ps, r_m, 1, 1.0, 1.0));
    //   from dBr part 2: combo(phi, (dphi)†, 1, 1): adjoint = dagger of comboAdj
    axpy(gphi, 1.0, dagger(graded_combo_adjoint(p.phi.carrier, r_m, 1, 1.0, 1.0)));
    FieldVec out;
    out.fields = {gA, gphi};
    return out;
}
}  // namespace

ResidualReport residual_simpson_vec(const GaugeGroup& g, const FieldVec& x) {
    return residual_simpson(pair_from_vec(g, x));
}

ResidualReport residual_tneq0_kahler_vec(const GaugeGroup& g, const FieldVec& x) {
    return residual_tneq0_kahler(pair_from_vec(g, x));
}

std::vector<FormField> kahler_apply_J(const GaugeGroup& g, KWSystem sys,
                                      const FieldVec& x, const FieldVec& dx) {
    HiggsPair p = pair_from_vec(g, x);
    KahlerLin lin = kahler_lin(p, dx);
    if (sys == KWSystem::simpson)
        return {lin.dF02, lin.dDbar, lin.dPhiPhi, lambda_contract(lin.dMoment)};
    return {lin.dF02, lin.dDbar, lin.dPhiPhi, lin.dMoment, lin.dDel};
}

FieldVec kahler_apply_Jt(const GaugeGroup& g, KWSystem sys, const FieldVec& x,
                         const std::vector<FormField>& rho) {
    HiggsPair p = pair_from_vec(g, x);
    if (sys == KWSystem::simpson) {
        FormField r_moment = lambda_adjoint(rho[3]);
        return kahler_lin_adjoint(p, rho[0], rho[1], rho[2], r_moment, nullptr);
    }
    return kahler_lin_adjoint(p, rho[0], rho[1], rho[2], rho[3], &rho[4]);
}

}  // namespace kwlab
