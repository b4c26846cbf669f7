#include "kwlab/hodge.hpp"

#include <algorithm>
#include <cmath>

#include "kwlab/fft.hpp"

namespace kwlab {

double MetricField::det_defect() const {
    const int r = h.r;
    SmallMat m(r);
    double worst = 0.0;
    for (long long s = 0; s < h.sites(); ++s) {
        std::copy(h.at(0, s), h.at(0, s) + r * r, m.a.begin());
        // det via LU-free small expansion through eigenvalues (Hermitian)
        auto ev = hermitian_eigenvalues(m);
        double det = 1.0;
        for (double e : ev) det *= e;
        worst = std::max(worst, std::abs(det - 1.0));
    }
    return worst;
}

void MetricField::validate() const {
    require(h.degree == 0, "MetricField must be a 0-form");
    require(hermiticity_defect(h, Herm::herm) < 1e-10, "MetricField must be Hermitian");
    require(min_eigenvalue() > 1e-10, "MetricField must be positive definite");
    if (det_fixed)
        require(det_defect() < 1e-8, "det-fixed MetricField must have det H = 1");
}

MetricField MetricField::identity(const TorusLattice& lat, int rank) {
    MetricField m;
    m.h = FormField(lat, 0, rank, Herm::herm);
    for (long long s = 0; s < m.h.sites(); ++s) {
        cplx* p = m.h.at(0, s);
        for (int i = 0; i < rank; ++i) p[i * rank + i] = 1.0;
    }
    m.h.band = 0;
    return m;
}

FormField chern_10_coefficient(const FormField& a01, const FormField& H,
                               const FormField& Hinv, Dealias mode) {
    FormField delH = pq_project(exterior_d(H), 1, 0);
    FormField b = mult0(Hinv, delH, mode);
    FormField adagH = mult0_right(dagger(a01), H, mode);
    axpy(b, -1.0, mult0(Hinv, adagH, mode));
    return b;
}

FormField metric_adjoint(const FormField& f, const FormField& H, const FormField& Hinv,
                         Dealias mode) {
    return mult0(Hinv, mult0_right(dagger(f), H, mode), mode);
}

namespace {
void check_higgs_blocks(const HiggsPair& p, double tol) {
    ResidualReport rep = residual_tneq0_kahler(p);
    double holo = rep.block_norm2("F02") + rep.block_norm2("dbar_phi") +
                  rep.block_norm2("phi_phi");
    require(std::sqrt(holo) <= tol,
            "input does not define a Higgs bundle to tolerance (holomorphic blocks)");
}
}  // namespace

LambdaConnection lambda_connection(const HiggsPair& p, const MetricField& H,
                                   cplx lambda) {
    check_higgs_blocks(p, 1e-8);
    H.validate();
    LambdaConnection L;
    L.group = p.A.group;
    L.lambda = lambda;
    FormField a01 = pq_project(p.A.a, 0, 1);
    a01.band = p.A.a.band;
    FormField Hinv = pointwise_inverse(H.h);
    L.c_const = add(a01, p.phi.carrier);
    L.c_linear = add(chern_10_coefficient(a01, H.h, Hinv),
                     metric_adjoint(p.phi.carrier, H.h, Hinv));
    return L;
}

FlatBundleData build_D1(const HiggsPair& p, const MetricField& H) {
    LambdaConnection L = lambda_connection(p, H, cplx(1.0, 0.0));
    return FlatBundleData{p.A.group, L.coefficient()};
}

FormField lambda_curvature(const LambdaConnection& L) {
    FormField c = L.coefficient();
    Connection zero = Connection::zero(c.lat, L.group);
    auto [del_c, dbar_c] = dolbeault_d(zero, c);
    FormField F = dbar_c;
    axpy(F, L.lambda, del_c);
    axpy(F, 1.0, wedge_mult(c, c));
    return F;
}

double flatness_defect(const LambdaConnection& L) {
    return std::sqrt(l2_norm2(lambda_curvature(L)));
}

LeibnizCheck lambda_leibniz_check(const LambdaConnection& L, const FormField& fscalar,
                                  const FormField& section) {
    require(fscalar.degree == 0 && fscalar.r == 1, "f must be a scalar 0-form");
    require(section.degree == 0, "s must be a 0-form section");
    // promote f to matrix-valued identity multiple for the products
    FormField f(section.lat, 0, section.r, Herm::general);
    f.band = fscalar.band;
    const int r = section.r;
    for (long long s = 0; s < f.sites(); ++s) {
        cplx v = fscalar.scalar(0, s);
        cplx* p = f.at(0, s);
        for (int i = 0; i < r; ++i) p[i * r + i] = v;
    }
    FormField c = L.coefficient();
    Connection zero = Connection::zero(c.lat, L.group);
    // D^lambda s = (dbar + lambda del)s + c_lambda * s  (s a 0-form)
    auto apply_op = [&](const FormField& s0) {
        auto [del_s, dbar_s] = dolbeault_d(zero, s0);
        FormField out = dbar_s;
        axpy(out, L.lambda, del_s);
        axpy(out, 1.0, wedge_mult(c, s0));
        return out;
    };
    FormField fs = wedge_mult(f, section);
    FormField lhs = apply_op(fs);
    FormField t1 = wedge_mult(f, apply_op(section));
    // s ⊗ (lambda del f + dbar f)
    auto [del_f, dbar_f] = dolbeault_d(zero, f);
    FormField df_l = dbar_f;
    axpy(df_l, L.lambda, del_f);
    FormField t2 = wedge_mult(df_l, section);
    FormField defect = sub(sub(lhs, t1), t2);
    LeibnizCheck out;
    out.full = std::sqrt(l2_norm2(defect)) /
               (std::sqrt(l2_norm2(lhs)) + 1e-30);
    // (1,0)-restricted form: D^lambda(fs) - f D^lambda(s) restricted to (1,0)
    // equals lambda s del f
    FormField lhs10 = pq_project(sub(lhs, t1), 1, 0);
    FormField rhs10 = pq_project(wedge_mult(del_f, section), 1, 0);
    for (auto& v : rhs10.data) v *= L.lambda;
    out.restricted_10 = std::sqrt(l2_norm2(sub(lhs10, rhs10))) /
                        (std::sqrt(l2_norm2(lhs)) + 1e-30);
    return out;
}

FlatDecomposition decompose_flat(const FlatBundleData& f, const MetricField& H) {
    H.validate();
    const FormField& nu = f.conn;
    FormField Hinv = pointwise_inverse(H.h);
    FormField nu_adj = metric_adjoint(nu, H.h, Hinv);      // H^-1 nu^dagger H
    FormField HdH = mult0(Hinv, exterior_d(H.h));          // H^-1 dH
    FlatDecomposition dec;
    dec.unitary_coeff = nu;
    axpy(dec.unitary_coeff, -1.0, nu_adj);
    axpy(dec.unitary_coeff, 1.0, HdH);
    for (auto& v : dec.unitary_coeff.data) v *= 0.5;
    dec.selfadjoint = sub(nu, dec.unitary_coeff);
    dec.theta = pq_project(dec.selfadjoint, 1, 0);
    dec.theta_star = pq_project(dec.selfadjoint, 0, 1);
    FormField recomp = add(dec.unitary_coeff, dec.selfadjoint);
    dec.recomposition_defect = std::sqrt(l2_norm2(sub(recomp, nu)));
    // h-unitarity: transport by G = sqrt(H); the result must be anti-Hermitian
    FormField G = pointwise_sqrt_hpd(H.h);
    GaugeTransform gt{G, false};
    Connection Du(f.group, FormField(nu.lat, 1, nu.r, Herm::general));
    Du.a = dec.unitary_coeff;
    Connection transported = apply_gauge(gt, Du);
    dec.unitarity_defect = hermiticity_defect(transported.a, Herm::anti);
    return dec;
}

FormField rebuild_d1(const FlatDecomposition& dec, const MetricField& H) {
    FormField u01 = pq_project(dec.unitary_coeff, 0, 1);
    FormField Hinv = pointwise_inverse(H.h);
    FormField b = chern_10_coefficient(u01, H.h, Hinv);
    FormField out = add(u01, b);
    axpy(out, 1.0, dec.theta);
    axpy(out, 1.0, metric_adjoint(dec.theta, H.h, Hinv));
    return out;
}

double d0_flatness_defect(const FlatDecomposition& dec) {
    FormField c0 = pq_project(dec.unitary_coeff, 0, 1);
    axpy(c0, 1.0, dec.theta);
    const TorusLattice& lat = c0.lat;
    GaugeGroup g = GaugeGroup::ur(c0.r);
    Connection zero = Connection::zero(lat, g);
    auto [del_c, dbar_c] = dolbeault_d(zero, c0);
    FormField F = dbar_c;
    axpy(F, 1.0, wedge_mult(c0, c0));
    return std::sqrt(l2_norm2(F));
}

Rank1Oracle rank1_harmonic_oracle(const FlatBundleData& flat) {
    require(flat.group.rank == 1, "rank1_harmonic_oracle: non-rank-1 rejected");
    const FormField& nu = flat.conn;
    const TorusLattice& lat = nu.lat;
    Rank1Oracle out;
    out.flatness_in = std::sqrt(l2_norm2(exterior_d(nu)));
    require(out.flatness_in <= 1e-10 * (1.0 + std::sqrt(l2_norm2(nu))),
            "rank1_harmonic_oracle: non-flat input rejected");
    // Hodge split of nu: zero mode + d chi; rho = Re chi solves the harmonic
    // metric problem, H = exp(2 rho).
    FormField spec = fft_forward(nu);
    FormField chi_spec(lat, 0, 1, Herm::general);
    const int dim = lat.dim, n = lat.n;
    std::array<long long, 4> stride{1, 1, 1, 1};
    for (int a = 1; a < dim; ++a) stride[a] = stride[a - 1] * n;
    for (long long s = 0; s < lat.sites(); ++s) {
        double k2 = 0.0;
        cplx acc(0.0);
        for (int a = 0; a < dim; ++a) {
            int m = int((s / stride[a]) % n);
            cplx ika = fft_deriv_multiplier(m, n);
            k2 += std::norm(ika);
            acc += std::conj(ika) * spec.scalar(a, s);
        }
        chi_spec.scalar(0, s) = (k2 > 0.0) ? acc / k2 : cplx(0.0);
    }
    FormField chi = fft_inverse(chi_spec);
    out.rho = chi;
    for (auto& v : out.rho.data) v = v.real();
    out.rho.cls = Herm::herm;
    // H = exp(2 rho)
    FormField two_rho = out.rho;
    for (auto& v : two_rho.data) v *= 2.0;
    out.H.h = pointwise_exp(two_rho);
    out.H.h.cls = Herm::herm;
    // k-gauged pair: A_k = i Im nu (anti-Hermitian part), phi = (1,0) of the
    // constant part of Re nu
    FormField Ak = antiherm_part(nu);
    FormField re_nu = herm_part(nu);
    FormField dreho = exterior_d(out.rho);
    FormField w0 = sub(re_nu, dreho);  // constant covector, numerically
    FormField phi = pq_project(w0, 1, 0);
    out.pair = HiggsPair{Connection(flat.group, Ak), HiggsField{phi}};
    // certify
    FlatDecomposition dec = decompose_flat(flat, out.H);
    out.d0_defect = d0_flatness_defect(dec);
    FormField rebuilt = rebuild_d1(dec, out.H);
    out.rebuild_defect = std::sqrt(l2_norm2(sub(rebuilt, nu)));
    return out;
}

HolonomyDiagnostics holonomy_diagnostics(const FlatBundleData& f) {
    const FormField& nu = f.conn;
    const TorusLattice& lat = nu.lat;
    const int r = nu.r, rr = r * r, n = lat.n, dim = lat.dim;
    HolonomyDiagnostics out;
    const int oversample = 8;
    for (int mu = 0; mu < dim; ++mu) {
        // restrict nu_mu to the axis line through the origin and oversample it
        std::vector<cplx> line(std::size_t(n) * rr);
        std::array<int, 4> x{0, 0, 0, 0};
        for (int t = 0; t < n; ++t) {
            x[mu] = t;
            const cplx* p = nu.at(mu, lat.index(x));
            for (int e = 0; e < rr; ++e) line[std::size_t(t) * rr + e] = p[e];
        }
        const int N2 = n * oversample;
        std::vector<cplx> fine(std::size_t(N2) * rr, cplx(0.0));
        const FftPlan& plan = fft_plan(n);
        const FftPlan& plan2 = fft_plan(N2);
        // per matrix entry 1d resample
        std::vector<cplx> buf(n), buf2(N2);
        for (int e = 0; e < rr; ++e) {
            for (int t = 0; t < n; ++t) buf[t] = line[std::size_t(t) * rr + e];
            plan.forward(buf.data());
            std::fill(buf2.begin(), buf2.end(), cplx(0.0));
            for (int m = 0; m < n; ++m) {
                int k = fft_wavenumber(m, n);
                buf2[(k >= 0) ? k : k + N2] = buf[m];
            }
            plan2.inverse(buf2.data());
            for (int t = 0; t < N2; ++t) fine[std::size_t(t) * rr + e] = buf2[t];
        }
        // RK4 for U' = -nu_mu(x(t)) U with step h = spacing/ (oversample/2)
        SmallMat U = SmallMat::identity(r);
        const double h = kTwoPi / (n * oversample / 2);
        auto matat = [&](int idx) {
            SmallMat m(r);
            const cplx* p = fine.data() + std::size_t(idx % N2) * rr;
            std::copy(p, p + rr, m.a.begin());
            return m;
        };
        const int steps = n * oversample / 2;
        for (int s = 0; s < steps; ++s) {
            SmallMat c0 = matat(2 * s), ch = matat(2 * s + 1), c1 = matat(2 * s + 2);
            auto rhs = [&](const SmallMat& c, const SmallMat& u) {
                SmallMat out2 = mat_mul(c, u);
                for (auto& v : out2.a) v = -v;
                return out2;
            };
            SmallMat k1 = rhs(c0, U);
            SmallMat u2 = U;
            for (std::size_t i = 0; i < u2.a.size(); ++i) u2.a[i] += 0.5 * h * k1.a[i];
            SmallMat k2 = rhs(ch, u2);
            SmallMat u3 = U;
            for (std::size_t i = 0; i < u3.a.size(); ++i) u3.a[i] += 0.5 * h * k2.a[i];
            SmallMat k3 = rhs(ch, u3);
            SmallMat u4 = U;
            for (std::size_t i = 0; i < u4.a.size(); ++i) u4.a[i] += h * k3.a[i];
            SmallMat k4 = rhs(c1, u4);
            for (std::size_t i = 0; i < U.a.size(); ++i)
                U.a[i] += h / 6.0 * (k1.a[i] + 2.0 * k2.a[i] + 2.0 * k3.a[i] + k4.a[i]);
        }
        out.loops.push_back(U);
    }
    for (std::size_t i = 0; i < out.loops.size(); ++i)
        for (std::size_t j = i + 1; j < out.loops.size(); ++j) {
            SmallMat c = mat_mul(out.loops[i], out.loops[j]);
            SmallMat c2 = mat_mul(out.loops[j], out.loops[i]);
            double nrm = 0.0;
            for (std::size_t e = 0; e < c.a.size(); ++e) nrm += std::norm(c.a[e] - c2.a[e]);
            out.max_commutator = std::max(out.max_commutator, std::sqrt(nrm));
        }
    // commutant map on traceless X: stack [U_mu X - X U_mu]
    if (r > 1) {
        const int nb = r * r - 1;  // traceless basis dimension
        // build traceless basis
        std::vector<SmallMat> basis;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                if (i == j) continue;
                SmallMat m(r);
                m(i, j) = 1.0;
                basis.push_back(m);
            }
        for (int i = 0; i + 1 < r; ++i) {
            SmallMat m(r);
            m(i, i) = 1.0;
            m(i + 1, i + 1) = -1.0;
            basis.push_back(m);
        }
        const int rows = dim * r * r;
        SmallMat MtM(nb);
        std::vector<std::vector<cplx>> cols(nb, std::vector<cplx>(rows));
        for (int bidx = 0; bidx < nb; ++bidx) {
            int rowptr = 0;
            for (int mu = 0; mu < dim; ++mu) {
                SmallMat c = mat_mul(out.loops[mu], basis[bidx]);
                SmallMat c2 = mat_mul(basis[bidx], out.loops[mu]);
                for (int e = 0; e < r * r; ++e) cols[bidx][rowptr++] = c.a[e] - c2.a[e];
            }
        }
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) {
                cplx s(0.0);
                for (int k = 0; k < rows; ++k) s += std::conj(cols[i][k]) * cols[j][k];
                MtM(i, j) = s;
            }
        auto ev = hermitian_eigenvalues(MtM);
        out.commutant_min_sv = std::sqrt(std::max(ev.front(), 0.0));
    }
    return out;
}

}  // namespace kwlab
