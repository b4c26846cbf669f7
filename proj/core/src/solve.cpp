#include "kwlab/solve.hpp"

#include <chrono>
#include <cmath>

#include "kwlab/fft.hpp"

namespace kwlab {

namespace {
using clock_type = std::chrono::steady_clock;
double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

// spectral preconditioner (1 + |k|^2)^{-1} per component plane
void precondition(FieldVec& v) {
    for (auto& f : v.fields) {
        FormField spec = fft_forward(f);
        const TorusLattice& lat = f.lat;
        const int dim = lat.dim, n = lat.n, rr = f.r * f.r;
        std::array<long long, 4> stride{1, 1, 1, 1};
        for (int a = 1; a < dim; ++a) stride[a] = stride[a - 1] * n;
        for (long long s = 0; s < lat.sites(); ++s) {
            double k2 = 0.0;
            for (int a = 0; a < dim; ++a) {
                int kk = fft_wavenumber(int((s / stride[a]) % n), n);
                k2 += double(kk) * kk;
            }
            const double w = 1.0 / (1.0 + k2);
            for (int c = 0; c < f.comps(); ++c) {
                cplx* p = spec.at(c, s);
                for (int e = 0; e < rr; ++e) p[e] *= w;
            }
        }
        int band = f.band;
        f = fft_inverse(spec);
        f.band = band;
    }
}
}  // namespace

FieldVec default_seed(const TorusLattice& lat, const GaugeGroup& g, KWSystem sys,
                      const SolveConfig& sc) {
    Rng rng(sc.seed);
    const int band = sc.effective_band(lat);
    FieldVec x;
    x.fields.push_back(sample_ad_form(lat, g, 1, band, 0.1, rng, Herm::anti));
    FormField a = sample_ad_form(lat, g, 1, band, 0.1, rng, Herm::anti);
    if (sys == KWSystem::simpson || sys == KWSystem::tneq0_kahler)
        x.fields.push_back(split_a(a).carrier);
    else
        x.fields.push_back(a);
    return x;
}

namespace {

// FD validation of the analytic gradient along random admissible directions.
double fd_gradient_check(const KwLeastSquares& sys, const FieldVec& x,
                         const SolveConfig& sc) {
    Rng rng(sc.seed ^ 0x5dee7ull);
    const TorusLattice& lat = x.fields[0].lat;
    const int band = sc.effective_band(lat);
    FieldVec grad = sys.gradient(x);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        FieldVec v;
        v.fields.push_back(
            sample_ad_form(lat, sys.group(), 1, band, 1.0, rng, Herm::anti));
        v.fields.push_back(
            sample_ad_form(lat, sys.group(), 1, band, 1.0, rng, Herm::anti));
        sys.project(v);
        const double eps = 1e-5;
        FieldVec xp = x, xm = x;
        xp.axpy_from(eps, v);
        xm.axpy_from(-eps, v);
        double fd = (sys.energy(xp) - sys.energy(xm)) / (2.0 * eps);
        double an = grad.inner(v);
        double rel = std::abs(fd - an) / (std::abs(fd) + std::abs(an) + 1e-14);
        worst = std::max(worst, rel);
    }
    return worst;
}

// Matrix-free PCG on (Jt J + mu I) delta = -Jt R, through the prepared point.
FieldVec gn_step(const KwLeastSquares& sys, const KwLeastSquares::Prepared& P,
                 double mu, int max_cg) {
    FieldVec rhs = sys.Jt_residual(P);
    rhs = rhs.scaled(-1.0);
    sys.project(rhs);
    auto normal_op = [&](const FieldVec& v) {
        FieldVec out = sys.normal_apply(P, v);
        out.axpy_from(mu, v);
        return out;
    };
    FieldVec delta = FieldVec::zeros_like(rhs);
    FieldVec r = rhs;
    FieldVec z = r;
    precondition(z);
    sys.project(z);
    FieldVec p = z;
    double rz = r.inner(z);
    const double rhs_norm2 = rhs.norm2();
    if (rhs_norm2 == 0.0) return delta;
    for (int it = 0; it < max_cg; ++it) {
        FieldVec Ap = normal_op(p);
        double pAp = p.inner(Ap);
        if (pAp <= 0.0) break;
        double alpha = rz / pAp;
        delta.axpy_from(alpha, p);
        r.axpy_from(-alpha, Ap);
        if (r.norm2() < 1e-4 * rhs_norm2) break;
        FieldVec z2 = r;
        precondition(z2);
        sys.project(z2);
        double rz2 = r.inner(z2);
        double beta = rz2 / rz;
        rz = rz2;
        FieldVec pn = z2;
        pn.axpy_from(beta, p);
        p = pn;
    }
    return delta;
}

}  // namespace

MinimizeResult minimize_kw(const KwLeastSquares& sys, const FieldVec& x0,
                           const SolveConfig& sc) {
    MinimizeResult res;
    res.x = x0;
    sys.project(res.x);
    if (sc.fd_check) {
        res.fd_max_rel_err = fd_gradient_check(sys, res.x, sc);
        if (res.fd_max_rel_err > 1e-3)
            throw RuntimeError("analytic gradient disagrees with finite differences");
    }
    KwLeastSquares::Prepared P = sys.prepare(res.x);
    double total = P.total;
    double mu = 1e-4 * (total + 1e-12);
    int consecutive_failures = 0;
    for (int iter = 0; iter < sc.max_iters; ++iter) {
        auto t0 = clock_type::now();
        if (total <= sc.tol) {
            res.converged = true;
            break;
        }
        double step_taken = 0.0;
        if (sc.policy == StepPolicy::fixed) {
            FieldVec g = sys.Jt_residual(P).scaled(2.0);
            sys.project(g);
            res.x.axpy_from(-sc.fixed_step, g);
            sys.project(res.x);
            P = sys.prepare(res.x);
            if (P.total > total) ++consecutive_failures;
            else consecutive_failures = 0;
            total = P.total;
            step_taken = sc.fixed_step;
        } else {
            bool accepted = false;
            for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
                FieldVec delta = gn_step(sys, P, mu, sc.cg_max_iters);
                double alpha = 1.0;
                for (int ls = 0; ls < 6; ++ls) {
                    FieldVec xt = res.x;
                    xt.axpy_from(alpha, delta);
                    sys.project(xt);
                    KwLeastSquares::Prepared Pt = sys.prepare(xt);
                    if (Pt.total < total) {
                        res.x = std::move(xt);
                        P = std::move(Pt);
                        total = P.total;
                        accepted = true;
                        step_taken = alpha;
                        mu = std::max(mu * 0.3, 1e-14);
                        break;
                    }
                    alpha *= 0.5;
                }
                if (!accepted) mu *= 6.0;
            }
            if (!accepted) {
                FieldVec g = sys.Jt_residual(P).scaled(2.0);
                sys.project(g);
                double gn2 = g.norm2();
                double alpha = (gn2 > 0.0) ? total / gn2 : 0.0;
                bool ok = false;
                for (int ls = 0; ls < 20 && !ok; ++ls) {
                    FieldVec xt = res.x;
                    xt.axpy_from(-alpha, g);
                    sys.project(xt);
                    KwLeastSquares::Prepared Pt = sys.prepare(xt);
                    if (Pt.total < total) {
                        res.x = std::move(xt);
                        P = std::move(Pt);
                        total = P.total;
                        ok = true;
                        step_taken = alpha;
                    }
                    alpha *= 0.5;
                }
                if (!ok) ++consecutive_failures;
                else consecutive_failures = 0;
            } else {
                consecutive_failures = 0;
            }
        }
        res.iterations = iter + 1;
        if (iter % sc.report_cadence == 0 || total <= sc.tol)
            res.trace.push_back({iter, total, total, step_taken, ms_since(t0)});
        if (consecutive_failures >= 20) {
            res.diverged = true;
            res.message = "energy failed to decrease across 20 consecutive attempts";
            break;
        }
    }
    res.final_total = sys.residual(res.x).total;
    if (!res.converged && !res.diverged) {
        res.converged = res.final_total <= sc.tol;
        if (!res.converged) res.message = "iteration budget exhausted";
    }
    return res;
}

// ----- metric heat flow -----

namespace {

struct FlowContext {
    HiggsPair pair;     // fields living on the evaluation grid
    FormField a01;      // (0,1) part of A
    FlowTarget target;
    bool remove_trace_dir = false;
    Dealias mode = Dealias::automatic;
};

// moment-map defect at H = exp(S): P_herm( i Lambda(F_h + [theta, theta*_h]) ),
// trace part removed when flowing det-fixed groups.
FormField flow_defect(const FlowContext& ctx, const FormField& H) {
    FormField Hinv = pointwise_inverse(H);
    FormField b = chern_10_coefficient(ctx.a01, H, Hinv, ctx.mode);
    FormField c = add(ctx.a01, b);
    Connection Dh(ctx.pair.A.group, FormField(H.lat, 1, H.r, Herm::general));
    Dh.a = c;
    FormField Fh = curvature(Dh, ctx.mode);
    FormField ts = metric_adjoint(ctx.pair.phi.carrier, H, Hinv, ctx.mode);
    FormField br = graded_combo(ctx.pair.phi.carrier, ts, 1.0, 1.0, ctx.mode);
    FormField lam = lambda_contract(add(Fh, br));
    FormField defect = scaled(lam, cplx(0.0, 1.0));
    defect = herm_part(defect);
    if (ctx.remove_trace_dir) remove_trace(defect);
    return defect;
}

// full curvature of D^1_h at H (pluri-harmonic target block)
FormField full_flatness(const FlowContext& ctx, const FormField& H) {
    FormField Hinv = pointwise_inverse(H);
    FormField b = chern_10_coefficient(ctx.a01, H, Hinv, ctx.mode);
    FormField c = add(ctx.a01, b);
    axpy(c, 1.0, ctx.pair.phi.carrier);
    axpy(c, 1.0, metric_adjoint(ctx.pair.phi.carrier, H, Hinv, ctx.mode));
    FormField F = exterior_d(c);
    axpy(F, 1.0, wedge_mult(c, c, ctx.mode));
    return F;
}

// exp(-L tau) with L = |k|^2 / 2 applied spectrally
void apply_integrating_factor(FormField& S, double tau) {
    FormField spec = fft_forward(S);
    const TorusLattice& lat = S.lat;
    const int dim = lat.dim, n = lat.n, rr = S.r * S.r;
    std::array<long long, 4> stride{1, 1, 1, 1};
    for (int a = 1; a < dim; ++a) stride[a] = stride[a - 1] * n;
    for (long long s = 0; s < lat.sites(); ++s) {
        double k2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            int kk = fft_wavenumber(int((s / stride[a]) % n), n);
            k2 += double(kk) * kk;
        }
        const double w = std::exp(-0.5 * k2 * tau);
        cplx* p = spec.at(0, s);
        for (int e = 0; e < rr; ++e) p[e] *= w;
    }
    int band = S.band;
    S = fft_inverse(spec);
    S.cls = Herm::herm;
    S.band = band;
}

// nonlinear remainder N(S) = defect(exp S) - L S
FormField flow_remainder(const FlowContext& ctx, const FormField& S) {
    FormField H = pointwise_exp(S);
    FormField defect = flow_defect(ctx, H);
    // subtract L S = -Laplacian S / 2
    FormField spec = fft_forward(S);
    const TorusLattice& lat = S.lat;
    const int dim = lat.dim, n = lat.n, rr = S.r * S.r;
    std::array<long long, 4> stride{1, 1, 1, 1};
    for (int a = 1; a < dim; ++a) stride[a] = stride[a - 1] * n;
    for (long long s = 0; s < lat.sites(); ++s) {
        double k2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            int kk = fft_wavenumber(int((s / stride[a]) % n), n);
            k2 += double(kk) * kk;
        }
        cplx* p = spec.at(0, s);
        for (int e = 0; e < rr; ++e) p[e] *= 0.5 * k2;
    }
    FormField LS = fft_inverse(spec);
    axpy(defect, -1.0, LS);
    return defect;
}

double target_norm(const FlowContext& ctx, const FormField& H) {
    if (ctx.target == FlowTarget::hym) {
        FlowContext tmp = ctx;
        tmp.remove_trace_dir = false;
        return std::sqrt(l2_norm2(flow_defect(tmp, H)));
    }
    return std::sqrt(l2_norm2(full_flatness(ctx, H)));
}

}  // namespace

double hym_defect_norm(const HiggsPair& p, const FormField& H) {
    FlowContext ctx{p, pq_project(p.A.a, 0, 1), FlowTarget::hym, false};
    ctx.a01.band = p.A.a.band;
    return std::sqrt(l2_norm2(flow_defect(ctx, H)));
}

double pluriharmonic_defect_norm(const HiggsPair& p, const FormField& H) {
    FlowContext ctx{p, pq_project(p.A.a, 0, 1), FlowTarget::pluriharmonic, false};
    ctx.a01.band = p.A.a.band;
    return std::sqrt(l2_norm2(full_flatness(ctx, H)));
}

HeatFlowResult metric_heat_flow(const HiggsPair& p, FlowTarget target,
                                const SolveConfig& sc, const MetricField* seed) {
    {
        ResidualReport rep = residual_tneq0_kahler(p);
        double holo = std::sqrt(rep.block_norm2("F02") + rep.block_norm2("dbar_phi") +
                                rep.block_norm2("phi_phi"));
        require(holo <= 1e-8,
                "metric_heat_flow: input does not satisfy the holomorphic blocks");
    }
    const TorusLattice& lat = p.A.a.lat;
    const int r = p.A.a.r;
    const int M = lat.dealias_grid();
    // the flow lives on the dealiasing grid: all products are then plain
    // pointwise products there, truncated only when reporting
    HiggsPair pm{Connection(p.A.group, resample(p.A.a, M)),
                 HiggsField{resample(p.phi.carrier, M)}};
    FlowContext ctx{pm, pq_project(pm.A.a, 0, 1), target, p.A.group.traceless(),
                    Dealias::direct};
    ctx.a01.band = pm.A.a.band;

    HeatFlowResult res;
    FormField S(lat, 0, r, Herm::herm);
    if (seed) {
        seed->validate();
        if (seed->det_fixed) ctx.remove_trace_dir = true;
        if (r == 1) {
            for (long long s = 0; s < S.sites(); ++s)
                S.scalar(0, s) = std::log(seed->h.at(0, s)[0].real());
        } else {
            // principal log of Hermitian positive H by sqrt reduction + series
            SmallMat m(r);
            for (long long s = 0; s < S.sites(); ++s) {
                std::copy(seed->h.at(0, s), seed->h.at(0, s) + r * r, m.a.begin());
                SmallMat x = m;
                int k = 0;
                auto off_identity = [&](const SmallMat& q) {
                    double w = 0.0;
                    for (int i = 0; i < r; ++i)
                        for (int j = 0; j < r; ++j)
                            w = std::max(w, std::abs(q.a[i * r + j] -
                                                     ((i == j) ? 1.0 : 0.0)));
                    return w;
                };
                while (off_identity(x) > 0.3 && k < 30) {
                    x = hermitian_sqrt(x);
                    ++k;
                }
                SmallMat e(r);
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j)
                        e(i, j) = x(i, j) - ((i == j) ? 1.0 : 0.0);
                SmallMat term = e, acc = e;
                for (int t = 2; t <= 20; ++t) {
                    term = mat_mul(term, e);
                    double wgt = ((t % 2 == 0) ? -1.0 : 1.0) / t;
                    for (std::size_t q = 0; q < acc.a.size(); ++q)
                        acc.a[q] += wgt * term.a[q];
                }
                for (auto& v : acc.a) v *= std::ldexp(1.0, k);
                std::copy(acc.a.begin(), acc.a.end(), S.at(0, s));
            }
        }
        S = herm_part(S);
        if (ctx.remove_trace_dir) remove_trace(S);
    }

    auto public_defect = [&](const FormField& S_now) {
        FormField Sn = resample(S_now, lat.n);
        Sn = herm_part(Sn);
        if (ctx.remove_trace_dir) remove_trace(Sn);
        FormField Hn = pointwise_exp(Sn);
        double v = (target == FlowTarget::hym) ? hym_defect_norm(p, Hn)
                                               : pluriharmonic_defect_norm(p, Hn);
        return std::make_pair(v, Hn);
    };

    // move the state to the evaluation grid
    S = resample(S, M);
    S = herm_part(S);
    FormField H = pointwise_exp(S);
    if (min_eigenvalue_hermitian(H) < 1e-8) {
        res.aborted = true;
        res.message = "eigenvalue collapse at the seed metric";
        auto [v0, H0] = public_defect(S);
        res.H.h = H0;
        res.final_defect = v0;
        return res;
    }
    double defect_norm = std::sqrt(l2_norm2(flow_defect(ctx, H)));
    {
        auto [v0, H0] = public_defect(S);
        res.final_defect = v0;
        res.H.h = H0;
        res.H.det_fixed = ctx.remove_trace_dir;
        if (v0 <= sc.tol) {
            res.converged = true;  // already at the target: 0 iterations
            return res;
        }
    }

    // FD descent certificate at iteration 0
    {
        FormField D0 = flow_defect(ctx, H);
        const double eps = 1e-5 / (std::sqrt(l2_norm2(D0)) + 1e-30);
        FormField Sp = S, Sm = S;
        axpy(Sp, -eps, D0);
        axpy(Sm, +eps, D0);
        double gp = l2_norm2(flow_defect(ctx, pointwise_exp(Sp)));
        double gm = l2_norm2(flow_defect(ctx, pointwise_exp(Sm)));
        res.fd_descent_slope = (gp - gm) / (2.0 * eps);
    }

    double h = 0.05;
    const double hmax = 0.8;
    double internal_tol = sc.tol;
    for (int iter = 0; iter < sc.max_iters; ++iter) {
        auto t0 = clock_type::now();
        // Lawson integrating-factor RK4 on Sdot = -(L S + N(S))
        FormField k1 = flow_remainder(ctx, S);
        FormField Sa = S;
        axpy(Sa, -0.5 * h, k1);
        apply_integrating_factor(Sa, 0.5 * h);
        FormField k2 = flow_remainder(ctx, Sa);
        FormField Sb = S;
        apply_integrating_factor(Sb, 0.5 * h);
        axpy(Sb, -0.5 * h, k2);
        FormField k3 = flow_remainder(ctx, Sb);
        FormField Sc = S;
        apply_integrating_factor(Sc, h);
        FormField k3h = k3;
        apply_integrating_factor(k3h, 0.5 * h);
        axpy(Sc, -h, k3h);
        FormField k4 = flow_remainder(ctx, Sc);
        FormField Sn = S;
        apply_integrating_factor(Sn, h);
        FormField k1h = k1;
        apply_integrating_factor(k1h, h);
        FormField k2h = k2;
        apply_integrating_factor(k2h, 0.5 * h);
        FormField k3hh = k3;
        apply_integrating_factor(k3hh, 0.5 * h);
        axpy(Sn, -h / 6.0, k1h);
        axpy(Sn, -h / 3.0, k2h);
        axpy(Sn, -h / 3.0, k3hh);
        axpy(Sn, -h / 6.0, k4);
        Sn = herm_part(Sn);
        if (ctx.remove_trace_dir) remove_trace(Sn);

        FormField Hn = pointwise_exp(Sn);
        double mineig = min_eigenvalue_hermitian(Hn);
        if (mineig < 1e-8) {
            res.aborted = true;
            res.message = "eigenvalue collapse (instability / non-polystable input)";
            break;
        }
        double dn = std::sqrt(l2_norm2(flow_defect(ctx, Hn)));
        res.iterations = iter + 1;
        if (dn <= defect_norm || dn <= internal_tol) {
            S = Sn;
            H = Hn;
            defect_norm = dn;
            h = std::min(h * 1.3, hmax);
            double tv = (target == FlowTarget::hym)
                            ? defect_norm
                            : std::sqrt(l2_norm2(full_flatness(ctx, H)));
            if (iter % sc.report_cadence == 0)
                res.trace.push_back({iter, tv, defect_norm * defect_norm, h,
                                     ms_since(t0)});
            if (tv <= internal_tol) {
                auto [pv, Hn2] = public_defect(S);
                res.final_defect = pv;
                res.H.h = Hn2;
                if (pv <= sc.tol) {
                    res.converged = true;
                    return res;
                }
                internal_tol = 0.3 * internal_tol;  // tighten and keep flowing
            }
        } else {
            h *= 0.5;
            if (h < 1e-8) {
                res.message = "step collapse without reaching the target";
                break;
            }
        }
    }
    auto [pv, Hn2] = public_defect(S);
    res.final_defect = pv;
    res.H.h = Hn2;
    res.H.det_fixed = ctx.remove_trace_dir;
    res.converged = pv <= sc.tol;
    if (!res.converged && res.message.empty())
        res.message = "iteration budget exhausted";
    return res;
}

}  // namespace kwlab
