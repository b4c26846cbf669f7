#include "kwlab/gauge.hpp"

#include <algorithm>
#include <cmath>

#include "kwlab/fft.hpp"

namespace kwlab {

SmallMat su2_basis(int k) {
    require(k >= 1 && k <= 3, "su2 basis index in 1..3");
    SmallMat m(2);
    const cplx mi2(0.0, -0.5);  // -(i/2)
    switch (k) {
        case 1:  // sigma_1
            m(0, 1) = mi2;
            m(1, 0) = mi2;
            break;
        case 2:  // sigma_2
            m(0, 1) = mi2 * cplx(0.0, -1.0);
            m(1, 0) = mi2 * cplx(0.0, 1.0);
            break;
        default:  // sigma_3
            m(0, 0) = mi2;
            m(1, 1) = -mi2;
            break;
    }
    return m;
}

FormField bracket_wedge(const FormField& f, const FormField& g, Dealias mode) {
    const int pq = f.degree * g.degree;
    const double c2 = (pq % 2 == 0) ? -0.5 : 0.5;
    FormField out = graded_combo(f, g, 0.5, c2, mode);
    if (f.cls == Herm::anti && g.cls == Herm::anti) out.cls = Herm::anti;
    return out;
}

FormField graded_commutator(const FormField& B, const FormField& f, Dealias mode) {
    const int pq = B.degree * f.degree;
    const double c2 = (pq % 2 == 0) ? -1.0 : 1.0;
    FormField out = graded_combo(B, f, 1.0, c2, mode);
    if (B.cls == Herm::anti && f.cls == Herm::anti) out.cls = Herm::anti;
    return out;
}

FormField curvature(const Connection& A, Dealias mode) {
    FormField f = exterior_d(A.a);
    FormField aa = wedge_mult(A.a, A.a, mode);
    FormField out = add(f, aa);
    out.cls = (A.a.cls == Herm::anti) ? Herm::anti : Herm::general;
    return out;
}

FormField covariant_d(const Connection& A, const FormField& f, Dealias mode) {
    require(f.degree < f.lat.dim, "covariant_d: degree overflow rejected");
    FormField df = exterior_d(f);
    FormField br = graded_commutator(A.a, f, mode);
    FormField out = add(df, br);
    if (A.a.cls == Herm::anti && f.cls == Herm::anti) out.cls = Herm::anti;
    return out;
}

FormField covariant_d_adjoint(const Connection& A, const FormField& f, Dealias mode) {
    require(f.degree >= 1, "covariant_d_adjoint: p = 0 rejected");
    // d_A^* = -* d_A * on the flat even-dimensional torus, every degree.
    FormField sf = hodge_star(f);
    FormField dsf = covariant_d(A, sf, mode);
    FormField out = hodge_star(dsf);
    for (auto& v : out.data) v = -v;
    if (A.a.cls == Herm::anti && f.cls == Herm::anti) out.cls = Herm::anti;
    return out;
}

TensorField full_covariant_derivative(const Connection& A, const FormField& f) {
    require(f.degree == 1, "full_covariant_derivative expects a 1-form");
    const TorusLattice& lat = f.lat;
    const int dim = lat.dim, r = f.r, rr = r * r;
    const long long sites = lat.sites();
    TensorField T(lat, r);
    // spectral partials of each component
    FormField spec = fft_forward(f);
    std::vector<std::vector<cplx>> mult(dim, std::vector<cplx>(lat.n));
    for (int a = 0; a < dim; ++a)
        for (int m = 0; m < lat.n; ++m) mult[a][m] = fft_deriv_multiplier(m, lat.n);
    for (int mu = 0; mu < dim; ++mu) {
        for (int nu = 0; nu < dim; ++nu) {
            FormField comp(lat, 0, r);
            long long stride_nu = 1;
            for (int a = 0; a < nu; ++a) stride_nu *= lat.n;
            for (long long s = 0; s < sites; ++s) {
                const cplx w = mult[nu][int((s / stride_nu) % lat.n)];
                const cplx* sp = spec.at(mu, s);
                cplx* dp = comp.at(0, s);
                for (int e = 0; e < rr; ++e) dp[e] = w * sp[e];
            }
            comp = fft_inverse(comp);
            comp.band = f.band;
            // bracket term [A_nu, f_mu]
            FormField anu(lat, 0, r, A.a.cls);
            anu.band = A.a.band;
            FormField fmu(lat, 0, r, f.cls);
            fmu.band = f.band;
            std::copy(A.a.at(nu, 0), A.a.at(nu, 0) + sites * rr, anu.at(0, 0));
            std::copy(f.at(mu, 0), f.at(mu, 0) + sites * rr, fmu.at(0, 0));
            FormField br = graded_combo(anu, fmu, 1.0, -1.0);
            for (long long s = 0; s < sites; ++s) {
                cplx* dst = T.at(mu, nu, s);
                const cplx* c1 = comp.at(0, s);
                const cplx* c2 = br.at(0, s);
                for (int e = 0; e < rr; ++e) dst[e] = c1[e] + c2[e];
            }
        }
    }
    return T;
}

FormField full_covariant_derivative_adjoint(const Connection& A, const TensorField& T) {
    const TorusLattice& lat = T.lat;
    const int dim = lat.dim, r = T.r, rr = r * r;
    const long long sites = lat.sites();
    FormField out(lat, 1, r, Herm::general);
    for (int mu = 0; mu < dim; ++mu) {
        FormField acc(lat, 0, r);
        for (int nu = 0; nu < dim; ++nu) {
            FormField tmn(lat, 0, r);
            std::copy(T.at(mu, nu, 0), T.at(mu, nu, 0) + sites * rr, tmn.at(0, 0));
            // -∂_nu T_{mu;nu}
            FormField spec = fft_forward(tmn);
            long long stride_nu = 1;
            for (int a = 0; a < nu; ++a) stride_nu *= lat.n;
            for (long long s = 0; s < sites; ++s) {
                const cplx w = -fft_deriv_multiplier(int((s / stride_nu) % lat.n), lat.n);
                cplx* sp = spec.at(0, s);
                for (int e = 0; e < rr; ++e) sp[e] *= w;
            }
            FormField dpart = fft_inverse(spec);
            // -[A_nu, T_{mu;nu}]
            FormField anu(lat, 0, r, A.a.cls);
            anu.band = A.a.band;
            std::copy(A.a.at(nu, 0), A.a.at(nu, 0) + sites * rr, anu.at(0, 0));
            FormField br = graded_combo(anu, tmn, -1.0, 1.0);
            for (long long s = 0; s < sites; ++s) {
                cplx* ap = acc.at(0, s);
                const cplx* c1 = dpart.at(0, s);
                const cplx* c2 = br.at(0, s);
                for (int e = 0; e < rr; ++e) ap[e] += c1[e] + c2[e];
            }
        }
        std::copy(acc.at(0, 0), acc.at(0, 0) + sites * rr, out.at(mu, 0));
    }
    return out;
}

ComplexifiedCurvature complexified_curvature(const Connection& A, const FormField& a) {
    require(a.cls == Herm::anti, "complexified_curvature expects anti-Hermitian a");
    require(hermiticity_defect(a, Herm::anti) < 1e-10,
            "complexified_curvature: field is not anti-Hermitian");
    ComplexifiedCurvature out;
    // independent route: curvature of c = A + i a
    FormField c = A.a;
    axpy(c, cplx(0.0, 1.0), a);
    c.cls = Herm::general;
    Connection Ac(A.group, c);
    Ac.a.cls = Herm::general;
    out.total = exterior_d(c);
    FormField cc = wedge_mult(c, c);
    out.total = add(out.total, cc);
    // algebraic decomposition
    FormField W = wedge_mult(a, a);
    W.cls = Herm::anti;
    out.real_part = sub(curvature(A), W);
    out.real_part.cls = Herm::anti;
    out.imag_part = covariant_d(A, a);
    out.imag_part.cls = Herm::anti;
    return out;
}

namespace {
// closed-form 2x2 exp: X = alpha I + W (W traceless), W^2 = delta I,
// exp(X) = e^alpha ( cosh(sqrt(delta)) I + sinh(sqrt(delta))/sqrt(delta) W ).
void exp2x2(const cplx* p, cplx* out) {
    const cplx alpha = 0.5 * (p[0] + p[3]);
    const cplx w0 = p[0] - alpha, w1 = p[1], w2 = p[2], w3 = p[3] - alpha;
    const cplx delta = w0 * w0 + w1 * w2;
    const cplx sd = std::sqrt(delta);
    cplx ch, shs;  // cosh(sd), sinh(sd)/sd
    if (std::abs(sd) < 1e-8) {
        ch = 1.0 + delta / 2.0;
        shs = 1.0 + delta / 6.0;
    } else {
        ch = std::cosh(sd);
        shs = std::sinh(sd) / sd;
    }
    const cplx ea = std::exp(alpha);
    out[0] = ea * (ch + shs * w0);
    out[1] = ea * (shs * w1);
    out[2] = ea * (shs * w2);
    out[3] = ea * (ch + shs * w3);
}

// Hermitian 2x2 eigenvalues (ascending)
inline void herm_eig2(const cplx* p, double& lo, double& hi) {
    const double tr2 = 0.5 * (p[0].real() + p[3].real());
    const double dif = 0.5 * (p[0].real() - p[3].real());
    const double m = std::sqrt(dif * dif + std::norm(p[1]));
    lo = tr2 - m;
    hi = tr2 + m;
}
}  // namespace

FormField pointwise_inverse(const FormField& g0) {
    require(g0.degree == 0, "pointwise_inverse expects a 0-form");
    const int r = g0.r;
    FormField out = g0;
    out.band = -1;
    out.cls = Herm::general;
    if (r == 1) {
        for (long long s = 0; s < g0.sites(); ++s) {
            const cplx z = *g0.at(0, s);
            if (!(std::abs(z) > 1e-12))
                throw PreconditionError("singular gauge field rejected (cond > 1e12)");
            *out.at(0, s) = 1.0 / z;
        }
        return out;
    }
    if (r == 2) {
        for (long long s = 0; s < g0.sites(); ++s) {
            const cplx* p = g0.at(0, s);
            const cplx det = p[0] * p[3] - p[1] * p[2];
            // cond estimate via Frobenius bound: cond2 <= ||g||_F ||g^-1||_F
            const double nf = std::sqrt(std::norm(p[0]) + std::norm(p[1]) +
                                        std::norm(p[2]) + std::norm(p[3]));
            if (!(std::abs(det) > 1e-12 * nf * nf) || !(nf * nf / std::abs(det) < 1e12))
                throw PreconditionError("singular gauge field rejected (cond > 1e12)");
            cplx* q = out.at(0, s);
            q[0] = p[3] / det;
            q[1] = -p[1] / det;
            q[2] = -p[2] / det;
            q[3] = p[0] / det;
        }
        return out;
    }
    SmallMat m(r);
    for (long long s = 0; s < g0.sites(); ++s) {
        const cplx* p = g0.at(0, s);
        std::copy(p, p + r * r, m.a.begin());
        if (!(mat_cond2(m) < 1e12))
            throw PreconditionError("singular gauge field rejected (cond > 1e12)");
        SmallMat mi = mat_inverse(m);
        std::copy(mi.a.begin(), mi.a.end(), out.at(0, s));
    }
    return out;
}

FormField pointwise_exp(const FormField& x0) {
    require(x0.degree == 0, "pointwise_exp expects a 0-form");
    const int r = x0.r;
    FormField out = x0;
    out.band = -1;
    out.cls = (x0.cls == Herm::herm) ? Herm::herm : Herm::general;
    if (r == 1) {
        for (long long s = 0; s < x0.sites(); ++s) *out.at(0, s) = std::exp(*x0.at(0, s));
        return out;
    }
    if (r == 2) {
        for (long long s = 0; s < x0.sites(); ++s) exp2x2(x0.at(0, s), out.at(0, s));
        return out;
    }
    SmallMat m(r);
    for (long long s = 0; s < x0.sites(); ++s) {
        const cplx* p = x0.at(0, s);
        std::copy(p, p + r * r, m.a.begin());
        SmallMat e = mat_exp(m);
        std::copy(e.a.begin(), e.a.end(), out.at(0, s));
    }
    return out;
}

FormField pointwise_sqrt_hpd(const FormField& h0) {
    require(h0.degree == 0, "pointwise_sqrt_hpd expects a 0-form");
    const int r = h0.r;
    FormField out = h0;
    out.band = -1;
    out.cls = Herm::herm;
    if (r == 1) {
        for (long long s = 0; s < h0.sites(); ++s)
            *out.at(0, s) = std::sqrt(std::max(h0.at(0, s)->real(), 0.0));
        return out;
    }
    if (r == 2) {
        for (long long s = 0; s < h0.sites(); ++s) {
            const cplx* p = h0.at(0, s);
            double lo, hi;
            herm_eig2(p, lo, hi);
            const double sl = std::sqrt(std::max(lo, 0.0)), sh = std::sqrt(std::max(hi, 0.0));
            const double tr2 = 0.5 * (p[0].real() + p[3].real());
            // sqrt = c I + d W with W = H - tr/2 I
            const double m = 0.5 * (hi - lo);
            const double c = 0.5 * (sh + sl);
            const double d = (m > 1e-300) ? 0.5 * (sh - sl) / m : 0.0;
            cplx* q = out.at(0, s);
            q[0] = c + d * (p[0] - tr2);
            q[1] = d * p[1];
            q[2] = d * p[2];
            q[3] = c + d * (p[3] - tr2);
        }
        return out;
    }
    SmallMat m(r);
    for (long long s = 0; s < h0.sites(); ++s) {
        const cplx* p = h0.at(0, s);
        std::copy(p, p + r * r, m.a.begin());
        SmallMat q = hermitian_sqrt(m);
        std::copy(q.a.begin(), q.a.end(), out.at(0, s));
    }
    return out;
}

double max_cond2(const FormField& g0) {
    const int r = g0.r;
    SmallMat m(r);
    double worst = 0.0;
    for (long long s = 0; s < g0.sites(); ++s) {
        const cplx* p = g0.at(0, s);
        std::copy(p, p + r * r, m.a.begin());
        worst = std::max(worst, mat_cond2(m));
    }
    return worst;
}

double min_eigenvalue_hermitian(const FormField& h0) {
    const int r = h0.r;
    double lo = std::numeric_limits<double>::infinity();
    if (r == 1) {
        for (long long s = 0; s < h0.sites(); ++s)
            lo = std::min(lo, h0.at(0, s)->real());
        return lo;
    }
    if (r == 2) {
        for (long long s = 0; s < h0.sites(); ++s) {
            double a, b;
            herm_eig2(h0.at(0, s), a, b);
            lo = std::min(lo, a);
        }
        return lo;
    }
    SmallMat m(r);
    for (long long s = 0; s < h0.sites(); ++s) {
        const cplx* p = h0.at(0, s);
        std::copy(p, p + r * r, m.a.begin());
        lo = std::min(lo, hermitian_eigenvalues(m).front());
    }
    return lo;
}

namespace {
double unitarity_defect(const FormField& g0) {
    const int r = g0.r, rr = r * r;
    std::vector<cplx> gd(rr), prod(rr);
    double worst = 0.0;
    for (long long s = 0; s < g0.sites(); ++s) {
        const cplx* p = g0.at(0, s);
        mat_dagger(p, gd.data(), r);
        std::fill(prod.begin(), prod.end(), cplx(0.0));
        mat_mul_acc(gd.data(), p, prod.data(), r, 1.0);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                worst = std::max(worst,
                                 std::abs(prod[i * r + j] - ((i == j) ? 1.0 : 0.0)));
    }
    return worst;
}
}  // namespace

Connection apply_gauge(const GaugeTransform& g, const Connection& A) {
    require(g.g.degree == 0, "gauge field must be a 0-form");
    if (g.unitary)
        require(unitarity_defect(g.g) < 1e-10, "gauge field claimed unitary is not");
    FormField gi = pointwise_inverse(g.g);
    FormField gA = mult0(g.g, A.a, Dealias::padded);
    FormField gAgi = mult0_right(gA, gi, Dealias::padded);
    FormField dg = exterior_d(g.g);
    FormField dggi = mult0_right(dg, gi, Dealias::padded);
    FormField out = sub(gAgi, dggi);
    out.cls = g.unitary ? Herm::anti : Herm::general;
    return Connection(A.group, out);
}

FormField apply_gauge(const GaugeTransform& g, const FormField& f) {
    FormField gi = pointwise_inverse(g.g);
    FormField gf = mult0(g.g, f, Dealias::padded);
    FormField out = mult0_right(gf, gi, Dealias::padded);
    out.cls = (g.unitary && f.cls != Herm::general) ? f.cls : Herm::general;
    return out;
}

FormField sample_ad_form(const TorusLattice& lat, const GaugeGroup& g, int degree,
                         int band, double amplitude, Rng& rng, Herm cls) {
    require(band >= 0 && band <= lat.n / 2 - 1, "sample band out of range");
    const int r = g.rank, rr = r * r;
    FormField spec(lat, degree, r, cls);
    const int dim = lat.dim, n = lat.n;
    // enumerate modes with |k|_inf <= band; fill half-space and mirror
    std::vector<std::array<int, 4>> modes;
    std::array<int, 4> k{0, 0, 0, 0};
    std::function<void(int)> rec = [&](int a) {
        if (a == dim) {
            modes.push_back(k);
            return;
        }
        for (int v = -band; v <= band; ++v) {
            k[a] = v;
            rec(a + 1);
        }
    };
    rec(0);
    auto bin_of = [&](const std::array<int, 4>& kk) {
        long long idx = 0;
        for (int a = dim - 1; a >= 0; --a) {
            int m = (kk[a] >= 0) ? kk[a] : kk[a] + n;
            idx = idx * n + m;
        }
        return idx;
    };
    const double norm = amplitude / std::sqrt(double(modes.size()) * rr);
    for (const auto& kk : modes) {
        // process each {k, -k} pair once
        bool self = true;
        bool lead = true;
        for (int a = dim - 1; a >= 0; --a) {
            if (kk[a] != 0) {
                self = false;
                lead = kk[a] > 0;
                break;
            }
        }
        if (!self && !lead) continue;
        std::array<int, 4> mk{0, 0, 0, 0};
        for (int a = 0; a < dim; ++a) mk[a] = -kk[a];
        for (int comp = 0; comp < spec.comps(); ++comp) {
            SmallMat X(r);
            for (int e = 0; e < rr; ++e) X.a[e] = norm * rng.gauss_cplx();
            if (g.traceless()) {
                cplx tr = mat_trace(X.data(), r) / double(r);
                for (int i = 0; i < r; ++i) X(i, i) -= tr;
            }
            if (self) {
                // zero mode must itself carry the class
                SmallMat Xd = mat_dagger(X);
                for (int e = 0; e < rr; ++e) {
                    if (cls == Herm::anti) X.a[e] = 0.5 * (X.a[e] - Xd.a[e]);
                    else if (cls == Herm::herm) X.a[e] = 0.5 * (X.a[e] + Xd.a[e]);
                }
                std::copy(X.a.begin(), X.a.end(), spec.at(comp, bin_of(kk)));
            } else {
                std::copy(X.a.begin(), X.a.end(), spec.at(comp, bin_of(kk)));
                // mirror: class c requires fhat(-k) = s * fhat(k)^dagger
                SmallMat Xd = mat_dagger(X);
                double s = (cls == Herm::anti) ? -1.0 : 1.0;
                if (cls == Herm::general) {
                    for (int e = 0; e < rr; ++e) Xd.a[e] = norm * rng.gauss_cplx();
                    if (g.traceless()) {
                        cplx tr = mat_trace(Xd.data(), r) / double(r);
                        for (int i = 0; i < r; ++i) Xd(i, i) -= tr;
                    }
                    s = 1.0;
                }
                for (int e = 0; e < rr; ++e) Xd.a[e] *= s;
                std::copy(Xd.a.begin(), Xd.a.end(), spec.at(comp, bin_of(mk)));
            }
        }
    }
    FormField out = fft_inverse(spec);
    out.cls = cls;
    out.band = band;
    return out;
}

GaugeTransform sample_unitary_gauge(const TorusLattice& lat, const GaugeGroup& g,
                                    int band, double amplitude, Rng& rng) {
    FormField x = sample_ad_form(lat, g, 0, band, amplitude, rng, Herm::anti);
    GaugeTransform t;
    t.g = pointwise_exp(x);
    t.unitary = true;
    return t;
}

}  // namespace kwlab
