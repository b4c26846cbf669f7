#include "kwlab/calculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <tuple>

#include "kwlab/fft.hpp"

namespace kwlab {

namespace {

// ----- axis-wise transform driver -----

// Transform every (comp, matrix-entry) plane of `f` along `axis`. Data along
// the axis forms slabs of V = inner*r^2 contiguous values per row, which the
// slab FFT vectorizes over. Short slabs (axis 0) are batched by transposing a
// group of consecutive slabs into one wide one.
void transform_axis(FormField& f, int axis, bool forward) {
    const int n = f.lat.n;
    const FftPlan& plan = fft_plan(n);
    const int rr = f.r * f.r;
    long long inner = 1;
    for (int a = 0; a < axis; ++a) inner *= n;
    const long long sites = f.lat.sites();
    const long long outer = sites / (inner * n);
    const long long V = inner * rr;
    const int sign = forward ? -1 : +1;
    if (V >= 16) {
        for (int comp = 0; comp < f.comps(); ++comp) {
            cplx* base_comp = f.data.data() + std::size_t(comp) * sites * rr;
            for (long long hi = 0; hi < outer; ++hi)
                plan.transform_slab(base_comp + hi * n * V, V, int(V), sign);
        }
        return;
    }
    // batch short slabs: gather B consecutive slabs into an n x (B*V) buffer
    const int B = int(std::min<long long>(outer, 256 / std::max<long long>(V, 1)));
    static thread_local std::vector<cplx> buf;
    if (buf.size() < std::size_t(n) * B * V) buf.resize(std::size_t(n) * B * V);
    for (int comp = 0; comp < f.comps(); ++comp) {
        cplx* base_comp = f.data.data() + std::size_t(comp) * sites * rr;
        for (long long hi0 = 0; hi0 < outer; hi0 += B) {
            const int Bc = int(std::min<long long>(B, outer - hi0));
            for (int b = 0; b < Bc; ++b) {
                const cplx* src = base_comp + (hi0 + b) * n * V;
                for (int t = 0; t < n; ++t)
                    for (int v = 0; v < V; ++v)
                        buf[(std::size_t(t) * Bc + b) * V + v] = src[t * V + v];
            }
            plan.transform_slab(buf.data(), std::size_t(Bc) * V, int(Bc * V), sign);
            for (int b = 0; b < Bc; ++b) {
                cplx* dst = base_comp + (hi0 + b) * n * V;
                for (int t = 0; t < n; ++t)
                    for (int v = 0; v < V; ++v)
                        dst[t * V + v] = buf[(std::size_t(t) * Bc + b) * V + v];
            }
        }
    }
}

int perm_sign(const std::vector<int>& perm) {
    int s = 1;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j)
            if (perm[i] > perm[j]) s = -s;
    return s;
}

// ----- hodge star table -----
struct StarEntry {
    int dst;
    double sign;
};
const std::vector<StarEntry>& star_table(int dim, int p) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<StarEntry>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, p);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const auto& comps = form_components(dim, p);
    std::vector<StarEntry> tab(comps.size());
    for (int c = 0; c < int(comps.size()); ++c) {
        std::vector<int> rest;
        for (int a = 0; a < dim; ++a)
            if (std::find(comps[c].begin(), comps[c].end(), a) == comps[c].end())
                rest.push_back(a);
        std::vector<int> perm = comps[c];
        perm.insert(perm.end(), rest.begin(), rest.end());
        tab[c].dst = form_comp_index(dim, dim - p, rest);
        tab[c].sign = perm_sign(perm);
    }
    return cache.emplace(key, std::move(tab)).first->second;
}

// ----- wedge tables -----
struct WedgeEntry {
    int ci, cj, ck;  // component of f, of g, of output
    double sign;
};
const std::vector<WedgeEntry>& wedge_table(int dim, int p, int q) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, std::vector<WedgeEntry>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(dim, p, q);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<WedgeEntry> tab;
    const auto& ci = form_components(dim, p);
    const auto& cj = form_components(dim, q);
    for (int a = 0; a < int(ci.size()); ++a) {
        for (int b = 0; b < int(cj.size()); ++b) {
            std::vector<int> uni = ci[a];
            bool disjoint = true;
            for (int v : cj[b]) {
                if (std::find(ci[a].begin(), ci[a].end(), v) != ci[a].end()) {
                    disjoint = false;
                    break;
                }
                uni.push_back(v);
            }
            if (!disjoint) continue;
            std::vector<int> sorted = uni;
            std::sort(sorted.begin(), sorted.end());
            tab.push_back({a, b, form_comp_index(dim, p + q, sorted),
                           double(perm_sign(uni))});
        }
    }
    return cache.emplace(key, std::move(tab)).first->second;
}

// out_K += sum over table of sign*(c1 f_I g_J + c2 (-1)^{pq} g_J f_I), pointwise.
void wedge_kernel(const FormField& f, const FormField& g, FormField& out, double c1,
                  double c2) {
    const int p = f.degree, q = g.degree, r = f.r;
    const double flip = ((p * q) % 2 == 0) ? 1.0 : -1.0;
    const auto& tab = wedge_table(f.lat.dim, p, q);
    const long long sites = f.lat.sites();
    const int rr = r * r;
    for (const auto& e : tab) {
        const cplx* fi = f.data.data() + std::size_t(e.ci) * sites * rr;
        const cplx* gj = g.data.data() + std::size_t(e.cj) * sites * rr;
        cplx* ok = out.data.data() + std::size_t(e.ck) * sites * rr;
        const double w1 = e.sign * c1;
        const double w2 = e.sign * c2 * flip;
        if (r == 1) {
            for (long long s = 0; s < sites; ++s)
                ok[s] += (w1 + w2) * fi[s] * gj[s];
        } else if (r == 2) {
            for (long long s = 0; s < sites; ++s) {
                const cplx* a = fi + s * 4;
                const cplx* b = gj + s * 4;
                cplx* c = ok + s * 4;
                if (w1 != 0.0) {
                    c[0] += w1 * (a[0] * b[0] + a[1] * b[2]);
                    c[1] += w1 * (a[0] * b[1] + a[1] * b[3]);
                    c[2] += w1 * (a[2] * b[0] + a[3] * b[2]);
                    c[3] += w1 * (a[2] * b[1] + a[3] * b[3]);
                }
                if (w2 != 0.0) {
                    c[0] += w2 * (b[0] * a[0] + b[1] * a[2]);
                    c[1] += w2 * (b[0] * a[1] + b[1] * a[3]);
                    c[2] += w2 * (b[2] * a[0] + b[3] * a[2]);
                    c[3] += w2 * (b[2] * a[1] + b[3] * a[3]);
                }
            }
        } else {
            for (long long s = 0; s < sites; ++s) {
                if (w1 != 0.0) mat_mul_acc(fi + s * rr, gj + s * rr, ok + s * rr, r, w1);
                if (w2 != 0.0) mat_mul_acc(gj + s * rr, fi + s * rr, ok + s * rr, r, w2);
            }
        }
    }
}

bool fast_path_ok(const FormField& f, const FormField& g) {
    if (f.band < 0 || g.band < 0) return false;
    return f.band + g.band <= f.lat.n / 2 - 1;
}

Herm combo_class(const FormField& f, const FormField& g, double c1, double c2) {
    // brackets/anticombos of anti-Hermitian operands stay classifiable only in
    // special cases handled by callers; default to general.
    (void)f; (void)g; (void)c1; (void)c2;
    return Herm::general;
}

}  // namespace

FormField fft_forward(const FormField& f) {
    FormField out = f;
    for (int a = 0; a < f.lat.dim; ++a) transform_axis(out, a, true);
    return out;
}

FormField fft_inverse(const FormField& f) {
    FormField out = f;
    for (int a = 0; a < f.lat.dim; ++a) transform_axis(out, a, false);
    return out;
}

FormField spec_resample_bins(const FormField& spec, int n_new) {
    const int n1 = spec.lat.n, n2 = n_new;
    if (n2 == n1) return spec;
    TorusLattice lat2 = TorusLattice::make_unchecked(spec.lat.dim, n_new);
    FormField out(lat2, spec.degree, spec.r, spec.cls);
    const int dim = spec.lat.dim;
    const int rr = spec.r * spec.r;
    // Walk the bins of the smaller spectrum; each kept bin maps to the unique
    // bin of the other grid carrying the same integer wavenumber.
    const int nsm = std::min(n1, n2);
    std::array<int, 4> mm{0, 0, 0, 0};
    long long total = 1;
    for (int a = 0; a < dim; ++a) total *= nsm;
    for (long long b = 0; b < total; ++b) {
        long long t = b;
        for (int a = 0; a < dim; ++a) {
            mm[a] = int(t % nsm);
            t /= nsm;
        }
        std::array<int, 4> src{0, 0, 0, 0}, dst{0, 0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            int k = fft_wavenumber(mm[a], nsm);
            src[a] = (k >= 0) ? k : k + n1;
            dst[a] = (k >= 0) ? k : k + n2;
        }
        long long si = 0, di = 0;
        for (int a = dim - 1; a >= 0; --a) {
            si = si * n1 + src[a];
            di = di * n2 + dst[a];
        }
        for (int comp = 0; comp < spec.comps(); ++comp) {
            const cplx* sp = spec.at(comp, si);
            cplx* d = out.at(comp, di);
            for (int e = 0; e < rr; ++e) d[e] = sp[e];
        }
    }
    out.band = spec.band;
    return out;
}

FormField resample(const FormField& f, int n_new) {
    if (n_new == f.lat.n) return f;
    FormField spec = fft_forward(f);
    FormField out = fft_inverse(spec_resample_bins(spec, n_new));
    const int n1 = f.lat.n;
    if (f.band >= 0)
        out.band = std::min(f.band, (n_new % 2 == 0) ? n_new / 2 - 1 : (n_new - 1) / 2);
    else if (n_new > n1)
        out.band = (n1 % 2 == 0) ? n1 / 2 : (n1 - 1) / 2;
    else
        out.band = -1;
    out.cls = f.cls;
    return out;
}

double l2_norm2_spec(const FormField& spec) {
    double s = 0.0;
    for (const auto& v : spec.data) s += v.real() * v.real() + v.imag() * v.imag();
    return s * spec.lat.volume();
}

FormField exterior_d_spec(const FormField& spec) {
    require(spec.degree < spec.lat.dim, "exterior_d: degree overflow (p = dim) rejected");
    const TorusLattice& lat = spec.lat;
    FormField out_spec(lat, spec.degree + 1, spec.r, Herm::general);
    const int dim = lat.dim, n = lat.n;
    const int rr = spec.r * spec.r;
    const long long sites = lat.sites();
    const auto& in_comps = form_components(dim, spec.degree);
    std::vector<std::vector<cplx>> mult(dim, std::vector<cplx>(n));
    for (int a = 0; a < dim; ++a)
        for (int m = 0; m < n; ++m) mult[a][m] = fft_deriv_multiplier(m, n);

    for (int ci = 0; ci < int(in_comps.size()); ++ci) {
        for (int mu = 0; mu < dim; ++mu) {
            if (std::find(in_comps[ci].begin(), in_comps[ci].end(), mu) !=
                in_comps[ci].end())
                continue;
            std::vector<int> sortedK = in_comps[ci];
            sortedK.push_back(mu);
            std::sort(sortedK.begin(), sortedK.end());
            // (d f)_K picks up (-1)^{position of mu within K}
            int pos = 0;
            for (int v : sortedK) {
                if (v == mu) break;
                ++pos;
            }
            const double sgn = (pos % 2 == 0) ? 1.0 : -1.0;
            const int ck = form_comp_index(dim, spec.degree + 1, sortedK);
            const cplx* src = spec.data.data() + std::size_t(ci) * sites * rr;
            cplx* dst = out_spec.data.data() + std::size_t(ck) * sites * rr;
            long long stride_mu = 1;
            for (int a = 0; a < mu; ++a) stride_mu *= n;
            for (long long s = 0; s < sites; ++s) {
                const int mmu = int((s / stride_mu) % n);
                const cplx w = sgn * mult[mu][mmu];
                if (w == cplx(0.0)) continue;
                const cplx* sp = src + s * rr;
                cplx* dp = dst + s * rr;
                for (int e = 0; e < rr; ++e) dp[e] += w * sp[e];
            }
        }
    }
    out_spec.band = spec.band;
    return out_spec;
}

FormField exterior_d(const FormField& f) {
    FormField out = fft_inverse(exterior_d_spec(fft_forward(f)));
    out.cls = f.cls;  // d preserves the hermiticity class (real operator)
    out.band = f.band;
    return out;
}

FormField hodge_star(const FormField& f) {
    const int dim = f.lat.dim;
    const auto& tab = star_table(dim, f.degree);
    FormField out(f.lat, dim - f.degree, f.r, f.cls);
    const long long sites = f.lat.sites();
    const int rr = f.r * f.r;
    for (int c = 0; c < f.comps(); ++c) {
        const cplx* src = f.data.data() + std::size_t(c) * sites * rr;
        cplx* dst = out.data.data() + std::size_t(tab[c].dst) * sites * rr;
        const double s = tab[c].sign;
        for (long long i = 0; i < sites * rr; ++i) dst[i] = s * src[i];
    }
    out.band = f.band;
    return out;
}

FormField sd_asd_project(const FormField& f, int sign) {
    require(f.lat.dim == 4, "sd_asd_project requires dim = 4");
    require(f.degree == 2, "sd_asd_project acts on 2-forms");
    require(sign == 1 || sign == -1, "sign must be +1 or -1");
    FormField sf = hodge_star(f);
    FormField out = f;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = 0.5 * (f.data[i] + double(sign) * sf.data[i]);
    out.band = f.band;
    out.cls = f.cls;
    return out;
}

// ----- complex (p,q) basis -----
namespace {
struct CxBasis {
    // B: columns are complex basis wedges expressed in dx-multiindex coords
    // (small dense row-major c x c), Binv its inverse,
    // types[j] = (p,q) of basis wedge j, projector P_{(p,q)} as dense matrices.
    int nc = 0;
    std::vector<cplx> B, Binv;
    std::vector<std::pair<int, int>> types;
    std::map<std::pair<int, int>, std::vector<cplx>> projectors;
};

const CxBasis& cx_basis(int dim, int p) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, CxBasis> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, p);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    CxBasis bas;
    const int nz = dim / 2;
    // 1-form complex basis in order dz1, dzbar1, dz2, dzbar2 (dim 4).
    // one_forms[j] = coefficients in dx basis; holo[j] = 1 if dz, 0 if dzbar.
    std::vector<std::vector<cplx>> one(2 * nz, std::vector<cplx>(dim, cplx(0.0)));
    std::vector<int> holo(2 * nz);
    for (int zi = 0; zi < nz; ++zi) {
        one[2 * zi][2 * zi] = 1.0;
        one[2 * zi][2 * zi + 1] = cplx(0.0, 1.0);
        holo[2 * zi] = 1;
        one[2 * zi + 1][2 * zi] = 1.0;
        one[2 * zi + 1][2 * zi + 1] = cplx(0.0, -1.0);
        holo[2 * zi + 1] = 0;
    }
    const auto& comps = form_components(dim, p);
    const int nc = int(comps.size());
    bas.nc = nc;
    bas.B.assign(std::size_t(nc) * nc, cplx(0.0));
    bas.types.resize(nc);
    // complex basis wedges: all increasing p-subsets of the 2nz one-forms,
    // in the same lexicographic component order.
    const auto& subsets = form_components(2 * nz, p);
    require(int(subsets.size()) == nc, "complex basis size mismatch");
    for (int j = 0; j < nc; ++j) {
        int np = 0;
        for (int v : subsets[j]) np += holo[v];
        bas.types[j] = {np, p - np};
        // expand the wedge of the chosen complex 1-forms into dx components
        // coefficients[multiindex] += sign * prod of 1-form coefficients
        const auto& sel = subsets[j];
        std::vector<int> pick(p, 0);
        // iterate over all ways to choose one dx index per factor
        std::function<void(int, std::vector<int>&, cplx)> rec =
            [&](int pos, std::vector<int>& ids, cplx coef) {
                if (coef == cplx(0.0)) return;
                if (pos == p) {
                    // check distinct
                    std::vector<int> sorted = ids;
                    std::sort(sorted.begin(), sorted.end());
                    for (int u = 0; u + 1 < p; ++u)
                        if (sorted[u] == sorted[u + 1]) return;
                    int row = form_comp_index(dim, p, sorted);
                    double sgn = perm_sign(ids);
                    bas.B[std::size_t(row) * nc + j] += sgn * coef;
                    return;
                }
                for (int mu = 0; mu < dim; ++mu) {
                    ids[pos] = mu;
                    rec(pos + 1, ids, coef * one[sel[pos]][mu]);
                }
            };
        std::vector<int> ids(p, 0);
        if (p == 0) bas.B[0] = 1.0;
        else rec(0, ids, cplx(1.0));
    }
    // invert B
    SmallMat Bm(nc);
    for (int i = 0; i < nc * nc; ++i) Bm.a[i] = bas.B[i];
    SmallMat Bi = mat_inverse(Bm);
    bas.Binv.assign(Bi.a.begin(), Bi.a.end());
    // projectors
    for (int j = 0; j < nc; ++j) {
        auto t = bas.types[j];
        if (bas.projectors.count(t)) continue;
        std::vector<cplx> P(std::size_t(nc) * nc, cplx(0.0));
        for (int row = 0; row < nc; ++row)
            for (int col = 0; col < nc; ++col) {
                cplx s(0.0);
                for (int k = 0; k < nc; ++k)
                    if (bas.types[k] == t)
                        s += bas.B[std::size_t(row) * nc + k] *
                             bas.Binv[std::size_t(k) * nc + col];
                P[std::size_t(row) * nc + col] = s;
            }
        bas.projectors.emplace(t, std::move(P));
    }
    return cache.emplace(key, std::move(bas)).first->second;
}

// pointwise component-space linear map: out_c = sum_c' M[c,c'] f_c'
FormField apply_comp_matrix(const FormField& f, const std::vector<cplx>& M) {
    FormField out(f.lat, f.degree, f.r, Herm::general);
    const int nc = f.comps();
    const long long sites = f.lat.sites();
    const int rr = f.r * f.r;
    for (int row = 0; row < nc; ++row) {
        cplx* dst = out.data.data() + std::size_t(row) * sites * rr;
        for (int col = 0; col < nc; ++col) {
            const cplx w = M[std::size_t(row) * nc + col];
            if (w == cplx(0.0)) continue;
            const cplx* src = f.data.data() + std::size_t(col) * sites * rr;
            for (long long i = 0; i < sites * rr; ++i) dst[i] += w * src[i];
        }
    }
    out.band = f.band;
    return out;
}
}  // namespace

std::vector<PqPart> pq_decompose(const FormField& f) {
    require(f.lat.dim == 4 || f.lat.dim == 2,
            "pq_decompose: only tori of dim 2 or 4 carry the pairing");
    const auto& bas = cx_basis(f.lat.dim, f.degree);
    std::vector<PqPart> parts;
    for (const auto& [t, P] : bas.projectors) {
        PqPart part;
        part.p = t.first;
        part.q = t.second;
        part.part = apply_comp_matrix(f, P);
        parts.push_back(std::move(part));
    }
    return parts;
}

FormField pq_project(const FormField& f, int p, int q) {
    const auto& bas = cx_basis(f.lat.dim, f.degree);
    auto it = bas.projectors.find({p, q});
    if (it == bas.projectors.end()) {
        FormField zero(f.lat, f.degree, f.r, Herm::general);
        zero.band = 0;
        return zero;
    }
    return apply_comp_matrix(f, it->second);
}

FormField complex_coeffs(const FormField& f) {
    const auto& bas = cx_basis(f.lat.dim, f.degree);
    return apply_comp_matrix(f, bas.Binv);
}

FormField from_complex_coeffs(const FormField& c) {
    const auto& bas = cx_basis(c.lat.dim, c.degree);
    return apply_comp_matrix(c, bas.B);
}

const std::vector<std::pair<int, int>>& complex_basis_types(int dim, int degree) {
    return cx_basis(dim, degree).types;
}

FormField lambda_contract(const FormField& f) {
    require(f.lat.dim == 4, "lambda_contract requires dim = 4");
    require(f.degree == 2, "lambda_contract acts on 2-forms");
    // omega = dx1^dx2 + dx3^dx4; <Λf, u> = <f, u∧omega> pointwise gives
    // Λf = f_{12} + f_{34}.
    const int c12 = form_comp_index(4, 2, {0, 1});
    const int c34 = form_comp_index(4, 2, {2, 3});
    FormField out(f.lat, 0, f.r, f.cls);
    const long long sites = f.lat.sites();
    const int rr = f.r * f.r;
    const cplx* a = f.data.data() + std::size_t(c12) * sites * rr;
    const cplx* b = f.data.data() + std::size_t(c34) * sites * rr;
    for (long long i = 0; i < sites * rr; ++i) out.data[i] = a[i] + b[i];
    out.band = f.band;
    return out;
}

// ----- products -----

namespace {
FormField combo_direct(const FormField& f, const FormField& g, double c1, double c2) {
    FormField out(f.lat, f.degree + g.degree, f.r, combo_class(f, g, c1, c2));
    wedge_kernel(f, g, out, c1, c2);
    if (f.band >= 0 && g.band >= 0) out.band = f.band + g.band;
    return out;
}
}  // namespace

FormField graded_combo(const FormField& f, const FormField& g, double c1, double c2,
                       Dealias mode) {
    require(f.lat == g.lat, "product: mismatched lattices rejected");
    require(f.r == g.r, "product: mismatched fiber ranks");
    require(f.degree + g.degree <= f.lat.dim, "product: degree overflow rejected");
    if (mode == Dealias::direct || (mode == Dealias::automatic && fast_path_ok(f, g)))
        return combo_direct(f, g, c1, c2);
    const int M = f.lat.dealias_grid();
    FormField fp = resample(f, M);
    FormField gp = resample(g, M);
    FormField hp = combo_direct(fp, gp, c1, c2);
    FormField out = resample(hp, f.lat.n);
    if (f.band >= 0 && g.band >= 0) {
        int b = f.band + g.band;
        int cap = (f.lat.n % 2 == 0) ? f.lat.n / 2 - 1 : (f.lat.n - 1) / 2;
        out.band = std::min(b, cap);
    }
    return out;
}

FormField wedge_mult(const FormField& f, const FormField& g, Dealias mode) {
    return graded_combo(f, g, 1.0, 0.0, mode);
}

FormField mult0(const FormField& g0, const FormField& f, Dealias mode) {
    require(g0.degree == 0, "mult0 expects a 0-form multiplier");
    return graded_combo(g0, f, 1.0, 0.0, mode);
}

FormField mult0_right(const FormField& f, const FormField& g0, Dealias mode) {
    require(g0.degree == 0, "mult0_right expects a 0-form multiplier");
    return graded_combo(f, g0, 1.0, 0.0, mode);
}

namespace {
// adjoint of pointwise X -> c1 B∧X + c2 X∧B on a single grid
FormField combo_adjoint_direct(const FormField& B, const FormField& rho, int px,
                               double c1, double c2) {
    const int pb = B.degree;
    const int pk = pb + px;
    require(rho.degree == pk, "combo_adjoint: degree mismatch");
    FormField out(B.lat, px, B.r, Herm::general);
    const auto& tab = wedge_table(B.lat.dim, pb, px);       // for B∧X
    const auto& tab2 = wedge_table(B.lat.dim, px, pb);      // for X∧B
    const long long sites = B.lat.sites();
    const int r = B.r, rr = r * r;
    const FormField Bd = dagger(B);
    auto left = [&](const cplx* a, const cplx* b, cplx* c, double w) {
        // c += w a b
        if (r == 2) {
            c[0] += w * (a[0] * b[0] + a[1] * b[2]);
            c[1] += w * (a[0] * b[1] + a[1] * b[3]);
            c[2] += w * (a[2] * b[0] + a[3] * b[2]);
            c[3] += w * (a[2] * b[1] + a[3] * b[3]);
        } else if (r == 1) {
            c[0] += w * a[0] * b[0];
        } else {
            mat_mul_acc(a, b, c, r, w);
        }
    };
    if (c1 != 0.0) {
        for (const auto& e : tab) {
            const cplx* bi = Bd.data.data() + std::size_t(e.ci) * sites * rr;
            const cplx* rk = rho.data.data() + std::size_t(e.ck) * sites * rr;
            cplx* xj = out.data.data() + std::size_t(e.cj) * sites * rr;
            const double w = e.sign * c1;
            for (long long s = 0; s < sites; ++s)
                left(bi + s * rr, rk + s * rr, xj + s * rr, w);
        }
    }
    if (c2 != 0.0) {
        for (const auto& e : tab2) {
            // (X∧B)_K = sign X_J B_I with ci=J(px), cj=I(pb) in this table
            const cplx* bi = Bd.data.data() + std::size_t(e.cj) * sites * rr;
            const cplx* rk = rho.data.data() + std::size_t(e.ck) * sites * rr;
            cplx* xj = out.data.data() + std::size_t(e.ci) * sites * rr;
            const double w = e.sign * c2;
            for (long long s = 0; s < sites; ++s)
                left(rk + s * rr, bi + s * rr, xj + s * rr, w);
        }
    }
    return out;
}
}  // namespace

FormField graded_combo_adjoint(const FormField& B, const FormField& rho, int px,
                               double c1, double c2, Dealias mode) {
    if (mode == Dealias::direct ||
        (mode == Dealias::automatic && B.band >= 0 && rho.band >= 0 &&
         B.band + rho.band <= B.lat.n / 2 - 1))
        return combo_adjoint_direct(B, rho, px, c1, c2);
    const int M = B.lat.dealias_grid();
    FormField Bp = resample(B, M);
    FormField rp = resample(rho, M);
    FormField xp = combo_adjoint_direct(Bp, rp, px, c1, c2);
    return resample(xp, B.lat.n);
}

}  // namespace kwlab
