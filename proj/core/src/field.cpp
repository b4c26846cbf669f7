#include "kwlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace kwlab {

namespace {
void gen_components(int dim, int p, std::vector<std::vector<int>>& out) {
    std::vector<int> idx(p);
    // lexicographic enumeration of increasing multi-indices
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == p) {
            out.push_back(idx);
            return;
        }
        for (int i = start; i < dim; ++i) {
            idx[pos] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
    if (p == 0) out.assign(1, std::vector<int>{});
}
}  // namespace

const std::vector<std::vector<int>>& form_components(int dim, int p) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, p);
    auto it = cache.find(key);
    if (it == cache.end()) {
        std::vector<std::vector<int>> v;
        gen_components(dim, p, v);
        it = cache.emplace(key, std::move(v)).first;
    }
    return it->second;
}

int form_comp_count(int dim, int p) { return binom(dim, p); }

int form_comp_index(int dim, int p, const std::vector<int>& idx) {
    const auto& tab = form_components(dim, p);
    for (int c = 0; c < int(tab.size()); ++c)
        if (tab[c] == idx) return c;
    return -1;
}

void check_same_shape(const FormField& a, const FormField& b, const char* what) {
    require(a.lat == b.lat, std::string(what) + ": mismatched lattices rejected");
    require(a.degree == b.degree, std::string(what) + ": mismatched degrees");
    require(a.r == b.r, std::string(what) + ": mismatched fiber ranks");
}

FormField add(const FormField& a, const FormField& b) {
    check_same_shape(a, b, "add");
    FormField out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    out.cls = (a.cls == b.cls) ? a.cls : Herm::general;
    out.band = (a.band < 0 || b.band < 0) ? -1 : std::max(a.band, b.band);
    return out;
}

FormField sub(const FormField& a, const FormField& b) {
    check_same_shape(a, b, "sub");
    FormField out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    out.cls = (a.cls == b.cls) ? a.cls : Herm::general;
    out.band = (a.band < 0 || b.band < 0) ? -1 : std::max(a.band, b.band);
    return out;
}

void axpy(FormField& y, cplx alpha, const FormField& x) {
    check_same_shape(y, x, "axpy");
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += alpha * x.data[i];
    if (y.cls != x.cls || alpha.imag() != 0.0) y.cls = Herm::general;
    y.band = (y.band < 0 || x.band < 0) ? -1 : std::max(y.band, x.band);
}

FormField scaled(const FormField& a, cplx alpha) {
    FormField out = a;
    for (auto& v : out.data) v *= alpha;
    if (alpha.imag() != 0.0) {
        // multiplication by a purely imaginary scalar flips the class
        if (alpha.real() == 0.0) {
            if (a.cls == Herm::anti) out.cls = Herm::herm;
            else if (a.cls == Herm::herm) out.cls = Herm::anti;
        } else {
            out.cls = Herm::general;
        }
    }
    return out;
}

FormField dagger(const FormField& a) {
    FormField out = a;
    const int r = a.r;
    std::vector<cplx> tmp(std::size_t(r) * r);
    for (std::size_t m = 0; m < a.mats(); ++m) {
        const cplx* src = a.data.data() + m * r * r;
        mat_dagger(src, tmp.data(), r);
        std::copy(tmp.begin(), tmp.end(), out.data.begin() + m * r * r);
    }
    return out;
}

FormField herm_part(const FormField& a) {
    FormField d = dagger(a);
    FormField out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = 0.5 * (a.data[i] + d.data[i]);
    out.cls = Herm::herm;
    return out;
}

FormField antiherm_part(const FormField& a) {
    FormField d = dagger(a);
    FormField out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = 0.5 * (a.data[i] - d.data[i]);
    out.cls = Herm::anti;
    return out;
}

void remove_trace(FormField& a) {
    const int r = a.r;
    if (r == 1) return;
    for (std::size_t m = 0; m < a.mats(); ++m) {
        cplx* p = a.data.data() + m * r * r;
        cplx tr = mat_trace(p, r) / double(r);
        for (int i = 0; i < r; ++i) p[i * r + i] -= tr;
    }
}

double max_abs(const FormField& a) {
    double mx = 0.0;
    for (const auto& v : a.data) mx = std::max(mx, std::abs(v));
    return mx;
}

double hermiticity_defect(const FormField& a, Herm cls) {
    if (cls == Herm::general) return 0.0;
    const int r = a.r;
    const double sign = (cls == Herm::anti) ? 1.0 : -1.0;
    double mx = 0.0;
    for (std::size_t m = 0; m < a.mats(); ++m) {
        const cplx* p = a.data.data() + m * r * r;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                mx = std::max(mx, std::abs(p[i * r + j] + sign * std::conj(p[j * r + i])));
    }
    double scale = max_abs(a);
    return (scale > 0.0) ? mx / scale : mx;
}

double trace_defect(const FormField& a) {
    const int r = a.r;
    double mx = 0.0, scale = max_abs(a);
    for (std::size_t m = 0; m < a.mats(); ++m)
        mx = std::max(mx, std::abs(mat_trace(a.data.data() + m * r * r, r)));
    return (scale > 0.0) ? mx / scale : mx;
}

cplx l2_inner(const FormField& f, const FormField& g) {
    check_same_shape(f, g, "l2_inner");
    cplx s(0.0, 0.0);
    const int rr = f.r * f.r;
    for (std::size_t m = 0; m < f.mats(); ++m) {
        const cplx* a = f.data.data() + m * rr;
        const cplx* b = g.data.data() + m * rr;
        for (int i = 0; i < rr; ++i) s += a[i] * std::conj(b[i]);
    }
    return s * f.lat.cell();
}

double l2_inner_re(const FormField& f, const FormField& g) {
    check_same_shape(f, g, "l2_inner");
    double s = 0.0;
    const int rr = f.r * f.r;
    for (std::size_t m = 0; m < f.mats(); ++m) {
        const cplx* a = f.data.data() + m * rr;
        const cplx* b = g.data.data() + m * rr;
        for (int i = 0; i < rr; ++i)
            s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    }
    return s * f.lat.cell();
}

double l2_norm2(const FormField& f) {
    double s = 0.0;
    for (const auto& v : f.data) s += v.real() * v.real() + v.imag() * v.imag();
    return s * f.lat.cell();
}

double l2_norm(const FormField& f) { return std::sqrt(l2_norm2(f)); }

double l2_norm2(const TensorField& t) {
    double s = 0.0;
    for (const auto& v : t.data) s += v.real() * v.real() + v.imag() * v.imag();
    return s * t.lat.cell();
}

}  // namespace kwlab
