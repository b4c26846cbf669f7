#pragma once

// FormField: a p-form on the torus with one r x r complex matrix per form
// component per site. r = 1 gives plain (scalar) form fields; r > 1 carries
// ad(P)-valued and End(E)-valued fields. Components are ordered by increasing
// lexicographic multi-index dx^{i1}^...^dx^{ip}, i1 < ... < ip. Storage is
// data[((comp*sites + site)*r + i)*r + j].
//
// `band` is a conservative per-axis Fourier band bound (|k_mu| <= band for
// every nonzero coefficient); band = -1 means "unknown / full grid". It feeds
// the dealiasing fast path and the exactness bookkeeping in the identity
// tests.

#include <string>
#include <vector>

#include "kwlab/lattice.hpp"
#include "kwlab/smallmat.hpp"

namespace kwlab {

enum class Herm { anti, herm, general };

// Static component tables for degree p on a d-torus.
const std::vector<std::vector<int>>& form_components(int dim, int p);
int form_comp_count(int dim, int p);
// Lookup of a sorted multi-index; -1 if absent.
int form_comp_index(int dim, int p, const std::vector<int>& idx);

struct FormField {
    TorusLattice lat;
    int degree = 0;
    int r = 1;
    Herm cls = Herm::general;
    int band = -1;
    std::vector<cplx> data;

    FormField() = default;
    FormField(const TorusLattice& l, int p, int rank, Herm c = Herm::general)
        : lat(l), degree(p), r(rank), cls(c), band(-1) {
        require(p >= 0 && p <= l.dim, "form degree out of range");
        data.assign(std::size_t(comps()) * l.sites() * r * r, cplx(0.0));
    }

    int comps() const { return form_comp_count(lat.dim, degree); }
    long long sites() const { return lat.sites(); }
    std::size_t mats() const { return std::size_t(comps()) * sites(); }

    cplx* at(int comp, long long site) {
        return data.data() + (std::size_t(comp) * sites() + site) * r * r;
    }
    const cplx* at(int comp, long long site) const {
        return data.data() + (std::size_t(comp) * sites() + site) * r * r;
    }
    // Scalar access for r = 1 fields.
    cplx& scalar(int comp, long long site) { return *at(comp, site); }
    const cplx& scalar(int comp, long long site) const { return *at(comp, site); }

    FormField like(int p, Herm c = Herm::general) const {
        return FormField(lat, p, r, c);
    }
};

// ----- vector-space helpers -----
void check_same_shape(const FormField& a, const FormField& b, const char* what);
FormField add(const FormField& a, const FormField& b);
FormField sub(const FormField& a, const FormField& b);
void axpy(FormField& y, cplx alpha, const FormField& x);  // y += alpha x
FormField scaled(const FormField& a, cplx alpha);

// Pointwise matrix dagger on every coefficient; anti <-> anti, herm <-> herm.
FormField dagger(const FormField& a);
// Hermitian / anti-Hermitian projections of the coefficients.
FormField herm_part(const FormField& a);
FormField antiherm_part(const FormField& a);
// Remove the fiber trace (project to traceless part).
void remove_trace(FormField& a);

// Max pointwise deviation from the declared hermiticity class, relative to
// the field scale; used by the invariant checks.
double hermiticity_defect(const FormField& a, Herm cls);
double trace_defect(const FormField& a);
double max_abs(const FormField& a);

// ----- L2 structure -----
// Complex inner product: cell * sum_sites sum_comps tr(f g^dagger).
cplx l2_inner(const FormField& f, const FormField& g);
// Real (fiber-metric) inner product Re of the above.
double l2_inner_re(const FormField& f, const FormField& g);
double l2_norm2(const FormField& f);
double l2_norm(const FormField& f);

// Two-slot tensor field (values T_{mu;nu}), used by the full covariant
// derivative; same storage conventions with d*d slots.
struct TensorField {
    TorusLattice lat;
    int r = 1;
    std::vector<cplx> data;

    TensorField() = default;
    TensorField(const TorusLattice& l, int rank) : lat(l), r(rank) {
        data.assign(std::size_t(l.dim) * l.dim * l.sites() * rank * rank, cplx(0.0));
    }
    cplx* at(int mu, int nu, long long site) {
        return data.data() +
               ((std::size_t(mu) * lat.dim + nu) * lat.sites() + site) * r * r;
    }
    const cplx* at(int mu, int nu, long long site) const {
        return data.data() +
               ((std::size_t(mu) * lat.dim + nu) * lat.sites() + site) * r * r;
    }
};

double l2_norm2(const TensorField& t);

}  // namespace kwlab
