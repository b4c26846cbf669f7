#pragma once

// Discrete exterior calculus on the flat torus, Fourier-spectral throughout.
//
//   exterior_d      spectral derivative, d∘d = 0 at machine precision
//   hodge_star      pointwise star of the flat orthonormal metric
//   sd_asd_project  f± = (f ± *f)/2 on 2-forms of T^4
//   pq_decompose    (p,q)-type splitting for the pairing z1 = x1+ix2, z2 = x3+ix4
//   lambda_contract Λ = (∧ω)^*, pointwise adjoint of wedging with ω
//   wedge products  matrix wedge with the 3/2-rule dealiasing policy
//
// Dealiasing: every pointwise product is evaluated on a ceil(3N/2) grid and
// truncated back. When both operands carry certified band bounds with
// b_f + b_g <= N/2 - 1 the padded product equals the direct N-grid product
// exactly (no representable aliasing) and the direct path is taken.

#include <vector>

#include "kwlab/field.hpp"

namespace kwlab {

// ----- transforms -----
// Forward: physical samples -> Fourier coefficients (1/n-normalized, DFT bin
// order per axis). Inverse undoes it. Both act on every (component, matrix
// entry) plane.
FormField fft_forward(const FormField& f);
FormField fft_inverse(const FormField& f);

// Spectral resample between grid sizes (zero-pad / truncate). Band bound is
// carried along; truncation clips it.
FormField resample(const FormField& f, int n_new);
// Bin copy alone, acting on a field already holding Fourier coefficients.
FormField spec_resample_bins(const FormField& spec, int n_new);

// Exterior derivative acting on a spectral field (diagonal, no transforms).
FormField exterior_d_spec(const FormField& spec);

// Parseval norm of a spectral field: volume * sum |coeff|^2.
double l2_norm2_spec(const FormField& spec);

// ----- flat_torus_calculus operations -----
FormField exterior_d(const FormField& f);
FormField hodge_star(const FormField& f);
FormField sd_asd_project(const FormField& f, int sign);  // sign = +1 or -1

struct PqPart {
    int p = 0, q = 0;
    FormField part;  // stored in the real dx-component basis
};
std::vector<PqPart> pq_decompose(const FormField& f);
FormField pq_project(const FormField& f, int p, int q);

FormField lambda_contract(const FormField& f);

// Coefficients in the complex wedge basis (dz/dzbar multi-indices, documented
// in complex_basis_types); same component count, pointwise linear change of
// basis. from_complex_coeffs inverts it.
FormField complex_coeffs(const FormField& f);
FormField from_complex_coeffs(const FormField& c);
// (p,q) type of each complex-basis component of a degree-p form.
const std::vector<std::pair<int, int>>& complex_basis_types(int dim, int degree);

// ----- products -----
enum class Dealias {
    automatic,  // direct grid product when bands certify exactness, else padded
    padded,     // always via the 3/2 grid (used by Jacobian/adjoint pairs)
    direct,     // plain pointwise product on the current grid; reserved for
                // evaluation that already lives on a padded grid
};

// Matrix wedge f ∧ g (coefficients multiply as matrices).
FormField wedge_mult(const FormField& f, const FormField& g,
                     Dealias mode = Dealias::automatic);

// c1·(f ∧ g) + c2·(g ∧ f), fused under one dealiasing pass.
FormField graded_combo(const FormField& f, const FormField& g, double c1, double c2,
                       Dealias mode = Dealias::automatic);

// Adjoint (real L2 pairing) of X ↦ c1·(B ∧ X) + c2·(X ∧ B) at fixed B,
// applied to rho of degree deg(B)+px; returns a field of degree px.
FormField graded_combo_adjoint(const FormField& B, const FormField& rho, int px,
                               double c1, double c2, Dealias mode = Dealias::padded);

// Pointwise product of a 0-form by a p-form (left/right); same dealias policy.
FormField mult0(const FormField& g0, const FormField& f, Dealias mode = Dealias::automatic);
FormField mult0_right(const FormField& f, const FormField& g0,
                      Dealias mode = Dealias::automatic);

}  // namespace kwlab
