#pragma once

// Kahler-surface form of the systems: a = phi - phi*, the t = 0 (Simpson)
// blocks, the t != 0 blocks, and the Kahler-identity cross-check.
//
// phi is carried in the real dx-component basis as a complex matrix 1-form of
// pure (1,0) type; phi* is the pointwise matrix dagger of the carrier (which
// is exactly the k-adjoint (0,1)-form for k = identity). Dolbeault operators
// are the (p,q)-projected channels of the covariant exterior derivative, so
// there is a single source of truth for derivatives.
//
// The bracket entering the moment blocks is [phi ∧ phi*] := phi∧phi* + phi*∧phi,
// which is exactly -(a∧a)^{1,1} for a = phi - phi*.

#include "kwlab/kw.hpp"

namespace kwlab {

// d_A^* a = kKahlerIdentityFactor * Lambda(dbar_A phi + d_A phi*), calibrated
// once on abelian single-mode data and frozen.
inline constexpr cplx kKahlerIdentityFactor{0.0, 1.0};

struct HiggsField {
    FormField carrier;  // degree 1, general class, pure (1,0)

    double purity_defect() const;  // norm of the (0,1) part relative to scale
};

struct HiggsPair {
    Connection A;     // k-unitary (anti-Hermitian coefficient)
    HiggsField phi;
};

HiggsField split_a(const FormField& a);
FormField compose_a(const HiggsField& phi);
FormField phi_star(const HiggsField& phi);  // dagger of the carrier, (0,1)

// (del f, dbar f) of a matrix-valued form of mixed type.
std::pair<FormField, FormField> dolbeault_d(const Connection& A, const FormField& f);

ResidualReport residual_simpson(const HiggsPair& p);
ResidualReport residual_tneq0_kahler(const HiggsPair& p);

struct KahlerIdentityResult {
    FormField lhs;       // d_A^* (phi - phi*)
    FormField rhs;       // Lambda(dbar_A phi + d_A phi*)
    double defect = 0.0; // ||lhs - c rhs|| / (||lhs|| + 1e-30)
};
KahlerIdentityResult kahler_identity_check(const HiggsPair& p);

// FieldVec adapters used by KwLeastSquares (x = [A coefficient, phi carrier]).
ResidualReport residual_simpson_vec(const GaugeGroup& g, const FieldVec& x);
ResidualReport residual_tneq0_kahler_vec(const GaugeGroup& g, const FieldVec& x);
std::vector<FormField> kahler_apply_J(const GaugeGroup& g, KWSystem sys,
                                      const FieldVec& x, const FieldVec& dx);
FieldVec kahler_apply_Jt(const GaugeGroup& g, KWSystem sys, const FieldVec& x,
                         const std::vector<FormField>& rho);

}  // namespace kwlab
