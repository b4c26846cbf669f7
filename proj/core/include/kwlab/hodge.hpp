#pragma once

// The nonabelian-Hodge bridge at desk scale: metrics h = kH on the trivial
// bundle, the flat connection D^1_h built from Higgs data plus a metric, the
// lambda-family interpolating Higgs operators (lambda = 0) and connections
// (lambda = 1), the inverse decomposition of a flat connection, and the
// rank-1 exact oracle.
//
// Conventions in the fixed trivialization with k = identity:
//   dbar_E = dbar + a,           a := (0,1) part of the input connection A
//   Chern (1,0) coefficient      b = H^{-1} del H - H^{-1} a^dagger H
//   theta^{*,h}                  H^{-1} theta^dagger H
//   D^1_h = d + (a + b + theta + theta^{*,h})
//   lambda-connection            D^lambda = (dbar + lambda del) + c_lambda,
//                                c_lambda = (a + theta) + lambda (b + theta^{*,h})
//   flatness defect              F^lambda = (dbar + lambda del) c_lambda
//                                           + c_lambda ∧ c_lambda
// A flat connection nabla = d + nu decomposes against H as nu = u + Theta:
//   u     = (nu - H^{-1} nu^dagger H + H^{-1} dH) / 2   (D^0 = d + u h-unitary)
//   Theta = (nu + H^{-1} nu^dagger H - H^{-1} dH) / 2   (h-self-adjoint)
// with theta_h / theta_h^* the (1,0)/(0,1) parts of Theta.

#include "kwlab/kahler.hpp"

namespace kwlab {

struct MetricField {
    FormField h;  // degree-0 Hermitian positive-definite field H
    bool det_fixed = false;

    double min_eigenvalue() const { return min_eigenvalue_hermitian(h); }
    double det_defect() const;  // max |det H - 1| over sites
    void validate() const;
    static MetricField identity(const TorusLattice& lat, int rank);
};

struct FlatBundleData {
    GaugeGroup group;
    FormField conn;  // general-complex coefficient nu of nabla = d + nu
};

struct LambdaConnection {
    GaugeGroup group;
    cplx lambda{0.0, 0.0};
    FormField c_const;   // a + theta
    FormField c_linear;  // b + theta^{*,h}

    FormField coefficient() const {  // c_lambda
        FormField c = c_const;
        axpy(c, lambda, c_linear);
        return c;
    }
};

// Hermitian-Yang-Mills / pluri-harmonic building blocks shared with solvers.
FormField chern_10_coefficient(const FormField& a01, const FormField& H,
                               const FormField& Hinv,
                               Dealias mode = Dealias::automatic);
FormField metric_adjoint(const FormField& f, const FormField& H, const FormField& Hinv,
                         Dealias mode = Dealias::automatic);

// D^1_h of a Higgs pair; pre: the pair satisfies the holomorphic blocks
// (F^{0,2}, dbar phi, phi∧phi) to 1e-8.
FlatBundleData build_D1(const HiggsPair& p, const MetricField& H);

LambdaConnection lambda_connection(const HiggsPair& p, const MetricField& H,
                                   cplx lambda);

// L2 norm of D^lambda ∘ D^lambda.
double flatness_defect(const LambdaConnection& L);
FormField lambda_curvature(const LambdaConnection& L);

// Leibniz defect of the smooth lambda-operator on sections:
// max-norm of D^lambda(f s) - f D^lambda(s) - s (lambda del f + dbar f),
// plus the (1,0)-restricted defect against lambda s del f alone.
struct LeibnizCheck {
    double full = 0.0;
    double restricted_10 = 0.0;
};
LeibnizCheck lambda_leibniz_check(const LambdaConnection& L, const FormField& fscalar,
                                  const FormField& section);

struct FlatDecomposition {
    FormField unitary_coeff;  // u
    FormField selfadjoint;    // Theta
    FormField theta;          // (1,0) part of Theta
    FormField theta_star;     // (0,1) part of Theta
    double recomposition_defect = 0.0;  // || u + Theta - nu ||
    double unitarity_defect = 0.0;      // anti-Hermiticity defect of G u G^-1 - (dG) G^-1
};
FlatDecomposition decompose_flat(const FlatBundleData& f, const MetricField& H);

// Chern reconstruction of D^1 from a decomposition (equals nu identically).
FormField rebuild_d1(const FlatDecomposition& dec, const MetricField& H);

// D^0_h = dbar-part + theta_h flatness defect of a decomposed flat connection.
double d0_flatness_defect(const FlatDecomposition& dec);

struct Rank1Oracle {
    MetricField H;
    HiggsPair pair;        // k-gauged pair (A_k = i Im nu, phi = (1,0) of Re nu zero mode)
    FormField rho;         // scalar potential: Re nu = w0 + d rho, H = exp(2 rho)
    double flatness_in = 0.0;   // || d nu || of the input
    double d0_defect = 0.0;     // flatness of the induced Higgs operator
    double rebuild_defect = 0.0;  // || rebuild - nu || after the e^{rho} complex gauge
};
Rank1Oracle rank1_harmonic_oracle(const FlatBundleData& flat);

// Path-ordered holonomy around the axis cycles (diagnostics only; 4th-order
// stepping on a spectrally oversampled line).
struct HolonomyDiagnostics {
    std::vector<SmallMat> loops;       // one per axis
    double max_commutator = 0.0;       // max ||[U_mu, U_nu]||_F
    double commutant_min_sv = 0.0;     // smallest sv of X -> ([U_mu, X])_mu on traceless X
};
HolonomyDiagnostics holonomy_diagnostics(const FlatBundleData& f);

}  // namespace kwlab
