#pragma once

// Lie-algebra-valued fields and covariant calculus on the trivial bundle.
//
// Conventions (fixed once, used everywhere):
//   * fiber metric <X,Y> = Re tr(X Y^dagger); on anti-Hermitian arguments this
//     is -tr(XY).
//   * su(2) basis e_k = -(i/2) sigma_k, so [e1,e2] = e3 cyclically.
//   * matrix wedge (f∧g)_K = sum sign(I,J;K) f_I g_J with matrix products;
//     bracket_wedge(f,g) = (f∧g - (-1)^{pq} g∧f)/2, which for 1-forms gives
//     [a∧a]_{mu nu} = [a_mu, a_nu] with no extra factor, so that
//     F_{A+i a} = (F_A - [a∧a]) + i d_A a holds exactly.
//   * d_A f = df + A∧f - (-1)^p f∧A (graded commutator), hence
//     d_A d_A f = F_A∧f - f∧F_A and curvature F_A = dA + A∧A.
//   * d_A^* = -* d_A * in every degree (dim 2 and 4 are even).

#include "kwlab/calculus.hpp"

namespace kwlab {

struct GaugeGroup {
    enum class Kind { U1, SU2, Ur };
    Kind kind = Kind::SU2;
    int rank = 2;  // matrix size r

    static GaugeGroup u1() { return {Kind::U1, 1}; }
    static GaugeGroup su2() { return {Kind::SU2, 2}; }
    static GaugeGroup ur(int r) {
        require(r >= 1, "U(r) rank must be >= 1");
        return {Kind::Ur, r};
    }
    bool traceless() const { return kind == Kind::SU2; }
    int algebra_dim() const {
        switch (kind) {
            case Kind::U1: return 1;
            case Kind::SU2: return 3;
            default: return rank * rank;
        }
    }
    bool operator==(const GaugeGroup& o) const { return kind == o.kind && rank == o.rank; }
};

// e_k = -(i/2) sigma_k
SmallMat su2_basis(int k);

struct Connection {
    GaugeGroup group;
    FormField a;  // degree-1 anti-Hermitian coefficient 1-form

    Connection() = default;
    Connection(const GaugeGroup& g, const FormField& coeff) : group(g), a(coeff) {
        require(coeff.degree == 1, "Connection coefficient must be a 1-form");
        require(coeff.r == g.rank, "Connection fiber rank mismatch");
    }
    static Connection zero(const TorusLattice& lat, const GaugeGroup& g) {
        FormField f(lat, 1, g.rank, Herm::anti);
        f.band = 0;
        return Connection(g, f);
    }
};

// [f ∧ g] with the pinned half-graded normalization (see header comment).
FormField bracket_wedge(const FormField& f, const FormField& g,
                        Dealias mode = Dealias::automatic);

// Full graded commutator [B ∧ f] = B∧f - (-1)^{deg B * deg f} f∧B.
FormField graded_commutator(const FormField& B, const FormField& f,
                            Dealias mode = Dealias::automatic);

FormField curvature(const Connection& A, Dealias mode = Dealias::automatic);

FormField covariant_d(const Connection& A, const FormField& f,
                      Dealias mode = Dealias::automatic);

FormField covariant_d_adjoint(const Connection& A, const FormField& f,
                              Dealias mode = Dealias::automatic);

// (∇_A f)_{mu;nu} = ∂_nu f_mu + [A_nu, f_mu] for a 1-form f.
TensorField full_covariant_derivative(const Connection& A, const FormField& f);
// Formal adjoint: (∇_A^* T)_mu = -sum_nu ( ∂_nu T_{mu;nu} + [A_nu, T_{mu;nu}] ).
FormField full_covariant_derivative_adjoint(const Connection& A, const TensorField& T);

struct ComplexifiedCurvature {
    FormField total;      // F_{A+i a}, general-complex class
    FormField real_part;  // F_A - [a∧a], anti-Hermitian class
    FormField imag_part;  // d_A a, anti-Hermitian class
};
ComplexifiedCurvature complexified_curvature(const Connection& A, const FormField& a);

// Gauge action. g is a 0-form field of invertible matrices; unitary = true
// asserts g^dagger g = 1 (checked) so residual norms are preserved.
struct GaugeTransform {
    FormField g;  // degree-0
    bool unitary = false;
};
// A -> g A g^{-1} - (dg) g^{-1}
Connection apply_gauge(const GaugeTransform& g, const Connection& A);
// f -> g f g^{-1}
FormField apply_gauge(const GaugeTransform& g, const FormField& f);
// pointwise inverse of a 0-form matrix field; rejects condition number > 1e12
FormField pointwise_inverse(const FormField& g0);
FormField pointwise_exp(const FormField& x0);
FormField pointwise_sqrt_hpd(const FormField& h0);
double max_cond2(const FormField& g0);
double min_eigenvalue_hermitian(const FormField& h0);

// ----- deterministic random fields -----
// Band-limited random field with the requested hermiticity class; coefficient
// spectrum is Gaussian with |k|_inf <= band, conjugate-symmetric so the
// declared class holds pointwise. Trace-free when the group demands it.
FormField sample_ad_form(const TorusLattice& lat, const GaugeGroup& g, int degree,
                         int band, double amplitude, Rng& rng,
                         Herm cls = Herm::anti);
// Unitary gauge field exp(X) with X a band-limited anti-Hermitian 0-form.
GaugeTransform sample_unitary_gauge(const TorusLattice& lat, const GaugeGroup& g,
                                    int band, double amplitude, Rng& rng);

}  // namespace kwlab
