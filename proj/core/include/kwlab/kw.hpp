#pragma once

// Residuals and energies for the t-family of equations, the t = 0 system and
// the t != 0 system, plus the Bochner-Weitzenboeck balance check.
//
// Block conventions (anti-Hermitian 1-form a, W := a∧a):
//   t-family   [ (F_A - W + t d_A a)^+ , (F_A - W - t^{-1} d_A a)^- , d_A^* a ]
//   t = 0      [ (F_A - W)^+ , (d_A a)^- , d_A^* a ]
//   t != 0     [ F_A - W , d_A a , d_A^* a ]
// The t != 0 total equals ||F_{A+ia}||^2 + ||d_A^* a||^2 exactly.
//
// Bochner balance on the flat torus (unit-coefficient form; see README for
// the normalization note):
//   ||d_A^* a||^2 + ||d_A a||^2 + ||F_A - W||^2
//     = ||grad_A a||^2 + ||F_A||^2 + ||W||^2 + int s |a|^2 ,   s == 0 here.
// Both sides are evaluated on the 3/2 dealiasing grid so that every quartic
// integrand is integrated exactly for inputs band-limited to N/4.

#include <optional>
#include <string>
#include <vector>

#include "kwlab/gauge.hpp"

namespace kwlab {

struct KWConfig {
    Connection A;
    FormField a;  // anti-Hermitian AdForm(1)
    double t = 1.0;

    KWConfig(const Connection& A_, const FormField& a_, double t_)
        : A(A_), a(a_), t(t_) {
        require(std::isfinite(t_), "t must be a finite real number");
        require(a_.degree == 1, "extra field must be a 1-form");
    }
};

struct ResidualBlock {
    std::string name;
    FormField value;
    double norm2 = 0.0;
};

struct ResidualReport {
    std::vector<ResidualBlock> blocks;
    double total = 0.0;

    double block_norm2(const std::string& name) const;
};

enum class KWSystem { t_family, t0, tneq0, simpson, tneq0_kahler };

ResidualReport residual_t(const KWConfig& cfg);
ResidualReport residual_t0(const Connection& A, const FormField& a);
ResidualReport residual_tneq0(const Connection& A, const FormField& a);

double kw_energy(const Connection& A, const FormField& a, KWSystem system,
                 double t = 1.0);

struct BochnerResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;           // |lhs - rhs| / (lhs + rhs + 1)
    bool bandwidth_ok = true;   // inputs band-limited to <= N/4
    std::string warning;
};
BochnerResult bochner_check(const Connection& A, const FormField& a);
// Right-hand side alone (defined for any hermiticity class so the i*a
// invariance can be probed).
double bochner_rhs(const Connection& A, const FormField& a);

// ----- solver-facing state bundle and linearizations -----

// Variable bundle for the real 4d systems: x = (A-coefficient, a). The
// Kahler systems reuse the same container with x = (A-coefficient, phi
// carrier); see kahler.hpp.
struct FieldVec {
    std::vector<FormField> fields;

    double inner(const FieldVec& o) const;
    double norm2() const { return inner(*this); }
    void axpy_from(double alpha, const FieldVec& x);
    FieldVec scaled(double alpha) const;
    static FieldVec zeros_like(const FieldVec& x);
};

// One least-squares system: residual, Jacobian action and its adjoint.
// All products inside J/Jt run on the padded grid so the adjoint is the
// exact discrete transpose. For the 4d real systems a prepared fast path
// embeds the base point on the 3/2 grid once and defers the truncation to
// block level, which is algebraically identical to the per-operation padded
// products (truncation commutes with every linear operator in the chain).
class KwLeastSquares {
  public:
    KwLeastSquares(GaugeGroup g, KWSystem sys, double t = 1.0)
        : group_(g), system_(sys), t_(t) {}

    KWSystem system() const { return system_; }
    GaugeGroup group() const { return group_; }
    double t() const { return t_; }

    ResidualReport residual(const FieldVec& x) const;
    double energy(const FieldVec& x) const;
    // r-blocks flattened in the report's block order
    std::vector<FormField> apply_J(const FieldVec& x, const FieldVec& dx) const;
    FieldVec apply_Jt(const FieldVec& x, const std::vector<FormField>& rho) const;
    // gradient of energy = 2 Jt R, projected to the constraint subspace
    FieldVec gradient(const FieldVec& x) const;
    // project onto the admissible subspace (hermiticity class, trace, type)
    void project(FieldVec& x) const;

    // ---- prepared fast path (used by the solver) ----
    struct Prepared {
        FieldVec x;
        bool fast = false;          // real 4d systems only
        FormField A_M, a_M, star_a_M;  // base point, physical on the 3/2 grid
        std::vector<FormField> r_spec;  // residual blocks, spectral at N
        std::vector<std::string> block_names;
        double total = 0.0;
    };
    Prepared prepare(const FieldVec& x) const;
    // (Jt J) v with the intermediate blocks kept spectral
    FieldVec normal_apply(const Prepared& p, const FieldVec& v) const;
    // Jt applied to the prepared residual blocks
    FieldVec Jt_residual(const Prepared& p) const;

  private:
    GaugeGroup group_;
    KWSystem system_;
    double t_;
};

}  // namespace kwlab
