#pragma once

// Index formulas for the two deformation complexes and a numerical analytic
// index for their rolled-up elliptic operators at desk resolution.
//
// Conventions: the "complex index" follows the Euler-characteristic
// convention h0 - h1 + h2 (the formulas below). The rolled-up two-term
// operator E^odd -> E^even (gauge-fixing column included) has
// index = dim ker - dim coker = h1 - h0 - h2 = -(complex index), which is the
// expected dimension of the moduli space. The L+/L- decomposition therefore
// satisfies ind L+ + ind L- = -(t=0 complex index); see the README note.

#include "kwlab/kw.hpp"

namespace kwlab {

struct TopologyInput {
    enum class Group { SU2, SO3 };
    Group group = Group::SU2;
    int k = 0;   // instanton number k(G)
    int b1 = 0;
    int b_plus = 0;
    int b_minus = 0;

    int b2() const { return b_plus + b_minus; }
    int b3() const { return b1; }  // Poincare duality, enforced
    int euler() const { return 2 - 2 * b1 + b2(); }
    void validate() const {
        require(b1 >= 0 && b_plus >= 0 && b_minus >= 0,
                "Betti numbers must be non-negative");
    }
};

// index of the t = 0 deformation complex: -16 k + 3 chi
int index_t0_formula(const TopologyInput& t);
// index of the t != 0 deformation complex: 3 chi; hypothesis k(G) = 0
int index_tneq0_formula(const TopologyInput& t);
// ind L± = 8k - 3 (1 - b1 + b±)
int index_Lpm_formula(const TopologyInput& t, int sign);

enum class ComplexId { t0, tneq0 };

struct LinearizedOperator {
    ComplexId which = ComplexId::t0;
    GaugeGroup group;
    TorusLattice lat;
    bool stripped = false;  // zeroth-order (bracket) terms dropped
    int rows = 0, cols = 0;
    std::vector<double> mat;  // row-major dense

    double entry(int i, int j) const { return mat[std::size_t(i) * cols + j]; }
};

// Action of the rolled-up operator on a coefficient vector (matrix-free).
std::vector<double> linearized_apply(ComplexId which, const Connection& A,
                                     const FormField& a, bool stripped,
                                     const std::vector<double>& x);
int linearized_dim(const GaugeGroup& g, const TorusLattice& lat);

// Dense assembly; pre: N <= 6 and the memory estimate below the cap.
LinearizedOperator assemble_linearized(ComplexId which, const Connection& A,
                                       const FormField& a, bool stripped = false,
                                       std::size_t memory_cap_bytes = std::size_t(2)
                                                                      << 30);
// Assembly of the formal adjoint (for the transpose agreement test).
LinearizedOperator assemble_linearized_adjoint(ComplexId which, const Connection& A,
                                               const FormField& a,
                                               bool stripped = false);

struct IndexResult {
    int dim_ker = 0;
    int dim_coker = 0;
    int index = 0;
    double gap_ratio = 0.0;      // smallest retained sv / largest dropped sv
    bool indeterminate = false;  // gap ratio < 10
    double sv_max = 0.0;
    std::vector<double> spectrum;  // singular values, descending
};
IndexResult numerical_index(const LinearizedOperator& op,
                            double rel_threshold = 1e-8);

// dim ker of the complex head (d_A, [a, .]) for the cohomology profile.
int head_kernel_dim(const Connection& A, const FormField& a);

}  // namespace kwlab
