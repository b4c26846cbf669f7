#include "kwlab/index.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace kwlab {

int index_t0_formula(const TopologyInput& t) {
    t.validate();
    return -16 * t.k + 3 * t.euler();
}

int index_tneq0_formula(const TopologyInput& t) {
    t.validate();
    require(t.k == 0,
            "index_tneq0_formula requires k(G) = 0 (hypothesis of the t != 0 "
            "index theorem)");
    return 3 * t.euler();
}

int index_Lpm_formula(const TopologyInput& t, int sign) {
    t.validate();
    require(sign == 1 || sign == -1, "sign must be +1 or -1");
    const int bpm = (sign > 0) ? t.b_plus : t.b_minus;
    return 8 * t.k - 3 * (1 - t.b1 + bpm);
}

// ----- coefficient encoding -----
// Real coordinates over the Lie-algebra basis: su(2) uses e_k = -(i/2)sigma_k,
// u(1) uses i, U(r) uses the anti-Hermitian basis {iE_ii} + {E_ij - E_ji} +
// {i(E_ij + E_ji)}.

namespace {

std::vector<SmallMat> algebra_basis(const GaugeGroup& g) {
    std::vector<SmallMat> basis;
    const int r = g.rank;
    switch (g.kind) {
        case GaugeGroup::Kind::U1: {
            SmallMat m(1);
            m(0, 0) = cplx(0.0, 1.0);
            basis.push_back(m);
            break;
        }
        case GaugeGroup::Kind::SU2:
            for (int k = 1; k <= 3; ++k) basis.push_back(su2_basis(k));
            break;
        default: {
            for (int i = 0; i < r; ++i) {
                SmallMat m(r);
                m(i, i) = cplx(0.0, 1.0);
                basis.push_back(m);
            }
            for (int i = 0; i < r; ++i)
                for (int j = i + 1; j < r; ++j) {
                    SmallMat m(r);
                    m(i, j) = 1.0;
                    m(j, i) = -1.0;
                    basis.push_back(m);
                    SmallMat m2(r);
                    m2(i, j) = cplx(0.0, 1.0);
                    m2(j, i) = cplx(0.0, 1.0);
                    basis.push_back(m2);
                }
        }
    }
    return basis;
}

// The deformation fields are encoded over an orthonormal basis of real
// trigonometric modes restricted to the Nyquist-free band |k|_inf <= N/2 - 1
// (the honest Galerkin restriction: the even-grid real derivative cannot act
// faithfully on the Nyquist corner). Fiber coordinates run over an orthogonal
// Lie-algebra basis, so the assembled adjoint is the exact matrix transpose.
struct Encoder {
    GaugeGroup g;
    TorusLattice lat;
    std::vector<SmallMat> basis;
    std::vector<SmallMat> dual;  // <X, dual_k> = coeff_k
    // mode table: (k vector, kind) with kind 0 = constant, 1 = sqrt2 cos,
    // 2 = sqrt2 sin
    struct Mode {
        std::array<int, 4> k{0, 0, 0, 0};
        int kind = 0;
    };
    std::vector<Mode> modes;
    std::vector<std::vector<double>> mode_values;  // [mode][site]

    explicit Encoder(const GaugeGroup& g_, const TorusLattice& lat_)
        : g(g_), lat(lat_), basis(algebra_basis(g_)) {
        for (const auto& b : basis) {
            double n2 = mat_norm2(b.data(), g.rank);
            SmallMat d = b;
            for (auto& v : d.a) v /= n2;
            dual.push_back(d);
        }
        const int kb = lat.n / 2 - 1;
        std::array<int, 4> k{0, 0, 0, 0};
        std::function<void(int)> rec = [&](int a) {
            if (a == lat.dim) {
                // keep the zero mode and one representative per {k, -k} pair
                bool zero = true, lead = true;
                for (int ax = lat.dim - 1; ax >= 0; --ax)
                    if (k[ax] != 0) {
                        zero = false;
                        lead = k[ax] > 0;
                        break;
                    }
                if (zero) modes.push_back({k, 0});
                else if (lead) {
                    modes.push_back({k, 1});
                    modes.push_back({k, 2});
                }
                return;
            }
            for (int v = -kb; v <= kb; ++v) {
                k[a] = v;
                rec(a + 1);
            }
        };
        rec(0);
        const long long sites = lat.sites();
        const double sq2 = std::sqrt(2.0);
        mode_values.assign(modes.size(), std::vector<double>(sites));
        for (std::size_t m = 0; m < modes.size(); ++m) {
            for (long long s = 0; s < sites; ++s) {
                auto x = lat.coords(s);
                double ph = 0.0;
                for (int a = 0; a < lat.dim; ++a)
                    ph += modes[m].k[a] * lat.coordinate(a, x[a]);
                double v = 1.0;
                if (modes[m].kind == 1) v = sq2 * std::cos(ph);
                else if (modes[m].kind == 2) v = sq2 * std::sin(ph);
                mode_values[m][s] = v;
            }
        }
    }
    int dimg() const { return int(basis.size()); }
    int nmodes() const { return int(modes.size()); }

    // (a, alpha) pair of 1-forms <-> coefficient vector
    int pair_dim() const { return 2 * 4 * dimg() * nmodes(); }

    void decode_pair(const std::vector<double>& x, FormField& a, FormField& al) const {
        a = FormField(lat, 1, g.rank, Herm::anti);
        al = FormField(lat, 1, g.rank, Herm::anti);
        a.band = al.band = lat.n / 2 - 1;
        const long long sites = lat.sites();
        std::size_t idx = 0;
        for (FormField* f : {&a, &al})
            for (int c = 0; c < 4; ++c)
                for (int kb = 0; kb < dimg(); ++kb)
                    for (int m = 0; m < nmodes(); ++m) {
                        double w = x[idx++];
                        if (w == 0.0) continue;
                        const cplx* bm = basis[kb].data();
                        const double* mv = mode_values[m].data();
                        cplx* p = f->at(c, 0);
                        const int rr = g.rank * g.rank;
                        for (long long s = 0; s < sites; ++s)
                            for (int e = 0; e < rr; ++e)
                                p[s * rr + e] += (w * mv[s]) * bm[e];
                    }
    }

    void encode_field(const FormField& f, const std::vector<int>& comps,
                      std::vector<double>& out, std::size_t& idx) const {
        const long long sites = lat.sites();
        const double inv_sites = 1.0 / double(sites);
        for (std::size_t ci = 0; ci < comps.size(); ++ci)
            for (int kb = 0; kb < dimg(); ++kb)
                for (int m = 0; m < nmodes(); ++m) {
                    const double* mv = mode_values[m].data();
                    double acc = 0.0;
                    for (long long s = 0; s < sites; ++s) {
                        double w = mat_fiber_inner(f.at(comps[ci], s),
                                                   dual[kb].data(), g.rank);
                        acc += w * mv[s];
                    }
                    out[idx++] = acc * inv_sites;
                }
    }
};

// orthonormal SD/ASD coefficients of a 2-form: rows (12+-34, 13-+24, 14+-23)/sqrt2
void encode_sdasd(const Encoder& enc, const FormField& f2, int sign,
                  std::vector<double>& out, std::size_t& idx) {
    const long long sites = enc.lat.sites();
    static const int pairs[3][2] = {{0, 5}, {1, 4}, {2, 3}};  // (12,34),(13,24),(14,23)
    static const double psign[3] = {1.0, -1.0, 1.0};
    const int r = enc.g.rank;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const double inv_sites = 1.0 / double(sites);
    std::vector<cplx> tmp(std::size_t(r) * r);
    for (int row = 0; row < 3; ++row) {
        const double s2 = (sign > 0 ? psign[row] : -psign[row]);
        for (int kb = 0; kb < enc.dimg(); ++kb)
            for (int m = 0; m < enc.nmodes(); ++m) {
                const double* mv = enc.mode_values[m].data();
                double acc = 0.0;
                for (long long s = 0; s < sites; ++s) {
                    const cplx* p1 = f2.at(pairs[row][0], s);
                    const cplx* p2 = f2.at(pairs[row][1], s);
                    for (int e = 0; e < r * r; ++e)
                        tmp[e] = (p1[e] + s2 * p2[e]) * inv_sqrt2;
                    acc += mat_fiber_inner(tmp.data(), enc.dual[kb].data(), r) * mv[s];
                }
                out[idx++] = acc * inv_sites;
            }
    }
}

struct OperatorBlocks {
    FormField b2form;   // either folded 2-form (tneq0) or unused
    FormField sd, asd;  // t0 blocks
    FormField s0;       // delta(d* a)
    FormField gauge;    // gauge-fixing row
    bool folded = false;
};

OperatorBlocks apply_blocks(ComplexId which, const Connection& A, const FormField& aa,
                            bool stripped, const FormField& da, const FormField& dal) {
    // exact linearizations of G = F - a∧a, D = d_A a, S = d_A^* a at (A, aa)
    OperatorBlocks out;
    FormField dG = covariant_d(A, da);
    FormField dD = covariant_d(A, dal);
    FormField dS = covariant_d_adjoint(A, dal);
    if (!stripped) {
        axpy(dG, -1.0, graded_combo(aa, dal, 1.0, 1.0));
        axpy(dD, 1.0, graded_combo(aa, da, 1.0, 1.0));
        FormField star_a = hodge_star(aa);
        FormField t = graded_combo(star_a, da, 1.0, 1.0);
        axpy(dS, -1.0, hodge_star(t));
    }
    // gauge-fixing row: adjoint of xi -> (d_A xi, [aa, xi])
    FormField gauge = covariant_d_adjoint(A, da);
    if (!stripped) {
        // -(sum_mu [aa_mu, dal_mu]) : adjoint of the bracket column
        const TorusLattice& lat = aa.lat;
        FormField acc(lat, 0, aa.r, Herm::general);
        for (int mu = 0; mu < lat.dim; ++mu) {
            FormField am(lat, 0, aa.r, aa.cls);
            am.band = aa.band;
            FormField vm(lat, 0, aa.r, dal.cls);
            vm.band = dal.band;
            const long long n = lat.sites() * aa.r * aa.r;
            std::copy(aa.at(mu, 0), aa.at(mu, 0) + n, am.at(0, 0));
            std::copy(dal.at(mu, 0), dal.at(mu, 0) + n, vm.at(0, 0));
            axpy(acc, 1.0, graded_combo(am, vm, -1.0, 1.0));  // -[am, vm]
        }
        axpy(gauge, 1.0, acc);
    }
    out.gauge = std::move(gauge);
    out.s0 = std::move(dS);
    if (which == ComplexId::t0) {
        out.sd = sd_asd_project(dG, +1);
        out.asd = sd_asd_project(dD, -1);
    } else {
        out.folded = true;
        out.b2form = dG;
        axpy(out.b2form, 1.0, hodge_star(dD));
    }
    return out;
}

}  // namespace

int linearized_dim(const GaugeGroup& g, const TorusLattice& lat) {
    Encoder enc(g, lat);
    return enc.pair_dim();
}

std::vector<double> linearized_apply(ComplexId which, const Connection& A,
                                     const FormField& a, bool stripped,
                                     const std::vector<double>& x) {
    Encoder enc(A.group, a.lat);
    FormField da, dal;
    enc.decode_pair(x, da, dal);
    OperatorBlocks blocks = apply_blocks(which, A, a, stripped, da, dal);
    std::vector<double> out(enc.pair_dim());
    std::size_t idx = 0;
    if (which == ComplexId::t0) {
        encode_sdasd(enc, blocks.sd, +1, out, idx);
        encode_sdasd(enc, blocks.asd, -1, out, idx);
        enc.encode_field(blocks.s0, {0}, out, idx);
        enc.encode_field(blocks.gauge, {0}, out, idx);
    } else {
        enc.encode_field(blocks.b2form, {0, 1, 2, 3, 4, 5}, out, idx);
        enc.encode_field(blocks.s0, {0}, out, idx);
        enc.encode_field(blocks.gauge, {0}, out, idx);
    }
    out.resize(idx);
    return out;
}

LinearizedOperator assemble_linearized(ComplexId which, const Connection& A,
                                       const FormField& a, bool stripped,
                                       std::size_t memory_cap_bytes) {
    require(a.lat.dim == 4, "linearized complexes live on T^4");
    require(a.lat.n <= 6, "dense assembly restricted to N <= 6");
    Encoder enc(A.group, a.lat);
    const int n = enc.pair_dim();
    require(std::size_t(n) * n * sizeof(double) <= memory_cap_bytes,
            "assembled operator exceeds the memory cap");
    LinearizedOperator op;
    op.which = which;
    op.group = A.group;
    op.lat = a.lat;
    op.stripped = stripped;
    std::vector<double> probe(n, 0.0);
    probe[0] = 1.0;
    std::vector<double> col = linearized_apply(which, A, a, stripped, probe);
    op.rows = int(col.size());
    op.cols = n;
    op.mat.assign(std::size_t(op.rows) * n, 0.0);
    probe[0] = 0.0;
    for (int j = 0; j < n; ++j) {
        probe[j] = 1.0;
        std::vector<double> cj = linearized_apply(which, A, a, stripped, probe);
        probe[j] = 0.0;
        for (int i = 0; i < op.rows; ++i) op.mat[std::size_t(i) * n + j] = cj[i];
    }
    return op;
}

LinearizedOperator assemble_linearized_adjoint(ComplexId which, const Connection& A,
                                               const FormField& a, bool stripped) {
    // assemble the adjoint by probing <T e_j, f_i> through the rows: apply the
    // operator to the canonical basis of the *target* via the transpose of the
    // pairing; since the encodings are isometric (orthonormal bases, equal
    // site weights), the formal adjoint matrix is assembled column-by-column
    // by evaluating the adjoint pieces.
    // Adjoint pieces of apply_blocks, mirrored by hand.
    Encoder enc(A.group, a.lat);
    const int n = enc.pair_dim();
    LinearizedOperator op;
    op.which = which;
    op.group = A.group;
    op.lat = a.lat;
    op.stripped = stripped;
    // target dimension equals source dimension (square systems)
    op.rows = n;
    op.cols = n;
    op.mat.assign(std::size_t(n) * n, 0.0);
    // route: for each target basis vector rho, compute T^t rho via the
    // KwLeastSquares adjoint machinery on the matching system.
    KwLeastSquares sys(A.group, which == ComplexId::t0 ? KWSystem::t0
                                                       : KWSystem::tneq0);
    (void)sys;
    // Reuse the exact adjoints of the pieces:
    const TorusLattice& lat = a.lat;
    auto decode_target = [&](const std::vector<double>& y, FormField& r2,
                             FormField& rsd, FormField& rasd, FormField& rs0,
                             FormField& rg) {
        std::size_t idx = 0;
        const long long sites = lat.sites();
        const int rr = A.group.rank * A.group.rank;
        auto read_block = [&](FormField& f, const std::vector<int>& comps,
                              int degree) {
            f = FormField(lat, degree, A.group.rank, Herm::anti);
            f.band = lat.n / 2 - 1;
            for (std::size_t ci = 0; ci < comps.size(); ++ci)
                for (int kb = 0; kb < enc.dimg(); ++kb)
                    for (int m = 0; m < enc.nmodes(); ++m) {
                        double w = y[idx++];
                        if (w == 0.0) continue;
                        const cplx* bm = enc.basis[kb].data();
                        const double bn = mat_norm2(bm, A.group.rank);
                        const double* mv = enc.mode_values[m].data();
                        cplx* p = f.at(comps[ci], 0);
                        for (long long s = 0; s < sites; ++s)
                            for (int e = 0; e < rr; ++e)
                                p[s * rr + e] += (w / bn * mv[s]) * bm[e];
                    }
        };
        if (which == ComplexId::t0) {
            static const int pairs[3][2] = {{0, 5}, {1, 4}, {2, 3}};
            static const double psign[3] = {1.0, -1.0, 1.0};
            const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
            for (int sgn : {+1, -1}) {
                FormField f(lat, 2, A.group.rank, Herm::anti);
                f.band = lat.n / 2 - 1;
                for (int row = 0; row < 3; ++row) {
                    const double s2 = (sgn > 0 ? psign[row] : -psign[row]);
                    for (int kb = 0; kb < enc.dimg(); ++kb)
                        for (int m = 0; m < enc.nmodes(); ++m) {
                            double w = y[idx++];
                            if (w == 0.0) continue;
                            const cplx* bm = enc.basis[kb].data();
                            const double bn = mat_norm2(bm, A.group.rank);
                            const double* mv = enc.mode_values[m].data();
                            cplx* p1 = f.at(pairs[row][0], 0);
                            cplx* p2 = f.at(pairs[row][1], 0);
                            for (long long s = 0; s < sites; ++s)
                                for (int e = 0; e < rr; ++e) {
                                    cplx add = (w / bn * mv[s] * inv_sqrt2) * bm[e];
                                    p1[s * rr + e] += add;
                                    p2[s * rr + e] += s2 * add;
                                }
                        }
                }
                if (sgn > 0) rsd = f;
                else rasd = f;
            }
        } else {
            read_block(r2, {0, 1, 2, 3, 4, 5}, 2);
        }
        read_block(rs0, {0}, 0);
        read_block(rg, {0}, 0);
    };
    std::vector<double> y(n, 0.0);
    for (int j = 0; j < n; ++j) {
        y[j] = 1.0;
        FormField r2, rsd, rasd, rs0, rg;
        decode_target(y, r2, rsd, rasd, rs0, rg);
        y[j] = 0.0;
        // adjoint application
        FormField dualG(lat, 2, A.group.rank, Herm::general),
            dualD(lat, 2, A.group.rank, Herm::general);
        if (which == ComplexId::t0) {
            dualG = sd_asd_project(rsd, +1);
            dualD = sd_asd_project(rasd, -1);
        } else {
            dualG = r2;
            dualD = hodge_star(r2);  // adjoint of *: on 2-forms of T4, * is
                                     // symmetric
        }
        // grad_a-slot (variation da): covD^t dualG + combo-adj + dS^t + gauge^t
        FormField ga = covariant_d_adjoint(A, dualG);
        FormField gal = covariant_d_adjoint(A, dualD);
        axpy(gal, 1.0, covariant_d(A, rs0));
        axpy(ga, 1.0, covariant_d(A, rg));
        if (!stripped) {
            axpy(gal, 1.0, graded_combo_adjoint(a, dualG, 1, -1.0, -1.0));
            axpy(ga, 1.0, graded_combo_adjoint(a, dualD, 1, 1.0, 1.0));
            FormField star_a = hodge_star(a);
            FormField srs = hodge_star(rs0);
            for (auto& v : srs.data) v = -v;
            axpy(ga, 1.0, graded_combo_adjoint(star_a, srs, 1, 1.0, 1.0));
            // gauge-row bracket adjoint: column mu gets +[a_mu, rg]... adjoint of
            // dal -> -sum [a_mu, dal_mu] is dal_mu slot += [a_mu, rg] (skew-adjointness)
            for (int mu = 0; mu < lat.dim; ++mu) {
                FormField am(lat, 0, a.r, a.cls);
                am.band = a.band;
                const long long nn = lat.sites() * a.r * a.r;
                std::copy(a.at(mu, 0), a.at(mu, 0) + nn, am.at(0, 0));
                FormField br = graded_combo(am, rg, 1.0, -1.0);  // [a_mu, rg]
                for (long long q = 0; q < nn; ++q)
                    gal.at(mu, 0)[q] += br.at(0, 0)[q];
            }
        }
        std::vector<double> col(n);
        std::size_t idx = 0;
        enc.encode_field(ga, {0, 1, 2, 3}, col, idx);
        enc.encode_field(gal, {0, 1, 2, 3}, col, idx);
        for (int i = 0; i < n; ++i) op.mat[std::size_t(i) * n + j] = col[i];
    }
    return op;
}

IndexResult numerical_index(const LinearizedOperator& op, double rel_threshold) {
    IndexResult res;
    Eigen::MatrixXd M(op.rows, op.cols);
    for (int i = 0; i < op.rows; ++i)
        for (int j = 0; j < op.cols; ++j) M(i, j) = op.entry(i, j);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    Eigen::VectorXd sv = svd.singularValues();
    res.spectrum.assign(sv.data(), sv.data() + sv.size());
    res.sv_max = res.spectrum.empty() ? 0.0 : res.spectrum.front();
    const double thr = rel_threshold * res.sv_max;
    int rank = 0;
    double smallest_kept = 0.0, largest_dropped = 0.0;
    for (double s : res.spectrum) {
        if (s >= thr) {
            ++rank;
            smallest_kept = s;
        } else {
            largest_dropped = std::max(largest_dropped, s);
        }
    }
    res.dim_ker = op.cols - rank;
    res.dim_coker = op.rows - rank;
    res.index = res.dim_ker - res.dim_coker;
    if (res.dim_ker == 0 && res.dim_coker == 0) {
        res.gap_ratio = std::numeric_limits<double>::infinity();
    } else {
        res.gap_ratio = (largest_dropped > 0.0)
                            ? smallest_kept / largest_dropped
                            : std::numeric_limits<double>::infinity();
    }
    res.indeterminate = res.gap_ratio < 10.0;
    return res;
}

int head_kernel_dim(const Connection& A, const FormField& a) {
    Encoder enc(A.group, a.lat);
    const int dimg = enc.dimg();
    const int nm = enc.nmodes();
    const int ncols = dimg * nm;
    const int nrows = 2 * 4 * dimg * nm;
    Eigen::MatrixXd M(nrows, ncols);
    std::vector<double> col(nrows);
    const long long sites = a.lat.sites();
    const int rr = A.group.rank * A.group.rank;
    for (int j = 0; j < ncols; ++j) {
        FormField xi(a.lat, 0, A.group.rank, Herm::anti);
        xi.band = a.lat.n / 2 - 1;
        const int kb = j / nm;
        const int m = j % nm;
        const cplx* bm = enc.basis[kb].data();
        const double* mv = enc.mode_values[m].data();
        cplx* p = xi.at(0, 0);
        for (long long s = 0; s < sites; ++s)
            for (int e = 0; e < rr; ++e) p[s * rr + e] = mv[s] * bm[e];
        FormField dxi = covariant_d(A, xi);
        FormField bxi = graded_commutator(a, xi);
        std::size_t idx = 0;
        enc.encode_field(dxi, {0, 1, 2, 3}, col, idx);
        enc.encode_field(bxi, {0, 1, 2, 3}, col, idx);
        for (int i = 0; i < nrows; ++i) M(i, j) = col[i];
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    Eigen::VectorXd sv = svd.singularValues();
    const double thr = 1e-8 * (sv.size() ? sv(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) >= thr) ++rank;
    return ncols - rank;
}

}  // namespace kwlab
