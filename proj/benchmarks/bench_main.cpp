// Self-contained micro-benchmarks for the hot paths: spectral transforms,
// dealiased products, residual evaluation, normal-equation matvec, heat-flow
// step. Prints one line per benchmark with ms/op.

#include <chrono>
#include <cstdio>
#include <functional>
#include <malloc.h>

#include "kwlab/solve.hpp"

using namespace kwlab;
using clk = std::chrono::steady_clock;

namespace {

void bench(const char* name, int iters, const std::function<void()>& fn) {
    fn();  // warm up
    auto t0 = clk::now();
    for (int i = 0; i < iters; ++i) fn();
    double ms = std::chrono::duration<double, std::milli>(clk::now() - t0).count();
    std::printf("%-44s %10.2f ms/op   (%d iters)\n", name, ms / iters, iters);
}

}  // namespace

int main() {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    auto su2 = GaugeGroup::su2();
    Rng rng(1);

    {
        auto lat = TorusLattice::make(4, 16);
        FormField f = sample_ad_form(lat, su2, 1, 5, 0.5, rng, Herm::anti);
        bench("fft forward+inverse, su2 1-form, N=16", 10, [&] {
            FormField g = fft_inverse(fft_forward(f));
        });
        FormField g = sample_ad_form(lat, su2, 1, 5, 0.5, rng, Herm::anti);
        bench("wedge product, padded path, N=16", 5,
              [&] { FormField h = wedge_mult(f, g, Dealias::padded); });
        f.band = 3;
        g.band = 3;
        bench("wedge product, certified fast path, N=16", 10,
              [&] { FormField h = wedge_mult(f, g, Dealias::automatic); });
        Connection A(su2, sample_ad_form(lat, su2, 1, 3, 0.4, rng, Herm::anti));
        FormField a = sample_ad_form(lat, su2, 1, 3, 0.4, rng, Herm::anti);
        bench("residual_tneq0, su2, N=16", 5,
              [&] { auto rep = residual_tneq0(A, a); });
        bench("bochner_check, su2, N=16", 3, [&] { auto res = bochner_check(A, a); });
    }

    {
        auto lat = TorusLattice::make(4, 12);
        KwLeastSquares ls(su2, KWSystem::t_family, 1.0);
        FieldVec x;
        x.fields = {sample_ad_form(lat, su2, 1, 4, 0.3, rng, Herm::anti),
                    sample_ad_form(lat, su2, 1, 4, 0.3, rng, Herm::anti)};
        FieldVec v;
        v.fields = {sample_ad_form(lat, su2, 1, 4, 0.5, rng, Herm::anti),
                    sample_ad_form(lat, su2, 1, 4, 0.5, rng, Herm::anti)};
        auto P = ls.prepare(x);
        bench("prepare (residual + embeddings), N=12", 5,
              [&] { auto Q = ls.prepare(x); });
        bench("normal-equation matvec Jt(J v), N=12", 5,
              [&] { auto w = ls.normal_apply(P, v); });
    }

    {
        auto lat = TorusLattice::make(4, 12);
        auto u1 = GaugeGroup::u1();
        FormField base = sample_ad_form(lat, u1, 0, 2, 0.3, rng, Herm::herm);
        FormField Ak = scaled(exterior_d(base), cplx(0, 1));
        Ak.cls = Herm::anti;
        FormField phi(lat, 1, 1, Herm::general);
        phi.band = 0;
        for (long long s = 0; s < lat.sites(); ++s) {
            phi.at(0, s)[0] = 0.25;
            phi.at(1, s)[0] = cplx(0, 0.25);
        }
        HiggsPair p{Connection(u1, Ak), HiggsField{phi}};
        MetricField seed;
        seed.h = pointwise_exp(sample_ad_form(lat, u1, 0, 2, 0.15, rng, Herm::herm));
        SolveConfig sc;
        sc.tol = 1e-30;  // run a fixed number of steps
        sc.max_iters = 3;
        sc.fd_check = false;
        bench("metric heat flow, 3 RK4 steps, rank 1, N=12", 2,
              [&] { auto res = metric_heat_flow(p, FlowTarget::hym, sc, &seed); });
    }
    return 0;
}
