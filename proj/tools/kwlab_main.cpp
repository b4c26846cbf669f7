// kwlab — command-line front end for the KW torus laboratory.
//
// Subcommands: verify | solve | flow | hodge | index.
// Reports are JSON with deterministic formatting; every report embeds the
// canonical spec hash and the seed. Traces stream as CSV. Snapshots use the
// KWF1 binary layout. KWLAB_THREADS caps internal parallelism (the current
// engine is single-threaded; the value is recorded).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <malloc.h>

#include "kwlab/index.hpp"
#include "kwlab/report.hpp"
#include "kwlab/snapshot.hpp"
#include "kwlab/solve.hpp"

using namespace kwlab;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int n = 12;
    double tol = 1e-10;
    std::string group = "su2";
    std::string system = "tneq0";
    int threads = 1;
};

GaugeGroup parse_group(const std::string& s) {
    if (s == "u1") return GaugeGroup::u1();
    if (s == "su2") return GaugeGroup::su2();
    if (s.rfind("ur:", 0) == 0) return GaugeGroup::ur(std::stoi(s.substr(3)));
    throw PreconditionError("unknown group '" + s + "' (u1, su2, ur:R)");
}

KWSystem parse_system(const std::string& s) {
    if (s == "t0") return KWSystem::t0;
    if (s == "tneq0") return KWSystem::tneq0;
    if (s == "simpson") return KWSystem::simpson;
    if (s == "tneq0_kahler") return KWSystem::tneq0_kahler;
    if (s == "t") return KWSystem::t_family;
    throw PreconditionError("unknown system '" + s + "'");
}

std::string spec_hash_of(const std::map<std::string, std::string>& kv) {
    std::string canon;
    for (const auto& [k, v] : kv) canon += k + "=" + v + "\n";
    return hex64(fnv1a64(canon));
}

void emit(const std::string& out_dir, const std::string& name,
          const std::string& text) {
    fs::create_directories(out_dir);
    write_text_atomic((fs::path(out_dir) / name).string(), text);
    std::cout << text << "\n";
}

int read_env_threads() {
    const char* t = std::getenv("KWLAB_THREADS");
    if (!t) return 1;
    int v = std::atoi(t);
    return v >= 1 ? v : 1;
}

// merge a config file (strict keys) under explicit CLI flags
void apply_config(const std::string& path, const std::vector<std::string>& keys,
                  std::map<std::string, std::string>& kv) {
    if (path.empty()) return;
    RunConfig cfg = RunConfig::parse_file(path, keys);
    for (const auto& [k, v] : cfg.kv)
        if (!kv.count(k)) kv[k] = v;
}

struct Check {
    std::string name;
    double measured;
    double tolerance;
    bool pass;
};

// ---- the identity battery behind `verify --suite identities` ----
std::vector<Check> run_identity_suite(const GaugeGroup& g, int n, std::uint64_t seed) {
    std::vector<Check> checks;
    auto push = [&](const std::string& name, double measured, double tol) {
        checks.push_back({name, measured, tol, measured <= tol});
    };
    auto lat = TorusLattice::make(4, n);
    Rng rng(seed);
    const int band = std::max(1, n / 4 - 1);

    FormField f0 = sample_ad_form(lat, g, 0, band, 0.7, rng, Herm::anti);
    FormField dd = exterior_d(exterior_d(f0));
    push("d_after_d", max_abs(dd) / (max_abs(f0) + 1e-30), 1e-12);

    double star_err = 0.0;
    for (int p = 0; p <= 4; ++p) {
        FormField fp = sample_ad_form(lat, g, p, 1, 1.0, rng, Herm::anti);
        FormField ss = hodge_star(hodge_star(fp));
        double sign = (p * (4 - p)) % 2 == 0 ? 1.0 : -1.0;
        axpy(ss, -sign, fp);
        star_err = std::max(star_err, max_abs(ss) / (max_abs(fp) + 1e-30));
    }
    push("star_star_sign", star_err, 1e-15);

    FormField f2 = sample_ad_form(lat, g, 2, band, 1.0, rng, Herm::anti);
    FormField fp2 = sd_asd_project(f2, +1);
    FormField fm2 = sd_asd_project(f2, -1);
    FormField sum = add(fp2, fm2);
    axpy(sum, -1.0, f2);
    double proj_err = max_abs(sum);
    proj_err = std::max(proj_err, max_abs(sd_asd_project(fp2, -1)));
    FormField pp = sd_asd_project(fp2, +1);
    axpy(pp, -1.0, fp2);
    proj_err = std::max(proj_err, max_abs(pp));
    push("sd_asd_projections", proj_err / (max_abs(f2) + 1e-30), 1e-14);

    // Kahler linear identity on (1,1): *f = -f + (Lambda f) omega
    {
        FormField f11 = pq_project(f2, 1, 1);
        FormField lhs = hodge_star(f11);
        FormField rhs = scaled(f11, -1.0);
        FormField lam = lambda_contract(f11);
        const int c12 = form_comp_index(4, 2, {0, 1});
        const int c34 = form_comp_index(4, 2, {2, 3});
        const long long nn = lat.sites() * g.rank * g.rank;
        for (long long i = 0; i < nn; ++i) {
            rhs.data[std::size_t(c12) * nn + i] += lam.data[i];
            rhs.data[std::size_t(c34) * nn + i] += lam.data[i];
        }
        axpy(lhs, -1.0, rhs);
        push("kahler_linear_identity", max_abs(lhs) / (max_abs(f11) + 1e-30), 1e-13);
    }

    // quadrature exactness: band-limited product integrates exactly vs 2x grid
    {
        FormField u = sample_ad_form(lat, GaugeGroup::u1(), 0, band, 1.0, rng,
                                     Herm::general);
        FormField v = sample_ad_form(lat, GaugeGroup::u1(), 0, band, 1.0, rng,
                                     Herm::general);
        cplx direct = l2_inner(u, v);
        cplx over = l2_inner(resample(u, 2 * n), resample(v, 2 * n));
        push("quadrature_exactness", std::abs(direct - over) / (std::abs(direct) + 1e-30),
             1e-13);
    }

    Connection A(g, sample_ad_form(lat, g, 1, band, 0.3, rng, Herm::anti));
    FormField a = sample_ad_form(lat, g, 1, band, 0.3, rng, Herm::anti);

    {
        FormField x1 = sample_ad_form(lat, g, 1, band, 0.5, rng, Herm::anti);
        FormField y2 = sample_ad_form(lat, g, 2, band, 0.5, rng, Herm::anti);
        double lhs = l2_inner_re(covariant_d(A, x1), y2);
        double rhs = l2_inner_re(x1, covariant_d_adjoint(A, y2));
        push("covariant_adjointness", std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30),
             1e-12);
        FormField ddf = covariant_d(A, covariant_d(A, x1));
        FormField Ff = graded_commutator(curvature(A), x1);
        axpy(ddf, -1.0, Ff);
        push("curvature_identity", std::sqrt(l2_norm2(ddf) / (l2_norm2(Ff) + 1e-30)),
             1e-11);
    }

    {
        ComplexifiedCurvature cc = complexified_curvature(A, a);
        double tot = l2_norm2(cc.total);
        double sum2 = l2_norm2(cc.real_part) + l2_norm2(cc.imag_part);
        push("complexified_flatness", std::abs(tot - sum2) / (tot + 1e-30), 1e-12);
        ResidualReport rep = residual_tneq0(A, a);
        double rhs2 = tot + rep.block_norm2("dstar_a");
        push("energy_identity_tneq0", std::abs(rep.total - rhs2) / (rep.total + 1e-30),
             1e-12);
    }

    {
        BochnerResult b = bochner_check(A, a);
        push("bochner_balance", std::abs(b.lhs - b.rhs) / (b.lhs + b.rhs + 1.0), 1e-9);
        FormField ia = scaled(a, cplx(0.0, 1.0));
        double r1 = bochner_rhs(A, a);
        double r2 = bochner_rhs(A, ia);
        push("bochner_ia_invariance", std::abs(r1 - r2) / (r1 + 1e-30), 1e-12);
    }

    {
        // exp(X) must be resolved on the grid: keep the harmonic tail of the
        // unitary field below the invariance tolerance
        const double amp_g = (n >= 16) ? 0.03 : (n >= 12 ? 8e-3 : 1e-3);
        GaugeTransform gt = sample_unitary_gauge(lat, g, 1, amp_g, rng);
        Connection Ag = apply_gauge(gt, A);
        FormField ag = apply_gauge(gt, a);
        double t1 = residual_tneq0(A, a).total;
        double t2 = residual_tneq0(Ag, ag).total;
        push("gauge_invariance_total", std::abs(t1 - t2) / (t1 + 1e-30), 1e-11);
    }

    {
        HiggsPair p{A, split_a(a)};
        KahlerIdentityResult kres = kahler_identity_check(p);
        push("kahler_identity", kres.defect, 1e-10);
        // type decomposition of G = F - a∧a against the complex-side pieces
        FormField W = wedge_mult(a, a);
        FormField G = sub(curvature(A), W);
        FormField ps = phi_star(p.phi);
        FormField F = curvature(A);
        FormField g20 = sub(pq_project(F, 2, 0),
                            wedge_mult(p.phi.carrier, p.phi.carrier));
        axpy(g20, -1.0, pq_project(G, 2, 0));
        FormField g11 = add(pq_project(F, 1, 1),
                            graded_combo(p.phi.carrier, ps, 1.0, 1.0));
        axpy(g11, -1.0, pq_project(G, 1, 1));
        double err = std::max(std::sqrt(l2_norm2(g20)), std::sqrt(l2_norm2(g11))) /
                     (std::sqrt(l2_norm2(G)) + 1e-30);
        push("kahler_type_decomposition", err, 1e-12);
    }

    return checks;
}

}  // namespace

int main(int argc, char** argv) {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    CLI::App app{"kwlab: Kapustin-Witten torus laboratory"};
    app.require_subcommand(1);

    CommonOpts opt;
    opt.threads = read_env_threads();

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run identity suites or check snapshots");
    std::string suite, snapshot_path;
    verify->add_option("--suite", suite, "identities");
    verify->add_option("--snapshot", snapshot_path, "snapshot to check");
    verify->add_option("--config", opt.config_path);
    verify->add_option("--out", opt.out_dir);
    verify->add_option("--seed", opt.seed);
    verify->add_option("--n", opt.n);
    verify->add_option("--tol", opt.tol);
    verify->add_option("--group", opt.group);

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "minimize a KW system residual");
    double t_param = 1.0;
    int max_iters = 500;
    solve->add_option("--system", opt.system, "t0|tneq0|simpson|tneq0_kahler|t");
    solve->add_option("--t", t_param, "t value for --system t");
    solve->add_option("--config", opt.config_path);
    solve->add_option("--out", opt.out_dir);
    solve->add_option("--seed", opt.seed);
    solve->add_option("--n", opt.n);
    solve->add_option("--tol", opt.tol);
    solve->add_option("--group", opt.group);
    solve->add_option("--max-iters", max_iters);

    // ---- flow ----
    auto* flow = app.add_subcommand("flow", "metric heat flow to HYM / pluri-harmonic");
    std::string target = "hym";
    flow->add_option("--target", target, "hym|pluriharmonic");
    flow->add_option("--config", opt.config_path);
    flow->add_option("--out", opt.out_dir);
    flow->add_option("--seed", opt.seed);
    flow->add_option("--n", opt.n);
    flow->add_option("--tol", opt.tol);
    flow->add_option("--group", opt.group);
    flow->add_option("--max-iters", max_iters);

    // ---- hodge ----
    auto* hodge = app.add_subcommand("hodge", "rank-1 nonabelian Hodge pipeline");
    hodge->add_option("--config", opt.config_path);
    hodge->add_option("--out", opt.out_dir);
    hodge->add_option("--seed", opt.seed);
    hodge->add_option("--n", opt.n);

    // ---- index ----
    auto* index = app.add_subcommand("index", "index formulas and numerical index");
    bool formula = false, numerical = false, stripped = false, so3 = false;
    int k_top = 0, b1 = 0, bplus = 0, bminus = 0;
    std::string complex_id = "tneq0";
    double eps_perturb = 0.0;
    index->add_flag("--formula", formula);
    index->add_flag("--numerical", numerical);
    index->add_flag("--stripped", stripped);
    index->add_flag("--so3", so3);
    index->add_option("--k", k_top);
    index->add_option("--b1", b1);
    index->add_option("--bplus", bplus);
    index->add_option("--bminus", bminus);
    index->add_option("--complex", complex_id, "t0|tneq0");
    index->add_option("--eps", eps_perturb, "constant commuting perturbation of a");
    index->add_option("--config", opt.config_path);
    index->add_option("--out", opt.out_dir);
    index->add_option("--seed", opt.seed);
    index->add_option("--n", opt.n);
    index->add_option("--group", opt.group);

    try {
        app.parse(argc, argv);

        if (*verify) {
            std::map<std::string, std::string> kv;
            apply_config(opt.config_path,
                         {"suite", "snapshot", "seed", "n", "tol", "group", "out"}, kv);
            if (kv.count("suite") && suite.empty()) suite = kv["suite"];
            if (kv.count("n")) opt.n = std::stoi(kv["n"]);
            if (kv.count("seed")) opt.seed = std::stoull(kv["seed"]);
            if (kv.count("group")) opt.group = kv["group"];
            std::map<std::string, std::string> spec{{"cmd", "verify"},
                                                    {"suite", suite},
                                                    {"snapshot", snapshot_path},
                                                    {"n", std::to_string(opt.n)},
                                                    {"group", opt.group}};
            JsonWriter w;
            w.begin_object();
            w.field("schema", "kwlab-report-v1");
            w.field("command", "verify");
            w.field("spec_hash", spec_hash_of(spec));
            w.field("seed", opt.seed);
            w.field("threads", opt.threads);
            if (!snapshot_path.empty()) {
                FieldSnapshot snap = load_snapshot(snapshot_path);
                Connection A(snap.group, snap.at("A"));
                w.field("snapshot", snapshot_path);
                if (std::any_of(snap.fields.begin(), snap.fields.end(),
                                [](const NamedField& f) { return f.name == "a"; })) {
                    const FormField& a = snap.at("a");
                    w.begin_array("residual_t");
                    for (double tv : {0.5, 1.0, 2.0, 5.0}) {
                        w.begin_object();
                        w.field("t", tv);
                        w.field("total", residual_t(KWConfig(A, a, tv)).total);
                        w.end_object();
                    }
                    w.end_array();
                    w.key("residual_tneq0");
                    residual_report_json(w, residual_tneq0(A, a));
                    w.key("residual_t0");
                    residual_report_json(w, residual_t0(A, a));
                } else {
                    HiggsPair p{A, HiggsField{snap.at("phi")}};
                    w.key("residual_simpson");
                    residual_report_json(w, residual_simpson(p));
                    w.key("residual_tneq0_kahler");
                    residual_report_json(w, residual_tneq0_kahler(p));
                }
                w.end_object();
                emit(opt.out_dir, "verify_report.json", w.str());
            } else {
                require(suite == "identities" || suite == "all",
                        "verify: --suite identities or --snapshot PATH required");
                auto checks = run_identity_suite(parse_group(opt.group), opt.n, opt.seed);
                bool all = true;
                w.begin_array("checks");
                for (const auto& c : checks) {
                    w.begin_object();
                    w.field("name", c.name);
                    w.field("measured", c.measured);
                    w.field("tolerance", c.tolerance);
                    w.field("pass", c.pass);
                    w.end_object();
                    all = all && c.pass;
                }
                w.end_array();
                w.field("all_pass", all);
                w.end_object();
                emit(opt.out_dir, "verify_report.json", w.str());
                return all ? 0 : 1;
            }
            return 0;
        }

        if (*solve) {
            std::map<std::string, std::string> kv;
            apply_config(opt.config_path,
                         {"system", "t", "seed", "n", "tol", "group", "max_iters",
                          "out"},
                         kv);
            if (kv.count("system")) opt.system = kv["system"];
            if (kv.count("n")) opt.n = std::stoi(kv["n"]);
            if (kv.count("seed")) opt.seed = std::stoull(kv["seed"]);
            if (kv.count("tol")) opt.tol = std::stod(kv["tol"]);
            if (kv.count("group")) opt.group = kv["group"];
            if (kv.count("t")) t_param = std::stod(kv["t"]);
            if (kv.count("max_iters")) max_iters = std::stoi(kv["max_iters"]);
            GaugeGroup g = parse_group(opt.group);
            KWSystem sys = parse_system(opt.system);
            auto lat = TorusLattice::make(4, opt.n);
            SolveConfig sc;
            sc.seed = opt.seed;
            sc.tol = opt.tol;
            sc.max_iters = max_iters;
            KwLeastSquares ls(g, sys, t_param);
            FieldVec x0 = default_seed(lat, g, sys, sc);
            MinimizeResult res = minimize_kw(ls, x0, sc);
            fs::create_directories(opt.out_dir);
            const bool kahler =
                (sys == KWSystem::simpson || sys == KWSystem::tneq0_kahler);
            FieldSnapshot snap;
            snap.group = g;
            snap.lat = lat;
            snap.fields.push_back({"A", res.x.fields[0]});
            snap.fields.push_back({kahler ? "phi" : "a", res.x.fields[1]});
            save_snapshot(snap, (fs::path(opt.out_dir) / "solution.kwf").string());
            trace_csv(res.trace, (fs::path(opt.out_dir) / "trace.csv").string());
            std::map<std::string, std::string> spec{
                {"cmd", "solve"},        {"system", opt.system},
                {"t", std::to_string(t_param)}, {"n", std::to_string(opt.n)},
                {"tol", std::to_string(opt.tol)}, {"group", opt.group}};
            JsonWriter w;
            w.begin_object();
            w.field("schema", "kwlab-report-v1");
            w.field("command", "solve");
            w.field("spec_hash", spec_hash_of(spec));
            w.field("seed", opt.seed);
            w.field("threads", opt.threads);
            w.field("system", opt.system);
            w.field("converged", res.converged);
            w.field("diverged", res.diverged);
            w.field("iterations", res.iterations);
            w.field("final_total", res.final_total);
            w.field("fd_max_rel_err", res.fd_max_rel_err);
            if (!res.message.empty()) w.field("message", res.message);
            w.key("final_residual");
            residual_report_json(w, ls.residual(res.x));
            w.end_object();
            emit(opt.out_dir, "solve_report.json", w.str());
            return res.converged ? 0 : 1;
        }

        if (*flow) {
            std::map<std::string, std::string> kv;
            apply_config(opt.config_path,
                         {"target", "seed", "n", "tol", "group", "max_iters", "out"},
                         kv);
            if (kv.count("target")) target = kv["target"];
            if (kv.count("n")) opt.n = std::stoi(kv["n"]);
            if (kv.count("seed")) opt.seed = std::stoull(kv["seed"]);
            if (kv.count("tol")) opt.tol = std::stod(kv["tol"]);
            if (kv.count("group")) opt.group = kv["group"];
            if (kv.count("max_iters")) max_iters = std::stoi(kv["max_iters"]);
            GaugeGroup g = parse_group(opt.group);
            auto lat = TorusLattice::make(4, opt.n);
            Rng rng(opt.seed);
            // deterministic valid Higgs pair: flat A, constant commuting theta
            Connection A = Connection::zero(lat, g);
            FormField phi(lat, 1, g.rank, Herm::general);
            phi.band = 0;
            for (int zi = 0; zi < 2; ++zi) {
                SmallMat th(g.rank);
                for (int i = 0; i < g.rank; ++i)
                    th(i, i) = 0.3 * rng.gauss_cplx();
                if (g.traceless()) {
                    cplx tr = mat_trace(th.data(), g.rank) / double(g.rank);
                    for (int i = 0; i < g.rank; ++i) th(i, i) -= tr;
                }
                // carrier of theta dz_zi: components (2zi) and (2zi+1)
                for (long long s = 0; s < lat.sites(); ++s) {
                    cplx* p0 = phi.at(2 * zi, s);
                    cplx* p1 = phi.at(2 * zi + 1, s);
                    for (int e = 0; e < g.rank * g.rank; ++e) {
                        p0[e] += th.a[e];
                        p1[e] += cplx(0, 1) * th.a[e];
                    }
                }
            }
            HiggsPair pair{A, HiggsField{phi}};
            MetricField seed_metric;
            FormField s0 =
                sample_ad_form(lat, g, 0, std::max(1, opt.n / 4), 0.15, rng, Herm::herm);
            if (g.traceless()) remove_trace(s0);
            seed_metric.h = pointwise_exp(s0);
            seed_metric.det_fixed = g.traceless();
            SolveConfig sc;
            sc.seed = opt.seed;
            sc.tol = opt.tol;
            sc.max_iters = max_iters;
            FlowTarget tgt = (target == "hym") ? FlowTarget::hym
                                               : FlowTarget::pluriharmonic;
            HeatFlowResult res = metric_heat_flow(pair, tgt, sc, &seed_metric);
            fs::create_directories(opt.out_dir);
            FieldSnapshot snap;
            snap.group = g;
            snap.lat = lat;
            snap.fields.push_back({"H", res.H.h});
            save_snapshot(snap, (fs::path(opt.out_dir) / "metric.kwf").string());
            trace_csv(res.trace, (fs::path(opt.out_dir) / "trace.csv").string());
            std::map<std::string, std::string> spec{{"cmd", "flow"},
                                                    {"target", target},
                                                    {"n", std::to_string(opt.n)},
                                                    {"tol", std::to_string(opt.tol)},
                                                    {"group", opt.group}};
            JsonWriter w;
            w.begin_object();
            w.field("schema", "kwlab-report-v1");
            w.field("command", "flow");
            w.field("spec_hash", spec_hash_of(spec));
            w.field("seed", opt.seed);
            w.field("threads", opt.threads);
            w.field("target", target);
            w.field("converged", res.converged);
            w.field("aborted", res.aborted);
            w.field("iterations", res.iterations);
            w.field("final_defect", res.final_defect);
            w.field("fd_descent_slope", res.fd_descent_slope);
            w.field("min_eigenvalue", res.H.min_eigenvalue());
            w.field("det_defect", res.H.det_defect());
            if (!res.message.empty()) w.field("message", res.message);
            w.end_object();
            emit(opt.out_dir, "flow_report.json", w.str());
            return res.converged ? 0 : 1;
        }

        if (*hodge) {
            std::map<std::string, std::string> kv;
            apply_config(opt.config_path, {"seed", "n", "out"}, kv);
            if (kv.count("n")) opt.n = std::stoi(kv["n"]);
            if (kv.count("seed")) opt.seed = std::stoull(kv["seed"]);
            auto lat = TorusLattice::make(4, opt.n);
            auto u1 = GaugeGroup::u1();
            Rng rng(opt.seed);
            // random flat abelian connection: constants + exact part
            FormField pot =
                sample_ad_form(lat, u1, 0, std::max(1, opt.n / 4), 0.3, rng,
                               Herm::general);
            FormField nu = exterior_d(pot);
            for (int c = 0; c < 4; ++c) {
                cplx w0 = 0.5 * rng.gauss_cplx();
                for (long long s = 0; s < lat.sites(); ++s) nu.at(c, s)[0] += w0;
            }
            FlatBundleData flat{u1, nu};
            Rank1Oracle orc = rank1_harmonic_oracle(flat);
            HolonomyDiagnostics hol = holonomy_diagnostics(flat);
            std::map<std::string, std::string> spec{{"cmd", "hodge"},
                                                    {"n", std::to_string(opt.n)}};
            JsonWriter w;
            w.begin_object();
            w.field("schema", "kwlab-report-v1");
            w.field("command", "hodge");
            w.field("spec_hash", spec_hash_of(spec));
            w.field("seed", opt.seed);
            w.field("threads", opt.threads);
            w.field("flatness_in", orc.flatness_in);
            w.field("d0_defect", orc.d0_defect);
            w.field("rebuild_defect", orc.rebuild_defect);
            w.field("holonomy_max_commutator", hol.max_commutator);
            // lambda sweep over 9 points of the complex plane
            w.begin_array("lambda_flatness");
            MetricField id = MetricField::identity(lat, 1);
            for (int i = 0; i < 9; ++i) {
                cplx lam(-1.0 + (i % 3), -1.0 + (i / 3));
                LambdaConnection L = lambda_connection(orc.pair, id, lam);
                w.begin_object();
                w.field("re", lam.real());
                w.field("im", lam.imag());
                w.field("defect", flatness_defect(L));
                w.end_object();
            }
            w.end_array();
            w.end_object();
            emit(opt.out_dir, "hodge_report.json", w.str());
            return 0;
        }

        if (*index) {
            std::map<std::string, std::string> kv;
            apply_config(opt.config_path,
                         {"k", "b1", "bplus", "bminus", "complex", "n", "group",
                          "eps", "out"},
                         kv);
            if (kv.count("k")) k_top = std::stoi(kv["k"]);
            if (kv.count("b1")) b1 = std::stoi(kv["b1"]);
            if (kv.count("bplus")) bplus = std::stoi(kv["bplus"]);
            if (kv.count("bminus")) bminus = std::stoi(kv["bminus"]);
            if (kv.count("complex")) complex_id = kv["complex"];
            if (kv.count("n")) opt.n = std::stoi(kv["n"]);
            if (kv.count("group")) opt.group = kv["group"];
            if (kv.count("eps")) eps_perturb = std::stod(kv["eps"]);
            if (!formula && !numerical) formula = true;
            JsonWriter w;
            w.begin_object();
            w.field("schema", "kwlab-report-v1");
            w.field("command", "index");
            if (formula) {
                TopologyInput tin;
                tin.group = so3 ? TopologyInput::Group::SO3 : TopologyInput::Group::SU2;
                tin.k = k_top;
                tin.b1 = b1;
                tin.b_plus = bplus;
                tin.b_minus = bminus;
                std::map<std::string, std::string> spec{
                    {"cmd", "index_formula"}, {"k", std::to_string(k_top)},
                    {"b1", std::to_string(b1)}, {"bplus", std::to_string(bplus)},
                    {"bminus", std::to_string(bminus)}};
                w.field("spec_hash", spec_hash_of(spec));
                w.field("seed", opt.seed);
                w.field("index_t0", index_t0_formula(tin));
                if (tin.k == 0) w.field("index_tneq0", index_tneq0_formula(tin));
                w.field("index_Lplus", index_Lpm_formula(tin, +1));
                w.field("index_Lminus", index_Lpm_formula(tin, -1));
                w.field("euler", tin.euler());
            }
            if (numerical) {
                GaugeGroup g = parse_group(opt.group);
                auto lat = TorusLattice::make(4, opt.n);
                Connection A0 = Connection::zero(lat, g);
                FormField a0(lat, 1, g.rank, Herm::anti);
                a0.band = 0;
                if (eps_perturb != 0.0 && g.kind == GaugeGroup::Kind::SU2) {
                    SmallMat e3 = su2_basis(3);
                    for (int c = 0; c < 2; ++c)
                        for (long long s = 0; s < lat.sites(); ++s) {
                            cplx* p = a0.at(c, s);
                            for (int e = 0; e < 4; ++e) p[e] += eps_perturb * e3.a[e];
                        }
                }
                ComplexId which =
                    (complex_id == "t0") ? ComplexId::t0 : ComplexId::tneq0;
                std::map<std::string, std::string> spec{
                    {"cmd", "index_numerical"}, {"complex", complex_id},
                    {"n", std::to_string(opt.n)}, {"group", opt.group},
                    {"eps", std::to_string(eps_perturb)}};
                w.field("spec_hash", spec_hash_of(spec));
                w.field("seed", opt.seed);
                LinearizedOperator op = assemble_linearized(which, A0, a0, stripped);
                IndexResult res = numerical_index(op);
                w.field("complex", complex_id);
                w.field("stripped", stripped);
                w.field("dim_ker", res.dim_ker);
                w.field("dim_coker", res.dim_coker);
                w.field("index", res.index);
                w.field("gap_ratio", res.gap_ratio);
                w.field("indeterminate", res.indeterminate);
                if (which == ComplexId::t0) {
                    int h0 = head_kernel_dim(A0, a0);
                    w.field("h0", h0);
                    w.field("h1", res.dim_ker);
                    w.field("h2", res.dim_coker - h0);
                }
                w.begin_array("spectrum");
                for (double s : res.spectrum) w.value(s);
                w.end_array();
            }
            w.end_object();
            emit(opt.out_dir, "index_report.json", w.str());
            return 0;
        }
    } catch (const std::exception& e) {
        JsonWriter w;
        w.begin_object();
        w.field("schema", "kwlab-report-v1");
        w.field("error", std::string(e.what()));
        w.end_object();
        std::cout << w.str() << "\n";
        return 2;
    }
    return 0;
}
