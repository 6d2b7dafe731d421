// Command-line front end: build codes, realize orbits, run emergence
// experiments, run the lemma-verification suites, export data.
//
// Exit codes: 0 ok, 1 assertion/verification failure, 2 usage/config error.

#include "emg/io.hpp"
#include "emg/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

namespace {

using namespace emg;
using nlohmann::json;

int exit_code_for(const std::exception& e, bool config_stage) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return config_stage ? 2 : 1;
}

pipeline::ExperimentConfig load_config(const std::string& path) {
    return pipeline::config_from_json(io::load_json(path));
}

// --------------------------------------------------------------------------
// Quick lemma-verification suites (compact versions of the acceptance runs).

struct LemmaReport {
    json details = json::array();
    bool ok = true;

    void add(const std::string& name, bool pass, const std::string& note) {
        details.push_back({{"name", name}, {"pass", pass}, {"note", note}});
        ok = ok && pass;
        std::printf("%-34s %s  %s\n", name.c_str(), pass ? "PASS" : "FAIL", note.c_str());
    }
};

shift::ShiftPoint random_stream(shift::Alphabet a, std::mt19937_64& rng, int len) {
    std::uniform_int_distribution<int> sym(1, a.m);
    std::vector<shift::Symbol> p;
    for (int i = 0; i < len; ++i) p.push_back(static_cast<shift::Symbol>(sym(rng)));
    return shift::ShiftPoint::prefix_padded(a, std::move(p));
}

LemmaReport verify_lemmas(std::uint64_t seed) {
    LemmaReport rep;
    std::mt19937_64 rng(seed);
    shift::Alphabet a2(2);
    auto ground = ShiftGround::create(a2);

    {  // exact solver vs brute force on tiny supports
        double maxdiff = 0.0;
        for (int rep_i = 0; rep_i < 100; ++rep_i) {
            std::uniform_int_distribution<int> na(1, 4);
            auto mk = [&] {
                const int n = na(rng);
                std::vector<Atom> atoms;
                for (int i = 0; i < n; ++i)
                    atoms.push_back({ground->add_point(random_stream(a2, rng, 64)), BigRat(1, n)});
                return DiscreteMeasure(ground, std::move(atoms));
            };
            auto mu = mk(), nu = mk();
            maxdiff = std::max(maxdiff, std::abs(w1(mu, nu) - brute_force_w1(mu, nu)));
        }
        rep.add("transport vs brute force", maxdiff <= 1e-9, "maxdiff " + io::fmt_double(maxdiff));
    }
    {  // Dirac identity
        double maxdiff = 0.0;
        for (int i = 0; i < 50; ++i) {
            auto x = random_stream(a2, rng, 64);
            auto y = random_stream(a2, rng, 64);
            DiscreteMeasure mu(ground, {{ground->add_point(x), BigRat(1)}});
            DiscreteMeasure nu(ground, {{ground->add_point(y), BigRat(1)}});
            const double d = shift::shift_metric(x, y, shift::TruncationDepth(ground->depth())).value;
            maxdiff = std::max(maxdiff, std::abs(w1(mu, nu) - d));
        }
        rep.add("Dirac distance identity", maxdiff <= 2 * ground->entry_error() + 1e-12,
                "maxdiff " + io::fmt_double(maxdiff));
    }
    {  // reset bound w1(delta^m, delta^{n,m}) <= 2n/m
        bool ok = true;
        for (int i = 0; i < 50 && ok; ++i) {
            std::uniform_int_distribution<std::uint64_t> md(2, 120);
            const std::uint64_t m = md(rng);
            std::uniform_int_distribution<std::uint64_t> nd(0, m - 1);
            const std::uint64_t n = nd(rng);
            auto x = random_stream(a2, rng, static_cast<int>(m) + ground->depth() + 2);
            auto full = empirical_measure(x, m, ground);
            auto part = n == 0 ? full : partial_empirical(x, n, m, ground);
            auto res = w1_exact(full, part);
            ok = res.value <= 2.0 * static_cast<double>(n) / static_cast<double>(m) + res.slack() + 1e-9;
        }
        rep.add("window reset bound", ok, "50 random triples");
    }
    {  // simplex Lipschitz bound (L+1)|t-s|
        auto fam = PeriodicFamily::tower(4);
        bool ok = true;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int L = 1; L <= 3; ++L) {
            for (int i = 0; i < 30 && ok; ++i) {
                auto draw = [&] {
                    std::vector<BigRat> t;
                    BigRat s = 0;
                    for (int l = 0; l <= L; ++l) {
                        BigRat v = rat_from_double(u(rng) + 1e-9);
                        t.push_back(v);
                        s += v;
                    }
                    for (auto& v : t) v /= s;
                    return SimplexCoord(std::move(t));
                };
                auto t = draw(), s = draw();
                auto mt = simplex_measure(t, fam, ground);
                auto ms = simplex_measure(s, fam, ground);
                auto res = w1_exact(mt, ms);
                ok = res.value <= (L + 1) * euclid(t.t, s.t) + res.slack() + 1e-9;
            }
        }
        rep.add("simplex Lipschitz bound", ok, "L in 1..3");
    }
    {  // separation bound for the mixed family
        auto fam = PeriodicFamily::fixed_points(6, 4, 2, true);
        auto g6 = ShiftGround::create(shift::Alphabet(6));
        bool ok = true;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int L = 1; L <= 3 && ok; ++L) {
            auto rho = rho_L(fam, L);
            for (int i = 0; i < 30 && ok; ++i) {
                auto draw = [&] {
                    std::vector<BigRat> T;
                    for (int l = 0; l < L; ++l) T.push_back(rat_from_double(u(rng) / L));
                    return CubeCoord(std::move(T), true);
                };
                auto T = draw(), S = draw();
                auto mt = simplex_measure(iota_map(T, rho.pivot), fam, g6);
                auto ms = simplex_measure(iota_map(S, rho.pivot), fam, g6);
                auto res = w1_exact(mt, ms);
                const double lower = to_double(*fam.zeta) * rho.rho * euclid(T.T, S.T) /
                                     std::sqrt(static_cast<double>(L));
                ok = res.value >= lower - res.slack() - 1e-9;
            }
        }
        rep.add("mixed-family separation bound", ok, "L in 1..3");
    }
    return rep;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbit codes, exact W1 transport, and pointwise-emergence estimation"};
    app.require_subcommand(1);

    std::string config_path, code_path, out_path, summary_path, eps_grid, kind_override;
    std::string out_dir = ".";
    int lmax_override = 0;
    std::uint64_t seed = 1;
    std::uint64_t limit = 256;
    int jobs = 1;

    auto* build = app.add_subcommand("build-code", "construct a code and verify its block conditions");
    build->add_option("--config,--seed-params", config_path, "experiment config (JSON)")->required();
    build->add_option("--kind", kind_override, "override: master|shift");
    build->add_option("--Lmax", lmax_override, "override L_max");
    build->add_option("--out", out_path, "output code JSON")->required();

    auto* realize = app.add_subcommand("realize", "realize a code as an orbit prefix (CSV)");
    realize->add_option("--code", code_path, "code JSON")->required();
    realize->add_option("--out", out_path, "output CSV")->required();
    realize->add_option("--limit", limit, "number of rows to export");

    auto* curvecmd = app.add_subcommand("emergence-curve", "emergence curve from a code's checkpoints");
    curvecmd->add_option("--code", code_path, "code JSON")->required();
    curvecmd->add_option("--eps-grid", eps_grid, "dyadic:a,b (default dyadic:0,12)");
    curvecmd->add_option("--out", out_path, "curve CSV")->required();
    curvecmd->add_option("--summary", summary_path, "summary JSON");
    curvecmd->add_option("--jobs", jobs, "parallelism degree (outputs are independent of it)");

    auto* verify = app.add_subcommand("verify-lemmas", "run the quick lemma property suites");
    verify->add_option("--seed", seed, "random seed");

    auto* exportcmd = app.add_subcommand("export", "export checkpoint measures of a code");
    exportcmd->add_option("--code", code_path, "code JSON")->required();
    exportcmd->add_option("--out", out_path, "output JSON")->required();

    auto* runcmd = app.add_subcommand("run", "full pipeline: build, realize, sample, curve, summary");
    runcmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    runcmd->add_option("--out-dir", out_dir, "output directory");
    runcmd->add_option("--jobs", jobs, "parallelism degree (outputs are independent of it)");
    bool run_lemmas = false;
    runcmd->add_flag("--verify-lemmas", run_lemmas, "also run the lemma property suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) {
            pipeline::ExperimentConfig cfg;
            try {
                cfg = load_config(config_path);
                if (!kind_override.empty()) cfg.kind = kind_override;
                if (lmax_override > 0) cfg.L_max = lmax_override;
            } catch (const std::exception& e) {
                return exit_code_for(e, true);
            }
            auto built = pipeline::build_code(cfg);
            io::write_file(out_path, io::dump_json(built.code_json));
            std::printf("blocks %zu  conditions %s\n",
                        built.code_json.at("blocks").size(),
                        built.all_conditions_ok ? "ok" : "VIOLATED");
            return built.all_conditions_ok ? 0 : 1;
        }

        if (realize->parsed()) {
            const json cj = io::load_json(code_path);
            auto famspec = io::FamilySpec::from_json(cj.at("family"));
            auto fam = famspec.build();
            if (cj.at("kind") == "shift") {
                auto code = io::shift_code_from_json(cj);
                auto point = realize_shift_point(code, fam, BigInt(limit));
                io::write_file(out_path, io::point_prefix_to_csv(point, limit));
            } else {
                auto ospec = io::OrderSpec::from_json(cj.at("order"));
                auto order = ospec.build();
                auto code = io::master_code_from_json(cj, *order);
                auto space = build_synthetic_space(fam);
                auto spec = CodeRealizationSpec::exact_share(*fam.zeta);
                auto orbit = realize_synthetic_orbit(space, spec, code, order);
                io::write_file(out_path, io::orbit_to_csv(orbit, limit));
            }
            return 0;
        }

        if (curvecmd->parsed() || exportcmd->parsed()) {
            const json cj = io::load_json(code_path);
            auto famspec = io::FamilySpec::from_json(cj.at("family"));
            pipeline::ExperimentConfig cfg;
            cfg.family = famspec;
            cfg.kind = cj.at("kind").get<std::string>();
            cfg.eps_tilde = io::eps_from_json(cj.at("eps_tilde"));
            cfg.jobs = jobs;
            pipeline::SampledRun run;
            if (cfg.kind == "shift") {
                auto code = io::shift_code_from_json(cj);
                cfg.L_max = code.blocks.back().L;
                run = pipeline::sample_shift_run(cfg, code);
            } else {
                cfg.order = io::OrderSpec::from_json(cj.at("order"));
                auto order = cfg.order.build();
                auto code = io::master_code_from_json(cj, *order);
                cfg.L_max = code.blocks.back().L;
                cfg.share_zeta = famspec.zeta;
                auto fam = famspec.build();
                auto space = build_synthetic_space(fam);
                run = pipeline::sample_master_run(cfg, code, order, fam, space);
            }
            if (exportcmd->parsed()) {
                json samples = json::array();
                for (std::size_t i = 0; i < run.samples.size(); ++i) {
                    json s = io::measure_to_json(run.samples[i]);
                    s["meta"]["L"] = run.records[i].L;
                    s["meta"]["time"] = run.records[i].time;
                    samples.push_back(std::move(s));
                }
                io::write_file(out_path, io::dump_json(json{{"samples", samples}}));
                return 0;
            }
            int lo = 0, hi = 12;
            if (!eps_grid.empty()) pipeline::parse_eps_grid(eps_grid, lo, hi);
            auto analysis = analyze_samples(run.samples, jobs);
            auto curve = emergence_curve_from(analysis.gp, dyadic_grid(lo, hi));
            io::write_file(out_path, io::curve_to_csv(curve));
            if (!summary_path.empty()) {
                const auto fit = best_exponent(curve);
                io::write_file(summary_path,
                               io::dump_json(json{{"exponent_best", fit.exponent},
                                                  {"exponent_full_window", fit.full_window_exponent},
                                                  {"window", {fit.window_lo, fit.window_hi}},
                                                  {"samples", run.samples.size()}}));
            }
            return 0;
        }

        if (verify->parsed()) {
            auto rep = verify_lemmas(seed);
            return rep.ok ? 0 : 1;
        }

        if (runcmd->parsed()) {
            pipeline::ExperimentConfig cfg;
            try {
                cfg = load_config(config_path);
                cfg.jobs = jobs;
            } catch (const std::exception& e) {
                return exit_code_for(e, true);
            }
            std::filesystem::create_directories(out_dir);
            auto result = pipeline::run_pipeline(cfg);
            io::write_file(out_dir + "/code.json", io::dump_json(result.code_json));
            io::write_file(out_dir + "/curve.csv", result.curve_csv);
            io::write_file(out_dir + "/summary.json", io::dump_json(result.summary));
            std::printf("%s\n", io::dump_json(result.summary).c_str());
            bool lemmas_ok = true;
            if (run_lemmas) lemmas_ok = verify_lemmas(cfg.seed).ok;
            return (result.ok && lemmas_ok) ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        return exit_code_for(e, true);
    } catch (const std::exception& e) {
        return exit_code_for(e, false);
    }
    return 2;
}
