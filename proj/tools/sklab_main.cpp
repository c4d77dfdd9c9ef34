#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sklab/analysis/experiments.hpp"
#include "sklab/cli/pipeline.hpp"
#include "sklab/kernels/kernels.hpp"
#include "sklab/mapping/certificates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t env_u64(const char* name, std::uint64_t def) {
    if (const char* v = std::getenv(name)) return std::strtoull(v, nullptr, 10);
    return def;
}

std::string env_str(const char* name, std::string def) {
    if (const char* v = std::getenv(name)) return v;
    return def;
}

int cmd_simulate_coupling(const std::string& config_path,
                          sklab::cli::ExperimentConfig cfg, int workers) {
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            std::fprintf(stderr, "cannot read config %s\n", config_path.c_str());
            return 2;
        }
        json j;
        f >> j;
        auto file_cfg = sklab::cli::ExperimentConfig::from_json(j);
        file_cfg.out_dir = cfg.out_dir;
        file_cfg.seed = cfg.seed;
        cfg = file_cfg;
    }
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    const auto manifest = sklab::cli::run_pipeline(cfg, workers);
    int failed = 0;
    for (const auto& c : manifest.cells)
        if (!c.ok) ++failed;
    std::printf("%zu cells, %d failed, %.1f s, kernels: %s\n",
                manifest.cells.size(), failed, manifest.wall_seconds,
                std::string(sklab::kern::active().name).c_str());
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for reflected SDE couplings"};
    app.require_subcommand(1);

    std::string out = env_str("SKLAB_OUT", "");
    std::uint64_t seed = env_u64("SKLAB_SEED", 1);
    int workers = int(env_u64("SKLAB_WORKERS", 1));
    std::string config_path;
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--workers", workers, "worker threads");
    app.add_option("--config", config_path, "JSON config file");

    // simulate-coupling
    auto* sim = app.add_subcommand("simulate-coupling",
                                   "coupled half-space runs over (gamma, j)");
    sklab::cli::ExperimentConfig scfg;
    std::string stop_rule = "annulus";
    sim->add_option("--gamma", scfg.gammas, "field exponents");
    sim->add_option("--j", scfg.js, "initial separation exponents");
    sim->add_option("--n1", scfg.n1, "lacunarity");
    sim->add_option("--m-max", scfg.m_max, "outer truncation");
    sim->add_option("--modes", scfg.fourier_modes, "fourier modes per axis");
    sim->add_option("--dt", scfg.dt, "time step (default: 4^{-j-4})");
    sim->add_option("--paths", scfg.paths, "paths per cell");
    sim->add_option("--horizon", scfg.horizon, "time horizon");
    sim->add_option("--stop", stop_rule,
                    "annulus|clock|localtime|distance1|horizon");
    sim->add_option("--a0", scfg.stop.a0, "annulus inner factor");
    sim->add_option("--a1", scfg.stop.a1, "annulus outer factor");
    sim->add_option("--b", scfg.stop.b, "clock threshold factor");
    sim->add_option("--ell", scfg.stop.ell, "local time threshold");
    sim->add_option("--delta", scfg.stop.delta, "distance threshold");
    sim->add_option("--trace", scfg.trace_paths, "trace CSVs per cell");

    // solve-mapping
    auto* map = app.add_subcommand("solve-mapping",
                                   "flattening-map solves and certificates");
    std::string phi_kind = "lacunary";
    double map_gamma = 0.8, map_amp = 0.35, map_ball = 0.125;
    std::vector<double> map_eps = {0.4, 0.2, 0.1, 0.05};
    int map_d = 3, map_grid = 65, map_nz = 0, map_depth = 10;
    map->add_option("--phi", phi_kind, "flat|lacunary|bump");
    map->add_option("--gamma", map_gamma, "Hoelder exponent");
    map->add_option("--amplitude", map_amp, "boundary amplitude");
    map->add_option("--depth", map_depth, "lacunary depth");
    map->add_option("--eps", map_eps, "dilation sweep");
    map->add_option("--d", map_d, "ambient dimension (2 or 3)");
    map->add_option("--grid", map_grid, "nodes per horizontal axis");
    map->add_option("--nz", map_nz, "nodes in z (default: --grid)");
    map->add_option("--ball", map_ball, "certified ball radius");

    // check-field
    auto* chk = app.add_subcommand("check-field",
                                   "gradient-bound certificate table");
    double chk_gamma = 0.3;
    int chk_n1 = 4, chk_mmax = 6, chk_modes = 32, chk_lmin = 0, chk_lmax = -1,
        chk_nxy = 24;
    chk->add_option("--gamma", chk_gamma, "field exponent");
    chk->add_option("--n1", chk_n1, "lacunarity");
    chk->add_option("--m-max", chk_mmax, "outer truncation");
    chk->add_option("--modes", chk_modes, "fourier modes");
    chk->add_option("--lmin", chk_lmin, "coarsest level (x3 = 2^{-l})");
    chk->add_option("--lmax", chk_lmax, "finest level (default m_max n1 + 2)");
    chk->add_option("--nxy", chk_nxy, "horizontal samples per level");

    // bessel-table
    auto* bt = app.add_subcommand("bessel-table",
                                  "closed-form exit probability grid");
    int bt_kmax = 8;
    bt->add_option("--k-max", bt_kmax, "deepest separation exponent");

    // analyze / report
    auto* an = app.add_subcommand("analyze", "statistics over a run directory");
    std::string an_dir;
    an->add_option("--in", an_dir, "run directory")->required();
    auto* rp = app.add_subcommand("report", "summarize manifest + analysis");
    std::string rp_dir;
    rp->add_option("--in", rp_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            scfg.seed = seed;
            scfg.out_dir = out;
            auto s = sklab::engine::StopSpec::parse(stop_rule);
            s.a0 = scfg.stop.a0;
            s.a1 = scfg.stop.a1;
            s.b = scfg.stop.b;
            s.ell = scfg.stop.ell;
            s.delta = scfg.stop.delta;
            scfg.stop = s;
            if (scfg.gammas.empty()) scfg.gammas = {0.3};
            if (scfg.js.empty()) scfg.js = {4};
            sklab::cli::ExperimentConfig flag_cfg = scfg;
            flag_cfg.out_dir = out;
            flag_cfg.seed = seed;
            return cmd_simulate_coupling(config_path, flag_cfg, workers);
        }

        if (map->parsed()) {
            if (out.empty()) out = "mapping_out";
            fs::create_directories(out);
            sklab::geom::BoundaryFunction base =
                phi_kind == "flat"
                    ? sklab::geom::BoundaryFunction::flat(map_d - 1, map_gamma)
                : phi_kind == "bump"
                    ? sklab::geom::BoundaryFunction::radial_bump(
                          map_d - 1, map_gamma, map_amp, 0.8,
                          sklab::Vec::zero(map_d - 1))
                    : sklab::geom::BoundaryFunction::lacunary(
                          map_d - 1, map_gamma, map_amp, map_depth, seed);
            if (map_nz <= 0) map_nz = map_grid;
            json cert_out = json::array();
            for (double eps : map_eps) {
                auto phi = phi_kind == "flat"
                               ? base
                               : sklab::geom::BoundaryFunction::scaled_cutoff(
                                     base, eps);
                sklab::mapping::MixedBVP bvp(phi, map_d, map_grid, map_nz);
                std::vector<sklab::mapping::GridSolution> H;
                bool converged = true;
                for (int c = 0; c < map_d; ++c) {
                    H.push_back(sklab::mapping::solve_component(bvp, c));
                    converged = converged && H.back().converged;
                }
                auto rep = sklab::mapping::certify_flattening_map(bvp, H, map_ball);
                cert_out.push_back(
                    {{"eps", eps},
                     {"converged", converged},
                     {"det_min", rep.det_min},
                     {"det_max", rep.det_max},
                     {"dhd_dxd_min", rep.dhd_dxd_min},
                     {"weak_flux_max", rep.weak_flux_max},
                     {"oblique_fd_max", rep.oblique_fd_max},
                     {"alignment_sin_max", rep.alignment_sin_max},
                     {"c_min", rep.c_min},
                     {"second_deriv_c2", rep.second_deriv_c2},
                     {"blowup_fit_slope", rep.blowup_fit_slope},
                     {"injectivity_ratio_min", rep.injectivity_ratio_min},
                     {"nodes_in_ball", rep.nodes_in_ball},
                     {"jacobian_ok", rep.jacobian_ok()}});
                std::printf("eps %-6g det [%.4f, %.4f] dhd %.4f %s\n", eps,
                            rep.det_min, rep.det_max, rep.dhd_dxd_min,
                            rep.jacobian_ok() ? "ok" : "violates [1/2, 2]");
                std::ofstream slice(out + "/slice_eps" + std::to_string(eps) +
                                    ".csv");
                slice << "i,k,value\n";
                const int jmid = map_d == 3 ? bvp.nxy / 2 : 0;
                for (int k = 0; k < bvp.nz; ++k)
                    for (int i = 0; i < bvp.nxy; ++i) {
                        const std::size_t n =
                            map_d == 3
                                ? (std::size_t(k) * bvp.nxy + jmid) * bvp.nxy +
                                      i
                                : std::size_t(k) * bvp.nxy + i;
                        slice << i << ',' << k << ',' << H.back().values[n]
                              << '\n';
                    }
            }
            std::ofstream f(out + "/certificates.json");
            f << cert_out.dump(2) << '\n';
            return 0;
        }

        if (chk->parsed()) {
            if (out.empty()) out = "field_out";
            fs::create_directories(out);
            if (chk_lmax < 0) chk_lmax = chk_mmax * chk_n1 + 2;
            sklab::field::CounterexampleField f(
                {chk_gamma, chk_n1, chk_mmax, chk_modes});
            const auto cert =
                f.certify_gradient_bound(chk_lmin, chk_lmax, chk_nxy);
            std::ofstream csv(out + "/gradient_certificate.csv");
            csv << "x3,max_normalized_gradient\n";
            for (const auto& row : cert.rows)
                csv << row.x3 << ',' << row.max_normalized << '\n';
            json summary = {{"gamma", chk_gamma},
                            {"n1", chk_n1},
                            {"m_max", chk_mmax},
                            {"overall_max", cert.overall_max},
                            {"argmax", cert.argmax}};
            std::ofstream jf(out + "/gradient_certificate.json");
            jf << summary.dump(2) << '\n';
            std::printf("c1 = %.6f at (%.3f, %.3f, %.3g)\n", cert.overall_max,
                        cert.argmax[0], cert.argmax[1], cert.argmax[2]);
            return 0;
        }

        if (bt->parsed()) {
            std::printf("k,r0,a,b,p_outer\n");
            for (int k = 1; k <= bt_kmax; ++k) {
                const double r0 = std::pow(2.0, -k);
                std::printf("%d,%.10g,%.10g,1,%.10g\n", k, r0, r0 / 2,
                            sklab::analysis::bessel_exit_prob(r0 / 2, 1.0, r0));
            }
            for (int k = 1; k <= bt_kmax; ++k) {
                const double r0 = std::pow(2.0, -k);
                std::printf("%d,%.10g,%.10g,%.10g,0.5\n", k, r0, r0 / 2,
                            2 * r0);
            }
            return 0;
        }

        if (an->parsed()) {
            const json analysis = sklab::cli::analyze_dir(an_dir);
            std::ofstream f(an_dir + "/analysis.json");
            f << analysis.dump(2) << '\n';
            std::printf("analysis written to %s/analysis.json\n",
                        an_dir.c_str());
            return 0;
        }

        if (rp->parsed()) {
            std::ifstream mf(rp_dir + "/manifest.json");
            if (!mf) {
                std::fprintf(stderr, "no manifest.json in %s\n",
                             rp_dir.c_str());
                return 2;
            }
            json manifest;
            mf >> manifest;
            json analysis;
            std::ifstream af(rp_dir + "/analysis.json");
            if (af)
                af >> analysis;
            else
                analysis = sklab::cli::analyze_dir(rp_dir);
            json machine;
            const std::string text =
                sklab::cli::render_report(manifest, analysis, &machine);
            std::fputs(text.c_str(), stdout);
            std::ofstream rf(rp_dir + "/report.json");
            rf << machine.dump(2) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
