#include "sklab/cli/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "sklab/analysis/experiments.hpp"
#include "sklab/common/rng_util.hpp"
#include "sklab/common/sha1.hpp"

namespace fs = std::filesystem;

namespace sklab::cli {

const char* kToolVersion = "sklab 1.0.0";

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double validator_cap(int j) { return std::pow(4.0, double(-j - 4)); }

}  // namespace

void ExperimentConfig::validate() const {
    if (gammas.empty() || js.empty())
        throw std::invalid_argument("empty sweep");
    for (double g : gammas)
        if (!(g > 0.0) || g > 1.0)
            throw std::invalid_argument("gamma must be in (0, 1]");
    if (paths == 0) throw std::invalid_argument("paths must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    for (int j : js) {
        if (j < 0 || j > 30) throw std::invalid_argument("j out of range");
        if (dt > 0.0 && dt > validator_cap(j) * (1.0 + 1e-12))
            throw std::invalid_argument(
                "dt exceeds the validator cap 4^{-j-4} for j = " +
                std::to_string(j));
    }
    if (n1 < 1) throw std::invalid_argument("n1 must be >= 1");
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"gammas", gammas},
            {"js", js},
            {"n1", n1},
            {"m_max", m_max},
            {"fourier_modes", fourier_modes},
            {"paths", paths},
            {"dt", dt},
            {"horizon", horizon},
            {"stop",
             {{"rule", stop.describe()},
              {"a0", stop.a0},
              {"a1", stop.a1},
              {"b", stop.b},
              {"ell", stop.ell},
              {"delta", stop.delta}}},
            {"seed", seed},
            {"trace_paths", trace_paths},
            {"trace_every", trace_every}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.gammas = j.at("gammas").get<std::vector<double>>();
    c.js = j.at("js").get<std::vector<int>>();
    c.n1 = j.value("n1", 4);
    c.m_max = j.value("m_max", 6);
    c.fourier_modes = j.value("fourier_modes", 32);
    c.paths = j.value("paths", std::uint64_t(100));
    c.dt = j.value("dt", 0.0);
    c.horizon = j.value("horizon", 1.0);
    if (j.contains("stop")) {
        const auto& s = j.at("stop");
        c.stop = engine::StopSpec::parse(s.value("rule", "horizon"));
        c.stop.a0 = s.value("a0", 0.5);
        c.stop.a1 = s.value("a1", 2.0);
        c.stop.b = s.value("b", 1.0);
        c.stop.ell = s.value("ell", 1.0);
        c.stop.delta = s.value("delta", 1.0);
    }
    c.seed = j.value("seed", std::uint64_t(1));
    c.trace_paths = j.value("trace_paths", 0);
    c.trace_every = j.value("trace_every", 64);
    return c;
}

std::string ExperimentConfig::content_hash() const {
    nlohmann::json j = to_json();
    j["tool_version"] = kToolVersion;
    return sha1_hex(j.dump());
}

std::string CellKey::id() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "g%.6g_j%d", gamma, j);
    return buf;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json cells_j = nlohmann::json::array();
    for (const auto& c : cells)
        cells_j.push_back({{"gamma", c.gamma},
                           {"j", c.j},
                           {"dt", c.dt},
                           {"file", c.file},
                           {"sha1", c.sha1},
                           {"ok", c.ok}});
    return {{"tool_version", tool_version},
            {"content_hash", content_hash},
            {"config", config},
            {"cells", cells_j},
            {"run_info", {{"wall_seconds", wall_seconds}, {"workers", workers}}}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.tool_version = j.at("tool_version");
    m.content_hash = j.at("content_hash");
    m.config = j.at("config");
    for (const auto& c : j.at("cells"))
        m.cells.push_back({c.at("gamma"), c.at("j"), c.at("dt"), c.at("file"),
                           c.at("sha1"), c.at("ok")});
    if (j.contains("run_info")) {
        m.wall_seconds = j["run_info"].value("wall_seconds", 0.0);
        m.workers = j["run_info"].value("workers", 1);
    }
    return m;
}

std::uint64_t cell_seed(std::uint64_t base, double gamma, int j) {
    std::uint64_t gbits;
    static_assert(sizeof gbits == sizeof gamma);
    __builtin_memcpy(&gbits, &gamma, sizeof gbits);
    return hash_combine(hash_combine(base, gbits), std::uint64_t(j));
}

std::vector<engine::CouplingRun> run_cell(
    const field::CounterexampleField* field, double gamma, int j, double dt,
    std::uint64_t paths, double horizon, const engine::StopSpec& stop,
    std::uint64_t seed, int workers) {
    (void)gamma;
    std::vector<engine::CouplingRun> runs(paths);
    const double sep = std::pow(2.0, double(-j));
    std::atomic<std::uint64_t> next{0};
    const std::uint64_t chunk = 16;
    const auto worker = [&] {
        for (;;) {
            const std::uint64_t p0 = next.fetch_add(chunk);
            if (p0 >= paths) return;
            const std::uint64_t p1 = std::min(paths, p0 + chunk);
            for (std::uint64_t p = p0; p < p1; ++p) {
                engine::CouplingConfig cc;
                cc.field = field;
                cc.y0 = {0.0, 0.0, 0.0};
                cc.y0_prime = {sep, 0.0, 0.0};
                cc.dt = dt;
                cc.horizon = horizon;
                cc.stop = stop;
                cc.seed = seed;
                cc.path_id = p;
                runs[p] = engine::run_coupling(cc);
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return runs;
}

namespace {

void write_cell_csv(const std::string& path,
                    const std::vector<engine::CouplingRun>& runs) {
    std::ofstream f(path, std::ios::binary);
    f << "path,stop_reason,t_stop,steps,dist0,dist_end,r2_end,clock_end,"
         "local_time_end,checksum\n";
    for (std::size_t p = 0; p < runs.size(); ++p) {
        const auto& r = runs[p];
        f << p << ',' << engine::to_string(r.reason) << ','
          << fmt_double(r.t_stop) << ',' << r.steps << ','
          << fmt_double(r.dist0) << ',' << fmt_double(r.dist_end) << ','
          << fmt_double(r.r2_end) << ',' << fmt_double(r.clock_end) << ','
          << fmt_double(r.local_time_end) << ',' << r.increment_checksum
          << '\n';
    }
}

void write_trace_csv(const std::string& path, const engine::CouplingRun& r) {
    std::ofstream f(path, std::ios::binary);
    f << "t,R,A,L,Lp\n";
    for (std::size_t i = 0; i < r.trace_t.size(); ++i)
        f << fmt_double(r.trace_t[i]) << ',' << fmt_double(r.trace_r2[i])
          << ',' << fmt_double(r.trace_clock[i]) << ','
          << fmt_double(r.trace_l[i]) << ',' << fmt_double(r.trace_l[i])
          << '\n';
}

}  // namespace

RunManifest run_pipeline(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    if (cfg.out_dir.empty())
        throw std::invalid_argument("output directory not set");
    fs::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.content_hash = cfg.content_hash();
    manifest.config = cfg.to_json();
    manifest.workers = workers;

    // resume: reuse cells whose files still match a previous manifest with
    // the same content hash
    RunManifest previous;
    bool have_previous = false;
    const std::string manifest_path = cfg.out_dir + "/manifest.json";
    if (fs::exists(manifest_path)) {
        try {
            std::ifstream f(manifest_path);
            nlohmann::json j;
            f >> j;
            previous = RunManifest::from_json(j);
            have_previous = previous.content_hash == manifest.content_hash;
        } catch (...) {
            have_previous = false;
        }
    }

    for (double gamma : cfg.gammas) {
        field::CounterexampleField field(
            {gamma, cfg.n1, cfg.m_max, cfg.fourier_modes});
        for (int j : cfg.js) {
            const double dt = cfg.dt > 0.0 ? cfg.dt : validator_cap(j);
            RunManifest::Cell cell;
            cell.gamma = gamma;
            cell.j = j;
            cell.dt = dt;
            cell.file = CellKey{gamma, j}.id() + ".csv";
            const std::string full = cfg.out_dir + "/" + cell.file;

            bool reused = false;
            if (have_previous) {
                for (const auto& pc : previous.cells) {
                    if (pc.file == cell.file && pc.ok && fs::exists(full) &&
                        sha1_file(full) == pc.sha1) {
                        cell.sha1 = pc.sha1;
                        cell.ok = true;
                        reused = true;
                        break;
                    }
                }
            }
            if (!reused) {
                try {
                    auto runs = run_cell(&field, gamma, j, dt, cfg.paths,
                                         cfg.horizon, cfg.stop,
                                         cell_seed(cfg.seed, gamma, j),
                                         workers);
                    write_cell_csv(full, runs);
                    // optional full series for the first trace_paths runs
                    for (int p = 0; p < cfg.trace_paths &&
                                    p < int(cfg.paths);
                         ++p) {
                        engine::CouplingConfig cc;
                        cc.field = &field;
                        cc.y0 = {0.0, 0.0, 0.0};
                        cc.y0_prime = {std::pow(2.0, double(-j)), 0.0, 0.0};
                        cc.dt = dt;
                        cc.horizon = cfg.horizon;
                        cc.stop = cfg.stop;
                        cc.seed = cell_seed(cfg.seed, gamma, j);
                        cc.path_id = std::uint64_t(p);
                        cc.trace_every = cfg.trace_every;
                        const auto run = engine::run_coupling(cc);
                        write_trace_csv(cfg.out_dir + "/trace_" +
                                            CellKey{gamma, j}.id() + "_p" +
                                            std::to_string(p) + ".csv",
                                        run);
                    }
                    cell.sha1 = sha1_file(full);
                    cell.ok = true;
                } catch (const std::exception& e) {
                    cell.ok = false;
                    std::fprintf(stderr, "cell %s failed: %s\n",
                                 CellKey{gamma, j}.id().c_str(), e.what());
                }
            }
            manifest.cells.push_back(cell);
        }
    }

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ofstream mf(manifest_path, std::ios::binary);
    mf << manifest.to_json().dump(2) << '\n';
    return manifest;
}

namespace {

struct CellData {
    double gamma;
    int j;
    double dt;
    std::vector<engine::CouplingRun> runs;  // partially filled from CSV
};

engine::StopReason reason_from(const std::string& s) {
    for (int r = 0; r <= int(engine::StopReason::box_exit); ++r)
        if (s == engine::to_string(engine::StopReason(r)))
            return engine::StopReason(r);
    return engine::StopReason::none;
}

std::vector<CellData> load_cells(const std::string& dir,
                                 nlohmann::json* config_out) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("no manifest.json in " + dir);
    nlohmann::json mj;
    mf >> mj;
    const RunManifest manifest = RunManifest::from_json(mj);
    if (config_out) *config_out = manifest.config;
    std::vector<CellData> cells;
    for (const auto& c : manifest.cells) {
        if (!c.ok) continue;
        CellData cd;
        cd.gamma = c.gamma;
        cd.j = c.j;
        cd.dt = c.dt;
        std::ifstream f(dir + "/" + c.file);
        if (!f) continue;
        std::string line;
        std::getline(f, line);  // header
        while (std::getline(f, line)) {
            engine::CouplingRun r;
            char reason[40];
            double t_stop, dist0, dist_end, r2, clock, lt;
            unsigned long long pathid, steps, checksum;
            if (std::sscanf(line.c_str(),
                            "%llu,%39[^,],%lf,%llu,%lf,%lf,%lf,%lf,%lf,%llu",
                            &pathid, reason, &t_stop, &steps, &dist0,
                            &dist_end, &r2, &clock, &lt, &checksum) == 10) {
                r.reason = reason_from(reason);
                r.t_stop = t_stop;
                r.steps = steps;
                r.dist0 = dist0;
                r.dist_end = dist_end;
                r.r2_end = r2;
                r.clock_end = clock;
                r.local_time_end = lt;
                r.increment_checksum = checksum;
                cd.runs.push_back(r);
            }
        }
        cells.push_back(std::move(cd));
    }
    return cells;
}

}  // namespace

nlohmann::json analyze_dir(const std::string& dir) {
    nlohmann::json config;
    auto cells = load_cells(dir, &config);
    const std::string rule = config.contains("stop")
                                 ? config["stop"].value("rule", "horizon")
                                 : "horizon";
    nlohmann::json out;
    out["rule"] = rule;
    out["cells"] = nlohmann::json::array();

    // divergence matrix assembled per gamma across j
    std::map<double, std::vector<std::pair<int, double>>> columns;

    for (const auto& cd : cells) {
        nlohmann::json cj;
        cj["gamma"] = cd.gamma;
        cj["j"] = cd.j;
        cj["dt"] = cd.dt;
        cj["runs"] = cd.runs.size();
        if (rule == "annulus") {
            const double a0 = config["stop"].value("a0", 0.5);
            const double a1 = config["stop"].value("a1", 2.0);
            const auto row =
                analysis::exit_table(cd.runs, cd.gamma, cd.j, a0, a1);
            cj["exit"] = {{"trials", row.trials},
                          {"hit_inner", row.hit_inner},
                          {"hit_outer", row.hit_outer},
                          {"excluded", row.excluded},
                          {"p_outer", row.p_outer},
                          {"std_error", row.std_error},
                          {"oracle", row.oracle}};
            // local-time samples for the scaling fit
            std::vector<double> ls;
            for (const auto& r : cd.runs)
                if (r.reason == engine::StopReason::annulus_inner ||
                    r.reason == engine::StopReason::annulus_outer)
                    ls.push_back(r.local_time_end);
            double mean = 0.0;
            for (double v : ls) mean += v;
            if (!ls.empty()) mean /= double(ls.size());
            cj["local_time_mean"] = mean;
            cj["local_time_n"] = ls.size();
        } else if (rule == "clock") {
            const double b = config["stop"].value("b", 1.0);
            const auto res = analysis::time_change_test(
                cd.runs, b, 0.01, 100, cell_seed(0xACE5u, cd.gamma, cd.j));
            cj["time_change"] = {{"stopped", res.stopped},
                                 {"excluded", res.excluded},
                                 {"enough", res.enough},
                                 {"ks_stat", res.ks.statistic},
                                 {"ks_critical", res.ks.critical},
                                 {"reject", res.ks.reject}};
        } else if (rule == "distance1") {
            std::uint64_t reached = 0;
            for (const auto& r : cd.runs)
                if (r.reason == engine::StopReason::distance1) ++reached;
            const double p = cd.runs.empty()
                                 ? 0.0
                                 : double(reached) / double(cd.runs.size());
            cj["reach"] = {{"reached", reached},
                          {"p", p},
                          {"std_error",
                           std::sqrt(p * (1 - p) /
                                     std::max<std::size_t>(cd.runs.size(), 1))}};
            columns[cd.gamma].push_back({cd.j, p});
        }
        out["cells"].push_back(cj);
    }

    if (!columns.empty()) {
        out["trends"] = nlohmann::json::array();
        for (auto& [gamma, col] : columns) {
            std::sort(col.begin(), col.end());
            std::vector<double> ps;
            for (auto& [j, p] : col) ps.push_back(p);
            nlohmann::json t;
            t["gamma"] = gamma;
            t["p_by_j"] = ps;
            if (ps.size() >= 3) {
                const auto mk = analysis::mann_kendall(ps);
                t["s"] = mk.s;
                t["p_decreasing"] = mk.p_decreasing;
                t["p_increasing"] = mk.p_increasing;
            }
            out["trends"].push_back(t);
        }
    }
    return out;
}

std::string render_report(const nlohmann::json& manifest,
                          const nlohmann::json& analysis,
                          nlohmann::json* machine_out) {
    std::string text;
    nlohmann::json flags = nlohmann::json::array();
    text += "run report (" + manifest.value("tool_version", "?") + ")\n";
    text += "content hash: " + manifest.value("content_hash", "?") + "\n";
    const std::string rule = analysis.value("rule", "?");
    text += "stopping rule: " + rule + "\n";
    for (const auto& c : analysis.value("cells", nlohmann::json::array())) {
        char line[256];
        if (c.contains("exit")) {
            const auto& e = c["exit"];
            const double p = e.value("p_outer", 0.0);
            const double se = e.value("std_error", 0.0);
            const double oracle = e.value("oracle", 0.0);
            const bool ok = std::abs(p - oracle) <= 3.0 * std::max(se, 1e-12);
            std::snprintf(line, sizeof line,
                          "gamma %-6g j %-2d  P(outer)=%.4f +- %.4f  bessel %.4f"
                          "  [%s]\n",
                          c.value("gamma", 0.0), c.value("j", 0), p, se,
                          oracle, ok ? "ok" : "OFF");
            text += line;
            flags.push_back({{"cell", c},
                             {"kind", "bessel_exit"},
                             {"pass", ok}});
        } else if (c.contains("time_change")) {
            const auto& t = c["time_change"];
            const bool ok = t.value("enough", false) &&
                            !t.value("reject", true);
            std::snprintf(line, sizeof line,
                          "gamma %-6g j %-2d  KS %.4f (crit %.4f) stopped %llu"
                          "  [%s]\n",
                          c.value("gamma", 0.0), c.value("j", 0),
                          t.value("ks_stat", 0.0), t.value("ks_critical", 0.0),
                          (unsigned long long)t.value("stopped", 0),
                          ok ? "ok" : "OFF");
            text += line;
            flags.push_back({{"cell", c}, {"kind", "time_change"}, {"pass", ok}});
        } else if (c.contains("reach")) {
            std::snprintf(line, sizeof line,
                          "gamma %-6g j %-2d  P(reach delta)=%.4f +- %.4f\n",
                          c.value("gamma", 0.0), c.value("j", 0),
                          c["reach"].value("p", 0.0),
                          c["reach"].value("std_error", 0.0));
            text += line;
        } else {
            std::snprintf(line, sizeof line, "gamma %-6g j %-2d  runs %llu\n",
                          c.value("gamma", 0.0), c.value("j", 0),
                          (unsigned long long)c.value("runs", 0));
            text += line;
        }
    }
    for (const auto& t : analysis.value("trends", nlohmann::json::array())) {
        char line[256];
        std::snprintf(line, sizeof line,
                      "trend gamma %-6g: p_dec %.4f p_inc %.4f\n",
                      t.value("gamma", 0.0), t.value("p_decreasing", 1.0),
                      t.value("p_increasing", 1.0));
        text += line;
        flags.push_back({{"kind", "trend"}, {"trend", t}});
    }
    if (machine_out) {
        *machine_out = {{"manifest", manifest},
                        {"analysis", analysis},
                        {"flags", flags}};
    }
    return text;
}

}  // namespace sklab::cli
