#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sklab/engine/halfspace.hpp"

namespace sklab::cli {

extern const char* kToolVersion;

// Coupled-run sweep over (gamma, j) cells. dt defaults to the validator cap
// 4^{-j-4} per cell; an explicit dt must satisfy it for every j in the
// sweep.
struct ExperimentConfig {
    std::vector<double> gammas;
    std::vector<int> js;
    int n1 = 4;
    int m_max = 6;
    int fourier_modes = 32;
    std::uint64_t paths = 100;
    double dt = 0.0;  // 0: validator cap per cell
    double horizon = 1.0;
    engine::StopSpec stop;
    std::uint64_t seed = 1;
    int trace_paths = 0;  // per cell, full (t, R, A, L, L') series
    int trace_every = 64;
    std::string out_dir;

    void validate() const;  // throws std::invalid_argument
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    // hash over everything that affects outputs (config, seeds, version)
    std::string content_hash() const;
};

struct CellKey {
    double gamma = 0.0;
    int j = 0;
    std::string id() const;
};

struct RunManifest {
    std::string tool_version;
    std::string content_hash;
    nlohmann::json config;
    struct Cell {
        double gamma;
        int j;
        double dt;
        std::string file;
        std::string sha1;
        bool ok;
    };
    std::vector<Cell> cells;
    double wall_seconds = 0.0;  // informational, not hashed
    int workers = 1;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Executes the sweep with `workers` threads over path chunks, writes one
// summary CSV per cell plus optional trace CSVs and manifest.json.
// Completed cells (file present, sha1 matching the manifest) are skipped.
RunManifest run_pipeline(const ExperimentConfig& cfg, int workers);

// Per-cell coupled runs, path-sharded; used by run_pipeline and the
// acceptance suite.
std::vector<engine::CouplingRun> run_cell(
    const field::CounterexampleField* field, double gamma, int j, double dt,
    std::uint64_t paths, double horizon, const engine::StopSpec& stop,
    std::uint64_t cell_seed, int workers);

std::uint64_t cell_seed(std::uint64_t base, double gamma, int j);

// Analysis over a finished run directory: exit tables, time-change KS,
// local-time means, divergence columns, keyed by (gamma, j).
nlohmann::json analyze_dir(const std::string& dir);

// Render manifest + analysis into a human summary and a machine report with
// pass/fail flags; missing cells become gaps.
std::string render_report(const nlohmann::json& manifest,
                          const nlohmann::json& analysis,
                          nlohmann::json* machine_out);

}  // namespace sklab::cli
