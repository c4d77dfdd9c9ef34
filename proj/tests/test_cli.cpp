#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sklab/cli/pipeline.hpp"
#include "sklab/common/sha1.hpp"

namespace fs = std::filesystem;
using namespace sklab;
using namespace sklab::cli;

namespace {

ExperimentConfig smoke_config(const std::string& dir) {
    ExperimentConfig cfg;
    cfg.gammas = {0.3};
    cfg.js = {4, 5};
    cfg.n1 = 1;
    cfg.m_max = 8;
    cfg.paths = 24;
    cfg.horizon = 0.02;
    cfg.stop.kind = engine::StopSpec::Kind::annulus;
    cfg.seed = 7;
    cfg.out_dir = dir;
    return cfg;
}

std::string file_hash(const std::string& p) { return sha1_file(p); }

}  // namespace

TEST_CASE("sha1 known answers") {
    CHECK(sha1_hex(std::string("")) ==
          "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(sha1_hex(std::string("abc")) ==
          "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(sha1_hex(std::string(
              "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
          "84983e441c3bd26ebaae4aa1f95129e5e54670f1");
}

TEST_CASE("config validation rejects bad sweeps") {
    ExperimentConfig cfg = smoke_config("/tmp/sklab_unused");
    cfg.gammas.clear();
    CHECK_THROWS_WITH_AS(cfg.validate(), "empty sweep", std::invalid_argument);
    cfg = smoke_config("/tmp/sklab_unused");
    cfg.gammas = {1.4};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = smoke_config("/tmp/sklab_unused");
    cfg.dt = 1e-3;  // exceeds 4^{-8} for j = 4
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = smoke_config("/tmp/sklab_unused");
    cfg.dt = std::pow(4.0, -9.0);  // fine for both j = 4 and 5
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("manifest content hash covers config, seed and version") {
    auto a = smoke_config("x");
    auto b = a;
    CHECK(a.content_hash() == b.content_hash());
    b.seed += 1;
    CHECK(a.content_hash() != b.content_hash());
    b = a;
    b.paths += 1;
    CHECK(a.content_hash() != b.content_hash());
    b = a;
    b.stop.a1 = 3.0;
    CHECK(a.content_hash() != b.content_hash());
}

TEST_CASE("pipeline: idempotent rerun and corrupted-cell recompute") {
    const std::string dir = "/tmp/sklab_test_pipeline";
    fs::remove_all(dir);
    auto cfg = smoke_config(dir);
    auto m1 = run_pipeline(cfg, 1);
    REQUIRE(m1.cells.size() == 2);
    for (const auto& c : m1.cells) REQUIRE(c.ok);
    const std::string f0 = dir + "/" + m1.cells[0].file;
    const std::string f1 = dir + "/" + m1.cells[1].file;
    const std::string h0 = file_hash(f0), h1 = file_hash(f1);
    const auto t0 = fs::last_write_time(f0);

    // rerun: byte-identical outputs, nothing recomputed
    auto m2 = run_pipeline(cfg, 1);
    CHECK(file_hash(f0) == h0);
    CHECK(file_hash(f1) == h1);
    CHECK(fs::last_write_time(f0) == t0);
    CHECK(m2.content_hash == m1.content_hash);

    // corrupt one cell: only that cell is recomputed, with identical bytes
    {
        std::ofstream f(f1, std::ios::trunc);
        f << "garbage\n";
    }
    auto m3 = run_pipeline(cfg, 1);
    CHECK(fs::last_write_time(f0) == t0);
    CHECK(file_hash(f1) == h1);
    CHECK(m3.cells[1].sha1 == m1.cells[1].sha1);
}

TEST_CASE("pipeline outputs are byte-identical across worker counts") {
    std::vector<std::string> hashes;
    for (int workers : {1, 2, 8}) {
        const std::string dir =
            "/tmp/sklab_test_workers_" + std::to_string(workers);
        fs::remove_all(dir);
        auto cfg = smoke_config(dir);
        auto m = run_pipeline(cfg, workers);
        std::string combined;
        for (const auto& c : m.cells) {
            REQUIRE(c.ok);
            combined += c.sha1;
        }
        hashes.push_back(combined);
    }
    CHECK(hashes[0] == hashes[1]);
    CHECK(hashes[0] == hashes[2]);
}

TEST_CASE("analyze and report run over a finished directory") {
    const std::string dir = "/tmp/sklab_test_analyze";
    fs::remove_all(dir);
    auto cfg = smoke_config(dir);
    run_pipeline(cfg, 1);
    const auto analysis = analyze_dir(dir);
    CHECK(analysis["rule"] == "annulus");
    CHECK(analysis["cells"].size() == 2);
    for (const auto& c : analysis["cells"]) {
        CHECK(c.contains("exit"));
        CHECK(c["exit"]["oracle"].get<double>() == doctest::Approx(0.5));
    }
    std::ifstream mf(dir + "/manifest.json");
    nlohmann::json manifest;
    mf >> manifest;
    nlohmann::json machine;
    const std::string text = render_report(manifest, analysis, &machine);
    CHECK(text.find("bessel") != std::string::npos);
    CHECK(machine.contains("flags"));
}

TEST_CASE("config json round trip") {
    auto cfg = smoke_config("somewhere");
    cfg.stop.kind = engine::StopSpec::Kind::clock;
    cfg.stop.b = 2.5;
    auto j = cfg.to_json();
    auto back = ExperimentConfig::from_json(j);
    CHECK(back.gammas == cfg.gammas);
    CHECK(back.js == cfg.js);
    CHECK(back.stop.describe() == "clock");
    CHECK(back.stop.b == 2.5);
    CHECK(back.paths == cfg.paths);
}
