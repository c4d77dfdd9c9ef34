#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "sklab/common/rng_util.hpp"
#include "sklab/engine/graph_sim.hpp"
#include "sklab/engine/halfspace.hpp"
#include "sklab/engine/noise.hpp"
#include "sklab/engine/skorokhod.hpp"

using namespace sklab;
using namespace sklab::engine;

TEST_CASE("skorokhod map: nonnegative input needs no pushing") {
    std::vector<double> w = {0.0, 0.5, 0.2, 1.3, 0.01}, y, l;
    skorokhod_map_1d(w, y, l);
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(y[i] == w[i]);
        CHECK(l[i] == 0.0);
    }
}

TEST_CASE("skorokhod map: linear drift down is fully pushed") {
    std::vector<double> w, y, l;
    for (int i = 0; i <= 100; ++i) w.push_back(-0.03 * i);
    skorokhod_map_1d(w, y, l);
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(y[i] == 0.0);
        CHECK(l[i] == 0.03 * double(i));
    }
}

TEST_CASE("skorokhod map matches the brute-force minimal-pushing oracle") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> w(512), y, l;
        w[0] = rng.range(0.0, 0.5);
        for (std::size_t i = 1; i < w.size(); ++i)
            w[i] = w[i - 1] + rng.range(-1.0, 1.0) * 0.2;
        skorokhod_map_1d(w, y, l);
        // smallest nondecreasing l with w + l >= 0, recomputed from scratch
        for (std::size_t i = 0; i < w.size(); ++i) {
            double need = 0.0;
            for (std::size_t j = 0; j <= i; ++j) need = std::max(need, -w[j]);
            REQUIRE(l[i] == need);
            REQUIRE(y[i] == w[i] + need);
            REQUIRE(y[i] >= 0.0);
        }
    }
}

TEST_CASE("noise stream: chunk-independent and reproducible") {
    NoiseStream a(123, 7, 3, 1e-4);
    std::vector<double> all(3 * 1000), part(3 * 1000);
    a.fill_increments(0, 1000, all.data());
    a.fill_increments(0, 313, part.data());
    a.fill_increments(313, 1000 - 313, part.data() + 3 * 313);
    CHECK(std::memcmp(all.data(), part.data(), all.size() * sizeof(double)) == 0);

    NoiseStream b(123, 7, 3, 1e-4);
    std::vector<double> again(3 * 1000);
    b.fill_increments(0, 1000, again.data());
    CHECK(std::memcmp(all.data(), again.data(), all.size() * sizeof(double)) == 0);

    NoiseStream c(123, 8, 3, 1e-4);  // different path decorrelates
    c.fill_increments(0, 1000, again.data());
    CHECK(std::memcmp(all.data(), again.data(), all.size() * sizeof(double)) != 0);
}

TEST_CASE("noise stream: increments are centered with variance dt") {
    const double dt = 0.37;
    NoiseStream s(2024, 0, 1, dt);
    const std::size_t n = 1000000;
    std::vector<double> z(n);
    s.fill_increments(0, n, z.data());
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= double(n);
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= double(n - 1);
    const double se_mean = std::sqrt(dt / double(n));
    const double se_var = dt * std::sqrt(2.0 / double(n));
    CHECK(std::abs(mean) < 4.0 * se_mean);
    CHECK(std::abs(var - dt) < 4.0 * se_var);
}

TEST_CASE("halfspace: third coordinate is the exact skorokhod map of W3") {
    field::CounterexampleField f({0.3, 4, 3, 32});
    HalfspaceConfig cfg;
    cfg.field = &f;
    cfg.y0 = {0.25, -0.4, 0.0};
    cfg.dt = 1e-4;
    cfg.horizon = 0.05;
    cfg.seed = 9;
    cfg.path_id = 3;
    cfg.record_every = 1;
    auto path = simulate_halfspace(cfg);

    NoiseStream noise(9, 3, 3, 1e-4);
    const std::size_t n = path.steps;
    std::vector<double> dw(3 * n);
    noise.fill_increments(0, n, dw.data());
    double m3 = 0.0;
    SkorokhodState sk;
    for (std::size_t i = 0; i < n; ++i) {
        m3 += dw[3 * i + 2];
        sk.push(m3);
        REQUIRE(path.y3[i + 1] == sk.reflect(m3));  // bitwise
        REQUIRE(path.y3[i + 1] >= 0.0);
        REQUIRE(path.l[i + 1] == sk.l);
    }
}

TEST_CASE("halfspace: local time increases only at boundary contact") {
    HalfspaceConfig cfg;  // phi == 0
    cfg.y0 = {0, 0, 0.0};
    cfg.dt = 1e-4;
    cfg.horizon = 0.2;
    cfg.seed = 33;
    cfg.record_every = 1;
    auto path = simulate_halfspace(cfg);
    for (std::size_t i = 1; i < path.y3.size(); ++i) {
        const double dl = path.l[i] - path.l[i - 1];
        REQUIRE(dl >= 0.0);
        if (dl > 0.0) REQUIRE(path.y3[i] == 0.0);  // push lands exactly at 0
    }
}

TEST_CASE("halfspace: E[Y3(T)] matches the reflected-Gaussian moment") {
    const double T = 0.25, dt = 5e-5;
    const int paths = 8000;
    double sum = 0.0;
    for (int p = 0; p < paths; ++p) {
        HalfspaceConfig cfg;
        cfg.y0 = {0, 0, 0};
        cfg.dt = dt;
        cfg.horizon = T;
        cfg.seed = 555;
        cfg.path_id = std::uint64_t(p);
        sum += simulate_halfspace(cfg).y_end[2];
    }
    const double est = sum / paths;
    const double expect = std::sqrt(2.0 * T / M_PI);
    const double sd = std::sqrt(T * (1.0 - 2.0 / M_PI));
    const double tol = 3.0 * sd / std::sqrt(double(paths)) +
                       0.6 * std::sqrt(dt);  // MC + reflection bias
    CHECK(std::abs(est - expect) < tol);
}

TEST_CASE("halfspace: local-time stopping halts within one increment") {
    HalfspaceConfig cfg;
    cfg.y0 = {0, 0, 0};
    cfg.dt = 1e-5;
    cfg.horizon = 10.0;
    cfg.seed = 77;
    cfg.local_time_stop = 0.03125;  // 2^-5
    auto path = simulate_halfspace(cfg);
    REQUIRE(path.reason == StopReason::local_time);
    CHECK(path.l_end >= 0.03125);
    CHECK(path.l_end < 0.03125 + 0.05);  // one push is O(sqrt(dt) * max jump)
}

TEST_CASE("coupling: identical starts stay identical with zero clock") {
    field::CounterexampleField f({0.3, 4, 4, 32});
    CouplingConfig cfg;
    cfg.field = &f;
    cfg.y0 = cfg.y0_prime = {0.1, 0.2, 0.0};
    cfg.dt = 1e-5;
    cfg.horizon = 0.002;
    cfg.seed = 5;
    auto run = run_coupling(cfg);
    CHECK(run.reason == StopReason::horizon);
    CHECK(run.r2_end == 0.0);
    CHECK(run.clock_end == 0.0);
    CHECK(run.y_end == run.y_prime_end);
}

TEST_CASE("coupling: zero field translates both solutions identically") {
    CouplingConfig cfg;  // field == nullptr: phi == 0
    cfg.y0 = {0, 0, 0};
    cfg.y0_prime = {0.03125, 0, 0};
    cfg.dt = 1e-5;
    cfg.horizon = 0.01;
    cfg.seed = 6;
    auto run = run_coupling(cfg);
    CHECK(run.dist_end == doctest::Approx(0.03125).epsilon(1e-14));
    CHECK(run.clock_end == 0.0);
}

TEST_CASE("coupling: third components equal at every step, A nondecreasing") {
    field::CounterexampleField f({0.3, 4, 5, 32});
    CouplingConfig cfg;
    cfg.field = &f;
    cfg.y0 = {0, 0, 0};
    cfg.y0_prime = {0.03125, 0, 0};
    cfg.dt = 1e-6;
    cfg.horizon = 0.001;
    cfg.seed = 8;
    cfg.trace_every = 7;
    auto run = run_coupling(cfg);
    CHECK(run.y_end[2] == run.y_prime_end[2]);
    REQUIRE(run.trace_clock.size() > 3);
    CHECK(run.trace_clock.front() == 0.0);
    for (std::size_t i = 1; i < run.trace_clock.size(); ++i) {
        CHECK(run.trace_clock[i] >= run.trace_clock[i - 1]);
        CHECK(run.trace_l[i] >= run.trace_l[i - 1]);
    }
    CHECK(run.clock_end > 0.0);  // separated starts do accumulate clock
}

TEST_CASE("coupling: bitwise deterministic rerun") {
    field::CounterexampleField f({0.3, 4, 5, 32});
    CouplingConfig cfg;
    cfg.field = &f;
    cfg.y0 = {0, 0, 0};
    cfg.y0_prime = {0.0625, 0, 0};
    cfg.dt = 1e-6;
    cfg.horizon = 0.001;
    cfg.seed = 99;
    cfg.path_id = 4;
    auto a = run_coupling(cfg);
    auto b = run_coupling(cfg);
    CHECK(a.r2_end == b.r2_end);
    CHECK(a.clock_end == b.clock_end);
    CHECK(a.local_time_end == b.local_time_end);
    CHECK(a.increment_checksum == b.increment_checksum);
    CHECK(a.t_stop == b.t_stop);
}

TEST_CASE("coupling: annulus stopping fires on the correct side") {
    field::CounterexampleField f({0.3, 1, 12, 32});
    int inner = 0, outer = 0, exhausted = 0;
    for (int p = 0; p < 16; ++p) {
        CouplingConfig cfg;
        cfg.field = &f;
        cfg.y0 = {0, 0, 0};
        cfg.y0_prime = {0.03125, 0, 0};
        cfg.dt = 2e-6;
        cfg.horizon = 1.0;
        cfg.seed = 1234;
        cfg.path_id = std::uint64_t(p);
        cfg.stop.kind = StopSpec::Kind::annulus;
        auto run = run_coupling(cfg);
        if (run.reason == StopReason::annulus_inner) {
            ++inner;
            CHECK(run.dist_end <= 0.5 * run.dist0 * 1.05);
        } else if (run.reason == StopReason::annulus_outer) {
            ++outer;
            CHECK(run.dist_end >= 2.0 * run.dist0 * 0.95);
        } else {
            CHECK(run.reason == StopReason::horizon);  // reported, not hidden
            ++exhausted;
        }
    }
    CHECK(inner + outer + exhausted == 16);
    CHECK(inner + outer >= 10);  // most runs do exit by t = 1
    CHECK(inner > 0);
    CHECK(outer > 0);
}

TEST_CASE("graph sim: flat boundary reproduces the half-space path exactly") {
    geom::GraphDomain dom(geom::BoundaryFunction::flat(2, 1.0), 3);
    for (auto scheme : {GraphScheme::project, GraphScheme::flatten_reflect}) {
        GraphSimConfig cfg;
        cfg.y0 = Vec(0.0, 0.0, 0.0);
        cfg.dt = 1e-4;
        cfg.horizon = 0.02;
        cfg.scheme = scheme;
        cfg.seed = 13;
        cfg.path_id = 2;
        cfg.record_every = 1;
        auto g = simulate_graph_domain(dom, cfg);

        HalfspaceConfig hc;
        hc.y0 = {0, 0, 0};
        hc.dt = 1e-4;
        hc.horizon = 0.02;
        hc.seed = 13;
        hc.path_id = 2;
        hc.record_every = 1;
        auto h = simulate_halfspace(hc);
        REQUIRE(g.y.size() == h.y3.size());
        for (std::size_t i = 0; i < g.y.size(); ++i) {
            REQUIRE(g.y[i][0] == h.y1[i]);
            REQUIRE(g.y[i][1] == h.y2[i]);
            // the schemes associate the reflection sums differently
            REQUIRE(std::abs(g.y[i][2] - h.y3[i]) <= 1e-12);
        }
        // local time: for the flat graph both schemes push vertically
        CHECK(g.l_end == doctest::Approx(h.l_end).epsilon(1e-12));
    }
}

TEST_CASE("graph sim: interior path without contact has zero local time") {
    geom::GraphDomain dom(
        geom::BoundaryFunction::lacunary(2, 0.8, 0.05, 8, 3), 3);
    GraphSimConfig cfg;
    cfg.y0 = Vec(0.0, 0.0, 5.0);  // far above the graph
    cfg.dt = 1e-5;
    cfg.horizon = 0.01;
    cfg.seed = 21;
    cfg.record_every = 1;
    auto g = simulate_graph_domain(dom, cfg);
    CHECK(g.l_end == 0.0);
    // pure Euler: the state is the running sum of increments
    NoiseStream noise(21, 0, 3, 1e-5);
    std::vector<double> dw(3 * g.steps);
    noise.fill_increments(0, g.steps, dw.data());
    Vec x = cfg.y0;
    for (std::size_t i = 0; i < g.steps; ++i)
        for (int c = 0; c < 3; ++c) x[c] += dw[3 * i + c];
    for (int c = 0; c < 3; ++c) REQUIRE(g.y_end[c] == x[c]);
}

TEST_CASE("graph sim: path stays in the closed domain") {
    geom::GraphDomain dom(
        geom::BoundaryFunction::lacunary(2, 0.8, 0.2, 10, 11), 3);
    for (auto scheme : {GraphScheme::project, GraphScheme::flatten_reflect}) {
        int contacts = 0;
        double total_l = 0.0;
        for (std::uint64_t seed : {32, 33, 34}) {
            GraphSimConfig cfg;
            cfg.y0 = Vec(0.0, 0.0, dom.phi.eval(Vec(0.0, 0.0)) + 0.01);
            cfg.dt = 2e-6;
            cfg.horizon = 0.004;
            cfg.scheme = scheme;
            cfg.seed = seed;
            cfg.record_every = 1;
            auto g = simulate_graph_domain(dom, cfg);
            for (std::size_t i = 0; i < g.y.size(); ++i) {
                CHECK(dom.vertical_gap(g.y[i]) >= -1e-9);
                if (g.dl[i] > 0.0) ++contacts;
            }
            total_l += g.l_end;
        }
        CHECK(contacts > 0);
        CHECK(total_l > 0.0);
    }
}

TEST_CASE("graph sim: schemes agree at O(sqrt(dt)) under refinement") {
    geom::GraphDomain dom(
        geom::BoundaryFunction::lacunary(2, 0.8, 0.15, 10, 11), 3);
    const double T = 0.002;
    double prev_sup = -1.0;
    int improvements = 0;
    for (double dt : {4e-6, 1e-6, 2.5e-7}) {
        double sup = 0.0;
        for (int p = 0; p < 4; ++p) {
            GraphSimConfig a;
            a.y0 = Vec(0.0, 0.0, dom.phi.eval(Vec(0.0, 0.0)) + 0.005);
            a.dt = dt;
            a.horizon = T;
            a.seed = 47;
            a.path_id = std::uint64_t(p);
            a.record_every = 16;
            GraphSimConfig b = a;
            a.scheme = GraphScheme::project;
            b.scheme = GraphScheme::flatten_reflect;
            auto pa = simulate_graph_domain(dom, a);
            auto pb = simulate_graph_domain(dom, b);
            REQUIRE(pa.y.size() == pb.y.size());
            for (std::size_t i = 0; i < pa.y.size(); ++i)
                sup = std::max(sup, (pa.y[i] - pb.y[i]).norm());
        }
        if (prev_sup >= 0.0) {
            CHECK(sup < prev_sup);  // shrinks with dt
            if (sup < 0.75 * prev_sup) ++improvements;
        }
        prev_sup = sup;
    }
    CHECK(improvements >= 1);  // about sqrt(2) per 4x dt refinement
}

TEST_CASE("clock consistency: dt halving moves mean A by < 3 SE") {
    field::CounterexampleField f({0.3, 1, 10, 32});
    const double T = 0.01;
    const int paths = 220;
    double mean[2], var[2];
    int lvl = 0;
    for (double dt : {2e-6, 1e-6}) {
        double s = 0.0, s2 = 0.0;
        for (int p = 0; p < paths; ++p) {
            CouplingConfig cfg;
            cfg.field = &f;
            cfg.y0 = {0, 0, 0};
            cfg.y0_prime = {0.03125, 0, 0};
            cfg.dt = dt;
            cfg.horizon = T;
            cfg.seed = 4242 + std::uint64_t(lvl);  // independent batches
            cfg.path_id = std::uint64_t(p);
            const double a = run_coupling(cfg).clock_end;
            s += a;
            s2 += a * a;
        }
        mean[lvl] = s / paths;
        var[lvl] = s2 / paths - mean[lvl] * mean[lvl];
        ++lvl;
    }
    const double se =
        std::sqrt(var[0] / paths + var[1] / paths);
    CHECK(std::abs(mean[0] - mean[1]) < 3.0 * se);
    CHECK(mean[0] > 0.0);
}
