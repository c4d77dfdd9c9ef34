#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sklab/field/counterexample_field.hpp"

namespace sklab::engine {

struct StopSpec {
    enum class Kind { horizon, annulus, clock, local_time, distance1 };
    Kind kind = Kind::horizon;
    double a0 = 0.5;    // annulus: stop when |Y-Y'| leaves [a0 d0, a1 d0]
    double a1 = 2.0;
    double b = 1.0;     // clock: stop when A >= b d0^2
    double ell = 1.0;   // local time: stop when L >= ell
    double delta = 1.0; // distance1: stop when |Y-Y'| >= delta

    static StopSpec parse(const std::string& text);
    std::string describe() const;
};

enum class StopReason : std::uint8_t {
    none = 0,
    horizon,
    annulus_inner,
    annulus_outer,
    clock,
    local_time,
    distance1,
    box_exit,
};

const char* to_string(StopReason r);

// Two solutions of dY = sigma(Y) dW + n(Y) dL driven by one Brownian path.
// sigma = diag(1 + phi, 1 + phi, 1): the first two coordinates are Euler
// steps, the third is the exact 1-D Skorokhod reflection of W_3 (shared by
// both paths, so Y_3 = Y'_3 and L = L' identically).
struct CouplingConfig {
    const field::CounterexampleField* field = nullptr;  // nullptr: phi == 0
    std::array<double, 3> y0{0.0, 0.0, 0.0};
    std::array<double, 3> y0_prime{0.0, 0.0, 0.0};
    double dt = 1e-5;
    double horizon = 1.0;
    StopSpec stop;
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    int trace_every = 0;  // 0: endpoints only
    bool use_fast_field = true;
};

struct CouplingRun {
    StopReason reason = StopReason::none;
    double t_stop = 0.0;
    std::uint64_t steps = 0;
    double dist0 = 0.0;
    double r2_end = 0.0;      // R = |Y - Y'|^2
    double dist_end = 0.0;
    double clock_end = 0.0;   // A = int (phi(Y) - phi(Y'))^2 ds
    double local_time_end = 0.0;
    std::array<double, 3> y_end{}, y_prime_end{};
    std::uint64_t increment_checksum = 0;
    std::vector<double> trace_t, trace_r2, trace_clock, trace_l;
};

CouplingRun run_coupling(const CouplingConfig& cfg);

// Single path of the same SDE.
struct HalfspaceConfig {
    const field::CounterexampleField* field = nullptr;
    std::array<double, 3> y0{0.0, 0.0, 0.0};
    double dt = 1e-5;
    double horizon = 1.0;
    double local_time_stop = -1.0;  // >= 0: stop when L >= value
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    int record_every = 0;
    bool use_fast_field = true;
};

struct HalfspacePath {
    StopReason reason = StopReason::none;
    double t_end = 0.0;
    std::uint64_t steps = 0;
    std::array<double, 3> y_end{};
    double l_end = 0.0;
    std::vector<double> t, y1, y2, y3, l;
};

HalfspacePath simulate_halfspace(const HalfspaceConfig& cfg);

}  // namespace sklab::engine
