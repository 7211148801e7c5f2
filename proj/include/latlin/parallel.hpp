#pragma once

#include "latlin/engine.hpp"

#include <cstdint>

namespace latlin {

struct ParallelRunResult {
    GlobalState final_state;
    bool converged = false;
    std::uint64_t rounds = 0;
    std::uint64_t firings = 0;
};

// One synchronous round evaluated across nodes with OpenMP. Guards and
// actions are pure, every node writes only its own slot, so the result is
// bit-identical to synchronous_round; the serial form stays around as the
// reference the tests compare against.
GlobalState parallel_synchronous_round(const NodeProgram& program, const GlobalState& state);

// Parallel rounds until quiescence or max_rounds.
ParallelRunResult run_parallel_synchronous(const NodeProgram& program, GlobalState init,
                                           std::uint64_t max_rounds);

// Concurrent executor: worker threads own disjoint node ranges and sweep
// them without any global coordination beyond a per-sweep barrier. Reads of
// other nodes take per-node-locked snapshots, so a view can mix versions
// across nodes (the asynchrony the node programs are built to tolerate)
// while each node record stays internally consistent and monotone, which
// keeps the freshness floor. Traces are not produced; only the converged
// answer is comparable with the simulator.
ParallelRunResult run_concurrent(const NodeProgram& program, GlobalState init,
                                 std::uint64_t max_sweeps, int threads = 0);

}  // namespace latlin
