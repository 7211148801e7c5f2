#include "latlin/parallel.hpp"

#include "latlin/karatsuba.hpp"
#include "latlin/modpar.hpp"

#include <doctest.h>

#include <random>

using namespace latlin;

namespace {

Bitstring random_bits(std::mt19937_64& rng, std::size_t len) {
    std::string s(len, '0');
    for (auto& c : s) c = static_cast<char>('0' + (rng() & 1));
    return Bitstring::parse(s);
}

}  // namespace

TEST_CASE("parallel round is bit-identical to the serial reference round") {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 20; ++t) {
        NodeProgram prog = build_karatsuba_program(random_bits(rng, 16), random_bits(rng, 16));
        GlobalState s = (t % 2 == 0) ? prog.zero_state() : arbitrary_init(prog, rng());
        for (int round = 0; round < 6; ++round) {
            const GlobalState serial = synchronous_round(prog, s);
            const GlobalState parallel = parallel_synchronous_round(prog, s);
            REQUIRE(serial == parallel);
            if (serial == s) break;
            s = serial;
        }
    }
}

TEST_CASE("parallel synchronous run matches the serial run exactly") {
    std::mt19937_64 rng(103);
    for (int t = 0; t < 8; ++t) {
        NodeProgram prog = build_karatsuba_program(random_bits(rng, 32), random_bits(rng, 32));
        GlobalState init = (t % 2 == 0) ? prog.zero_state() : arbitrary_init(prog, rng());
        RunResult serial = run(prog, init, Scheduler{}, 1u << 20, false);
        ParallelRunResult parallel = run_parallel_synchronous(prog, init, 1u << 20);
        REQUIRE(serial.converged);
        REQUIRE(parallel.converged);
        CHECK(serial.final_state == parallel.final_state);
        CHECK(serial.rounds == parallel.rounds);
    }
}

TEST_CASE("concurrent executor converges to the oracle answers") {
    std::mt19937_64 rng(107);
    for (int t = 0; t < 6; ++t) {
        const Bitstring n = random_bits(rng, 64), m = random_bits(rng, 64);
        NodeProgram prog = build_karatsuba_program(n, m);
        GlobalState init = (t % 2 == 0) ? prog.zero_state() : arbitrary_init(prog, rng());
        ParallelRunResult r = run_concurrent(prog, init, 50 * prog.node_count, 4);
        REQUIRE(r.converged);
        CHECK(quiescent(prog, r.final_state));
        CHECK(same_value(karatsuba_root_answer(r.final_state), school_mul(n, m)));
    }
    for (int t = 0; t < 6; ++t) {
        const Bitstring n = random_bits(rng, 512);
        Bitstring m = random_bits(rng, 12);
        if (m.is_zero()) m = Bitstring::of_value(7);
        NodeProgram prog = build_modulo_program(n, m);
        GlobalState init = (t % 2 == 0) ? prog.zero_state() : arbitrary_init(prog, rng());
        ParallelRunResult r = run_concurrent(prog, init, 50 * prog.node_count, 3);
        REQUIRE(r.converged);
        CHECK(same_value(modulo_root_answer(r.final_state), division_modulo(n, m)));
    }
}
