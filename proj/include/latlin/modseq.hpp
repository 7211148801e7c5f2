#pragma once

#include "latlin/bitstring.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace latlin {

// Divisibility automaton for a fixed modulus: state k means "the prefix read
// so far is congruent to k". Ground truth: delta[i][b] = (2i + b) mod m.
struct Dfa {
    std::uint64_t modulus = 1;
    std::vector<std::array<std::uint32_t, 2>> delta;  // one row per state, start state 0
};

// Residue tables for a fixed modulus: sum(i,j) = (i+j) mod m and
// mul(i,j) = (i*j) mod m, making both combine operations single lookups.
struct ModTables {
    std::uint64_t modulus = 1;
    std::vector<std::uint16_t> sum;  // m*m, row-major
    std::vector<std::uint16_t> mul;
};

// Largest modulus for which the m x m tables are built.
inline constexpr std::uint64_t kTableModulusLimit = 4096;

// Left-to-right long-division scan: shift a digit in, subtract the modulus
// whenever the running remainder reaches it. Result carries exactly |m|
// digits. Throws std::domain_error when value(m) == 0.
Bitstring division_modulo(const Bitstring& n, const Bitstring& m, OpCounter* ops = nullptr);

// Transition table built by the literal counter walk with its wrap-around
// reset, no per-entry arithmetic. Must coincide with build_dfa_closed; the
// tests check that wholesale.
Dfa build_dfa_counter_walk(std::uint64_t m);

// Transition table from the closed form (2i + b) mod m.
Dfa build_dfa_closed(std::uint64_t m);

// Consumes n MSB-first from state 0; the final state is value(n) mod m.
// Performs exactly |n| transitions (counted as bit_ops).
std::uint64_t dfa_run(const Dfa& dfa, const Bitstring& n, OpCounter* ops = nullptr);

// Builds both residue tables; delta_mul is derived row by row through
// delta_sum. Throws std::length_error above kTableModulusLimit.
ModTables build_tables(std::uint64_t m);

// Single-lookup residue operations; arguments must already be < m
// (std::out_of_range otherwise). Each lookup counts as one bit_op.
std::uint64_t table_mod_sum(const ModTables& t, std::uint64_t x, std::uint64_t y,
                            OpCounter* ops = nullptr);
std::uint64_t table_mod_mul(const ModTables& t, std::uint64_t x, std::uint64_t y,
                            OpCounter* ops = nullptr);

// "m=<value>" header plus one "<state> <delta0> <delta1>" line per state.
void dump_dfa(const Dfa& dfa, std::ostream& os);

}  // namespace latlin
