#pragma once

#include "latlin/bitstring.hpp"
#include "latlin/engine.hpp"

#include <cstddef>

namespace latlin {

// Ternary multiplication tree. Node 1 is the root; the children of node i
// are 3i-1, 3i and 3i+1 (left, middle, right). Both operands are padded to a
// common power-of-two length L; a node at depth d works on L/2^d-digit
// operands and the leaves hold single digits.
struct KaratsubaLayout {
    std::size_t padded_length = 1;  // L
    std::size_t depth = 0;          // lg L
    std::size_t node_count = 1;     // (3^(depth+1) - 1) / 2

    static KaratsubaLayout for_length(std::size_t operand_length);

    std::size_t level_of(NodeId i) const;
    std::size_t operand_length(NodeId i) const { return padded_length >> level_of(i); }
    bool is_leaf(NodeId i) const { return level_of(i) == depth; }
    static NodeId parent(NodeId i) { return (i + 1) / 3; }
};

// Variable slots within a node's local state. Leaves stop at kAns; internal
// nodes also track the carries of their operand half-sums.
namespace karatsuba_var {
inline constexpr std::size_t kM = 0;
inline constexpr std::size_t kN = 1;
inline constexpr std::size_t kShift = 2;
inline constexpr std::size_t kAns = 3;
inline constexpr std::size_t kCarryM = 4;
inline constexpr std::size_t kCarryN = 5;
}  // namespace karatsuba_var

// Recursive three-multiplication product: with x = ab, y = cd and z = 2^(|b|),
// x*y = ac*z^2 + ((a+b)(c+d) - ac - bd)*z + bd. Half-sum carries are handled
// explicitly so every recursive call stays at an exact power-of-two width.
Bitstring seq_karatsuba(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr);

// The multiplication tree as a guarded-action node system with shift,
// top-down and bottom-up rules. At quiescence value(ans.1) = value(n)*value(m).
NodeProgram build_karatsuba_program(const Bitstring& n, const Bitstring& m);

// ans.1 of a (typically converged) global state.
const Bitstring& karatsuba_root_answer(const GlobalState& state);

std::size_t next_power_of_two(std::size_t v);

}  // namespace latlin
