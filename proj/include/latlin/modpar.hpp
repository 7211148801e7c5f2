#pragma once

#include "latlin/bitstring.hpp"
#include "latlin/engine.hpp"
#include "latlin/modseq.hpp"

#include <cstddef>
#include <memory>
#include <optional>

namespace latlin {

enum class ModBackendKind { long_division, dfa, tables };

// Modulus sizes the precomputed backends can realistically handle. The
// division backend has no limit.
inline constexpr std::uint64_t kDfaModulusLimit = std::uint64_t{1} << 22;

// Residue-arithmetic provider behind Mod(Mul(..)) and Mod(Sum(..)). The
// division and dfa kinds multiply with the sequential Karatsuba routine and
// differ only in how they reduce; the tables kind is pure lookups.
// Immutable after construction, safe to share.
class ModBackend {
public:
    ModBackend(ModBackendKind kind, const Bitstring& modulus);

    ModBackendKind kind() const { return kind_; }
    const Bitstring& modulus() const { return modulus_; }
    std::size_t residue_width() const { return modulus_.length(); }

    // x mod m rendered at residue width.
    Bitstring reduce(const Bitstring& x, OpCounter* ops = nullptr) const;

    // (x*y) mod m and (x+y) mod m for residues x, y < m. Inputs that are not
    // yet residues (possible while stabilizing from garbage states) are
    // reduced first.
    Bitstring mod_mul(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr) const;
    Bitstring mod_sum(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr) const;

private:
    Bitstring to_residue(const Bitstring& x, OpCounter* ops) const;
    Bitstring render(std::uint64_t value) const;

    ModBackendKind kind_;
    Bitstring modulus_;
    std::optional<Dfa> dfa_;
    std::shared_ptr<const ModTables> tables_;
};

// Binary reduction tree over |m|/2-wide slices of n. Node 1 is the root,
// children of i are 2i and 2i+1, the leaves are ids >= leaf_count and carry
// the slices of the padded n.
struct ModuloLayout {
    std::size_t padded_n_length = 1;
    std::size_t modulus_length = 2;  // padded to even length
    std::size_t slice_width = 1;     // |m|/2
    std::size_t leaf_count = 1;      // power of two; node_count = 2*leaf_count - 1
    std::size_t node_count = 1;

    bool is_leaf(NodeId i) const { return i >= leaf_count; }
    static NodeId parent(NodeId i) { return i / 2; }
    // 1-based digit range of padded n covered by leaf i.
    std::size_t slice_first(NodeId leaf) const { return (leaf - leaf_count) * slice_width + 1; }
    std::size_t slice_last(NodeId leaf) const { return (leaf - leaf_count + 1) * slice_width; }

    static ModuloLayout plan(std::size_t n_length, std::size_t modulus_length);
};

namespace modulo_var {
inline constexpr std::size_t kShift = 0;
inline constexpr std::size_t kPow = 1;
inline constexpr std::size_t kAns = 2;
}  // namespace modulo_var

// The reduction tree as a guarded-action node system with shift, pow and ans
// rules. At quiescence value(ans.1) = value(n) mod value(m). Throws
// std::domain_error when value(m) == 0. A non-null ops pointer observes all
// backend work done by guards and actions (single-threaded runs only).
NodeProgram build_modulo_program(const Bitstring& n, const Bitstring& m,
                                 ModBackendKind backend = ModBackendKind::long_division,
                                 OpCounter* ops = nullptr);

const Bitstring& modulo_root_answer(const GlobalState& state);

}  // namespace latlin
