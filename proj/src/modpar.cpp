#include "latlin/modpar.hpp"

#include "latlin/karatsuba.hpp"

#include <stdexcept>
#include <utility>

namespace latlin {

namespace {
using namespace modulo_var;

// Modulus normalization shared by the backend and the tree: minimal
// representation, then one left zero if needed to make the length even so the
// slice width |m|/2 is whole.
Bitstring normalize_modulus(const Bitstring& m) {
    if (m.is_zero()) throw std::domain_error("modulus is zero");
    Bitstring trimmed = trim_leading_zeros(m);
    if (trimmed.length() % 2 != 0) trimmed = pad_left(trimmed, trimmed.length() + 1);
    return trimmed;
}

}  // namespace

ModBackend::ModBackend(ModBackendKind kind, const Bitstring& modulus)
    : kind_(kind), modulus_(normalize_modulus(modulus)) {
    if (kind_ == ModBackendKind::dfa) {
        if (modulus_.length() > 64 || modulus_.value64() > kDfaModulusLimit)
            throw std::length_error("modulus exceeds dfa guard");
        dfa_ = build_dfa_closed(modulus_.value64());
    } else if (kind_ == ModBackendKind::tables) {
        if (modulus_.length() > 64) throw std::length_error("modulus exceeds table guard");
        tables_ = std::make_shared<const ModTables>(build_tables(modulus_.value64()));
    }
}

Bitstring ModBackend::render(std::uint64_t value) const {
    return Bitstring::of_value(value, modulus_.length());
}

Bitstring ModBackend::reduce(const Bitstring& x, OpCounter* ops) const {
    switch (kind_) {
        case ModBackendKind::dfa:
            return render(dfa_run(*dfa_, x, ops));
        case ModBackendKind::tables: {
            // Horner over residue_width/2-digit chunks using only table
            // lookups: acc = acc * 2^w + chunk.
            const std::size_t w = residue_width() / 2;
            const Bitstring padded =
                pad_left(x, ((x.length() + w - 1) / w) * w);
            const std::uint64_t base =
                division_modulo(shl(Bitstring::of_value(1), w), modulus_).value64();
            std::uint64_t acc = 0;
            for (std::size_t start = 1; start <= padded.length(); start += w) {
                const std::uint64_t chunk = slice(padded, start, start + w - 1, ops).value64();
                acc = table_mod_mul(*tables_, acc, base, ops);
                acc = table_mod_sum(*tables_, acc, chunk % tables_->modulus, ops);
            }
            return render(acc);
        }
        case ModBackendKind::long_division:
        default:
            return division_modulo(x, modulus_, ops);
    }
}

Bitstring ModBackend::to_residue(const Bitstring& x, OpCounter* ops) const {
    if (compare(x, modulus_) == std::strong_ordering::less) return x;
    return reduce(x, ops);
}

Bitstring ModBackend::mod_mul(const Bitstring& x, const Bitstring& y, OpCounter* ops) const {
    const Bitstring rx = to_residue(x, ops);
    const Bitstring ry = to_residue(y, ops);
    if (kind_ == ModBackendKind::tables)
        return render(table_mod_mul(*tables_, rx.value64(), ry.value64(), ops));
    return reduce(seq_karatsuba(rx, ry, ops), ops);
}

Bitstring ModBackend::mod_sum(const Bitstring& x, const Bitstring& y, OpCounter* ops) const {
    const Bitstring rx = to_residue(x, ops);
    const Bitstring ry = to_residue(y, ops);
    switch (kind_) {
        case ModBackendKind::tables:
            return render(table_mod_sum(*tables_, rx.value64(), ry.value64(), ops));
        case ModBackendKind::dfa:
            return render(dfa_run(*dfa_, add(rx, ry, ops), ops));
        case ModBackendKind::long_division:
        default: {
            // rx + ry < 2m: at most one subtraction needed.
            Bitstring s = add(rx, ry, ops);
            if (compare(s, modulus_, ops) != std::strong_ordering::less) s = sub(s, modulus_, ops);
            if (s.length() <= residue_width()) return pad_left(s, residue_width());
            return slice(s, s.length() - residue_width() + 1, s.length(), ops);
        }
    }
}

ModuloLayout ModuloLayout::plan(std::size_t n_length, std::size_t modulus_length) {
    ModuloLayout layout;
    layout.modulus_length = modulus_length;
    layout.slice_width = modulus_length / 2;
    const std::size_t slices =
        (std::max<std::size_t>(n_length, 1) + layout.slice_width - 1) / layout.slice_width;
    layout.leaf_count = next_power_of_two(slices);
    layout.node_count = 2 * layout.leaf_count - 1;
    layout.padded_n_length = layout.leaf_count * layout.slice_width;
    return layout;
}

namespace {

struct ModuloContext {
    ModuloLayout layout;
    Bitstring padded_n;
    ModBackend backend;
    OpCounter* ops = nullptr;
    Bitstring base_pow;    // 1 mod m, the shift=0 target
    Bitstring level2_pow;  // 2^(|m|/2) mod m
    bool modulus_is_one = false;
};

std::optional<std::uint64_t> propose_shift(const ModuloContext& ctx, NodeId i,
                                           const ReadView& view) {
    const std::uint64_t current = as_count(view.local(i).vars[kShift]);
    if (ctx.layout.is_leaf(i)) {
        if (current != 0) return 0;
        return std::nullopt;
    }
    const std::uint64_t sl = as_count(view.local(2 * i).vars[kShift]);
    const std::uint64_t sr = as_count(view.local(2 * i + 1).vars[kShift]);
    if (sl != sr) return std::nullopt;
    const std::uint64_t target = sl == 0 ? ctx.layout.slice_width : 2 * sl;
    if (current != target) return target;
    return std::nullopt;
}

Bitstring pow_target(const ModuloContext& ctx, NodeId i, const ReadView& view) {
    const std::uint64_t shift = as_count(view.local(i).vars[kShift]);
    if (ctx.layout.is_leaf(i) || shift == 0) return ctx.base_pow;
    if (shift == ctx.layout.slice_width) return ctx.level2_pow;
    const Bitstring& child = as_bits(view.local(2 * i).vars[kPow]);
    return ctx.backend.mod_mul(child, child, ctx.ops);
}

// Value comparison between a leaf's ans and its slice of n, in place.
bool leaf_ans_matches(const ModuloContext& ctx, NodeId i, const NodeLocalState& me) {
    const Bitstring& ans = as_bits(me.vars[kAns]);
    if (ctx.modulus_is_one) return ans.is_zero();
    const std::size_t wa = ans.length();
    const std::size_t ws = ctx.layout.slice_width;
    const std::size_t last = ctx.layout.slice_last(i);
    for (std::size_t r = 0; r < std::max(wa, ws); ++r) {
        const int a = r < wa ? ans.bit(wa - r) : 0;
        const int e = r < ws ? ctx.padded_n.bit(last - r) : 0;
        if (a != e) return false;
    }
    return true;
}

Bitstring ans_target(const ModuloContext& ctx, NodeId i, const ReadView& view) {
    if (ctx.layout.is_leaf(i)) {
        Bitstring piece = slice(ctx.padded_n, ctx.layout.slice_first(i), ctx.layout.slice_last(i));
        // A slice is narrower than m and already a residue for every modulus
        // except 1, where it still has to collapse to 0.
        if (compare(piece, ctx.backend.modulus()) != std::strong_ordering::less)
            return ctx.backend.reduce(piece, ctx.ops);
        return piece;
    }
    const Bitstring& pow = as_bits(view.local(i).vars[kPow]);
    const Bitstring& left = as_bits(view.local(2 * i).vars[kAns]);
    const Bitstring& right = as_bits(view.local(2 * i + 1).vars[kAns]);
    return ctx.backend.mod_sum(ctx.backend.mod_mul(left, pow, ctx.ops), right, ctx.ops);
}

}  // namespace

NodeProgram build_modulo_program(const Bitstring& n, const Bitstring& m, ModBackendKind backend,
                                 OpCounter* ops) {
    auto ctx = std::make_shared<ModuloContext>(ModuloContext{
        ModuloLayout{}, Bitstring(), ModBackend(backend, m), ops, Bitstring(), Bitstring(), false});
    ctx->layout = ModuloLayout::plan(n.length(), ctx->backend.residue_width());
    ctx->padded_n = pad_left(n, ctx->layout.padded_n_length);
    ctx->base_pow = ctx->backend.reduce(Bitstring::of_value(1));
    ctx->level2_pow = ctx->backend.reduce(shl(Bitstring::of_value(1), ctx->layout.slice_width));
    ctx->modulus_is_one = same_value(ctx->backend.modulus(), Bitstring::of_value(1));

    NodeProgram prog;
    prog.node_count = ctx->layout.node_count;

    const std::size_t residue_width = ctx->backend.residue_width();
    const std::uint64_t max_shift = std::max<std::size_t>(ctx->layout.padded_n_length / 2, 1);
    const auto leaf_schema = std::make_shared<const NodeSchema>(NodeSchema{
        {"shift", {VarDomain::Kind::counter, 0, max_shift}},
        {"pow", {VarDomain::Kind::bits, residue_width, 0}},
        {"ans", {VarDomain::Kind::bits, ctx->layout.slice_width, 0}},
    });
    const auto inner_schema = std::make_shared<const NodeSchema>(NodeSchema{
        {"shift", {VarDomain::Kind::counter, 0, max_shift}},
        {"pow", {VarDomain::Kind::bits, residue_width, 0}},
        {"ans", {VarDomain::Kind::bits, residue_width, 0}},
    });
    prog.schemas.reserve(prog.node_count);
    for (NodeId i = 1; i <= prog.node_count; ++i)
        prog.schemas.push_back(ctx->layout.is_leaf(i) ? leaf_schema : inner_schema);

    prog.rules.push_back(Rule{
        "shift",
        [ctx](NodeId i, const ReadView& view) { return propose_shift(*ctx, i, view).has_value(); },
        [ctx](NodeId i, const ReadView& view) {
            NodeLocalState s = view.local(i);
            s.vars[kShift] = *propose_shift(*ctx, i, view);
            return s;
        }});
    prog.rules.push_back(Rule{
        "pow",
        [ctx](NodeId i, const ReadView& view) {
            return !same_value(as_bits(view.local(i).vars[kPow]), pow_target(*ctx, i, view));
        },
        [ctx](NodeId i, const ReadView& view) {
            NodeLocalState s = view.local(i);
            s.vars[kPow] = pow_target(*ctx, i, view);
            return s;
        }});
    prog.rules.push_back(Rule{
        "ans",
        [ctx](NodeId i, const ReadView& view) {
            if (ctx->layout.is_leaf(i)) return !leaf_ans_matches(*ctx, i, view.local(i));
            return !same_value(as_bits(view.local(i).vars[kAns]), ans_target(*ctx, i, view));
        },
        [ctx](NodeId i, const ReadView& view) {
            NodeLocalState s = view.local(i);
            s.vars[kAns] = ans_target(*ctx, i, view);
            return s;
        }});

    prog.reads = [ctx](NodeId i) {
        std::vector<NodeId> r;
        if (!ctx->layout.is_leaf(i)) {
            r.push_back(2 * i);
            r.push_back(2 * i + 1);
        }
        return r;
    };
    return prog;
}

const Bitstring& modulo_root_answer(const GlobalState& state) {
    return as_bits(state.at(1).vars[kAns]);
}

}  // namespace latlin
