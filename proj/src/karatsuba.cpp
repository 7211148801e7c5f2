#include "latlin/karatsuba.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>

namespace latlin {

namespace {

using namespace karatsuba_var;

struct HalfSum {
    int carry;      // most significant digit of the half-sum
    Bitstring low;  // remaining half-width digits, written to the right child
};

HalfSum half_sum(const Bitstring& v, OpCounter* ops = nullptr) {
    const std::size_t len = v.length();
    const std::size_t h = len / 2;
    Bitstring s = add(slice(v, 1, h, ops), slice(v, h + 1, len, ops), ops);
    return {s.bit(1), slice(s, 2, h + 1, ops)};
}

Bitstring one_bit_product(const Bitstring& x, const Bitstring& y) {
    return Bitstring::of_value(static_cast<std::uint64_t>(x.bit(1) & y.bit(1)), 1);
}

Bitstring kara_rec(const Bitstring& x, const Bitstring& y, OpCounter* ops) {
    const std::size_t len = x.length();
    if (len == 1) {
        if (ops) ops->bit_ops += 1;
        return one_bit_product(x, y);
    }
    const std::size_t h = len / 2;
    const Bitstring a = slice(x, 1, h, ops);
    const Bitstring b = slice(x, h + 1, len, ops);
    const Bitstring c = slice(y, 1, h, ops);
    const Bitstring d = slice(y, h + 1, len, ops);

    const Bitstring ac = kara_rec(a, c, ops);
    const Bitstring bd = kara_rec(b, d, ops);
    const HalfSum hm = half_sum(x, ops);
    const HalfSum hn = half_sum(y, ops);
    // (a+b)(c+d) with the carries peeled off so the third recursive call
    // stays at width h.
    Bitstring cross = kara_rec(hm.low, hn.low, ops);
    if (hm.carry) cross = add(cross, shl(hn.low, h, ops), ops);
    if (hn.carry) cross = add(cross, shl(hm.low, h, ops), ops);
    if (hm.carry && hn.carry) cross = add(cross, shl(Bitstring::of_value(1), 2 * h, ops), ops);

    const Bitstring mid = sub(cross, add(ac, bd, ops), ops);
    return add(add(shl(ac, 2 * h, ops), shl(mid, h, ops), ops), bd, ops);
}

struct TreeContext {
    KaratsubaLayout layout;
    Bitstring input_m;  // padded to L
    Bitstring input_n;
    std::vector<std::uint8_t> leaf;  // [i]: node i is a leaf

    bool is_leaf(NodeId i) const { return leaf[i] != 0; }
};

// Carry of adding v's halves, without materializing the sum.
int halfsum_carry(const Bitstring& v) {
    const std::size_t h = v.length() / 2;
    int carry = 0;
    for (std::size_t k = h; k >= 1; --k) carry = (v.bit(k) + v.bit(h + k) + carry) >> 1;
    return carry;
}

bool equals_slice_of(const Bitstring& child, const Bitstring& parent, std::size_t from) {
    for (std::size_t k = 1; k <= child.length(); ++k)
        if (child.bit(k) != parent.bit(from + k - 1)) return false;
    return true;
}

// child == low half of (parent's first half + parent's second half)? The
// ripple runs right to left, so a mismatch can bail out early.
bool equals_low_halfsum(const Bitstring& child, const Bitstring& parent) {
    const std::size_t h = parent.length() / 2;
    if (child.length() != h) return false;
    int carry = 0;
    for (std::size_t k = h; k >= 1; --k) {
        const int s = parent.bit(k) + parent.bit(h + k) + carry;
        if ((s & 1) != child.bit(k)) return false;
        carry = s >> 1;
    }
    return true;
}

std::optional<std::uint64_t> propose_shift(const TreeContext& ctx, NodeId i,
                                           const ReadView& view) {
    const std::uint64_t current = as_count(view.local(i).vars[kShift]);
    if (ctx.is_leaf(i)) {
        if (current != 0) return 0;
        return std::nullopt;
    }
    const std::uint64_t sl = as_count(view.local(3 * i - 1).vars[kShift]);
    const std::uint64_t sm = as_count(view.local(3 * i).vars[kShift]);
    const std::uint64_t sr = as_count(view.local(3 * i + 1).vars[kShift]);
    if (sl != sm || sm != sr) return std::nullopt;
    const std::uint64_t target = sl == 0 ? 1 : 2 * sl;
    if (current != target) return target;
    return std::nullopt;
}

struct DataTarget {
    Bitstring m;
    Bitstring n;
    int carry_m = 0;
    int carry_n = 0;
};

DataTarget topdown_target(const TreeContext& ctx, NodeId i, const ReadView& view) {
    DataTarget t;
    if (i == 1) {
        t.m = ctx.input_m;
        t.n = ctx.input_n;
    } else {
        const auto& parent_state = view.local(KaratsubaLayout::parent(i));
        const Bitstring& pm = as_bits(parent_state.vars[kM]);
        const Bitstring& pn = as_bits(parent_state.vars[kN]);
        const std::size_t plen = pm.length();
        const std::size_t h = plen / 2;
        switch (i % 3) {
            case 2:  // left child: first halves
                t.m = slice(pm, 1, h);
                t.n = slice(pn, 1, h);
                break;
            case 0:  // middle child: second halves
                t.m = slice(pm, h + 1, plen);
                t.n = slice(pn, h + 1, plen);
                break;
            default:  // right child: low halves of the half-sums
                t.m = half_sum(pm).low;
                t.n = half_sum(pn).low;
                break;
        }
    }
    if (!ctx.is_leaf(i)) {
        t.carry_m = half_sum(t.m).carry;
        t.carry_n = half_sum(t.n).carry;
    }
    return t;
}

// Allocation-free form of "local data differs from topdown_target". When the
// m/n digits already match, the target's carries coincide with the carries of
// the local values, so those can be checked in place too.
bool topdown_mismatch(const TreeContext& ctx, NodeId i, const ReadView& view) {
    const auto& me = view.local(i);
    const Bitstring& mm = as_bits(me.vars[kM]);
    const Bitstring& mn = as_bits(me.vars[kN]);
    bool matches;
    if (i == 1) {
        matches = mm == ctx.input_m && mn == ctx.input_n;
    } else {
        const auto& parent_state = view.local(KaratsubaLayout::parent(i));
        const Bitstring& pm = as_bits(parent_state.vars[kM]);
        const Bitstring& pn = as_bits(parent_state.vars[kN]);
        const std::size_t h = pm.length() / 2;
        switch (i % 3) {
            case 2:
                matches = equals_slice_of(mm, pm, 1) && equals_slice_of(mn, pn, 1);
                break;
            case 0:
                matches = equals_slice_of(mm, pm, h + 1) && equals_slice_of(mn, pn, h + 1);
                break;
            default:
                matches = equals_low_halfsum(mm, pm) && equals_low_halfsum(mn, pn);
                break;
        }
    }
    if (!matches) return true;
    if (!ctx.is_leaf(i)) {
        if (as_count(me.vars[kCarryM]) != static_cast<std::uint64_t>(halfsum_carry(mm)))
            return true;
        if (as_count(me.vars[kCarryN]) != static_cast<std::uint64_t>(halfsum_carry(mn)))
            return true;
    }
    return false;
}

// Leaf answers are single-digit products; compare by value without building
// the product bitstring.
bool leaf_ans_matches(const NodeLocalState& me) {
    const Bitstring& ans = as_bits(me.vars[kAns]);
    const int expect = as_bits(me.vars[kM]).bit(1) & as_bits(me.vars[kN]).bit(1);
    for (std::size_t k = 1; k + 1 <= ans.length(); ++k)
        if (ans.bit(k)) return false;
    return ans.bit(ans.length()) == expect;
}

// Scratch-based evaluation of the combine equation, equivalent to comparing
// against bottomup_target but without per-call allocation. Digit workspaces
// are least-significant-first; thread_local keeps the parallel executors
// safe. The unit tests pin this against the materializing form.
int digit_from_right(const Bitstring& v, std::size_t r) {
    return r < v.length() ? v.bit(v.length() - r) : 0;
}

void accumulate(std::vector<std::uint32_t>& acc, const Bitstring& v, std::size_t offset) {
    for (std::size_t r = 0; r < v.length(); ++r) acc[offset + r] += static_cast<std::uint32_t>(digit_from_right(v, r));
}

void normalize_carries(std::vector<std::uint32_t>& acc) {
    std::uint32_t carry = 0;
    for (auto& d : acc) {
        d += carry;
        carry = d >> 1;
        d &= 1;
    }
}

bool internal_ans_matches(NodeId i, const ReadView& view) {
    const auto& me = view.local(i);
    const std::size_t h = static_cast<std::size_t>(as_count(me.vars[kShift]));
    const Bitstring& ans = as_bits(me.vars[kAns]);
    const Bitstring& ans_left = as_bits(view.local(3 * i - 1).vars[kAns]);
    const Bitstring& ans_mid = as_bits(view.local(3 * i).vars[kAns]);
    const auto& right = view.local(3 * i + 1);
    const Bitstring& ans_right = as_bits(right.vars[kAns]);
    const Bitstring& right_m = as_bits(right.vars[kM]);
    const Bitstring& right_n = as_bits(right.vars[kN]);
    const bool carry_m = as_count(me.vars[kCarryM]) != 0;
    const bool carry_n = as_count(me.vars[kCarryN]) != 0;

    // Oversized so every shifted term, including mid re-shifted by h, fits.
    const std::size_t cap =
        3 * h +
        std::max({ans_right.length(), right_m.length(), right_n.length(), ans_left.length(),
                  ans_mid.length(), ans.length()}) +
        6;
    thread_local std::vector<std::uint32_t> cross, outer, target;
    cross.assign(cap, 0);
    outer.assign(cap, 0);
    target.assign(cap, 0);

    accumulate(cross, ans_right, 0);
    if (carry_m) accumulate(cross, right_n, h);
    if (carry_n) accumulate(cross, right_m, h);
    if (carry_m && carry_n) cross[2 * h] += 1;
    normalize_carries(cross);

    accumulate(outer, ans_left, 0);
    accumulate(outer, ans_mid, 0);
    normalize_carries(outer);

    // mid = max(cross - outer, 0), written into cross
    bool negative = false;
    for (std::size_t r = cap; r-- > 0;) {
        if (cross[r] != outer[r]) {
            negative = cross[r] < outer[r];
            break;
        }
    }
    if (negative) {
        std::fill(cross.begin(), cross.end(), 0u);
    } else {
        std::uint32_t borrow = 0;
        for (std::size_t r = 0; r < cap; ++r) {
            const std::int32_t d = static_cast<std::int32_t>(cross[r]) -
                                   static_cast<std::int32_t>(outer[r]) -
                                   static_cast<std::int32_t>(borrow);
            borrow = d < 0;
            cross[r] = static_cast<std::uint32_t>(d & 1);
        }
    }

    accumulate(target, ans_left, 2 * h);
    accumulate(target, ans_mid, 0);
    for (std::size_t r = 0; r + h < cap; ++r) target[r + h] += cross[r];

    normalize_carries(target);

    for (std::size_t r = 0; r < cap; ++r)
        if (static_cast<std::uint32_t>(digit_from_right(ans, r)) != target[r]) return false;
    for (std::size_t r = cap; r < ans.length(); ++r)
        if (digit_from_right(ans, r)) return false;
    return true;
}

Bitstring bottomup_target(const TreeContext& ctx, NodeId i, const ReadView& view) {
    const auto& me = view.local(i);
    if (ctx.is_leaf(i)) return one_bit_product(as_bits(me.vars[kM]), as_bits(me.vars[kN]));
    const std::uint64_t h = as_count(me.vars[kShift]);
    const Bitstring& ans_left = as_bits(view.local(3 * i - 1).vars[kAns]);
    const Bitstring& ans_mid = as_bits(view.local(3 * i).vars[kAns]);
    const auto& right = view.local(3 * i + 1);
    const Bitstring& ans_right = as_bits(right.vars[kAns]);
    const Bitstring& right_m = as_bits(right.vars[kM]);
    const Bitstring& right_n = as_bits(right.vars[kN]);
    const bool carry_m = as_count(me.vars[kCarryM]) != 0;
    const bool carry_n = as_count(me.vars[kCarryN]) != 0;

    // (a+b)(c+d) reassembled from the right child's low-half product plus the
    // carry terms: (cm*2^h + s)(cn*2^h + t) = st + cm*t*2^h + cn*s*2^h + cm*cn*2^2h.
    Bitstring cross = ans_right;
    if (carry_m) cross = add(cross, shl(right_n, h));
    if (carry_n) cross = add(cross, shl(right_m, h));
    if (carry_m && carry_n) cross = add(cross, shl(Bitstring::of_value(1), 2 * h));

    const Bitstring outer = add(ans_left, ans_mid);
    // During stabilization garbage child answers can make the middle term
    // negative; clamp to zero, the firing that matters comes later.
    const Bitstring mid =
        compare(cross, outer) == std::strong_ordering::less ? Bitstring() : sub(cross, outer);
    return add(add(shl(ans_left, 2 * h), shl(mid, h)), ans_mid);
}

}  // namespace

std::size_t next_power_of_two(std::size_t v) {
    std::size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

KaratsubaLayout KaratsubaLayout::for_length(std::size_t operand_length) {
    KaratsubaLayout layout;
    layout.padded_length = next_power_of_two(std::max<std::size_t>(operand_length, 1));
    layout.depth = 0;
    for (std::size_t len = layout.padded_length; len > 1; len >>= 1) ++layout.depth;
    std::size_t levels = 1;
    for (std::size_t d = 0; d <= layout.depth; ++d) levels *= 3;
    layout.node_count = (levels - 1) / 2;  // (3^(depth+1) - 1) / 2
    return layout;
}

std::size_t KaratsubaLayout::level_of(NodeId i) const {
    if (i < 1 || i > node_count) throw std::out_of_range("node id");
    std::size_t first = 1, width = 1, d = 0;
    while (i >= first + width) {
        first += width;
        width *= 3;
        ++d;
    }
    return d;
}

Bitstring seq_karatsuba(const Bitstring& x, const Bitstring& y, OpCounter* ops) {
    const std::size_t len = next_power_of_two(std::max(x.length(), y.length()));
    return kara_rec(pad_left(x, len), pad_left(y, len), ops);
}

NodeProgram build_karatsuba_program(const Bitstring& n, const Bitstring& m) {
    auto ctx = std::make_shared<TreeContext>();
    ctx->layout = KaratsubaLayout::for_length(std::max(n.length(), m.length()));
    ctx->input_m = pad_left(m, ctx->layout.padded_length);
    ctx->input_n = pad_left(n, ctx->layout.padded_length);
    ctx->leaf.resize(ctx->layout.node_count + 1, 0);
    for (NodeId i = 1; i <= ctx->layout.node_count; ++i)
        ctx->leaf[i] = ctx->layout.is_leaf(i) ? 1 : 0;

    NodeProgram prog;
    prog.node_count = ctx->layout.node_count;

    // One schema per level; nodes of a level share it.
    std::vector<SchemaPtr> by_level(ctx->layout.depth + 1);
    for (std::size_t d = 0; d <= ctx->layout.depth; ++d) {
        const std::size_t len = ctx->layout.padded_length >> d;
        NodeSchema schema{
            {"m", {VarDomain::Kind::bits, len, 0}},
            {"n", {VarDomain::Kind::bits, len, 0}},
            {"shift", {VarDomain::Kind::counter, 0, len}},
            {"ans", {VarDomain::Kind::bits, len == 1 ? 1 : 2 * len, 0}},
        };
        if (len > 1) {
            schema.push_back({"rcm", {VarDomain::Kind::counter, 0, 1}});
            schema.push_back({"rcn", {VarDomain::Kind::counter, 0, 1}});
        }
        by_level[d] = std::make_shared<const NodeSchema>(std::move(schema));
    }
    prog.schemas.reserve(prog.node_count);
    for (NodeId i = 1; i <= prog.node_count; ++i)
        prog.schemas.push_back(by_level[ctx->layout.level_of(i)]);

    prog.rules.push_back(Rule{
        "shift",
        [ctx](NodeId i, const ReadView& view) { return propose_shift(*ctx, i, view).has_value(); },
        [ctx](NodeId i, const ReadView& view) {
            NodeLocalState s = view.local(i);
            s.vars[kShift] = *propose_shift(*ctx, i, view);
            return s;
        }});
    prog.rules.push_back(Rule{
        "topdown",
        [ctx](NodeId i, const ReadView& view) { return topdown_mismatch(*ctx, i, view); },
        [ctx](NodeId i, const ReadView& view) {
            DataTarget t = topdown_target(*ctx, i, view);
            NodeLocalState s = view.local(i);
            s.vars[kM] = std::move(t.m);
            s.vars[kN] = std::move(t.n);
            if (!ctx->is_leaf(i)) {
                s.vars[kCarryM] = static_cast<std::uint64_t>(t.carry_m);
                s.vars[kCarryN] = static_cast<std::uint64_t>(t.carry_n);
            }
            return s;
        }});
    prog.rules.push_back(Rule{
        "bottomup",
        [ctx](NodeId i, const ReadView& view) {
            if (ctx->is_leaf(i)) return !leaf_ans_matches(view.local(i));
            return !internal_ans_matches(i, view);
        },
        [ctx](NodeId i, const ReadView& view) {
            NodeLocalState s = view.local(i);
            s.vars[kAns] = bottomup_target(*ctx, i, view);
            return s;
        }});

    prog.reads = [ctx](NodeId i) {
        std::vector<NodeId> r;
        if (i != 1) r.push_back(KaratsubaLayout::parent(i));
        if (!ctx->is_leaf(i)) {
            r.push_back(3 * i - 1);
            r.push_back(3 * i);
            r.push_back(3 * i + 1);
        }
        return r;
    };
    return prog;
}

const Bitstring& karatsuba_root_answer(const GlobalState& state) {
    return as_bits(state.at(1).vars[kAns]);
}

}  // namespace latlin
