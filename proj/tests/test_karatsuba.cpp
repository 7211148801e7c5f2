#include "latlin/karatsuba.hpp"

#include <doctest.h>

#include <random>

using namespace latlin;
using namespace karatsuba_var;

namespace {

Bitstring bs(const char* text) { return Bitstring::parse(text); }

Bitstring random_bits(std::mt19937_64& rng, std::size_t len) {
    std::string s(len, '0');
    for (auto& c : s) c = static_cast<char>('0' + (rng() & 1));
    return Bitstring::parse(s);
}

std::size_t lg2(std::size_t v) {
    std::size_t d = 0;
    while ((std::size_t{1} << d) < v) ++d;
    return d;
}

}  // namespace

TEST_CASE("sequential karatsuba reproduces the worked example") {
    CHECK(seq_karatsuba(bs("0100"), bs("0100")).value64() == 16);
}

TEST_CASE("sequential karatsuba against exhaustive and random oracles") {
    for (std::uint64_t a = 0; a < 64; ++a)
        for (std::uint64_t b = 0; b < 64; ++b)
            REQUIRE(seq_karatsuba(Bitstring::of_value(a), Bitstring::of_value(b)).value64() ==
                    a * b);

    std::mt19937_64 rng(41);
    for (int t = 0; t < 200; ++t) {
        const std::size_t la = 1 + rng() % 512, lb = 1 + rng() % 512;
        const Bitstring x = random_bits(rng, la), y = random_bits(rng, lb);
        REQUIRE(same_value(seq_karatsuba(x, y), school_mul(x, y)));
    }
    // multiplying by one is the identity on values
    for (int t = 0; t < 20; ++t) {
        const Bitstring x = random_bits(rng, 1 + rng() % 100);
        CHECK(same_value(seq_karatsuba(x, bs("1")), x));
    }
}

TEST_CASE("tree layout") {
    CHECK(KaratsubaLayout::for_length(4).node_count == 13);
    CHECK(KaratsubaLayout::for_length(1).node_count == 1);
    CHECK(KaratsubaLayout::for_length(8).node_count == 40);
    CHECK(KaratsubaLayout::for_length(3).padded_length == 4);

    const KaratsubaLayout l = KaratsubaLayout::for_length(4);
    CHECK(l.level_of(1) == 0);
    CHECK(l.level_of(2) == 1);
    CHECK(l.level_of(4) == 1);
    CHECK(l.level_of(5) == 2);
    CHECK(l.level_of(13) == 2);
    CHECK(l.is_leaf(13));
    CHECK(!l.is_leaf(4));
    for (NodeId i = 2; i <= 13; ++i) {
        const NodeId p = KaratsubaLayout::parent(i);
        CHECK((3 * p - 1 == i || 3 * p == i || 3 * p + 1 == i));
    }
    CHECK(l.operand_length(1) == 4);
    CHECK(l.operand_length(3) == 2);
    CHECK(l.operand_length(9) == 1);
}

TEST_CASE("worked 0100 x 0100 instance converges to 10000 with per-node products") {
    NodeProgram prog = build_karatsuba_program(bs("0100"), bs("0100"));
    REQUIRE(prog.node_count == 13);
    RunResult r = run(prog, prog.zero_state(), Scheduler{}, 1000);
    REQUIRE(r.converged);
    CHECK(karatsuba_root_answer(r.final_state).value64() == 16);
    CHECK(trim_leading_zeros(karatsuba_root_answer(r.final_state)).render() == "10000");

    // top-down: node 2 holds the first halves, node 4 the half-sums' low bits
    CHECK(as_bits(r.final_state.at(2).vars[kM]).render() == "01");
    CHECK(as_bits(r.final_state.at(2).vars[kN]).render() == "01");
    CHECK(as_bits(r.final_state.at(4).vars[kM]).render() == "01");
    // bottom-up: leaf products and child answers (1, 0, 1)
    CHECK(as_bits(r.final_state.at(6).vars[kAns]).value64() == 1);
    CHECK(as_bits(r.final_state.at(2).vars[kAns]).value64() == 1);
    CHECK(as_bits(r.final_state.at(3).vars[kAns]).value64() == 0);
    CHECK(as_bits(r.final_state.at(4).vars[kAns]).value64() == 1);
}

TEST_CASE("shift rule") {
    NodeProgram prog = build_karatsuba_program(bs("0100"), bs("0100"));
    GlobalState s = prog.zero_state();

    // leaf with garbage shift fires back to zero
    s.at(13).vars[kShift] = std::uint64_t{5};
    {
        StateView view(s, 13);
        REQUIRE(prog.rules[0].guard(13, view));
        CHECK(as_count(prog.rules[0].action(13, view).vars[kShift]) == 0);
    }
    // children shifts (0,0,0) with own shift already 1: not forbidden
    s.at(2).vars[kShift] = std::uint64_t{1};
    {
        StateView view(s, 2);
        CHECK(!prog.rules[0].guard(2, view));
    }
}

TEST_CASE("converged shifts double per level") {
    std::mt19937_64 rng(43);
    NodeProgram prog = build_karatsuba_program(random_bits(rng, 8), random_bits(rng, 8));
    RunResult r = run(prog, prog.zero_state(), Scheduler{}, 10000, false);
    REQUIRE(r.converged);
    const KaratsubaLayout layout = KaratsubaLayout::for_length(8);
    for (NodeId i = 1; i <= prog.node_count; ++i) {
        const std::size_t expect = layout.is_leaf(i) ? 0 : layout.operand_length(i) / 2;
        CHECK(as_count(r.final_state.at(i).vars[kShift]) == expect);
    }
}

TEST_CASE("topdown rule pulls slices and half-sums from the parent") {
    NodeProgram prog = build_karatsuba_program(bs("0100"), bs("0100"));
    GlobalState s = prog.zero_state();
    s.at(1).vars[kM] = bs("0100");
    s.at(1).vars[kN] = bs("0100");

    {
        StateView view(s, 2);
        REQUIRE(prog.rules[1].guard(2, view));
        const NodeLocalState next = prog.rules[1].action(2, view);
        CHECK(as_bits(next.vars[kM]).render() == "01");
        CHECK(as_bits(next.vars[kN]).render() == "01");
    }
    {
        StateView view(s, 4);  // right child: 01 + 00 = 01, no carry
        REQUIRE(prog.rules[1].guard(4, view));
        const NodeLocalState next = prog.rules[1].action(4, view);
        CHECK(as_bits(next.vars[kM]).render() == "01");
        CHECK(as_count(next.vars[kCarryM]) == 0);
    }

    // halves 1 and 1: the child receives the low bit 0, the carry is 1
    NodeProgram carry_prog = build_karatsuba_program(bs("11"), bs("11"));
    GlobalState cs = carry_prog.zero_state();
    {
        StateView view(cs, 1);
        REQUIRE(carry_prog.rules[1].guard(1, view));
        const NodeLocalState root = carry_prog.rules[1].action(1, view);
        CHECK(as_count(root.vars[kCarryM]) == 1);
        CHECK(as_count(root.vars[kCarryN]) == 1);
        cs.at(1) = root;
    }
    {
        // node 4 already holds the correct "0" from zero init; corrupt it so
        // the pull fires and rewrites the low bit of the half-sum
        cs.at(4).vars[kM] = bs("1");
        StateView view(cs, 4);
        REQUIRE(carry_prog.rules[1].guard(4, view));
        const NodeLocalState right = carry_prog.rules[1].action(4, view);
        CHECK(as_bits(right.vars[kM]).render() == "0");
        CHECK(as_bits(right.vars[kN]).render() == "0");
    }
}

TEST_CASE("bottomup rule combines child answers") {
    // leaf product
    NodeProgram prog = build_karatsuba_program(bs("0100"), bs("0100"));
    GlobalState s = prog.zero_state();
    s.at(6).vars[kM] = bs("1");
    s.at(6).vars[kN] = bs("1");
    {
        StateView view(s, 6);
        REQUIRE(prog.rules[2].guard(6, view));
        CHECK(as_bits(prog.rules[2].action(6, view).vars[kAns]).render() == "1");
    }
    // root of the worked example: children answers (1, 0, 1), h = 2, no carries
    s.at(1).vars[kM] = bs("0100");
    s.at(1).vars[kN] = bs("0100");
    s.at(1).vars[kShift] = std::uint64_t{2};
    s.at(2).vars[kAns] = bs("1");
    s.at(3).vars[kAns] = bs("0");
    s.at(4).vars[kAns] = bs("1");
    s.at(4).vars[kM] = bs("01");
    s.at(4).vars[kN] = bs("01");
    {
        StateView view(s, 1);
        REQUIRE(prog.rules[2].guard(1, view));
        CHECK(as_bits(prog.rules[2].action(1, view).vars[kAns]).value64() == 16);
    }
}

TEST_CASE("fast bottomup guard agrees with the materializing action") {
    std::mt19937_64 rng(47);
    for (int t = 0; t < 150; ++t) {
        const std::size_t bits = std::size_t{1} << (rng() % 5);
        NodeProgram prog = build_karatsuba_program(random_bits(rng, bits), random_bits(rng, bits));
        GlobalState s = (t % 2 == 0) ? arbitrary_init(prog, rng()) : prog.zero_state();
        Scheduler ser{SchedulerKind::random_serial, rng(), 0, 0};
        s = run(prog, std::move(s), ser, rng() % 40, false).final_state;
        for (NodeId i = 1; i <= prog.node_count; ++i) {
            StateView view(s, i);
            const bool guard = prog.rules[2].guard(i, view);
            const NodeLocalState target = prog.rules[2].action(i, view);
            const bool differs =
                !same_value(as_bits(s.at(i).vars[kAns]), as_bits(target.vars[kAns]));
            REQUIRE(guard == differs);
        }
    }
}

TEST_CASE("per-node products at quiescence on a random instance") {
    std::mt19937_64 rng(53);
    NodeProgram prog = build_karatsuba_program(random_bits(rng, 16), random_bits(rng, 16));
    RunResult r = run(prog, prog.zero_state(), Scheduler{}, 100000, false);
    REQUIRE(r.converged);
    for (NodeId i = 1; i <= prog.node_count; ++i) {
        const auto& node = r.final_state.at(i);
        CHECK(same_value(as_bits(node.vars[kAns]),
                         school_mul(as_bits(node.vars[kM]), as_bits(node.vars[kN]))));
    }
}

TEST_CASE("synchronous zero-init round bound") {
    std::mt19937_64 rng(59);
    for (std::size_t bits : {1u, 2u, 4u, 8u, 16u, 32u}) {
        for (int t = 0; t < 3; ++t) {
            NodeProgram prog =
                build_karatsuba_program(random_bits(rng, bits), random_bits(rng, bits));
            RunResult r =
                run(prog, prog.zero_state(), Scheduler{}, 50 * prog.node_count, false);
            REQUIRE(r.converged);
            CHECK(r.rounds <= 3 * lg2(bits) + 3);
        }
    }
}

TEST_CASE("monotone stabilization under synchronous zero-init runs") {
    // Once a node's operands match its parent's halves and its subtree is
    // quiescent, its answer never changes again.
    std::mt19937_64 rng(61);
    NodeProgram prog = build_karatsuba_program(random_bits(rng, 16), random_bits(rng, 16));
    const KaratsubaLayout layout = KaratsubaLayout::for_length(16);

    std::vector<GlobalState> states{prog.zero_state()};
    while (true) {
        GlobalState next = synchronous_round(prog, states.back());
        if (next == states.back()) break;
        states.push_back(std::move(next));
        REQUIRE(states.size() < 200);
    }

    auto subtree_settled = [&](const GlobalState& s, NodeId root_id) {
        std::vector<NodeId> stack{root_id};
        while (!stack.empty()) {
            const NodeId i = stack.back();
            stack.pop_back();
            StateView view(s, i);
            for (const auto& rule : prog.rules)
                if (rule.guard(i, view)) return false;
            if (!layout.is_leaf(i)) {
                stack.push_back(3 * i - 1);
                stack.push_back(3 * i);
                stack.push_back(3 * i + 1);
            }
        }
        return true;
    };

    // final operands are the correct ones the parent will keep serving
    const GlobalState& final_state = states.back();
    for (NodeId i = 1; i <= prog.node_count; ++i) {
        for (std::size_t r = 0; r + 1 < states.size(); ++r) {
            if (states[r].at(i).vars[kM] != final_state.at(i).vars[kM] ||
                states[r].at(i).vars[kN] != final_state.at(i).vars[kN])
                continue;
            if (!subtree_settled(states[r], i)) continue;
            for (std::size_t later = r + 1; later < states.size(); ++later)
                REQUIRE(states[later].at(i).vars[kAns] == states[r].at(i).vars[kAns]);
            break;
        }
    }
}

TEST_CASE("arbitrary init converges to the oracle") {
    std::mt19937_64 rng(67);
    const Bitstring n = bs("1011"), m = bs("1101");
    NodeProgram prog = build_karatsuba_program(n, m);
    const Bitstring expected = school_mul(n, m);

    RunResult zero = run(prog, prog.zero_state(), Scheduler{}, 10000, false);
    REQUIRE(zero.converged);
    CHECK(same_value(karatsuba_root_answer(zero.final_state), expected));

    for (int t = 0; t < 25; ++t) {
        Scheduler sched{t % 2 ? SchedulerKind::random_serial : SchedulerKind::stale_read, rng(), 8,
                        0};
        RunResult r = run(prog, arbitrary_init(prog, rng()), sched, 50 * prog.node_count, false);
        REQUIRE(r.converged);
        CHECK(same_value(karatsuba_root_answer(r.final_state), expected));
    }
}
