#pragma once

#include "latlin/bitstring.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace latlin {

using NodeId = std::size_t;  // 1-based

// Declared domain of one node variable. Arbitrary-state initialization draws
// uniformly from it: a random digit pattern of bit_length for bits, a value
// in [0, max_value] for counters.
struct VarDomain {
    enum class Kind { bits, counter };
    Kind kind = Kind::bits;
    std::size_t bit_length = 1;    // Kind::bits
    std::uint64_t max_value = 0;   // Kind::counter, inclusive
};

struct VarSpec {
    std::string name;
    VarDomain domain;
};

using NodeSchema = std::vector<VarSpec>;
using SchemaPtr = std::shared_ptr<const NodeSchema>;

using VarValue = std::variant<Bitstring, std::uint64_t>;

// Schema discipline guarantees the alternative; keep the accessors branch-free.
inline const Bitstring& as_bits(const VarValue& v) { return *std::get_if<Bitstring>(&v); }
inline std::uint64_t as_count(const VarValue& v) { return *std::get_if<std::uint64_t>(&v); }

struct NodeLocalState {
    std::vector<VarValue> vars;
    bool operator==(const NodeLocalState&) const = default;
};

struct GlobalState {
    std::vector<NodeLocalState> locals;  // locals[i-1] holds node i

    const NodeLocalState& at(NodeId i) const { return locals.at(i - 1); }
    NodeLocalState& at(NodeId i) { return locals.at(i - 1); }
    std::size_t node_count() const { return locals.size(); }
    bool operator==(const GlobalState&) const = default;
};

// What a node sees during one activation: its own state is always current,
// other nodes may be served from history depending on the scheduler.
class ReadView {
public:
    virtual ~ReadView() = default;
    virtual NodeId self() const = 0;
    virtual const NodeLocalState& local(NodeId j) const = 0;
};

// Fresh view over a global state; also handy for probing guards in tests.
class StateView final : public ReadView {
public:
    StateView(const GlobalState& state, NodeId self) : state_(state), self_(self) {}
    NodeId self() const override { return self_; }
    const NodeLocalState& local(NodeId j) const override { return state_.at(j); }

private:
    const GlobalState& state_;
    NodeId self_;
};

// One guarded action. Guard and action are evaluated against the same view;
// the action returns the acting node's replacement local state and must not
// touch anything else.
struct Rule {
    std::string name;
    std::function<bool(NodeId, const ReadView&)> guard;
    std::function<NodeLocalState(NodeId, const ReadView&)> action;
};

struct NodeProgram {
    std::size_t node_count = 0;
    std::vector<SchemaPtr> schemas;  // per node, shared between nodes of the same shape
    std::vector<Rule> rules;         // ordered; the same list applies to every node
    // Static read set: the other nodes whose variables node i's rules may
    // consult. Used for trace bookkeeping and scheduling shortcuts.
    std::function<std::vector<NodeId>(NodeId)> reads;
    // Target predicate P(s). When empty, quiescence (no guard holds on fresh
    // reads) is used.
    std::function<bool(const GlobalState&)> target;

    GlobalState zero_state() const;
};

enum class SchedulerKind { synchronous, random_serial, stale_read };

struct Scheduler {
    SchedulerKind kind = SchedulerKind::synchronous;
    std::uint64_t seed = 0;
    // B: how many of a node's most recent versions a reader may be served
    // from (stale_read only). 0 means always fresh.
    std::size_t staleness_bound = 0;
    // F: every node is scheduled at least once in any F consecutive steps.
    // 0 picks the default 2*node_count; smaller values are raised to it.
    std::size_t fairness_window = 0;
};

struct StaleRead {
    NodeId source = 0;
    std::uint64_t versions_behind = 0;
    bool operator==(const StaleRead&) const = default;
};

struct TraceEntry {
    std::uint64_t step = 0;  // activation ordinal, 1-based
    NodeId node = 0;
    std::string rule;
    std::vector<StaleRead> reads;  // non-self sources consulted, in access order
    NodeLocalState new_state;
};

struct Trace {
    GlobalState initial;
    std::vector<TraceEntry> entries;
};

struct RunResult {
    GlobalState final_state;
    Trace trace;  // entries populated only when recording was requested
    bool converged = false;
    // Node activations: selections whose guard held and whose action ran.
    // Selections that found no enabled rule are scheduler overhead and are
    // tallied separately.
    std::uint64_t steps = 0;
    std::uint64_t selections = 0;
    std::uint64_t rounds = 0;  // synchronous: rounds; serial kinds: fairness blocks
    std::uint64_t max_staleness = 0;
};

// Simulates the program from init under the given scheduler. Stops as soon
// as no guard holds on fresh reads, or when max_steps activations have fired
// (that is a result, not an error; converged stays false unless the final
// state happens to be quiescent). max_steps == 0 returns immediately.
RunResult run(const NodeProgram& program, GlobalState init, const Scheduler& sched,
              std::uint64_t max_steps, bool record_trace = true);

// Every variable of every node drawn uniformly from its declared domain.
GlobalState arbitrary_init(const NodeProgram& program, std::uint64_t seed);

// One synchronous round: every node whose guard holds on the pre-round state
// fires exactly once; all reads see the pre-round state.
GlobalState synchronous_round(const NodeProgram& program, const GlobalState& state);

// True iff no guard of any node holds on fresh reads.
bool quiescent(const NodeProgram& program, const GlobalState& state);

// P(state), falling back to quiescence when the program has no explicit target.
bool satisfies_target(const NodeProgram& program, const GlobalState& state);

// Empirical Definition 3 check: P holds, or at least one guard does.
bool check_forbidden_coverage(const NodeProgram& program, const GlobalState& state);

// Empirical Definition 2 check: with `frozen` (whose guard must hold, else
// std::invalid_argument) pinned, fairly run everyone else for `budget` steps;
// true iff no visited state satisfies P.
bool check_impedance(const NodeProgram& program, const GlobalState& state, NodeId frozen,
                     std::uint64_t budget, std::uint64_t seed = 0x5eed);

// Line-oriented trace stream; see README for the exact format. The first
// record encodes the initial state.
void trace_export(const Trace& trace, const NodeProgram& program, std::ostream& os);

Trace trace_parse(std::istream& is, const NodeProgram& program);

// Applies the entries to the initial state; reproduces the final state exactly.
GlobalState trace_replay(const Trace& trace);

std::string render_local_state(const NodeLocalState& state, const NodeSchema& schema);
NodeLocalState parse_local_state(const std::string& text, const NodeSchema& schema);

}  // namespace latlin
