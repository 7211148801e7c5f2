#include "latlin/engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace latlin {

namespace {

// Hand-rolled draws so traces are byte-identical across standard libraries
// (uniform_int_distribution is implementation-defined).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

void shuffle_ids(std::vector<NodeId>& ids, std::mt19937_64& rng) {
    for (std::size_t k = ids.size(); k > 1; --k)
        std::swap(ids[k - 1], ids[bounded(rng, k)]);
}

VarValue random_value(const VarDomain& dom, std::mt19937_64& rng) {
    if (dom.kind == VarDomain::Kind::counter) return bounded(rng, dom.max_value + 1);
    std::string digits(dom.bit_length, '0');
    for (auto& c : digits) c = static_cast<char>('0' + (rng() & 1));
    return Bitstring::parse(digits);
}

// Fresh view straight over the engine's state vector.
class VectorView final : public ReadView {
public:
    VectorView(const std::vector<NodeLocalState>& locals, NodeId self)
        : locals_(locals), self_(self) {}
    NodeId self() const override { return self_; }
    const NodeLocalState& local(NodeId j) const override { return locals_.at(j - 1); }

private:
    const std::vector<NodeLocalState>& locals_;
    NodeId self_;
};

// Fresh view that remembers which other nodes were consulted. The scratch
// buffer is owned by the caller so a hot loop reuses its capacity.
class RecordingView final : public ReadView {
public:
    RecordingView(const std::vector<NodeLocalState>& locals, NodeId self,
                  std::vector<StaleRead>& scratch)
        : locals_(locals), self_(self), reads_(scratch) {
        reads_.clear();
    }

    NodeId self() const override { return self_; }

    const NodeLocalState& local(NodeId j) const override {
        if (j != self_ && std::find_if(reads_.begin(), reads_.end(), [j](const StaleRead& r) {
                              return r.source == j;
                          }) == reads_.end())
            reads_.push_back({j, 0});
        return locals_.at(j - 1);
    }

    std::vector<StaleRead> copy_reads() const { return reads_; }

private:
    const std::vector<NodeLocalState>& locals_;
    NodeId self_;
    std::vector<StaleRead>& reads_;
};

bool any_guard_holds(const NodeProgram& prog, const GlobalState& state, NodeId i) {
    StateView view(state, i);
    for (const auto& rule : prog.rules)
        if (rule.guard(i, view)) return true;
    return false;
}

bool any_guard_holds(const NodeProgram& prog, const std::vector<NodeLocalState>& locals,
                     NodeId i) {
    VectorView view(locals, i);
    for (const auto& rule : prog.rules)
        if (rule.guard(i, view)) return true;
    return false;
}

// Version-history bookkeeping for the stale-read scheduler.
class History {
public:
    History(const std::vector<NodeLocalState>& init, std::size_t bound)
        : depth_(bound + 1), version_(init.size(), 0), ring_(init.size()), floors_(init.size()) {
        for (std::size_t k = 0; k < init.size(); ++k) {
            ring_[k].resize(depth_);
            ring_[k][0] = init[k];
        }
    }

    std::uint64_t version(NodeId j) const { return version_[j - 1]; }

    const NodeLocalState& state_at(NodeId j, std::uint64_t v) const {
        return ring_[j - 1][v % depth_];
    }

    void commit(NodeId j, NodeLocalState s) {
        auto& v = version_[j - 1];
        ++v;
        ring_[j - 1][v % depth_] = std::move(s);
    }

    std::uint64_t floor_of(NodeId reader, NodeId source) const {
        for (const auto& [j, f] : floors_[reader - 1])
            if (j == source) return f;
        return 0;
    }

    void raise_floor(NodeId reader, NodeId source, std::uint64_t v) {
        for (auto& [j, f] : floors_[reader - 1]) {
            if (j == source) {
                f = std::max(f, v);
                return;
            }
        }
        floors_[reader - 1].emplace_back(source, v);
    }

private:
    std::size_t depth_;
    std::vector<std::uint64_t> version_;
    std::vector<std::vector<NodeLocalState>> ring_;
    std::vector<std::vector<std::pair<NodeId, std::uint64_t>>> floors_;
};

// View that serves other nodes from history. A version is picked lazily per
// source on first access and reused for the rest of the activation, so the
// guard and its action observe one consistent snapshot.
class StaleView final : public ReadView {
public:
    struct Pick {
        NodeId source;
        std::uint64_t version;
        std::uint64_t behind;
    };

    StaleView(const std::vector<NodeLocalState>& cur, History& hist, std::size_t bound,
              std::mt19937_64& rng, NodeId self, std::vector<Pick>& scratch)
        : cur_(cur), hist_(hist), bound_(bound), rng_(rng), self_(self), picks_(scratch) {
        picks_.clear();
    }

    NodeId self() const override { return self_; }

    const NodeLocalState& local(NodeId j) const override {
        if (j == self_) return cur_.at(j - 1);
        for (const auto& p : picks_)
            if (p.source == j) return hist_.state_at(j, p.version);
        const std::uint64_t newest = hist_.version(j);
        const std::uint64_t lowest = std::max(newest > bound_ ? newest - bound_ : 0,
                                              hist_.floor_of(self_, j));
        const std::uint64_t v = lowest + bounded(rng_, newest - lowest + 1);
        if (v < lowest || v > newest || newest - v > bound_)
            throw std::logic_error("stale read outside freshness window");
        picks_.push_back({j, v, newest - v});
        return hist_.state_at(j, v);
    }

    std::vector<StaleRead> copy_reads() const {
        std::vector<StaleRead> out;
        out.reserve(picks_.size());
        for (const auto& p : picks_) out.push_back({p.source, p.behind});
        return out;
    }

    void settle_floors() {
        for (const auto& p : picks_) hist_.raise_floor(self_, p.source, p.version);
    }

    std::uint64_t max_behind() const {
        std::uint64_t m = 0;
        for (const auto& p : picks_) m = std::max(m, p.behind);
        return m;
    }

private:
    const std::vector<NodeLocalState>& cur_;
    History& hist_;
    std::size_t bound_;
    std::mt19937_64& rng_;
    NodeId self_;
    std::vector<Pick>& picks_;
};

// A fairness block is F/2 scheduled slots containing every node at least
// once: a shuffled pass over all nodes plus seeded extra activations. Any F
// consecutive steps then contain a whole block, which gives the window
// guarantee by construction.
std::vector<NodeId> make_block(std::size_t node_count, std::size_t block_len,
                               std::mt19937_64& rng) {
    std::vector<NodeId> block;
    block.reserve(block_len);
    for (NodeId i = 1; i <= node_count; ++i) block.push_back(i);
    for (std::size_t k = node_count; k < block_len; ++k)
        block.push_back(1 + bounded(rng, node_count));
    shuffle_ids(block, rng);
    return block;
}

struct Firing {
    NodeId node;
    std::size_t rule_index;
    NodeLocalState new_state;
    std::vector<StaleRead> reads;
};

RunResult run_serial(const NodeProgram& prog, GlobalState init, const Scheduler& sched,
                     std::uint64_t max_steps, bool record_trace) {
    const bool stale = sched.kind == SchedulerKind::stale_read;
    const std::size_t n = prog.node_count;
    const std::size_t window = std::max<std::size_t>(sched.fairness_window, 2 * n);
    const std::size_t block_len = window / 2;

    RunResult result;
    result.trace.initial = init;
    std::vector<NodeLocalState> cur = std::move(init.locals);
    std::mt19937_64 rng(sched.seed);
    std::optional<History> hist;
    if (stale) hist.emplace(cur, sched.staleness_bound);

    auto fresh_quiescent = [&] {
        for (NodeId i = 1; i <= n; ++i)
            if (any_guard_holds(prog, cur, i)) return false;
        return true;
    };

    if (max_steps == 0) {
        result.final_state.locals = std::move(cur);
        return result;
    }
    if (fresh_quiescent()) {
        result.converged = true;
        result.final_state.locals = std::move(cur);
        return result;
    }

    std::vector<NodeId> block = make_block(n, block_len, rng);
    std::size_t cursor = 0;
    std::uint64_t block_firings = 0;
    std::vector<StaleView::Pick> pick_scratch;
    std::vector<StaleRead> read_scratch;

    // Fairness plus the freshness floor guarantee progress while any guard
    // holds, so this valve only catches a misbehaving program. Saturates
    // instead of overflowing for huge budgets.
    const std::uint64_t per_step =
        static_cast<std::uint64_t>(window) * (sched.staleness_bound + 2);
    const std::uint64_t selection_cap =
        max_steps > std::numeric_limits<std::uint64_t>::max() / per_step - 2
            ? std::numeric_limits<std::uint64_t>::max()
            : (max_steps + 2) * per_step;

    while (result.steps < max_steps && result.selections < selection_cap) {
        if (cursor == block.size()) {
            ++result.rounds;
            // Convergence detection on fresh state every F steps (every other
            // block), plus whenever a whole block went by without a firing.
            if ((result.rounds % 2 == 0 || block_firings == 0) && fresh_quiescent()) {
                result.converged = true;
                break;
            }
            block = make_block(n, block_len, rng);
            cursor = 0;
            block_firings = 0;
        }
        const NodeId i = block[cursor++];
        ++result.selections;

        if (stale) {
            StaleView view(cur, *hist, sched.staleness_bound, rng, i, pick_scratch);
            for (std::size_t r = 0; r < prog.rules.size(); ++r) {
                if (!prog.rules[r].guard(i, view)) continue;
                NodeLocalState next = prog.rules[r].action(i, view);
                ++result.steps;
                ++block_firings;
                if (record_trace)
                    result.trace.entries.push_back(
                        {result.steps, i, prog.rules[r].name, view.copy_reads(), next});
                cur[i - 1] = next;
                hist->commit(i, std::move(next));
                break;
            }
            result.max_staleness = std::max(result.max_staleness, view.max_behind());
            view.settle_floors();
        } else {
            RecordingView view(cur, i, read_scratch);
            for (std::size_t r = 0; r < prog.rules.size(); ++r) {
                if (!prog.rules[r].guard(i, view)) continue;
                NodeLocalState next = prog.rules[r].action(i, view);
                ++result.steps;
                ++block_firings;
                if (record_trace)
                    result.trace.entries.push_back(
                        {result.steps, i, prog.rules[r].name, view.copy_reads(), next});
                cur[i - 1] = std::move(next);
                break;
            }
        }
    }

    if (!result.converged) result.converged = fresh_quiescent();
    result.final_state.locals = std::move(cur);
    return result;
}

RunResult run_synchronous(const NodeProgram& prog, GlobalState init, std::uint64_t max_steps,
                          bool record_trace) {
    const std::size_t n = prog.node_count;

    RunResult result;
    result.trace.initial = init;
    std::vector<NodeLocalState> cur = std::move(init.locals);

    if (max_steps == 0) {
        result.final_state.locals = std::move(cur);
        return result;
    }

    // Static reverse dependencies; a node can only become enabled when its
    // own state or one of its declared sources changed.
    std::vector<std::vector<NodeId>> readers(n + 1);
    if (prog.reads)
        for (NodeId i = 1; i <= n; ++i)
            for (NodeId j : prog.reads(i)) readers.at(j).push_back(i);

    auto fresh_quiescent_scan = [&]() -> NodeId {
        for (NodeId i = 1; i <= n; ++i)
            if (any_guard_holds(prog, cur, i)) return i;
        return 0;
    };

    std::vector<NodeId> candidates(n);
    for (NodeId i = 1; i <= n; ++i) candidates[i - 1] = i;
    std::vector<StaleRead> read_scratch;

    while (result.steps < max_steps) {
        // Evaluate every candidate against the pre-round state, then commit
        // the whole batch, so all reads see the same round boundary.
        std::vector<Firing> fired;
        {
            GlobalState pre{std::move(cur)};
            for (NodeId i : candidates) {
                RecordingView view(pre.locals, i, read_scratch);
                for (std::size_t r = 0; r < prog.rules.size(); ++r) {
                    if (!prog.rules[r].guard(i, view)) continue;
                    fired.push_back({i, r, prog.rules[r].action(i, view), view.copy_reads()});
                    break;
                }
            }
            cur = std::move(pre.locals);
        }

        if (fired.empty()) {
            const NodeId enabled = fresh_quiescent_scan();
            if (enabled == 0) {
                result.converged = true;
                break;
            }
            // reads() under-approximated a dependency; fall back to all nodes.
            candidates.resize(n);
            for (NodeId i = 1; i <= n; ++i) candidates[i - 1] = i;
            continue;
        }

        ++result.rounds;
        std::vector<NodeId> next_candidates;
        for (auto& f : fired) {
            ++result.steps;
            ++result.selections;
            if (record_trace)
                result.trace.entries.push_back(
                    {result.steps, f.node, prog.rules[f.rule_index].name, std::move(f.reads),
                     f.new_state});
            cur[f.node - 1] = std::move(f.new_state);
            next_candidates.push_back(f.node);
            for (NodeId r : readers[f.node]) next_candidates.push_back(r);
        }
        std::sort(next_candidates.begin(), next_candidates.end());
        next_candidates.erase(std::unique(next_candidates.begin(), next_candidates.end()),
                              next_candidates.end());
        candidates = std::move(next_candidates);
        if (!prog.reads) {
            candidates.resize(n);
            for (NodeId i = 1; i <= n; ++i) candidates[i - 1] = i;
        }
    }

    if (!result.converged && fresh_quiescent_scan() == 0) result.converged = true;
    result.final_state.locals = std::move(cur);
    return result;
}

}  // namespace

GlobalState NodeProgram::zero_state() const {
    GlobalState s;
    s.locals.resize(node_count);
    for (std::size_t k = 0; k < node_count; ++k) {
        for (const auto& var : *schemas.at(k)) {
            if (var.domain.kind == VarDomain::Kind::bits)
                s.locals[k].vars.emplace_back(Bitstring::zeros(var.domain.bit_length));
            else
                s.locals[k].vars.emplace_back(std::uint64_t{0});
        }
    }
    return s;
}

RunResult run(const NodeProgram& program, GlobalState init, const Scheduler& sched,
              std::uint64_t max_steps, bool record_trace) {
    if (init.node_count() != program.node_count)
        throw std::invalid_argument("initial state has wrong node count");
    if (sched.kind == SchedulerKind::synchronous)
        return run_synchronous(program, std::move(init), max_steps, record_trace);
    return run_serial(program, std::move(init), sched, max_steps, record_trace);
}

GlobalState arbitrary_init(const NodeProgram& program, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    GlobalState s;
    s.locals.resize(program.node_count);
    for (std::size_t k = 0; k < program.node_count; ++k)
        for (const auto& var : *program.schemas.at(k))
            s.locals[k].vars.push_back(random_value(var.domain, rng));
    return s;
}

GlobalState synchronous_round(const NodeProgram& program, const GlobalState& state) {
    GlobalState next = state;
    for (NodeId i = 1; i <= program.node_count; ++i) {
        StateView view(state, i);
        for (const auto& rule : program.rules) {
            if (!rule.guard(i, view)) continue;
            next.at(i) = rule.action(i, view);
            break;
        }
    }
    return next;
}

bool quiescent(const NodeProgram& program, const GlobalState& state) {
    for (NodeId i = 1; i <= program.node_count; ++i)
        if (any_guard_holds(program, state, i)) return false;
    return true;
}

bool satisfies_target(const NodeProgram& program, const GlobalState& state) {
    if (program.target) return program.target(state);
    return quiescent(program, state);
}

bool check_forbidden_coverage(const NodeProgram& program, const GlobalState& state) {
    if (satisfies_target(program, state)) return true;
    return !quiescent(program, state);
}

bool check_impedance(const NodeProgram& program, const GlobalState& state, NodeId frozen,
                     std::uint64_t budget, std::uint64_t seed) {
    if (frozen < 1 || frozen > program.node_count)
        throw std::invalid_argument("frozen node out of range");
    if (!any_guard_holds(program, state, frozen))
        throw std::invalid_argument("frozen node is not forbidden in this state");
    if (satisfies_target(program, state)) return false;

    GlobalState cur = state;
    std::mt19937_64 rng(seed);
    std::vector<NodeId> others;
    for (NodeId i = 1; i <= program.node_count; ++i)
        if (i != frozen) others.push_back(i);
    if (others.empty()) return true;

    std::size_t cursor = others.size();
    for (std::uint64_t step = 0; step < budget; ++step) {
        if (cursor == others.size()) {
            shuffle_ids(others, rng);
            cursor = 0;
        }
        const NodeId i = others[cursor++];
        StateView view(cur, i);
        for (const auto& rule : program.rules) {
            if (!rule.guard(i, view)) continue;
            NodeLocalState next = rule.action(i, view);
            cur.at(i) = std::move(next);
            if (satisfies_target(program, cur)) return false;
            break;
        }
    }
    return true;
}

std::string render_local_state(const NodeLocalState& state, const NodeSchema& schema) {
    if (state.vars.size() != schema.size())
        throw std::invalid_argument("state does not match schema");
    std::string out;
    for (std::size_t k = 0; k < schema.size(); ++k) {
        if (k > 0) out.push_back(',');
        out += schema[k].name;
        out.push_back('=');
        if (schema[k].domain.kind == VarDomain::Kind::bits)
            out += as_bits(state.vars[k]).render();
        else
            out += std::to_string(as_count(state.vars[k]));
    }
    return out;
}

NodeLocalState parse_local_state(const std::string& text, const NodeSchema& schema) {
    NodeLocalState state;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < schema.size(); ++k) {
        const std::size_t end = text.find(',', pos);
        const std::string field =
            text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        const std::size_t eq = field.find('=');
        if (eq == std::string::npos || field.substr(0, eq) != schema[k].name)
            throw std::invalid_argument("trace state field does not match schema");
        const std::string value = field.substr(eq + 1);
        if (schema[k].domain.kind == VarDomain::Kind::bits)
            state.vars.emplace_back(Bitstring::parse(value));
        else
            state.vars.emplace_back(static_cast<std::uint64_t>(std::stoull(value)));
        if (end == std::string::npos) {
            if (k + 1 != schema.size()) throw std::invalid_argument("trace state too short");
            return state;
        }
        pos = end + 1;
    }
    throw std::invalid_argument("trace state has trailing fields");
}

void trace_export(const Trace& trace, const NodeProgram& program, std::ostream& os) {
    os << "latlin-trace v1\n";
    os << "nodes " << program.node_count << "\n";
    for (NodeId i = 1; i <= program.node_count; ++i)
        os << "init " << i << " "
           << render_local_state(trace.initial.at(i), *program.schemas.at(i - 1)) << "\n";
    for (const auto& e : trace.entries) {
        os << "step " << e.step << " node " << e.node << " rule " << e.rule << " reads ";
        if (e.reads.empty()) {
            os << "-";
        } else {
            for (std::size_t k = 0; k < e.reads.size(); ++k) {
                if (k > 0) os << ",";
                os << e.reads[k].source << ":" << e.reads[k].versions_behind;
            }
        }
        os << " state " << render_local_state(e.new_state, *program.schemas.at(e.node - 1))
           << "\n";
    }
}

Trace trace_parse(std::istream& is, const NodeProgram& program) {
    Trace trace;
    std::string line;
    if (!std::getline(is, line) || line != "latlin-trace v1")
        throw std::invalid_argument("bad trace header");
    if (!std::getline(is, line)) throw std::invalid_argument("missing node count");
    {
        std::istringstream ls(line);
        std::string tag;
        std::size_t count = 0;
        ls >> tag >> count;
        if (tag != "nodes" || count != program.node_count)
            throw std::invalid_argument("trace node count mismatch");
    }
    trace.initial.locals.resize(program.node_count);
    for (NodeId i = 1; i <= program.node_count; ++i) {
        if (!std::getline(is, line)) throw std::invalid_argument("missing init record");
        std::istringstream ls(line);
        std::string tag, rendered;
        NodeId id = 0;
        ls >> tag >> id >> rendered;
        if (tag != "init" || id != i) throw std::invalid_argument("bad init record");
        trace.initial.at(i) = parse_local_state(rendered, *program.schemas.at(i - 1));
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, nodetag, ruletag, readstag, statetag, rulename, readlist, rendered;
        TraceEntry e;
        ls >> tag >> e.step >> nodetag >> e.node >> ruletag >> rulename >> readstag >> readlist >>
            statetag >> rendered;
        if (tag != "step" || nodetag != "node" || ruletag != "rule" || readstag != "reads" ||
            statetag != "state")
            throw std::invalid_argument("bad trace entry");
        e.rule = rulename;
        if (readlist != "-") {
            std::istringstream rs(readlist);
            std::string item;
            while (std::getline(rs, item, ',')) {
                const std::size_t colon = item.find(':');
                if (colon == std::string::npos) throw std::invalid_argument("bad read record");
                e.reads.push_back({static_cast<NodeId>(std::stoull(item.substr(0, colon))),
                                   std::stoull(item.substr(colon + 1))});
            }
        }
        e.new_state = parse_local_state(rendered, *program.schemas.at(e.node - 1));
        trace.entries.push_back(std::move(e));
    }
    return trace;
}

GlobalState trace_replay(const Trace& trace) {
    GlobalState state = trace.initial;
    for (const auto& e : trace.entries) state.at(e.node) = e.new_state;
    return state;
}

}  // namespace latlin
