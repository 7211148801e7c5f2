#include "latlin/parallel.hpp"

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <omp.h>

namespace latlin {

namespace {

// Proposals for one round; slot i-1 is set iff node i fires.
std::uint64_t propose_round(const NodeProgram& prog, const GlobalState& state,
                            std::vector<std::optional<NodeLocalState>>& proposals) {
    const auto n = static_cast<std::int64_t>(prog.node_count);
    std::uint64_t fired = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : fired)
    for (std::int64_t k = 1; k <= n; ++k) {
        const NodeId i = static_cast<NodeId>(k);
        StateView view(state, i);
        for (const auto& rule : prog.rules) {
            if (!rule.guard(i, view)) continue;
            proposals[i - 1] = rule.action(i, view);
            ++fired;
            break;
        }
    }
    return fired;
}

// View over the shared concurrent state: own slot is read directly (its only
// writer is this worker), other slots are copied under their lock on first
// access and the copy is reused for the rest of the activation.
class LockedView final : public ReadView {
public:
    LockedView(std::vector<NodeLocalState>& shared, std::vector<std::mutex>& locks, NodeId self)
        : shared_(shared), locks_(locks), self_(self) {}

    NodeId self() const override { return self_; }

    const NodeLocalState& local(NodeId j) const override {
        if (j == self_) return shared_[j - 1];
        for (const auto& [id, snap] : snapshots_)
            if (id == j) return *snap;
        std::unique_ptr<NodeLocalState> copy;
        {
            std::lock_guard<std::mutex> hold(locks_[j - 1]);
            copy = std::make_unique<NodeLocalState>(shared_[j - 1]);
        }
        snapshots_.emplace_back(j, std::move(copy));
        return *snapshots_.back().second;
    }

private:
    std::vector<NodeLocalState>& shared_;
    std::vector<std::mutex>& locks_;
    NodeId self_;
    mutable std::vector<std::pair<NodeId, std::unique_ptr<NodeLocalState>>> snapshots_;
};

}  // namespace

GlobalState parallel_synchronous_round(const NodeProgram& program, const GlobalState& state) {
    std::vector<std::optional<NodeLocalState>> proposals(program.node_count);
    propose_round(program, state, proposals);
    GlobalState next = state;
    for (NodeId i = 1; i <= program.node_count; ++i)
        if (proposals[i - 1]) next.at(i) = std::move(*proposals[i - 1]);
    return next;
}

ParallelRunResult run_parallel_synchronous(const NodeProgram& program, GlobalState init,
                                           std::uint64_t max_rounds) {
    ParallelRunResult result;
    result.final_state = std::move(init);
    std::vector<std::optional<NodeLocalState>> proposals(program.node_count);
    while (result.rounds < max_rounds) {
        const std::uint64_t fired = propose_round(program, result.final_state, proposals);
        if (fired == 0) {
            result.converged = true;
            return result;
        }
        for (NodeId i = 1; i <= program.node_count; ++i) {
            if (!proposals[i - 1]) continue;
            result.final_state.at(i) = std::move(*proposals[i - 1]);
            proposals[i - 1].reset();
        }
        ++result.rounds;
        result.firings += fired;
    }
    result.converged = quiescent(program, result.final_state);
    return result;
}

ParallelRunResult run_concurrent(const NodeProgram& program, GlobalState init,
                                 std::uint64_t max_sweeps, int threads) {
    const std::size_t n = program.node_count;
    std::vector<NodeLocalState> shared = std::move(init.locals);
    std::vector<std::mutex> locks(n);

    std::atomic<std::uint64_t> sweep_fired{0};
    std::atomic<std::uint64_t> total_firings{0};
    std::uint64_t sweeps = 0;
    bool done = false;

    if (threads <= 0) threads = omp_get_max_threads();

#pragma omp parallel num_threads(threads)
    {
        const std::size_t nthreads = static_cast<std::size_t>(omp_get_num_threads());
        const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
        const std::size_t chunk = (n + nthreads - 1) / nthreads;
        const NodeId first = static_cast<NodeId>(tid * chunk + 1);
        const NodeId last = static_cast<NodeId>(std::min(n, (tid + 1) * chunk));

        while (true) {
            std::uint64_t mine = 0;
            for (NodeId i = first; i <= last; ++i) {
                LockedView view(shared, locks, i);
                for (const auto& rule : program.rules) {
                    if (!rule.guard(i, view)) continue;
                    NodeLocalState next = rule.action(i, view);
                    {
                        std::lock_guard<std::mutex> hold(locks[i - 1]);
                        shared[i - 1] = std::move(next);
                    }
                    ++mine;
                    break;
                }
            }
            sweep_fired.fetch_add(mine, std::memory_order_relaxed);
            total_firings.fetch_add(mine, std::memory_order_relaxed);
#pragma omp barrier
#pragma omp single
            {
                ++sweeps;
                if (sweep_fired.load() == 0 || sweeps >= max_sweeps) done = true;
                sweep_fired.store(0);
            }
            // The single's implicit barrier publishes `done` to everyone.
            if (done) break;
        }
    }

    ParallelRunResult result;
    result.final_state.locals = std::move(shared);
    result.rounds = sweeps;
    result.firings = total_firings.load();
    result.converged = quiescent(program, result.final_state);
    return result;
}

}  // namespace latlin
