#include "latlin/bitstring.hpp"
#include "latlin/engine.hpp"
#include "latlin/karatsuba.hpp"
#include "latlin/modpar.hpp"
#include "latlin/modseq.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace latlin;

constexpr int kStatusOk = 0;
constexpr int kStatusIncomplete = 1;
constexpr int kStatusBadInput = 2;
constexpr int kStatusBadOutput = 3;

std::string to_decimal(const Bitstring& x) {
    std::string bin = trim_leading_zeros(x).render();
    if (bin == "0") return "0";
    std::string out;
    while (!(bin.size() == 1 && bin[0] == '0')) {
        std::string quotient;
        quotient.reserve(bin.size());
        int rem = 0;
        for (char c : bin) {
            rem = rem * 2 + (c - '0');
            if (rem >= 10) {
                quotient.push_back('1');
                rem -= 10;
            } else {
                quotient.push_back('0');
            }
        }
        out.push_back(static_cast<char>('0' + rem));
        const auto first_one = quotient.find('1');
        bin = first_one == std::string::npos ? "0" : quotient.substr(first_one);
    }
    return {out.rbegin(), out.rend()};
}

std::string result_line(const Bitstring& x) {
    return trim_leading_zeros(x).render() + " (dec " + to_decimal(x) + ")";
}

struct SchedFlags {
    std::string scheduler = "sync";
    std::uint64_t seed = 0;
    std::size_t staleness = 8;
    std::size_t fairness = 0;
    std::int64_t max_steps = -1;  // -1: 50 * node count
    std::string init = "zero";
    std::string trace_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scheduler", scheduler, "Scheduler kind")
            ->check(CLI::IsMember({"sync", "random", "stale"}));
        cmd->add_option("--seed", seed, "Scheduler/init seed (default: $LATLIN_SEED or 0)");
        cmd->add_option("--staleness", staleness, "Staleness bound B for --scheduler stale");
        cmd->add_option("--fairness", fairness, "Fairness window F (0: 2 * node count)");
        cmd->add_option("--max-steps", max_steps, "Step budget (default: 50 * node count)");
        cmd->add_option("--init", init, "Initial state")
            ->check(CLI::IsMember({"zero", "arbitrary"}));
        cmd->add_option("--trace", trace_path, "Write the run trace to this path");
    }

    Scheduler scheduler_config() const {
        Scheduler s;
        s.kind = scheduler == "sync"     ? SchedulerKind::synchronous
                 : scheduler == "random" ? SchedulerKind::random_serial
                                         : SchedulerKind::stale_read;
        s.seed = seed;
        s.staleness_bound = staleness;
        s.fairness_window = fairness;
        return s;
    }

    std::uint64_t budget(std::size_t node_count) const {
        return max_steps < 0 ? 50 * static_cast<std::uint64_t>(node_count)
                             : static_cast<std::uint64_t>(max_steps);
    }
};

int write_trace(const std::string& path, const Trace& trace, const NodeProgram& prog) {
    if (path.empty()) return kStatusOk;
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot open trace path " << path << "\n";
        return kStatusBadOutput;
    }
    trace_export(trace, prog, out);
    out.flush();
    if (!out) {
        std::cerr << "error: failed writing trace to " << path << "\n";
        return kStatusBadOutput;
    }
    return kStatusOk;
}

void print_summary(const RunResult& r, const Bitstring& answer) {
    std::cout << "converged=" << (r.converged ? 1 : 0) << " steps=" << r.steps
              << " rounds=" << r.rounds << " max_staleness=" << r.max_staleness
              << " answer=" << trim_leading_zeros(answer).render() << "\n";
}

ModBackendKind backend_kind(const std::string& name) {
    if (name == "dfa") return ModBackendKind::dfa;
    if (name == "tables") return ModBackendKind::tables;
    return ModBackendKind::long_division;
}

Bitstring random_bits(std::mt19937_64& rng, std::size_t len, bool leading_one) {
    std::string s(len, '0');
    for (auto& c : s) c = static_cast<char>('0' + (rng() & 1));
    if (leading_one) s[0] = '1';
    return Bitstring::parse(s);
}

int cmd_mul(const std::string& n_text, const std::string& m_text, bool simulate,
            const SchedFlags& flags) {
    const Bitstring n = Bitstring::parse(n_text);
    const Bitstring m = Bitstring::parse(m_text);
    const Bitstring product = seq_karatsuba(n, m);
    std::cout << result_line(product) << "\n";
    if (!simulate) return kStatusOk;

    NodeProgram prog = build_karatsuba_program(n, m);
    GlobalState init = flags.init == "arbitrary" ? arbitrary_init(prog, flags.seed)
                                                 : prog.zero_state();
    RunResult r = run(prog, std::move(init), flags.scheduler_config(), flags.budget(prog.node_count),
                      !flags.trace_path.empty());
    print_summary(r, karatsuba_root_answer(r.final_state));
    const int trace_status = write_trace(flags.trace_path, r.trace, prog);
    if (trace_status != kStatusOk) return trace_status;
    return r.converged ? kStatusOk : kStatusIncomplete;
}

int cmd_mod(const std::string& n_text, const std::string& m_text, const std::string& backend,
            bool sequential, const SchedFlags& flags) {
    const Bitstring n = Bitstring::parse(n_text);
    const Bitstring m = Bitstring::parse(m_text);
    if (m.is_zero()) {
        std::cerr << "error: modulus is zero\n";
        return kStatusBadInput;
    }
    if (sequential) {
        const ModBackend be(backend_kind(backend), m);
        std::cout << result_line(be.reduce(n)) << "\n";
        return kStatusOk;
    }
    NodeProgram prog = build_modulo_program(n, m, backend_kind(backend));
    GlobalState init = flags.init == "arbitrary" ? arbitrary_init(prog, flags.seed)
                                                 : prog.zero_state();
    RunResult r = run(prog, std::move(init), flags.scheduler_config(), flags.budget(prog.node_count),
                      !flags.trace_path.empty());
    if (!r.converged) {
        std::cerr << "error: did not converge within budget\n";
        return kStatusIncomplete;
    }
    std::cout << result_line(modulo_root_answer(r.final_state)) << "\n";
    return write_trace(flags.trace_path, r.trace, prog);
}

int cmd_simulate(const std::string& problem, const std::string& n_text, const std::string& m_text,
                 const std::string& backend, const SchedFlags& flags) {
    const Bitstring n = Bitstring::parse(n_text);
    const Bitstring m = Bitstring::parse(m_text);
    NodeProgram prog = problem == "mul" ? build_karatsuba_program(n, m)
                                        : build_modulo_program(n, m, backend_kind(backend));
    GlobalState init = flags.init == "arbitrary" ? arbitrary_init(prog, flags.seed)
                                                 : prog.zero_state();
    RunResult r = run(prog, std::move(init), flags.scheduler_config(), flags.budget(prog.node_count),
                      true);
    const Bitstring& answer = problem == "mul" ? karatsuba_root_answer(r.final_state)
                                               : modulo_root_answer(r.final_state);
    print_summary(r, answer);
    return write_trace(flags.trace_path, r.trace, prog);
}

int cmd_dfa(std::uint64_t m, bool check, bool closed) {
    if (m < 1 || m > kTableModulusLimit) {
        std::cerr << "error: modulus must be in [1, " << kTableModulusLimit << "]\n";
        return kStatusBadInput;
    }
    if (check) {
        for (std::uint64_t v = 1; v <= m; ++v) {
            if (build_dfa_counter_walk(v).delta != build_dfa_closed(v).delta) {
                std::cout << "disagree at m=" << v << "\n";
                return kStatusOk;
            }
        }
        std::cout << "agree\n";
        return kStatusOk;
    }
    dump_dfa(closed ? build_dfa_closed(m) : build_dfa_counter_walk(m), std::cout);
    return kStatusOk;
}

int cmd_bench(const std::vector<std::size_t>& n_bits, const std::vector<std::size_t>& m_bits,
              std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t mb : m_bits) {
        for (std::size_t nb : n_bits) {
            OpCounter seqdiv;
            std::uint64_t transitions = 0;
            bool dfa_done = false;
            for (std::size_t s = 0; s < samples; ++s) {
                const Bitstring n = random_bits(rng, nb, false);
                const Bitstring m = random_bits(rng, mb, true);
                division_modulo(n, m, &seqdiv);
                if (mb <= 22) {
                    OpCounter dc;
                    const Dfa dfa = build_dfa_closed(m.value64());
                    dfa_run(dfa, n, &dc);
                    transitions += dc.bit_ops;
                    dfa_done = true;
                }
            }
            std::cout << "seqdiv n_bits=" << nb << " m_bits=" << mb << " bit_ops=" << seqdiv.bit_ops
                      << " subtractions=" << seqdiv.subtractions << "\n";
            if (dfa_done)
                std::cout << "dfarun n_bits=" << nb << " m_bits=" << mb
                          << " transitions=" << transitions << "\n";

            for (const std::string backend : {"div", "dfa", "tables"}) {
                if (backend == "dfa" && mb > 22) continue;
                if (backend == "tables" && mb > 12) continue;
                OpCounter tree_ops;
                std::uint64_t steps = 0, rounds = 0;
                for (std::size_t s = 0; s < samples; ++s) {
                    const Bitstring n = random_bits(rng, nb, false);
                    const Bitstring m = random_bits(rng, mb, true);
                    NodeProgram prog =
                        build_modulo_program(n, m, backend_kind(backend), &tree_ops);
                    RunResult r = run(prog, prog.zero_state(), Scheduler{}, 50 * prog.node_count,
                                      false);
                    steps += r.steps;
                    rounds += r.rounds;
                }
                std::cout << "tree backend=" << backend << " n_bits=" << nb << " m_bits=" << mb
                          << " bit_ops=" << tree_ops.bit_ops
                          << " subtractions=" << tree_ops.subtractions << " steps=" << steps
                          << " rounds=" << rounds << "\n";
            }
        }
        // Per-combine cost of one Mod(Mul)+Mod(Sum) pair on residues.
        for (const std::string backend : {"div", "dfa", "tables"}) {
            if (backend == "dfa" && mb > 22) continue;
            if (backend == "tables" && mb > 12) continue;
            const Bitstring m = random_bits(rng, mb, true);
            const ModBackend be(backend_kind(backend), m);
            OpCounter ops;
            const Bitstring x = be.reduce(random_bits(rng, mb + 4, false));
            const Bitstring y = be.reduce(random_bits(rng, mb + 4, false));
            const Bitstring z = be.reduce(random_bits(rng, mb + 4, false));
            be.mod_sum(be.mod_mul(x, y, &ops), z, &ops);
            std::cout << "combine backend=" << backend << " m_bits=" << mb
                      << " bit_ops=" << ops.bit_ops << "\n";
        }
    }
    return kStatusOk;
}

std::uint64_t env_seed() {
    if (const char* env = std::getenv("LATLIN_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            return 0;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiplication and modulo as self-stabilizing guarded-action node systems"};
    app.require_subcommand(1);

    const std::uint64_t default_seed = env_seed();

    std::string n_text, m_text;
    std::string backend = "div";
    std::string problem = "mul";
    bool simulate = false, sequential = false, check = false, closed = false;
    std::uint64_t dfa_modulus = 0;
    SchedFlags flags;
    flags.seed = default_seed;

    std::vector<std::size_t> bench_n = {256, 512, 1024, 2048};
    std::vector<std::size_t> bench_m = {8, 16, 32};
    std::size_t bench_samples = 3;

    auto* mul = app.add_subcommand("mul", "Multiply two binary numbers");
    mul->add_option("n", n_text, "First operand (binary)")->required();
    mul->add_option("m", m_text, "Second operand (binary)")->required();
    mul->add_flag("--simulate", simulate, "Also run the node system and report convergence");
    flags.attach(mul);

    auto* mod = app.add_subcommand("mod", "Compute n mod m");
    mod->add_option("n", n_text, "Dividend (binary)")->required();
    mod->add_option("m", m_text, "Modulus (binary)")->required();
    mod->add_option("--backend", backend, "Residue backend")
        ->check(CLI::IsMember({"div", "dfa", "tables"}));
    mod->add_flag("--sequential", sequential, "Bypass the tree, reduce directly");
    flags.attach(mod);

    auto* sim = app.add_subcommand("simulate", "Run a node system and export its trace");
    sim->add_option("--problem", problem, "Which node system")
        ->check(CLI::IsMember({"mul", "mod"}));
    sim->add_option("n", n_text, "First operand (binary)")->required();
    sim->add_option("m", m_text, "Second operand (binary)")->required();
    sim->add_option("--backend", backend, "Residue backend for --problem mod")
        ->check(CLI::IsMember({"div", "dfa", "tables"}));
    flags.attach(sim);

    auto* dfa = app.add_subcommand("dfa", "Dump or verify a divisibility automaton");
    dfa->add_option("m", dfa_modulus, "Modulus (decimal value)")->required();
    dfa->add_flag("--check", check, "Compare the table builder against the closed form for 1..m");
    dfa->add_flag("--closed", closed, "Dump the closed-form table instead");

    auto* bench = app.add_subcommand("bench", "Emit operation-counter records");
    bench->add_option("--n-bits", bench_n, "Dividend sizes to sweep")->delimiter(',');
    bench->add_option("--m-bits", bench_m, "Modulus sizes to sweep")->delimiter(',');
    bench->add_option("--samples", bench_samples, "Random instances per record");
    bench->add_option("--seed", flags.seed, "Sweep seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return kStatusBadInput;
    }

    try {
        if (app.got_subcommand(mul)) return cmd_mul(n_text, m_text, simulate, flags);
        if (app.got_subcommand(mod)) return cmd_mod(n_text, m_text, backend, sequential, flags);
        if (app.got_subcommand(sim)) return cmd_simulate(problem, n_text, m_text, backend, flags);
        if (app.got_subcommand(dfa)) return cmd_dfa(dfa_modulus, check, closed);
        if (app.got_subcommand(bench))
            return cmd_bench(bench_n, bench_m, bench_samples, flags.seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStatusBadInput;
    }
    return kStatusBadInput;
}
