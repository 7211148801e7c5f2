#include "latlin/modseq.hpp"

#include <ostream>
#include <stdexcept>

namespace latlin {

Bitstring division_modulo(const Bitstring& n, const Bitstring& m, OpCounter* ops) {
    if (m.is_zero()) throw std::domain_error("modulus is zero");
    const std::size_t width = m.length();
    Bitstring ans = Bitstring::zeros(width);
    for (std::size_t i = 1; i <= n.length(); ++i) {
        Bitstring grown = append_bit(ans, n.bit(i), ops);  // width+1 digits
        if (compare(grown, m, ops) != std::strong_ordering::less) grown = sub(grown, m, ops);
        ans = slice(grown, 2, width + 1, ops);  // remainder < m, top digit is 0
    }
    return ans;
}

Dfa build_dfa_counter_walk(std::uint64_t m) {
    if (m < 1) throw std::domain_error("modulus must be >= 1");
    Dfa dfa;
    dfa.modulus = m;
    dfa.delta.resize(m);

    // Counter walk: v enumerates successor states two per source state and
    // wraps back to 0 exactly where 2i+b first reaches m. For odd m the wrap
    // falls between the two transitions of state m>>1, for even m it falls on
    // the state boundary.
    std::uint64_t v = 0;
    const std::uint64_t m_half = m >> 1;
    const int b = static_cast<int>(m & 1);
    std::uint64_t i = 0;
    for (; i < m_half; ++i) {
        dfa.delta[i][0] = static_cast<std::uint32_t>(v++);
        dfa.delta[i][1] = static_cast<std::uint32_t>(v++);
    }
    if (b == 1) {
        dfa.delta[i][0] = static_cast<std::uint32_t>(v++);
        v = 0;
        dfa.delta[i][1] = static_cast<std::uint32_t>(v++);
        ++i;
    } else {
        v = 0;
    }
    for (; i < m; ++i) {
        dfa.delta[i][0] = static_cast<std::uint32_t>(v++);
        dfa.delta[i][1] = static_cast<std::uint32_t>(v++);
    }
    return dfa;
}

Dfa build_dfa_closed(std::uint64_t m) {
    if (m < 1) throw std::domain_error("modulus must be >= 1");
    Dfa dfa;
    dfa.modulus = m;
    dfa.delta.resize(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        dfa.delta[i][0] = static_cast<std::uint32_t>((2 * i) % m);
        dfa.delta[i][1] = static_cast<std::uint32_t>((2 * i + 1) % m);
    }
    return dfa;
}

std::uint64_t dfa_run(const Dfa& dfa, const Bitstring& n, OpCounter* ops) {
    std::uint64_t state = 0;
    for (std::size_t i = 1; i <= n.length(); ++i) {
        state = dfa.delta[state][static_cast<std::size_t>(n.bit(i))];
        if (ops) ops->bit_ops += 1;
    }
    return state;
}

ModTables build_tables(std::uint64_t m) {
    if (m < 1) throw std::domain_error("modulus must be >= 1");
    if (m > kTableModulusLimit) throw std::length_error("modulus exceeds table guard");
    ModTables t;
    t.modulus = m;
    t.sum.resize(m * m);
    t.mul.resize(m * m);
    for (std::uint64_t i = 0; i < m; ++i)
        for (std::uint64_t j = 0; j < m; ++j)
            t.sum[i * m + j] = static_cast<std::uint16_t>((i + j) % m);
    // i*j = i*(j-1) + i, so each row of the product table is one sum lookup
    // per entry.
    for (std::uint64_t i = 0; i < m; ++i) {
        t.mul[i * m] = 0;
        for (std::uint64_t j = 1; j < m; ++j)
            t.mul[i * m + j] = t.sum[static_cast<std::uint64_t>(t.mul[i * m + j - 1]) * m + i];
    }
    return t;
}

std::uint64_t table_mod_sum(const ModTables& t, std::uint64_t x, std::uint64_t y, OpCounter* ops) {
    if (x >= t.modulus || y >= t.modulus) throw std::out_of_range("residue out of range");
    if (ops) ops->bit_ops += 1;
    return t.sum[x * t.modulus + y];
}

std::uint64_t table_mod_mul(const ModTables& t, std::uint64_t x, std::uint64_t y, OpCounter* ops) {
    if (x >= t.modulus || y >= t.modulus) throw std::out_of_range("residue out of range");
    if (ops) ops->bit_ops += 1;
    return t.mul[x * t.modulus + y];
}

void dump_dfa(const Dfa& dfa, std::ostream& os) {
    os << "m=" << dfa.modulus << "\n";
    for (std::size_t i = 0; i < dfa.delta.size(); ++i)
        os << i << " " << dfa.delta[i][0] << " " << dfa.delta[i][1] << "\n";
}

}  // namespace latlin
