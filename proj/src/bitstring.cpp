#include "latlin/bitstring.hpp"

#include <algorithm>
#include <stdexcept>

namespace latlin {

namespace {

void count_bits(OpCounter* ops, std::uint64_t k) {
    if (ops) ops->bit_ops += k;
}

}  // namespace

Bitstring Bitstring::zeros(std::size_t len) {
    if (len == 0) throw std::invalid_argument("bitstring length must be >= 1");
    return Bitstring(std::vector<std::uint8_t>(len, 0));
}

Bitstring Bitstring::parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty bitstring");
    std::vector<std::uint8_t> bits;
    bits.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bitstring digit must be 0 or 1");
        bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return Bitstring(std::move(bits));
}

Bitstring Bitstring::of_value(std::uint64_t value) {
    std::vector<std::uint8_t> bits;
    do {
        bits.push_back(static_cast<std::uint8_t>(value & 1));
        value >>= 1;
    } while (value != 0);
    std::reverse(bits.begin(), bits.end());
    return Bitstring(std::move(bits));
}

Bitstring Bitstring::of_value(std::uint64_t value, std::size_t len) {
    if (len == 0) throw std::invalid_argument("bitstring length must be >= 1");
    if (len < 64 && value >> len)
        throw std::overflow_error("value does not fit in requested length");
    std::vector<std::uint8_t> bits(len, 0);
    for (std::size_t k = 0; k < len && k < 64; ++k)
        bits[len - 1 - k] = static_cast<std::uint8_t>((value >> k) & 1);
    return Bitstring(std::move(bits));
}

std::string Bitstring::render() const {
    std::string out;
    out.reserve(bits_.size());
    for (auto b : bits_) out.push_back(static_cast<char>('0' + b));
    return out;
}

void Bitstring::throw_bit_range() { throw std::out_of_range("bit index"); }

bool Bitstring::is_zero() const {
    return std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b == 0; });
}

std::uint64_t Bitstring::value64() const {
    std::uint64_t v = 0;
    std::size_t significant = 0;
    for (auto b : bits_) {
        if (significant > 0 || b) ++significant;
        if (significant > 64) throw std::overflow_error("value exceeds 64 bits");
        v = (v << 1) | b;
    }
    return v;
}

std::strong_ordering compare(const Bitstring& x, const Bitstring& y, OpCounter* ops) {
    const auto lx = x.length(), ly = y.length();
    const auto width = std::max(lx, ly);
    count_bits(ops, width);
    for (std::size_t k = 1; k <= width; ++k) {
        // Align on the right: position k counts from the most significant of
        // the wider operand, so the shorter one is zero-extended on the left.
        const int bx = k > width - lx ? x.bit(k - (width - lx)) : 0;
        const int by = k > width - ly ? y.bit(k - (width - ly)) : 0;
        if (bx != by) return bx < by ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
}

Bitstring add(const Bitstring& x, const Bitstring& y, OpCounter* ops) {
    const auto lx = x.length(), ly = y.length();
    const auto len = std::max(lx, ly) + 1;
    count_bits(ops, len);
    std::vector<std::uint8_t> out(len, 0);
    int carry = 0;
    for (std::size_t k = 0; k < len; ++k) {
        const int bx = k < lx ? x.bits_[lx - 1 - k] : 0;
        const int by = k < ly ? y.bits_[ly - 1 - k] : 0;
        const int s = bx + by + carry;
        out[len - 1 - k] = static_cast<std::uint8_t>(s & 1);
        carry = s >> 1;
    }
    return Bitstring(std::move(out));
}

Bitstring sub(const Bitstring& x, const Bitstring& y, OpCounter* ops) {
    if (compare(x, y, ops) == std::strong_ordering::less)
        throw std::underflow_error("bitstring subtraction underflow");
    const auto lx = x.length(), ly = y.length();
    count_bits(ops, lx);
    if (ops) ops->subtractions += 1;
    std::vector<std::uint8_t> out(lx, 0);
    int borrow = 0;
    for (std::size_t k = 0; k < lx; ++k) {
        const int bx = x.bits_[lx - 1 - k];
        const int by = k < ly ? y.bits_[ly - 1 - k] : 0;
        int d = bx - by - borrow;
        borrow = d < 0;
        out[lx - 1 - k] = static_cast<std::uint8_t>(d & 1);
    }
    return Bitstring(std::move(out));
}

Bitstring shl(const Bitstring& x, std::size_t k, OpCounter* ops) {
    count_bits(ops, k);
    std::vector<std::uint8_t> out(x.bits_);
    out.insert(out.end(), k, 0);
    return Bitstring(std::move(out));
}

Bitstring shr(const Bitstring& x, std::size_t k, OpCounter* ops) {
    if (k > x.length()) throw std::out_of_range("shift exceeds length");
    count_bits(ops, k);
    std::vector<std::uint8_t> out(x.bits_.begin(), x.bits_.end() - static_cast<std::ptrdiff_t>(k));
    if (out.empty()) out.push_back(0);
    return Bitstring(std::move(out));
}

Bitstring slice(const Bitstring& x, std::size_t i, std::size_t j, OpCounter* ops) {
    if (i < 1 || i > j || j > x.length()) throw std::out_of_range("slice bounds");
    count_bits(ops, j - i + 1);
    return Bitstring(std::vector<std::uint8_t>(x.bits_.begin() + static_cast<std::ptrdiff_t>(i - 1),
                                               x.bits_.begin() + static_cast<std::ptrdiff_t>(j)));
}

Bitstring append_bit(const Bitstring& x, int bit, OpCounter* ops) {
    count_bits(ops, 1);
    std::vector<std::uint8_t> out(x.bits_);
    out.push_back(static_cast<std::uint8_t>(bit & 1));
    return Bitstring(std::move(out));
}

Bitstring school_mul(const Bitstring& x, const Bitstring& y, OpCounter* ops) {
    Bitstring acc;
    const auto ly = y.length();
    for (std::size_t k = 1; k <= ly; ++k) {
        count_bits(ops, 1);
        if (y.bit(k)) acc = add(acc, shl(x, ly - k, ops), ops);
    }
    return acc;
}

Bitstring pad_left(const Bitstring& x, std::size_t len) {
    if (len < x.length()) throw std::invalid_argument("pad_left cannot shorten");
    std::vector<std::uint8_t> out(len - x.length(), 0);
    out.insert(out.end(), x.bits_.begin(), x.bits_.end());
    return Bitstring(std::move(out));
}

Bitstring trim_leading_zeros(const Bitstring& x) {
    std::size_t first = 0;
    while (first + 1 < x.length() && x.bits_[first] == 0) ++first;
    return Bitstring(std::vector<std::uint8_t>(x.bits_.begin() + static_cast<std::ptrdiff_t>(first),
                                               x.bits_.end()));
}

}  // namespace latlin
