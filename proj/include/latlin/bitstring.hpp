#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace latlin {

// Counts primitive work done by the arithmetic routines. Passed around as an
// optional observer so oracle runs and measured runs stay separate.
struct OpCounter {
    std::uint64_t bit_ops = 0;
    std::uint64_t subtractions = 0;
};

// Arbitrary-length binary number, most significant digit first.
// Digit positions are 1-based: bit(1) is the leftmost digit. Leading zeros
// are kept and count toward length(); nothing is normalized implicitly.
class Bitstring {
public:
    // The zero bitstring "0".
    Bitstring() : bits_{0} {}

    static Bitstring zeros(std::size_t len);

    // Parses a nonempty string over {0,1}. Throws std::invalid_argument
    // otherwise.
    static Bitstring parse(std::string_view text);

    // Minimal-length representation of a machine value ("0" for zero).
    static Bitstring of_value(std::uint64_t value);

    // Fixed-length representation; throws std::overflow_error if the value
    // does not fit in len digits.
    static Bitstring of_value(std::uint64_t value, std::size_t len);

    std::string render() const;

    std::size_t length() const { return bits_.size(); }

    // 1-based, MSB first. Throws std::out_of_range.
    int bit(std::size_t i) const {
        if (i < 1 || i > bits_.size()) throw_bit_range();
        return bits_[i - 1];
    }

    bool is_zero() const;

    // Numeric value; throws std::overflow_error if it does not fit in 64 bits.
    std::uint64_t value64() const;

    // Representation equality: same digits, same length. Use compare() for
    // numeric comparison that ignores leading zeros.
    bool operator==(const Bitstring&) const = default;

private:
    explicit Bitstring(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

    [[noreturn]] static void throw_bit_range();

    std::vector<std::uint8_t> bits_;  // bits_[0] is the most significant digit

    friend Bitstring add(const Bitstring&, const Bitstring&, OpCounter*);
    friend Bitstring sub(const Bitstring&, const Bitstring&, OpCounter*);
    friend Bitstring shl(const Bitstring&, std::size_t, OpCounter*);
    friend Bitstring shr(const Bitstring&, std::size_t, OpCounter*);
    friend Bitstring slice(const Bitstring&, std::size_t, std::size_t, OpCounter*);
    friend Bitstring append_bit(const Bitstring&, int, OpCounter*);
    friend Bitstring pad_left(const Bitstring&, std::size_t);
    friend Bitstring trim_leading_zeros(const Bitstring&);
};

// Numeric ordering, ignoring leading zeros.
std::strong_ordering compare(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr);

inline bool same_value(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr) {
    return compare(x, y, ops) == std::strong_ordering::equal;
}

// value(x) + value(y); result length is max(|x|,|y|) + 1 (the carry digit is
// kept even when zero).
Bitstring add(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr);

// value(x) - value(y); result length is |x|. Throws std::underflow_error when
// value(x) < value(y).
Bitstring sub(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr);

// Appends k zero digits on the right: value * 2^k, length |x| + k.
Bitstring shl(const Bitstring& x, std::size_t k, OpCounter* ops = nullptr);

// Deletes the rightmost k digits; an emptied result becomes "0". Throws
// std::out_of_range when k > |x|.
Bitstring shr(const Bitstring& x, std::size_t k, OpCounter* ops = nullptr);

// Digits i..j inclusive, 1-based. Throws std::out_of_range unless
// 1 <= i <= j <= |x|.
Bitstring slice(const Bitstring& x, std::size_t i, std::size_t j, OpCounter* ops = nullptr);

// x with one digit appended on the right (length |x| + 1).
Bitstring append_bit(const Bitstring& x, int bit, OpCounter* ops = nullptr);

// Shift-and-add product. Deliberately naive; serves as the independent
// multiplication oracle, so it must share no code path with Karatsuba.
Bitstring school_mul(const Bitstring& x, const Bitstring& y, OpCounter* ops = nullptr);

// Zero-extends on the left to exactly len digits (len >= |x| required).
Bitstring pad_left(const Bitstring& x, std::size_t len);

// Drops leading zeros, keeping at least one digit.
Bitstring trim_leading_zeros(const Bitstring& x);

}  // namespace latlin
