#include "latlin/bitstring.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace latlin;

namespace {
Bitstring bs(const char* text) { return Bitstring::parse(text); }
}  // namespace

TEST_CASE("parse and render round-trip") {
    CHECK(bs("11011").length() == 5);
    CHECK(bs("11011").value64() == 27);
    CHECK(bs("0").is_zero());
    CHECK(bs("0").length() == 1);
    CHECK_THROWS_AS(Bitstring::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Bitstring::parse("10x1"), std::invalid_argument);
    CHECK_THROWS_AS(Bitstring::parse("102"), std::invalid_argument);

    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        std::string s(1 + rng() % 40, '0');
        for (auto& c : s) c = static_cast<char>('0' + (rng() & 1));
        CHECK(Bitstring::parse(s).render() == s);
    }
}

TEST_CASE("addition keeps the carry digit") {
    CHECK(add(bs("01"), bs("01")).render() == "010");
    CHECK(add(bs("0"), bs("0")).render() == "00");
    CHECK(add(bs("111"), bs("1")).render() == "1000");

    std::mt19937_64 rng(11);
    for (int t = 0; t < 500; ++t) {
        const std::uint64_t a = rng() >> 2, b = rng() >> 2;
        CHECK(add(Bitstring::of_value(a), Bitstring::of_value(b)).value64() == a + b);
    }
}

TEST_CASE("subtraction") {
    CHECK(sub(bs("101"), bs("011")).render() == "010");
    CHECK(sub(bs("1101"), bs("1101")).render() == "0000");
    CHECK_THROWS_AS(sub(bs("01"), bs("10")), std::underflow_error);

    std::mt19937_64 rng(13);
    for (int t = 0; t < 500; ++t) {
        std::uint64_t a = rng() >> 1, b = rng() >> 1;
        if (a < b) std::swap(a, b);
        CHECK(sub(Bitstring::of_value(a), Bitstring::of_value(b)).value64() == a - b);
    }
}

TEST_CASE("comparison ignores leading zeros") {
    CHECK(compare(bs("0011"), bs("11")) == std::strong_ordering::equal);
    CHECK(compare(bs("100"), bs("011")) == std::strong_ordering::greater);
    CHECK(compare(bs("011"), bs("100")) == std::strong_ordering::less);

    std::mt19937_64 rng(17);
    for (int t = 0; t < 500; ++t) {
        const std::uint64_t a = rng(), b = rng();
        const auto got = compare(Bitstring::of_value(a), Bitstring::of_value(b));
        CHECK(got == (a <=> b));
    }
}

TEST_CASE("comparison is a total order invariant under zero-prepends") {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 300; ++t) {
        const std::uint64_t a = rng() % 1000, b = rng() % 1000, c = rng() % 1000;
        const Bitstring x = Bitstring::of_value(a), y = Bitstring::of_value(b),
                        z = Bitstring::of_value(c);
        CHECK(compare(pad_left(x, x.length() + 1 + rng() % 5), y) == compare(x, y));
        if (compare(x, y) != std::strong_ordering::greater &&
            compare(y, z) != std::strong_ordering::greater)
            CHECK(compare(x, z) != std::strong_ordering::greater);
    }
}

TEST_CASE("shifts") {
    CHECK(shl(bs("1"), 2).render() == "100");
    CHECK(shl(bs("11"), 3).value64() == 24);
    CHECK(shl(bs("101"), 0) == bs("101"));
    CHECK(shr(bs("101"), 1).render() == "10");
    CHECK(shr(bs("101"), 0) == bs("101"));
    CHECK(shr(bs("11"), 2).render() == "0");
    CHECK_THROWS_AS(shr(bs("11"), 3), std::out_of_range);
}

TEST_CASE("shl then shr restores the value") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 300; ++t) {
        const Bitstring x = Bitstring::of_value(rng() % 100000);
        const std::size_t k = rng() % 30;
        CHECK(same_value(shr(shl(x, k), k), x));
    }
}

TEST_CASE("slice follows 1-based MSB-first indexing") {
    CHECK(slice(bs("0100"), 1, 2).render() == "01");
    CHECK(slice(bs("11011"), 3, 4).render() == "01");
    CHECK(slice(bs("11011"), 1, 5) == bs("11011"));
    CHECK_THROWS_AS(slice(bs("101"), 0, 2), std::out_of_range);
    CHECK_THROWS_AS(slice(bs("101"), 2, 4), std::out_of_range);
    CHECK_THROWS_AS(slice(bs("101"), 3, 2), std::out_of_range);
}

TEST_CASE("school multiplication against native arithmetic") {
    CHECK(school_mul(bs("0100"), bs("0100")).value64() == 16);
    CHECK(school_mul(bs("1101"), bs("0")).is_zero());

    std::mt19937_64 rng(29);
    for (int t = 0; t < 300; ++t) {
        const std::uint64_t a = rng() & 0xffffffffu, b = rng() & 0xffffffffu;
        CHECK(school_mul(Bitstring::of_value(a), Bitstring::of_value(b)).value64() == a * b);
    }
}

TEST_CASE("add, sub and mul agree with native arithmetic below 2^31") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 400; ++t) {
        const std::uint64_t a = rng() & 0x7fffffffu, b = rng() & 0x7fffffffu;
        const Bitstring x = Bitstring::of_value(a), y = Bitstring::of_value(b);
        CHECK(add(x, y).value64() == a + b);
        CHECK(school_mul(x, y).value64() == a * b);
        if (a >= b) CHECK(sub(x, y).value64() == a - b);
    }
}

TEST_CASE("operations do not mutate their inputs") {
    const Bitstring x = bs("1011"), y = bs("0011");
    const Bitstring xc = x, yc = y;
    (void)add(x, y);
    (void)sub(x, y);
    (void)school_mul(x, y);
    (void)shl(x, 3);
    (void)shr(x, 2);
    (void)slice(x, 2, 3);
    (void)compare(x, y);
    CHECK(x == xc);
    CHECK(y == yc);
}

TEST_CASE("pad and trim helpers") {
    CHECK(pad_left(bs("11"), 4).render() == "0011");
    CHECK(trim_leading_zeros(bs("0011")).render() == "11");
    CHECK(trim_leading_zeros(bs("000")).render() == "0");
    CHECK_THROWS_AS(pad_left(bs("111"), 2), std::invalid_argument);
}

TEST_CASE("fixed-width construction and 64-bit overflow") {
    CHECK(Bitstring::of_value(5, 6).render() == "000101");
    CHECK_THROWS_AS(Bitstring::of_value(8, 3), std::overflow_error);
    CHECK(pad_left(bs("1"), 70).value64() == 1);
    CHECK_THROWS_AS(shl(bs("1"), 64).value64(), std::overflow_error);
}

TEST_CASE("op counter observes work and never decreases") {
    OpCounter ops;
    const Bitstring x = bs("101101"), y = bs("1101");
    (void)add(x, y, &ops);
    const auto after_add = ops.bit_ops;
    CHECK(after_add > 0);
    (void)sub(x, y, &ops);
    CHECK(ops.bit_ops > after_add);
    CHECK(ops.subtractions == 1);
}
