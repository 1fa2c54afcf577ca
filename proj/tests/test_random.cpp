#include "permuton/random.hpp"

#include <doctest.h>

#include <array>
#include <set>

using permuton::Philox4x32;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST_CASE("philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(Philox4x32::generate(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("generator is a pure function of key and counter") {
    Philox4x32 a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    Philox4x32 c(43);
    int same = 0;
    Philox4x32 d(42);
    for (int i = 0; i < 100; ++i) same += c() == d();
    CHECK(same < 3);
}

TEST_CASE("uniform lies in [0,1) with sane mean") {
    Philox4x32 g(7);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = g.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("substreams differ") {
    std::set<std::uint32_t> firsts;
    for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(permuton::substream(1, s)());
    CHECK(firsts.size() > 995);
}
