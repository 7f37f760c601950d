#include "casim/bits.hpp"

#include <doctest.h>

using namespace casim;

TEST_CASE("field widths") {
    CHECK(num_width(1) == 1);
    CHECK(num_width(2) == 2);
    CHECK(num_width(3) == 2);
    CHECK(num_width(4) == 3);
    CHECK(num_width(9) == 4);
    CHECK(num_width(1023) == 10);
    CHECK(num_width(1024) == 11);
    CHECK_THROWS_AS(num_width(0), Error);

    CHECK(enum_width(2) == 1);
    CHECK(enum_width(3) == 2);
    CHECK(enum_width(4) == 2);
    CHECK(enum_width(5) == 3);
    CHECK_THROWS_AS(enum_width(1), Error);
}

TEST_CASE("layout packing is consecutive from bit 0") {
    FieldLayout layout({boolean_field("A"), number_field("B", 5), enum_field("C", {"X", "Y", "Z"}),
                        bitstring_field("D", 4)});
    CHECK(layout.width() == 1 + 3 + 2 + 4);
    CHECK(layout.at(0).offset == 0);
    CHECK(layout.at(1).offset == 1);
    CHECK(layout.at(2).offset == 4);
    CHECK(layout.at(3).offset == 6);
    CHECK(layout.find("C")->width == 2);
    CHECK(layout.index_of("D") == 3);
    CHECK(layout.index_of("nope") == -1);

    // a width-9 field following a 3-bit field occupies bits [3, 12)
    FieldLayout two({number_field("P", 7), bitstring_field("Q", 9)});
    CHECK(two.at(1).offset == 3);
    CHECK(two.at(1).offset + two.at(1).width == 12);
}

TEST_CASE("layout rejects duplicates and overflow") {
    CHECK_THROWS_AS(FieldLayout({boolean_field("A"), boolean_field("A")}), Error);
    CHECK_THROWS_AS(FieldLayout({bitstring_field("A", 100), bitstring_field("B", 29)}), Error);
}

TEST_CASE("field values pack most significant bit first") {
    FieldLayout layout({boolean_field("A"), number_field("B", 5)});
    CellState s;
    set_field(s, *layout.find("B"), 5);  // 101 into bits 1..3
    CHECK(to_bit_string(s, layout.width()) == "0101");
    CHECK(get_field(s, *layout.find("B")) == 5);
    CHECK(get_field(s, *layout.find("A")) == 0);

    set_field(s, *layout.find("B"), 9);  // masked to width: 9 mod 8 = 1
    CHECK(get_field(s, *layout.find("B")) == 1);

    set_field(s, *layout.find("A"), 1);
    CHECK(s.get_bit(0));
    CHECK_FALSE(s.is_blank());
}

TEST_CASE("bit string round trip") {
    CellState s = state_from_bits("0100110");
    CHECK(to_bit_string(s, 7) == "0100110");
    CHECK(s.get_bit(1));
    CHECK_FALSE(s.get_bit(2));
    CHECK(state_from_bits("") == CellState{});
    CHECK_THROWS_AS(state_from_bits("012"), Error);
    CHECK(CellState{}.is_blank());
}

TEST_CASE("high bits land in the second word") {
    CellState s;
    s.set_bit(100, true);
    CHECK(s.get_bit(100));
    CHECK_FALSE(s.get_bit(36));
    CHECK(s.w[0] == 0);
    CHECK(s.w[1] == (std::uint64_t{1} << 36));
    CellStateHash h;
    CHECK(h(s) != h(CellState{}));
}
