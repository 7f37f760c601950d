#pragma once
#include "casim/error.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace casim {

// Cell states are bit vectors of at most kMaxStateBits bits, blank = all zeros.
inline constexpr int kMaxStateBits = 128;

// Width of a numeric field with maximum value m >= 1: ceil(log2(m+1)).
int num_width(std::int64_t max_value);

// Width of an enumeration field with n >= 2 labels: ceil(log2(n)).
int enum_width(std::size_t label_count);

enum class FieldKind { Boolean, Number, Enumeration, Bitstring };

struct Field {
    std::string name;
    FieldKind kind = FieldKind::Boolean;
    std::int64_t max_value = 1;        // Number only
    std::vector<std::string> labels;   // Enumeration only; value = label index
    int length = 1;                    // Bitstring only
    int width = 1;                     // bits occupied
    int offset = 0;                    // first state bit; the field's MSB lives here
};

Field boolean_field(std::string name);
Field number_field(std::string name, std::int64_t max_value);
Field enum_field(std::string name, std::vector<std::string> labels);
Field bitstring_field(std::string name, int length);

// Ordered, densely packed fields. Field i occupies state bits
// [offset_i, offset_i + width_i), assigned in declaration order from bit 0.
class FieldLayout {
public:
    FieldLayout() = default;
    explicit FieldLayout(std::vector<Field> fields);

    int width() const { return width_; }
    std::size_t size() const { return fields_.size(); }
    const std::vector<Field>& fields() const { return fields_; }
    const Field& at(std::size_t i) const;
    const Field* find(const std::string& name) const;
    int index_of(const std::string& name) const;  // -1 when absent

private:
    std::vector<Field> fields_;
    int width_ = 0;
};

// Fixed-capacity bit vector; bit i of the state is bit (i % 64) of word (i / 64).
struct CellState {
    std::array<std::uint64_t, 2> w{0, 0};

    bool is_blank() const { return (w[0] | w[1]) == 0; }
    bool get_bit(int i) const {
        return (w[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
    }
    void set_bit(int i, bool v) {
        std::uint64_t mask = std::uint64_t{1} << (i & 63);
        std::size_t word = static_cast<std::size_t>(i) >> 6;
        if (v)
            w[word] |= mask;
        else
            w[word] &= ~mask;
    }
    friend bool operator==(const CellState&, const CellState&) = default;
};

struct CellStateHash {
    std::size_t operator()(const CellState& s) const {
        // splitmix64 finalizer over both words
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::uint64_t x : s.w) {
            x += h;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
            h = x ^ (x >> 31);
        }
        return static_cast<std::size_t>(h);
    }
};

// Field values are packed MSB first: state bit `offset` is the value's top bit.
std::int64_t get_field(const CellState& s, const Field& f);
void set_field(CellState& s, const Field& f, std::int64_t value);

// Characters follow state bit order: character j of the string is bit j.
std::string to_bit_string(const CellState& s, int width);
CellState state_from_bits(const std::string& bits);

} // namespace casim
