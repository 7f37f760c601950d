#include "casim/bits.hpp"

#include <bit>
#include <unordered_set>

namespace casim {

int num_width(std::int64_t max_value) {
    if (max_value < 1)
        raise(ErrorKind::Validate, "numeric field maximum must be >= 1");
    return std::bit_width(static_cast<std::uint64_t>(max_value));
}

int enum_width(std::size_t label_count) {
    if (label_count < 2)
        raise(ErrorKind::Validate, "enumeration needs at least 2 labels");
    return std::bit_width(label_count - 1);
}

Field boolean_field(std::string name) {
    Field f;
    f.name = std::move(name);
    f.kind = FieldKind::Boolean;
    f.width = 1;
    return f;
}

Field number_field(std::string name, std::int64_t max_value) {
    Field f;
    f.name = std::move(name);
    f.kind = FieldKind::Number;
    f.max_value = max_value;
    f.width = num_width(max_value);
    return f;
}

Field enum_field(std::string name, std::vector<std::string> labels) {
    Field f;
    f.name = std::move(name);
    f.kind = FieldKind::Enumeration;
    f.width = enum_width(labels.size());
    f.labels = std::move(labels);
    return f;
}

Field bitstring_field(std::string name, int length) {
    if (length < 1)
        raise(ErrorKind::Validate, "bitstring field length must be >= 1");
    Field f;
    f.name = std::move(name);
    f.kind = FieldKind::Bitstring;
    f.length = length;
    f.width = length;
    return f;
}

FieldLayout::FieldLayout(std::vector<Field> fields) : fields_(std::move(fields)) {
    std::unordered_set<std::string> seen;
    int offset = 0;
    for (Field& f : fields_) {
        if (!seen.insert(f.name).second)
            raise(ErrorKind::Validate, "duplicate field name: " + f.name);
        if (f.width < 1)
            raise(ErrorKind::Internal, "field with nonpositive width: " + f.name);
        f.offset = offset;
        offset += f.width;
    }
    if (offset > kMaxStateBits)
        raise(ErrorKind::Capacity, "state width " + std::to_string(offset) + " exceeds " +
                                       std::to_string(kMaxStateBits) + " bits");
    width_ = offset;
}

const Field& FieldLayout::at(std::size_t i) const {
    if (i >= fields_.size())
        raise(ErrorKind::Lookup, "field index out of range");
    return fields_[i];
}

const Field* FieldLayout::find(const std::string& name) const {
    for (const Field& f : fields_)
        if (f.name == name)
            return &f;
    return nullptr;
}

int FieldLayout::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < fields_.size(); ++i)
        if (fields_[i].name == name)
            return static_cast<int>(i);
    return -1;
}

std::int64_t get_field(const CellState& s, const Field& f) {
    std::uint64_t value = 0;
    for (int k = 0; k < f.width; ++k)
        value = (value << 1) | (s.get_bit(f.offset + k) ? 1u : 0u);
    return static_cast<std::int64_t>(value);
}

void set_field(CellState& s, const Field& f, std::int64_t value) {
    std::uint64_t v = static_cast<std::uint64_t>(value);
    if (f.width < 64)
        v &= (std::uint64_t{1} << f.width) - 1;
    for (int k = 0; k < f.width; ++k)
        s.set_bit(f.offset + k, (v >> (f.width - 1 - k)) & 1u);
}

std::string to_bit_string(const CellState& s, int width) {
    std::string out(static_cast<std::size_t>(width), '0');
    for (int i = 0; i < width; ++i)
        if (s.get_bit(i))
            out[static_cast<std::size_t>(i)] = '1';
    return out;
}

CellState state_from_bits(const std::string& bits) {
    if (bits.size() > static_cast<std::size_t>(kMaxStateBits))
        raise(ErrorKind::Capacity, "bit string longer than state capacity");
    CellState s;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        char c = bits[i];
        if (c != '0' && c != '1')
            raise(ErrorKind::Syntax, "bit string may contain only 0 and 1");
        s.set_bit(static_cast<int>(i), c == '1');
    }
    return s;
}

} // namespace casim
