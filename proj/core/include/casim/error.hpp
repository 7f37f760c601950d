#pragma once
#include <stdexcept>
#include <string>

namespace casim {

enum class ErrorKind {
    Syntax,        // unparseable source text
    Validate,      // parsed but semantically invalid program
    Capacity,      // a configured budget or width limit was exceeded
    Length,        // a sequence argument has the wrong length
    Lookup,        // a named or coordinate lookup missed
    Precondition,  // caller violated an operation precondition
    Io,            // file or stream failure
    Internal,      // invariant breach inside the library
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace casim
